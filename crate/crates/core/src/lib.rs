//! Mining of high-utility, totally ordered sequential rules.
//!
//! A database is a list of sequences of `(item, utility)` events. A rule
//! `X ==> Y` (disjoint, non-empty, no repeated items) holds in a sequence
//! when the concatenated item sequence `X ++ Y` embeds in it; its utility is
//! the sum over sequences of the best embedding's utility, and its
//! confidence is `sup(X ++ Y) / sup(X)`.
//!
//! The miner walks candidate item sequences depth first over a
//! [`ult::Ult`] index, tracking each path in a [`srt::SequenceRecordTable`],
//! and cuts every reached item sequence into all of its qualifying rules at
//! once. [`oracle`] recomputes the same answer from the definitions alone.
//!
//! ```
//! use seqrule::{io, miner, model::Threshold};
//!
//! let db = io::parse_native_str("a:1 c:2 c:3\nb:5 c:2 e:8 b:6\na:2 c:2 f:10\n").unwrap();
//! let cfg = miner::MiningConfig::new(Threshold::parse_decimal("5").unwrap(), Threshold::parse_decimal("0.6").unwrap());
//! let (rules, _stats) = miner::mine(&db, &cfg).unwrap();
//! assert!(rules.iter().any(|r| r.display(db.vocabulary()).to_string() == "a ==> c"));
//! ```

pub mod bounds;
pub mod datagen;
pub mod io;
pub mod miner;
pub mod model;
pub mod oracle;
pub mod srt;
pub mod ult;

pub use miner::{mine, MiningConfig, MiningStats, Variant};
pub use model::{ItemId, Rule, SequenceDatabase, Threshold};
