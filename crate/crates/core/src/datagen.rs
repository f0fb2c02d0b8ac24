//! Seeded synthetic sequence databases.
//!
//! Determinism: the generator draws from `ChaCha8Rng::seed_from_u64(seed)`
//! in a fixed order. For each sequence it draws the length, then for each
//! event the item and then the utility.
//!
//! * Length: geometric on {1, 2, ...}, truncated at `max_length`. The success
//!   probability is solved by bisection so that the mean of the truncated
//!   distribution equals `avg_length`. Sampled by inversion from one uniform
//!   `f64`.
//! * Item: Zipf over ranks 1..=alphabet_size with exponent `item_skew`
//!   (`rand_distr::Zipf`); rank `r` is labelled `r`.
//! * Utility: uniform integer in `[utility_min, utility_max]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use thiserror::Error;

use crate::model::{Event, SequenceDatabase, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub num_sequences: usize,
    pub alphabet_size: usize,
    pub avg_length: f64,
    pub max_length: usize,
    pub utility_min: u64,
    pub utility_max: u64,
    pub item_skew: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            num_sequences: 1000,
            alphabet_size: 100,
            avg_length: 10.0,
            max_length: 50,
            utility_min: 1,
            utility_max: 10,
            item_skew: 1.0,
            seed: 1,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidParams(m.to_owned()));
        if self.alphabet_size == 0 {
            return bad("alphabet size must be at least 1");
        }
        if self.avg_length.is_nan()
            || self.avg_length < 1.0
            || self.avg_length > self.max_length as f64
        {
            return bad("need 1 <= avg length <= max length");
        }
        if self.utility_min > self.utility_max {
            return bad("utility min exceeds utility max");
        }
        if !(self.item_skew.is_finite() && self.item_skew >= 0.0) {
            return bad("item skew must be a finite non-negative number");
        }
        Ok(())
    }
}

/// Mean of a geometric(p) on {1, 2, ...} truncated at `cap`.
fn truncated_geometric_mean(p: f64, cap: usize) -> f64 {
    let q = 1.0 - p;
    (1.0 - q.powi(cap as i32)) / p
}

/// Success probability whose truncated geometric mean is `avg`.
fn solve_success_probability(avg: f64, cap: usize) -> f64 {
    if avg <= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_geometric_mean(mid, cap) > avg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn draw_length(rng: &mut ChaCha8Rng, p: f64, cap: usize) -> usize {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.gen();
    // inversion: smallest k with 1 - (1-p)^k >= u
    let k = ((1.0 - u).ln() / (1.0 - p).ln()).ceil();
    (k.max(1.0) as usize).min(cap)
}

pub fn generate(params: &GenParams) -> Result<SequenceDatabase, GenError> {
    params.validate()?;
    let mut vocab = Vocabulary::new();
    let mut sequences = Vec::with_capacity(params.num_sequences);
    if params.num_sequences == 0 {
        return Ok(SequenceDatabase::new(vocab, sequences).expect("empty database"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let zipf = Zipf::new(params.alphabet_size as u64, params.item_skew)
        .map_err(|e| GenError::InvalidParams(format!("zipf: {e}")))?;
    let p = solve_success_probability(params.avg_length, params.max_length);
    for _ in 0..params.num_sequences {
        let len = draw_length(&mut rng, p, params.max_length);
        let events = (0..len)
            .map(|_| {
                let rank = zipf.sample(&mut rng) as u64;
                let utility = rng.gen_range(params.utility_min..=params.utility_max);
                Event {
                    item: vocab.intern(&rank.to_string()),
                    utility,
                }
            })
            .collect();
        sequences.push(events);
    }
    SequenceDatabase::new(vocab, sequences).map_err(|e| GenError::InvalidParams(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_native, write_native};

    fn bytes(db: &SequenceDatabase) -> Vec<u8> {
        let mut out = Vec::new();
        write_native(db, &mut out).unwrap();
        out
    }

    #[test]
    fn empty() {
        let db = generate(&GenParams {
            num_sequences: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(db.is_empty());
    }

    #[test]
    fn deterministic() {
        let params = GenParams {
            num_sequences: 200,
            seed: 7,
            ..Default::default()
        };
        assert_eq!(
            bytes(&generate(&params).unwrap()),
            bytes(&generate(&params).unwrap())
        );
        let other = GenParams {
            seed: 8,
            ..params.clone()
        };
        assert_ne!(
            bytes(&generate(&params).unwrap()),
            bytes(&generate(&other).unwrap())
        );
    }

    #[test]
    fn parses_back() {
        let db = generate(&GenParams {
            num_sequences: 300,
            ..Default::default()
        })
        .unwrap();
        let back = parse_native(bytes(&db).as_slice()).unwrap();
        assert_eq!(back.len(), db.len());
        assert_eq!(back.total_utility(), db.total_utility());
    }

    #[test]
    fn shape_targets() {
        for (avg, cap) in [(27.0, 213), (5.0, 8), (3.0, 100), (10.0, 10)] {
            let params = GenParams {
                num_sequences: 2000,
                avg_length: avg,
                max_length: cap,
                alphabet_size: 500,
                seed: 3,
                ..Default::default()
            };
            let db = generate(&params).unwrap();
            let mean = db.event_count() as f64 / db.len() as f64;
            assert!(
                (mean - avg).abs() <= 0.1 * avg,
                "avg {avg} cap {cap}: got {mean}"
            );
            assert!(db.max_length() <= cap);
            assert!(db
                .sequences()
                .iter()
                .flat_map(|s| &s.events)
                .all(|e| (1..=10).contains(&e.utility)));
        }
    }

    #[test]
    fn invalid_params() {
        for p in [
            GenParams {
                alphabet_size: 0,
                ..Default::default()
            },
            GenParams {
                avg_length: 0.5,
                ..Default::default()
            },
            GenParams {
                avg_length: 60.0,
                max_length: 50,
                ..Default::default()
            },
            GenParams {
                utility_min: 5,
                utility_max: 4,
                ..Default::default()
            },
            GenParams {
                item_skew: f64::NAN,
                ..Default::default()
            },
        ] {
            assert!(generate(&p).is_err(), "{p:?}");
        }
    }
}
