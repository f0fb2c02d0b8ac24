//! Depth-first rule mining over the utility-linked table.
//!
//! Pipeline: optional duplicate removal, SEU item pruning, table
//! construction, then for every header item a depth-first walk that grows the
//! sequence record table one item at a time. Each table reached is cut into
//! rules in one pass: support only decreases along a path, so the valid
//! antecedent lengths form a contiguous range found by binary search, and
//! every rule cut from the same item sequence shares that sequence's utility.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{prune_unpromising, RemainingBound, SeuMode};
use crate::io::dedup_max_utility;
use crate::model::{confidence_at_least, Rule, SequenceDatabase, Threshold};
use crate::srt::{init_row, SequenceRecordTable, SrtRow};
use crate::ult::{Ult, UltHeader};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MineError {
    #[error("minconf must lie in (0, 1], got {0}")]
    InvalidMinconf(Threshold),
    #[error("max prefix length must be at least 1")]
    InvalidPrefixCap,
    #[error("failed to start worker pool: {0}")]
    ThreadPool(String),
}

/// The pruning ablations: full method, no item pruning, no extension-bound
/// pruning, and RU in place of RRU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Rsc,
    Rscn,
    Rscp,
    Rscr,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Rsc, Variant::Rscn, Variant::Rscp, Variant::Rscr];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Rsc => "rsc",
            Variant::Rscn => "rscn",
            Variant::Rscp => "rscp",
            Variant::Rscr => "rscr",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rsc" => Ok(Variant::Rsc),
            "rscn" => Ok(Variant::Rscn),
            "rscp" => Ok(Variant::Rscp),
            "rscr" => Ok(Variant::Rscr),
            other => Err(format!(
                "unknown variant {other:?} (expected rsc, rscn, rscp or rscr)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiningConfig {
    /// Absolute utility threshold (already multiplied through by u(D)).
    pub minutil: Threshold,
    pub minconf: Threshold,
    /// Drop items whose SEU is below minutil before building the table.
    pub use_seu_prune: bool,
    /// Skip extensions whose bound is below minutil.
    pub use_rrs_prune: bool,
    /// false substitutes RU for RRU in every bound.
    pub use_rru: bool,
    /// Apply the extension-bound gate to the first extension of each item too.
    pub gate_top_level: bool,
    pub seu_mode: SeuMode,
    pub dedup: bool,
    pub max_prefix_len: Option<usize>,
    /// 0 or 1 runs on the calling thread.
    pub threads: usize,
}

impl MiningConfig {
    pub fn new(minutil: Threshold, minconf: Threshold) -> Self {
        Self {
            minutil,
            minconf,
            use_seu_prune: true,
            use_rrs_prune: true,
            use_rru: true,
            gate_top_level: true,
            seu_mode: SeuMode::DistinctMax,
            dedup: false,
            max_prefix_len: None,
            threads: 1,
        }
    }

    /// minutil = delta × u(D) of `db` as given (before any preprocessing).
    pub fn from_delta(
        db: &SequenceDatabase,
        delta: Threshold,
        minconf: Threshold,
    ) -> Result<Self, crate::model::ModelError> {
        Ok(Self::new(delta.scale(db.total_utility())?, minconf))
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.use_seu_prune = variant != Variant::Rscn;
        self.use_rrs_prune = variant != Variant::Rscp;
        self.use_rru = variant != Variant::Rscr;
        self
    }

    pub fn bound(&self) -> RemainingBound {
        if self.use_rru {
            RemainingBound::Rru
        } else {
            RemainingBound::Ru
        }
    }

    pub fn validate(&self) -> Result<(), MineError> {
        if !self.minconf.is_valid_confidence() {
            return Err(MineError::InvalidMinconf(self.minconf));
        }
        if self.max_prefix_len == Some(0) {
            return Err(MineError::InvalidPrefixCap);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiningStats {
    pub sequences: usize,
    pub distinct_items: usize,
    pub items_after_pruning: usize,
    pub minutil: Threshold,
    /// Rows materialized in the sequence record table (every candidate
    /// sequence, single items included).
    pub candidates: u64,
    pub srt_growth_calls: u64,
    pub rrs_prunes: u64,
    pub rules: u64,
    pub runtime_ms: u128,
}

impl MiningStats {
    fn absorb(&mut self, other: &Counters) {
        self.candidates += other.candidates;
        self.srt_growth_calls += other.srt_growth_calls;
        self.rrs_prunes += other.rrs_prunes;
        self.rules += other.rules;
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Counters {
    candidates: u64,
    srt_growth_calls: u64,
    rrs_prunes: u64,
    rules: u64,
}

/// Smallest index `k` into `antecedent_supports` (which must be
/// non-increasing) with `sup_n / antecedent_supports[k] >= minconf`, or
/// `antecedent_supports.len()` if there is none.
pub fn find_cut_start(antecedent_supports: &[u64], sup_n: u64, minconf: Threshold) -> usize {
    antecedent_supports.partition_point(|&s| !confidence_at_least(sup_n, s, minconf))
}

/// Emits every rule that can be cut from the item sequence described by
/// `srt`. Returns the number of rules emitted.
pub fn rule_produce(
    srt: &SequenceRecordTable,
    minutil: Threshold,
    minconf: Threshold,
    out: &mut Vec<Rule>,
) -> usize {
    let rows = srt.rows();
    let n = rows.len();
    if n < 2 {
        return 0;
    }
    let last = &rows[n - 1];
    if !minutil.admits(last.until_utility)
        || !confidence_at_least(last.support, rows[n - 2].support, minconf)
    {
        return 0;
    }
    let supports: Vec<u64> = rows[..n - 1].iter().map(|r| r.support).collect();
    let start = find_cut_start(&supports, last.support, minconf);
    let items = srt.items();
    for cut in start..n - 1 {
        out.push(Rule {
            antecedent: items[..=cut].to_vec(),
            consequent: items[cut + 1..].to_vec(),
            utility: last.until_utility,
            support: last.support,
            antecedent_support: supports[cut],
        });
    }
    n - 1 - start
}

struct Walker<'u, 'o> {
    ult: &'u Ult,
    cfg: &'u MiningConfig,
    bound: RemainingBound,
    srt: SequenceRecordTable,
    rules: Vec<Rule>,
    counters: Counters,
    observer: Option<&'o mut dyn FnMut(&SequenceRecordTable)>,
}

impl<'u, 'o> Walker<'u, 'o> {
    fn new(
        ult: &'u Ult,
        cfg: &'u MiningConfig,
        observer: Option<&'o mut dyn FnMut(&SequenceRecordTable)>,
    ) -> Self {
        Self {
            ult,
            cfg,
            bound: cfg.bound(),
            srt: SequenceRecordTable::new(ult),
            rules: Vec::new(),
            counters: Counters::default(),
            observer,
        }
    }

    fn at_cap(&self) -> bool {
        self.cfg
            .max_prefix_len
            .is_some_and(|cap| self.srt.len() >= cap)
    }

    fn push(&mut self, row: SrtRow) {
        self.srt.push_row(row);
        self.counters.candidates += 1;
        if let Some(obs) = self.observer.as_mut() {
            obs(&self.srt);
        }
    }

    fn mine_root(&mut self, header: &UltHeader) {
        let row = init_row(self.ult, header.item, self.bound);
        self.push(row);
        if !self.at_cap() {
            let gate = self.cfg.use_rrs_prune && self.cfg.gate_top_level;
            self.grow_children(gate);
        }
        self.srt.pop_row();
    }

    fn grow_children(&mut self, gate: bool) {
        for ext in self.srt.scan_extensions(self.ult, self.bound) {
            if gate && !self.cfg.minutil.admits(ext.rrs) {
                self.counters.rrs_prunes += 1;
                continue;
            }
            self.srt_growth(ext.row);
        }
    }

    fn srt_growth(&mut self, row: SrtRow) {
        self.counters.srt_growth_calls += 1;
        self.push(row);
        let emitted = rule_produce(
            &self.srt,
            self.cfg.minutil,
            self.cfg.minconf,
            &mut self.rules,
        );
        self.counters.rules += emitted as u64;
        if !self.at_cap() {
            self.grow_children(self.cfg.use_rrs_prune);
        }
        self.srt.pop_row();
    }
}

/// Applies the configured preprocessing (duplicate removal, then SEU
/// pruning) and returns the database the table is built from.
pub fn prepare(db: &SequenceDatabase, cfg: &MiningConfig) -> SequenceDatabase {
    let db = if cfg.dedup {
        dedup_max_utility(db)
    } else {
        db.clone()
    };
    if cfg.use_seu_prune {
        prune_unpromising(&db, cfg.minutil, cfg.seu_mode)
    } else {
        db
    }
}

/// Mines every rule with utility at least `cfg.minutil` and confidence at
/// least `cfg.minconf`. Rules come out in depth-first order (header order,
/// then extension order), cut points left to right; the order does not depend
/// on the thread count.
pub fn mine(
    db: &SequenceDatabase,
    cfg: &MiningConfig,
) -> Result<(Vec<Rule>, MiningStats), MineError> {
    cfg.validate()?;
    let started = Instant::now();
    let prepared = prepare(db, cfg);
    let ult = Ult::build(&prepared);
    let mut stats = MiningStats {
        sequences: db.len(),
        distinct_items: db.distinct_items(),
        items_after_pruning: ult.headers().len(),
        minutil: cfg.minutil,
        ..Default::default()
    };

    let mut rules = Vec::new();
    if cfg.threads <= 1 {
        let mut walker = Walker::new(&ult, cfg, None);
        for header in ult.headers() {
            walker.mine_root(header);
        }
        stats.absorb(&walker.counters);
        rules = walker.rules;
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| MineError::ThreadPool(e.to_string()))?;
        let parts: Vec<(Vec<Rule>, Counters)> = pool.install(|| {
            ult.headers()
                .par_iter()
                .map(|header| {
                    let mut walker = Walker::new(&ult, cfg, None);
                    walker.mine_root(header);
                    (walker.rules, walker.counters)
                })
                .collect()
        });
        for (part, counters) in parts {
            rules.extend(part);
            stats.absorb(&counters);
        }
    }
    stats.runtime_ms = started.elapsed().as_millis();
    Ok((rules, stats))
}

/// Single-threaded [`mine`] that calls `observer` after every row push.
pub fn mine_observed(
    db: &SequenceDatabase,
    cfg: &MiningConfig,
    observer: &mut dyn FnMut(&SequenceRecordTable),
) -> Result<(Vec<Rule>, MiningStats), MineError> {
    cfg.validate()?;
    let started = Instant::now();
    let prepared = prepare(db, cfg);
    let ult = Ult::build(&prepared);
    let mut stats = MiningStats {
        sequences: db.len(),
        distinct_items: db.distinct_items(),
        items_after_pruning: ult.headers().len(),
        minutil: cfg.minutil,
        ..Default::default()
    };
    let mut walker = Walker::new(&ult, cfg, Some(observer));
    for header in ult.headers() {
        walker.mine_root(header);
    }
    stats.absorb(&walker.counters);
    stats.runtime_ms = started.elapsed().as_millis();
    Ok((walker.rules, stats))
}
