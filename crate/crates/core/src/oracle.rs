//! Brute-force reference miner, computed straight from the definitions of
//! occurrence, utility, support and confidence. It shares nothing with the
//! table-based miner beyond the model types and is meant for small inputs.

use std::collections::BTreeSet;

use crate::model::{confidence_at_least, ItemId, Rule, Sequence, SequenceDatabase, Threshold};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Longest item sequence enumerated.
    pub max_len: usize,
    pub minutil: Threshold,
    pub minconf: Threshold,
}

impl OracleConfig {
    pub fn new(minutil: Threshold, minconf: Threshold) -> Self {
        Self {
            max_len: 8,
            minutil,
            minconf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutput {
    /// Qualifying rules in canonical (sorted) order.
    pub rules: Vec<Rule>,
    /// Set when some pattern of length `max_len` could still be extended,
    /// i.e. the enumeration was cut short.
    pub truncated: bool,
}

/// Utility and support of one distinct-item pattern present in the database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternStats {
    pub items: Vec<ItemId>,
    pub utility: u64,
    pub support: u64,
}

/// Best summed utility over all strictly increasing embeddings of `pattern`
/// into `seq`, or `None` if it does not embed.
pub fn max_embedding_utility(seq: &Sequence, pattern: &[ItemId]) -> Option<u64> {
    assert!(!pattern.is_empty());
    // best[j]: best utility of an embedding of pattern[..=j] within the
    // positions scanned so far
    let mut best: Vec<Option<u64>> = vec![None; pattern.len()];
    for e in &seq.events {
        for j in (0..pattern.len()).rev() {
            if pattern[j] != e.item {
                continue;
            }
            let candidate = if j == 0 {
                Some(e.utility)
            } else {
                best[j - 1].map(|b| b + e.utility)
            };
            if let Some(c) = candidate {
                best[j] = Some(best[j].map_or(c, |b| b.max(c)));
            }
        }
    }
    best[pattern.len() - 1]
}

fn contains(seq: &Sequence, pattern: &[ItemId]) -> bool {
    let mut it = seq.events.iter();
    pattern.iter().all(|p| it.any(|e| e.item == *p))
}

pub fn support_of(db: &SequenceDatabase, pattern: &[ItemId]) -> u64 {
    db.sequences()
        .iter()
        .filter(|s| contains(s, pattern))
        .count() as u64
}

pub fn utility_of(db: &SequenceDatabase, pattern: &[ItemId]) -> u64 {
    db.sequences()
        .iter()
        .filter_map(|s| max_embedding_utility(s, pattern))
        .sum()
}

/// Items that follow the earliest embedding of `pattern` in some sequence
/// and are not already in it.
fn extension_items(db: &SequenceDatabase, pattern: &[ItemId]) -> BTreeSet<ItemId> {
    let mut out = BTreeSet::new();
    for seq in db.sequences() {
        let mut k = 0;
        let mut pos = 0;
        while k < pattern.len() && pos < seq.len() {
            if seq.events[pos].item == pattern[k] {
                k += 1;
            }
            pos += 1;
        }
        if k < pattern.len() {
            continue;
        }
        for e in &seq.events[pos..] {
            if !pattern.contains(&e.item) {
                out.insert(e.item);
            }
        }
    }
    out
}

/// Every distinct-item pattern of length at most `max_len` that occurs in
/// the database, with its utility and support. The flag reports whether the
/// length cap cut off longer patterns.
pub fn enumerate_patterns(db: &SequenceDatabase, max_len: usize) -> (Vec<PatternStats>, bool) {
    let mut out = Vec::new();
    let mut truncated = false;
    let roots: BTreeSet<ItemId> = db
        .sequences()
        .iter()
        .flat_map(|s| s.events.iter().map(|e| e.item))
        .collect();
    let mut stack: Vec<Vec<ItemId>> = roots.into_iter().rev().map(|i| vec![i]).collect();
    while let Some(pattern) = stack.pop() {
        let children = extension_items(db, &pattern);
        if pattern.len() >= max_len {
            truncated |= !children.is_empty();
        } else {
            for c in children.into_iter().rev() {
                let mut next = pattern.clone();
                next.push(c);
                stack.push(next);
            }
        }
        out.push(PatternStats {
            utility: utility_of(db, &pattern),
            support: support_of(db, &pattern),
            items: pattern,
        });
    }
    (out, truncated)
}

/// Filters enumerated patterns into rules for the given thresholds.
pub fn rules_from_patterns(
    db: &SequenceDatabase,
    patterns: &[PatternStats],
    minutil: Threshold,
    minconf: Threshold,
) -> Vec<Rule> {
    let mut rules = Vec::new();
    for p in patterns
        .iter()
        .filter(|p| p.items.len() >= 2 && minutil.admits(p.utility))
    {
        for cut in 1..p.items.len() {
            let antecedent = &p.items[..cut];
            let antecedent_support = support_of(db, antecedent);
            if confidence_at_least(p.support, antecedent_support, minconf) {
                rules.push(Rule {
                    antecedent: antecedent.to_vec(),
                    consequent: p.items[cut..].to_vec(),
                    utility: p.utility,
                    support: p.support,
                    antecedent_support,
                });
            }
        }
    }
    rules.sort();
    rules
}

pub fn oracle_mine(db: &SequenceDatabase, cfg: &OracleConfig) -> OracleOutput {
    assert!(cfg.max_len >= 2, "oracle max_len must be at least 2");
    let (patterns, truncated) = enumerate_patterns(db, cfg.max_len);
    OracleOutput {
        rules: rules_from_patterns(db, &patterns, cfg.minutil, cfg.minconf),
        truncated,
    }
}
