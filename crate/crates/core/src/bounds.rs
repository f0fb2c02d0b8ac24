//! Utility upper bounds and early item pruning.
//!
//! * SEU: per item, the sum over the sequences containing it of the
//!   sequence's distinct-item utility (each item counted once at its maximum).
//! * RU: suffix utility sum from a position to the end of its sequence.
//! * RRU: the event's own utility plus, for every other distinct item in the
//!   rest of the sequence, that item's maximum utility there. Later copies of
//!   the event's own item are left out since a rule cannot repeat an item.
//!
//! Every function here reads an immutable database and is free of shared
//! state.

use std::collections::HashMap;

use crate::model::{Event, ItemId, Sequence, SequenceDatabase, Threshold};

/// How the per-sequence term of SEU is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SeuMode {
    /// Each distinct item of the sequence counted once at its maximum utility.
    #[default]
    DistinctMax,
    /// The plain sequence utility u(s, s).
    SequenceUtility,
}

/// Which remaining-utility bound feeds the extension bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RemainingBound {
    #[default]
    Rru,
    Ru,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositionRef {
    pub sid: usize,
    /// 1-based.
    pub pos: usize,
}

impl PositionRef {
    pub fn new(sid: usize, pos: usize) -> Self {
        Self { sid, pos }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ItemBoundSummary {
    pub item: ItemId,
    pub seu: u64,
    pub rru_sum: u64,
}

/// Sum of the maximum utility of each distinct item in `events`.
pub fn distinct_max_utility(events: &[Event]) -> u64 {
    let mut best: HashMap<ItemId, u64> = HashMap::with_capacity(events.len());
    for e in events {
        let slot = best.entry(e.item).or_insert(0);
        *slot = (*slot).max(e.utility);
    }
    best.values().sum()
}

/// SEU per item, indexed by `ItemId`. Items absent from the database map to 0.
pub fn seu_per_item(db: &SequenceDatabase, mode: SeuMode) -> Vec<u64> {
    let mut seu = vec![0u64; db.vocabulary().len()];
    let mut seen = vec![usize::MAX; db.vocabulary().len()];
    for (i, seq) in db.sequences().iter().enumerate() {
        let term = match mode {
            SeuMode::DistinctMax => distinct_max_utility(&seq.events),
            SeuMode::SequenceUtility => seq.utility(),
        };
        for e in &seq.events {
            if seen[e.item.index()] != i {
                seen[e.item.index()] = i;
                seu[e.item.index()] += term;
            }
        }
    }
    seu
}

/// Removes every event whose item has SEU below `minutil`, in a single pass.
/// Sequences left empty are dropped; survivors keep their sids.
pub fn prune_unpromising(
    db: &SequenceDatabase,
    minutil: Threshold,
    mode: SeuMode,
) -> SequenceDatabase {
    let seu = seu_per_item(db, mode);
    let keep: Vec<bool> = seu.iter().map(|&s| minutil.admits(s)).collect();
    let sequences = db
        .sequences()
        .iter()
        .filter_map(|seq| {
            let events: Vec<Event> = seq
                .events
                .iter()
                .copied()
                .filter(|e| keep[e.item.index()])
                .collect();
            (!events.is_empty()).then_some(Sequence {
                sid: seq.sid,
                events,
            })
        })
        .collect();
    db.derive(sequences)
}

/// RU for every position of a sequence.
pub fn ru_profile(events: &[Event]) -> Vec<u64> {
    let mut out = vec![0u64; events.len()];
    let mut acc = 0u64;
    for (k, e) in events.iter().enumerate().rev() {
        acc += e.utility;
        out[k] = acc;
    }
    out
}

/// RRU for every position of a sequence, by one backward sweep that keeps the
/// per-item maxima of the suffix and their running sum.
pub fn rru_profile(events: &[Event]) -> Vec<u64> {
    let mut out = vec![0u64; events.len()];
    let mut suffix_max: HashMap<ItemId, u64> = HashMap::with_capacity(events.len());
    let mut suffix_sum = 0u64;
    for (k, e) in events.iter().enumerate().rev() {
        let own_later = suffix_max.get(&e.item).copied().unwrap_or(0);
        out[k] = e.utility + (suffix_sum - own_later);
        if e.utility > own_later {
            suffix_sum += e.utility - own_later;
            suffix_max.insert(e.item, e.utility);
        }
    }
    out
}

pub fn remaining_profile(events: &[Event], bound: RemainingBound) -> Vec<u64> {
    match bound {
        RemainingBound::Rru => rru_profile(events),
        RemainingBound::Ru => ru_profile(events),
    }
}

fn event_at(db: &SequenceDatabase, p: PositionRef) -> &Sequence {
    let seq = db
        .sequence(p.sid)
        .unwrap_or_else(|| panic!("no sequence with sid {}", p.sid));
    assert!(
        p.pos >= 1 && p.pos <= seq.len(),
        "position {} outside sequence {}",
        p.pos,
        p.sid
    );
    seq
}

pub fn ru_at(db: &SequenceDatabase, p: PositionRef) -> u64 {
    let seq = event_at(db, p);
    seq.events[p.pos - 1..].iter().map(|e| e.utility).sum()
}

pub fn rru_at(db: &SequenceDatabase, p: PositionRef) -> u64 {
    let seq = event_at(db, p);
    let own = seq.events[p.pos - 1];
    let mut best: HashMap<ItemId, u64> = HashMap::new();
    for e in &seq.events[p.pos..] {
        if e.item != own.item {
            let slot = best.entry(e.item).or_insert(0);
            *slot = (*slot).max(e.utility);
        }
    }
    own.utility + best.values().sum::<u64>()
}

/// Per item, the sum over sequences of the largest remaining bound among the
/// item's occurrences in that sequence. Indexed by `ItemId`.
pub fn remaining_sum_per_item(db: &SequenceDatabase, bound: RemainingBound) -> Vec<u64> {
    let n = db.vocabulary().len();
    let mut sums = vec![0u64; n];
    let mut best = vec![0u64; n];
    for seq in db.sequences() {
        let profile = remaining_profile(&seq.events, bound);
        for (e, &r) in seq.events.iter().zip(&profile) {
            best[e.item.index()] = best[e.item.index()].max(r);
        }
        for e in &seq.events {
            sums[e.item.index()] += std::mem::take(&mut best[e.item.index()]);
        }
    }
    sums
}

pub fn rru_sum_per_item(db: &SequenceDatabase) -> Vec<u64> {
    remaining_sum_per_item(db, RemainingBound::Rru)
}

/// SEU and RRU sums for every item present in the database, in id order.
pub fn item_bound_summaries(db: &SequenceDatabase) -> Vec<ItemBoundSummary> {
    let seu = seu_per_item(db, SeuMode::DistinctMax);
    let rru = rru_sum_per_item(db);
    let mut present = vec![false; db.vocabulary().len()];
    for e in db.sequences().iter().flat_map(|s| &s.events) {
        present[e.item.index()] = true;
    }
    (0..present.len())
        .filter(|&i| present[i])
        .map(|i| ItemBoundSummary {
            item: ItemId(i as u32),
            seu: seu[i],
            rru_sum: rru[i],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_native_str;

    const SAMPLE: &str =
        "a:1 c:2 c:3\nb:5 c:2 e:8 b:6\na:2 c:2 f:10\na:2 a:1 a:2 b:6 c:3 a:3\nd:1 a:1 b:4\n";

    fn sample() -> SequenceDatabase {
        parse_native_str(SAMPLE).unwrap()
    }

    fn id(db: &SequenceDatabase, s: &str) -> usize {
        db.vocabulary().get(s).unwrap().index()
    }

    #[test]
    fn seu_values() {
        let db = sample();
        let seu = seu_per_item(&db, SeuMode::DistinctMax);
        assert_eq!(seu[id(&db, "f")], 14);
        assert_eq!(seu[id(&db, "d")], 6);
        // a: s1 (1+3) + s3 (14) + s4 (3+6+3) + s5 (6)
        assert_eq!(seu[id(&db, "a")], 4 + 14 + 12 + 6);
        let literal = seu_per_item(&db, SeuMode::SequenceUtility);
        assert_eq!(literal[id(&db, "a")], 6 + 14 + 17 + 6);
        assert_eq!(literal[id(&db, "f")], 14);
    }

    #[test]
    fn seu_forms_agree_without_duplicates() {
        let db = parse_native_str("a:1 b:2\nb:3 c:4 a:1\nd:9\n").unwrap();
        assert_eq!(
            seu_per_item(&db, SeuMode::DistinctMax),
            seu_per_item(&db, SeuMode::SequenceUtility)
        );
    }

    #[test]
    fn absent_item_has_zero_seu() {
        let mut db = sample();
        db = prune_unpromising(&db, Threshold::new(64, 10).unwrap(), SeuMode::DistinctMax);
        let seu = seu_per_item(&db, SeuMode::DistinctMax);
        assert_eq!(seu[id(&db, "d")], 0);
    }

    #[test]
    fn prune_removes_d_only() {
        let db = sample();
        let pruned = prune_unpromising(&db, Threshold::new(64, 10).unwrap(), SeuMode::DistinctMax);
        assert_eq!(pruned.len(), 5);
        assert_eq!(pruned.distinct_items(), 5);
        assert_eq!(pruned.sequence(5).unwrap().len(), 2);
        assert_eq!(pruned.total_utility(), 63);
        assert_eq!(
            prune_unpromising(&db, Threshold::ZERO, SeuMode::DistinctMax),
            db
        );
    }

    #[test]
    fn prune_keeps_sids_of_survivors() {
        let db = parse_native_str("x:1\na:5 b:5\ny:1\nb:5\n").unwrap();
        let pruned = prune_unpromising(&db, Threshold::new(5, 1).unwrap(), SeuMode::DistinctMax);
        assert_eq!(
            pruned.sequences().iter().map(|s| s.sid).collect::<Vec<_>>(),
            vec![2, 4]
        );
    }

    #[test]
    fn prune_is_single_pass() {
        // w (SEU 3) goes; y (SEU 5) stays even though without w its SEU is 4.
        let db = parse_native_str("w:1 y:2\ny:2\n").unwrap();
        let th = Threshold::new(5, 1).unwrap();
        let once = prune_unpromising(&db, th, SeuMode::DistinctMax);
        assert_eq!(once.distinct_items(), 1);
        assert_eq!(once.total_utility(), 4);
        let twice = prune_unpromising(&once, th, SeuMode::DistinctMax);
        assert_eq!(twice.distinct_items(), 0);
    }

    #[test]
    fn remaining_utilities_worked_values() {
        let db = sample();
        assert_eq!(ru_at(&db, PositionRef::new(1, 1)), 6);
        assert_eq!(rru_at(&db, PositionRef::new(1, 1)), 4);
        assert_eq!(ru_at(&db, PositionRef::new(4, 1)), 17);
        assert_eq!(rru_at(&db, PositionRef::new(4, 1)), 11);
        for seq in db.sequences() {
            let last = PositionRef::new(seq.sid, seq.len());
            let u = seq.events.last().unwrap().utility;
            assert_eq!(ru_at(&db, last), u);
            assert_eq!(rru_at(&db, last), u);
        }
    }

    #[test]
    fn profiles_match_pointwise_definitions() {
        let db = sample();
        for seq in db.sequences() {
            let ru = ru_profile(&seq.events);
            let rru = rru_profile(&seq.events);
            for pos in 1..=seq.len() {
                let p = PositionRef::new(seq.sid, pos);
                assert_eq!(ru[pos - 1], ru_at(&db, p));
                assert_eq!(rru[pos - 1], rru_at(&db, p));
            }
        }
    }

    #[test]
    fn rru_sums() {
        let sample_head = parse_native_str("a:1 c:2 c:3\nb:5 c:2 e:8 b:6\na:2 c:2 f:10\n").unwrap();
        assert_eq!(rru_sum_per_item(&sample_head)[id(&sample_head, "a")], 18);
        assert_eq!(rru_sum_per_item(&sample_head)[id(&sample_head, "f")], 10);

        // Full database, item a: s1 4, s3 14, s4 max(11, 10, 11, 3) = 11, s5 max(5) = 5.
        let db = sample();
        let a = id(&db, "a");
        let mut expected = 0;
        for seq in db.sequences() {
            let best = (1..=seq.len())
                .filter(|&p| seq.events[p - 1].item.index() == a)
                .map(|p| rru_at(&db, PositionRef::new(seq.sid, p)))
                .max();
            expected += best.unwrap_or(0);
        }
        assert_eq!(expected, 4 + 14 + 11 + 5);
        assert_eq!(rru_sum_per_item(&db)[a], expected);
    }

    #[test]
    fn summaries_are_ordered() {
        let db = sample();
        for s in item_bound_summaries(&db) {
            assert!(s.seu >= s.rru_sum, "{s:?}");
        }
        assert_eq!(item_bound_summaries(&db).len(), 6);
    }

    mod props {
        use super::*;
        use crate::model::SequenceDatabase;
        use proptest::prelude::*;

        fn arb_db() -> impl Strategy<Value = SequenceDatabase> {
            proptest::collection::vec(proptest::collection::vec(("[a-e]", 0u64..20), 1..10), 1..6)
                .prop_map(|rows| {
                    let rows: Vec<&[(String, u64)]> = rows.iter().map(|r| r.as_slice()).collect();
                    SequenceDatabase::from_pairs(&rows).unwrap()
                })
        }

        proptest! {
            #[test]
            fn rru_never_exceeds_ru(db in arb_db()) {
                for seq in db.sequences() {
                    let ru = ru_profile(&seq.events);
                    let rru = rru_profile(&seq.events);
                    let distinct = {
                        let mut items: Vec<_> = seq.events.iter().map(|e| e.item).collect();
                        items.sort();
                        items.dedup();
                        items.len() == seq.len()
                    };
                    for k in 0..seq.len() {
                        prop_assert!(rru[k] <= ru[k]);
                        if distinct {
                            prop_assert_eq!(rru[k], ru[k]);
                        }
                    }
                    prop_assert_eq!(*rru.last().unwrap(), seq.events.last().unwrap().utility);
                }
            }

            #[test]
            fn summary_chain(db in arb_db()) {
                let mut max_single = vec![0u64; db.vocabulary().len()];
                for e in db.sequences().iter().flat_map(|s| &s.events) {
                    max_single[e.item.index()] = max_single[e.item.index()].max(e.utility);
                }
                for s in item_bound_summaries(&db) {
                    prop_assert!(s.seu >= s.rru_sum);
                    prop_assert!(s.rru_sum >= max_single[s.item.index()]);
                }
            }
        }
    }
}
