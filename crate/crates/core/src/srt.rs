//! Sequence record table: the state of one depth-first path.
//!
//! Row `i` describes the length-`i` prefix of the current candidate item
//! sequence. For every sequence containing the prefix a row keeps *all* end
//! positions of the prefix together with the best prefix utility ending
//! exactly there. Keeping every end position (not only the first one) is what
//! makes the utility of the next extension exact: for `<a, c>` in
//! `a:1 c:2 c:3` the best occurrence ends at the second `c`.

use crate::bounds::RemainingBound;
use crate::model::ItemId;
use crate::ult::{NodeIdx, Ult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Occurrence {
    /// ULT node holding the prefix's last item.
    pub node: NodeIdx,
    /// Maximum utility over all occurrences of the prefix ending at `node`.
    pub best_prefix_utility: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SeqSpan {
    sid: usize,
    start: usize,
    end: usize,
}

/// Borrowed view of one sequence's occurrence list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeqOccurrences<'a> {
    pub sid: usize,
    pub entries: &'a [Occurrence],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrtRow {
    pub item: ItemId,
    spans: Vec<SeqSpan>,
    entries: Vec<Occurrence>,
    /// Number of sequences containing the prefix.
    pub support: u64,
    /// Exact utility of the prefix in the database.
    pub until_utility: u64,
    /// Upper bound on the utility of this prefix and of every extension of it.
    pub rrs: u64,
}

impl SrtRow {
    pub fn sequences(&self) -> impl Iterator<Item = SeqOccurrences<'_>> + '_ {
        self.spans.iter().map(|s| SeqOccurrences {
            sid: s.sid,
            entries: &self.entries[s.start..s.end],
        })
    }

    /// `(sid, pos)` of the first end position in each sequence.
    pub fn first_positions(&self, ult: &Ult) -> Vec<(usize, u32)> {
        self.sequences()
            .map(|s| (s.sid, ult.node(s.entries[0].node).pos))
            .collect()
    }

    pub fn occurrence_count(&self) -> usize {
        self.entries.len()
    }
}

/// Starts a path at a single item: every occurrence is an end position and its
/// best prefix utility is its own utility. The bound is the item's header sum.
pub fn init_row(ult: &Ult, item: ItemId, bound: RemainingBound) -> SrtRow {
    let header = ult
        .header(item)
        .expect("init_row on an item without a header");
    let mut row = SrtRow {
        item,
        spans: Vec::new(),
        entries: Vec::new(),
        support: 0,
        until_utility: 0,
        rrs: header.remaining_sum(bound),
    };
    let mut best = 0u64;
    for (idx, node) in ult.occurrences_of(item) {
        let same_seq = row.spans.last().is_some_and(|s| s.sid == node.sid);
        if !same_seq {
            if let Some(last) = row.spans.last_mut() {
                last.end = row.entries.len();
                row.until_utility += best;
            }
            row.spans.push(SeqSpan {
                sid: node.sid,
                start: row.entries.len(),
                end: 0,
            });
            row.support += 1;
            best = 0;
        }
        row.entries.push(Occurrence {
            node: idx,
            best_prefix_utility: node.utility,
        });
        best = best.max(node.utility);
    }
    if let Some(last) = row.spans.last_mut() {
        last.end = row.entries.len();
        row.until_utility += best;
    }
    row
}

/// A candidate item together with its extension bound and the row that
/// pushing it would add.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub item: ItemId,
    pub rrs: u64,
    pub row: SrtRow,
}

struct PendingRow {
    row: SrtRow,
    open_sid: usize,
    seq_best: u64,
    seq_bound: u64,
}

impl PendingRow {
    fn close(&mut self) {
        if let Some(last) = self.row.spans.last_mut() {
            if last.end == usize::MAX {
                last.end = self.row.entries.len();
                self.row.support += 1;
                self.row.until_utility += self.seq_best;
                self.row.rrs += self.seq_bound;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SequenceRecordTable {
    rows: Vec<SrtRow>,
    in_prefix: Vec<bool>,
    // item -> candidate slot, valid when stamp matches the current epoch
    slot: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl SequenceRecordTable {
    pub fn new(ult: &Ult) -> Self {
        let n = ult.vocabulary_len();
        Self {
            rows: Vec::new(),
            in_prefix: vec![false; n],
            slot: vec![0; n],
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    pub fn rows(&self) -> &[SrtRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&SrtRow> {
        self.rows.last()
    }

    pub fn items(&self) -> Vec<ItemId> {
        self.rows.iter().map(|r| r.item).collect()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.in_prefix[item.index()]
    }

    /// Appends a row. Panics if the row repeats a prefix item or raises the
    /// support; either means the caller broke the extension contract.
    pub fn push_row(&mut self, row: SrtRow) {
        assert!(
            !self.in_prefix[row.item.index()],
            "item {:?} already in the prefix",
            row.item
        );
        if let Some(last) = self.rows.last() {
            assert!(
                row.support <= last.support,
                "support must not grow along a path ({} > {})",
                row.support,
                last.support
            );
        }
        assert!(row.support >= 1, "rows must have positive support");
        self.in_prefix[row.item.index()] = true;
        self.rows.push(row);
    }

    /// Removes and returns the last row. Panics on an empty table.
    pub fn pop_row(&mut self) -> SrtRow {
        let row = self
            .rows
            .pop()
            .expect("pop_row on an empty sequence record table");
        self.in_prefix[row.item.index()] = false;
        row
    }

    /// Finds every item that can extend the current prefix, in first-encounter
    /// order, together with its bound and its would-be row.
    ///
    /// Per sequence the scan starts right after the earliest end position of
    /// the prefix. For a candidate at node `q`, the best utility of the
    /// extended prefix ending at `q` is `u(q)` plus the best prefix utility
    /// over end positions before `q`; its bound contribution is that same
    /// best prefix utility plus the remaining bound at `q`, maximised over
    /// `q` within the sequence and summed over sequences.
    pub fn scan_extensions(&mut self, ult: &Ult, bound: RemainingBound) -> Vec<Extension> {
        let last = self.rows.last().expect("scan_extensions on an empty table");
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        let mut pending: Vec<PendingRow> = Vec::new();

        for span in &last.spans {
            let entries = &last.entries[span.start..span.end];
            let frontier = entries[0].node;
            let end = ult.sequence_end(frontier);
            let mut cursor = 0usize;
            let mut prefix_best = 0u64;
            for q in frontier + 1..end {
                while cursor < entries.len() && entries[cursor].node < q {
                    prefix_best = prefix_best.max(entries[cursor].best_prefix_utility);
                    cursor += 1;
                }
                let node = ult.node(q);
                let item = node.item.index();
                if self.in_prefix[item] {
                    continue;
                }
                let slot = if self.stamp[item] == epoch {
                    self.slot[item] as usize
                } else {
                    self.stamp[item] = epoch;
                    self.slot[item] = pending.len() as u32;
                    pending.push(PendingRow {
                        row: SrtRow {
                            item: node.item,
                            spans: Vec::new(),
                            entries: Vec::new(),
                            support: 0,
                            until_utility: 0,
                            rrs: 0,
                        },
                        open_sid: usize::MAX,
                        seq_best: 0,
                        seq_bound: 0,
                    });
                    pending.len() - 1
                };
                let p = &mut pending[slot];
                if p.open_sid != span.sid {
                    p.close();
                    p.open_sid = span.sid;
                    p.seq_best = 0;
                    p.seq_bound = 0;
                    p.row.spans.push(SeqSpan {
                        sid: span.sid,
                        start: p.row.entries.len(),
                        end: usize::MAX,
                    });
                }
                let best = prefix_best + node.utility;
                p.row.entries.push(Occurrence {
                    node: q,
                    best_prefix_utility: best,
                });
                p.seq_best = p.seq_best.max(best);
                p.seq_bound = p.seq_bound.max(prefix_best + node.remaining(bound));
            }
        }

        pending
            .into_iter()
            .map(|mut p| {
                p.close();
                Extension {
                    item: p.row.item,
                    rrs: p.row.rrs,
                    row: p.row,
                }
            })
            .collect()
    }
}
