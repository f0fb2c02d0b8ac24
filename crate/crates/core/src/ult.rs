//! Utility-linked table: one node per event, stored contiguously in database
//! order, with a next-in-sequence link and a next-occurrence-of-same-item
//! link, plus a header row per item pointing at its first occurrence.

use crate::bounds::{
    remaining_sum_per_item, rru_profile, ru_profile, seu_per_item, RemainingBound, SeuMode,
};
use crate::model::{ItemId, SequenceDatabase};

pub type NodeIdx = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UltNode {
    pub sid: usize,
    /// 1-based position in the sequence.
    pub pos: u32,
    pub item: ItemId,
    pub utility: u64,
    pub rru: u64,
    pub ru: u64,
    pub next_in_sequence: Option<NodeIdx>,
    pub next_same_item: Option<NodeIdx>,
}

impl UltNode {
    #[inline]
    pub fn remaining(&self, bound: RemainingBound) -> u64 {
        match bound {
            RemainingBound::Rru => self.rru,
            RemainingBound::Ru => self.ru,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UltHeader {
    pub item: ItemId,
    pub seu: u64,
    pub rru_sum: u64,
    /// Same as `rru_sum` but over RU; used when RRU is switched off.
    pub ru_sum: u64,
    pub first_node: NodeIdx,
}

impl UltHeader {
    #[inline]
    pub fn remaining_sum(&self, bound: RemainingBound) -> u64 {
        match bound {
            RemainingBound::Rru => self.rru_sum,
            RemainingBound::Ru => self.ru_sum,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Ult {
    nodes: Vec<UltNode>,
    headers: Vec<UltHeader>,
    header_of: Vec<Option<usize>>,
    /// `[start, end)` node range of every stored sequence, in database order.
    spans: Vec<(NodeIdx, NodeIdx)>,
    /// For each node, the index into `spans` of its sequence.
    span_of: Vec<u32>,
    vocabulary_len: usize,
}

impl Ult {
    /// Single forward scan over the database; item chains are threaded by
    /// remembering the last node seen for each item.
    pub fn build(db: &SequenceDatabase) -> Self {
        let vocab_len = db.vocabulary().len();
        let seu = seu_per_item(db, SeuMode::DistinctMax);
        let rru_sum = remaining_sum_per_item(db, RemainingBound::Rru);
        let ru_sum = remaining_sum_per_item(db, RemainingBound::Ru);

        let mut nodes = Vec::with_capacity(db.event_count());
        let mut spans = Vec::with_capacity(db.len());
        let mut span_of = Vec::with_capacity(db.event_count());
        let mut headers = Vec::new();
        let mut header_of: Vec<Option<usize>> = vec![None; vocab_len];
        let mut last_of: Vec<Option<NodeIdx>> = vec![None; vocab_len];

        for (span_idx, seq) in db.sequences().iter().enumerate() {
            let rru = rru_profile(&seq.events);
            let ru = ru_profile(&seq.events);
            let start = nodes.len();
            let end = start + seq.len();
            for (k, e) in seq.events.iter().enumerate() {
                let idx = nodes.len();
                nodes.push(UltNode {
                    sid: seq.sid,
                    pos: (k + 1) as u32,
                    item: e.item,
                    utility: e.utility,
                    rru: rru[k],
                    ru: ru[k],
                    next_in_sequence: (idx + 1 < end).then_some(idx + 1),
                    next_same_item: None,
                });
                span_of.push(span_idx as u32);
                let slot = e.item.index();
                match last_of[slot] {
                    Some(prev) => nodes[prev].next_same_item = Some(idx),
                    None => {
                        header_of[slot] = Some(headers.len());
                        headers.push(UltHeader {
                            item: e.item,
                            seu: seu[slot],
                            rru_sum: rru_sum[slot],
                            ru_sum: ru_sum[slot],
                            first_node: idx,
                        });
                    }
                }
                last_of[slot] = Some(idx);
            }
            spans.push((start, end));
        }

        Self {
            nodes,
            headers,
            header_of,
            spans,
            span_of,
            vocabulary_len: vocab_len,
        }
    }

    pub fn nodes(&self) -> &[UltNode] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, idx: NodeIdx) -> &UltNode {
        &self.nodes[idx]
    }

    /// Header rows in first-appearance order.
    pub fn headers(&self) -> &[UltHeader] {
        &self.headers
    }

    pub fn header(&self, item: ItemId) -> Option<&UltHeader> {
        self.header_of
            .get(item.index())
            .copied()
            .flatten()
            .map(|h| &self.headers[h])
    }

    /// Size of the item id space this table was built over.
    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary_len
    }

    /// Exclusive end of the node range holding `idx`'s sequence.
    #[inline]
    pub fn sequence_end(&self, idx: NodeIdx) -> NodeIdx {
        self.spans[self.span_of[idx] as usize].1
    }

    /// Nodes strictly after `from` in the same sequence, in position order.
    pub fn scan_forward(&self, from: NodeIdx) -> impl Iterator<Item = (NodeIdx, &UltNode)> + '_ {
        let mut cur = self.nodes[from].next_in_sequence;
        std::iter::from_fn(move || {
            let idx = cur?;
            cur = self.nodes[idx].next_in_sequence;
            Some((idx, &self.nodes[idx]))
        })
    }

    /// Every occurrence of `item` in (sid, pos) order; empty for unknown items.
    pub fn occurrences_of(&self, item: ItemId) -> impl Iterator<Item = (NodeIdx, &UltNode)> + '_ {
        let mut cur = self.header(item).map(|h| h.first_node);
        std::iter::from_fn(move || {
            let idx = cur?;
            cur = self.nodes[idx].next_same_item;
            Some((idx, &self.nodes[idx]))
        })
    }
}
