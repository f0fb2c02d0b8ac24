//! Readers and writers for sequence databases, rules and run statistics.
//!
//! Two input formats are supported:
//!
//! * native: one sequence per line, whitespace separated `item:utility`
//!   tokens; blank lines and lines starting with `#` are skipped.
//! * SPMF utility format: `item[utility]` tokens, `-1` closing each itemset
//!   and `-2` closing the sequence. Itemsets must hold exactly one item. A
//!   `SUtility:<n>` token is ignored; the sequence utility is recomputed.

use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::miner::MiningStats;
use crate::model::{Event, Rule, Sequence, SequenceDatabase, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based line number of the offending input line.
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Native,
    Spmf,
}

impl InputFormat {
    /// `.txt` and `.spmf` files are read as SPMF, everything else as native.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("txt") | Some("spmf") => InputFormat::Spmf,
            _ => InputFormat::Native,
        }
    }
}

pub fn parse<R: BufRead>(reader: R, format: InputFormat) -> Result<SequenceDatabase, ParseError> {
    match format {
        InputFormat::Native => parse_native(reader),
        InputFormat::Spmf => parse_spmf(reader),
    }
}

fn parse_utility(text: &str, line: usize) -> Result<u64, ParseError> {
    if text.is_empty() {
        return Err(ParseError::new(line, "missing utility"));
    }
    if text.starts_with('-') {
        return Err(ParseError::new(line, format!("negative utility {text:?}")));
    }
    if !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::new(
            line,
            format!("utility must be a non-negative integer, got {text:?}"),
        ));
    }
    text.parse()
        .map_err(|_| ParseError::new(line, format!("utility {text:?} does not fit in 64 bits")))
}

struct Builder {
    vocab: Vocabulary,
    sequences: Vec<Vec<Event>>,
    total: u64,
}

impl Builder {
    fn new() -> Self {
        Self {
            vocab: Vocabulary::new(),
            sequences: Vec::new(),
            total: 0,
        }
    }

    fn push(&mut self, events: Vec<Event>, line: usize) -> Result<(), ParseError> {
        if events.is_empty() {
            return Ok(());
        }
        for e in &events {
            self.total = self
                .total
                .checked_add(e.utility)
                .ok_or_else(|| ParseError::new(line, "total database utility overflows 64 bits"))?;
        }
        self.sequences.push(events);
        Ok(())
    }

    fn finish(self) -> SequenceDatabase {
        SequenceDatabase::new(self.vocab, self.sequences).expect("total already checked")
    }
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), ParseError>> {
    reader.lines().enumerate().map(|(i, l)| {
        l.map(|l| (i + 1, l))
            .map_err(|e| ParseError::new(i + 1, format!("read error: {e}")))
    })
}

pub fn parse_native<R: BufRead>(reader: R) -> Result<SequenceDatabase, ParseError> {
    let mut builder = Builder::new();
    for entry in lines(reader) {
        let (line_no, line) = entry?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut events = Vec::new();
        for token in trimmed.split_whitespace() {
            let (label, utility) = token.rsplit_once(':').ok_or_else(|| {
                ParseError::new(
                    line_no,
                    format!("malformed token {token:?}, expected item:utility"),
                )
            })?;
            if label.is_empty() {
                return Err(ParseError::new(
                    line_no,
                    format!("empty item label in {token:?}"),
                ));
            }
            let utility = parse_utility(utility, line_no)?;
            events.push(Event {
                item: builder.vocab.intern(label),
                utility,
            });
        }
        builder.push(events, line_no)?;
    }
    Ok(builder.finish())
}

pub fn parse_native_str(text: &str) -> Result<SequenceDatabase, ParseError> {
    parse_native(text.as_bytes())
}

pub fn parse_spmf<R: BufRead>(reader: R) -> Result<SequenceDatabase, ParseError> {
    let mut builder = Builder::new();
    for entry in lines(reader) {
        let (line_no, line) = entry?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || trimmed.starts_with('#')
            || trimmed.starts_with('@')
            || trimmed.starts_with('%')
        {
            continue;
        }
        let mut events = Vec::new();
        let mut in_itemset = 0usize;
        let mut terminated = false;
        for token in trimmed.split_whitespace() {
            if token.starts_with("SUtility:") {
                continue;
            }
            if terminated {
                return Err(ParseError::new(
                    line_no,
                    format!("unexpected token {token:?} after -2"),
                ));
            }
            match token {
                "-1" => in_itemset = 0,
                "-2" => {
                    in_itemset = 0;
                    terminated = true;
                }
                _ => {
                    if in_itemset > 0 {
                        return Err(ParseError::new(
                            line_no,
                            "simultaneous events unsupported: itemset holds more than one item",
                        ));
                    }
                    let (label, rest) = token.split_once('[').ok_or_else(|| {
                        ParseError::new(
                            line_no,
                            format!("malformed token {token:?}, expected item[utility]"),
                        )
                    })?;
                    let utility = rest.strip_suffix(']').ok_or_else(|| {
                        ParseError::new(line_no, format!("missing ']' in {token:?}"))
                    })?;
                    if label.is_empty() {
                        return Err(ParseError::new(
                            line_no,
                            format!("empty item label in {token:?}"),
                        ));
                    }
                    let utility = parse_utility(utility, line_no)?;
                    events.push(Event {
                        item: builder.vocab.intern(label),
                        utility,
                    });
                    in_itemset += 1;
                }
            }
        }
        builder.push(events, line_no)?;
    }
    Ok(builder.finish())
}

pub fn parse_spmf_str(text: &str) -> Result<SequenceDatabase, ParseError> {
    parse_spmf(text.as_bytes())
}

/// Writes the native format; `parse_native` reads it back bit-exactly.
pub fn write_native<W: Write>(db: &SequenceDatabase, mut out: W) -> io::Result<()> {
    let vocab = db.vocabulary();
    for seq in db.sequences() {
        let mut first = true;
        for e in &seq.events {
            if !first {
                out.write_all(b" ")?;
            }
            first = false;
            write!(out, "{}:{}", vocab.token(e.item), e.utility)?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps, per sequence and item, only the occurrence with the highest
/// utility (earliest on ties). Retained events keep their relative order.
pub fn dedup_max_utility(db: &SequenceDatabase) -> SequenceDatabase {
    let mut best: Vec<Option<usize>> = vec![None; db.vocabulary().len()];
    let sequences = db
        .sequences()
        .iter()
        .map(|seq| {
            for (pos, e) in seq.events.iter().enumerate() {
                let slot = &mut best[e.item.index()];
                match *slot {
                    Some(p) if seq.events[p].utility >= e.utility => {}
                    _ => *slot = Some(pos),
                }
            }
            let events = seq
                .events
                .iter()
                .enumerate()
                .filter(|(pos, e)| best[e.item.index()] == Some(*pos))
                .map(|(_, e)| *e)
                .collect();
            for e in &seq.events {
                best[e.item.index()] = None;
            }
            Sequence {
                sid: seq.sid,
                events,
            }
        })
        .collect();
    db.derive(sequences)
}

/// One rule per line:
/// `i1,…,ik ==> j1,…,jm #UTIL: <u> #SUP: <s> #CONF: <c>` with the
/// confidence printed to four places, rounded half-up.
pub fn write_rules<W: Write>(
    rules: &[Rule],
    vocabulary: &Vocabulary,
    mut out: W,
) -> io::Result<()> {
    for rule in rules {
        let bp = rule.confidence_basis_points();
        writeln!(
            out,
            "{} #UTIL: {} #SUP: {} #CONF: {}.{:04}",
            rule.display(vocabulary),
            rule.utility,
            rule.support,
            bp / 10_000,
            bp % 10_000
        )?;
    }
    Ok(())
}

/// Orders rules by utility (descending), then by antecedent and consequent
/// labels.
pub fn sort_rules_for_display(rules: &mut [Rule], vocabulary: &Vocabulary) {
    let labels = |items: &[crate::model::ItemId]| {
        items
            .iter()
            .map(|&i| vocabulary.token(i).to_owned())
            .collect::<Vec<_>>()
    };
    rules.sort_by_cached_key(|r| {
        (
            std::cmp::Reverse(r.utility),
            labels(&r.antecedent),
            labels(&r.consequent),
        )
    });
}

pub fn write_stats<W: Write>(stats: &MiningStats, mut out: W) -> io::Result<()> {
    writeln!(out, "sequences={}", stats.sequences)?;
    writeln!(out, "distinct_items={}", stats.distinct_items)?;
    writeln!(out, "items_after_pruning={}", stats.items_after_pruning)?;
    writeln!(out, "minutil_num={}", stats.minutil.numerator())?;
    writeln!(out, "minutil_den={}", stats.minutil.denominator())?;
    writeln!(out, "candidates={}", stats.candidates)?;
    writeln!(out, "rules={}", stats.rules)?;
    writeln!(out, "srtgrowth_calls={}", stats.srt_growth_calls)?;
    writeln!(out, "rrs_prunes={}", stats.rrs_prunes)?;
    writeln!(out, "runtime_ms={}", stats.runtime_ms)?;
    Ok(())
}
