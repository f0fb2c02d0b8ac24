//! Shared domain types: interned items, utility-annotated sequences, exact
//! thresholds and rules.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Dense index of an interned item label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijection between textual item labels and dense [`ItemId`]s.
///
/// Ids are handed out in first-appearance order, so loading the same bytes
/// always yields the same ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, ItemId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> ItemId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id =
            ItemId(u32::try_from(self.tokens.len()).expect("more than u32::MAX distinct items"));
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<ItemId> {
        self.index.get(token).copied()
    }

    /// Panics if `id` was not produced by this vocabulary.
    pub fn token(&self, id: ItemId) -> &str {
        &self.tokens[id.index()]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub item: ItemId,
    pub utility: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    /// 1-based index in the database the sequence was loaded from.
    pub sid: usize,
    pub events: Vec<Event>,
}

impl Sequence {
    /// Sum of all event utilities. Cannot overflow for sequences held by a
    /// [`SequenceDatabase`], whose total is checked at construction.
    pub fn utility(&self) -> u64 {
        self.events.iter().map(|e| e.utility).sum()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("total database utility overflows 64 bits")]
    UtilityOverflow,
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
}

/// An ordered collection of sequences together with the vocabulary their
/// items are drawn from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceDatabase {
    vocabulary: Arc<Vocabulary>,
    sequences: Vec<Sequence>,
    total_utility: u64,
}

impl SequenceDatabase {
    /// Builds a database from raw event lists. Empty lists are skipped and the
    /// remaining sequences get contiguous sids starting at 1.
    pub fn new(vocabulary: Vocabulary, sequences: Vec<Vec<Event>>) -> Result<Self, ModelError> {
        let sequences = sequences
            .into_iter()
            .filter(|events| !events.is_empty())
            .enumerate()
            .map(|(i, events)| Sequence { sid: i + 1, events })
            .collect();
        Self::with_sequences(Arc::new(vocabulary), sequences)
    }

    /// Builds a database keeping the given sids (which must be ascending).
    pub fn with_sequences(
        vocabulary: Arc<Vocabulary>,
        sequences: Vec<Sequence>,
    ) -> Result<Self, ModelError> {
        let mut total: u64 = 0;
        for seq in &sequences {
            for e in &seq.events {
                total = total
                    .checked_add(e.utility)
                    .ok_or(ModelError::UtilityOverflow)?;
            }
        }
        debug_assert!(sequences.windows(2).all(|w| w[0].sid < w[1].sid));
        Ok(Self {
            vocabulary,
            sequences,
            total_utility: total,
        })
    }

    /// Convenience constructor from `(label, utility)` pairs, one slice per
    /// sequence. Labels are interned in order of appearance.
    pub fn from_pairs<S: AsRef<str>>(rows: &[&[(S, u64)]]) -> Result<Self, ModelError> {
        let mut vocab = Vocabulary::new();
        let sequences = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(label, utility)| Event {
                        item: vocab.intern(label.as_ref()),
                        utility: *utility,
                    })
                    .collect()
            })
            .collect();
        Self::new(vocab, sequences)
    }

    /// Same vocabulary, different sequences. Used by transformations that can
    /// only shrink the database, so the total cannot overflow.
    pub(crate) fn derive(&self, sequences: Vec<Sequence>) -> Self {
        let total_utility = sequences.iter().map(Sequence::utility).sum();
        Self {
            vocabulary: Arc::clone(&self.vocabulary),
            sequences,
            total_utility,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn shared_vocabulary(&self) -> Arc<Vocabulary> {
        Arc::clone(&self.vocabulary)
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// u(D): the sum of every event utility.
    pub fn total_utility(&self) -> u64 {
        self.total_utility
    }

    pub fn sequence(&self, sid: usize) -> Option<&Sequence> {
        self.sequences
            .binary_search_by_key(&sid, |s| s.sid)
            .ok()
            .map(|i| &self.sequences[i])
    }

    pub fn event_count(&self) -> usize {
        self.sequences.iter().map(Sequence::len).sum()
    }

    /// Number of distinct items actually occurring in the sequences.
    pub fn distinct_items(&self) -> usize {
        let mut seen = vec![false; self.vocabulary.len()];
        let mut count = 0;
        for e in self.sequences.iter().flat_map(|s| &s.events) {
            if !seen[e.item.index()] {
                seen[e.item.index()] = true;
                count += 1;
            }
        }
        count
    }

    pub fn max_length(&self) -> usize {
        self.sequences.iter().map(Sequence::len).max().unwrap_or(0)
    }

    pub fn has_duplicates(&self) -> bool {
        let mut last_seen = vec![usize::MAX; self.vocabulary.len()];
        for (i, seq) in self.sequences.iter().enumerate() {
            for e in &seq.events {
                if last_seen[e.item.index()] == i {
                    return true;
                }
                last_seen[e.item.index()] = i;
            }
        }
        false
    }

    /// Resolves a list of labels to ids; `None` if any label is unknown.
    pub fn items(&self, labels: &[&str]) -> Option<Vec<ItemId>> {
        labels.iter().map(|l| self.vocabulary.get(l)).collect()
    }
}

/// An exact non-negative rational used for the utility and confidence
/// thresholds. All comparisons cross-multiply in 128-bit integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Threshold {
    numerator: u128,
    denominator: u128,
}

impl Threshold {
    pub const ZERO: Threshold = Threshold {
        numerator: 0,
        denominator: 1,
    };
    pub const ONE: Threshold = Threshold {
        numerator: 1,
        denominator: 1,
    };

    pub fn new(numerator: u128, denominator: u128) -> Result<Self, ModelError> {
        if denominator == 0 {
            return Err(ModelError::InvalidThreshold("zero denominator".into()));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    /// Parses a plain decimal such as `0.1`, `64.01` or `5`. The denominator
    /// is the power of ten implied by the number of fractional digits.
    pub fn parse_decimal(text: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidThreshold(format!("not a non-negative decimal: {text:?}"));
        let text = text.trim();
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        if frac_part.len() > 30 {
            return Err(ModelError::InvalidThreshold(format!(
                "too many fractional digits: {text:?}"
            )));
        }
        let digits = format!("{int_part}{frac_part}");
        let numerator: u128 = if digits.is_empty() {
            0
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let denominator = 10u128.pow(frac_part.len() as u32);
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    /// Multiplies through by an integer, e.g. `delta.scale(u(D))` yields minutil.
    pub fn scale(&self, factor: u64) -> Result<Self, ModelError> {
        let numerator = self
            .numerator
            .checked_mul(factor as u128)
            .ok_or_else(|| ModelError::InvalidThreshold("threshold overflows 128 bits".into()))?;
        Ok(Self {
            numerator,
            denominator: self.denominator,
        })
    }

    /// `value >= self`, exactly.
    #[inline]
    pub fn admits(&self, value: u64) -> bool {
        compare_at_least(value, *self)
    }

    /// `sup / ant_sup >= self`, exactly.
    #[inline]
    pub fn admits_ratio(&self, sup: u64, ant_sup: u64) -> bool {
        confidence_at_least(sup, ant_sup, *self)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// True when the value lies in (0, 1].
    pub fn is_valid_confidence(&self) -> bool {
        self.numerator > 0 && self.numerator <= self.denominator
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::ZERO
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.numerator.is_multiple_of(self.denominator) {
            write!(f, "{}", self.numerator / self.denominator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

/// `value >= threshold` without rounding.
#[inline]
pub fn compare_at_least(value: u64, threshold: Threshold) -> bool {
    // u64 * u128 fits whenever the denominator is below 2^64, which holds for
    // every threshold parsed from a decimal with at most 19 fractional digits.
    match (value as u128).checked_mul(threshold.denominator) {
        Some(lhs) => lhs >= threshold.numerator,
        None => true,
    }
}

/// `sup / ant_sup >= minconf` without rounding.
#[inline]
pub fn confidence_at_least(sup: u64, ant_sup: u64, minconf: Threshold) -> bool {
    debug_assert!(ant_sup >= 1 && sup <= ant_sup);
    let lhs = (sup as u128).checked_mul(minconf.denominator);
    let rhs = (ant_sup as u128).checked_mul(minconf.numerator);
    match (lhs, rhs) {
        (Some(l), Some(r)) => l >= r,
        // minconf ≤ 1 keeps numerator ≤ denominator, so an overflowing lhs
        // dominates any rhs.
        (None, _) => true,
        (Some(_), None) => false,
    }
}

/// A totally ordered sequential rule `antecedent ==> consequent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub antecedent: Vec<ItemId>,
    pub consequent: Vec<ItemId>,
    pub utility: u64,
    pub support: u64,
    pub antecedent_support: u64,
}

impl Rule {
    pub fn confidence(&self) -> f64 {
        self.support as f64 / self.antecedent_support as f64
    }

    /// Confidence scaled by 10^4 and rounded half-up, exactly.
    pub fn confidence_basis_points(&self) -> u64 {
        let num = self.support as u128 * 10_000 * 2 + self.antecedent_support as u128;
        (num / (2 * self.antecedent_support as u128)) as u64
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.antecedent.iter().chain(&self.consequent).copied()
    }

    /// Renders the rule's item lists with labels, e.g. `c,e ==> b`.
    pub fn display<'a>(&'a self, vocabulary: &'a Vocabulary) -> RuleDisplay<'a> {
        RuleDisplay {
            rule: self,
            vocabulary,
        }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    vocabulary: &'a Vocabulary,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |items: &[ItemId]| {
            items
                .iter()
                .map(|&i| self.vocabulary.token(i))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "{} ==> {}",
            join(&self.rule.antecedent),
            join(&self.rule.consequent)
        )
    }
}
