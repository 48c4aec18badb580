//! Even 4-plat words and the knot classes they represent.
//!
//! A word `(a_1, ..., a_2m)` of nonzero integers stands for the 2-bridge knot
//! `K(2a_1, ..., 2a_2m)`. Its Seifert genus is `m`, and two words give the
//! same knot exactly when one is the negate-reverse of the other, so a
//! [`KnotClass`] stores the lexicographically smaller of the two.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseWordError;

/// Half-parameters `(a_1, ..., a_2m)` of an even 4-plat diagram.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct TwistWord(Vec<i64>);

impl TwistWord {
    pub fn new(entries: Vec<i64>) -> Result<Self, ParseWordError> {
        if entries.is_empty() {
            return Err(ParseWordError::Empty);
        }
        if let Some(index) = entries.iter().position(|&a| a == 0) {
            return Err(ParseWordError::ZeroEntry { index });
        }
        if !entries.len().is_multiple_of(2) {
            return Err(ParseWordError::OddLength(entries.len()));
        }
        Ok(TwistWord(entries))
    }

    /// Caller guarantees validity; used on slices of words already checked.
    pub(crate) fn from_valid(entries: Vec<i64>) -> Self {
        debug_assert!(!entries.is_empty() && entries.len().is_multiple_of(2));
        debug_assert!(entries.iter().all(|&a| a != 0));
        TwistWord(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// Number of entries, always even and positive.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Number of twist-region pairs, `m`.
    pub fn pair_count(&self) -> usize {
        self.0.len() / 2
    }

    /// `n = |a_1| + ... + |a_2m|`.
    pub fn complexity(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }

    /// `g(K(2a_1, ..., 2a_2m)) = m`.
    pub fn seifert_genus(&self) -> u64 {
        self.pair_count() as u64
    }

    /// `(a_1, ..., a_2m) -> (-a_2m, ..., -a_1)`; same knot.
    pub fn negate_reverse(&self) -> TwistWord {
        TwistWord(self.0.iter().rev().map(|a| -a).collect())
    }

    /// Entrywise negation; the mirror image.
    pub fn mirror(&self) -> TwistWord {
        TwistWord(self.0.iter().map(|a| -a).collect())
    }

    pub fn canonicalize(&self) -> KnotClass {
        let other = self.negate_reverse();
        if other < *self {
            KnotClass(other)
        } else {
            KnotClass(self.clone())
        }
    }

    /// Closed interval `[n + 1, 2n]` holding the crossing number.
    pub fn crossing_bounds(&self) -> (u64, u64) {
        let n = self.complexity();
        (n + 1, 2 * n)
    }
}

impl TryFrom<Vec<i64>> for TwistWord {
    type Error = ParseWordError;

    fn try_from(entries: Vec<i64>) -> Result<Self, Self::Error> {
        TwistWord::new(entries)
    }
}

impl From<TwistWord> for Vec<i64> {
    fn from(w: TwistWord) -> Self {
        w.0
    }
}

impl fmt::Display for TwistWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for TwistWord {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseWordError::Empty);
        }
        let entries = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<i64>()
                    .map_err(|_| ParseWordError::BadToken(tok.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TwistWord::new(entries)
    }
}

/// A 2-bridge knot, stored as the smaller of `w` and `negate_reverse(w)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "TwistWord", into = "TwistWord")]
pub struct KnotClass(TwistWord);

impl From<TwistWord> for KnotClass {
    fn from(w: TwistWord) -> Self {
        w.canonicalize()
    }
}

impl From<KnotClass> for TwistWord {
    fn from(c: KnotClass) -> Self {
        c.0
    }
}

impl KnotClass {
    pub fn word(&self) -> &TwistWord {
        &self.0
    }

    pub fn seifert_genus(&self) -> u64 {
        self.0.seifert_genus()
    }

    pub fn mirror(&self) -> KnotClass {
        self.0.mirror().canonicalize()
    }

    pub fn is_amphichiral(&self) -> bool {
        self.mirror() == *self
    }
}

impl fmt::Display for KnotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for KnotClass {
    type Err = ParseWordError;

    /// Accepts any representative, not only the canonical one.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(s.parse::<TwistWord>()?.canonicalize())
    }
}

/// `K_1 # ... # K_t` as a multiset of classes. Empty means the unknot.
///
/// Serialized as a list of `[class, multiplicity]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<(KnotClass, u64)>", into = "Vec<(KnotClass, u64)>")]
pub struct ConnectedSum {
    summands: BTreeMap<KnotClass, u64>,
}

impl From<Vec<(KnotClass, u64)>> for ConnectedSum {
    fn from(v: Vec<(KnotClass, u64)>) -> Self {
        let mut cs = ConnectedSum::unknot();
        for (c, n) in v {
            cs.insert_many(c, n);
        }
        cs
    }
}

impl From<ConnectedSum> for Vec<(KnotClass, u64)> {
    fn from(cs: ConnectedSum) -> Self {
        cs.summands.into_iter().collect()
    }
}

impl ConnectedSum {
    pub fn unknot() -> Self {
        Self::default()
    }

    pub fn is_unknot(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn insert(&mut self, class: KnotClass) {
        *self.summands.entry(class).or_insert(0) += 1;
    }

    pub fn insert_many(&mut self, class: KnotClass, count: u64) {
        if count > 0 {
            *self.summands.entry(class).or_insert(0) += count;
        }
    }

    /// Removes one copy; false if the class was not present.
    pub fn remove(&mut self, class: &KnotClass) -> bool {
        match self.summands.get_mut(class) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.summands.remove(class);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, class: &KnotClass) -> u64 {
        self.summands.get(class).copied().unwrap_or(0)
    }

    /// Total number of summands, with multiplicity.
    pub fn len(&self) -> u64 {
        self.summands.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Distinct classes with their multiplicities, in class order.
    pub fn iter(&self) -> impl Iterator<Item = (&KnotClass, u64)> {
        self.summands.iter().map(|(c, &n)| (c, n))
    }

    pub fn genus(&self) -> u64 {
        self.iter().map(|(c, n)| c.seifert_genus() * n).sum()
    }

    /// True when every summand can be matched with a copy of its mirror.
    pub fn is_mirror_paired(&self) -> bool {
        self.iter().all(|(c, n)| {
            let mirror = c.mirror();
            if mirror == *c {
                n % 2 == 0
            } else {
                self.count(&mirror) == n
            }
        })
    }
}

impl FromIterator<KnotClass> for ConnectedSum {
    fn from_iter<I: IntoIterator<Item = KnotClass>>(iter: I) -> Self {
        let mut cs = ConnectedSum::unknot();
        for c in iter {
            cs.insert(c);
        }
        cs
    }
}

impl fmt::Display for ConnectedSum {
    /// Summands separated by `;` in class order, repeated by multiplicity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unknot() {
            return f.write_str("unknot");
        }
        let mut first = true;
        for (c, n) in self.iter() {
            for _ in 0..n {
                if !first {
                    f.write_str(";")?;
                }
                first = false;
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for ConnectedSum {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "unknot" {
            return Ok(ConnectedSum::unknot());
        }
        s.split(';').map(str::parse::<KnotClass>).collect()
    }
}
