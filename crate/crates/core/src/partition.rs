//! Exact statistics over signed and unsigned even compositions of `n`.
//!
//! Every word of complexity `n` with `2m` entries comes from one of the
//! `C(n-1, 2m-1)` ordered compositions of `n` into `2m` positive parts, and
//! each composition carries `2^(2m)` sign patterns. All averages here are
//! computed in exact rational arithmetic from that census.

use std::collections::HashSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::knot::TwistWord;

/// Enumeration is exponential in `n`; this keeps it near 1.6M words.
pub const DEFAULT_ENUMERATION_CAP: u64 = 14;

/// Hard ceiling imposed by the 64-bit cut masks in [`WordIter`].
pub const MAX_ENUMERABLE: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    /// Every word counted once.
    Words,
    /// Words deduplicated to knot classes first.
    Knots,
}

impl fmt::Display for AverageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AverageMode::Words => "words",
            AverageMode::Knots => "knots",
        })
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn check_n(n: u64) -> Result<(), StatsError> {
    if n < 2 {
        Err(StatsError::ComplexityTooSmall(n))
    } else {
        Ok(())
    }
}

/// Per-`m` word counts at fixed complexity `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionCensus {
    n: u64,
    signed: bool,
    /// Index `m - 1` holds the count for `m`, `m = 1 ..= n/2`.
    per_m: Vec<BigUint>,
}

impl CompositionCensus {
    pub fn new(n: u64, signed: bool) -> Result<Self, StatsError> {
        check_n(n)?;
        let per_m = (1..=n / 2)
            .map(|m| {
                let c = binomial(n - 1, 2 * m - 1);
                if signed {
                    c << (2 * m)
                } else {
                    c
                }
            })
            .collect();
        Ok(CompositionCensus { n, signed, per_m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    pub fn max_m(&self) -> u64 {
        self.per_m.len() as u64
    }

    /// Zero outside `1 ..= n/2`.
    pub fn count(&self, m: u64) -> BigUint {
        if m == 0 || m > self.max_m() {
            BigUint::zero()
        } else {
            self.per_m[(m - 1) as usize].clone()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigUint)> {
        self.per_m
            .iter()
            .enumerate()
            .map(|(i, c)| (i as u64 + 1, c))
    }

    pub fn total(&self) -> BigUint {
        self.per_m.iter().sum()
    }

    /// `Σ m · count(m)`.
    pub fn genus_sum(&self) -> BigUint {
        self.iter().map(|(m, c)| c * m).sum()
    }

    /// Unsigned census: the stored `C(n-1, 2m-1)` agrees with its reflection
    /// `C(n-1, n-2m)`. Signed censuses strip the `4^m` factor first.
    pub fn reflection_holds(&self) -> bool {
        self.iter().all(|(m, c)| {
            let base = if self.signed { c >> (2 * m) } else { c.clone() };
            base == binomial(self.n - 1, self.n - 2 * m)
        })
    }
}

pub fn count_words(n: u64, signed: bool) -> Result<BigUint, StatsError> {
    Ok(CompositionCensus::new(n, signed)?.total())
}

/// `3^(n-1) + (-1)^n`, the closed form of the signed count. Only used to
/// cross-check the binomial sum.
pub fn signed_count_closed_form(n: u64) -> Result<BigUint, StatsError> {
    check_n(n)?;
    let p = BigUint::from(3u32).pow((n - 1) as u32);
    Ok(if n.is_multiple_of(2) { p + 1u32 } else { p - 1u32 })
}

fn check_cap(n: u64, cap: u64) -> Result<(), StatsError> {
    check_n(n)?;
    let cap = cap.min(MAX_ENUMERABLE);
    if n > cap {
        Err(StatsError::EnumerationCap { n, cap })
    } else {
        Ok(())
    }
}

/// Streams every signed word of complexity `n` exactly once.
pub fn enumerate_words(n: u64, cap: u64) -> Result<WordIter, StatsError> {
    check_cap(n, cap)?;
    Ok(WordIter::new(n))
}

/// Cut-mask walk over compositions, then over sign patterns of each.
///
/// Bit `i` of the cut mask means a part ends after position `i + 1`; only
/// masks with an odd number of cuts (an even number of parts) are used.
pub struct WordIter {
    n: u64,
    cut_mask: u64,
    mask_end: u64,
    parts: Vec<i64>,
    sign_mask: u64,
    sign_end: u64,
}

impl WordIter {
    fn new(n: u64) -> Self {
        let mut it = WordIter {
            n,
            cut_mask: 0,
            mask_end: 1u64 << (n - 1),
            parts: Vec::new(),
            sign_mask: 0,
            sign_end: 0,
        };
        it.advance_composition();
        it
    }

    fn advance_composition(&mut self) {
        loop {
            self.cut_mask += 1;
            if self.cut_mask >= self.mask_end {
                self.parts.clear();
                return;
            }
            if self.cut_mask.count_ones() % 2 == 1 {
                break;
            }
        }
        self.parts.clear();
        let mut last = 0u64;
        for pos in 1..self.n {
            if self.cut_mask >> (pos - 1) & 1 == 1 {
                self.parts.push((pos - last) as i64);
                last = pos;
            }
        }
        self.parts.push((self.n - last) as i64);
        self.sign_mask = 0;
        self.sign_end = 1u64 << self.parts.len();
    }
}

impl Iterator for WordIter {
    type Item = TwistWord;

    fn next(&mut self) -> Option<TwistWord> {
        if self.parts.is_empty() {
            return None;
        }
        let entries = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, &a)| if self.sign_mask >> i & 1 == 1 { -a } else { a })
            .collect();
        self.sign_mask += 1;
        if self.sign_mask == self.sign_end {
            self.advance_composition();
        }
        Some(TwistWord::from_valid(entries))
    }
}

/// An exact average or fraction tied to the `n` and counting rule used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactStat {
    pub value: BigRational,
    pub n: u64,
    pub mode: AverageMode,
    pub signed: bool,
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// Average Seifert genus `<g>_n`.
///
/// Words mode reads the census. Knots mode enumerates and deduplicates:
/// signed words by negate-reverse, unsigned compositions by reversal (the
/// same symmetry once signs are forgotten).
pub fn avg_genus_exact(
    n: u64,
    signed: bool,
    mode: AverageMode,
    cap: u64,
) -> Result<ExactStat, StatsError> {
    let value = match mode {
        AverageMode::Words => {
            let census = CompositionCensus::new(n, signed)?;
            ratio(census.genus_sum(), census.total())
        }
        AverageMode::Knots => {
            check_cap(n, cap)?;
            let (sum, classes) = if signed {
                let classes: HashSet<_> = WordIter::new(n).map(|w| w.canonicalize()).collect();
                (
                    classes.iter().map(|c| c.seifert_genus()).sum::<u64>(),
                    classes.len(),
                )
            } else {
                let classes: HashSet<Vec<i64>> = WordIter::new(n)
                    .filter(|w| w.entries().iter().all(|&a| a > 0))
                    .map(|w| {
                        let fwd = w.entries().to_vec();
                        let rev: Vec<i64> = fwd.iter().rev().copied().collect();
                        fwd.min(rev)
                    })
                    .collect();
                (
                    classes.iter().map(|c| c.len() as u64 / 2).sum::<u64>(),
                    classes.len(),
                )
            };
            ratio(BigUint::from(sum), BigUint::from(classes))
        }
    };
    Ok(ExactStat {
        value,
        n,
        mode,
        signed,
    })
}

/// Fraction of words (by census weight) with `m <= threshold · n`.
pub fn tail_fraction(
    n: u64,
    threshold: &BigRational,
    signed: bool,
) -> Result<ExactStat, StatsError> {
    let census = CompositionCensus::new(n, signed)?;
    let limit = (threshold * BigInt::from(n)).floor().to_integer();
    let tail: BigUint = census
        .iter()
        .filter(|&(m, _)| BigInt::from(m) <= limit)
        .map(|(_, c)| c)
        .sum();
    Ok(ExactStat {
        value: ratio(tail, census.total()),
        n,
        mode: AverageMode::Words,
        signed,
    })
}

/// The `1/8` cutoff below which low-genus words are negligible.
pub fn default_tail_threshold() -> BigRational {
    Ratio::new(BigInt::one(), BigInt::from(8))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma1Report {
    /// `(n, <g>_n / n)` for `n = 2 ..= n_max`.
    pub rows: Vec<(u64, BigRational)>,
    pub min_ratio: BigRational,
    pub min_at: u64,
}

/// Checks `<g>_n / n >= 1/4` (signed words) for every `2 <= n <= n_max`.
pub fn lemma1_check(n_max: u64) -> Result<Lemma1Report, StatsError> {
    check_n(n_max)?;
    let quarter = Ratio::new(BigInt::one(), BigInt::from(4));
    let mut rows = Vec::with_capacity(n_max as usize - 1);
    for n in 2..=n_max {
        let avg = avg_genus_exact(n, true, AverageMode::Words, 0)?.value;
        let r = avg / BigInt::from(n);
        if r < quarter {
            return Err(StatsError::RatioBelowQuarter {
                n,
                ratio: r.to_string(),
            });
        }
        rows.push((n, r));
    }
    let (min_at, min_ratio) = rows
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1))
        .map(|(n, r)| (*n, r.clone()))
        .expect("n_max >= 2 gives at least one row");
    Ok(Lemma1Report {
        rows,
        min_ratio,
        min_at,
    })
}

/// Fixed-point decimal rendering, rounded half away from zero. Exact input,
/// exact digits; no floating point involved.
pub fn decimal_string(r: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (r * &scale).round().to_integer();
    let neg = scaled < BigInt::zero();
    let abs = if neg { -scaled } else { scaled };
    let int_part = &abs / &scale;
    let frac = (&abs % &scale).to_u128().unwrap_or(0);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac:0width$}", width = digits as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn q(a: i64, b: i64) -> BigRational {
        Ratio::new(BigInt::from(a), BigInt::from(b))
    }

    /// Recursive brute force, independent of the cut-mask iterator.
    fn brute_words(n: i64) -> Vec<Vec<i64>> {
        fn rec(rest: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if rest == 0 {
                if prefix.len().is_multiple_of(2) {
                    out.push(prefix.clone());
                }
                return;
            }
            for a in 1..=rest {
                for s in [1, -1] {
                    prefix.push(s * a);
                    rec(rest - a, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(n, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn counts() {
        assert_eq!(count_words(2, true).unwrap(), BigUint::from(4u32));
        assert_eq!(count_words(4, true).unwrap(), BigUint::from(28u32));
        assert_eq!(count_words(4, false).unwrap(), BigUint::from(4u32));
        assert_eq!(count_words(1, true), Err(StatsError::ComplexityTooSmall(1)));
    }

    #[test]
    fn closed_form_matches_binomial_sum() {
        for n in 2..=200 {
            assert_eq!(
                count_words(n, true).unwrap(),
                signed_count_closed_form(n).unwrap()
            );
        }
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 2..=9 {
            let got: BTreeSet<Vec<i64>> = enumerate_words(n, 14).unwrap().map(Vec::from).collect();
            let want: BTreeSet<Vec<i64>> = brute_words(n as i64).into_iter().collect();
            assert_eq!(got, want, "n = {n}");
            assert_eq!(
                enumerate_words(n, 14).unwrap().count(),
                want.len(),
                "duplicates at n = {n}"
            );
        }
    }

    #[test]
    fn enumeration_small_cases() {
        let two: BTreeSet<Vec<i64>> = enumerate_words(2, 14).unwrap().map(Vec::from).collect();
        let want: BTreeSet<Vec<i64>> = [vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]
            .into_iter()
            .collect();
        assert_eq!(two, want);
        let three: Vec<_> = enumerate_words(3, 14).unwrap().collect();
        assert_eq!(three.len(), 8);
        assert!(three
            .iter()
            .all(|w| w.pair_count() == 1 && w.complexity() == 3));
    }

    #[test]
    fn enumeration_cap() {
        assert_eq!(
            enumerate_words(15, 14).err(),
            Some(StatsError::EnumerationCap { n: 15, cap: 14 })
        );
        assert!(enumerate_words(15, 15).is_ok());
        assert!(matches!(
            avg_genus_exact(20, true, AverageMode::Knots, 14),
            Err(StatsError::EnumerationCap { .. })
        ));
    }

    #[test]
    fn census_histogram_matches_enumeration() {
        for n in 2..=12 {
            let census = CompositionCensus::new(n, true).unwrap();
            let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
            for w in enumerate_words(n, 14).unwrap() {
                *hist.entry(w.seifert_genus()).or_default() += 1;
            }
            for m in 1..=n / 2 + 1 {
                let got = BigUint::from(hist.get(&m).copied().unwrap_or(0));
                assert_eq!(got, census.count(m), "n = {n}, m = {m}");
            }
            assert!(census.reflection_holds());
            assert!(CompositionCensus::new(n, false).unwrap().reflection_holds());
        }
    }

    #[test]
    fn words_mode_averages() {
        let avg = |n, signed| {
            avg_genus_exact(n, signed, AverageMode::Words, 14)
                .unwrap()
                .value
        };
        assert_eq!(avg(4, false), q(5, 4));
        assert_eq!(avg(4, true), q(11, 7));
        assert_eq!(avg(2, true), q(1, 1));
        // (n+1)/4 needs n >= 3; the lone composition (1,1) gives 1 at n = 2.
        assert_eq!(avg(2, false), q(1, 1));
        for n in 3..=40 {
            assert_eq!(avg(n, false), q(n as i64 + 1, 4));
        }
    }

    #[test]
    fn knots_mode_averages() {
        // Frozen from a brute-force enumeration of words modulo negate-reverse.
        let cases = [
            (2, 1, 1),
            (3, 1, 1),
            (4, 27, 17),
            (5, 9, 5),
            (6, 287, 131),
            (8, 3183, 1121),
        ];
        for (n, a, b) in cases {
            let got = avg_genus_exact(n, true, AverageMode::Knots, 14)
                .unwrap()
                .value;
            assert_eq!(got, q(a, b), "n = {n}");
        }
        let classes: HashSet<_> = enumerate_words(2, 14)
            .unwrap()
            .map(|w| w.canonicalize())
            .collect();
        assert_eq!(classes.len(), 3);
        // unsigned compositions modulo reversal
        let unsigned = [(4, 4, 3), (6, 9, 5), (8, 41, 18)];
        for (n, a, b) in unsigned {
            let got = avg_genus_exact(n, false, AverageMode::Knots, 14)
                .unwrap()
                .value;
            assert_eq!(got, q(a, b), "n = {n}");
        }
    }

    #[test]
    fn tail_fractions() {
        let t = |n| {
            tail_fraction(n, &default_tail_threshold(), true)
                .unwrap()
                .value
        };
        assert_eq!(t(8), q(28, 2188));
        assert_eq!(t(2), q(0, 1));
        assert_eq!(t(16), q(1835, 3587227));
        assert!(t(16) < t(8));
    }

    #[test]
    fn quarter_bound_small_n() {
        let rep = lemma1_check(4).unwrap();
        assert_eq!(rep.rows[0], (2, q(1, 2)));
        assert_eq!(rep.rows[2], (4, q(11, 28)));
        let rep = lemma1_check(64).unwrap();
        assert!(rep.min_ratio >= q(1, 4));
        assert_eq!(rep.rows.len(), 63);
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_string(&q(1, 3), 4), "0.3333");
        assert_eq!(decimal_string(&q(2, 3), 4), "0.6667");
        assert_eq!(decimal_string(&q(11, 28), 6), "0.392857");
        assert_eq!(decimal_string(&q(-1, 8), 2), "-0.13");
        assert_eq!(decimal_string(&q(5, 1), 0), "5");
    }
}
