//! Constructive upper bound on the smooth 4-genus.
//!
//! The pipeline takes `K = K(2a_1, ..., 2a_2m)` to a ribbon knot through
//! a chain of oriented cobordisms whose genera are summed:
//!
//! 1. every aligned pair `(a_2i-1, a_2i)` with an entry above `k` in absolute
//!    value is removed, genus 2 each, giving `K'`;
//! 2. `K'` is cut at pair indices `s+1, 2(s+1), ...`, genus 1 per cut, giving
//!    a connected sum `K''` of `t = ceil(m'/(s+1))` summands;
//! 3. summands are matched with mirror copies; `K # mirror(K)` is ribbon, so
//!    those pairs cost nothing;
//! 4. each unmatched summand is removed at the cost of its Seifert genus.
//!
//! The reported bound is `min(g(K), total cost)`. Every run produces a
//! [`CobordismTrace`] that [`replay`] re-executes independently.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::knot::{ConnectedSum, KnotClass, TwistWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoundParams {
    /// Twist-size cutoff for pair removal.
    pub k: u64,
    /// Twist pairs per connected-sum chunk.
    pub s: u64,
}

impl BoundParams {
    pub fn new(k: u64, s: u64) -> Result<Self, EngineError> {
        if k == 0 || s == 0 {
            return Err(EngineError::InvalidParams { k, s });
        }
        Ok(BoundParams { k, s })
    }

    /// Whether `(k, s)` satisfy `k >= 32`, `s >= 2` and `k, s < n`, the
    /// regime where the worst-case estimate is meant to apply. Individual
    /// moves are valid for any positive `k` and `s`.
    pub fn in_asymptotic_regime(&self, n: u64) -> bool {
        self.k >= 32 && self.s >= 2 && self.k < n && self.s < n
    }
}

impl fmt::Display for BoundParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} s={}", self.k, self.s)
    }
}

/// Cartesian product of cutoffs and chunk sizes, ordered by `(k, s)`.
pub fn param_grid(ks: &[u64], ss: &[u64]) -> Result<Vec<BoundParams>, EngineError> {
    let mut grid = Vec::with_capacity(ks.len() * ss.len());
    for &k in ks {
        for &s in ss {
            grid.push(BoundParams::new(k, s)?);
        }
    }
    grid.sort();
    grid.dedup();
    if grid.is_empty() {
        return Err(EngineError::EmptyGrid);
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LargePairRemoval {
    /// `None` when every pair was removed (the unknot).
    pub remainder: Option<TwistWord>,
    /// 1-based pair indices into the input word, ascending.
    pub removed: Vec<usize>,
}

impl LargePairRemoval {
    pub fn removed_count(&self) -> u64 {
        self.removed.len() as u64
    }
}

/// Removes, in one pass, every pair with `max(|a_2i-1|, |a_2i|) > k`.
pub fn remove_large_pairs(w: &TwistWord, k: u64) -> LargePairRemoval {
    let mut kept = Vec::with_capacity(w.len());
    let mut removed = Vec::new();
    for (i, pair) in w.entries().chunks_exact(2).enumerate() {
        if pair[0].unsigned_abs() > k || pair[1].unsigned_abs() > k {
            removed.push(i + 1);
        } else {
            kept.extend_from_slice(pair);
        }
    }
    let remainder = (!kept.is_empty()).then(|| TwistWord::from_valid(kept));
    LargePairRemoval { remainder, removed }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunking {
    /// Summands in diagram order.
    pub summands: Vec<TwistWord>,
    /// 1-based pair indices where the word was cut, ascending.
    pub split_pairs: Vec<usize>,
}

impl Chunking {
    pub fn split_count(&self) -> u64 {
        self.split_pairs.len() as u64
    }

    /// The census of summand types, `a(w)` for each class `w`.
    pub fn connected_sum(&self) -> ConnectedSum {
        self.summands.iter().map(TwistWord::canonicalize).collect()
    }
}

/// Cuts at pair indices `j(s+1)` for `j = 1 .. t-1`, `t = ceil(m/(s+1))`.
///
/// Each cut deletes its pair. All summands but the last have exactly `s`
/// pairs; the last has between 1 and `s+1`.
pub fn chunk(w: &TwistWord, s: u64) -> Chunking {
    let m = w.pair_count();
    let stride = usize::try_from(s).unwrap_or(usize::MAX).saturating_add(1);
    let t = m.div_ceil(stride);
    let entries = w.entries();
    let split_pairs: Vec<usize> = (1..t).map(|j| j * stride).collect();
    let summands = (0..t)
        .map(|j| {
            let first = j * stride + 1;
            let last = if j + 1 < t { (j + 1) * stride - 1 } else { m };
            TwistWord::from_valid(entries[2 * (first - 1)..2 * last].to_vec())
        })
        .collect();
    Chunking {
        summands,
        split_pairs,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MirrorCancellation {
    pub residual: ConnectedSum,
    /// `(c, pairs)`: `pairs` copies of `c # mirror(c)` were cancelled. `c` is
    /// the smaller class of its mirror pair.
    pub cancelled: Vec<(KnotClass, u64)>,
}

impl MirrorCancellation {
    pub fn cancelled_pairs(&self) -> u64 {
        self.cancelled.iter().map(|(_, p)| p).sum()
    }

    /// The ribbon part `#(c # mirror(c))` removed from the input.
    pub fn ribbon(&self) -> ConnectedSum {
        let mut out = ConnectedSum::unknot();
        for (c, p) in &self.cancelled {
            out.insert_many(c.clone(), *p);
            out.insert_many(c.mirror(), *p);
        }
        out
    }
}

/// Greedy matching of each class with its mirror class.
///
/// Leaves `|a(c) - a(mirror c)|` copies of the majority chirality for each
/// chiral pair and at most one copy of each amphichiral class.
pub fn cancel_mirror_pairs(cs: &ConnectedSum) -> MirrorCancellation {
    let mut residual = ConnectedSum::unknot();
    let mut cancelled = Vec::new();
    for (c, count) in cs.iter() {
        let mirror = c.mirror();
        if mirror == *c {
            let pairs = count / 2;
            if pairs > 0 {
                cancelled.push((c.clone(), pairs));
            }
            residual.insert_many(c.clone(), count % 2);
        } else {
            let other = cs.count(&mirror);
            let pairs = count.min(other);
            if pairs > 0 && *c < mirror {
                cancelled.push((c.clone(), pairs));
            }
            residual.insert_many(c.clone(), count - pairs);
        }
    }
    MirrorCancellation {
        residual,
        cancelled,
    }
}

/// One removal step per residual summand, each costing its Seifert genus.
pub fn remove_residual(cs: &ConnectedSum) -> (Vec<TraceStep>, u64) {
    let mut steps = Vec::with_capacity(cs.len() as usize);
    for (c, count) in cs.iter() {
        for _ in 0..count {
            steps.push(TraceStep {
                genus_cost: c.seifert_genus(),
                action: Action::RemoveResidual { class: c.clone() },
            });
        }
    }
    (steps, cs.genus())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    RemoveLargePair,
    Split,
    CancelMirrorPair,
    RemoveResidual,
}

impl StepKind {
    fn tag(self) -> &'static str {
        match self {
            StepKind::RemoveLargePair => "remove_large_pair",
            StepKind::Split => "split",
            StepKind::CancelMirrorPair => "cancel_mirror_pair",
            StepKind::RemoveResidual => "remove_residual",
        }
    }

    fn phase(self) -> u8 {
        match self {
            StepKind::RemoveLargePair => 0,
            StepKind::Split => 1,
            StepKind::CancelMirrorPair => 2,
            StepKind::RemoveResidual => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Pair index into the initial word.
    RemoveLargePair {
        pair: usize,
    },
    /// Pair index into the word left after large-pair removal.
    Split {
        pair: usize,
    },
    /// Removes `class` together with its mirror class.
    CancelMirrorPair {
        class: KnotClass,
    },
    RemoveResidual {
        class: KnotClass,
    },
}

impl Action {
    pub fn kind(&self) -> StepKind {
        match self {
            Action::RemoveLargePair { .. } => StepKind::RemoveLargePair,
            Action::Split { .. } => StepKind::Split,
            Action::CancelMirrorPair { .. } => StepKind::CancelMirrorPair,
            Action::RemoveResidual { .. } => StepKind::RemoveResidual,
        }
    }

    /// Genus of the cobordism this move realizes.
    pub fn required_cost(&self) -> u64 {
        match self {
            Action::RemoveLargePair { .. } => 2,
            Action::Split { .. } => 1,
            Action::CancelMirrorPair { .. } => 0,
            Action::RemoveResidual { class } => class.seifert_genus(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    #[serde(flatten)]
    pub action: Action,
    pub genus_cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CobordismTrace {
    pub initial_word: TwistWord,
    pub params: BoundParams,
    pub steps: Vec<TraceStep>,
    /// The ribbon connected sum left at the end (unknot if nothing cancelled).
    #[serde(rename = "final")]
    pub final_sum: ConnectedSum,
    /// `min(g(K), total_cost)`.
    pub bound: u64,
}

impl CobordismTrace {
    /// Sum of step costs, before the Seifert-genus cap.
    pub fn total_cost(&self) -> u64 {
        self.steps.iter().map(|s| s.genus_cost).sum()
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps
            .iter()
            .filter(|s| s.action.kind() == kind)
            .count()
    }
}

/// Step counts of one pipeline run, without the step list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundSummary {
    pub params: BoundParams,
    pub genus: u64,
    pub removed_pairs: u64,
    pub splits: u64,
    pub cancelled_pairs: u64,
    pub residual_cost: u64,
}

impl BoundSummary {
    pub fn total_cost(&self) -> u64 {
        2 * self.removed_pairs + self.splits + self.residual_cost
    }

    pub fn bound(&self) -> u64 {
        self.genus.min(self.total_cost())
    }
}

/// Runs the pipeline and returns only the counts.
pub fn bound_summary(w: &TwistWord, p: BoundParams) -> BoundSummary {
    let removal = remove_large_pairs(w, p.k);
    let mut summary = BoundSummary {
        params: p,
        genus: w.seifert_genus(),
        removed_pairs: removal.removed_count(),
        splits: 0,
        cancelled_pairs: 0,
        residual_cost: 0,
    };
    if let Some(rest) = removal.remainder {
        let chunks = chunk(&rest, p.s);
        let cancel = cancel_mirror_pairs(&chunks.connected_sum());
        summary.splits = chunks.split_count();
        summary.cancelled_pairs = cancel.cancelled_pairs();
        summary.residual_cost = cancel.residual.genus();
    }
    summary
}

/// Runs the pipeline and records every move.
pub fn g4_upper_bound(w: &TwistWord, p: BoundParams) -> CobordismTrace {
    let removal = remove_large_pairs(w, p.k);
    let mut steps: Vec<TraceStep> = removal
        .removed
        .iter()
        .map(|&pair| TraceStep {
            action: Action::RemoveLargePair { pair },
            genus_cost: 2,
        })
        .collect();
    let mut final_sum = ConnectedSum::unknot();
    if let Some(rest) = &removal.remainder {
        let chunks = chunk(rest, p.s);
        steps.extend(chunks.split_pairs.iter().map(|&pair| TraceStep {
            action: Action::Split { pair },
            genus_cost: 1,
        }));
        let cancel = cancel_mirror_pairs(&chunks.connected_sum());
        for (c, pairs) in &cancel.cancelled {
            for _ in 0..*pairs {
                steps.push(TraceStep {
                    action: Action::CancelMirrorPair { class: c.clone() },
                    genus_cost: 0,
                });
            }
        }
        steps.extend(remove_residual(&cancel.residual).0);
        final_sum = cancel.ribbon();
    }
    let total: u64 = steps.iter().map(|s| s.genus_cost).sum();
    CobordismTrace {
        initial_word: w.clone(),
        params: p,
        steps,
        final_sum,
        bound: w.seifert_genus().min(total),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestBound {
    pub bound: u64,
    pub params: BoundParams,
    pub trace: CobordismTrace,
}

/// The grid point with the least bound; ties go to smaller `k`, then `s`.
pub fn best_summary(w: &TwistWord, grid: &[BoundParams]) -> Result<BoundSummary, EngineError> {
    grid.iter()
        .map(|&p| bound_summary(w, p))
        .min_by_key(|s| (s.bound(), s.params))
        .ok_or(EngineError::EmptyGrid)
}

pub fn g4_upper_bound_best(w: &TwistWord, grid: &[BoundParams]) -> Result<BestBound, EngineError> {
    let best = best_summary(w, grid)?;
    let trace = g4_upper_bound(w, best.params);
    Ok(BestBound {
        bound: trace.bound,
        params: best.params,
        trace,
    })
}

/// The three terms of the closed-form worst-case genus estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCaseTerms {
    /// `2n/k`
    pub large_pairs: f64,
    /// `n / (2(s+1))`
    pub chunking: f64,
    /// `(s/2) (2k)^(2s) sqrt(n / (2(s+1)(2k)^(2s)))`
    pub residual: f64,
}

impl WorstCaseTerms {
    pub fn total(&self) -> f64 {
        self.large_pairs + self.chunking + self.residual
    }
}

pub fn worst_case_terms(n: u64, p: BoundParams) -> WorstCaseTerms {
    let n = n as f64;
    let k = p.k as f64;
    let s = p.s as f64;
    // (2k)^(2s) overflows f64 long before its square root does, so the
    // residual term is evaluated as (s/2) (2k)^s sqrt(n / (2(s+1))).
    let log_alphabet_half = s * (2.0 * k).ln();
    let residual = 0.5 * s * (log_alphabet_half + 0.5 * (n / (2.0 * (s + 1.0))).ln()).exp();
    WorstCaseTerms {
        large_pairs: 2.0 * n / k,
        chunking: n / (2.0 * (s + 1.0)),
        residual,
    }
}

pub fn worst_case_bound(n: u64, p: BoundParams) -> f64 {
    worst_case_terms(n, p).total()
}

/// `2/k + 1/(2(s+1))`, the limit of `worst_case_bound(n) / n`.
pub fn worst_case_slope(p: BoundParams) -> f64 {
    2.0 / p.k as f64 + 1.0 / (2.0 * (p.s as f64 + 1.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub steps_checked: usize,
    pub total_cost: u64,
    pub bound: u64,
    pub ribbon: ConnectedSum,
}

fn fail(step: usize, reason: impl Into<String>) -> EngineError {
    EngineError::Replay {
        step,
        reason: reason.into(),
    }
}

/// Deletes the given 1-based pairs and returns the maximal nonempty runs.
fn cut_pairs(entries: &[i64], cuts: &[usize]) -> Vec<TwistWord> {
    let mut out = Vec::new();
    let mut start = 0;
    for &pair in cuts.iter().chain(std::iter::once(&(entries.len() / 2 + 1))) {
        let end = 2 * (pair - 1);
        if end > start {
            out.push(TwistWord::from_valid(entries[start..end].to_vec()));
        }
        start = (end + 2).min(entries.len());
    }
    out
}

/// Re-executes a trace from its initial word.
///
/// Each move is applied to the running state and its cost checked against
/// its kind. Steps must appear in pipeline order: removals, splits,
/// cancellations, residual removals. At the end nothing may remain except
/// the cancelled pairs, which must match `final` and be mirror-paired.
pub fn replay(trace: &CobordismTrace) -> Result<ReplayReport, EngineError> {
    let word = trace.initial_word.entries();
    let m = trace.initial_word.pair_count();
    let mut removed: Vec<usize> = Vec::new();
    let mut kept: Option<Vec<i64>> = None;
    let mut splits: Vec<usize> = Vec::new();
    let mut current: Option<ConnectedSum> = None;
    let mut ribbon = ConnectedSum::unknot();
    let mut phase = 0u8;
    let mut total = 0u64;

    for (idx, step) in trace.steps.iter().enumerate() {
        let kind = step.action.kind();
        if kind.phase() < phase {
            return Err(fail(idx, format!("{} after a later phase", kind.tag())));
        }
        phase = kind.phase();
        if step.genus_cost != step.action.required_cost() {
            return Err(fail(
                idx,
                format!(
                    "{} costs {}, recorded {}",
                    kind.tag(),
                    step.action.required_cost(),
                    step.genus_cost
                ),
            ));
        }
        total += step.genus_cost;

        if phase >= 1 && kept.is_none() {
            kept = Some(
                word.chunks_exact(2)
                    .enumerate()
                    .filter(|(i, _)| !removed.contains(&(i + 1)))
                    .flat_map(|(_, p)| p.iter().copied())
                    .collect(),
            );
        }
        if phase >= 2 && current.is_none() {
            current = Some(
                cut_pairs(kept.as_ref().unwrap(), &splits)
                    .iter()
                    .map(TwistWord::canonicalize)
                    .collect(),
            );
        }

        match &step.action {
            Action::RemoveLargePair { pair } => {
                if *pair == 0 || *pair > m {
                    return Err(fail(idx, format!("pair {pair} outside 1..={m}")));
                }
                if removed.last().is_some_and(|&last| last >= *pair) {
                    return Err(fail(idx, "removed pairs must be strictly increasing"));
                }
                removed.push(*pair);
            }
            Action::Split { pair } => {
                let avail = kept.as_ref().unwrap().len() / 2;
                if *pair == 0 || *pair > avail {
                    return Err(fail(idx, format!("split pair {pair} outside 1..={avail}")));
                }
                if splits.last().is_some_and(|&last| last >= *pair) {
                    return Err(fail(idx, "split pairs must be strictly increasing"));
                }
                splits.push(*pair);
            }
            Action::CancelMirrorPair { class } => {
                let cur = current.as_mut().unwrap();
                let mirror = class.mirror();
                if !cur.remove(class) {
                    return Err(fail(idx, format!("no summand {class} to cancel")));
                }
                if !cur.remove(&mirror) {
                    return Err(fail(idx, format!("no mirror summand {mirror} for {class}")));
                }
                ribbon.insert(class.clone());
                ribbon.insert(mirror);
            }
            Action::RemoveResidual { class } => {
                let cur = current.as_mut().unwrap();
                if !cur.remove(class) {
                    return Err(fail(idx, format!("no summand {class} to remove")));
                }
            }
        }
    }

    let end = trace.steps.len();
    let leftover = match current {
        Some(cs) => cs,
        None => {
            let kept = kept.unwrap_or_else(|| {
                word.chunks_exact(2)
                    .enumerate()
                    .filter(|(i, _)| !removed.contains(&(i + 1)))
                    .flat_map(|(_, p)| p.iter().copied())
                    .collect()
            });
            cut_pairs(&kept, &splits)
                .iter()
                .map(TwistWord::canonicalize)
                .collect()
        }
    };
    if !leftover.is_unknot() {
        return Err(fail(end, format!("summands left unaccounted: {leftover}")));
    }
    if !ribbon.is_mirror_paired() {
        return Err(fail(end, "final sum is not a union of mirror pairs"));
    }
    if ribbon != trace.final_sum {
        return Err(fail(
            end,
            format!(
                "final sum {ribbon} differs from recorded {}",
                trace.final_sum
            ),
        ));
    }
    let bound = trace.initial_word.seifert_genus().min(total);
    if bound != trace.bound {
        return Err(fail(
            end,
            format!("bound {bound} differs from recorded {}", trace.bound),
        ));
    }
    Ok(ReplayReport {
        steps_checked: end,
        total_cost: total,
        bound,
        ribbon,
    })
}

const TRACE_MAGIC: &str = "twobridge-trace 1";

impl fmt::Display for CobordismTrace {
    /// Line-oriented form; [`CobordismTrace::from_str`] reads it back.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "{TRACE_MAGIC}")?;
        writeln!(out, "word {}", self.initial_word)?;
        writeln!(out, "params k={} s={}", self.params.k, self.params.s)?;
        writeln!(out, "n {}", self.initial_word.complexity())?;
        writeln!(out, "m {}", self.initial_word.pair_count())?;
        writeln!(out, "bound {}", self.bound)?;
        writeln!(out, "cost {}", self.total_cost())?;
        writeln!(out, "steps {}", self.steps.len())?;
        for step in &self.steps {
            let tag = step.action.kind().tag();
            match &step.action {
                Action::RemoveLargePair { pair } | Action::Split { pair } => {
                    writeln!(out, "{tag} {pair} cost={}", step.genus_cost)?
                }
                Action::CancelMirrorPair { class } | Action::RemoveResidual { class } => {
                    writeln!(out, "{tag} {class} cost={}", step.genus_cost)?
                }
            }
        }
        writeln!(out, "final {}", self.final_sum)?;
        f.write_str(&out)
    }
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<(usize, &'a str), EngineError> {
    let (no, line) = lines.next().ok_or(EngineError::TraceParse {
        line: 0,
        reason: format!("missing `{key}` line"),
    })?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .map(|rest| (no, rest))
        .ok_or(EngineError::TraceParse {
            line: no,
            reason: format!("expected `{key} ...`"),
        })
}

fn parse_num<T: FromStr>(no: usize, s: &str) -> Result<T, EngineError> {
    s.parse().map_err(|_| EngineError::TraceParse {
        line: no,
        reason: format!("bad number `{s}`"),
    })
}

impl FromStr for CobordismTrace {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let perr = |line: usize, reason: String| EngineError::TraceParse { line, reason };
        let mut lines = s.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l == TRACE_MAGIC => {}
            _ => return Err(perr(1, format!("expected `{TRACE_MAGIC}`"))),
        }
        let (no, w) = header(&mut lines, "word")?;
        let initial_word: TwistWord = w.parse().map_err(|e| perr(no, format!("{e}")))?;
        let (no, p) = header(&mut lines, "params")?;
        let (k, s) = p
            .strip_prefix("k=")
            .and_then(|r| r.split_once(" s="))
            .ok_or_else(|| perr(no, "expected `params k=<k> s=<s>`".into()))?;
        let params = BoundParams::new(parse_num(no, k)?, parse_num(no, s)?)
            .map_err(|e| perr(no, e.to_string()))?;
        let (no, n) = header(&mut lines, "n")?;
        if parse_num::<u64>(no, n)? != initial_word.complexity() {
            return Err(perr(no, "n disagrees with word".into()));
        }
        let (no, m) = header(&mut lines, "m")?;
        if parse_num::<usize>(no, m)? != initial_word.pair_count() {
            return Err(perr(no, "m disagrees with word".into()));
        }
        let (no, b) = header(&mut lines, "bound")?;
        let bound = parse_num(no, b)?;
        let (cost_no, c) = header(&mut lines, "cost")?;
        let cost: u64 = parse_num(cost_no, c)?;
        let (no, count) = header(&mut lines, "steps")?;
        let count: usize = parse_num(no, count)?;

        let mut steps = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, line) = lines
                .next()
                .ok_or_else(|| perr(0, "trace ends inside step list".into()))?;
            let mut parts = line.split(' ');
            let (tag, arg, cost) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(a), Some(c), None) => (t, a, c),
                _ => return Err(perr(no, "expected `<kind> <arg> cost=<c>`".into())),
            };
            let genus_cost = cost
                .strip_prefix("cost=")
                .ok_or_else(|| perr(no, "expected `cost=`".into()))
                .and_then(|c| parse_num(no, c))?;
            let class = || {
                arg.parse::<TwistWord>()
                    .map_err(|e| perr(no, e.to_string()))
            };
            let action = match tag {
                "remove_large_pair" => Action::RemoveLargePair {
                    pair: parse_num(no, arg)?,
                },
                "split" => Action::Split {
                    pair: parse_num(no, arg)?,
                },
                "cancel_mirror_pair" => Action::CancelMirrorPair {
                    class: class()?.canonicalize(),
                },
                "remove_residual" => Action::RemoveResidual {
                    class: class()?.canonicalize(),
                },
                other => return Err(perr(no, format!("unknown step kind `{other}`"))),
            };
            steps.push(TraceStep { action, genus_cost });
        }
        let (no, fin) = header(&mut lines, "final")?;
        let final_sum: ConnectedSum = fin.parse().map_err(|e| perr(no, format!("{e}")))?;
        if let Some((no, _)) = lines.next() {
            return Err(perr(no, "trailing content".into()));
        }
        let trace = CobordismTrace {
            initial_word,
            params,
            steps,
            final_sum,
            bound,
        };
        if trace.total_cost() != cost {
            return Err(perr(cost_no, "cost disagrees with steps".into()));
        }
        Ok(trace)
    }
}
