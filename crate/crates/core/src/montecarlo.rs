//! Seeded, parallel Monte-Carlo estimates at large `n`.
//!
//! Words are drawn uniformly from all signed words of complexity `n`. Work is
//! cut into fixed batches of [`BATCH_SIZE`] samples, each with its own
//! ChaCha8 stream derived from the master seed, `n` and the batch index. Batch
//! sums are merged in index order, so results do not depend on how many
//! worker threads ran them.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cobordism::{best_summary, BoundParams};
use crate::error::{EngineError, SampleError};
use crate::knot::TwistWord;

/// Used by every randomized command unless a seed is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2b71_d9e5_4a3c;

pub const BATCH_SIZE: u64 = 32;

/// Default ceiling on `n × samples` per estimate.
pub const DEFAULT_WORK_CAP: u64 = 20_000_000_000;

/// SplitMix64 finalizer; decorrelates seeds for different `n`.
fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for batch `batch` of an estimate at complexity `n`.
pub fn batch_rng(master_seed: u64, n: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master_seed, n));
    rng.set_stream(batch);
    rng
}

/// Cumulative distribution of `m` for uniformly random signed words.
///
/// Weights `C(n-1, 2m-1) 4^m` are generated exactly with big integers via
/// `w(m+1) = w(m) · 4(n-2m)(n-2m-1) / (2m(2m+1))`, then scaled to `f64`
/// relative to the largest one.
#[derive(Clone, Debug)]
pub struct PartCountTable {
    n: u64,
    cumulative: Vec<f64>,
}

impl PartCountTable {
    pub fn new(n: u64) -> Result<Self, SampleError> {
        if n < 2 {
            return Err(SampleError::ComplexityTooSmall(n));
        }
        let max_m = n / 2;
        let mut mantissas = Vec::with_capacity(max_m as usize);
        let mut exponents = Vec::with_capacity(max_m as usize);
        let mut w = BigUint::from(4 * (n - 1));
        for m in 1..=max_m {
            let shift = w.bits().saturating_sub(60);
            mantissas.push((&w >> shift).to_f64().expect("60-bit value fits f64"));
            exponents.push(shift as i64);
            if m < max_m {
                w *= 4 * (n - 2 * m) * (n - 2 * m - 1);
                w /= (2 * m) * (2 * m + 1);
            }
        }
        let top = *exponents.iter().max().expect("n >= 2");
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = mantissas
            .iter()
            .zip(&exponents)
            .map(|(&mant, &e)| {
                let rel = (e - top).max(-1100) as i32;
                acc += mant * 2f64.powi(rel);
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(PartCountTable { n, cumulative })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `P(m)`, for `m = 1 ..= n/2`.
    pub fn probability(&self, m: u64) -> f64 {
        if m == 0 || m as usize > self.cumulative.len() {
            return 0.0;
        }
        let i = m as usize - 1;
        self.cumulative[i] - if i == 0 { 0.0 } else { self.cumulative[i - 1] }
    }

    pub fn sample_m<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        (i.min(self.cumulative.len() - 1) + 1) as u64
    }
}

/// A uniformly random signed word of complexity `table.n()`.
///
/// Draws `m`, then `2m - 1` distinct cut points among the `n - 1` gaps, then
/// an independent sign per entry.
pub fn sample_word<R: Rng + ?Sized>(table: &PartCountTable, rng: &mut R) -> TwistWord {
    let n = table.n;
    let m = table.sample_m(rng);
    let parts = 2 * m as usize;
    let mut cuts = index::sample(rng, (n - 1) as usize, parts - 1).into_vec();
    cuts.sort_unstable();
    let mut entries = Vec::with_capacity(parts);
    let mut last = 0usize;
    for c in cuts {
        entries.push((c + 1 - last) as i64);
        last = c + 1;
    }
    entries.push((n as usize - last) as i64);
    let mut bits = 0u64;
    for (i, a) in entries.iter_mut().enumerate() {
        if i % 64 == 0 {
            bits = rng.random();
        }
        if bits >> (i % 64) & 1 == 1 {
            *a = -*a;
        }
    }
    TwistWord::from_valid(entries)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: u64,
    pub sample_count: u64,
    pub master_seed: u64,
    pub worker_count: usize,
    /// Maximum `n × samples`; beyond it the report is partial.
    pub work_cap: u64,
}

impl SamplerConfig {
    pub fn new(n: u64, sample_count: u64, master_seed: u64) -> Self {
        SamplerConfig {
            n,
            sample_count,
            master_seed,
            worker_count: std::thread::available_parallelism().map_or(1, |p| p.get()),
            work_cap: DEFAULT_WORK_CAP,
        }
    }

    fn validate(&self) -> Result<(), SampleError> {
        if self.n < 2 {
            return Err(SampleError::ComplexityTooSmall(self.n));
        }
        if self.sample_count == 0 {
            return Err(SampleError::NonPositive("sample_count"));
        }
        if self.worker_count == 0 {
            return Err(SampleError::NonPositive("worker_count"));
        }
        Ok(())
    }
}

/// Mean with its standard error over `samples` draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub std_error: Option<f64>,
    pub samples: u64,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, count: u64) -> Self {
        let nf = count as f64;
        let mean = sum / nf;
        let std_error = (count > 1).then(|| {
            let var = ((sum_sq - sum * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        });
        Estimate {
            mean,
            std_error,
            samples: count,
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Accumulator {
    count: u64,
    genus: u128,
    genus_sq: u128,
    bound: u128,
    bound_sq: u128,
    ratio: f64,
    ratio_sq: f64,
    tail: u64,
    best: BTreeMap<BoundParams, u64>,
}

impl Accumulator {
    fn push(&mut self, n: u64, genus: u64, bound: u64, best: BoundParams) {
        let (g, b) = (genus as u128, bound as u128);
        let r = bound as f64 / genus as f64;
        self.count += 1;
        self.genus += g;
        self.genus_sq += g * g;
        self.bound += b;
        self.bound_sq += b * b;
        self.ratio += r;
        self.ratio_sq += r * r;
        if 8 * genus <= n {
            self.tail += 1;
        }
        *self.best.entry(best).or_default() += 1;
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        self.count += other.count;
        self.genus += other.genus;
        self.genus_sq += other.genus_sq;
        self.bound += other.bound;
        self.bound_sq += other.bound_sq;
        self.ratio += other.ratio;
        self.ratio_sq += other.ratio_sq;
        self.tail += other.tail;
        for (p, c) in other.best {
            *self.best.entry(p).or_default() += c;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n: u64,
    pub requested_samples: u64,
    /// False when the work cap stopped sampling early.
    pub complete: bool,
    pub master_seed: u64,
    pub grid: Vec<BoundParams>,
    pub avg_genus: Estimate,
    pub avg_bound: Estimate,
    pub avg_ratio: Estimate,
    pub tail_fraction: Estimate,
    /// Grid point most often attaining the least bound; ties go to the
    /// smaller `(k, s)`.
    pub best_params: BoundParams,
    pub best_params_counts: Vec<(BoundParams, u64)>,
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Samples words and averages `g`, the certified bound, their ratio and the
/// `m <= n/8` indicator.
pub fn estimate_stats(
    cfg: &SamplerConfig,
    grid: &[BoundParams],
) -> Result<StatsReport, SampleError> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(EngineError::EmptyGrid.into());
    }
    let n = cfg.n;
    let allowed = (cfg.work_cap / n).max(1);
    let samples = cfg.sample_count.min(allowed);
    let table = PartCountTable::new(n)?;
    let batches = samples.div_ceil(BATCH_SIZE);

    let partials: Vec<Accumulator> = pool(cfg.worker_count).install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = batch_rng(cfg.master_seed, n, b);
                let mut acc = Accumulator::default();
                let end = ((b + 1) * BATCH_SIZE).min(samples);
                for _ in b * BATCH_SIZE..end {
                    let w = sample_word(&table, &mut rng);
                    let best = best_summary(&w, grid).expect("grid is nonempty");
                    acc.push(n, w.seifert_genus(), best.bound(), best.params);
                }
                acc
            })
            .collect()
    });
    let acc = partials
        .into_iter()
        .fold(Accumulator::default(), Accumulator::merge);

    let best_params = acc
        .best
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(p, _)| *p)
        .expect("at least one sample");
    Ok(StatsReport {
        n,
        requested_samples: cfg.sample_count,
        complete: samples == cfg.sample_count,
        master_seed: cfg.master_seed,
        grid: grid.to_vec(),
        avg_genus: Estimate::from_sums(acc.genus as f64, acc.genus_sq as f64, acc.count),
        avg_bound: Estimate::from_sums(acc.bound as f64, acc.bound_sq as f64, acc.count),
        avg_ratio: Estimate::from_sums(acc.ratio, acc.ratio_sq, acc.count),
        tail_fraction: Estimate::from_sums(acc.tail as f64, acc.tail as f64, acc.count),
        best_params,
        best_params_counts: acc.best.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: u64,
    pub samples: u64,
    pub complete: bool,
    pub avg_ratio: f64,
    pub se_ratio: Option<f64>,
    pub avg_bound_over_n: f64,
    pub eight_avg_bound_over_n: f64,
    pub tail_fraction: f64,
    pub best_params: BoundParams,
}

impl From<&StatsReport> for TrendRow {
    fn from(r: &StatsReport) -> Self {
        let per_n = r.avg_bound.mean / r.n as f64;
        TrendRow {
            n: r.n,
            samples: r.avg_ratio.samples,
            complete: r.complete,
            avg_ratio: r.avg_ratio.mean,
            se_ratio: r.avg_ratio.std_error,
            avg_bound_over_n: per_n,
            eight_avg_bound_over_n: 8.0 * per_n,
            tail_fraction: r.tail_fraction.mean,
            best_params: r.best_params,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub master_seed: u64,
    pub grid: Vec<BoundParams>,
    pub rows: Vec<TrendRow>,
    pub reports: Vec<StatsReport>,
}

impl TrendReport {
    pub fn ratio_weakly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].avg_ratio <= w[0].avg_ratio)
    }

    pub fn complete(&self) -> bool {
        self.rows.iter().all(|r| r.complete)
    }
}

/// Runs [`estimate_stats`] along an ascending grid of `n`, taking everything
/// but `n` from `template`.
pub fn theorem1_report(
    n_grid: &[u64],
    template: &SamplerConfig,
    grid: &[BoundParams],
) -> Result<TrendReport, SampleError> {
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SampleError::InvalidGrid);
    }
    let mut reports = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let cfg = SamplerConfig {
            n,
            ..template.clone()
        };
        reports.push(estimate_stats(&cfg, grid)?);
    }
    Ok(TrendReport {
        master_seed: template.master_seed,
        grid: grid.to_vec(),
        rows: reports.iter().map(TrendRow::from).collect(),
        reports,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkExperimentConfig {
    pub k: u64,
    pub s: u64,
    /// Summands drawn per trial.
    pub t: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Words of length `2s` over `{-k..-1, 1..k}`, coded in base `2k`.
///
/// Digit `d` stands for `d - k` when `d < k` and `d - k + 1` otherwise, so
/// negation maps `d` to `2k - 1 - d`.
#[derive(Clone, Copy, Debug)]
struct Alphabet {
    radix: u64,
    len: u32,
    types: u64,
}

impl Alphabet {
    fn new(k: u64, s: u64) -> Result<Self, SampleError> {
        let radix = 2 * k;
        let len = u32::try_from(2 * s).map_err(|_| SampleError::TooManyTypes)?;
        let types = radix.checked_pow(len).ok_or(SampleError::TooManyTypes)?;
        Ok(Alphabet { radix, len, types })
    }

    fn digits(&self, mut code: u64) -> Vec<u64> {
        (0..self.len)
            .map(|_| {
                let d = code % self.radix;
                code /= self.radix;
                d
            })
            .collect()
    }

    fn encode(&self, digits: impl DoubleEndedIterator<Item = u64>) -> u64 {
        digits.rev().fold(0, |acc, d| acc * self.radix + d)
    }

    fn mirror(&self, code: u64) -> u64 {
        self.encode(self.digits(code).into_iter().map(|d| self.radix - 1 - d))
    }

    /// Negate-reverse: the other word for the same knot.
    fn negate_reverse(&self, code: u64) -> u64 {
        self.encode(
            self.digits(code)
                .into_iter()
                .rev()
                .map(|d| self.radix - 1 - d),
        )
    }

    fn class(&self, code: u64) -> u64 {
        code.min(self.negate_reverse(code))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
struct TrialStats {
    word_discrepancy: f64,
    class_discrepancy: f64,
    amphichiral_summands: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    pub config: WalkExperimentConfig,
    /// `(2k)^(2s)`.
    pub types: u64,
    /// `t / (2k)^(2s)`, the expected count of each type.
    pub expected_count: f64,
    /// Mean over trials of the mean over pairs `{w, -w}` of `|a(w) - a(-w)|`.
    pub mean_discrepancy: f64,
    /// `None` for a single trial.
    pub std_error: Option<f64>,
    /// `mean_discrepancy / sqrt(t / (2k)^(2s))`; `None` when `t = 0`.
    pub normalized: Option<f64>,
    /// Same discrepancy with summands grouped into knot classes, averaged
    /// over chiral class pairs only.
    pub class_mean_discrepancy: f64,
    pub chiral_class_pairs: u64,
    pub amphichiral_classes: u64,
    /// Mean number of summands per trial in amphichiral classes.
    pub mean_amphichiral_summands: f64,
}

fn walk_trial(alpha: &Alphabet, t: u64, rng: &mut ChaCha8Rng) -> TrialStats {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for _ in 0..t {
        *counts.entry(rng.random_range(0..alpha.types)).or_default() += 1;
    }
    let get = |c: &u64| counts.get(c).copied().unwrap_or(0);

    let mut word_sum = 0u64;
    for (&code, &n) in &counts {
        let mirror = alpha.mirror(code);
        let other = get(&mirror);
        if other == 0 || code < mirror {
            word_sum += n.abs_diff(other);
        }
    }

    let mut classes: HashMap<u64, u64> = HashMap::new();
    for (&code, &n) in &counts {
        *classes.entry(alpha.class(code)).or_default() += n;
    }
    let mut class_sum = 0u64;
    let mut amphichiral = 0u64;
    for (&c, &n) in &classes {
        let mirror = alpha.class(alpha.mirror(c));
        if mirror == c {
            amphichiral += n;
            continue;
        }
        let other = classes.get(&mirror).copied().unwrap_or(0);
        if other == 0 || c < mirror {
            class_sum += n.abs_diff(other);
        }
    }
    let (pairs, _) = class_structure(alpha);
    TrialStats {
        word_discrepancy: word_sum as f64 / (alpha.types / 2) as f64,
        class_discrepancy: if pairs == 0 {
            0.0
        } else {
            class_sum as f64 / pairs as f64
        },
        amphichiral_summands: amphichiral,
    }
}

/// `(chiral class pairs, amphichiral classes)` among all words.
///
/// Negate-reverse fixes exactly the `(2k)^s` anti-palindromes, so there are
/// `((2k)^(2s) + (2k)^s) / 2` classes. A class is amphichiral exactly when
/// its words are palindromes, giving `(2k)^s / 2` of those; the remaining
/// `(2k)^(2s) / 2` classes form mirror pairs.
fn class_structure(alpha: &Alphabet) -> (u64, u64) {
    let half = alpha.radix.pow(alpha.len / 2);
    (alpha.types / 4, half / 2)
}

/// Draws `t` summand types uniformly per trial and measures the imbalance
/// between each type and its mirror.
pub fn walk_experiment(cfg: &WalkExperimentConfig) -> Result<WalkReport, SampleError> {
    if cfg.k == 0 {
        return Err(SampleError::NonPositive("k"));
    }
    if cfg.s == 0 {
        return Err(SampleError::NonPositive("s"));
    }
    if cfg.trials == 0 {
        return Err(SampleError::NonPositive("trials"));
    }
    let alpha = Alphabet::new(cfg.k, cfg.s)?;
    let trials: Vec<TrialStats> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            walk_trial(&alpha, cfg.t, &mut rng)
        })
        .collect();

    let count = trials.len() as u64;
    let (sum, sum_sq) = trials.iter().fold((0.0, 0.0), |(a, b), t| {
        (
            a + t.word_discrepancy,
            b + t.word_discrepancy * t.word_discrepancy,
        )
    });
    let est = Estimate::from_sums(sum, sum_sq, count);
    let expected_count = cfg.t as f64 / alpha.types as f64;
    let (pairs, amph) = class_structure(&alpha);
    Ok(WalkReport {
        config: cfg.clone(),
        types: alpha.types,
        expected_count,
        mean_discrepancy: est.mean,
        std_error: est.std_error,
        normalized: (cfg.t > 0).then(|| est.mean / expected_count.sqrt()),
        class_mean_discrepancy: trials.iter().map(|t| t.class_discrepancy).sum::<f64>()
            / count as f64,
        chiral_class_pairs: pairs,
        amphichiral_classes: amph,
        mean_amphichiral_summands: trials
            .iter()
            .map(|t| t.amphichiral_summands as f64)
            .sum::<f64>()
            / count as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cobordism::param_grid;
    use crate::partition::{default_tail_threshold, tail_fraction, CompositionCensus};

    #[test]
    fn table_matches_census() {
        for n in [2u64, 3, 4, 7, 12, 40] {
            let table = PartCountTable::new(n).unwrap();
            let census = CompositionCensus::new(n, true).unwrap();
            let total = census.total().to_f64().unwrap();
            for m in 1..=n / 2 {
                let want = census.count(m).to_f64().unwrap() / total;
                assert!(
                    (table.probability(m) - want).abs() < 1e-12,
                    "n = {n}, m = {m}"
                );
            }
        }
        let table = PartCountTable::new(4).unwrap();
        assert!((table.probability(2) - 16.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn table_at_large_n_is_normalized() {
        let table = PartCountTable::new(20_000).unwrap();
        let total: f64 = (1..=10_000).map(|m| table.probability(m)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // mode near m = n/3 for the 4^m-weighted binomial
        let mode = (1..=10_000)
            .max_by(|&a, &b| table.probability(a).total_cmp(&table.probability(b)))
            .unwrap();
        assert!((6600..=6700).contains(&mode), "mode {mode}");
    }

    #[test]
    fn samples_have_complexity_n() {
        let mut rng = batch_rng(1, 0, 0);
        for n in [2u64, 3, 10, 101, 5000] {
            let table = PartCountTable::new(n).unwrap();
            for _ in 0..50 {
                assert_eq!(sample_word(&table, &mut rng).complexity(), n);
            }
        }
    }

    #[test]
    fn n2_chi_square() {
        let table = PartCountTable::new(2).unwrap();
        let mut rng = batch_rng(7, 2, 0);
        let mut hist: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *hist
                .entry(sample_word(&table, &mut rng).into())
                .or_default() += 1;
        }
        assert_eq!(hist.len(), 4);
        let e = draws as f64 / 4.0;
        let chi2: f64 = hist.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
        // 3 degrees of freedom, p = 0.001
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn sampler_exact_per_word() {
        for n in [4u64, 5, 6] {
            let table = PartCountTable::new(n).unwrap();
            let mut rng = batch_rng(11, n, 3);
            let mut hist: HashMap<Vec<i64>, u64> = HashMap::new();
            let draws = 1_000_000u64;
            for _ in 0..draws {
                *hist
                    .entry(sample_word(&table, &mut rng).into())
                    .or_default() += 1;
            }
            let words: Vec<_> = crate::partition::enumerate_words(n, 14).unwrap().collect();
            assert_eq!(hist.len(), words.len());
            let p = 1.0 / words.len() as f64;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            for w in words {
                let o = hist.get(w.entries()).copied().unwrap_or(0) as f64;
                assert!((o - draws as f64 * p).abs() < 4.0 * sd, "n = {n}, {w}: {o}");
            }
        }
    }

    fn cfg(n: u64, samples: u64, seed: u64, workers: usize) -> SamplerConfig {
        SamplerConfig {
            worker_count: workers,
            ..SamplerConfig::new(n, samples, seed)
        }
    }

    #[test]
    fn n2_report() {
        let grid = param_grid(&[2, 3], &[1, 2]).unwrap();
        let r = estimate_stats(&cfg(2, 100, 5, 2), &grid).unwrap();
        assert_eq!(r.avg_genus.mean, 1.0);
        assert_eq!(r.avg_ratio.mean, 1.0);
        assert_eq!(r.avg_bound.mean, 1.0);
        assert_eq!(r.tail_fraction.mean, 0.0);
        assert!(r.complete);
    }

    #[test]
    fn determinism_across_workers() {
        let grid = param_grid(&[2, 3], &[1, 2]).unwrap();
        let a = estimate_stats(&cfg(500, 300, 42, 1), &grid).unwrap();
        let b = estimate_stats(&cfg(500, 300, 42, 4), &grid).unwrap();
        let c = estimate_stats(&cfg(500, 300, 42, 3), &grid).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = estimate_stats(&cfg(500, 300, 43, 3), &grid).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn bound_dominated_by_genus() {
        let grid = param_grid(&[2, 4], &[1, 3]).unwrap();
        let r = estimate_stats(&cfg(300, 200, 9, 2), &grid).unwrap();
        assert!(r.avg_bound.mean <= r.avg_genus.mean);
        assert!((0.0..=1.0).contains(&r.avg_ratio.mean));
        assert!(r.avg_ratio.std_error.unwrap() >= 0.0);
    }

    #[test]
    fn work_cap_flags_partial() {
        let grid = param_grid(&[2], &[1]).unwrap();
        let c = SamplerConfig {
            work_cap: 1000,
            ..cfg(100, 50, 1, 2)
        };
        let r = estimate_stats(&c, &grid).unwrap();
        assert!(!r.complete);
        assert_eq!(r.avg_ratio.samples, 10);
    }

    #[test]
    fn tail_estimates_match_exact() {
        let grid = param_grid(&[2], &[1]).unwrap();
        for n in [8u64, 12, 16] {
            let r = estimate_stats(&cfg(n, 200_000, 3, 4), &grid).unwrap();
            let exact = tail_fraction(n, &default_tail_threshold(), true)
                .unwrap()
                .value;
            let exact = exact.numer().to_f64().unwrap() / exact.denom().to_f64().unwrap();
            let se = r.tail_fraction.std_error.unwrap();
            assert!((r.tail_fraction.mean - exact).abs() <= 4.0 * se, "n = {n}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let grid = param_grid(&[2], &[1]).unwrap();
        assert!(matches!(
            estimate_stats(&cfg(1, 10, 0, 1), &grid),
            Err(SampleError::ComplexityTooSmall(1))
        ));
        assert!(estimate_stats(&cfg(10, 0, 0, 1), &grid).is_err());
        assert!(estimate_stats(&cfg(10, 10, 0, 1), &[]).is_err());
        assert!(theorem1_report(&[100], &cfg(10, 10, 0, 1), &grid).is_err());
        assert!(theorem1_report(&[100, 50], &cfg(10, 10, 0, 1), &grid).is_err());
    }

    #[test]
    fn alphabet_coding() {
        let a = Alphabet::new(2, 1).unwrap();
        assert_eq!(a.types, 16);
        for code in 0..a.types {
            assert_eq!(a.mirror(a.mirror(code)), code);
            assert_ne!(a.mirror(code), code);
            assert_eq!(a.negate_reverse(a.negate_reverse(code)), code);
        }
        // Independent check against KnotClass on every word.
        let value = |d: u64| if d < 2 { d as i64 - 2 } else { d as i64 - 1 };
        for s in 1..=2u64 {
            let a = Alphabet::new(2, s).unwrap();
            let mut amph = std::collections::BTreeSet::new();
            let mut all = std::collections::BTreeSet::new();
            for code in 0..a.types {
                let w = TwistWord::new(a.digits(code).into_iter().map(value).collect()).unwrap();
                let c = w.canonicalize();
                let class_word: Vec<u64> = a.digits(a.class(code));
                let cw = TwistWord::new(class_word.into_iter().map(value).collect()).unwrap();
                assert_eq!(cw.canonicalize(), c);
                if c.is_amphichiral() {
                    amph.insert(c.clone());
                }
                all.insert(c);
            }
            let (pairs, amphichiral) = class_structure(&a);
            assert_eq!(amphichiral as usize, amph.len());
            assert_eq!((2 * pairs + amphichiral) as usize, all.len());
        }
    }

    #[test]
    fn walk_degenerate_cases() {
        let base = WalkExperimentConfig {
            k: 1,
            s: 1,
            t: 0,
            trials: 5,
            seed: 1,
        };
        let r = walk_experiment(&base).unwrap();
        assert_eq!(r.mean_discrepancy, 0.0);
        assert_eq!(r.normalized, None);

        let r = walk_experiment(&WalkExperimentConfig {
            t: 1,
            trials: 1,
            ..base.clone()
        })
        .unwrap();
        assert!(r.mean_discrepancy <= 1.0);
        assert_eq!(r.std_error, None);

        assert!(walk_experiment(&WalkExperimentConfig {
            trials: 0,
            ..base.clone()
        })
        .is_err());
        assert!(walk_experiment(&WalkExperimentConfig {
            k: 1000,
            s: 10,
            ..base
        })
        .is_err());
    }

    /// Brute-force oracle: tally a two-cell walk directly from independent
    /// uniform draws, without the alphabet coding.
    fn brute_force_ratio(t: u64, trials: u64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = 0.0;
        for _ in 0..trials {
            // cells 0 and 1 are w and -w; 2 and 3 the other mirror pair
            let mut c = [0i64; 4];
            for _ in 0..t {
                c[rng.random_range(0..4usize)] += 1;
            }
            total += ((c[0] - c[1]).abs() + (c[2] - c[3]).abs()) as f64 / 2.0;
        }
        total / trials as f64 / (t as f64 / 4.0).sqrt()
    }

    #[test]
    fn walk_matches_clt_and_brute_force() {
        let target = (4.0 / std::f64::consts::PI).sqrt();
        let r = walk_experiment(&WalkExperimentConfig {
            k: 1,
            s: 1,
            t: 10_000,
            trials: 400,
            seed: 3,
        })
        .unwrap();
        let norm = r.normalized.unwrap();
        let brute = brute_force_ratio(10_000, 400, 99);
        assert!((norm - target).abs() < 0.05, "{norm}");
        assert!((brute - target).abs() < 0.05, "{brute}");
        // both distinct classes (1,-1) and (-1,1) are singletons, so the class
        // discrepancy has the same law
        assert_eq!((r.chiral_class_pairs, r.amphichiral_classes), (1, 1));
        assert!((r.class_mean_discrepancy / (10_000f64 / 4.0).sqrt() - target).abs() < 0.1);
    }

    #[test]
    fn walk_scaling() {
        let mut prev: Option<f64> = None;
        for t in [1_000u64, 10_000, 100_000] {
            let r = walk_experiment(&WalkExperimentConfig {
                k: 1,
                s: 1,
                t,
                trials: 200,
                seed: 8,
            })
            .unwrap();
            let norm = r.normalized.unwrap();
            assert!((0.9..=1.35).contains(&norm), "t = {t}: {norm}");
            if let Some(p) = prev {
                let growth = r.mean_discrepancy / p;
                assert!((growth - 10f64.sqrt()).abs() < 0.4, "{growth}");
            }
            prev = Some(r.mean_discrepancy);
        }
        let r = walk_experiment(&WalkExperimentConfig {
            k: 2,
            s: 1,
            t: 1600,
            trials: 200,
            seed: 8,
        })
        .unwrap();
        assert!((0.9..=1.35).contains(&r.normalized.unwrap()));
    }
}
