//! Flat records for CSV and JSON output.
//!
//! Exact values are split into numerator and denominator columns. Floats are
//! written in shortest round-trip form, so parsing a CSV and writing it again
//! reproduces the same bytes.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cobordism::BoundParams;
use crate::error::StatsError;
use crate::montecarlo::{TrendReport, WalkReport};
use crate::partition::{
    avg_genus_exact, decimal_string, default_tail_threshold, tail_fraction, AverageMode,
};

/// Digits after the point in `ratio_decimal`.
pub const RATIO_DIGITS: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRow {
    pub n: u64,
    pub mode: AverageMode,
    pub signed: bool,
    pub avg_genus_num: String,
    pub avg_genus_den: String,
    /// `<g>_n / n`, rounded to [`RATIO_DIGITS`] places.
    pub ratio_decimal: String,
    pub tail_num: String,
    pub tail_den: String,
}

impl ExactRow {
    pub fn avg_genus(&self) -> BigRational {
        parse_ratio(&self.avg_genus_num, &self.avg_genus_den)
    }

    pub fn ratio(&self) -> BigRational {
        self.avg_genus() / BigInt::from(self.n)
    }

    pub fn tail(&self) -> BigRational {
        parse_ratio(&self.tail_num, &self.tail_den)
    }
}

fn parse_ratio(num: &str, den: &str) -> BigRational {
    BigRational::new(
        num.parse().expect("numerator"),
        den.parse().expect("denominator"),
    )
}

/// One row per `n` in `2 ..= n_max`: exact `<g>_n`, its ratio to `n`, and
/// the `m <= n/8` tail fraction.
pub fn exact_rows(
    n_max: u64,
    signed: bool,
    mode: AverageMode,
    cap: u64,
) -> Result<Vec<ExactRow>, StatsError> {
    if n_max < 2 {
        return Err(StatsError::ComplexityTooSmall(n_max));
    }
    let threshold = default_tail_threshold();
    (2..=n_max)
        .map(|n| {
            let avg = avg_genus_exact(n, signed, mode, cap)?.value;
            let tail = tail_fraction(n, &threshold, signed)?.value;
            Ok(ExactRow {
                n,
                mode,
                signed,
                avg_genus_num: avg.numer().to_string(),
                avg_genus_den: avg.denom().to_string(),
                ratio_decimal: decimal_string(&(&avg / BigInt::from(n)), RATIO_DIGITS),
                tail_num: tail.numer().to_string(),
                tail_den: tail.denom().to_string(),
            })
        })
        .collect()
}

/// `k:s`, e.g. `3:2`.
pub fn format_params(p: &BoundParams) -> String {
    format!("{}:{}", p.k, p.s)
}

/// Space-separated [`format_params`] entries.
pub fn format_grid(grid: &[BoundParams]) -> String {
    grid.iter().map(format_params).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub avg_ratio: f64,
    pub se_ratio: Option<f64>,
    pub avg_bound_over_n: f64,
    pub eight_avg_bound_over_n: f64,
    pub tail_fraction: f64,
    pub best_params: String,
    pub se_tail: Option<f64>,
    pub avg_genus: f64,
    pub se_genus: Option<f64>,
    pub avg_bound: f64,
    pub se_bound: Option<f64>,
    pub samples: u64,
    pub requested_samples: u64,
    pub complete: bool,
    pub seed: u64,
    pub grid: String,
}

pub fn sweep_rows(report: &TrendReport) -> Vec<SweepRow> {
    report
        .rows
        .iter()
        .zip(&report.reports)
        .map(|(row, r)| SweepRow {
            n: row.n,
            avg_ratio: row.avg_ratio,
            se_ratio: row.se_ratio,
            avg_bound_over_n: row.avg_bound_over_n,
            eight_avg_bound_over_n: row.eight_avg_bound_over_n,
            tail_fraction: row.tail_fraction,
            best_params: format_params(&row.best_params),
            se_tail: r.tail_fraction.std_error,
            avg_genus: r.avg_genus.mean,
            se_genus: r.avg_genus.std_error,
            avg_bound: r.avg_bound.mean,
            se_bound: r.avg_bound.std_error,
            samples: row.samples,
            requested_samples: r.requested_samples,
            complete: row.complete,
            seed: r.master_seed,
            grid: format_grid(&r.grid),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRow {
    pub k: u64,
    pub s: u64,
    pub t: u64,
    pub trials: u64,
    pub seed: u64,
    pub types: u64,
    pub expected_count: f64,
    pub mean_discrepancy: f64,
    pub std_error: Option<f64>,
    pub normalized: Option<f64>,
    pub class_mean_discrepancy: f64,
    pub chiral_class_pairs: u64,
    pub amphichiral_classes: u64,
    pub mean_amphichiral_summands: f64,
}

impl From<&WalkReport> for WalkRow {
    fn from(r: &WalkReport) -> Self {
        WalkRow {
            k: r.config.k,
            s: r.config.s,
            t: r.config.t,
            trials: r.config.trials,
            seed: r.config.seed,
            types: r.types,
            expected_count: r.expected_count,
            mean_discrepancy: r.mean_discrepancy,
            std_error: r.std_error,
            normalized: r.normalized,
            class_mean_discrepancy: r.class_mean_discrepancy,
            chiral_class_pairs: r.chiral_class_pairs,
            amphichiral_classes: r.amphichiral_classes,
            mean_amphichiral_summands: r.mean_amphichiral_summands,
        }
    }
}

pub fn write_csv<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
