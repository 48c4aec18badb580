use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use twobridge::cobordism::{BoundSummary, CobordismTrace, ReplayReport};
use twobridge::montecarlo::{TrendReport, WalkReport};
use twobridge::partition::WordIter;
use twobridge::report::{format_grid, format_params, sweep_rows, write_csv, ExactRow, WalkRow};
use twobridge::{KnotClass, TwistWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Buffers one command's output so that header notes and the body go out
/// together.
pub struct Output {
    format: Format,
    notes: Vec<String>,
    body: String,
    json: Option<Value>,
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    write_csv(rows)
}

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(headers.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn key_values(pairs: &[(&str, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn se(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
}

impl Output {
    pub fn new(format: Format) -> Self {
        Output {
            format,
            notes: Vec::new(),
            body: String::new(),
            json: None,
        }
    }

    pub fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    pub fn exact(&mut self, rows: &[ExactRow]) -> Result<(), csv::Error> {
        match self.format {
            Format::Csv => self.body = csv_text(rows)?,
            Format::Json => self.json = Some(json!({ "rows": rows })),
            Format::Table => {
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            format!("{}/{}", r.avg_genus_num, r.avg_genus_den),
                            r.ratio_decimal.clone(),
                            format!("{}/{}", r.tail_num, r.tail_den),
                        ]
                    })
                    .collect();
                if let Some(r) = rows.first() {
                    self.note(format!(
                        "mode {}, {}",
                        r.mode,
                        if r.signed { "signed" } else { "unsigned" }
                    ));
                }
                self.body = table(&["n", "<g>_n", "<g>_n/n", "tail(m<=n/8)"], &cells);
            }
        }
        Ok(())
    }

    pub fn bound(
        &mut self,
        w: &TwistWord,
        best: &BoundSummary,
        trace: &CobordismTrace,
        grid_size: usize,
        with_trace: bool,
    ) -> Result<(), csv::Error> {
        let n = w.complexity();
        let (c_lo, c_hi) = w.crossing_bounds();
        match self.format {
            Format::Csv => {
                #[derive(Serialize)]
                struct Row<'a> {
                    word: String,
                    n: u64,
                    m: u64,
                    crossings_min: u64,
                    crossings_max: u64,
                    k: u64,
                    s: u64,
                    bound: u64,
                    total_cost: u64,
                    removed_pairs: u64,
                    splits: u64,
                    cancelled_pairs: u64,
                    residual_cost: u64,
                    asymptotic_regime: bool,
                    ribbon: &'a str,
                }
                let ribbon = trace.final_sum.to_string();
                self.body = csv_text(&[Row {
                    word: w.to_string(),
                    n,
                    m: w.seifert_genus(),
                    crossings_min: c_lo,
                    crossings_max: c_hi,
                    k: best.params.k,
                    s: best.params.s,
                    bound: best.bound(),
                    total_cost: best.total_cost(),
                    removed_pairs: best.removed_pairs,
                    splits: best.splits,
                    cancelled_pairs: best.cancelled_pairs,
                    residual_cost: best.residual_cost,
                    asymptotic_regime: best.params.in_asymptotic_regime(n),
                    ribbon: &ribbon,
                }])?;
                if with_trace {
                    self.body.push('\n');
                    self.body.push_str(&trace.to_string());
                }
            }
            Format::Json => {
                let mut v = json!({
                    "word": w,
                    "n": n,
                    "m": w.seifert_genus(),
                    "crossings": [c_lo, c_hi],
                    "params": best.params,
                    "grid_points": grid_size,
                    "bound": best.bound(),
                    "total_cost": best.total_cost(),
                    "removed_pairs": best.removed_pairs,
                    "splits": best.splits,
                    "cancelled_pairs": best.cancelled_pairs,
                    "residual_cost": best.residual_cost,
                    "asymptotic_regime": best.params.in_asymptotic_regime(n),
                });
                if with_trace {
                    v["trace"] = serde_json::to_value(trace).expect("trace serializes");
                }
                self.json = Some(v);
            }
            Format::Table => {
                let mut pairs = vec![
                    ("word", w.to_string()),
                    ("n", n.to_string()),
                    ("m (genus)", w.seifert_genus().to_string()),
                    ("crossings", format!("{c_lo}..={c_hi}")),
                    ("params", best.params.to_string()),
                    ("g4 bound", best.bound().to_string()),
                    ("pipeline cost", best.total_cost().to_string()),
                    ("large pairs", best.removed_pairs.to_string()),
                    ("splits", best.splits.to_string()),
                    ("mirror pairs", best.cancelled_pairs.to_string()),
                    ("residual cost", best.residual_cost.to_string()),
                ];
                if grid_size > 1 {
                    pairs.push(("grid points", grid_size.to_string()));
                }
                if !best.params.in_asymptotic_regime(n) {
                    pairs.push((
                        "note",
                        "n is small for these parameters; bound may equal m".into(),
                    ));
                }
                self.body = key_values(&pairs);
                if with_trace {
                    self.body.push('\n');
                    self.body.push_str(&trace.to_string());
                }
            }
        }
        Ok(())
    }

    pub fn sweep(&mut self, report: &TrendReport) -> Result<(), csv::Error> {
        let rows = sweep_rows(report);
        match self.format {
            Format::Csv => self.body = csv_text(&rows)?,
            Format::Json => {
                self.json = Some(json!({
                    "seed": report.master_seed,
                    "grid": format_grid(&report.grid),
                    "rows": rows,
                }))
            }
            Format::Table => {
                self.note(format!(
                    "seed {}, grid {}",
                    report.master_seed,
                    format_grid(&report.grid)
                ));
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            format!("{}{}", r.samples, if r.complete { "" } else { "*" }),
                            format!("{:.4}", r.avg_ratio),
                            se(r.se_ratio),
                            format!("{:.4}", r.avg_bound_over_n),
                            format!("{:.4}", r.eight_avg_bound_over_n),
                            format!("{:.4}", r.tail_fraction),
                            r.best_params.clone(),
                        ]
                    })
                    .collect();
                self.body = table(
                    &[
                        "n", "samples", "<g4/g>", "se", "<g4>/n", "8<g4>/n", "tail", "best k:s",
                    ],
                    &cells,
                );
                if rows.iter().any(|r| !r.complete) {
                    self.body.push_str("* stopped at the work cap\n");
                }
            }
        }
        Ok(())
    }

    pub fn walk(&mut self, report: &WalkReport) -> Result<(), csv::Error> {
        let row = WalkRow::from(report);
        match self.format {
            Format::Csv => self.body = csv_text(&[row])?,
            Format::Json => {
                self.json = Some(serde_json::to_value(&row).expect("walk row serializes"))
            }
            Format::Table => {
                let c = &report.config;
                let mut pairs = vec![
                    ("k, s, t", format!("{}, {}, {}", c.k, c.s, c.t)),
                    ("trials", c.trials.to_string()),
                    ("seed", c.seed.to_string()),
                    ("types", report.types.to_string()),
                    ("expected count", format!("{:.4}", report.expected_count)),
                    (
                        "mean |a(w)-a(-w)|",
                        format!("{:.4}", report.mean_discrepancy),
                    ),
                    ("std error", se(report.std_error)),
                    (
                        "normalized",
                        report
                            .normalized
                            .map_or_else(|| "n/a".into(), |v| format!("{v:.4}")),
                    ),
                    (
                        "class discrepancy",
                        format!("{:.4}", report.class_mean_discrepancy),
                    ),
                    ("chiral class pairs", report.chiral_class_pairs.to_string()),
                    (
                        "amphichiral classes",
                        report.amphichiral_classes.to_string(),
                    ),
                    (
                        "amphichiral summands",
                        format!("{:.4}", report.mean_amphichiral_summands),
                    ),
                ];
                if report.std_error.is_none() {
                    pairs.push(("note", "standard error needs at least 2 trials".into()));
                }
                self.body = key_values(&pairs);
            }
        }
        Ok(())
    }

    pub fn words(&mut self, words: WordIter) -> Result<(), csv::Error> {
        #[derive(Serialize)]
        struct Row {
            word: String,
            m: u64,
            class: String,
            amphichiral: bool,
        }
        let rows: Vec<Row> = words
            .map(|w| {
                let class = KnotClass::from(w.clone());
                Row {
                    word: w.to_string(),
                    m: w.seifert_genus(),
                    amphichiral: class.is_amphichiral(),
                    class: class.to_string(),
                }
            })
            .collect();
        match self.format {
            Format::Csv => self.body = csv_text(&rows)?,
            Format::Json => self.json = Some(json!({ "count": rows.len(), "words": rows })),
            Format::Table => {
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.word.clone(),
                            r.m.to_string(),
                            r.class.clone(),
                            r.amphichiral.to_string(),
                        ]
                    })
                    .collect();
                self.body = table(&["word", "m", "class", "amphichiral"], &cells);
                let _ = writeln!(self.body, "{} words", rows.len());
            }
        }
        Ok(())
    }

    pub fn replay(
        &mut self,
        trace: &CobordismTrace,
        report: &ReplayReport,
    ) -> Result<(), csv::Error> {
        #[derive(Serialize)]
        struct Row {
            word: String,
            k: u64,
            s: u64,
            steps_checked: usize,
            total_cost: u64,
            bound: u64,
            valid: bool,
        }
        let row = Row {
            word: trace.initial_word.to_string(),
            k: trace.params.k,
            s: trace.params.s,
            steps_checked: report.steps_checked,
            total_cost: report.total_cost,
            bound: report.bound,
            valid: true,
        };
        match self.format {
            Format::Csv => self.body = csv_text(&[row])?,
            Format::Json => self.json = Some(serde_json::to_value(&row).expect("row serializes")),
            Format::Table => {
                self.body = key_values(&[
                    ("word", row.word),
                    ("params", format_params(&trace.params)),
                    ("steps checked", row.steps_checked.to_string()),
                    ("total cost", row.total_cost.to_string()),
                    ("bound", row.bound.to_string()),
                    ("valid", "yes".into()),
                ])
            }
        }
        Ok(())
    }

    /// Writes everything to `path` or stdout. CSV stays a single table, so its
    /// notes go to stderr.
    pub fn finish(self, path: Option<&Path>, env_workers: Option<usize>) -> std::io::Result<()> {
        let text = match self.format {
            Format::Json => match self.json {
                None => return Ok(()),
                Some(mut v) => {
                    if let (Some(w), Some(obj)) = (env_workers, v.as_object_mut()) {
                        obj.insert("workers".into(), json!(w));
                        obj.insert("workers_source".into(), json!("env"));
                    }
                    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
                }
            },
            Format::Csv => {
                for n in &self.notes {
                    eprintln!("# {n}");
                }
                self.body
            }
            Format::Table => {
                if self.body.is_empty() {
                    return Ok(());
                }
                let mut t: String = self.notes.iter().map(|n| format!("# {n}\n")).collect();
                t.push_str(&self.body);
                t
            }
        };
        if text.is_empty() {
            return Ok(());
        }
        match path {
            Some(p) => std::fs::write(p, text),
            None => {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()
            }
        }
    }
}
