//! Result tables and plot data, computed purely from a results file.
//!
//! Each style renders a markdown table and a CSV file with the numbers behind it.
//! Seeds are averaged first. The `table4` style then macro-averages over
//! datasets, and `table5` summarizes each `table4` row. Cells with no successful record show
//! as `—`, with the recorded reason as a footnote.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::classifiers::Algorithm;
use crate::corpus::Source;
use crate::error::{Error, Result};
use crate::harness::results::{read_results, RunResult, Status};
use crate::metrics::{macro_over_datasets, mean_std_over_k, CellMetrics};
use crate::protocol::ShotCount;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Table3,
    Table4,
    Table5,
    Runtime,
}

impl ReportStyle {
    pub const ALL: [ReportStyle; 4] = [
        ReportStyle::Table3,
        ReportStyle::Table4,
        ReportStyle::Table5,
        ReportStyle::Runtime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportStyle::Table3 => "table3",
            ReportStyle::Table4 => "table4",
            ReportStyle::Table5 => "table5",
            ReportStyle::Runtime => "runtime",
        }
    }
}

impl fmt::Display for ReportStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportStyle::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown report style {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub style: ReportStyle,
    /// Markdown table with footnotes.
    pub text: String,
    /// CSV with a header row.
    pub plot_data: String,
}

pub fn report_file(path: &Path, style: ReportStyle) -> Result<Report> {
    report(&read_results(path)?, style)
}

pub fn report(results: &[RunResult], style: ReportStyle) -> Result<Report> {
    if results.is_empty() {
        return Err(Error::Empty("results file has no records"));
    }
    let cells = Cells::collect(results);
    match style {
        ReportStyle::Table3 => table3(&cells),
        ReportStyle::Table4 => table4(&cells),
        ReportStyle::Table5 => table5(&cells),
        ReportStyle::Runtime => runtime(&cells),
    }
}

/// Baselines print under their usual names; anything else verbatim.
pub fn display_model(name: &str) -> String {
    match name.parse::<Algorithm>() {
        Ok(a) => a.label().to_string(),
        Err(_) => name.to_string(),
    }
}

fn display_dataset(name: &str) -> String {
    match name.parse::<Source>() {
        Ok(Source::Ling) => "Ling".into(),
        Ok(Source::Sms) => "SMS".into(),
        Ok(Source::SpamAssassin) => "SpamAssassin".into(),
        Ok(Source::Enron) => "Enron".into(),
        Err(_) => name.to_string(),
    }
}

fn model_order(name: &str) -> (usize, String) {
    let rank = name
        .parse::<Algorithm>()
        .ok()
        .and_then(|a| Algorithm::ALL.iter().position(|&b| b == a))
        .unwrap_or(Algorithm::ALL.len());
    (rank, display_model(name))
}

fn dataset_order(name: &str) -> (usize, String) {
    let rank = name
        .parse::<Source>()
        .ok()
        .and_then(|s| Source::ALL.iter().position(|&t| t == s))
        .unwrap_or(Source::ALL.len());
    (rank, name.to_string())
}

/// Seed-averaged record for one (model, dataset, k).
#[derive(Debug, Clone, Default)]
struct Cell {
    sum: CellMetrics,
    ok: usize,
    seeds: BTreeSet<u64>,
    reasons: Vec<String>,
}

impl Cell {
    fn mean(&self) -> Option<CellMetrics> {
        (self.ok > 0).then(|| {
            let n = self.ok as f64;
            CellMetrics {
                f1: self.sum.f1 / n,
                precision: self.sum.precision / n,
                recall: self.sum.recall / n,
                train_time_s: self.sum.train_time_s / n,
                infer_time_s: self.sum.infer_time_s / n,
            }
        })
    }

    fn reason(&self) -> String {
        if self.reasons.is_empty() {
            "no result".into()
        } else {
            let mut r = self.reasons.clone();
            r.dedup();
            r.join("; ")
        }
    }
}

struct Cells {
    by_key: BTreeMap<(String, String, ShotCount), Cell>,
    models: Vec<String>,
    datasets: Vec<String>,
    ks: Vec<ShotCount>,
}

impl Cells {
    fn collect(results: &[RunResult]) -> Self {
        let mut by_key: BTreeMap<(String, String, ShotCount), Cell> = BTreeMap::new();
        for r in results {
            let cell = by_key
                .entry((r.model.clone(), r.dataset.clone(), r.k))
                .or_default();
            cell.seeds.insert(r.seed);
            match r.status {
                Status::Ok => {
                    let m = &r.metrics;
                    cell.ok += 1;
                    cell.sum.f1 += m.f1;
                    cell.sum.precision += m.precision;
                    cell.sum.recall += m.recall;
                    cell.sum.train_time_s += m.train_time_s;
                    cell.sum.infer_time_s += m.infer_time_s;
                }
                Status::Failed | Status::Excluded => cell.reasons.push(r.notes.clone()),
            }
        }
        let mut models: Vec<String> = by_key
            .keys()
            .map(|k| k.0.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        models.sort_by_key(|m| model_order(m));
        let mut datasets: Vec<String> = by_key
            .keys()
            .map(|k| k.1.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        datasets.sort_by_key(|d| dataset_order(d));
        let ks: Vec<ShotCount> = by_key
            .keys()
            .map(|k| k.2)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Cells {
            by_key,
            models,
            datasets,
            ks,
        }
    }

    fn get(&self, model: &str, dataset: &str, k: ShotCount) -> Option<&Cell> {
        self.by_key
            .get(&(model.to_string(), dataset.to_string(), k))
    }

    fn seed_label(&self, k_filter: impl Fn(ShotCount) -> bool) -> String {
        let counts: BTreeSet<usize> = self
            .by_key
            .iter()
            .filter(|(key, _)| k_filter(key.2))
            .map(|(_, c)| c.seeds.len())
            .collect();
        match (counts.first(), counts.last()) {
            (Some(a), Some(b)) if a == b && *a == 1 => "1 seed".into(),
            (Some(a), Some(b)) if a == b => format!("mean over {a} seeds"),
            (Some(a), Some(b)) => format!("mean over {a} to {b} seeds"),
            _ => "no seeds".into(),
        }
    }

    /// Macro F1 over datasets for one (model, k), with the excluded datasets.
    fn macro_f1(&self, model: &str, k: ShotCount) -> Option<(f64, Vec<String>, usize)> {
        let means: Vec<(String, Option<CellMetrics>)> = self
            .datasets
            .iter()
            .map(|d| (d.clone(), self.get(model, d, k).and_then(Cell::mean)))
            .collect();
        let avg = macro_over_datasets(means.iter().map(|(d, m)| (d.as_str(), m.as_ref()))).ok()?;
        Some((avg.metrics.f1, avg.excluded, avg.included.len()))
    }
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Validation(format!("writing plot data: {e}"));
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(&r).map_err(to_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("writing plot data: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn markdown_row(cells: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from("|");
    for c in cells {
        s.push(' ');
        s.push_str(&c);
        s.push_str(" |");
    }
    s.push('\n');
    s
}

fn separator(n: usize) -> String {
    markdown_row(std::iter::repeat_n("---".to_string(), n))
}

fn footnotes(text: &mut String, notes: &[String]) {
    if !notes.is_empty() {
        text.push('\n');
        for n in notes {
            let _ = writeln!(text, "† {n}");
        }
    }
}

fn table3(cells: &Cells) -> Result<Report> {
    let full = ShotCount::Full;
    if !cells.ks.contains(&full) {
        return Err(Error::Validation("no full-train results for table3".into()));
    }
    type Field = (&'static str, fn(&CellMetrics) -> f64);
    const FIELDS: [Field; 3] = [
        ("F1", |m| m.f1),
        ("P", |m| m.precision),
        ("R", |m| m.recall),
    ];
    let round2 = |v: f64| (v * 100.0).round() as i64;

    let mut best: BTreeMap<(String, usize), i64> = BTreeMap::new();
    for d in &cells.datasets {
        for (fi, (_, f)) in FIELDS.iter().enumerate() {
            let top = cells
                .models
                .iter()
                .filter_map(|m| cells.get(m, d, full).and_then(Cell::mean))
                .map(|c| round2(f(&c)))
                .max();
            if let Some(t) = top {
                best.insert((d.clone(), fi), t);
            }
        }
    }

    let mut text = format!(
        "Full training split, {}.\n\n",
        cells.seed_label(|k| k.is_full())
    );
    let mut header = vec!["Model".to_string()];
    for d in &cells.datasets {
        for (name, _) in FIELDS {
            header.push(format!("{} {name}", display_dataset(d)));
        }
    }
    text.push_str(&markdown_row(header.clone()));
    text.push_str(&separator(header.len()));

    let mut notes = Vec::new();
    let mut plot = Vec::new();
    for m in &cells.models {
        let mut row = vec![display_model(m)];
        for d in &cells.datasets {
            let cell = cells.get(m, d, full);
            match cell.and_then(Cell::mean) {
                Some(c) => {
                    for (fi, (_, f)) in FIELDS.iter().enumerate() {
                        let v = f(&c);
                        let s = format!("{v:.2}");
                        row.push(if best.get(&(d.clone(), fi)) == Some(&round2(v)) {
                            format!("**{s}**")
                        } else {
                            s
                        });
                    }
                    plot.push(vec![
                        m.clone(),
                        d.clone(),
                        c.f1.to_string(),
                        c.precision.to_string(),
                        c.recall.to_string(),
                        cell.map_or(0, |c| c.ok).to_string(),
                        "ok".into(),
                    ]);
                }
                None => {
                    let reason = cell.map_or_else(|| "no result".to_string(), Cell::reason);
                    row.push("—†".into());
                    row.push("—".into());
                    row.push("—".into());
                    notes.push(format!(
                        "{} on {}: {reason}",
                        display_model(m),
                        display_dataset(d)
                    ));
                    plot.push(vec![
                        m.clone(),
                        d.clone(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "0".into(),
                        "excluded".into(),
                    ]);
                }
            }
        }
        text.push_str(&markdown_row(row));
    }
    footnotes(&mut text, &notes);
    Ok(Report {
        style: ReportStyle::Table3,
        text,
        plot_data: csv_string(
            &[
                "model",
                "dataset",
                "f1",
                "precision",
                "recall",
                "n_seeds",
                "status",
            ],
            plot,
        )?,
    })
}

fn table4(cells: &Cells) -> Result<Report> {
    let mut text = format!(
        "Macro-averaged F1 over {} dataset(s), {}.\n\n",
        cells.datasets.len(),
        cells.seed_label(|_| true)
    );
    let mut header = vec!["Model".to_string()];
    header.extend(cells.ks.iter().map(|k| format!("k={k}")));
    text.push_str(&markdown_row(header.clone()));
    text.push_str(&separator(header.len()));

    let mut notes = Vec::new();
    let mut plot = Vec::new();
    for m in &cells.models {
        let mut row = vec![display_model(m)];
        for &k in &cells.ks {
            match cells.macro_f1(m, k) {
                Some((f1, excluded, n)) => {
                    let mut s = format!("{f1:.3}");
                    if !excluded.is_empty() {
                        s.push('†');
                        notes.push(format!(
                            "{} at k={k}: averaged over {n} dataset(s), without {}",
                            display_model(m),
                            excluded
                                .iter()
                                .map(|d| display_dataset(d))
                                .collect::<Vec<_>>()
                                .join(", ")
                        ));
                    }
                    row.push(s);
                    plot.push(vec![
                        m.clone(),
                        k.to_string(),
                        f1.to_string(),
                        n.to_string(),
                    ]);
                }
                None => {
                    row.push("—".into());
                    plot.push(vec![m.clone(), k.to_string(), String::new(), "0".into()]);
                }
            }
        }
        text.push_str(&markdown_row(row));
    }
    footnotes(&mut text, &notes);
    Ok(Report {
        style: ReportStyle::Table4,
        text,
        plot_data: csv_string(&["model", "k", "macro_f1", "n_datasets"], plot)?,
    })
}

fn table5(cells: &Cells) -> Result<Report> {
    let mut text = format!(
        "Mean and standard deviation (n - 1) of macro F1 across k, {}.\n\n",
        cells.seed_label(|_| true)
    );
    text.push_str(&markdown_row(["Model".to_string(), "F1".to_string()]));
    text.push_str(&separator(2));
    let mut notes = Vec::new();
    let mut plot = Vec::new();
    for m in &cells.models {
        let row: BTreeMap<ShotCount, f64> = ShotCount::DEFAULT_GRID
            .iter()
            .filter_map(|&k| cells.macro_f1(m, k).map(|(f1, _, _)| (k, f1)))
            .collect();
        match mean_std_over_k(&row) {
            Ok((mean, std)) => {
                text.push_str(&markdown_row([
                    display_model(m),
                    format!("{mean:.4} ± {std:.4}"),
                ]));
                plot.push(vec![m.clone(), mean.to_string(), std.to_string()]);
            }
            Err(e) => {
                text.push_str(&markdown_row([display_model(m), "—†".to_string()]));
                notes.push(format!("{}: {e}", display_model(m)));
                plot.push(vec![m.clone(), String::new(), String::new()]);
            }
        }
    }
    footnotes(&mut text, &notes);
    Ok(Report {
        style: ReportStyle::Table5,
        text,
        plot_data: csv_string(&["model", "mean_f1", "std_f1"], plot)?,
    })
}

fn runtime(cells: &Cells) -> Result<Report> {
    let mut text = format!(
        "Train / inference wall time in seconds, averaged over datasets, {}.\n\n",
        cells.seed_label(|_| true)
    );
    let mut header = vec!["Model".to_string()];
    header.extend(cells.ks.iter().map(|k| format!("k={k}")));
    text.push_str(&markdown_row(header.clone()));
    text.push_str(&separator(header.len()));
    let mut plot = Vec::new();
    for m in &cells.models {
        let mut row = vec![display_model(m)];
        for &k in &cells.ks {
            let means: Vec<CellMetrics> = cells
                .datasets
                .iter()
                .filter_map(|d| cells.get(m, d, k).and_then(Cell::mean))
                .collect();
            if means.is_empty() {
                row.push("—".into());
                continue;
            }
            let n = means.len() as f64;
            let train = means.iter().map(|c| c.train_time_s).sum::<f64>() / n;
            let infer = means.iter().map(|c| c.infer_time_s).sum::<f64>() / n;
            row.push(format!("{train:.3} / {infer:.3}"));
            plot.push(vec![
                m.clone(),
                k.to_string(),
                train.to_string(),
                infer.to_string(),
            ]);
        }
        text.push_str(&markdown_row(row));
    }
    Ok(Report {
        style: ReportStyle::Runtime,
        text,
        plot_data: csv_string(&["model", "k", "train_time_s", "infer_time_s"], plot)?,
    })
}
