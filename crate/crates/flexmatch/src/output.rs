//! Tabular sweep results and their CSV form.
//!
//! Column order is: the label columns, the x column, then `mean`,
//! `std_dev`, `std_err`, `trials`, then any extra numeric columns. Floats
//! are written with 9 significant digits; an absent extra value is an empty
//! field.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub labels: Vec<String>,
    pub x: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
    pub trials: usize,
    pub extra: Vec<Option<f64>>,
}

impl SweepRow {
    /// Row summarizing `samples`.
    pub fn from_samples(labels: Vec<String>, x: f64, samples: &[f64], extra: Vec<Option<f64>>) -> Self {
        Self {
            labels,
            x,
            mean: stats::mean(samples),
            std_dev: stats::std_dev(samples),
            std_err: stats::std_err(samples),
            trials: samples.len(),
            extra,
        }
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub label_columns: Vec<String>,
    pub x_column: String,
    pub extra_columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn new(label_columns: &[&str], x_column: &str, extra_columns: &[&str]) -> Self {
        Self {
            label_columns: label_columns.iter().map(|s| s.to_string()).collect(),
            x_column: x_column.to_string(),
            extra_columns: extra_columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.label_columns.clone();
        h.push(self.x_column.clone());
        h.extend(["mean", "std_dev", "std_err", "trials"].map(String::from));
        h.extend(self.extra_columns.iter().cloned());
        h
    }

    pub fn push(&mut self, row: SweepRow) {
        assert_eq!(row.labels.len(), self.label_columns.len(), "label count");
        assert_eq!(row.extra.len(), self.extra_columns.len(), "extra column count");
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: SweepResult) {
        assert_eq!(self.header(), other.header(), "cannot merge results with different schemas");
        self.rows.extend(other.rows);
    }

    pub fn extra_index(&self, name: &str) -> Option<usize> {
        self.extra_columns.iter().position(|c| c == name)
    }

    /// Rows whose label columns equal `labels`, in order.
    pub fn series<'a>(&'a self, labels: &'a [&str]) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.labels.iter().map(String::as_str).eq(labels.iter().copied()))
    }

    pub fn to_csv_bytes(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec = row.labels.clone();
            rec.push(fmt_float(row.x));
            rec.push(fmt_float(row.mean));
            rec.push(fmt_float(row.std_dev));
            rec.push(fmt_float(row.std_err));
            rec.push(row.trials.to_string());
            rec.extend(row.extra.iter().map(|v| v.map(fmt_float).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| anyhow!("flushing CSV buffer: {e}"))
    }

    pub fn from_csv_bytes(bytes: &[u8]) -> anyhow::Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let mean_at = header.iter().position(|h| h == "mean").context("no `mean` column")?;
        if mean_at == 0 || header.len() < mean_at + 4 {
            bail!("header {header:?} does not follow the sweep layout");
        }
        let mut out = SweepResult {
            label_columns: header[..mean_at - 1].to_vec(),
            x_column: header[mean_at - 1].clone(),
            extra_columns: header[mean_at + 4..].to_vec(),
            rows: Vec::new(),
        };
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> anyhow::Result<f64> {
                rec[i].parse().with_context(|| format!("row {}, column {}", line + 1, header[i]))
            };
            out.rows.push(SweepRow {
                labels: (0..mean_at - 1).map(|i| rec[i].to_string()).collect(),
                x: num(mean_at - 1)?,
                mean: num(mean_at)?,
                std_dev: num(mean_at + 1)?,
                std_err: num(mean_at + 2)?,
                trials: rec[mean_at + 3].parse().with_context(|| format!("row {}, trials", line + 1))?,
                extra: (mean_at + 4..header.len())
                    .map(|i| if rec[i].is_empty() { Ok(None) } else { num(i).map(Some) })
                    .collect::<anyhow::Result<_>>()?,
            });
        }
        Ok(out)
    }
}

/// Shortest decimal form of `v` rounded to 9 significant digits.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn write_csv(result: &SweepResult, path: &Path) -> anyhow::Result<()> {
    let bytes = result.to_csv_bytes()?;
    write_bytes(path, &bytes)
}

pub fn read_csv(path: &Path) -> anyhow::Result<SweepResult> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    SweepResult::from_csv_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
