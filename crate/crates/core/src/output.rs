//! Run bundles on disk: per-path CSV, JSON summary, manifest and text
//! tables, plus the cross-run report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::RunManifest;
use crate::engine::{PathResult, RunSummary, SweepPoint};
use crate::error::ConfigError;

pub const PATHS_FILE: &str = "paths.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Flat per-path row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub path: usize,
    pub x: f64,
    pub planned_x: f64,
    pub cyclicity: f64,
    pub projects_t1: f64,
    pub projects_t2: f64,
    pub output_proxy: f64,
    pub price_t1: f64,
    pub price_t2: f64,
    pub psi_t1: f64,
    pub psi_t2: f64,
    pub regime_t1: &'static str,
    pub regime_t2: &'static str,
    pub action_t1: &'static str,
    pub action_t2: &'static str,
    pub liquidation: f64,
    pub units_sold_t1: f64,
    pub units_sold_t2: f64,
    pub units_bought: f64,
    pub cds_sold: f64,
    pub cds_bought: f64,
    pub hedged_loans: f64,
    pub fee_income: f64,
    pub dividends: f64,
    pub bonuses: f64,
    pub retained: f64,
    pub settlement_pnl: f64,
    pub e3: f64,
    pub negative_price: bool,
    pub full_wipeout: bool,
    pub insolvent: bool,
    pub reconciliation_residual: f64,
}

impl PathRecord {
    pub fn new(index: usize, p: &PathResult) -> Self {
        let action = |t: u8| p.primary_action(t).map(|a| a.as_str()).unwrap_or("none");
        Self {
            path: index,
            x: p.x,
            planned_x: p.planned_x,
            cyclicity: p.cyclicity,
            projects_t1: p.projects[0],
            projects_t2: p.projects[1],
            output_proxy: p.output_proxy,
            price_t1: p.prices[0],
            price_t2: p.prices[1],
            psi_t1: p.psi[0],
            psi_t2: p.psi[1],
            regime_t1: p.regimes[0].as_str(),
            regime_t2: p.regimes[1].as_str(),
            action_t1: action(1),
            action_t2: action(2),
            liquidation: p.liquidation,
            units_sold_t1: p.units_sold[0],
            units_sold_t2: p.units_sold[1],
            units_bought: p.units_bought,
            cds_sold: p.cds_sold,
            cds_bought: p.cds_bought,
            hedged_loans: p.hedged_loans,
            fee_income: p.fee_income,
            dividends: p.dividends,
            bonuses: p.bonuses,
            retained: p.retained,
            settlement_pnl: p.settlement_pnl,
            e3: p.e3,
            negative_price: p.flags.negative_price,
            full_wipeout: p.flags.full_wipeout,
            insolvent: p.flags.insolvent,
            reconciliation_residual: p.reconciliation_residual,
        }
    }
}

pub fn write_paths_csv<W: Write>(out: W, paths: &[PathResult]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    for (i, p) in paths.iter().enumerate() {
        w.serialize(PathRecord::new(i, p))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Numeric columns right-aligned, text columns and the first column left-aligned.
pub fn render_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let numeric: Vec<bool> = (0..headers.len())
        .map(|i| {
            i > 0
                && rows
                    .iter()
                    .all(|r| r.get(i).is_none_or(|c| c.parse::<f64>().is_ok()))
        })
        .collect();
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if numeric[i] {
                    format!("{c:>w$}")
                } else {
                    format!("{c:<w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(headers);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

pub fn summary_table(label: &str, summary: &RunSummary) -> String {
    let headers: Vec<String> = ["metric", "mean", "std", "q05", "q50", "q95"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = summary
        .metrics
        .iter()
        .map(|m| {
            vec![
                m.name.clone(),
                num(m.stats.mean),
                num(m.stats.std),
                num(m.stats.q05),
                num(m.stats.q50),
                num(m.stats.q95),
            ]
        })
        .collect();
    let f = &summary.flag_rates;
    format!(
        "{label}: {} paths, seed {}\n\n{}\nflag rates: negative_price {} full_wipeout {} insolvent {}\n",
        summary.n_paths,
        summary.seed,
        render_table(&headers, &rows),
        num(f.negative_price),
        num(f.full_wipeout),
        num(f.insolvent),
    )
}

pub fn bundle_dir_name(manifest: &RunManifest) -> String {
    format!(
        "{}-seed{}-paths{}",
        manifest.label, manifest.seed, manifest.paths
    )
}

/// Writes a bundle under `out`; returns its directory.
pub fn write_bundle(
    out: &Path,
    manifest: &RunManifest,
    paths: &[PathResult],
    summary: &RunSummary,
) -> Result<PathBuf, OutputError> {
    let dir = out.join(bundle_dir_name(manifest));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let p = dir.join(PATHS_FILE);
    let file = fs::File::create(&p).map_err(io_err(&p))?;
    write_paths_csv(std::io::BufWriter::new(file), paths)?;

    let p = dir.join(SUMMARY_JSON);
    let mut json = serde_json::to_string_pretty(summary)?;
    json.push('\n');
    fs::write(&p, json).map_err(io_err(&p))?;

    let p = dir.join(MANIFEST_FILE);
    fs::write(&p, manifest.emit()).map_err(io_err(&p))?;

    let p = dir.join(SUMMARY_TXT);
    fs::write(&p, summary_table(&manifest.label, summary)).map_err(io_err(&p))?;
    Ok(dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub summary: RunSummary,
}

pub fn read_bundle(dir: &Path) -> Result<Bundle, OutputError> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(io_err(&p))
    };
    let manifest_text = read(MANIFEST_FILE)?;
    let summary_text = read(SUMMARY_JSON)?;
    let manifest = RunManifest::parse(&manifest_text).map_err(|e| OutputError::Malformed {
        path: dir.join(MANIFEST_FILE),
        message: e.to_string(),
    })?;
    let summary = serde_json::from_str(&summary_text).map_err(|e| OutputError::Malformed {
        path: dir.join(SUMMARY_JSON),
        message: e.to_string(),
    })?;
    Ok(Bundle {
        dir: dir.to_path_buf(),
        manifest,
        summary,
    })
}

/// One row of the cross-run comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub paths: usize,
    pub seed: u64,
    pub x: f64,
    pub cyclicity: f64,
    pub funding_to_entrepreneurs: f64,
    pub output_proxy: f64,
    pub liquidation: f64,
    pub cds_sold: f64,
    pub cds_bought: f64,
    pub e3: f64,
    pub insolvency_rate: f64,
}

impl ReportRow {
    pub fn new(label: &str, summary: &RunSummary) -> Self {
        let mean = |m: &str| summary.mean(m).unwrap_or(f64::NAN);
        Self {
            label: label.to_string(),
            paths: summary.n_paths,
            seed: summary.seed,
            x: mean("x"),
            cyclicity: mean("cyclicity"),
            funding_to_entrepreneurs: mean("projects_total"),
            output_proxy: mean("output_proxy"),
            liquidation: mean("liquidation"),
            cds_sold: mean("cds_sold"),
            cds_bought: mean("cds_bought"),
            e3: mean("e3"),
            insolvency_rate: summary.flag_rates.insolvent,
        }
    }

    fn headers() -> Vec<String> {
        [
            "label",
            "paths",
            "seed",
            "x",
            "cyclicity",
            "funding_to_entrepreneurs",
            "output_proxy",
            "liquidation",
            "cds_sold",
            "cds_bought",
            "e3",
            "insolvency_rate",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            self.paths.to_string(),
            self.seed.to_string(),
            num(self.x),
            num(self.cyclicity),
            num(self.funding_to_entrepreneurs),
            num(self.output_proxy),
            num(self.liquidation),
            num(self.cds_sold),
            num(self.cds_bought),
            num(self.e3),
            num(self.insolvency_rate),
        ]
    }
}

pub fn report_table(rows: &[ReportRow]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.cells()).collect();
    render_table(&ReportRow::headers(), &cells)
}

pub fn report_csv(rows: &[ReportRow]) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn report_json(rows: &[ReportRow]) -> Result<String, OutputError> {
    let mut s = serde_json::to_string_pretty(rows)?;
    s.push('\n');
    Ok(s)
}

/// Sweep results as rows: assignment columns then the report columns.
pub fn sweep_rows(points: &[SweepPoint]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut headers: Vec<String> = points
        .first()
        .map(|p| p.assignments.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    headers.extend(ReportRow::headers().into_iter().skip(1));
    let rows = points
        .iter()
        .map(|p| {
            let mut row: Vec<String> = p.assignments.iter().map(|(_, v)| v.clone()).collect();
            row.extend(ReportRow::new("", &p.summary).cells().into_iter().skip(1));
            row
        })
        .collect();
    (headers, rows)
}

pub fn rows_csv(headers: &[String], rows: &[Vec<String>]) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let t = render_table(
            &["a".into(), "bb".into()],
            &[vec!["long".into(), "1".into()]],
        );
        assert_eq!(t, "a     bb\n----  --\nlong   1\n");
    }

    #[test]
    fn missing_bundle_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let err = read_bundle(dir.path()).unwrap_err();
        assert!(err.to_string().contains(MANIFEST_FILE), "{err}");
    }
}
