//! Persisting reports: `trials.jsonl` (one record per line, ordered by
//! trial index), `trials.csv` (stable columns) and `summary.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::runner::{Report, TrialRecord};

pub const JSONL_FILE: &str = "trials.jsonl";
pub const CSV_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One JSON object per line, in index order.
pub fn jsonl(records: &[TrialRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

/// CSV with the given columns; failed trials leave their cells empty.
/// An empty record list gives just the header.
pub fn write_csv<W: Write>(columns: &[String], records: &[TrialRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for r in records {
        w.write_record(
            columns
                .iter()
                .map(|c| r.row.get(c).map(|cell| cell.render()).unwrap_or_default()),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("summary serializes") + "\n"
}

/// Write the three report files into `dir`, creating it if needed.
pub fn write_report(report: &Report, dir: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(JSONL_FILE);
    fs::write(&path, jsonl(&report.records)).map_err(io(&path))?;
    let path = dir.join(CSV_FILE);
    let file = fs::File::create(&path).map_err(io(&path))?;
    write_csv(&report.columns, &report.records, file).map_err(|source| OutputError::Csv {
        path: path.clone(),
        source,
    })?;
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, summary_json(report)).map_err(io(&path))?;
    Ok(())
}

/// Load a report from its directory or from its `summary.json`; the trial
/// records are read from the sibling `trials.jsonl` when present.
pub fn read_report(path: &Path) -> Result<Report, OutputError> {
    let summary = if path.is_dir() {
        path.join(SUMMARY_FILE)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&summary).map_err(io(&summary))?;
    let mut report: Report = serde_json::from_str(&text).map_err(|source| OutputError::Json {
        path: summary.clone(),
        source,
    })?;
    let lines = summary.with_file_name(JSONL_FILE);
    if lines.exists() {
        let text = fs::read_to_string(&lines).map_err(io(&lines))?;
        report.records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()
            .map_err(|source| OutputError::Json { path: lines, source })?;
    }
    Ok(report)
}

/// Plain-text summary for the terminal: one line per check.
pub fn render_text(report: &Report) -> String {
    let a = &report.aggregate;
    let mut s = format!(
        "{} on {}: {} trials, {} errors, seed {}, {:.2}s\n",
        report.config.experiment,
        report.config.model,
        a.trials,
        a.errors,
        report.config.seed,
        report.wall_clock_seconds
    );
    for (name, f) in &a.fractions {
        let [lo, hi] = a.intervals[name];
        s += &format!("  {name}_fraction = {f} [{lo}, {hi}]\n");
    }
    for (name, v) in &a.statistics {
        s += &format!("  {name} = {v}\n");
    }
    for c in &a.checks {
        s += &format!(
            "  {} {}: {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    s
}
