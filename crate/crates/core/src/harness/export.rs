use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{TrialOutcome, TrialRecord, TrialReport};
use super::stats::{cdf, percentile};
use crate::error::Result;
use crate::selection::Strategy;

/// `(error if fixed, converged)` for one trials.csv row.
type Row = (Option<f64>, bool);

pub const TRIALS_HEADER: [&str; 6] = ["trial", "strategy", "ref_id", "ids", "err_m", "converged"];

fn join_ids(ids: &[crate::scenario::BsId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(";")
}

pub fn write_trials_csv<W: Write>(reports: &[TrialReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER)?;
    for r in reports {
        let trial = r.trial.to_string();
        match &r.outcome {
            TrialOutcome::Fix(f) => w.write_record([
                trial,
                r.strategy.to_string(),
                f.reference_id.to_string(),
                join_ids(&f.ids),
                f.error_m.to_string(),
                f.converged.to_string(),
            ])?,
            TrialOutcome::Skipped(_) => w.write_record([trial.as_str(), r.strategy.as_str(), "", "", "", "skipped"])?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(errors: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["err_m", "prob"])?;
    for (e, p) in cdf(errors)?.points {
        w.write_record([e.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-trial selections: one row per strategy with its ranked ids and scores.
pub fn write_selections_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "strategy", "ref_id", "ids", "scores"])?;
    for rec in records {
        for (strategy, sel) in &rec.selections {
            match sel {
                Ok(sel) => {
                    let [trial, strategy, reference, ids, _] = sel.csv_record(rec.trial);
                    let scores = sel.scores.iter().flatten().map(|s| s.value.to_string()).collect::<Vec<_>>().join(";");
                    w.write_record([trial, strategy, reference, ids, scores])?;
                }
                Err(_) => w.write_record([rec.trial.to_string().as_str(), strategy.as_str(), "", "", ""])?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub fixes: usize,
    pub skipped: usize,
    pub not_converged: usize,
    pub median_m: Option<f64>,
    pub p90_m: Option<f64>,
}

impl StrategySummary {
    fn from_rows(strategy: String, rows: &[Row]) -> Self {
        let errors: Vec<f64> = rows.iter().filter_map(|r| r.0).collect();
        Self {
            strategy,
            fixes: errors.len(),
            skipped: rows.len() - errors.len(),
            not_converged: rows.iter().filter(|r| r.0.is_some() && !r.1).count(),
            median_m: percentile(&errors, 0.5).ok(),
            p90_m: percentile(&errors, 0.9).ok(),
        }
    }
}

/// Errors of the non-skipped trials of `strategy`, in trial order.
pub fn strategy_errors(reports: &[TrialReport], strategy: Strategy) -> Vec<f64> {
    reports.iter().filter(|r| r.strategy == strategy).filter_map(TrialReport::error_m).collect()
}

pub fn summarize(reports: &[TrialReport], strategies: &[Strategy]) -> Vec<StrategySummary> {
    strategies
        .iter()
        .map(|&s| {
            let rows: Vec<Row> = reports
                .iter()
                .filter(|r| r.strategy == s)
                .map(|r| (r.error_m(), r.fix().is_some_and(|f| f.converged)))
                .collect();
            StrategySummary::from_rows(s.to_string(), &rows)
        })
        .collect()
}

/// Summarize a `trials.csv` at percentile `p`; strategies keep first-seen order.
pub fn summarize_trials_csv<R: Read>(input: R, p: f64) -> Result<Vec<(StrategySummary, Option<f64>)>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut groups: Vec<(String, Vec<Row>)> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let strategy = row.get(1).unwrap_or_default().to_string();
        let err = row.get(4).and_then(|e| e.parse::<f64>().ok());
        let converged = row.get(5) == Some("true");
        match groups.iter_mut().find(|(s, _)| *s == strategy) {
            Some((_, rows)) => rows.push((err, converged)),
            None => groups.push((strategy, vec![(err, converged)])),
        }
    }
    groups
        .into_iter()
        .map(|(s, rows)| {
            let errors: Vec<f64> = rows.iter().filter_map(|r| r.0).collect();
            let at_p = if errors.is_empty() { None } else { Some(percentile(&errors, p)?) };
            Ok((StrategySummary::from_rows(s, &rows), at_p))
        })
        .collect()
}

/// Write `trials.csv`, one `cdf_<strategy>.csv` per strategy with fixes,
/// `config.toml` and `selections.csv` into `dir`. Returns the written paths.
pub fn write_outputs(cfg: &ExperimentConfig, records: &[TrialRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let reports: Vec<TrialReport> = records.iter().flat_map(|r| r.reports.iter().cloned()).collect();
    let mut written = Vec::new();
    let mut create = |name: String| -> Result<BufWriter<File>> {
        let path = dir.join(name);
        let file = File::create(&path)?;
        written.push(path);
        Ok(BufWriter::new(file))
    };
    write_trials_csv(&reports, create("trials.csv".into())?)?;
    for &s in &cfg.strategies {
        let errors = strategy_errors(&reports, s);
        if !errors.is_empty() {
            write_cdf_csv(&errors, create(format!("cdf_{s}.csv"))?)?;
        }
    }
    write_selections_csv(records, create("selections.csv".into())?)?;
    create("config.toml".into())?.write_all(cfg.to_toml_string()?.as_bytes())?;
    Ok(written)
}
