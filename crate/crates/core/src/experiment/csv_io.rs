//! CSV output of suite reports.

use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentReport, GuaranteeSample, ReportRow};
use crate::error::{Error, Result};

pub const TRADEOFF_FILE: &str = "tradeoff.csv";
pub const GUARANTEES_FILE: &str = "guarantees.csv";

const TRADEOFF_HEADER: [&str; 8] = ["instance", "data", "method", "param", "mean", "worst", "q90", "runtime_s"];
const GUARANTEES_HEADER: [&str; 4] = ["method", "param", "gamma_norm", "bound"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn parse(path: &Path, s: &str) -> Result<f64> {
    s.parse().map_err(|e| io_err(path, format!("bad number '{s}': {e}")))
}

/// Writes both tables into `dir` and returns their paths.
pub fn emit_csv(report: &ExperimentReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tradeoff = dir.join(TRADEOFF_FILE);
    let guarantees = dir.join(GUARANTEES_FILE);
    write_tradeoff(&report.rows, &tradeoff)?;
    write_guarantees(&report.guarantees, &guarantees)?;
    Ok((tradeoff, guarantees))
}

pub fn write_tradeoff(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(TRADEOFF_HEADER).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.data.clone(),
            r.method.clone(),
            num(r.param),
            num(r.mean),
            num(r.worst),
            num(r.q90),
            num(r.runtime_s),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_guarantees(samples: &[GuaranteeSample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(GUARANTEES_HEADER).map_err(|e| io_err(path, e))?;
    for g in samples {
        w.write_record([g.method.clone(), num(g.param), num(g.gamma_norm), num(g.bound)])
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn records(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let found = r.headers().map_err(|e| io_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(io_err(path, format!("unexpected header {found:?}")));
    }
    r.records()
        .map(|rec| rec.map_err(|e| io_err(path, e)))
        .collect()
}

pub fn read_tradeoff(path: &Path) -> Result<Vec<ReportRow>> {
    records(path, &TRADEOFF_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ReportRow {
                instance: rec[0].parse().map_err(|e| io_err(path, e))?,
                data: rec[1].to_string(),
                method: rec[2].to_string(),
                param: parse(path, &rec[3])?,
                mean: parse(path, &rec[4])?,
                worst: parse(path, &rec[5])?,
                q90: parse(path, &rec[6])?,
                runtime_s: parse(path, &rec[7])?,
            })
        })
        .collect()
}

pub fn read_guarantees(path: &Path) -> Result<Vec<GuaranteeSample>> {
    records(path, &GUARANTEES_HEADER)?
        .iter()
        .map(|rec| {
            Ok(GuaranteeSample {
                method: rec[0].to_string(),
                param: parse(path, &rec[1])?,
                gamma_norm: parse(path, &rec[2])?,
                bound: parse(path, &rec[3])?,
            })
        })
        .collect()
}
