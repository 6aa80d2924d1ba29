//! Trace and report files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use splitfix::engines::{Finding, IterationTrace, Termination};
use splitfix::smip::GammaRange;

use crate::CliError;

/// Floor applied before taking log10 in plotdata.tsv.
pub const LOG_FLOOR: f64 = 1e-300;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path, source),
        other => CliError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

pub fn trace_header(dim: usize) -> Vec<String> {
    let mut header = vec!["n".to_string()];
    for prefix in ["x", "w", "y"] {
        header.extend((1..=dim).map(|i| format!("{prefix}{i}")));
    }
    header.extend(["res_S", "res_J", "step", "dist_opt"].map(String::from));
    header
}

/// Writes `n,x…,w…,y…,res_S,res_J,step,dist_opt`, one row per iterate.
/// Absent values are empty fields.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace<f64>) -> Result<(), CliError> {
    let dim = trace.records.first().map_or(0, |r| r.x.dim());
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(trace_header(dim))
        .map_err(|e| csv_err(path, e))?;
    for r in &trace.records {
        let mut row = vec![r.n.to_string()];
        row.extend(r.x.coords().iter().map(|&v| csv_float(v)));
        for opt in [&r.w, &r.y] {
            match opt {
                Some(p) => row.extend(p.coords().iter().map(|&v| csv_float(v))),
                None => row.extend(std::iter::repeat_n(String::new(), dim)),
            }
        }
        row.push(csv_float(r.res_s));
        row.push(csv_float(r.res_j));
        row.push(csv_float(r.step));
        row.push(r.dist_opt.map(csv_float).unwrap_or_default());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn log10_floor(v: f64) -> String {
    format!("{:.6}", v.max(LOG_FLOOR).log10())
}

/// Writes n against log10 of both residuals and the distance to x*.
pub fn write_plotdata(path: &Path, trace: &IterationTrace<f64>) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(["n", "log10_res_S", "log10_res_J", "log10_dist_opt"])
        .map_err(|e| csv_err(path, e))?;
    for r in &trace.records {
        w.write_record([
            r.n.to_string(),
            log10_floor(r.res_s),
            log10_floor(r.res_j),
            r.dist_opt.map(log10_floor).unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| io_err(path, std::io::Error::other(e)))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

/// Six-decimal rendering used for human-facing values.
pub fn display6(v: f64) -> String {
    format!("{v:.6}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub res_s: f64,
    pub res_j: f64,
    pub res_s_display: String,
    pub res_j_display: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticLine {
    pub check: String,
    pub status: String,
    pub detail: String,
}

/// Contents of summary.json; every trace-derived field is read from the
/// final row.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scheme: String,
    pub termination: Termination,
    pub iterations: usize,
    pub trace_rows: usize,
    pub final_point: Vec<f64>,
    pub final_point_display: Vec<String>,
    pub final_residuals: Residual,
    pub final_step: f64,
    pub final_dist_opt: Option<f64>,
    pub elapsed_seconds: f64,
    pub findings: Vec<Finding>,
    pub warnings: Vec<String>,
    pub gamma_range: Option<GammaRange<f64>>,
    pub diagnostics: Vec<DiagnosticLine>,
    pub seed: u64,
}

impl RunSummary {
    pub fn diverged(&self) -> bool {
        self.termination.diverged()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = csv_float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(csv_float(-1.0 / 3.0).parse::<f64>().unwrap(), -1.0 / 3.0);
    }

    #[test]
    fn header_layout() {
        assert_eq!(
            trace_header(2).join(","),
            "n,x1,x2,w1,w2,y1,y2,res_S,res_J,step,dist_opt"
        );
    }

    #[test]
    fn log_floor() {
        assert_eq!(log10_floor(0.0), "-300.000000");
        assert_eq!(log10_floor(1e-3), "-3.000000");
    }
}
