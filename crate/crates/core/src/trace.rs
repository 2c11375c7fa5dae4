//! Per-iteration records and their on-disk forms: a comma-separated trace
//! with a fixed header and a TOML summary.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 13] = [
    "k",
    "mu",
    "grad_norm",
    "compl_norm",
    "eq_norm",
    "min_g",
    "min_y",
    "inner_iters",
    "err_to_ref",
    "order",
    "tr_radius",
    "tr_multiplier",
    "lambda_min_h",
];

/// One outer iteration. Row `k` holds `mu_k` and the residuals of the
/// iterate accepted at that barrier parameter; empty cells mean undefined
/// (no inequalities, no reference yet, not a trust-region run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub k: usize,
    pub mu: f64,
    pub grad_norm: f64,
    pub compl_norm: f64,
    pub eq_norm: f64,
    pub min_g: Option<f64>,
    pub min_y: Option<f64>,
    pub inner_iters: usize,
    pub err_to_ref: Option<f64>,
    pub order: Option<f64>,
    pub tr_radius: Option<f64>,
    pub tr_multiplier: Option<f64>,
    pub lambda_min_h: Option<f64>,
}

pub fn write_trace<W: Write>(rows: &[IterationTrace], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Trace(e.to_string());
    w.write_record(TRACE_HEADER).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Trace(e.to_string()))
}

pub fn trace_to_string(rows: &[IterationTrace]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Trace(e.to_string()))
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<IterationTrace>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| Error::Trace(e.to_string()))?;
    if !headers.iter().eq(TRACE_HEADER.iter().copied()) {
        return Err(Error::Trace(format!("unexpected header: {headers:?}")));
    }
    r.deserialize()
        .map(|row| row.map_err(|e: csv::Error| Error::Trace(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaBand {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

/// Structured summary written next to a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub problem: String,
    pub algorithm: String,
    pub status: String,
    pub outer_iterations: usize,
    pub kkt_residual: f64,
    pub grad_norm: f64,
    pub compl_norm: f64,
    pub eq_norm: f64,
    pub self_referenced: bool,
    pub extrapolation_fallbacks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_band: Option<ThetaBand>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SummaryReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Trace(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Trace(e.to_string()))
    }
}
