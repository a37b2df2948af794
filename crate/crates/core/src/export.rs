//! JSON and CSV encodings of pulses, filters and verification reports.
//!
//! JSON documents have the shape `{"meta": {...}, "data": [...]}`; `meta`
//! always carries `beta`, `lambda`, `q`, `Q0` and `tool_version`, plus any
//! extra keys in sorted order. CSV output is a header row followed by one
//! row per item and carries no metadata.

use std::collections::BTreeMap;
use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::RationalFilter;
use crate::oracles::VerificationReport;
use crate::params::PulseParams;
use crate::signal::SampledSignal;

pub const TOOL_VERSION: &str = concat!("gausspulse ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub beta: f64,
    pub lambda: f64,
    pub q: f64,
    #[serde(rename = "Q0")]
    pub q0: f64,
    pub tool_version: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Meta {
    pub fn new(p: &PulseParams) -> Self {
        Self {
            beta: p.beta(),
            lambda: p.lambda(),
            q: p.q(),
            q0: p.q0(),
            tool_version: TOOL_VERSION.to_string(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        let v = serde_json::to_value(value).map_err(|e| Error::Serialization(e.to_string()))?;
        self.extra.insert(key.to_string(), v);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub meta: Meta,
    pub data: Vec<T>,
}

impl<T: Serialize> Document<T> {
    pub fn new(meta: Meta, data: Vec<T>) -> Self {
        Self { meta, data }
    }

    /// Pretty-printed JSON with a trailing newline. Fails on non-finite
    /// numbers, which JSON cannot carry.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))?;
        if has_null_number(&s) {
            return Err(Error::NonFinite("JSON export"));
        }
        s.push('\n');
        Ok(s)
    }
}

impl<T: DeserializeOwned> Document<T> {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

// serde_json writes NaN and ±∞ as `null`; no field here is legitimately null
fn has_null_number(s: &str) -> bool {
    s.lines()
        .any(|l| l.trim_end_matches(',').ends_with(": null") || l.trim().trim_end_matches(',') == "null")
}

/// One `x,value` row of a real-valued signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub value: f64,
}

/// One `n,coefficient` row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub n: i64,
    pub coefficient: f64,
}

/// One row of a filter in CSV form; columns missing at index `n` are empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterRow {
    pub n: usize,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    pub pole: Option<f64>,
}

/// A [`VerificationReport`] flattened to fixed CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub check_name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: Option<f64>,
    pub params_digest: String,
    pub note: Option<String>,
}

impl From<&VerificationReport> for ReportRow {
    fn from(r: &VerificationReport) -> Self {
        Self {
            check_name: r.check_name.clone(),
            measured: r.measured,
            tolerance: r.tolerance,
            passed: r.passed,
            runtime_ms: r.runtime_ms,
            params_digest: r.params_digest.clone(),
            note: r.note.clone(),
        }
    }
}

/// Real parts of `signal` as `x,value` rows.
pub fn samples(signal: &SampledSignal) -> Vec<Sample> {
    signal.iter().map(|(x, v)| Sample { x, value: v.re }).collect()
}

pub fn coefficients(values: &[f64]) -> Vec<Coefficient> {
    values
        .iter()
        .enumerate()
        .map(|(n, &c)| Coefficient {
            n: n as i64,
            coefficient: c,
        })
        .collect()
}

pub fn filter_rows(f: &RationalFilter) -> Vec<FilterRow> {
    let len = f.numerator().len().max(f.denominator().len()).max(f.poles().len());
    (0..len)
        .map(|n| FilterRow {
            n,
            numerator: f.numerator().get(n).copied(),
            denominator: f.denominator().get(n).copied(),
            pole: f.poles().get(n).copied(),
        })
        .collect()
}

/// Writes `rows` as CSV with a header taken from the row type's fields.
pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        if let Err(e) = w.serialize(r) {
            return Err(Error::Serialization(e.to_string()));
        }
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn read_csv<T: DeserializeOwned>(s: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(s.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Serialization(e.to_string()))
}
