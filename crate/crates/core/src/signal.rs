use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether sample positions are times or angular frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
}

/// A uniform grid `start + i·step`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    start: f64,
    step: f64,
    count: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite start and positive step, got start={start} step={step}"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("grid must have at least one point".into()));
        }
        Ok(Self { start, step, count })
    }

    /// Grid covering `[lo, hi]` with the given step.
    pub fn spanning(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let count = ((hi - lo) / step).round() as usize + 1;
        Self::new(lo, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }

    /// Evaluates a real function on every grid point.
    pub fn sample(&self, domain: Domain, f: impl Fn(f64) -> Result<f64>) -> Result<SampledSignal> {
        let values = self.points().map(f).collect::<Result<Vec<_>>>()?;
        SampledSignal::from_real(self.start, self.step, values, domain)
    }

    pub fn sample_complex(&self, domain: Domain, f: impl Fn(f64) -> Result<Complex64>) -> Result<SampledSignal> {
        let values = self.points().map(f).collect::<Result<Vec<_>>>()?;
        SampledSignal::new(self.start, self.step, values, domain)
    }
}

/// Uniformly spaced, finite samples of a real or complex signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    start: f64,
    step: f64,
    values: Vec<Complex64>,
    domain: Domain,
}

impl SampledSignal {
    pub fn new(start: f64, step: f64, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        Grid::new(start, step, values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("sampled signal"));
        }
        Ok(Self {
            start,
            step,
            values,
            domain,
        })
    }

    pub fn from_real(start: f64, step: f64, values: Vec<f64>, domain: Domain) -> Result<Self> {
        Self::new(
            start,
            step,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            domain,
        )
    }

    /// A unit impulse at `start` followed by `len − 1` zeros.
    pub fn impulse(len: usize) -> Result<Self> {
        let mut values = vec![0.0; len];
        if let Some(first) = values.first_mut() {
            *first = 1.0;
        }
        Self::from_real(0.0, 1.0, values, Domain::Time)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid {
            start: self.start,
            step: self.step,
            count: self.values.len(),
        }
    }

    pub fn position(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (self.position(i), *v))
    }
}
