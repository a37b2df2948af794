//! Digital filters built from the coefficient sequence
//! `a_n = (−q)ⁿ/(q²;q²)_n`.
//!
//! | filter | form | realization |
//! |--------|------|-------------|
//! | `H₁ᴺ` | `1/(1 + ∑_{n=1}^N q^{n²}/(q²;q²)_n z^{−n})` | [`Realization::IirDirect`] |
//! | `H₂ᴺ` | `∏_{n<N} 1/(1 + q^{2n+1}z^{−1})` | [`Realization::CascadeOrder1`] |
//! | `H₃ᴺ` | `1 + ∑_{n=1}^N a_n z^{−n}` | [`Realization::Fir`] |
//! | `H₄ᴺ` | `H₂ᴺ(z)·H₂ᴺ(z^{−1})` | [`Realization::ZeroPhaseCascade`] |
//!
//! All four approximate `1/P(z)` (or `1/|P|²` for `H₄`) as `N` grows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PulseParams;
use crate::pulse::{capital_phi, unit_energy_phi};
use crate::signal::{Domain, SampledSignal};
use crate::special::{Nome, TruncationPolicy};

/// `a_0, a_1, …` with `a_n = (−q)ⁿ/(q²;q²)_n`; `a_n = 0` for `n < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    values: Vec<f64>,
    q: Nome,
}

impl CoefficientSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nome(&self) -> Nome {
        self.q
    }

    /// `a_n` for any integer `n`.
    pub fn get(&self, n: i64) -> Option<f64> {
        if n < 0 {
            Some(0.0)
        } else {
            self.values.get(n as usize).copied()
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `a_n` for `n = 0..=n_max`.
pub fn coefficients_a(p: &PulseParams, n_max: usize) -> CoefficientSequence {
    let q = p.q();
    let q2 = q * q;
    let mut values = Vec::with_capacity(n_max + 1);
    let mut a = 1.0;
    let mut q2n = 1.0;
    values.push(a);
    for _ in 0..n_max {
        q2n *= q2;
        a *= -q / (1.0 - q2n);
        values.push(a);
    }
    CoefficientSequence { values, q: p.nome() }
}

/// `b_n = q^{n²}/(q²;q²)_n` for `n = 0..=n_max`, the denominator of `H₁`.
pub fn coefficients_b(p: &PulseParams, n_max: usize) -> Vec<f64> {
    let q = p.q();
    let q2 = q * q;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut b = 1.0;
    let mut q2n = 1.0;
    out.push(b);
    for n in 1..=n_max {
        q2n *= q2;
        // q^{n²} = q^{(n−1)²}·q^{2n−1}
        b *= q.powi(2 * n as i32 - 1) / (1.0 - q2n);
        out.push(b);
    }
    out
}

/// How a [`RationalFilter`] is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    Fir,
    IirDirect,
    CascadeOrder1,
    ZeroPhaseCascade,
}

/// Which side of a sequence is treated how when a filter runs past its ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// The input is zero outside its support.
    #[default]
    ZeroPad,
    /// Whole-sample symmetric extension about the first and last samples.
    Mirror,
}

/// A digital filter with real coefficients in `z^{−1}`.
///
/// For [`Realization::ZeroPhaseCascade`] the transfer function is
/// `gain · N(z) / (D(z) D(z^{−1}))` where `D` is the causal `denominator`
/// and `poles` lists its roots (all inside the unit circle). For the other
/// realizations it is `gain · N(z)/D(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFilter", into = "RawFilter")]
pub struct RationalFilter {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    poles: Vec<f64>,
    realization: Realization,
    gain: f64,
}

#[derive(Serialize, Deserialize)]
struct RawFilter {
    realization: Realization,
    gain: f64,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    poles: Vec<f64>,
}

impl TryFrom<RawFilter> for RationalFilter {
    type Error = Error;

    fn try_from(raw: RawFilter) -> Result<Self> {
        RationalFilter::new(raw.numerator, raw.denominator, raw.poles, raw.realization, raw.gain)
    }
}

impl From<RationalFilter> for RawFilter {
    fn from(f: RationalFilter) -> Self {
        RawFilter {
            realization: f.realization,
            gain: f.gain,
            numerator: f.numerator,
            denominator: f.denominator,
            poles: f.poles,
        }
    }
}

/// `∏ (1 − p_k z^{−1})` as coefficients of `z^{−n}`.
pub fn expand_poles(poles: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &p in poles {
        c.push(0.0);
        for k in (1..c.len()).rev() {
            c[k] -= p * c[k - 1];
        }
    }
    c
}

const SETTLE_TOL: f64 = 1e-17;
const SETTLE_CAP: usize = 1_000_000;

impl RationalFilter {
    pub fn new(
        numerator: Vec<f64>,
        denominator: Vec<f64>,
        poles: Vec<f64>,
        realization: Realization,
        gain: f64,
    ) -> Result<Self> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if numerator.is_empty() || !finite(&numerator) {
            return Err(Error::InvalidParameter("numerator must be non-empty and finite".into()));
        }
        if denominator.first() != Some(&1.0) || !finite(&denominator) {
            return Err(Error::InvalidParameter(
                "denominator must be finite with leading coefficient 1".into(),
            ));
        }
        if !(gain.is_finite() && gain != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gain must be finite and nonzero, got {gain}"
            )));
        }
        if !finite(&poles) {
            return Err(Error::InvalidParameter("poles must be finite".into()));
        }
        match realization {
            Realization::Fir if denominator.len() != 1 => {
                return Err(Error::InvalidParameter("an FIR filter has denominator [1]".into()));
            }
            Realization::CascadeOrder1 | Realization::ZeroPhaseCascade => {
                if let Some(p) = poles.iter().find(|p| p.abs() >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "cascade stage pole {p} is not inside the unit circle"
                    )));
                }
                if poles.len() + 1 != denominator.len() {
                    return Err(Error::InvalidParameter(
                        "cascade denominator degree must equal the number of poles".into(),
                    ));
                }
                let expanded = expand_poles(&poles);
                let scale = expanded.iter().fold(1.0f64, |m, c| m.max(c.abs()));
                if expanded
                    .iter()
                    .zip(&denominator)
                    .any(|(a, b)| (a - b).abs() > 1e-12 * scale)
                {
                    return Err(Error::InvalidParameter(
                        "denominator does not match the listed poles".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self {
            numerator,
            denominator,
            poles,
            realization,
            gain,
        })
    }

    /// The filter with transfer function 1.
    pub fn identity() -> Self {
        Self {
            numerator: vec![1.0],
            denominator: vec![1.0],
            poles: Vec::new(),
            realization: Realization::Fir,
            gain: 1.0,
        }
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// Stage poles of a cascade; empty for unfactored realizations.
    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn with_gain(mut self, gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gain must be finite and nonzero, got {gain}"
            )));
        }
        self.gain = gain;
        Ok(self)
    }

    /// Every pole of the transfer function: the stage poles, plus their
    /// reciprocals for a zero-phase cascade.
    pub fn pole_set(&self) -> Vec<f64> {
        let mut out = self.poles.clone();
        if self.realization == Realization::ZeroPhaseCascade {
            out.extend(self.poles.iter().map(|p| 1.0 / p));
        }
        out
    }

    /// `H(e^{iθ})`.
    pub fn frequency_response(&self, theta: f64) -> Complex64 {
        let zinv = Complex64::from_polar(1.0, -theta);
        let horner = |c: &[f64], z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * z + v);
        let num = horner(&self.numerator, zinv) * self.gain;
        match self.realization {
            Realization::Fir | Realization::IirDirect => num / horner(&self.denominator, zinv),
            Realization::CascadeOrder1 => {
                let d: Complex64 = self.poles.iter().map(|&p| 1.0 - p * zinv).product();
                num / d
            }
            Realization::ZeroPhaseCascade => {
                let z = zinv.conj();
                let d: Complex64 = self.poles.iter().map(|&p| (1.0 - p * zinv) * (1.0 - p * z)).product();
                num / d
            }
        }
    }

    /// Number of samples after which the causal part of the impulse response
    /// stays below `1e−17` of its peak.
    pub fn settle_length(&self) -> Result<usize> {
        if self.realization == Realization::Fir {
            return Ok(self.numerator.len());
        }
        let order = self.denominator.len().max(self.numerator.len());
        let mut history: Vec<f64> = Vec::new();
        let mut stages = vec![0.0; self.poles.len()];
        let mut peak = 0.0f64;
        let mut quiet = 0;
        for n in 0..SETTLE_CAP {
            let x = self.numerator.get(n).copied().unwrap_or(0.0);
            let y = if self.realization == Realization::IirDirect {
                let mut acc = x;
                for (k, &a) in self.denominator.iter().enumerate().skip(1).take(n) {
                    acc -= a * history[n - k];
                }
                history.push(acc);
                acc
            } else {
                let mut v = x;
                for (s, &p) in stages.iter_mut().zip(&self.poles) {
                    v += p * *s;
                    *s = v;
                }
                v
            };
            peak = peak.max(y.abs());
            if y.abs() <= SETTLE_TOL * peak {
                quiet += 1;
                if quiet >= order {
                    return Ok(n + 1);
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::Inconsistent("impulse response does not settle".into()))
    }
}

/// `H₁ᴺ`: all-pole, denominator `b_n = q^{n²}/(q²;q²)_n`.
pub fn build_h1(p: &PulseParams, order: usize) -> RationalFilter {
    RationalFilter {
        numerator: vec![1.0],
        denominator: coefficients_b(p, order),
        poles: Vec::new(),
        realization: if order == 0 {
            Realization::Fir
        } else {
            Realization::IirDirect
        },
        gain: 1.0,
    }
}

/// Stage poles `z_n = −q^{2n+1}`, `n = 0..N`.
pub fn cascade_poles(p: &PulseParams, order: usize) -> Vec<f64> {
    let q = p.q();
    (0..order).map(|n| -q.powi(2 * n as i32 + 1)).collect()
}

/// `H₂ᴺ`: cascade of first-order sections with poles `−q^{2n+1}`.
pub fn build_h2(p: &PulseParams, order: usize) -> RationalFilter {
    let poles = cascade_poles(p, order);
    RationalFilter {
        numerator: vec![1.0],
        denominator: expand_poles(&poles),
        poles,
        realization: Realization::CascadeOrder1,
        gain: 1.0,
    }
}

/// `H₃ᴺ`: FIR with taps `a_0..=a_N`.
pub fn build_h3(p: &PulseParams, order: usize) -> RationalFilter {
    RationalFilter {
        numerator: coefficients_a(p, order).values,
        denominator: vec![1.0],
        poles: Vec::new(),
        realization: Realization::Fir,
        gain: 1.0,
    }
}

/// `H₄ᴺ(z) = H₂ᴺ(z)H₂ᴺ(z^{−1})`, scaled so that filtering the samples
/// `Φ(kλ)` gives exactly 1 at `k = 0`.
///
/// As `N → ∞` the filtered samples tend to a Kronecker delta and the gain
/// to `2√π/(βQ₀)`.
pub fn build_h4(p: &PulseParams, order: usize) -> Result<RationalFilter> {
    let poles = cascade_poles(p, order);
    let unit = RationalFilter {
        numerator: vec![1.0],
        denominator: expand_poles(&poles),
        poles,
        realization: Realization::ZeroPhaseCascade,
        gain: 1.0,
    };
    let centre = filter_autocorrelation_samples(&unit, p)?;
    unit.with_gain(1.0 / centre)
}

/// Filters `Φ(kλ)` for `k` in a window wide enough for the Gaussian decay
/// and returns the value at `k = 0`.
fn filter_autocorrelation_samples(f: &RationalFilter, p: &PulseParams) -> Result<f64> {
    // Φ(kλ) ∝ q^{k²}
    let reach = (40.0 / -p.q().ln()).sqrt().ceil() as i64 + 1;
    let lambda = p.lambda();
    let values: Vec<f64> = (-reach..=reach).map(|k| capital_phi(k as f64 * lambda, p)).collect();
    let input = SampledSignal::from_real(-reach as f64 * lambda, lambda, values, Domain::Time)?;
    let out = apply_filter(f, &input, Boundary::ZeroPad)?;
    Ok(out.values()[reach as usize].re)
}

/// Filtered `Φ(kλ)` samples for `k = −half_width..=half_width`.
pub fn h4_autocorrelation_response(f: &RationalFilter, p: &PulseParams, half_width: usize) -> Result<SampledSignal> {
    let reach = (40.0 / -p.q().ln()).sqrt().ceil() as i64 + 1 + half_width as i64;
    let lambda = p.lambda();
    let values: Vec<f64> = (-reach..=reach).map(|k| capital_phi(k as f64 * lambda, p)).collect();
    let input = SampledSignal::from_real(-reach as f64 * lambda, lambda, values, Domain::Time)?;
    let out = apply_filter(f, &input, Boundary::ZeroPad)?;
    let skip = (reach - half_width as i64) as usize;
    SampledSignal::new(
        -(half_width as f64) * lambda,
        lambda,
        out.values()[skip..skip + 2 * half_width + 1].to_vec(),
        Domain::Time,
    )
}

fn reflect(i: i64, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as i64 - 1);
    let m = i.rem_euclid(period);
    if m >= len as i64 {
        (period - m) as usize
    } else {
        m as usize
    }
}

fn causal_pass(x: &mut [Complex64], pole: f64) {
    let mut prev = Complex64::new(0.0, 0.0);
    for v in x.iter_mut() {
        *v += pole * prev;
        prev = *v;
    }
}

fn anticausal_pass(x: &mut [Complex64], pole: f64) {
    let mut next = Complex64::new(0.0, 0.0);
    for v in x.iter_mut().rev() {
        *v += pole * next;
        next = *v;
    }
}

fn run_direct(num: &[f64], den: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for n in 0..x.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &b) in num.iter().enumerate().take(n + 1) {
            acc += b * x[n - k];
        }
        for (k, &a) in den.iter().enumerate().skip(1).take(n) {
            acc -= a * y[n - k];
        }
        y[n] = acc;
    }
    y
}

/// Runs `f` over `input` and returns a signal on the same grid.
///
/// Recursive stages run from zero initial state on an extension of the
/// input long enough for the impulse response to settle, so only samples
/// within a few time constants of the ends depend on `boundary`.
pub fn apply_filter(f: &RationalFilter, input: &SampledSignal, boundary: Boundary) -> Result<SampledSignal> {
    let len = input.len();
    let x = input.values();
    if f.realization == Realization::Fir && f.numerator == [1.0] && f.gain == 1.0 {
        return Ok(input.clone());
    }
    let pad = match (f.realization, boundary) {
        (Realization::Fir | Realization::IirDirect | Realization::CascadeOrder1, Boundary::ZeroPad) => 0,
        _ => f.settle_length()? + f.numerator.len(),
    };
    let ext: Vec<Complex64> = (0..len + 2 * pad)
        .map(|i| {
            let j = i as i64 - pad as i64;
            match boundary {
                Boundary::ZeroPad if j < 0 || j >= len as i64 => Complex64::new(0.0, 0.0),
                Boundary::ZeroPad => x[j as usize],
                Boundary::Mirror => x[reflect(j, len)],
            }
        })
        .collect();
    let mut y = match f.realization {
        Realization::Fir => run_direct(&f.numerator, &[1.0], &ext),
        Realization::IirDirect => run_direct(&f.numerator, &f.denominator, &ext),
        Realization::CascadeOrder1 | Realization::ZeroPhaseCascade => {
            let mut v = run_direct(&f.numerator, &[1.0], &ext);
            for &pole in &f.poles {
                causal_pass(&mut v, pole);
                if f.realization == Realization::ZeroPhaseCascade {
                    anticausal_pass(&mut v, pole);
                }
            }
            v
        }
    };
    for v in y.iter_mut() {
        *v *= f.gain;
    }
    if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("filter output"));
    }
    SampledSignal::new(input.start(), input.step(), y[pad..pad + len].to_vec(), input.domain())
}

/// The first samples of the impulse response (causal part only for a
/// zero-phase cascade).
pub fn impulse_response(f: &RationalFilter, len: usize) -> Result<Vec<f64>> {
    Ok(apply_filter(f, &SampledSignal::impulse(len)?, Boundary::ZeroPad)?.real_parts())
}

/// Filter family for [`select_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterKind {
    H1,
    H2,
    H3,
    H4,
}

/// Bound on what order `N` leaves out:
///
/// * `H₁`: `∑_{n>N} b_n ≤ q^{(N+1)²}/(Q₀(1 − q^{2N+3}))`;
/// * `H₃`: `∑_{n>N} |a_n| ≤ q^{N+1}/(Q₀(1 − q))`;
/// * `H₂`, `H₄`: `∑_{n≥N} q^{2n+1} = q^{2N+1}/(1 − q²)`, the log-size of the
///   omitted stages.
pub fn neglected_bound(p: &PulseParams, kind: FilterKind, order: usize) -> f64 {
    let q = p.q();
    let n = order as f64;
    match kind {
        FilterKind::H1 => q.powf((n + 1.0).powi(2)) / (p.q0() * (1.0 - q.powf(2.0 * n + 3.0))),
        FilterKind::H3 => q.powf(n + 1.0) / (p.q0() * (1.0 - q)),
        FilterKind::H2 | FilterKind::H4 => q.powf(2.0 * n + 1.0) / (1.0 - q * q),
    }
}

/// Smallest `N` whose [`neglected_bound`] is below `tol`.
pub fn select_order(p: &PulseParams, kind: FilterKind, tol: f64, policy: &TruncationPolicy) -> Result<usize> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    (0..policy.max_terms)
        .find(|&n| neglected_bound(p, kind, n) < tol)
        .ok_or(Error::Truncation {
            what: "filter order selection",
            max_terms: policy.max_terms,
        })
}

/// `φ_ortho(mλ) = Q₀^{−1/2} ∑_n a_n φ((m−n)λ)` for `m` in `range`, computed
/// by running `H₃` over the unit-energy Gaussian samples.
///
/// Taps stop where `qⁿ/(Q₀(1−q))` falls below the policy tolerance; samples
/// stop where `φ(kλ)/φ(0) = q^{2k²}` does.
pub fn phi_ortho_samples(
    p: &PulseParams,
    range: std::ops::RangeInclusive<i64>,
    policy: &TruncationPolicy,
) -> Result<SampledSignal> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Err(Error::InvalidParameter("empty sample range".into()));
    }
    let n_taps = select_order(p, FilterKind::H3, policy.rel_tol, policy)?;
    let reach = (-policy.rel_tol.ln() / (-2.0 * p.q().ln())).sqrt().ceil() as i64;
    let n_taps = n_taps.min((hi + reach).max(0) as usize);
    let first = lo - n_taps as i64 - reach;
    let lambda = p.lambda();
    let values: Vec<f64> = (first..=hi).map(|k| unit_energy_phi(k as f64 * lambda, p)).collect();
    let input = SampledSignal::from_real(first as f64 * lambda, lambda, values, Domain::Time)?;
    let h3 = build_h3(p, n_taps).with_gain(1.0 / p.q0().sqrt())?;
    let out = apply_filter(&h3, &input, Boundary::ZeroPad)?;
    let skip = (lo - first) as usize;
    SampledSignal::new(lo as f64 * lambda, lambda, out.values()[skip..].to_vec(), Domain::Time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::phi_ortho_time;
    use crate::special::half_triple_product;
    use std::f64::consts::PI;

    fn params(lb: f64) -> PulseParams {
        PulseParams::new(1.0, lb).unwrap()
    }

    #[test]
    fn leading_coefficients() {
        let p = params(1.0);
        let a = coefficients_a(&p, 30);
        assert_eq!(a.values()[0], 1.0);
        let q = (-0.25f64).exp();
        assert!((a.values()[1] + q / (1.0 - q * q)).abs() < 1e-15);
        assert!((a.values()[1] + 1.979_3).abs() < 1e-4);
        for (n, v) in a.values().iter().enumerate() {
            assert_eq!(v.signum(), if n % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert_eq!(a.get(-1), Some(0.0));
        let b = coefficients_b(&p, 3);
        assert!((b[1] - q / (1.0 - q * q)).abs() < 1e-15);
    }

    #[test]
    fn order_zero_is_identity() {
        let p = params(1.0);
        for f in [build_h1(&p, 0), build_h3(&p, 0)] {
            assert_eq!(f, RationalFilter::identity());
        }
        let input = SampledSignal::from_real(0.0, 1.0, vec![0.3, -1.25, 7.0], Domain::Time).unwrap();
        let out = apply_filter(&RationalFilter::identity(), &input, Boundary::ZeroPad).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn h2_poles_and_expansion() {
        let p = params(1.0);
        let f = build_h2(&p, 2);
        assert!((f.poles()[0] + 0.778_80).abs() < 1e-5);
        assert!((f.poles()[1] + 0.472_37).abs() < 1e-5);
        let f = build_h2(&p, 12);
        let (e1, _) = f.poles().iter().fold((0.0, 0.0), |(s, _), &z| (s - z, 0.0));
        assert!((f.denominator()[1] - e1).abs() < 1e-13);
        let prod: f64 = f.poles().iter().product();
        assert!((f.denominator()[12] - prod).abs() < 1e-13);
        assert!(f.poles().iter().all(|z| z.abs() < 1.0));
    }

    #[test]
    fn h3_impulse_is_taps() {
        let p = params(1.0);
        let f = build_h3(&p, 15);
        let h = impulse_response(&f, 16).unwrap();
        assert_eq!(h, coefficients_a(&p, 15).values());
    }

    #[test]
    fn h1_times_h3_tends_to_identity() {
        let p = params(1.0);
        let a = coefficients_a(&p, 80);
        let b = coefficients_b(&p, 80);
        for n in 1..=40 {
            let c: f64 = (0..=n).map(|k| a.values()[k] * b[n - k]).sum();
            assert!(c.abs() < 1e-13, "n={n}: {c}");
        }
    }

    #[test]
    fn h3_response_matches_reciprocal_product() {
        let p = params(1.0);
        let policy = TruncationPolicy::default();
        let deviation = |n: usize| {
            let f = build_h3(&p, n);
            (0..64)
                .map(|k| {
                    let theta = 2.0 * PI * k as f64 / 64.0;
                    let z = Complex64::from_polar(1.0, theta);
                    let pz = half_triple_product(z, p.nome(), &policy).unwrap();
                    (f.frequency_response(theta) - pz.inv()).norm()
                })
                .fold(0.0, f64::max)
        };
        // |a_n| decays only like qⁿ, and at θ = π the omitted taps add up
        let bound = neglected_bound(&p, FilterKind::H3, 40);
        let d40 = deviation(40);
        assert!(d40 <= bound * (1.0 + 1e-9) && d40 > 0.99 * bound, "{d40} vs {bound}");
        let n = select_order(&p, FilterKind::H3, 1e-11, &policy).unwrap();
        assert!(deviation(n) < 1e-10);
    }

    #[test]
    fn h2_impulse_converges_to_coefficients() {
        let p = params(1.0);
        let a = coefficients_a(&p, 20);
        let policy = TruncationPolicy::default();
        let n = select_order(&p, FilterKind::H2, 1e-13, &policy).unwrap();
        let h = impulse_response(&build_h2(&p, n), 21).unwrap();
        let err = h.iter().zip(a.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "N={n}: {err}");
        // at N = 40 the omitted stages still contribute at the 1e−8 level
        let h = impulse_response(&build_h2(&p, 40), 21).unwrap();
        let err = h.iter().zip(a.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err > 1e-10 && err < 1e-7, "{err}");
    }

    #[test]
    fn h1_and_h3_agree() {
        let p = params(1.0);
        let h1 = impulse_response(&build_h1(&p, 40), 21).unwrap();
        let h3 = impulse_response(&build_h3(&p, 40), 21).unwrap();
        for (x, y) in h1.iter().zip(&h3) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn h4_is_zero_phase_and_interpolates() {
        let p = params(1.0);
        let n = select_order(&p, FilterKind::H4, 1e-15, &TruncationPolicy::default()).unwrap();
        let f = build_h4(&p, n).unwrap();
        for k in 0..32 {
            let theta = 0.1 * k as f64;
            let h = f.frequency_response(theta);
            assert!(h.im.abs() < 1e-12 * h.norm());
            assert!((h - f.frequency_response(-theta)).norm() < 1e-12 * h.norm());
        }
        let limit = 2.0 * PI.sqrt() / (p.beta() * p.q0());
        assert!((f.gain() - limit).abs() < 1e-10 * limit);
        let out = h4_autocorrelation_response(&f, &p, 10).unwrap();
        for (i, v) in out.values().iter().enumerate() {
            let target = if i == 10 { 1.0 } else { 0.0 };
            assert!((v.re - target).abs() < 1e-10, "k={}: {v}", i as i64 - 10);
        }
        let poles = f.pole_set();
        assert_eq!(poles.len(), 2 * n);
        assert!(poles[n..].iter().all(|z| z.abs() > 1.0));
    }

    #[test]
    fn mirror_boundary_leaves_interior_alone() {
        let p = params(1.0);
        let f = build_h4(&p, 30).unwrap();
        let values: Vec<f64> = (0..400).map(|i| ((i as f64) * 0.1).sin()).collect();
        let input = SampledSignal::from_real(0.0, 1.0, values, Domain::Time).unwrap();
        let a = apply_filter(&f, &input, Boundary::ZeroPad).unwrap();
        let b = apply_filter(&f, &input, Boundary::Mirror).unwrap();
        for i in 160..240 {
            assert!((a.values()[i] - b.values()[i]).norm() < 1e-12);
        }
        // a constant survives mirror extension up to the DC gain
        let c = SampledSignal::from_real(0.0, 1.0, vec![1.0; 50], Domain::Time).unwrap();
        let out = apply_filter(&f, &c, Boundary::Mirror).unwrap();
        let dc = f.frequency_response(0.0).re;
        assert!(out.values().iter().all(|v| (v.re - dc).abs() < 1e-10 * dc));
    }

    #[test]
    fn rejects_unstable_cascade() {
        let err = RationalFilter::new(vec![1.0], vec![1.0, -1.5], vec![1.5], Realization::CascadeOrder1, 1.0);
        assert!(err.is_err());
        let err = RationalFilter::new(vec![1.0], vec![2.0], vec![], Realization::Fir, 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = params(1.0);
        for f in [
            build_h1(&p, 10),
            build_h2(&p, 10),
            build_h3(&p, 10),
            build_h4(&p, 10).unwrap(),
        ] {
            let s = serde_json::to_string(&f).unwrap();
            let g: RationalFilter = serde_json::from_str(&s).unwrap();
            for k in 0..64 {
                let theta = 2.0 * PI * k as f64 / 64.0;
                assert!((f.frequency_response(theta) - g.frequency_response(theta)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn order_economy() {
        let p = params(0.5);
        let policy = TruncationPolicy::default();
        let n1 = select_order(&p, FilterKind::H1, 1e-12, &policy).unwrap();
        let n3 = select_order(&p, FilterKind::H3, 1e-12, &policy).unwrap();
        assert!(n1 < n3, "{n1} vs {n3}");
    }

    #[test]
    fn ortho_samples_match_dense_evaluation() {
        let policy = TruncationPolicy::default();
        for &lb in &[0.5, 1.0, 1.5] {
            let p = params(lb);
            let s = phi_ortho_samples(&p, -30..=12, &policy).unwrap();
            for (x, v) in s.iter() {
                let dense = phi_ortho_time(x, &p, &policy).unwrap();
                assert!((v.re - dense).abs() < 1e-12, "lb={lb} x={x}: {} vs {dense}", v.re);
            }
            if lb == 1.0 {
                assert!(s.values()[0].norm() < 1e-15);
            }
        }
    }
}
