//! Pulse shapes in the time and frequency domains.
//!
//! Fourier transforms follow `f̂(ω) = (2π)^{−1/2} ∫ e^{−ixω} f(x) dx`.
//!
//! | function | time | frequency |
//! |----------|------|-----------|
//! | Gaussian generator `φ` | [`gaussian_phi`] | [`gaussian_phi_hat`] |
//! | unit-energy Gaussian | [`unit_energy_phi`] | [`unit_energy_phi_hat`] |
//! | autocorrelation `Φ` | [`capital_phi`] | [`capital_phi_hat`] |
//! | ISI-free kernel `Φ_int` | [`phi_int_time`] | [`phi_int_freq`] |
//! | approximation `S₀` | [`s0_time`] | [`s0_freq`] |
//! | orthonormal pulse `φ_ortho` | [`phi_ortho_time`] | [`phi_ortho_freq`] |
//! | shift-invariant interpolant `φ_int` | [`varphi_int_time`] | [`varphi_int_freq`] |
//! | offset interpolant `φ_int,a` | [`OffsetInterpolant::time`] | [`phi_int_offset_freq`] |

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::params::PulseParams;
use crate::special::{
    half_triple_product, theta1, theta1_prime_at_zero, theta1_third_derivative_at_zero, theta3_real, Tau,
    TruncationPolicy,
};

/// Half-width of the guard band around `x = 0`, in units of `λ`, inside
/// which the kernels switch to their Taylor expansion.
const GUARD_BAND: f64 = 1e-8;

fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

/// `φ(x) = β/√(2π) · e^{−β²x²/2}`, unit area.
pub fn gaussian_phi(x: f64, p: &PulseParams) -> f64 {
    let b = p.beta();
    b / sqrt_2pi() * (-0.5 * b * b * x * x).exp()
}

/// `φ̂(ω) = (2π)^{−1/2} e^{−ω²/(2β²)}`.
pub fn gaussian_phi_hat(omega: f64, p: &PulseParams) -> f64 {
    let b = p.beta();
    (-0.5 * omega * omega / (b * b)).exp() / sqrt_2pi()
}

/// The Gaussian normalized to unit energy, `β^{1/2} π^{−1/4} e^{−β²x²/2}`.
pub fn unit_energy_phi(x: f64, p: &PulseParams) -> f64 {
    let b = p.beta();
    b.sqrt() * PI.powf(-0.25) * (-0.5 * b * b * x * x).exp()
}

/// `β^{−1/2} π^{−1/4} e^{−ω²/(2β²)}`.
pub fn unit_energy_phi_hat(omega: f64, p: &PulseParams) -> f64 {
    let b = p.beta();
    PI.powf(-0.25) / b.sqrt() * (-0.5 * omega * omega / (b * b)).exp()
}

/// Autocorrelation of the generator, `Φ(x) = β/(2√π) · e^{−β²x²/4}`.
pub fn capital_phi(x: f64, p: &PulseParams) -> f64 {
    let b = p.beta();
    b / (2.0 * PI.sqrt()) * (-0.25 * b * b * x * x).exp()
}

/// `Φ̂(ω) = √(2π)|φ̂(ω)|² = (2π)^{−1/2} e^{−ω²/β²}`.
pub fn capital_phi_hat(omega: f64, p: &PulseParams) -> f64 {
    let b = p.beta();
    (-omega * omega / (b * b)).exp() / sqrt_2pi()
}

/// Time-domain interpolating kernel for step `λ` and parameter `τ = it`:
///
/// `iπτ/θ₁′(0, −1/τ) · θ₁(x/λ, −1/τ) / sinh(iπτx/λ)`.
///
/// At `x = nλ`, `n ≠ 0`, the reduced θ₁ argument is exactly zero. Near
/// `x = 0` a second-order expansion replaces the 0/0 quotient.
pub fn interpolant_time(x: f64, lambda: f64, tau: Tau) -> Result<f64> {
    let policy = TruncationPolicy::default();
    let dual = tau.modular();
    // iπτ is real and negative
    let c = -PI * tau.imag();
    let u = x / lambda;
    let d1 = theta1_prime_at_zero(dual, &policy)?;
    if u.abs() < GUARD_BAND {
        let d3 = theta1_third_derivative_at_zero(dual, &policy)?;
        return Ok(1.0 + u * u / 6.0 * (d3 / d1 - c * c));
    }
    let th = theta1(u, dual, &policy)?;
    if th == 0.0 {
        return Ok(0.0);
    }
    let v = c / d1 * th / (c * u).sinh();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("interpolating kernel"))
    }
}

/// Frequency-domain interpolating kernel,
/// `λ/√(2π) · e^{−(iπ/τ)(ω/Λ)²} / (√(−iτ) θ₃(ω/Λ, τ))`.
pub fn interpolant_freq(omega: f64, lambda: f64, tau: Tau) -> Result<f64> {
    let t = tau.imag();
    let u = omega * lambda / (2.0 * PI);
    let th = theta3_real(u, tau, &TruncationPolicy::default())?;
    Ok(lambda / sqrt_2pi() * (-PI / t * u * u).exp() / (t.sqrt() * th))
}

/// The ISI-free kernel `Φ_int(x)`, with `Φ_int(nλ) = δ_n`.
pub fn phi_int_time(x: f64, p: &PulseParams) -> Result<f64> {
    interpolant_time(x, p.lambda(), p.tau())
}

/// `Φ̂_int(ω)`, real and positive.
pub fn phi_int_freq(omega: f64, p: &PulseParams) -> Result<f64> {
    interpolant_freq(omega, p.lambda(), p.tau())
}

/// Interpolant `φ_int` of the shift-invariant space spanned by the
/// generator shifts; the `Φ_int` formulas with `τ` replaced by `2τ`.
pub fn varphi_int_time(x: f64, p: &PulseParams) -> Result<f64> {
    interpolant_time(x, p.lambda(), p.tau().scaled(2.0)?)
}

pub fn varphi_int_freq(omega: f64, p: &PulseParams) -> Result<f64> {
    interpolant_freq(omega, p.lambda(), p.tau().scaled(2.0)?)
}

/// `S₀(x) = iτ · sin(πx/λ) / sinh(iπτx/λ)`, with `S₀(0) = 1`.
pub fn s0_time(x: f64, p: &PulseParams) -> f64 {
    let t = p.tau().imag();
    let c = -PI * t;
    let u = x / p.lambda();
    if u.abs() < GUARD_BAND {
        return 1.0 - (PI * PI + c * c) * u * u / 6.0;
    }
    let n = u.round();
    let delta = u - n;
    if delta == 0.0 {
        return 0.0;
    }
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    -t * sign * (PI * delta).sin() / (c * u).sinh()
}

/// `Ŝ₀(ω) = −λ/√(2π) · sinh(π/(iτ)) / (cosh(π/(iτ)) + cosh(λω/(iτ)))`,
/// evaluated in a form that does not overflow for small `λβ`.
pub fn s0_freq(omega: f64, p: &PulseParams) -> f64 {
    let t = p.tau().imag();
    let a = PI / t;
    let b = (p.lambda() * omega / t).abs();
    let m = a.max(b);
    let num = (a - m).exp() - (-a - m).exp();
    let den = (a - m).exp() + (-a - m).exp() + (b - m).exp() + (-b - m).exp();
    p.lambda() / sqrt_2pi() * num / den
}

/// Bound on `∑_{k≥n} |a_k φ(x − kλ)| / max φ`, using `|a_k| ≤ q^k/Q₀`.
fn ortho_tail(p: &PulseParams, n_next: usize, u: f64) -> f64 {
    let q = p.q();
    let nf = n_next as f64;
    let gauss = if nf > u { q.powf(2.0 * (nf - u).powi(2)) } else { 1.0 };
    q.powf(nf) / ((1.0 - q) * p.q0()) * gauss
}

/// `φ_ortho(x) = Q₀^{−1/2} ∑_{n≥0} (−q)ⁿ/(q²;q²)_n · φ(x − nλ)` with `φ`
/// the unit-energy Gaussian.
///
/// The coefficients are not monotone (|a₁| ≈ 1.98 at λβ = 1), so the stop
/// rule uses the majorant `|a_n| ≤ qⁿ/Q₀` together with the Gaussian decay
/// of `φ(x − nλ)` once `nλ > x`. The tolerance is relative to the peak
/// amplitude of the generator.
pub fn phi_ortho_time(x: f64, p: &PulseParams, policy: &TruncationPolicy) -> Result<f64> {
    let q = p.q();
    let q2 = q * q;
    let u = x / p.lambda();
    let mut a = 1.0;
    let mut q2n = 1.0;
    let mut sum = 0.0;
    for n in 0..policy.max_terms {
        if n > 0 {
            q2n *= q2;
            a *= -q / (1.0 - q2n);
        }
        sum += a * unit_energy_phi(x - n as f64 * p.lambda(), p);
        if ortho_tail(p, n + 1, u) <= policy.rel_tol {
            return Ok(sum / p.q0().sqrt());
        }
    }
    Err(Error::Truncation {
        what: "orthonormal pulse series",
        max_terms: policy.max_terms,
    })
}

/// `φ̂_ortho(ω) = √λ · φ̂(ω) / ((−iτ)^{1/4} Q₀^{1/2} P(e^{iλω}))`, with
/// `P(z) = ∏_{n≥1}(1 + q^{2n−1}z^{−1})`.
pub fn phi_ortho_freq(omega: f64, p: &PulseParams, policy: &TruncationPolicy) -> Result<Complex64> {
    let z = Complex64::from_polar(1.0, p.lambda() * omega);
    let pz = half_triple_product(z, p.nome(), policy)?;
    let scale = p.lambda().sqrt() * gaussian_phi_hat(omega, p) / (p.tau().imag().powf(0.25) * p.q0().sqrt());
    Ok(pz.inv() * scale)
}

/// Interpolant for samples taken at `a + nλ`:
/// `φ̂_int,a(ω) = φ̂(ω) / ∑_n φ(a + nλ) e^{−inλω}`.
///
/// The time-domain pulse is `∑_k d_k φ(x − kλ)` where `d_k` are the Fourier
/// coefficients of `1/D`, obtained by trapezoidal quadrature over one period.
#[derive(Debug, Clone)]
pub struct OffsetInterpolant {
    params: PulseParams,
    offset: f64,
    /// `(n, φ(a + nλ))` pairs with non-negligible weight.
    samples: Vec<(i64, f64)>,
    /// `d_k` for `k = first_k, first_k + 1, …`.
    first_k: i64,
    coeffs: Vec<f64>,
}

const OFFSET_FFT_POINTS: usize = 2048;
const OFFSET_FFT_MAX_POINTS: usize = 1 << 18;
const SINGULAR_RATIO: f64 = 1e-12;

fn offset_samples(a: f64, p: &PulseParams) -> Vec<(i64, f64)> {
    let reach = 10.0 / p.beta();
    let lo = ((-a - reach) / p.lambda()).floor() as i64;
    let hi = ((-a + reach) / p.lambda()).ceil() as i64;
    (lo..=hi)
        .map(|n| (n, gaussian_phi(a + n as f64 * p.lambda(), p)))
        .collect()
}

fn offset_denominator(samples: &[(i64, f64)], theta: f64) -> Complex64 {
    samples
        .iter()
        .map(|&(n, v)| Complex64::from_polar(v, -(n as f64) * theta))
        .sum()
}

/// `D` at `θ = λω` through its dual form
/// `λ⁻¹ ∑_m √(2π) φ̂((θ + 2πm)/λ) e^{ia(θ + 2πm)/λ}`, free of the
/// cancellation the direct sum suffers for small `λβ`.
fn offset_denominator_dual(a: f64, p: &PulseParams, theta: f64) -> Complex64 {
    let lambda = p.lambda();
    let lb = p.time_bandwidth();
    let reach = (10.0 * lb / (2.0 * PI)).ceil() as i64 + 1;
    let base = (theta / (2.0 * PI)).round() as i64;
    ((-base - reach)..=(-base + reach))
        .map(|m| {
            let w = (theta + 2.0 * PI * m as f64) / lambda;
            Complex64::from_polar(sqrt_2pi() * gaussian_phi_hat(w, p) / lambda, a * w)
        })
        .sum()
}

fn denominator(samples: &[(i64, f64)], a: f64, p: &PulseParams, theta: f64) -> Complex64 {
    if p.time_bandwidth() < 2.0 {
        offset_denominator_dual(a, p, theta)
    } else {
        offset_denominator(samples, theta)
    }
}

/// Fourier coefficients `d_k`, `k = −K/2 … K/2 − 1`, of `1/D` sampled at
/// `K` points.
fn offset_coefficients(samples: &[(i64, f64)], a: f64, p: &PulseParams, k_points: usize) -> Result<Vec<f64>> {
    let mut buf: Vec<Complex64> = (0..k_points)
        .map(|j| denominator(samples, a, p, 2.0 * PI * j as f64 / k_points as f64))
        .collect();
    let max = buf.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let min = buf.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
    if min < SINGULAR_RATIO * max {
        return Err(Error::SingularOffset { ratio: min / max });
    }
    for v in buf.iter_mut() {
        *v = v.inv();
    }
    FftPlanner::new().plan_fft_inverse(k_points).process(&mut buf);
    let half = k_points / 2;
    Ok((0..k_points)
        .map(|i| buf[(i + half) % k_points].re / k_points as f64)
        .collect())
}

impl OffsetInterpolant {
    pub fn new(offset: f64, p: &PulseParams) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        let samples = offset_samples(offset, p);
        let mut k_points = OFFSET_FFT_POINTS;
        let coeffs = loop {
            let coeffs = offset_coefficients(&samples, offset, p, k_points)?;
            let peak = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let edge = coeffs[0].abs().max(coeffs[coeffs.len() - 1].abs());
            if edge <= 1e-13 * peak {
                break coeffs;
            }
            if k_points >= OFFSET_FFT_MAX_POINTS {
                return Err(Error::Truncation {
                    what: "offset interpolant coefficients",
                    max_terms: k_points,
                });
            }
            k_points *= 2;
        };
        let half = (k_points / 2) as i64;
        let peak = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        // the transform leaves a noise floor near 1e−16·peak
        let keep = |c: &f64| c.abs() > 1e-15 * peak;
        let first = coeffs.iter().position(keep).unwrap_or(0);
        let last = coeffs.iter().rposition(keep).unwrap_or(coeffs.len() - 1);
        Ok(Self {
            params: *p,
            offset,
            samples,
            first_k: first as i64 - half,
            coeffs: coeffs[first..=last].to_vec(),
        })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `D(ω) = ∑_n φ(a + nλ) e^{−inλω}`.
    pub fn denominator(&self, omega: f64) -> Complex64 {
        denominator(&self.samples, self.offset, &self.params, self.params.lambda() * omega)
    }

    pub fn freq(&self, omega: f64) -> Complex64 {
        Complex64::new(gaussian_phi_hat(omega, &self.params), 0.0) / self.denominator(omega)
    }

    pub fn time(&self, x: f64) -> f64 {
        let lambda = self.params.lambda();
        let reach = 10.0 / self.params.beta();
        let last = self.first_k + self.coeffs.len() as i64 - 1;
        let lo = (((x - reach) / lambda).floor() as i64).max(self.first_k);
        let hi = (((x + reach) / lambda).ceil() as i64).min(last);
        (lo..=hi)
            .map(|k| self.coeffs[(k - self.first_k) as usize] * gaussian_phi(x - k as f64 * lambda, &self.params))
            .sum()
    }

    /// The range of `k` carrying non-negligible `d_k`.
    pub fn coefficient_range(&self) -> std::ops::RangeInclusive<i64> {
        self.first_k..=self.first_k + self.coeffs.len() as i64 - 1
    }
}

/// `φ̂_int,a(ω)`; fails when the denominator at `ω` is below `1e−12` of its
/// absolute sum.
pub fn phi_int_offset_freq(omega: f64, offset: f64, p: &PulseParams) -> Result<Complex64> {
    let samples = offset_samples(offset, p);
    let d = denominator(&samples, offset, p, p.lambda() * omega);
    let scale: f64 = samples.iter().map(|(_, v)| v.abs()).sum();
    if d.norm() < SINGULAR_RATIO * scale {
        return Err(Error::SingularOffset {
            ratio: d.norm() / scale,
        });
    }
    Ok(Complex64::new(gaussian_phi_hat(omega, p), 0.0) / d)
}
