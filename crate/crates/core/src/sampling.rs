//! Prefilter, sample, reconstruct.
//!
//! A finite-energy input `f` is smoothed by the prefilter
//! `g(x) = (P_φ f)(x) = ∫ f(y) φ(y − x) dy`, sampled at `a + nλ`, and
//! rebuilt as `g̃(x) = ∑ g(a + nλ) Φ_int(x − a − nλ)`. The sup-norm error is
//! compared with `|g − g̃|² ≤ (16β/√(2π)) e^{−(π/λ)²/(2β²)} ‖f‖²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PulseParams;
use crate::pulse::{gaussian_phi, phi_int_time, OffsetInterpolant};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::signal::{Domain, Grid, SampledSignal};

/// `amplitude · e^{−(x − center)²/(2 width²)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianComponent {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(amplitude.is_finite() && center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gaussian component needs finite amplitude/center and positive width, got ({amplitude}, {center}, {width})"
            )));
        }
        Ok(Self {
            amplitude,
            center,
            width,
        })
    }

    /// The generator `φ` itself, shifted to `center`.
    pub fn generator(p: &PulseParams, center: f64) -> Self {
        Self {
            amplitude: p.beta() / (2.0 * PI).sqrt(),
            center,
            width: 1.0 / p.beta(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = (x - self.center) / self.width;
        self.amplitude * (-0.5 * d * d).exp()
    }

    /// `P_φ` of this component: again a Gaussian, of variance `w² + β^{−2}`.
    pub fn prefiltered(&self, p: &PulseParams) -> GaussianComponent {
        let s2 = self.width * self.width + 1.0 / (p.beta() * p.beta());
        GaussianComponent {
            amplitude: self.amplitude * self.width / s2.sqrt(),
            center: self.center,
            width: s2.sqrt(),
        }
    }

    /// `∫ self · other`.
    fn overlap(&self, other: &Self) -> f64 {
        let s2 = self.width * self.width + other.width * other.width;
        let d = self.center - other.center;
        self.amplitude * other.amplitude * (2.0 * PI).sqrt() * self.width * other.width / s2.sqrt()
            * (-0.5 * d * d / s2).exp()
    }
}

/// A finite sum of [`GaussianComponent`]s; the empty mixture is `f = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<GaussianComponent>) -> Self {
        Self { components }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum()
    }

    pub fn energy(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|a| self.components.iter().map(move |b| a.overlap(b)))
            .sum()
    }

    pub fn prefiltered(&self, p: &PulseParams) -> GaussianMixture {
        GaussianMixture::new(self.components.iter().map(|c| c.prefiltered(p)).collect())
    }
}

/// An input signal for the pipeline.
#[derive(Clone)]
pub enum InputSignal {
    Mixture(GaussianMixture),
    /// A function vanishing outside `support`.
    Function {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: (f64, f64),
    },
    /// Samples, read as a Riemann sum of point masses weighted by the step.
    Samples(SampledSignal),
}

impl fmt::Debug for InputSignal {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSignal::Mixture(m) => out.debug_tuple("Mixture").field(m).finish(),
            InputSignal::Function { support, .. } => out
                .debug_struct("Function")
                .field("support", support)
                .finish_non_exhaustive(),
            InputSignal::Samples(s) => out.debug_tuple("Samples").field(&s.len()).finish(),
        }
    }
}

impl InputSignal {
    pub fn zero() -> Self {
        InputSignal::Mixture(GaussianMixture::default())
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static, support: (f64, f64)) -> Result<Self> {
        if !(support.0.is_finite() && support.1.is_finite() && support.0 < support.1) {
            return Err(Error::InvalidParameter(format!("bad support {support:?}")));
        }
        Ok(InputSignal::Function {
            f: Arc::new(f),
            support,
        })
    }

    /// `f(x)`; samples are read by nearest neighbour.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InputSignal::Mixture(m) => m.eval(x),
            InputSignal::Function { f, support } => {
                if x < support.0 || x > support.1 {
                    0.0
                } else {
                    f(x)
                }
            }
            InputSignal::Samples(s) => {
                let i = ((x - s.start()) / s.step()).round();
                if i < 0.0 || i >= s.len() as f64 {
                    0.0
                } else {
                    s.values()[i as usize].re
                }
            }
        }
    }

    /// `∫ |f|²`.
    pub fn energy(&self, options: &QuadratureOptions) -> Result<f64> {
        match self {
            InputSignal::Mixture(m) => Ok(m.energy()),
            InputSignal::Function { f, support } => integrate(|y| f(y).powi(2), support.0, support.1, options),
            InputSignal::Samples(s) => Ok(s.step() * s.values().iter().map(|v| v.norm_sqr()).sum::<f64>()),
        }
    }
}

/// `g = P_φ f`, ready for evaluation.
#[derive(Debug, Clone)]
pub struct Prefiltered {
    input: InputSignal,
    closed_form: Option<GaussianMixture>,
    params: PulseParams,
    options: QuadratureOptions,
}

impl Prefiltered {
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let Some(m) = &self.closed_form {
            return Ok(m.eval(x));
        }
        let p = &self.params;
        match &self.input {
            InputSignal::Function { f, support } => {
                // φ is negligible beyond 10 widths
                let reach = 10.0 / p.beta();
                let lo = support.0.max(x - reach);
                let hi = support.1.min(x + reach);
                if lo >= hi {
                    return Ok(0.0);
                }
                integrate(|y| f(y) * gaussian_phi(y - x, p), lo, hi, &self.options)
            }
            InputSignal::Samples(s) => Ok(s.step() * s.iter().map(|(y, v)| v.re * gaussian_phi(y - x, p)).sum::<f64>()),
            InputSignal::Mixture(_) => unreachable!("mixtures use the closed form"),
        }
    }

    /// The closed-form Gaussian mixture, when the input is one.
    pub fn as_mixture(&self) -> Option<&GaussianMixture> {
        self.closed_form.as_ref()
    }
}

/// Applies the prefilter `P_φ`. Mixtures are handled in closed form, other
/// inputs by adaptive quadrature over `10/β` either side of the evaluation
/// point.
pub fn prefilter(f: &InputSignal, p: &PulseParams) -> Prefiltered {
    prefilter_with(f, p, &QuadratureOptions::default())
}

pub fn prefilter_with(f: &InputSignal, p: &PulseParams, options: &QuadratureOptions) -> Prefiltered {
    Prefiltered {
        input: f.clone(),
        closed_form: match f {
            InputSignal::Mixture(m) => Some(m.prefiltered(p)),
            _ => None,
        },
        params: *p,
        options: *options,
    }
}

/// `(16β/√(2π)) e^{−(π/λ)²/(2β²)} · energy`.
pub fn error_bound(p: &PulseParams, energy: f64) -> Result<f64> {
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "energy must be non-negative, got {energy}"
        )));
    }
    let b = p.beta();
    let w = PI / p.lambda();
    Ok(16.0 * b / (2.0 * PI).sqrt() * (-w * w / (2.0 * b * b)).exp() * energy)
}

/// Half-width of the sample window around each evaluation point. `Φ_int`
/// decays like `e^{−(λβ)²|x|/(4λ)}`, so `150λ/(λβ)²` leaves a factor
/// below `e^{−37}`.
pub fn reconstruction_window(p: &PulseParams) -> f64 {
    let lb = p.time_bandwidth();
    (40.0 * p.lambda()).max(150.0 * p.lambda() / (lb * lb))
}

/// `g̃(x) = ∑ g_n Φ_int(x − t_n)` where `t_n` are the sample positions.
///
/// The samples must sit on a grid of step `λ`; only those within
/// [`reconstruction_window`] of `x` contribute.
pub fn reconstruct(samples: &SampledSignal, p: &PulseParams, grid: &Grid) -> Result<SampledSignal> {
    if (samples.step() - p.lambda()).abs() > 1e-12 * p.lambda() {
        return Err(Error::InvalidParameter(format!(
            "sample step {} differs from lambda {}",
            samples.step(),
            p.lambda()
        )));
    }
    let window = reconstruction_window(p);
    grid.sample(Domain::Time, |x| {
        let lo = (((x - window - samples.start()) / p.lambda()).floor().max(0.0)) as usize;
        let hi = (((x + window - samples.start()) / p.lambda()).ceil() as i64).min(samples.len() as i64 - 1);
        let mut acc = 0.0;
        for i in lo..=hi.max(0) as usize {
            if i >= samples.len() {
                break;
            }
            let g = samples.values()[i].re;
            if g != 0.0 {
                acc += g * phi_int_time(x - samples.position(i), p)?;
            }
        }
        Ok(acc)
    })
}

/// Output of [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    /// `g(a + nλ)`.
    pub g_samples: SampledSignal,
    /// `g̃` on the evaluation grid.
    pub g_tilde: SampledSignal,
    /// `g` on the evaluation grid.
    pub g_exact: SampledSignal,
    /// `sup |g − g̃|` over the interior 80% of the grid.
    pub error_sup: f64,
    /// Right-hand side of the error estimate for `|g − g̃|²`.
    pub bound: f64,
    pub energy_f: f64,
    pub offset: f64,
}

impl ReconstructionResult {
    /// `error_sup² ≤ bound`.
    pub fn within_bound(&self) -> bool {
        self.error_sup * self.error_sup <= self.bound
    }
}

fn interior(len: usize) -> std::ops::Range<usize> {
    let skip = len / 10;
    skip..len - skip
}

/// Prefilters `f`, samples `g` at `offset + nλ` over the grid extended by the
/// reconstruction window, rebuilds `g̃` on `grid` and measures the error.
pub fn run_pipeline(f: &InputSignal, p: &PulseParams, grid: &Grid, offset: f64) -> Result<ReconstructionResult> {
    if !offset.is_finite() {
        return Err(Error::InvalidParameter("offset must be finite".into()));
    }
    let options = QuadratureOptions::default();
    let g = prefilter_with(f, p, &options);
    let energy_f = f.energy(&options)?;
    let lambda = p.lambda();
    let window = reconstruction_window(p);
    let n_lo = ((grid.start() - window - offset) / lambda).floor() as i64;
    let n_hi = ((grid.end() + window - offset) / lambda).ceil() as i64;
    let values = (n_lo..=n_hi)
        .map(|n| g.eval(offset + n as f64 * lambda))
        .collect::<Result<Vec<f64>>>()?;
    let g_samples = SampledSignal::from_real(offset + n_lo as f64 * lambda, lambda, values, Domain::Time)?;
    let g_tilde = reconstruct(&g_samples, p, grid)?;
    let g_exact = grid.sample(Domain::Time, |x| g.eval(x))?;
    let error_sup = interior(grid.count())
        .map(|i| (g_exact.values()[i].re - g_tilde.values()[i].re).abs())
        .fold(0.0, f64::max);
    Ok(ReconstructionResult {
        g_samples,
        g_tilde,
        g_exact,
        error_sup,
        bound: error_bound(p, energy_f)?,
        energy_f,
        offset,
    })
}

/// Output of [`run_offset_interpolation`].
#[derive(Debug, Clone)]
pub struct OffsetResult {
    /// `f(a + nλ)`.
    pub f_samples: SampledSignal,
    /// `∑ f(a + nλ) φ_int,a(x − nλ)` on the evaluation grid.
    pub f_tilde: SampledSignal,
    pub f_exact: SampledSignal,
    /// `sup |f − f̃|` over the interior 80% of the grid.
    pub error_sup: f64,
    pub offset: f64,
}

/// Rebuilds `f` itself from `f(a + nλ)` with the offset interpolant
/// `φ_int,a`. Exact (up to truncation) when `f` lies in the span of the
/// generator shifts `φ(· − nλ)`.
pub fn run_offset_interpolation(f: &InputSignal, p: &PulseParams, grid: &Grid, offset: f64) -> Result<OffsetResult> {
    let kernel = OffsetInterpolant::new(offset, p)?;
    let lambda = p.lambda();
    let range = kernel.coefficient_range();
    // φ_int,a(x − nλ) is negligible once x − nλ leaves the support of the
    // coefficients widened by the Gaussian reach
    let reach = 10.0 / p.beta();
    let span_lo = *range.start() as f64 * lambda - reach;
    let span_hi = *range.end() as f64 * lambda + reach;
    let n_lo = ((grid.start() - span_hi) / lambda).floor() as i64;
    let n_hi = ((grid.end() - span_lo) / lambda).ceil() as i64;
    let values: Vec<f64> = (n_lo..=n_hi).map(|n| f.eval(offset + n as f64 * lambda)).collect();
    let f_samples = SampledSignal::from_real(offset + n_lo as f64 * lambda, lambda, values, Domain::Time)?;
    let f_tilde = grid.sample(Domain::Time, |x| {
        Ok((n_lo..=n_hi)
            .zip(f_samples.values())
            .map(|(n, v)| v.re * kernel.time(x - n as f64 * lambda))
            .sum())
    })?;
    let f_exact = grid.sample(Domain::Time, |x| Ok(f.eval(x)))?;
    let error_sup = interior(grid.count())
        .map(|i| (f_exact.values()[i].re - f_tilde.values()[i].re).abs())
        .fold(0.0, f64::max);
    Ok(OffsetResult {
        f_samples,
        f_tilde,
        f_exact,
        error_sup,
        offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::capital_phi;

    fn params(lb: f64) -> PulseParams {
        PulseParams::new(1.0, lb).unwrap()
    }

    #[test]
    fn prefilter_of_generator_is_autocorrelation() {
        let p = params(1.0);
        let f = InputSignal::Mixture(GaussianMixture::new(vec![GaussianComponent::generator(&p, 0.0)]));
        let g = prefilter(&f, &p);
        for i in -20..=20 {
            let x = 0.37 * i as f64;
            assert!((g.eval(x).unwrap() - capital_phi(x, &p)).abs() < 1e-15);
        }
        assert_eq!(prefilter(&InputSignal::zero(), &p).eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_path_agrees_with_closed_form() {
        let p = PulseParams::new(1.3, 0.8).unwrap();
        let c = GaussianComponent::new(0.9, 0.4, 0.55).unwrap();
        let closed = prefilter(&InputSignal::Mixture(GaussianMixture::new(vec![c])), &p);
        let quad = prefilter(&InputSignal::function(move |y| c.eval(y), (-15.0, 15.0)).unwrap(), &p);
        for i in -10..=10 {
            let x = 0.5 * i as f64;
            assert!((closed.eval(x).unwrap() - quad.eval(x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn mixture_energy_matches_quadrature() {
        let m = GaussianMixture::new(vec![
            GaussianComponent::new(1.0, -1.0, 0.7).unwrap(),
            GaussianComponent::new(-0.4, 0.5, 1.2).unwrap(),
        ]);
        let q = integrate(|x| m.eval(x).powi(2), -20.0, 20.0, &QuadratureOptions::default()).unwrap();
        assert!((m.energy() - q).abs() < 1e-12);
    }

    #[test]
    fn bound_values() {
        let p = params(1.0);
        assert!((error_bound(&p, 1.0).unwrap() - 0.045_91).abs() < 1e-5);
        assert_eq!(error_bound(&p, 0.0).unwrap(), 0.0);
        let half = PulseParams::new(1.0, 0.5).unwrap();
        let ratio = error_bound(&half, 1.0).unwrap() / error_bound(&p, 1.0).unwrap();
        assert!((ratio - (-1.5 * PI * PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn delta_samples_give_kernel() {
        let p = params(1.0);
        let mut v = vec![0.0; 21];
        v[10] = 1.0;
        let s = SampledSignal::from_real(-10.0, 1.0, v, Domain::Time).unwrap();
        let grid = Grid::new(-3.0, 0.125, 49).unwrap();
        let out = reconstruct(&s, &p, &grid).unwrap();
        for (x, v) in out.iter() {
            assert_eq!(v.re, phi_int_time(x, &p).unwrap());
        }
    }

    #[test]
    fn pipeline_interpolates_and_respects_bound() {
        let p = params(1.0);
        let f = InputSignal::Mixture(GaussianMixture::new(vec![GaussianComponent::generator(&p, 0.0)]));
        let grid = Grid::new(-8.0, 0.25, 65).unwrap();
        let r = run_pipeline(&f, &p, &grid, 0.0).unwrap();
        assert!(r.within_bound(), "{} vs {}", r.error_sup, r.bound);
        for (x, v) in r.g_tilde.iter() {
            if (x - x.round()).abs() < 1e-12 {
                assert!((v.re - capital_phi(x, &p)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_input() {
        let p = params(1.0);
        let grid = Grid::new(-2.0, 0.5, 9).unwrap();
        let r = run_pipeline(&InputSignal::zero(), &p, &grid, 0.0).unwrap();
        assert_eq!(r.error_sup, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.g_tilde.values().iter().all(|v| v.re == 0.0));
    }

    #[test]
    fn offset_samples_are_interpolated() {
        let p = params(1.0);
        let f = InputSignal::Mixture(GaussianMixture::new(vec![
            GaussianComponent::new(1.0, 0.3, 0.8).unwrap()
        ]));
        let a = 0.3;
        let grid = Grid::new(-6.0 + a, 1.0, 13).unwrap();
        let r = run_pipeline(&f, &p, &grid, a).unwrap();
        for (g, e) in r.g_tilde.values().iter().zip(r.g_exact.values()) {
            assert!((g.re - e.re).abs() < 1e-10);
        }
    }

    #[test]
    fn offset_interpolant_reproduces_generator_shift() {
        let p = params(1.0);
        let f = InputSignal::Mixture(GaussianMixture::new(vec![GaussianComponent::generator(&p, 2.0)]));
        let grid = Grid::new(-6.0, 0.1, 161).unwrap();
        let r = run_offset_interpolation(&f, &p, &grid, 0.3).unwrap();
        assert!(r.error_sup < 1e-6, "{}", r.error_sup);
    }
}
