//! q-Pochhammer symbols, the theta functions θ₁ and θ₃, and the Euler and
//! Jacobi triple product identities for a real nome `0 < q < 1`.
//!
//! Every infinite series or product in this module stops only once a
//! certified tail bound is below [`TruncationPolicy::rel_tol`]. When the term
//! budget runs out first the evaluator returns [`Error::Truncation`]; nothing
//! is truncated silently.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stopping rule shared by every infinite series and product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Relative size of the certified tail at which summation stops.
    pub rel_tol: f64,
    /// Hard cap on the number of terms or factors.
    pub max_terms: usize,
}

impl TruncationPolicy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol.is_finite() && rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive and finite, got {rel_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidParameter("max_terms must be positive".into()));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-16,
            max_terms: 100_000,
        }
    }
}

/// A purely imaginary modular parameter `τ = i·t` with `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tau(f64);

impl Tau {
    /// Builds `τ = i·imag`.
    pub fn new(imag: f64) -> Result<Self> {
        if imag.is_finite() && imag > 0.0 {
            Ok(Self(imag))
        } else {
            Err(Error::InvalidParameter(format!(
                "tau must have positive finite imaginary part, got {imag}"
            )))
        }
    }

    /// `τ = i(λβ)²/(4π)` for a time-bandwidth product `λβ`.
    pub fn from_time_bandwidth(lambda_beta: f64) -> Result<Self> {
        Self::new(lambda_beta * lambda_beta / (4.0 * PI))
    }

    pub fn imag(self) -> f64 {
        self.0
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(0.0, self.0)
    }

    /// The modular image `−1/τ = i/t`.
    pub fn modular(self) -> Tau {
        Tau(1.0 / self.0)
    }

    /// `k·τ` for a positive real `k`.
    pub fn scaled(self, k: f64) -> Result<Tau> {
        Tau::new(self.0 * k)
    }

    /// `q = e^{iπτ} = e^{−πt}`.
    pub fn nome(self) -> Result<Nome> {
        Nome::new((-PI * self.0).exp())
    }
}

/// A real nome `0 < q < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Nome(f64);

impl Nome {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::InvalidParameter(format!("nome must lie in (0, 1), got {q}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The modular parameter with `e^{iπτ} = q`.
    pub fn tau(self) -> Tau {
        Tau(-self.0.ln() / PI)
    }

    /// `q²`, the base of `(q²;q²)_n`.
    pub fn squared(self) -> Nome {
        Nome(self.0 * self.0)
    }
}

/// Length of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Infinite,
}

/// `(a;q)_n = (1−a)(1−aq)···(1−aq^{n−1})`, with `(a;q)_0 = 1` and
/// `(a;q)_∞` the limit of the partial products.
///
/// For `n = ∞` the product stops once `|log ∏_{j≥k}(1−aq^j)|`, bounded by
/// `|aq^k| / ((1−q)(1−|aq^k|))`, is below the policy tolerance.
pub fn q_pochhammer(a: f64, q: Nome, n: Order, policy: &TruncationPolicy) -> Result<f64> {
    let q = q.value();
    match n {
        Order::Finite(n) => {
            let mut prod = 1.0;
            let mut aqk = a;
            for _ in 0..n {
                prod *= 1.0 - aqk;
                aqk *= q;
            }
            Ok(prod)
        }
        Order::Infinite => {
            let mut prod = 1.0;
            let mut aqk = a;
            for _ in 0..policy.max_terms {
                let x = aqk.abs();
                if x < 1.0 && x / ((1.0 - q) * (1.0 - x)) <= policy.rel_tol {
                    return Ok(prod);
                }
                prod *= 1.0 - aqk;
                if prod == 0.0 {
                    return Ok(0.0);
                }
                aqk *= q;
            }
            Err(Error::Truncation {
                what: "q-Pochhammer product",
                max_terms: policy.max_terms,
            })
        }
    }
}

/// The finite symbols `(a;q)_0, (a;q)_1, …, (a;q)_{n_max}`.
pub fn q_pochhammer_table(a: f64, q: Nome, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prod = 1.0;
    let mut aqk = a;
    out.push(prod);
    for _ in 0..n_max {
        prod *= 1.0 - aqk;
        aqk *= q.value();
        out.push(prod);
    }
    out
}

/// Which series to sum for θ₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRepresentation {
    /// `∑ q^{n²} e^{2πinz}`.
    NomeSeries,
    /// `(−iτ)^{−1/2} ∑ e^{−(iπ/τ)(z+n)²}`.
    ModularSeries,
    /// Nome series when `q ≤ e^{−π}` (that is `Im τ ≥ 1`), modular series otherwise.
    Auto,
}

/// The Jacobi theta function `θ₃(z, τ)` for purely imaginary `τ`.
///
/// `z` may carry a small imaginary part; the tail bounds account for the
/// growth of `e^{2πinz}` off the real axis.
pub fn theta3(
    z: Complex64,
    tau: Tau,
    representation: ThetaRepresentation,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let value = match resolve(representation, tau) {
        ThetaRepresentation::NomeSeries => theta3_nome(z, tau, policy)?,
        _ => theta3_modular(z, tau, policy)?,
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("theta3"))
    }
}

/// θ₃ at a real argument, where it is real and positive.
pub fn theta3_real(x: f64, tau: Tau, policy: &TruncationPolicy) -> Result<f64> {
    Ok(theta3(Complex64::new(x, 0.0), tau, ThetaRepresentation::Auto, policy)?.re)
}

fn resolve(representation: ThetaRepresentation, tau: Tau) -> ThetaRepresentation {
    match representation {
        ThetaRepresentation::Auto if tau.imag() >= 1.0 => ThetaRepresentation::NomeSeries,
        ThetaRepresentation::Auto => ThetaRepresentation::ModularSeries,
        other => other,
    }
}

fn theta3_nome(z: Complex64, tau: Tau, policy: &TruncationPolicy) -> Result<Complex64> {
    let ln_q = -PI * tau.imag();
    let x = z.re - z.re.floor();
    let y = z.im;
    let ln_r = 2.0 * PI * y.abs();
    let mut sum = Complex64::new(1.0, 0.0);
    for n in 1..=policy.max_terms {
        let nf = n as f64;
        let qn2 = (ln_q * nf * nf).exp();
        let phase = 2.0 * PI * nf * x;
        let up = Complex64::from_polar((-2.0 * PI * nf * y).exp(), phase);
        let down = Complex64::from_polar((2.0 * PI * nf * y).exp(), -phase);
        sum += (up + down) * qn2;

        // majorant 2 q^{m²} r^m for m > n, consecutive ratio q^{2m+1} r
        let m = nf + 1.0;
        let ln_next = 2f64.ln() + ln_q * m * m + ln_r * m;
        let ln_ratio = ln_q * (2.0 * m + 1.0) + ln_r;
        if ln_ratio < 0.0 {
            let tail = ln_next.exp() / (1.0 - ln_ratio.exp());
            if tail <= policy.rel_tol * sum.norm() {
                return Ok(sum);
            }
        }
    }
    Err(Error::Truncation {
        what: "theta3 nome series",
        max_terms: policy.max_terms,
    })
}

fn theta3_modular(z: Complex64, tau: Tau, policy: &TruncationPolicy) -> Result<Complex64> {
    let t = tau.imag();
    let kappa = PI / t;
    let x0 = z.re - z.re.floor();
    let y = z.im;
    let term = |u: f64| (Complex64::new(u, y).powi(2) * -kappa).exp();

    let mut sum = term(x0) + term(x0 - 1.0);
    for k in 1..=policy.max_terms {
        // every remaining shift satisfies |x0 + n| ≥ k
        let kf = k as f64;
        let ln_next = 2f64.ln() - kappa * (kf * kf - y * y);
        let ratio = (-kappa * (2.0 * kf + 1.0)).exp();
        let tail = ln_next.exp() / (1.0 - ratio);
        if tail <= policy.rel_tol * sum.norm() {
            return Ok(sum / t.sqrt());
        }
        sum += term(x0 + kf) + term(x0 - 1.0 - kf);
    }
    Err(Error::Truncation {
        what: "theta3 modular series",
        max_terms: policy.max_terms,
    })
}

/// Sums `∑_{k≥0} q^{(k+1/2)²} (−1)^k w(k)` where `|w(k)| ≤ weight(k)` and the
/// weights grow at most polynomially.
fn theta1_type_sum(
    tau: Tau,
    policy: &TruncationPolicy,
    what: &'static str,
    w: impl Fn(usize) -> f64,
    weight: impl Fn(usize) -> f64,
) -> Result<f64> {
    let ln_q = -PI * tau.imag();
    let mut sum = 0.0;
    let mut scale = 0.0;
    for k in 0..policy.max_terms {
        let kh = k as f64 + 0.5;
        let m = (ln_q * kh * kh).exp();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * m * w(k);
        scale += m * weight(k);

        let next = k + 1;
        let nh = next as f64 + 0.5;
        let m_next = (ln_q * nh * nh).exp() * weight(next);
        // ratio of consecutive majorant terms from `next` on
        let ratio = (ln_q * 2.0 * (nh + 0.5)).exp() * weight(next + 1) / weight(next);
        if ratio < 1.0 && m_next / (1.0 - ratio) <= policy.rel_tol * scale {
            return if sum.is_finite() {
                Ok(sum)
            } else {
                Err(Error::NonFinite(what))
            };
        }
    }
    Err(Error::Truncation {
        what,
        max_terms: policy.max_terms,
    })
}

/// `θ₁(z, τ) = 2 ∑_{n≥0} q^{(n+1/2)²} (−1)ⁿ sin[(2n+1)πz]` for real `z`.
///
/// The argument is first reduced with `θ₁(z+1) = −θ₁(z)`, so integer
/// arguments give an exact zero. Termination is relative to the majorant
/// `2∑ q^{(n+1/2)²}`, since the sum itself vanishes at the integers.
pub fn theta1(z: f64, tau: Tau, policy: &TruncationPolicy) -> Result<f64> {
    let n = z.round();
    let delta = z - n;
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let s = theta1_type_sum(
        tau,
        policy,
        "theta1 series",
        |k| ((2 * k + 1) as f64 * PI * delta).sin(),
        |_| 1.0,
    )?;
    Ok(2.0 * sign * s)
}

/// `θ₁′(0, τ) = 2π ∑ q^{(n+1/2)²} (−1)ⁿ (2n+1)`.
pub fn theta1_prime_at_zero(tau: Tau, policy: &TruncationPolicy) -> Result<f64> {
    let odd = |k: usize| (2 * k + 1) as f64;
    let s = theta1_type_sum(tau, policy, "theta1' series", odd, odd)?;
    Ok(2.0 * PI * s)
}

/// `θ₁‴(0, τ) = −2π³ ∑ q^{(n+1/2)²} (−1)ⁿ (2n+1)³`.
pub fn theta1_third_derivative_at_zero(tau: Tau, policy: &TruncationPolicy) -> Result<f64> {
    let cube = |k: usize| ((2 * k + 1) as f64).powi(3);
    let s = theta1_type_sum(tau, policy, "theta1''' series", cube, cube)?;
    Ok(-2.0 * PI.powi(3) * s)
}

/// `P(z) = ∏_{n≥1} (1 + q^{2n−1} z^{−1})`, the factor with
/// `θ₃(ω) = (q²;q²)_∞ |P(e^{2πiω})|²` on the real line.
pub fn half_triple_product(z: Complex64, q: Nome, policy: &TruncationPolicy) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("P(z) needs z != 0".into()));
    }
    let q = q.value();
    let q2 = q * q;
    let zinv = z.inv();
    let zinv_abs = zinv.norm();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qk = q;
    for _ in 0..policy.max_terms {
        let u = qk * zinv_abs;
        if u < 1.0 && u / ((1.0 - q2) * (1.0 - u)) <= policy.rel_tol {
            return Ok(prod);
        }
        prod *= Complex64::new(1.0, 0.0) + zinv * qk;
        qk *= q2;
    }
    Err(Error::Truncation {
        what: "P(z) product",
        max_terms: policy.max_terms,
    })
}

/// The Euler-type identities whose residuals can be audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityKind {
    /// `1 + ∑ q^{n(n−1)/2} zⁿ/(q;q)_n = ∏_{n≥0} (1 + zqⁿ)`.
    EulerProduct,
    /// `1 + ∑ zⁿ/(q;q)_n = ∏_{n≥0} (1 − zqⁿ)^{−1}` for `|z| < 1`.
    EulerReciprocal,
    /// `1 + ∑ q^{n²}/(q²;q²)_n z^{−n} = ∏_{n≥0} (1 + q^{2n+1} z^{−1})` for `|z| ≥ 1`.
    Id1,
    /// `1 + ∑ (−q)ⁿ/(q²;q²)_n z^{−n} = ∏_{n≥0} (1 + q^{2n+1} z^{−1})^{−1}` for `|z| ≥ 1`.
    Id2,
}

/// Both sides of an identity, the sum through `n = order` and the product
/// over its first `order` factors.
#[allow(clippy::needless_range_loop)]
pub fn identity_sides(kind: IdentityKind, z: Complex64, q: Nome, order: usize) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let qv = q.value();
    match kind {
        IdentityKind::EulerProduct => {
            let poch = q_pochhammer_table(qv, q, order);
            let mut lhs = one;
            let mut rhs = one;
            let mut zn = one;
            let mut qk = 1.0;
            for n in 1..=order {
                zn *= z;
                let nf = n as f64;
                lhs += zn * (qv.powf(0.5 * nf * (nf - 1.0)) / poch[n]);
                rhs *= one + z * qk;
                qk *= qv;
            }
            Ok((lhs, rhs))
        }
        IdentityKind::EulerReciprocal => {
            if z.norm() >= 1.0 {
                return Err(Error::Domain(format!(
                    "reciprocal Euler identity needs |z| < 1, got |z| = {}",
                    z.norm()
                )));
            }
            let poch = q_pochhammer_table(qv, q, order);
            let mut lhs = one;
            let mut rhs = one;
            let mut zn = one;
            let mut qk = 1.0;
            for n in 1..=order {
                zn *= z;
                lhs += zn / poch[n];
                rhs /= one - z * qk;
                qk *= qv;
            }
            Ok((lhs, rhs))
        }
        IdentityKind::Id1 | IdentityKind::Id2 => {
            if z.norm() < 1.0 {
                return Err(Error::Domain(format!(
                    "identity needs |z| >= 1, got |z| = {}",
                    z.norm()
                )));
            }
            let q2 = q.squared();
            let poch = q_pochhammer_table(q2.value(), q2, order);
            let zinv = z.inv();
            let mut lhs = one;
            let mut prod = one;
            let mut zn = one;
            let mut q_odd = qv;
            for n in 1..=order {
                zn *= zinv;
                let nf = n as f64;
                let numer = match kind {
                    IdentityKind::Id1 => qv.powf(nf * nf),
                    _ => (-qv).powi(n as i32),
                };
                lhs += zn * (numer / poch[n]);
                prod *= one + zinv * q_odd;
                q_odd *= qv * qv;
            }
            let rhs = match kind {
                IdentityKind::Id1 => prod,
                _ => prod.inv(),
            };
            Ok((lhs, rhs))
        }
    }
}

/// `|LHS_N − RHS_N|` for an identity truncated at `order`.
pub fn euler_identity_residual(kind: IdentityKind, z: Complex64, q: Nome, order: usize) -> Result<f64> {
    let (lhs, rhs) = identity_sides(kind, z, q, order)?;
    Ok((lhs - rhs).norm())
}

/// Both sides of the Jacobi triple product truncated at `order`:
/// `∑_{|n|≤N} q^{n²} zⁿ` and `∏_{n=1}^{N} (1−q^{2n})(1+q^{2n−1}z^{−1})(1+q^{2n−1}z)`.
pub fn jacobi_triple_product_sides(z: Complex64, q: Nome, order: usize) -> Result<(Complex64, Complex64)> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("triple product needs z != 0".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let qv = q.value();
    let zinv = z.inv();
    let mut lhs = one;
    let mut zp = one;
    let mut zm = one;
    let mut rhs = one;
    for n in 1..=order {
        let nf = n as f64;
        zp *= z;
        zm *= zinv;
        lhs += (zp + zm) * qv.powf(nf * nf);
        let q_odd = qv.powf(2.0 * nf - 1.0);
        rhs *= (one + zinv * q_odd) * (one + z * q_odd) * (1.0 - qv.powf(2.0 * nf));
    }
    Ok((lhs, rhs))
}

pub fn jacobi_triple_product_residual(z: Complex64, q: Nome, order: usize) -> Result<f64> {
    let (lhs, rhs) = jacobi_triple_product_sides(z, q, order)?;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_ref() -> Nome {
        Nome::new((-0.25f64).exp()).unwrap()
    }

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn pochhammer_small_orders() {
        let q = Nome::new(0.5).unwrap();
        assert_eq!(q_pochhammer(3.7, q, Order::Finite(0), &policy()).unwrap(), 1.0);

        // (q²;q²)_1 and (q²;q²)_2 at q = e^{-1/4}
        let q2 = q_ref().squared();
        let p1 = q_pochhammer(q2.value(), q2, Order::Finite(1), &policy()).unwrap();
        assert!((p1 - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((p1 - 0.393_469_340_3).abs() < 1e-10);
        let p2 = q_pochhammer(q2.value(), q2, Order::Finite(2), &policy()).unwrap();
        let expected = (1.0 - (-0.5f64).exp()) * (1.0 - (-1.0f64).exp());
        assert!((p2 - expected).abs() < 1e-15);
        assert!((p2 - 0.248_720_06).abs() < 1e-8);
    }

    #[test]
    fn pochhammer_infinite_is_cauchy_limit() {
        for &qv in &[0.1, 0.5, 0.7788, 0.94] {
            let q = Nome::new(qv).unwrap();
            let inf = q_pochhammer(qv, q, Order::Infinite, &policy()).unwrap();
            let n = (40.0 / -qv.ln()) as usize;
            let pn = q_pochhammer(qv, q, Order::Finite(n), &policy()).unwrap();
            let p2n = q_pochhammer(qv, q, Order::Finite(2 * n), &policy()).unwrap();
            assert!((pn - p2n).abs() <= 1e-13 * inf.abs());
            assert!((p2n - inf).abs() <= 1e-13 * inf.abs());
        }
    }

    #[test]
    fn pochhammer_reports_truncation() {
        let q = Nome::new(0.999).unwrap();
        let tight = TruncationPolicy::new(1e-16, 10).unwrap();
        assert!(matches!(
            q_pochhammer(0.5, q, Order::Infinite, &tight),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn nome_rejects_out_of_range() {
        assert!(Nome::new(1.2).is_err());
        assert!(Nome::new(0.0).is_err());
        assert!(Nome::new(f64::NAN).is_err());
        assert!(Tau::new(-1.0).is_err());
    }

    #[test]
    fn nome_tau_roundtrip() {
        let tau = Tau::from_time_bandwidth(1.0).unwrap();
        let q = tau.nome().unwrap();
        assert!((q.value() - (-0.25f64).exp()).abs() < 1e-16);
        assert!((q.tau().imag() - tau.imag()).abs() < 1e-15);
    }

    #[test]
    fn theta3_at_zero_reference_point() {
        // direct sum of 1 + 2∑ q^{n²} at q = e^{-1/4}; terms past n = 13 are below 1e-18
        let q = (-0.25f64).exp();
        let direct: f64 = 1.0 + 2.0 * (1..40).map(|n| q.powi(n * n)).sum::<f64>();
        let tau = Tau::from_time_bandwidth(1.0).unwrap();
        for repr in [
            ThetaRepresentation::NomeSeries,
            ThetaRepresentation::ModularSeries,
            ThetaRepresentation::Auto,
        ] {
            let v = theta3(Complex64::new(0.0, 0.0), tau, repr, &policy()).unwrap();
            assert!((v.re - direct).abs() < 1e-14, "{repr:?}: {v}");
            assert!(v.im.abs() < 1e-15);
        }
        assert!((direct - 3.544_907_701_8).abs() < 1e-9);
    }

    #[test]
    fn theta3_representations_agree_on_grid() {
        // near z = 1/2 the nome series cancels down to ~1e-4·θ₃(0) or less, so
        // agreement is measured against the sup of θ₃
        for &lb in &[0.5, 1.0, 2.0] {
            let tau = Tau::from_time_bandwidth(lb).unwrap();
            let sup = theta3_real(0.0, tau, &policy()).unwrap();
            for i in 0..101 {
                let z = Complex64::new(i as f64 / 101.0, 0.0);
                let a = theta3(z, tau, ThetaRepresentation::NomeSeries, &policy()).unwrap();
                let b = theta3(z, tau, ThetaRepresentation::ModularSeries, &policy()).unwrap();
                assert!((a - b).norm() < 1e-12 * sup, "lb={lb} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn theta3_representations_agree_off_axis() {
        let tau = Tau::from_time_bandwidth(1.0).unwrap();
        let z = Complex64::new(0.3, 0.05);
        let a = theta3(z, tau, ThetaRepresentation::NomeSeries, &policy()).unwrap();
        let b = theta3(z, tau, ThetaRepresentation::ModularSeries, &policy()).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn theta3_is_periodic_and_bounded_below() {
        let tau = Tau::from_time_bandwidth(1.5).unwrap();
        let floor = theta3_real(0.5, tau, &policy()).unwrap();
        assert!(floor > 0.0);
        for i in 0..200 {
            let x = -2.0 + i as f64 * 0.0231;
            let v = theta3_real(x, tau, &policy()).unwrap();
            let w = theta3_real(x + 1.0, tau, &policy()).unwrap();
            assert!((v - w).abs() < 1e-13 * v);
            assert!(v >= floor * (1.0 - 1e-14));
        }
    }

    #[test]
    fn theta1_basic_symmetries() {
        let tau = Tau::from_time_bandwidth(1.0).unwrap().modular();
        assert_eq!(theta1(0.0, tau, &policy()).unwrap(), 0.0);
        assert_eq!(theta1(3.0, tau, &policy()).unwrap(), 0.0);
        for &z in &[0.1, 0.37, 0.5, 1.8] {
            let a = theta1(z, tau, &policy()).unwrap();
            let b = theta1(-z, tau, &policy()).unwrap();
            assert!((a + b).abs() < 1e-30 + 1e-15 * a.abs());
        }
    }

    #[test]
    fn theta1_at_half_reference_point() {
        // λβ = 1: q' = e^{-4π²}, so θ₁(1/2) = 2∑ q'^{(n+1/2)²} ≈ 2 e^{-π²}
        let tau = Tau::from_time_bandwidth(1.0).unwrap().modular();
        let v = theta1(0.5, tau, &policy()).unwrap();
        let qp = (-4.0 * PI * PI).exp();
        let direct = 2.0 * (qp.powf(0.25) + qp.powf(2.25));
        assert!((v - direct).abs() < 1e-15 * direct);
        assert!((v / (2.0 * (-PI * PI).exp()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta1_prime_matches_central_difference() {
        for &lb in &[1.0, 3.0, 5.0] {
            let tau = Tau::from_time_bandwidth(lb).unwrap().modular();
            let d = theta1_prime_at_zero(tau, &policy()).unwrap();
            assert!(d > 0.0);
            let h = 1e-6;
            let fd = (theta1(h, tau, &policy()).unwrap() - theta1(-h, tau, &policy()).unwrap()) / (2.0 * h);
            assert!(
                (fd - d).abs() < 1e-9 * d.abs().max(1.0) || (fd - d).abs() < 1e-9,
                "lb={lb}"
            );
        }
        // λβ = 1: 2π q'^{1/4}(1 − 3q'^2 + …), the correction is far below rounding
        let tau = Tau::from_time_bandwidth(1.0).unwrap().modular();
        let d = theta1_prime_at_zero(tau, &policy()).unwrap();
        let expected = 2.0 * PI * (-PI * PI).exp();
        assert!((d / expected - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta1_third_derivative_matches_difference_of_first() {
        let tau = Tau::from_time_bandwidth(4.0).unwrap().modular();
        let d3 = theta1_third_derivative_at_zero(tau, &policy()).unwrap();
        // θ₁(h) ≈ θ₁′h + θ₁‴h³/6
        let d1 = theta1_prime_at_zero(tau, &policy()).unwrap();
        let h = 1e-2;
        let est = 6.0 * (theta1(h, tau, &policy()).unwrap() - d1 * h) / h.powi(3);
        assert!((est - d3).abs() < 1e-3 * d3.abs());
    }

    #[test]
    fn identities_at_zero() {
        let q = q_ref();
        let z = Complex64::new(0.0, 0.0);
        for kind in [IdentityKind::EulerProduct, IdentityKind::EulerReciprocal] {
            let (l, r) = identity_sides(kind, z, q, 30).unwrap();
            assert_eq!(l, Complex64::new(1.0, 0.0));
            assert_eq!(r, Complex64::new(1.0, 0.0));
        }
        assert!(identity_sides(IdentityKind::Id1, z, q, 30).is_err());
        assert!(jacobi_triple_product_residual(z, q, 30).is_err());
    }

    #[test]
    fn identity_domains_enforced() {
        let q = q_ref();
        assert!(matches!(
            euler_identity_residual(IdentityKind::EulerReciprocal, Complex64::new(1.5, 0.0), q, 10),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            euler_identity_residual(IdentityKind::Id2, Complex64::new(0.5, 0.0), q, 10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn id1_is_euler_product_after_substitution() {
        // q → q², z → q w^{-1}
        let q = q_ref();
        for i in 0..8 {
            let w = Complex64::from_polar(1.0 + 0.1 * i as f64, 0.7 * i as f64);
            let z = w.inv() * q.value();
            let (l1, r1) = identity_sides(IdentityKind::EulerProduct, z, q.squared(), 50).unwrap();
            let (l2, r2) = identity_sides(IdentityKind::Id1, w, q, 50).unwrap();
            assert!((l1 - l2).norm() < 1e-14 * l1.norm());
            assert!((r1 - r2).norm() < 1e-14 * r1.norm());
        }
    }

    #[test]
    fn residuals_vanish_once_converged() {
        let q = q_ref();
        for i in 0..16 {
            let z = Complex64::from_polar(1.0, i as f64 * PI / 8.0);
            for kind in [IdentityKind::Id1, IdentityKind::Id2, IdentityKind::EulerProduct] {
                let r = euler_identity_residual(kind, z, q, 200).unwrap();
                assert!(r < 1e-12, "{kind:?} z={z}: {r}");
            }
            assert!(jacobi_triple_product_residual(z, q, 200).unwrap() < 1e-12);
            let zs = z * 0.6;
            assert!(euler_identity_residual(IdentityKind::EulerReciprocal, zs, q, 400).unwrap() < 1e-12);
        }
    }

    #[test]
    fn residuals_decrease_with_order() {
        let q = q_ref();
        let z = Complex64::from_polar(1.0, 0.9);
        for kind in [IdentityKind::Id1, IdentityKind::Id2] {
            let mut prev = f64::INFINITY;
            for n in (20..=140).step_by(20) {
                let r = euler_identity_residual(kind, z, q, n).unwrap();
                assert!(r < prev || r < 1e-14, "{kind:?} N={n}: {r} !< {prev}");
                prev = r;
            }
        }
    }

    #[test]
    fn jacobi_symmetric_under_inversion() {
        let q = q_ref();
        for &z in &[
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::from_polar(1.3, 0.4),
        ] {
            let (la, ra) = jacobi_triple_product_sides(z, q, 30).unwrap();
            let (lb, rb) = jacobi_triple_product_sides(z.inv(), q, 30).unwrap();
            assert!((la - lb).norm() < 1e-14 * la.norm());
            assert!((ra - rb).norm() < 1e-14 * ra.norm());
        }
    }

    #[test]
    fn half_product_factorizes_theta3() {
        let q = q_ref();
        let tau = q.tau();
        let q0 = q_pochhammer(q.squared().value(), q.squared(), Order::Infinite, &policy()).unwrap();
        for i in 0..64 {
            let w = i as f64 / 64.0;
            let p = half_triple_product(Complex64::from_polar(1.0, 2.0 * PI * w), q, &policy()).unwrap();
            let th = theta3_real(w, tau, &policy()).unwrap();
            assert!((q0 * p.norm_sqr() - th).abs() < 1e-13 * th);
        }
    }

    #[test]
    fn pinned_values_at_natural_step() {
        let q2 = q_ref().squared();
        let policy = TruncationPolicy::default();
        let one = q_pochhammer(q2.value(), q2, Order::Finite(1), &policy).unwrap();
        let two = q_pochhammer(q2.value(), q2, Order::Finite(2), &policy).unwrap();
        assert!((one - 0.393_469_340_3).abs() < 1e-10);
        assert!((two - 0.248_720_059_3).abs() < 1e-10);
        let tau = Tau::from_time_bandwidth(1.0).unwrap();
        let t = theta3_real(0.0, tau, &policy).unwrap();
        assert!((t - 3.544_907_701_8).abs() < 1e-10);
    }
}
