//! Observable line shapes of the thermal ensemble.
//!
//! Densities are dimensionless: `x = omega / omega0`, the intensity spectrum
//! `S(x)` is in units of `I0' / omega0` and the counting spectrum `P(x)` in
//! units of `1 / omega0`. Both share the kernel
//! `exp[-(alpha/2)(x + 1/x)]`, which is evaluated relative to its value at
//! `x = 1` so the densities stay representable for any `alpha`.
//!
//! ```text
//! S(x) = x      exp[-(alpha/2)(x + 1/x)] / (2 K_2(alpha))
//! P(x) = x^(-3) exp[-(alpha/2)(x + 1/x)] / (2 K_2(alpha))
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::juttner::{check_alpha, EnsembleParams};
use crate::kinematics::{beta_min, lorentz_gamma_of_speed};
use crate::numerics::Integrator;
use crate::special_functions::{bessel_k_ratio_signed, bessel_k_scaled};

/// Which registration physics a density describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralKind {
    /// Energy per unit observer time per unit frequency.
    Intensity,
    /// Number of arriving waves per unit frequency.
    Counting,
}

impl SpectralKind {
    /// Power of `x` multiplying the shared kernel.
    fn kernel_power(self) -> i32 {
        match self {
            SpectralKind::Intensity => 1,
            SpectralKind::Counting => -3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpectralKind::Intensity => "intensity",
            SpectralKind::Counting => "counting",
        }
    }
}

impl std::str::FromStr for SpectralKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intensity" => Ok(SpectralKind::Intensity),
            "counting" => Ok(SpectralKind::Counting),
            other => Err(Error::Config(format!(
                "unknown spectral kind '{other}' (expected intensity or counting)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub x: f64,
    pub density: f64,
    pub ln_density: f64,
    pub kind: SpectralKind,
}

/// A spectrum tabulated on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub params: EnsembleParams,
    pub kind: SpectralKind,
    pub points: Vec<SpectralPoint>,
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::domain("x", x, "x > 0, finite"));
    }
    Ok(())
}

/// `(alpha/2)(x + 1/x - 2) = alpha (x - 1)^2 / (2x)`, the kernel exponent
/// measured from its minimum.
#[inline]
fn excess_exponent(x: f64, alpha: f64) -> f64 {
    let d = x - 1.0;
    alpha * d * d / (2.0 * x)
}

/// `ln(2 e^alpha K_2(alpha))`.
fn ln_norm(alpha: f64) -> Result<f64> {
    Ok((2.0 * bessel_k_scaled(2, alpha)?).ln())
}

/// Natural log of the density of `kind` at `x`.
pub fn ln_density(kind: SpectralKind, x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    Ok(kind.kernel_power() as f64 * x.ln() - excess_exponent(x, alpha) - ln_norm(alpha)?)
}

pub fn density(kind: SpectralKind, x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    let k2 = 2.0 * bessel_k_scaled(2, alpha)?;
    let pow = match kind {
        SpectralKind::Intensity => x,
        SpectralKind::Counting => 1.0 / (x * x * x),
    };
    Ok(pow * (-excess_exponent(x, alpha)).exp() / k2)
}

/// Observed intensity spectrum `S(x)` in units of `I0' / omega0`.
pub fn intensity_spectrum(x: f64, alpha: f64) -> Result<f64> {
    density(SpectralKind::Intensity, x, alpha)
}

/// Counting spectrum `P(x)` in units of `1 / omega0`.
pub fn counting_spectrum(x: f64, alpha: f64) -> Result<f64> {
    density(SpectralKind::Counting, x, alpha)
}

/// Breakpoints in `gamma` where `alpha (gamma - gamma_min)` reaches a few
/// multiples of unity.
fn gamma_breakpoints(gamma_min: f64, alpha: f64) -> impl Iterator<Item = f64> {
    [0.25, 1.0, 4.0, 16.0, 64.0, 256.0]
        .into_iter()
        .map(move |m| gamma_min + m / alpha)
}

/// The direction-averaged integral
/// `∫_{b1}^{1} beta gamma^3 exp[-alpha (gamma - gamma1)] d beta`, evaluated by
/// quadrature in `beta`, where `b1 = |x^2 - 1| / (x^2 + 1)` and `gamma1` is the
/// Lorentz factor at `b1`. Returns `(integral, gamma1)`; the unscaled
/// integral is `integral * exp(-alpha gamma1)`.
pub fn marginal_beta_integral(x: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    check_x(x)?;
    let b1 = beta_min(x);
    let gamma1 = lorentz_gamma_of_speed(b1);
    let points: Vec<f64> = gamma_breakpoints(gamma1, alpha)
        .map(|g| (1.0 - 1.0 / (g * g)).sqrt())
        .collect();
    let integrand = |beta: f64| {
        let g = lorentz_gamma_of_speed(beta);
        let e = alpha * (g - gamma1);
        if e > 745.0 {
            0.0
        } else {
            beta * g * g * g * (-e).exp()
        }
    };
    let r = Integrator::new()
        .rel_tol(1e-13)
        .points(&points)
        .integrate(integrand, b1, 1.0)?;
    Ok((r.value, gamma1))
}

/// `S(x)` rebuilt from the direction-averaged speed integral,
/// `x (alpha / 2 K_2) ∫ beta gamma^3 e^{-alpha gamma} d beta`. Independent of
/// the closed form except for the shared normalization.
pub fn marginal_spectrum_quadrature(x: f64, alpha: f64) -> Result<f64> {
    let (integral, gamma1) = marginal_beta_integral(x, alpha)?;
    // e^{-alpha gamma1} / (e^{-alpha} e^alpha K2) = e^{-alpha (gamma1 - 1)} / K2s
    let k2s = bessel_k_scaled(2, alpha)?;
    Ok(x * alpha / (2.0 * k2s) * integral * (-alpha * (gamma1 - 1.0)).exp())
}

/// Peak of `S(x)`: `1/alpha + sqrt(1 + 1/alpha^2)`.
pub fn line_center(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let inv = 1.0 / alpha;
    Ok(inv + (1.0 + inv * inv).sqrt())
}

/// `line_center(alpha) - 1`, without cancellation for cold gases.
pub fn peak_blueshift(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let inv = 1.0 / alpha;
    let e = inv * inv;
    Ok(inv + e / ((1.0 + e).sqrt() + 1.0))
}

/// `(alpha/2)^2 x`, the hot-gas form of `S(x)`.
pub fn high_temperature_limit(x: f64, alpha: f64) -> f64 {
    0.25 * alpha * alpha * x
}

/// Bessel orders `(numerator, denominator)` of the weighted moment
/// `∫ x^m x^{-p} rho dx / ∫ x^{-p} rho dx`.
fn moment_orders(kind: SpectralKind, weight_exponent: i32, order: i32) -> (i32, i32) {
    // ∫ x^n exp[-(alpha/2)(x + 1/x)] dx = 2 K_{n+1}(alpha)
    let base = kind.kernel_power() - weight_exponent + 1;
    (base + order, base)
}

/// Weighted moment in closed form as a Bessel ratio, using `K_{-n} = K_n`.
pub fn spectral_moment(
    alpha: f64,
    kind: SpectralKind,
    weight_exponent: i32,
    order: i32,
) -> Result<f64> {
    check_alpha(alpha)?;
    let (num, den) = moment_orders(kind, weight_exponent, order);
    bessel_k_ratio_signed(num, den, alpha)
}

/// Weighted variance `M_2 - M_1^2` from the closed-form moments.
pub fn spectral_variance(alpha: f64, kind: SpectralKind, weight_exponent: i32) -> Result<f64> {
    let m1 = spectral_moment(alpha, kind, weight_exponent, 1)?;
    let m2 = spectral_moment(alpha, kind, weight_exponent, 2)?;
    Ok(m2 - m1 * m1)
}

/// Breakpoints in `t = ln x` where `alpha (cosh t - 1)` reaches a few
/// multiples of unity, on both sides of the peak.
fn log_breakpoints(alpha: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    for m in [0.25, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0] {
        // acosh(1 + y) = 2 asinh(sqrt(y / 2)), exact at small y
        let t = 2.0 * (0.5 * m / alpha).sqrt().asinh();
        pts.push(t);
        pts.push(-t);
    }
    pts
}

/// `alpha (cosh t - 1)` without cancellation at small `t`.
#[inline]
fn cosh_excess(t: f64, alpha: f64) -> f64 {
    let s = (0.5 * t).sinh();
    2.0 * alpha * s * s
}

/// `∫ x^q rho(x) dx` over `(0, inf)` by adaptive quadrature in `ln x`,
/// entirely in the log domain.
pub fn integrate_power(alpha: f64, kind: SpectralKind, q: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let shift = -ln_norm(alpha)?;
    // x^q rho(x) dx = exp[(q + p + 1) t - alpha(cosh t - 1) - ln 2K2s] dt
    let c = q + kind.kernel_power() as f64 + 1.0;
    let integrand = |t: f64| {
        let e = c * t - cosh_excess(t, alpha) + shift;
        if e < -745.0 {
            0.0
        } else {
            e.exp()
        }
    };
    let r = Integrator::new()
        .rel_tol(1e-13)
        .points(&log_breakpoints(alpha))
        .integrate(integrand, f64::NEG_INFINITY, f64::INFINITY)?;
    Ok(r.value)
}

/// `∫ w(x) rho(x) dx` for a general weight, by quadrature in `ln x`.
/// `extra_points` are additional breakpoints in `x`.
pub fn integrate_weighted<W>(
    alpha: f64,
    kind: SpectralKind,
    weight: W,
    extra_points: &[f64],
    rel_tol: f64,
) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    check_alpha(alpha)?;
    let shift = -ln_norm(alpha)?;
    let c = kind.kernel_power() as f64 + 1.0;
    let integrand = |t: f64| {
        let e = c * t - cosh_excess(t, alpha) + shift;
        // outside this window the density is below every double, whatever the weight
        if e < -745.0 - 40.0 * t.abs() {
            return 0.0;
        }
        let w = weight(t.exp());
        if w == 0.0 {
            0.0
        } else {
            w * e.exp()
        }
    };
    let mut points = log_breakpoints(alpha);
    points.extend(extra_points.iter().filter(|p| **p > 0.0).map(|p| p.ln()));
    let r = Integrator::new()
        .rel_tol(rel_tol)
        .max_evaluations(2_000_000)
        .points(&points)
        .integrate(integrand, f64::NEG_INFINITY, f64::INFINITY)?;
    Ok(r.value)
}

/// [`spectral_moment`] evaluated by quadrature of the density instead of
/// Bessel ratios.
pub fn spectral_moment_quadrature(
    alpha: f64,
    kind: SpectralKind,
    weight_exponent: i32,
    order: i32,
) -> Result<f64> {
    let p = weight_exponent as f64;
    let num = integrate_power(alpha, kind, order as f64 - p)?;
    let den = integrate_power(alpha, kind, -p)?;
    Ok(num / den)
}

/// Weighted variance by quadrature of the central second moment about the
/// quadrature mean; avoids the cancellation in `M_2 - M_1^2`.
pub fn spectral_variance_quadrature(
    alpha: f64,
    kind: SpectralKind,
    weight_exponent: i32,
) -> Result<f64> {
    let mean = spectral_moment_quadrature(alpha, kind, weight_exponent, 1)?;
    let p = weight_exponent;
    let den = integrate_power(alpha, kind, -p as f64)?;
    let width = 1.0 / alpha.sqrt();
    let points = [
        mean - 4.0 * width,
        mean - width,
        mean,
        mean + width,
        mean + 4.0 * width,
    ];
    let num = integrate_weighted(
        alpha,
        kind,
        |x| {
            let d = x - mean;
            d * d * x.powi(-p)
        },
        &points,
        1e-13,
    )?;
    Ok(num / den)
}

/// Evaluate a spectrum on an ascending grid. Points are computed in
/// parallel; the output order follows the grid.
pub fn tabulate(params: EnsembleParams, kind: SpectralKind, xs: &[f64]) -> Result<SpectralDensity> {
    check_alpha(params.alpha)?;
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Data(
            "spectrum grid must be strictly ascending".into(),
        ));
    }
    let points = xs
        .par_iter()
        .map(|&x| {
            Ok(SpectralPoint {
                x,
                density: density(kind, x, params.alpha)?,
                ln_density: ln_density(kind, x, params.alpha)?,
                kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralDensity {
        params,
        kind,
        points,
    })
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(lo < hi) {
        return Err(Error::Config(format!(
            "grid needs at least 2 points and lo < hi (got {points} over [{lo}, {hi}])"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut v: Vec<f64> = (0..points - 1).map(|i| lo + i as f64 * step).collect();
    v.push(hi);
    Ok(v)
}

/// Location of the largest `S(x)` on the grid `lo, lo + step, ...`.
pub fn grid_argmax(alpha: f64, lo: f64, hi: f64, step: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(step > 0.0) || !(lo > 0.0) || !(lo < hi) {
        return Err(Error::Config(
            "grid_argmax needs 0 < lo < hi and step > 0".into(),
        ));
    }
    let n = ((hi - lo) / step).floor() as usize + 1;
    let k2 = 2.0 * bessel_k_scaled(2, alpha)?;
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = lo + i as f64 * step;
            (x * (-excess_exponent(x, alpha)).exp() / k2, i)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok(lo + best.1 as f64 * step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::juttner::mean_inverse_gamma;
    use crate::special_functions::bessel_k_ratio;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reciprocal_symmetry() {
        for alpha in [0.3, 10.0, 1e3] {
            for x in [0.4, 0.9, 1.7, 3.0] {
                let s = intensity_spectrum(x, alpha).unwrap();
                let s_inv = intensity_spectrum(1.0 / x, alpha).unwrap();
                assert!(rel(s / s_inv, x * x) < 1e-12);
            }
        }
    }

    #[test]
    fn intensity_is_x4_times_counting() {
        for x in [0.2, 0.8, 1.0, 1.3, 4.0] {
            let s = intensity_spectrum(x, 7.0).unwrap();
            let p = counting_spectrum(x, 7.0).unwrap();
            assert!(rel(s, x.powi(4) * p) < 1e-13);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(intensity_spectrum(0.0, 1.0).is_err());
        assert!(counting_spectrum(-1.0, 1.0).is_err());
        assert!(intensity_spectrum(1.0, 0.0).is_err());
        assert!(line_center(-2.0).is_err());
    }

    #[test]
    fn huge_alpha_stays_finite() {
        let alpha = 1e15;
        let s = intensity_spectrum(1.0, alpha).unwrap();
        assert!(s.is_finite() && s > 0.0);
        assert_eq!(intensity_spectrum(1.5, alpha).unwrap(), 0.0);
        let l = ln_density(SpectralKind::Intensity, 1.5, alpha).unwrap();
        assert!(l.is_finite() && l < -1e13);
    }

    #[test]
    fn peak_location() {
        assert!((line_center(4.0 / 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((line_center(10.0).unwrap() - 1.104_987_562_112_089).abs() < 1e-12);
        assert!((line_center(1e12).unwrap() - 1.0).abs() < 1e-11);
        let x = grid_argmax(10.0, 0.5, 2.0, 1e-6).unwrap();
        assert!((x - line_center(10.0).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn normalizations() {
        for alpha in [0.5, 10.0, 1e3] {
            let s = integrate_power(alpha, SpectralKind::Intensity, 0.0).unwrap();
            let p = integrate_power(alpha, SpectralKind::Counting, 0.0).unwrap();
            assert!((s - 1.0).abs() < 1e-10, "S at {alpha}: {s}");
            assert!((p - 1.0).abs() < 1e-10, "P at {alpha}: {p}");
        }
    }

    #[test]
    fn marginal_matches_closed_form() {
        for (x, alpha) in [(1.0, 10.0), (3.0, 1.0), (0.25, 1.0), (1.2, 100.0)] {
            let q = marginal_spectrum_quadrature(x, alpha).unwrap();
            let c = intensity_spectrum(x, alpha).unwrap();
            assert!(rel(q, c) < 1e-10, "x {x}, alpha {alpha}: {q} vs {c}");
        }
    }

    #[test]
    fn marginal_integral_reduces_to_exponential() {
        // with u = gamma the integral is ∫ e^{-alpha u} du = e^{-alpha gamma1} / alpha
        for (x, alpha) in [(0.7, 2.0), (1.9, 0.3), (1.01, 500.0)] {
            let (scaled, gamma1) = marginal_beta_integral(x, alpha).unwrap();
            assert!(rel(scaled * alpha, 1.0) < 1e-10);
            assert!(rel(gamma1, 0.5 * (x + 1.0 / x)) < 1e-14);
        }
    }

    #[test]
    fn moments_in_bessel_form() {
        let a = 3.0;
        let k = |n| bessel_k_ratio(n, 2, a).unwrap();
        assert!(
            rel(
                spectral_moment(a, SpectralKind::Intensity, 0, 1).unwrap(),
                k(3)
            ) < 1e-15
        );
        assert!(
            rel(
                spectral_moment(a, SpectralKind::Counting, 0, 1).unwrap(),
                k(1)
            ) < 1e-15
        );
        assert!(
            rel(
                spectral_moment(a, SpectralKind::Intensity, 4, 1).unwrap(),
                k(1)
            ) < 1e-15
        );
        assert!(
            rel(
                spectral_moment(a, SpectralKind::Intensity, 0, 2).unwrap(),
                k(4)
            ) < 1e-15
        );
        assert!(spectral_moment(a, SpectralKind::Intensity, 0, 7).is_err());
    }

    #[test]
    fn moments_by_quadrature() {
        for a in [1.0, 10.0, 1e3] {
            for (kind, p) in [
                (SpectralKind::Intensity, 0),
                (SpectralKind::Counting, 0),
                (SpectralKind::Intensity, 4),
                (SpectralKind::Intensity, 2),
            ] {
                let q = spectral_moment_quadrature(a, kind, p, 1).unwrap();
                let b = spectral_moment(a, kind, p, 1).unwrap();
                assert!(rel(q, b) < 1e-10, "alpha {a} {kind:?} p={p}: {q} vs {b}");
            }
        }
        assert!(
            (spectral_moment(1e6, SpectralKind::Counting, 0, 1).unwrap()
                - mean_inverse_gamma(1e6).unwrap())
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn variance_agrees() {
        for a in [5.0, 100.0, 1e4] {
            let exact = spectral_variance(a, SpectralKind::Intensity, 0).unwrap();
            let quad = spectral_variance_quadrature(a, SpectralKind::Intensity, 0).unwrap();
            assert!(rel(quad, exact) < 1e-8, "alpha {a}: {quad} vs {exact}");
        }
    }

    #[test]
    fn hot_gas_limit() {
        assert!((high_temperature_limit(1.0, 1e-3) - 2.5e-7).abs() < 1e-20);
        assert_eq!(
            high_temperature_limit(4.0, 0.1),
            2.0 * high_temperature_limit(2.0, 0.1)
        );
        for x in [0.5, 1.0, 2.0] {
            let r = intensity_spectrum(x, 1e-3).unwrap() / high_temperature_limit(x, 1e-3);
            assert!((r - 1.0).abs() < 0.01, "{r}");
        }
    }

    #[test]
    fn tabulation() {
        let params = EnsembleParams::dimensionless(10.0).unwrap();
        let xs = linear_grid(0.5, 2.5, 5).unwrap();
        assert_eq!(xs, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        let t = tabulate(params, SpectralKind::Counting, &xs).unwrap();
        assert_eq!(t.points.len(), 5);
        assert!(t.points.iter().all(|p| p.kind == SpectralKind::Counting));
        assert!(tabulate(params, SpectralKind::Counting, &[1.0, 1.0]).is_err());
        assert!(linear_grid(1.0, 0.5, 3).is_err());
    }

    #[test]
    fn blueshift_is_stable_and_consistent() {
        for alpha in [1e-2, 1.0, 10.0, 1e3] {
            let direct = line_center(alpha).unwrap() - 1.0;
            assert!((peak_blueshift(alpha).unwrap() - direct).abs() < 1e-15 * (1.0 + direct));
        }
        // 1/alpha + 1/(2 alpha^2) - 1/(8 alpha^4)
        let b = peak_blueshift(1e8).unwrap();
        assert!((b - (1e-8 + 0.5e-16)).abs() < 1e-24 * 1e8, "{b:e}");
    }
}
