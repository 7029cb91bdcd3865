//! The Jüttner (relativistic Maxwell) speed distribution of an ideal gas at
//! `alpha = m c^2 / k T`.
//!
//! Sampling works on the kinetic variable `k = gamma - 1`, whose density is
//! proportional to `(1 + k) sqrt(k (k + 2)) exp(-alpha k)`. Two exact
//! rejection envelopes cover the range of `alpha`:
//!
//! * hot gas (`alpha < 1`): `(1 + k)^2 exp(-alpha k)`, a mixture of
//!   Gamma(1), Gamma(2) and Gamma(3) variates;
//! * cold gas (`alpha >= 1`): `sqrt(2 k) (1 + k)^2 exp(-alpha k)`, a mixture
//!   of Gamma(3/2), Gamma(5/2) and Gamma(7/2) whose leading term is the
//!   Maxwell distribution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::lorentz_gamma_of_speed;
use crate::numerics::{Integrator, RandomStream};
use crate::special_functions::{bessel_k_ratio, bessel_k_scaled};

/// Below this `alpha` the hot-gas envelope is used.
pub const ENVELOPE_SWITCH_ALPHA: f64 = 1.0;

/// Parameters of the canonical ensemble of radiators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    /// `m c^2 / k T`.
    pub alpha: f64,
    /// Proper frequency of the radiators, in any frequency unit.
    pub omega0: f64,
    /// Mean radiated intensity in the rest frame, in any power unit.
    pub intensity0: f64,
}

impl EnsembleParams {
    pub fn new(alpha: f64, omega0: f64, intensity0: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::domain("omega0", omega0, "omega0 > 0, finite"));
        }
        if !(intensity0 >= 0.0) || !intensity0.is_finite() {
            return Err(Error::domain(
                "intensity0",
                intensity0,
                "intensity0 >= 0, finite",
            ));
        }
        Ok(EnsembleParams {
            alpha,
            omega0,
            intensity0,
        })
    }

    /// Dimensionless ensemble: `omega0 = 1`, `intensity0 = 1`.
    pub fn dimensionless(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 1.0)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain("alpha", alpha, "alpha > 0, finite"));
    }
    Ok(())
}

/// One draw of the emission variables: speed and line-of-sight cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionSample {
    pub beta: f64,
    pub cos_theta: f64,
}

/// `gamma - 1` without cancellation.
#[inline]
pub(crate) fn gamma_minus_one(beta: f64) -> f64 {
    let b2 = beta * beta;
    let g = lorentz_gamma_of_speed(beta);
    b2 * g * g / (g + 1.0)
}

/// Speed from `k = gamma - 1`.
#[inline]
pub fn beta_from_kinetic(k: f64) -> f64 {
    (k * (k + 2.0)).sqrt() / (1.0 + k)
}

/// Normalized Jüttner density of the speed `beta`.
pub fn juttner_pdf(beta: f64, alpha: f64) -> Result<f64> {
    Ok(ln_juttner_pdf(beta, alpha)?.exp())
}

/// Natural log of [`juttner_pdf`]; `-inf` at `beta = 0`.
pub fn ln_juttner_pdf(beta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain("beta", beta, "0 <= beta < 1"));
    }
    if beta == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let g = lorentz_gamma_of_speed(beta);
    // alpha/K2(alpha) e^{-alpha gamma} = alpha e^{-alpha (gamma-1)} / (e^alpha K2(alpha))
    let k2s = bessel_k_scaled(2, alpha)?;
    Ok(alpha.ln() + 2.0 * beta.ln() + 5.0 * g.ln() - alpha * gamma_minus_one(beta) - k2s.ln())
}

/// Typical speed scale used to place quadrature breakpoints.
fn speed_breakpoints(alpha: f64) -> Vec<f64> {
    let kt = 1.0 / alpha;
    [1.0 / 64.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|m| beta_from_kinetic(m * kt))
        .collect()
}

/// Cumulative distribution of the speed, by quadrature of the density.
pub fn juttner_cdf(beta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if beta <= 0.0 {
        return Ok(0.0);
    }
    if beta >= 1.0 {
        return Ok(1.0);
    }
    let r = Integrator::new()
        .rel_tol(1e-12)
        .points(&speed_breakpoints(alpha))
        .integrate(|b| juttner_pdf(b, alpha).unwrap_or(0.0), 0.0, beta)?;
    Ok(r.value.min(1.0))
}

/// Speed below which a fraction `q` of the ensemble lies.
pub fn juttner_quantile(q: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("q", q, "0 < q < 1"));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if juttner_cdf(mid, alpha)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ensemble mean of `sqrt(1 - beta^2)`, equal to `K_1(alpha) / K_2(alpha)`.
pub fn mean_inverse_gamma(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    bessel_k_ratio(1, 2, alpha)
}

/// Exact rejection sampler for `k = gamma - 1`.
#[derive(Debug, Clone, Copy)]
pub struct KineticSampler {
    alpha: f64,
    /// Cumulative mixture weights of the three envelope components.
    cut1: f64,
    cut2: f64,
    hot: bool,
}

impl KineticSampler {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let hot = alpha < ENVELOPE_SWITCH_ALPHA;
        // component masses relative to the first
        let (w0, w1, w2) = if hot {
            // 1/a, 2/a^2, 2/a^3
            (1.0, 2.0 / alpha, 2.0 / (alpha * alpha))
        } else {
            // G(3/2)/a^{3/2}, 2 G(5/2)/a^{5/2}, G(7/2)/a^{7/2}
            (1.0, 3.0 / alpha, 15.0 / (4.0 * alpha * alpha))
        };
        let total = w0 + w1 + w2;
        Ok(KineticSampler {
            alpha,
            cut1: w0 / total,
            cut2: (w0 + w1) / total,
            hot,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Draw `k = gamma - 1`.
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        loop {
            let u = rng.next_f64();
            let extra = if u < self.cut1 {
                0
            } else if u < self.cut2 {
                1
            } else {
                2
            };
            let mut g = 0.0;
            for _ in 0..extra {
                g += rng.next_exp();
            }
            let k;
            let accept;
            if self.hot {
                g += rng.next_exp();
                k = g / self.alpha;
                accept = (k * (k + 2.0)).sqrt() / (1.0 + k);
            } else {
                // shape extra + 3/2: one more exponential plus Z^2/2 = E cos^2(2 pi U)
                let c = (std::f64::consts::TAU * rng.next_f64()).cos();
                g += rng.next_exp() + rng.next_exp() * c * c;
                k = g / self.alpha;
                accept = (0.5 * (k + 2.0)).sqrt() / (1.0 + k);
            }
            if rng.next_f64() < accept {
                return k;
            }
        }
    }
}

/// `n` independent speeds from the Jüttner law.
pub fn juttner_sample(alpha: f64, n: usize, stream: &mut RandomStream) -> Result<Vec<f64>> {
    let sampler = KineticSampler::new(alpha)?;
    Ok((0..n)
        .map(|_| beta_from_kinetic(sampler.sample(stream)))
        .collect())
}

/// `n` independent `(beta, cos theta)` pairs with isotropic directions.
pub fn sample_emission(
    alpha: f64,
    n: usize,
    stream: &mut RandomStream,
) -> Result<Vec<EmissionSample>> {
    let sampler = KineticSampler::new(alpha)?;
    Ok((0..n)
        .map(|_| {
            let k = sampler.sample(stream);
            let cos_theta = 2.0 * stream.next_f64() - 1.0;
            EmissionSample {
                beta: beta_from_kinetic(k),
                cos_theta,
            }
        })
        .collect())
}

/// Emission draws in parallel chunks; chunk `i` uses stream `i` of `seed`.
/// The result does not depend on the number of worker threads.
pub fn sample_emission_chunked(
    alpha: f64,
    n: usize,
    seed: u64,
    chunk_size: usize,
) -> Result<Vec<EmissionSample>> {
    if chunk_size == 0 {
        return Err(Error::Config("chunk_size must be at least 1".into()));
    }
    check_alpha(alpha)?;
    let chunks = n.div_ceil(chunk_size);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = chunk_size.min(n - i * chunk_size);
            sample_emission(alpha, len, &mut RandomStream::new(seed, i as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Speeds drawn in parallel chunks; chunk `i` uses stream `i` of `seed`.
/// The result does not depend on the number of worker threads.
pub fn juttner_sample_chunked(
    alpha: f64,
    n: usize,
    seed: u64,
    chunk_size: usize,
) -> Result<Vec<f64>> {
    if chunk_size == 0 {
        return Err(Error::Config("chunk_size must be at least 1".into()));
    }
    let sampler = KineticSampler::new(alpha)?;
    let chunks = n.div_ceil(chunk_size);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = chunk_size.min(n - i * chunk_size);
            let mut rng = RandomStream::new(seed, i as u64);
            (0..len)
                .map(|_| beta_from_kinetic(sampler.sample(&mut rng)))
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// 1% critical value of the two-sided Kolmogorov-Smirnov statistic, times
/// `sqrt(n)`, for large `n`.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

const GAUSS_LEGENDRE_5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Kolmogorov-Smirnov distance between kinetic-energy samples `k = gamma - 1`
/// and the Jüttner law. Sorts `samples` in place.
///
/// The reference CDF is accumulated gap by gap in `u = sqrt(k)`, where the
/// density `2 alpha u^2 (1 + u^2) sqrt(u^2 + 2) exp(-alpha u^2) / K2s(alpha)`
/// is smooth down to the origin.
pub fn ks_distance(samples: &mut [f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if samples.is_empty() {
        return Err(Error::Data("no samples".into()));
    }
    if let Some(bad) = samples.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
        return Err(Error::Data(format!(
            "kinetic energy {bad} is not finite and >= 0"
        )));
    }
    samples.sort_by(f64::total_cmp);
    let norm = 2.0 * alpha / bessel_k_scaled(2, alpha)?;
    let density = |u: f64| {
        let u2 = u * u;
        norm * u2 * (1.0 + u2) * (u2 + 2.0).sqrt() * (-alpha * u2).exp()
    };
    // pieces no wider than a quarter of the thermal scale in u
    let scale = 0.25 / alpha.sqrt().max(1.0);
    let n = samples.len() as f64;
    let (mut cdf, mut u_prev, mut d) = (0.0f64, 0.0f64, 0.0f64);
    for (i, k) in samples.iter().enumerate() {
        let u = k.sqrt();
        let pieces = ((u - u_prev) / scale).ceil().max(1.0) as usize;
        let h = (u - u_prev) / pieces as f64;
        for j in 0..pieces {
            let mid = u_prev + (j as f64 + 0.5) * h;
            cdf += GAUSS_LEGENDRE_5
                .iter()
                .map(|(t, w)| w * density(mid + 0.5 * h * t))
                .sum::<f64>()
                * 0.5
                * h;
        }
        u_prev = u;
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    Ok(d)
}
