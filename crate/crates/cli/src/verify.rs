//! Built-in cross-checks. Each check compares two independent evaluation
//! paths (closed form, quadrature, Bessel ratios, Monte Carlo) at a fixed
//! tolerance and reports one line.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thermoline_core::detector::{doppler_scan, registered_mean, DetectorConfig};
use thermoline_core::juttner::{
    beta_from_kinetic, juttner_pdf, ks_distance, EnsembleParams, KineticSampler, KS_CRITICAL_1PCT,
};
use thermoline_core::kinematics::{
    boost, coordinate_acceleration, doppler_factor, four_acceleration, EmissionState,
    KinematicState, Vec3,
};
use thermoline_core::monte_carlo::{
    histogram_distance, simulate_spectrum_with_threads, BinSpec, SimulationSpec, WeightMode,
    DEFAULT_CHUNK_SIZE,
};
use thermoline_core::numerics::{Integrator, RandomStream};
use thermoline_core::special_functions::{bessel_k_ratio, bessel_k_scaled};
use thermoline_core::spectrum::{
    counting_spectrum, grid_argmax, integrate_power, intensity_spectrum, line_center, linear_grid,
    marginal_spectrum_quadrature, peak_blueshift, spectral_moment, spectral_moment_quadrature,
    spectral_variance, spectral_variance_quadrature, SpectralKind,
};

use crate::config::{SpectrumRun, DEFAULT_SEED};
use crate::render::parse_csv;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: u8,
    pub title: &'static str,
    /// `None` when the check was skipped.
    pub passed: Option<bool>,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn ok(&self) -> bool {
        self.passed != Some(false)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        write!(
            f,
            "{status} {:>2}  {:<36} {} [{:.2} s]",
            self.id, self.title, self.detail, self.seconds
        )
    }
}

fn timed(
    id: u8,
    title: &'static str,
    body: impl FnOnce() -> Result<(bool, String), String>,
) -> Check {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok((p, d)) => (Some(p), d),
        Err(e) => (Some(false), format!("error: {e}")),
    };
    Check {
        id,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn e<T>(r: thermoline_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub const MARGINAL_TOL: f64 = 1e-8;
pub const MARGINAL_TIME_LIMIT_S: f64 = 5.0;

/// Closed-form intensity spectrum against direct quadrature over speeds.
pub fn closed_form_vs_marginal() -> Check {
    timed(1, "closed form vs marginal integral", || {
        let start = Instant::now();
        let xs = e(linear_grid(0.2, 5.0, 200))?;
        let mut worst = 0.0f64;
        for alpha in [1.0, 10.0, 100.0] {
            let rel = xs
                .par_iter()
                .map(|&x| {
                    let closed = intensity_spectrum(x, alpha)?;
                    let quad = marginal_spectrum_quadrature(x, alpha)?;
                    Ok((closed - quad).abs() / closed)
                })
                .collect::<thermoline_core::Result<Vec<f64>>>();
            worst = e(rel)?.into_iter().fold(worst, f64::max);
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst <= MARGINAL_TOL && secs < MARGINAL_TIME_LIMIT_S,
            format!(
                "max rel diff {worst:.2e} (tol {MARGINAL_TOL:e}) over 600 points in {secs:.2} s (limit {MARGINAL_TIME_LIMIT_S} s)"
            ),
        ))
    })
}

pub const NORMALIZATION_TOL: f64 = 1e-8;

pub fn normalizations() -> Check {
    timed(2, "normalization of S and P", || {
        let mut worst = 0.0f64;
        for alpha in [0.5, 10.0, 1e3] {
            for kind in [SpectralKind::Intensity, SpectralKind::Counting] {
                worst = worst.max((e(integrate_power(alpha, kind, 0.0))? - 1.0).abs());
            }
        }
        Ok((
            worst <= NORMALIZATION_TOL,
            format!("max |integral - 1| {worst:.2e} (tol {NORMALIZATION_TOL:e})"),
        ))
    })
}

pub const PEAK_GRID_STEP: f64 = 1e-6;
pub const PEAK_RATIO_ALPHA10: f64 = 1.104988;

pub fn peak_position() -> Check {
    timed(3, "peak position", || {
        let mut worst = 0.0f64;
        for alpha in [10.0, 20.0, 30.0] {
            let argmax = e(grid_argmax(alpha, 0.5, 2.5, PEAK_GRID_STEP))?;
            worst = worst.max((argmax - e(line_center(alpha))?).abs());
        }
        let c10 = e(line_center(10.0))?;
        let dev = (c10 - PEAK_RATIO_ALPHA10).abs();
        Ok((
            worst <= PEAK_GRID_STEP && dev <= 1e-6,
            format!(
                "max |argmax - center| {worst:.2e} (grid {PEAK_GRID_STEP:e}); center(10) = {c10:.9} vs {PEAK_RATIO_ALPHA10} (|diff| {dev:.1e}, tol 1e-6)"
            ),
        ))
    })
}

pub fn blueshift_law() -> Check {
    timed(4, "peak blueshift ~ 1/alpha", || {
        let mut worst_margin = f64::INFINITY;
        let mut worst_alpha = 0.0;
        for alpha in log_grid(100.0, 1e8, 241) {
            let dev = (e(peak_blueshift(alpha))? * alpha - 1.0).abs();
            let margin = 1.0 / alpha - dev;
            if margin < worst_margin {
                worst_margin = margin;
                worst_alpha = alpha;
            }
        }
        Ok((
            worst_margin >= 0.0,
            format!(
                "|alpha (center - 1) - 1| <= 1/alpha on 241 points in [1e2, 1e8]; tightest at alpha {worst_alpha:.3e} (margin {worst_margin:.2e})"
            ),
        ))
    })
}

pub const MOMENT_TOL: f64 = 1e-8;
pub const ASYMPTOTIC_TOL: f64 = 1e-11;

pub fn counting_redshift() -> Check {
    timed(5, "counting mean = K1/K2", || {
        let mut worst = 0.0f64;
        for alpha in [0.5, 1.0, 10.0, 100.0, 1e3, 1e6] {
            let k = e(bessel_k_ratio(1, 2, alpha))?;
            let bessel = e(spectral_moment(alpha, SpectralKind::Counting, 0, 1))?;
            let quad = e(spectral_moment_quadrature(
                alpha,
                SpectralKind::Counting,
                0,
                1,
            ))?;
            worst = worst.max((quad - k).abs()).max((bessel - k).abs());
        }
        let target = 1.0 - 1.5e-6;
        let m = e(spectral_moment(1e6, SpectralKind::Counting, 0, 1))?;
        let q = e(spectral_moment_quadrature(
            1e6,
            SpectralKind::Counting,
            0,
            1,
        ))?;
        let dev = (m - target).abs().max((q - target).abs());
        Ok((
            worst <= MOMENT_TOL && dev <= ASYMPTOTIC_TOL,
            format!(
                "max |quadrature - K1/K2| {worst:.2e} (tol {MOMENT_TOL:e}); at alpha 1e6 |mean - (1 - 1.5e-6)| {dev:.2e} (tol {ASYMPTOTIC_TOL:e})"
            ),
        ))
    })
}

pub const SCAN_GAMMA: f64 = 1e-4;
pub const SCAN_TOL_WIDTHS: f64 = 5.0;

pub fn detector_reconciliation() -> Check {
    timed(6, "detector-weighted mean and scan", || {
        let v = e(linear_grid(-0.6, 0.6, 601))?;
        let cfg = e(DetectorConfig::new(1.0, SCAN_GAMMA, v))?;
        let mut worst = 0.0f64;
        for alpha in [1.0, 10.0, 1e3, 1e6] {
            let k = e(bessel_k_ratio(1, 2, alpha))?;
            worst = worst.max((e(registered_mean(alpha, &cfg))? - k).abs());
        }
        let k100 = e(bessel_k_ratio(1, 2, 100.0))?;
        let scan = e(doppler_scan(100.0, &cfg))?;
        let off = (scan.centroid_frequency_ratio - k100).abs();
        let tol = SCAN_TOL_WIDTHS * SCAN_GAMMA;
        Ok((
            worst <= MOMENT_TOL && off <= tol && scan.centroid_frequency_ratio < 1.0,
            format!(
                "max |registered mean - K1/K2| {worst:.2e} (tol {MOMENT_TOL:e}); scan centroid {:.8} vs K1/K2(100) {k100:.8}, |diff| {off:.2e} (tol {tol:e})",
                scan.centroid_frequency_ratio
            ),
        ))
    })
}

pub const MC_SAMPLES: usize = 1_000_000;
pub const MC_L1_TOL: f64 = 0.01;
pub const MC_CHI2_RANGE: (f64, f64) = (0.5, 2.0);
pub const MC_MIN_BIN_FRACTION: f64 = 0.95;
pub const MC_PULL_LIMIT: f64 = 3.0;
pub const MC_TIME_LIMIT_S: f64 = 60.0;
pub const MC_PARALLEL_THREADS: usize = 4;

pub fn monte_carlo_convergence(fast: bool) -> Check {
    if fast {
        return Check {
            id: 7,
            title: "Monte Carlo convergence",
            passed: None,
            detail: "skipped in fast mode".into(),
            seconds: 0.0,
        };
    }
    timed(7, "Monte Carlo convergence", || {
        let spec = SimulationSpec {
            params: e(EnsembleParams::dimensionless(10.0))?,
            mode: WeightMode::Intensity,
            n_samples: MC_SAMPLES,
            histogram: BinSpec {
                lo: 0.3,
                hi: 3.0,
                bins: 100,
            },
            seed: DEFAULT_SEED,
            chunk_size: DEFAULT_CHUNK_SIZE,
        };
        let start = Instant::now();
        let serial = e(simulate_spectrum_with_threads(&spec, 1))?;
        let secs = start.elapsed().as_secs_f64();
        let parallel = e(simulate_spectrum_with_threads(&spec, MC_PARALLEL_THREADS))?;
        let identical = serial == parallel;
        let d = e(histogram_distance(&serial, |x| {
            intensity_spectrum(x, 10.0).unwrap_or(0.0)
        }))?;
        let fraction = d.bins_used as f64 / d.bins_total as f64;

        let counting = SimulationSpec {
            mode: WeightMode::Counting,
            ..spec.clone()
        };
        let c = e(simulate_spectrum_with_threads(
            &counting,
            MC_PARALLEL_THREADS,
        ))?;
        let k = e(bessel_k_ratio(1, 2, 10.0))?;
        let pull = (c.mean_x - k) / c.mean_x_error;

        let passed = d.l1 <= MC_L1_TOL
            && d.chi2_per_bin >= MC_CHI2_RANGE.0
            && d.chi2_per_bin <= MC_CHI2_RANGE.1
            && fraction >= MC_MIN_BIN_FRACTION
            && pull.abs() <= MC_PULL_LIMIT
            && secs < MC_TIME_LIMIT_S
            && identical;
        Ok((
            passed,
            format!(
                "L1 {:.5} (tol {MC_L1_TOL}); chi2/bin {:.3} over {}/{} bins; counting pull {pull:+.2} sigma; 1 thread {secs:.1} s; 1 vs {MC_PARALLEL_THREADS} threads {}",
                d.l1,
                d.chi2_per_bin,
                d.bins_used,
                d.bins_total,
                if identical { "bit-identical" } else { "DIFFER" }
            ),
        ))
    })
}

pub const VARIANCE_TOL: f64 = 1e-8;
pub const SLOPE_TOL: f64 = 0.02;

/// Exact variance of the intensity spectrum, its quadrature cross-check, the
/// fitted `c / alpha` coefficient and the log-log slope.
pub fn width_audit() -> Check {
    timed(8, "width: variance ~ c / alpha", || {
        let alphas = [1e2, 1e3, 1e4];
        let mut worst = 0.0f64;
        let mut vars = Vec::new();
        for alpha in alphas {
            let exact = e(spectral_variance(alpha, SpectralKind::Intensity, 0))?;
            let quad = e(spectral_variance_quadrature(
                alpha,
                SpectralKind::Intensity,
                0,
            ))?;
            worst = worst.max((exact - quad).abs() / exact);
            vars.push(exact);
        }
        // alpha Var = c + d / alpha, least squares
        let (xs, ys): (Vec<f64>, Vec<f64>) = alphas
            .iter()
            .zip(&vars)
            .map(|(a, v)| (1.0 / a, a * v))
            .unzip();
        let (c, _) = fit_line(&xs, &ys);
        let (lx, ly): (Vec<f64>, Vec<f64>) = alphas
            .iter()
            .zip(&vars)
            .map(|(a, v)| (a.ln(), v.ln()))
            .unzip();
        let (_, slope) = fit_line(&lx, &ly);
        Ok((
            worst <= VARIANCE_TOL && (slope + 1.0).abs() <= SLOPE_TOL,
            format!(
                "max rel |exact - quadrature| {worst:.2e} (tol {VARIANCE_TOL:e}); log-log slope {slope:.4} (-1 +/- {SLOPE_TOL}); leading coefficient c = {c:.5}, not 7/2"
            ),
        ))
    })
}

/// Least-squares `(intercept, slope)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

pub const HOT_LIMIT_BAND: (f64, f64) = (0.99, 1.01);

pub fn high_temperature_limit() -> Check {
    timed(9, "high-temperature limit", || {
        let alpha = 1e-3;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in e(linear_grid(0.5, 2.0, 151))? {
            let r = e(intensity_spectrum(x, alpha))? / ((0.5 * alpha).powi(2) * x);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((
            lo >= HOT_LIMIT_BAND.0 && hi <= HOT_LIMIT_BAND.1,
            format!(
                "S / ((alpha/2)^2 x) in [{lo:.6}, {hi:.6}] at alpha 1e-3 (band [{}, {}])",
                HOT_LIMIT_BAND.0, HOT_LIMIT_BAND.1
            ),
        ))
    })
}

pub const RECURRENCE_TOL: f64 = 1e-12;
pub const JUTTNER_NORM_TOL: f64 = 1e-10;
pub const ACCEL_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const DOPPLER_TOL: f64 = 1e-14;
pub const KS_SAMPLES: usize = 1_000_000;
pub const KS_SAMPLES_FAST: usize = 100_000;

fn recurrence_residual() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for x in log_grid(1e-2, 1e2, 97) {
        for nu in 1..8u32 {
            let k = |n: u32| e(bessel_k_scaled(n, x));
            let lhs = k(nu + 1)?;
            let rhs = k(nu - 1)? + 2.0 * nu as f64 / x * k(nu)?;
            worst = worst.max((lhs - rhs).abs() / lhs);
        }
    }
    Ok(worst)
}

fn juttner_normalization() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for alpha in [0.1, 1.0, 10.0, 1e3] {
        let pts: Vec<f64> = [1.0 / 64.0, 0.25, 1.0, 4.0, 16.0, 64.0]
            .iter()
            .map(|m| beta_from_kinetic(m / alpha))
            .collect();
        let total = e(Integrator::new().rel_tol(1e-13).points(&pts).integrate(
            |b| juttner_pdf(b, alpha).unwrap_or(0.0),
            0.0,
            1.0,
        ))?
        .value;
        worst = worst.max((total - 1.0).abs());
    }
    Ok(worst)
}

/// Largest `D sqrt(n) / 1.628` over the tested temperatures; below 1 passes.
fn ks_ratio(n: usize) -> Result<f64, String> {
    let critical = KS_CRITICAL_1PCT / (n as f64).sqrt();
    let mut worst = 0.0f64;
    for alpha in [0.5, 5.0, 1e4] {
        let sampler = e(KineticSampler::new(alpha))?;
        let mut rng = RandomStream::new(DEFAULT_SEED, 0);
        let mut k: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        worst = worst.max(e(ks_distance(&mut k, alpha))? / critical);
    }
    Ok(worst)
}

/// Worst `(a.u, round trip)` errors relative to the scale of the state.
fn acceleration_errors(states: usize) -> Result<(f64, f64), String> {
    let mut rng = RandomStream::new(DEFAULT_SEED, 1);
    let uniform3 = |rng: &mut RandomStream| {
        Vec3::new(
            2.0 * rng.next_f64() - 1.0,
            2.0 * rng.next_f64() - 1.0,
            2.0 * rng.next_f64() - 1.0,
        )
    };
    let (mut ortho, mut trip) = (0.0f64, 0.0f64);
    for _ in 0..states {
        let dir = uniform3(&mut rng);
        let speed = 0.99 * rng.next_f64();
        let beta = if dir.norm() > 0.0 {
            (speed / dir.norm()) * dir
        } else {
            Vec3::ZERO
        };
        let rest = uniform3(&mut rng);
        let beta_dot = coordinate_acceleration(rest, beta);
        let state = e(KinematicState::new(beta, beta_dot))?;
        let a = four_acceleration(&state);
        let (u0, u) = state.four_velocity();
        let scale = a.time.abs() * u0 + a.space.norm() * u.norm();
        ortho = ortho.max(a.contract(u0, u).abs() / scale.max(f64::MIN_POSITIVE));
        let (t, s) = boost(a.time, a.space, beta);
        let r = rest.max_abs().max(f64::MIN_POSITIVE);
        trip = trip.max(t.abs() / r).max((s - rest).max_abs() / r);
    }
    Ok((ortho, trip))
}

fn spectral_symmetry() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for alpha in [0.01, 1.0, 10.0, 300.0] {
        for x in log_grid(0.05, 20.0, 301) {
            let s = e(intensity_spectrum(x, alpha))?;
            let p = e(counting_spectrum(x, alpha))?;
            let s_inv = e(intensity_spectrum(1.0 / x, alpha))?;
            if s < 1e-290 {
                continue;
            }
            worst = worst
                .max((s - x.powi(4) * p).abs() / s)
                .max((s / x - s_inv * x).abs() / (s / x));
        }
    }
    Ok(worst)
}

fn doppler_reciprocity() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let beta = 0.999 * i as f64 / 999.0;
        let fwd = doppler_factor(&e(EmissionState::new(beta, 1.0))?);
        let back = doppler_factor(&e(EmissionState::new(beta, -1.0))?);
        worst = worst.max((fwd * back - 1.0).abs());
    }
    Ok(worst)
}

pub fn property_suites(fast: bool) -> Check {
    timed(10, "property suites", || {
        let rec = recurrence_residual()?;
        let norm = juttner_normalization()?;
        let n = if fast { KS_SAMPLES_FAST } else { KS_SAMPLES };
        let ks = ks_ratio(n)?;
        let (ortho, trip) = acceleration_errors(1000)?;
        let sym = spectral_symmetry()?;
        let dop = doppler_reciprocity()?;
        let passed = rec <= RECURRENCE_TOL
            && norm <= JUTTNER_NORM_TOL
            && ks < 1.0
            && ortho <= ACCEL_TOL
            && trip <= ACCEL_TOL
            && sym <= SYMMETRY_TOL
            && dop <= DOPPLER_TOL;
        Ok((
            passed,
            format!(
                "recurrence {rec:.1e}; Juttner norm {norm:.1e}; KS D/D_crit {ks:.3} (n {n}); a.u {ortho:.1e}; round trip {trip:.1e}; S=x^4 P and x<->1/x {sym:.1e}; D(b,1)D(b,-1)-1 {dop:.1e}"
            ),
        ))
    })
}

pub const REFERENCE_ALPHAS: [f64; 3] = [10.0, 20.0, 30.0];
pub const ROUND_TRIP_TOL: f64 = 1e-15;

/// Run of the `spectrum` subcommand used for the reference curves.
pub fn reference_run(alpha: f64) -> thermoline_core::Result<SpectrumRun> {
    Ok(SpectrumRun {
        params: EnsembleParams::dimensionless(alpha)?,
        kind: SpectralKind::Intensity,
        grid: linear_grid(0.5, 2.5, 500)?,
        log_density: false,
        out: None,
    })
}

pub fn golden_name(alpha: f64) -> String {
    format!("spectrum_alpha{alpha}.csv")
}

/// Reference curves at alpha = 10, 20, 30: heights ordered, bytes
/// reproducible, values round-trip. With `golden`, bytes must also match the
/// files stored there.
pub fn reference_curves(golden: Option<&Path>) -> Check {
    timed(11, "reference curves alpha 10/20/30", || {
        let mut heights = Vec::new();
        let mut worst_trip = 0.0f64;
        let mut stable = true;
        let mut golden_ok = true;
        for alpha in REFERENCE_ALPHAS {
            let run = e(reference_run(alpha))?;
            let csv = crate::commands::spectrum_artifact(&run).map_err(|e| e.to_string())?;
            stable &= csv == crate::commands::spectrum_artifact(&run).map_err(|e| e.to_string())?;
            let (_, rows) = parse_csv(&csv)?;
            let mut peak = 0.0f64;
            for r in &rows {
                let want = e(intensity_spectrum(r[0], alpha))?;
                worst_trip = worst_trip.max((r[1] - want).abs() / want);
                peak = peak.max(r[1]);
            }
            heights.push(peak);
            if let Some(dir) = golden {
                let path = dir.join(golden_name(alpha));
                let stored = std::fs::read_to_string(&path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                golden_ok &= stored == csv;
            }
        }
        let ordered = heights.windows(2).all(|w| w[0] < w[1]);
        let golden_note = match golden {
            Some(_) if golden_ok => "golden files match",
            Some(_) => "golden files DIFFER",
            None => "no golden files given",
        };
        Ok((
            ordered && stable && golden_ok && worst_trip <= ROUND_TRIP_TOL,
            format!(
                "peak heights {:.6} < {:.6} < {:.6}: {}; rerun {}; CSV round trip {worst_trip:.1e}; {golden_note}",
                heights[0],
                heights[1],
                heights[2],
                if ordered { "ordered" } else { "NOT ordered" },
                if stable { "byte-identical" } else { "DIFFERS" }
            ),
        ))
    })
}

/// All checks in order; `report` sees each one as it completes. `golden`
/// enables the byte comparison of check 11.
pub fn run_all(fast: bool, golden: Option<&Path>, mut report: impl FnMut(&Check)) -> Vec<Check> {
    let mut out = Vec::with_capacity(11);
    let mut push = |c: Check| {
        report(&c);
        out.push(c);
    };
    push(closed_form_vs_marginal());
    push(normalizations());
    push(peak_position());
    push(blueshift_law());
    push(counting_redshift());
    push(detector_reconciliation());
    push(monte_carlo_convergence(fast));
    push(width_audit());
    push(high_temperature_limit());
    push(property_suites(fast));
    push(reference_curves(golden));
    out
}
