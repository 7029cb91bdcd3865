//! Registration of the line by a resonant detector.
//!
//! The detector weights each frequency by `(x_d / x)^p` and responds through
//! a unit-area Lorentzian of full width `gamma_d` centred at `x_d (1 + v)`,
//! where `v` is the drive velocity (first-order Doppler). Sweeping `v` turns
//! the line profile into a count-rate curve whose centroid locates the
//! registered frequency.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::juttner::check_alpha;
use crate::numerics::Integrator;
use crate::spectrum::{integrate_power, integrate_weighted, SpectralKind};

pub const DEFAULT_WEIGHT_EXPONENT: u32 = 4;

/// Offsets of the quadrature breakpoints around the resonance, in widths.
const LORENTZ_OFFSETS: [f64; 4] = [0.0, 1.0, 5.0, 25.0];

const SCAN_REL_TOL: f64 = 1e-10;

/// Placement of the resonant element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// The resonance itself registers: the line shows up as a peak.
    Detector,
    /// A resonant absorber in front of a broadband counter: the line shows
    /// up as a dip in the transmitted rate.
    Absorber,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Detector => "detector",
            Geometry::Absorber => "absorber",
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detector" => Ok(Geometry::Detector),
            "absorber" => Ok(Geometry::Absorber),
            other => Err(Error::Config(format!(
                "unknown geometry '{other}' (expected detector or absorber)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Resonance frequency over the proper frequency.
    pub x_d: f64,
    /// Full width at half maximum of the resonance, in units of the proper
    /// frequency.
    pub gamma_d: f64,
    pub weight_exponent: u32,
    /// Strictly monotone drive velocities in units of `c`.
    pub drive_velocities: Vec<f64>,
    pub geometry: Geometry,
}

impl DetectorConfig {
    /// Detector geometry with the default weight exponent.
    pub fn new(x_d: f64, gamma_d: f64, drive_velocities: Vec<f64>) -> Result<Self> {
        let cfg = DetectorConfig {
            x_d,
            gamma_d,
            weight_exponent: DEFAULT_WEIGHT_EXPONENT,
            drive_velocities,
            geometry: Geometry::Detector,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_exponent(mut self, weight_exponent: u32) -> Self {
        self.weight_exponent = weight_exponent;
        self
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_d > 0.0) || !self.x_d.is_finite() {
            return Err(Error::domain("x_d", self.x_d, "x_d > 0, finite"));
        }
        if !(self.gamma_d > 0.0) || !self.gamma_d.is_finite() {
            return Err(Error::domain(
                "gamma_d",
                self.gamma_d,
                "gamma_d > 0, finite",
            ));
        }
        check_velocities(&self.drive_velocities)
    }
}

fn check_velocities(v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::Config(format!(
            "a scan needs at least 2 drive velocities (got {})",
            v.len()
        )));
    }
    if let Some(bad) = v.iter().find(|v| !(v.abs() < 1.0)) {
        return Err(Error::domain("drive velocity", *bad, "|v/c| < 1"));
    }
    let ascending = v.windows(2).all(|w| w[0] < w[1]);
    let descending = v.windows(2).all(|w| w[0] > w[1]);
    if !(ascending || descending) {
        return Err(Error::Config(
            "drive velocities must be strictly monotone".into(),
        ));
    }
    Ok(())
}

/// Relative registration weight `(x_d / x)^p`.
pub fn response_weight(x: f64, cfg: &DetectorConfig) -> f64 {
    (cfg.x_d / x).powi(cfg.weight_exponent as i32)
}

/// Unit-area Lorentzian with full width at half maximum `fwhm`.
pub fn lorentzian(y: f64, fwhm: f64) -> f64 {
    let h = 0.5 * fwhm;
    h / (std::f64::consts::PI * (y * y + h * h))
}

/// Mean frequency ratio registered by the weighted detector:
/// `int x w S dx / int w S dx`.
pub fn registered_mean(alpha: f64, cfg: &DetectorConfig) -> Result<f64> {
    let p = cfg.weight_exponent as f64;
    let num = integrate_power(alpha, SpectralKind::Intensity, 1.0 - p)?;
    let den = integrate_power(alpha, SpectralKind::Intensity, -p)?;
    Ok(num / den)
}

/// Count rate against drive velocity, with its centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCurve {
    pub drive_velocities: Vec<f64>,
    pub count_rate: Vec<f64>,
    pub centroid_velocity: f64,
    /// `x_d (1 + centroid_velocity)`.
    pub centroid_frequency_ratio: f64,
    pub x_d: f64,
    pub geometry: Geometry,
}

fn resonance_points(centre: f64, gamma_d: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(2 * LORENTZ_OFFSETS.len());
    for k in LORENTZ_OFFSETS {
        for p in [centre - k * gamma_d, centre + k * gamma_d] {
            if p > 0.0 {
                pts.push(p);
            }
        }
    }
    pts
}

fn assemble<R>(cfg: &DetectorConfig, total: Option<f64>, resonant_rate: R) -> Result<ScanCurve>
where
    R: Fn(f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    // the absorber removes a fraction L / L(0) <= 1 of the weighted flux
    let depth = 0.5 * std::f64::consts::PI * cfg.gamma_d;
    let count_rate = cfg
        .drive_velocities
        .par_iter()
        .map(|&v| {
            let r = resonant_rate(cfg.x_d * (1.0 + v)).map_err(|e| Error::ScanPoint {
                velocity: v,
                source: Box::new(e),
            })?;
            Ok(match (cfg.geometry, total) {
                (Geometry::Absorber, Some(t)) => (t - depth * r).max(0.0),
                _ => r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curve = ScanCurve {
        drive_velocities: cfg.drive_velocities.clone(),
        count_rate,
        centroid_velocity: f64::NAN,
        centroid_frequency_ratio: f64::NAN,
        x_d: cfg.x_d,
        geometry: cfg.geometry,
    };
    curve.centroid_velocity = scan_centroid(&curve)?;
    curve.centroid_frequency_ratio = cfg.x_d * (1.0 + curve.centroid_velocity);
    Ok(curve)
}

/// Scan the intensity spectrum of the thermal ensemble at `alpha`.
pub fn doppler_scan(alpha: f64, cfg: &DetectorConfig) -> Result<ScanCurve> {
    check_alpha(alpha)?;
    let total = match cfg.geometry {
        Geometry::Absorber => Some(
            integrate_power(
                alpha,
                SpectralKind::Intensity,
                -(cfg.weight_exponent as f64),
            )? * cfg.x_d.powi(cfg.weight_exponent as i32),
        ),
        Geometry::Detector => None,
    };
    assemble(cfg, total, |centre| {
        integrate_weighted(
            alpha,
            SpectralKind::Intensity,
            |x| response_weight(x, cfg) * lorentzian(x - centre, cfg.gamma_d),
            &resonance_points(centre, cfg.gamma_d),
            SCAN_REL_TOL,
        )
    })
}

/// Scan an arbitrary source density on `x > 0`. `breakpoints` mark the
/// features of the source for the quadrature.
pub fn doppler_scan_source<F>(
    source: F,
    breakpoints: &[f64],
    cfg: &DetectorConfig,
) -> Result<ScanCurve>
where
    F: Fn(f64) -> f64 + Sync,
{
    let integrate = |f: &(dyn Fn(f64) -> f64 + Sync), extra: &[f64]| -> Result<f64> {
        let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|p| *p > 0.0).collect();
        pts.extend_from_slice(extra);
        Ok(Integrator::new()
            .rel_tol(SCAN_REL_TOL)
            .max_evaluations(2_000_000)
            .points(&pts)
            .integrate(f, 0.0, f64::INFINITY)?
            .value)
    };
    let total = match cfg.geometry {
        Geometry::Absorber => Some(integrate(&|x| source(x) * response_weight(x, cfg), &[])?),
        Geometry::Detector => None,
    };
    assemble(cfg, total, |centre| {
        integrate(
            &|x| source(x) * response_weight(x, cfg) * lorentzian(x - centre, cfg.gamma_d),
            &resonance_points(centre, cfg.gamma_d),
        )
    })
}

/// Background-subtracted, rate-weighted mean drive velocity. The background
/// is the minimum rate for a detector and the maximum for an absorber; the
/// first moment uses trapezoid weights so uneven grids are handled.
pub fn scan_centroid(curve: &ScanCurve) -> Result<f64> {
    let v = &curve.drive_velocities;
    let r = &curve.count_rate;
    if v.len() != r.len() {
        return Err(Error::Data(format!(
            "{} drive velocities but {} count rates",
            v.len(),
            r.len()
        )));
    }
    check_velocities(v)?;
    if let Some(bad) = r.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::Data(format!(
            "count rate {bad} is not a finite non-negative number"
        )));
    }
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12 * hi) {
        return Err(Error::Degenerate(format!(
            "count rate varies only within [{lo:e}, {hi:e}]"
        )));
    }
    let n = v.len();
    let mut sum = 0.0;
    let mut sum_v = 0.0;
    for i in 0..n {
        let left = if i > 0 { v[i] - v[i - 1] } else { 0.0 };
        let right = if i + 1 < n { v[i + 1] - v[i] } else { 0.0 };
        let dv = 0.5 * (left + right).abs();
        let signal = match curve.geometry {
            Geometry::Detector => r[i] - lo,
            Geometry::Absorber => hi - r[i],
        };
        sum += dv * signal;
        sum_v += dv * signal * v[i];
    }
    if !(sum > 0.0) {
        return Err(Error::Degenerate("signal vanishes on the scan grid".into()));
    }
    Ok(sum_v / sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::bessel_k_ratio;
    use crate::spectrum::linear_grid;

    fn cfg(x_d: f64, gamma_d: f64, v: Vec<f64>) -> DetectorConfig {
        DetectorConfig::new(x_d, gamma_d, v).unwrap()
    }

    fn curve(v: Vec<f64>, r: Vec<f64>, geometry: Geometry) -> ScanCurve {
        ScanCurve {
            drive_velocities: v,
            count_rate: r,
            centroid_velocity: f64::NAN,
            centroid_frequency_ratio: f64::NAN,
            x_d: 1.0,
            geometry,
        }
    }

    #[test]
    fn weight_examples() {
        let c = cfg(1.0, 1e-3, vec![-1e-3, 1e-3]);
        assert_eq!(response_weight(1.0, &c), 1.0);
        assert_eq!(response_weight(2.0, &c), 0.0625);
        let c0 = c.clone().with_exponent(0);
        for x in [1e-3, 0.5, 7.0] {
            assert_eq!(response_weight(x, &c0), 1.0);
        }
    }

    #[test]
    fn lorentzian_is_unit_area_with_stated_width() {
        let g = 2e-3;
        let area = Integrator::new()
            .points(&[-g, 0.0, g])
            .integrate(|y| lorentzian(y, g), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap()
            .value;
        assert!((area - 1.0).abs() < 1e-10, "{area}");
        assert!((lorentzian(0.5 * g, g) / lorentzian(0.0, g) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::new(0.0, 1e-3, vec![0.0, 1e-3]).is_err());
        assert!(DetectorConfig::new(1.0, -1.0, vec![0.0, 1e-3]).is_err());
        assert!(DetectorConfig::new(1.0, 1e-3, vec![0.0]).is_err());
        assert!(DetectorConfig::new(1.0, 1e-3, vec![0.0, 0.0]).is_err());
        assert!(DetectorConfig::new(1.0, 1e-3, vec![0.0, 1.0]).is_err());
        assert!(DetectorConfig::new(1.0, 1e-3, vec![1e-3, 0.0]).is_ok());
    }

    #[test]
    fn registered_mean_matches_bessel_ratios() {
        let c = cfg(1.0, 1e-3, vec![-1e-3, 1e-3]);
        for alpha in [1.0, 10.0, 1e3, 1e6] {
            let m = registered_mean(alpha, &c).unwrap();
            let k = bessel_k_ratio(1, 2, alpha).unwrap();
            assert!((m - k).abs() < 1e-8, "alpha {alpha}: {m} vs {k}");
            let raw = registered_mean(alpha, &c.clone().with_exponent(0)).unwrap();
            let k3 = bessel_k_ratio(3, 2, alpha).unwrap();
            assert!(raw > 1.0 && (raw - k3).abs() < 1e-8 * k3, "alpha {alpha}");
        }
        let m = registered_mean(1e6, &c).unwrap();
        assert!((m - (1.0 - 1.5e-6)).abs() < 1e-11, "{m}");
    }

    #[test]
    fn registered_mean_falls_with_exponent() {
        for alpha in [0.5, 3.0, 100.0] {
            let c = cfg(1.0, 1e-3, vec![-1e-3, 1e-3]);
            let means: Vec<f64> = (0..=8)
                .map(|p| registered_mean(alpha, &c.clone().with_exponent(p)).unwrap())
                .collect();
            assert!(
                means.windows(2).all(|w| w[1] < w[0]),
                "alpha {alpha}: {means:?}"
            );
        }
    }

    #[test]
    fn centroid_of_single_bin_and_symmetric_curve() {
        let v = vec![-2.0e-3, -1.0e-3, 0.5e-3, 1.0e-3, 3.0e-3];
        let c = curve(v.clone(), vec![0.0, 0.0, 5.0, 0.0, 0.0], Geometry::Detector);
        assert_eq!(scan_centroid(&c).unwrap(), 0.5e-3);

        let v0 = 0.25e-3;
        let v: Vec<f64> = (-10..=10).map(|i| v0 + i as f64 * 1e-4).collect();
        let r: Vec<f64> = v
            .iter()
            .map(|v| 1.0 / (1.0 + ((v - v0) / 3e-4).powi(2)))
            .collect();
        assert!(
            (scan_centroid(&curve(v.clone(), r.clone(), Geometry::Detector)).unwrap() - v0).abs()
                < 1e-15
        );
        let dip: Vec<f64> = r.iter().map(|r| 2.0 - r).collect();
        assert!((scan_centroid(&curve(v, dip, Geometry::Absorber)).unwrap() - v0).abs() < 1e-15);
    }

    #[test]
    fn flat_or_malformed_curves_are_rejected() {
        let v = vec![-1e-3, 0.0, 1e-3];
        assert!(matches!(
            scan_centroid(&curve(v.clone(), vec![2.0; 3], Geometry::Detector)),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            scan_centroid(&curve(v.clone(), vec![0.0; 3], Geometry::Detector)),
            Err(Error::Degenerate(_))
        ));
        assert!(scan_centroid(&curve(v.clone(), vec![1.0, 2.0], Geometry::Detector)).is_err());
        assert!(scan_centroid(&curve(v, vec![1.0, -2.0, 1.0], Geometry::Detector)).is_err());
    }

    #[test]
    fn narrow_source_is_registered_at_resonance() {
        let g = 1e-3;
        let v = linear_grid(-50.0 * g, 50.0 * g, 401).unwrap();
        let c = cfg(1.0, g, v);
        let s = doppler_scan(1e12, &c).unwrap();
        assert!(
            (s.centroid_frequency_ratio - 1.0).abs() < g / 10.0,
            "{}",
            s.centroid_frequency_ratio
        );
        assert_eq!(s.centroid_velocity, scan_centroid(&s).unwrap());
    }

    #[test]
    fn synthetic_source_centroid_follows_shift() {
        let (x_c, sigma) = (1.02, 0.01);
        let gauss = move |x: f64| (-0.5 * ((x - x_c) / sigma).powi(2)).exp();
        let bps: Vec<f64> = (-8..=8).map(|k| x_c + k as f64 * sigma).collect();
        for x_d in [1.0, 1.01] {
            let v0 = x_c / x_d - 1.0;
            let v = linear_grid(v0 - 0.1, v0 + 0.1, 201).unwrap();
            let c = cfg(x_d, 1e-3, v).with_exponent(0);
            let s = doppler_scan_source(gauss, &bps, &c).unwrap();
            assert!(
                (s.centroid_velocity - v0).abs() < 1e-8,
                "x_d {x_d}: {} vs {v0}",
                s.centroid_velocity
            );
            let a = doppler_scan_source(gauss, &bps, &c.clone().with_geometry(Geometry::Absorber))
                .unwrap();
            assert!(
                (a.centroid_velocity - v0).abs() < 1e-8,
                "absorber {}",
                a.centroid_velocity
            );
        }
    }

    #[test]
    fn scan_recovers_second_order_redshift() {
        let alpha = 100.0;
        let target = bessel_k_ratio(1, 2, alpha).unwrap();
        let v = linear_grid(-0.6, 0.6, 601).unwrap();
        let errs: Vec<f64> = [1e-3, 1e-4]
            .iter()
            .map(|&g| {
                let s = doppler_scan(alpha, &cfg(1.0, g, v.clone())).unwrap();
                assert!(s.centroid_frequency_ratio < 1.0);
                (s.centroid_frequency_ratio - target).abs()
            })
            .collect();
        assert!(errs[1] < 5e-4, "{errs:?}");
        assert!(errs[1] < errs[0], "{errs:?}");
    }

    #[test]
    fn reversed_grid_gives_reversed_curve() {
        let v = linear_grid(-0.3, 0.3, 61).unwrap();
        let fwd = doppler_scan(30.0, &cfg(1.0, 1e-3, v.clone())).unwrap();
        let rev_v: Vec<f64> = v.iter().rev().copied().collect();
        let rev = doppler_scan(30.0, &cfg(1.0, 1e-3, rev_v)).unwrap();
        for (a, b) in fwd.count_rate.iter().zip(rev.count_rate.iter().rev()) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{a} {b}");
        }
        assert!((fwd.centroid_velocity - rev.centroid_velocity).abs() < 1e-12);
    }

    #[test]
    fn absorber_dip_mirrors_detector_peak() {
        let v = linear_grid(-0.4, 0.4, 81).unwrap();
        let d = doppler_scan(50.0, &cfg(1.0, 1e-3, v.clone())).unwrap();
        let a = doppler_scan(50.0, &cfg(1.0, 1e-3, v).with_geometry(Geometry::Absorber)).unwrap();
        let (imax, _) =
            d.count_rate.iter().enumerate().fold(
                (0, f64::MIN),
                |m, (i, r)| if *r > m.1 { (i, *r) } else { m },
            );
        let imin = a
            .count_rate
            .iter()
            .enumerate()
            .fold(
                (0, f64::MAX),
                |m, (i, r)| if *r < m.1 { (i, *r) } else { m },
            )
            .0;
        assert_eq!(imax, imin);
        assert!((d.centroid_velocity - a.centroid_velocity).abs() < 1e-7);
    }
}
