//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature.
//!
//! Every subinterval lives in one priority queue ordered by error estimate,
//! so breakpoints only seed the initial partition and the tolerance applies
//! to the total. Semi-infinite pieces are mapped onto `[0, 1)` with
//! `x = a + u / (1 - u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Abscissae of the 21-point Kronrod rule on `[-1, 1]`, descending, last is 0.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_798_508_790,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Weights of the embedded 10-point Gauss rule (nodes `XGK[1], XGK[3], ...`).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const EVALS_PER_RULE: usize = 21;

/// Absolute error floor below which any result is accepted.
pub const ABSOLUTE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `b` may be `f64::INFINITY` and `a` may be `f64::NEG_INFINITY`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    Integrator::new().rel_tol(rel_tol).integrate(f, a, b)
}

/// Configurable front end to the adaptive rule.
#[derive(Debug, Clone)]
pub struct Integrator {
    rel_tol: f64,
    max_evaluations: usize,
    points: Vec<f64>,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            rel_tol: 1e-10,
            max_evaluations: 200_000,
            points: Vec::new(),
        }
    }
}

impl Integrator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn max_evaluations(mut self, n: usize) -> Self {
        self.max_evaluations = n;
        self
    }

    /// Interior points where the initial partition is split. Points outside
    /// `(a, b)` are ignored.
    pub fn points(mut self, points: &[f64]) -> Self {
        self.points = points.to_vec();
        self
    }

    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> f64,
    {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::Data(format!(
                "integration limits must satisfy a < b (got a = {a}, b = {b})"
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Data(format!(
                "relative tolerance must be positive (got {})",
                self.rel_tol
            )));
        }

        let mut cuts: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|p| p.is_finite() && *p > a && *p < b)
            .collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        if a.is_infinite() && b.is_infinite() && cuts.is_empty() {
            cuts.push(0.0);
        }

        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);

        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        let mut value = 0.0;
        let mut error = 0.0;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let piece = if lo.is_infinite() {
                Piece::new(Map::Lower(hi), 0.0, 1.0)
            } else if hi.is_infinite() {
                Piece::new(Map::Upper(lo), 0.0, 1.0)
            } else {
                Piece::new(Map::Identity, lo, hi)
            };
            let scored = piece.evaluate(&f)?;
            value += scored.value;
            error += scored.error;
            heap.push(scored);
            evaluations += EVALS_PER_RULE;
        }

        loop {
            let target = (self.rel_tol * value.abs()).max(ABSOLUTE_FLOOR);
            if error <= target {
                // running sums drift; report a fresh sum
                let (value, error) = totals(&heap);
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    evaluations,
                });
            }
            let worst = heap.peek().expect("at least one interval");
            let mid = 0.5 * (worst.lo + worst.hi);
            let exhausted = evaluations + 2 * EVALS_PER_RULE > self.max_evaluations;
            let unsplittable = !(mid > worst.lo && mid < worst.hi)
                || (worst.hi - worst.lo) <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
            if exhausted || unsplittable {
                let (value, error) = totals(&heap);
                return Err(Error::Convergence {
                    value,
                    error_estimate: error,
                    evaluations,
                });
            }
            let worst = heap.pop().unwrap();
            let left = Piece::new(worst.map, worst.lo, mid).evaluate(&f)?;
            let right = Piece::new(worst.map, mid, worst.hi).evaluate(&f)?;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            evaluations += 2 * EVALS_PER_RULE;
        }
    }
}

fn totals(heap: &BinaryHeap<Scored>) -> (f64, f64) {
    let mut value = 0.0;
    let mut error = 0.0;
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    (value, error)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Identity,
    /// `x = a + u / (1 - u)` for `[a, inf)`.
    Upper(f64),
    /// `x = b - u / (1 - u)` for `(-inf, b]`.
    Lower(f64),
}

impl Map {
    #[inline]
    fn apply<F: Fn(f64) -> f64>(&self, f: &F, u: f64) -> f64 {
        match *self {
            Map::Identity => f(u),
            Map::Upper(a) => {
                let s = 1.0 - u;
                let y = f(a + u / s);
                if y == 0.0 {
                    0.0
                } else {
                    y / (s * s)
                }
            }
            Map::Lower(b) => {
                let s = 1.0 - u;
                let y = f(b - u / s);
                if y == 0.0 {
                    0.0
                } else {
                    y / (s * s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    map: Map,
    lo: f64,
    hi: f64,
}

impl Piece {
    fn new(map: Map, lo: f64, hi: f64) -> Self {
        Piece { map, lo, hi }
    }

    fn evaluate<F: Fn(f64) -> f64>(self, f: &F) -> Result<Scored> {
        let center = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo);
        let fc = self.map.apply(f, center);
        let mut gauss = 0.0;
        let mut kronrod = fc * WGK[10];
        let mut abs_sum = fc.abs() * WGK[10];
        let mut fv1 = [0.0; 10];
        let mut fv2 = [0.0; 10];
        for j in 0..10 {
            let dx = half * XGK[j];
            let f1 = self.map.apply(f, center - dx);
            let f2 = self.map.apply(f, center + dx);
            fv1[j] = f1;
            fv2[j] = f2;
            kronrod += WGK[j] * (f1 + f2);
            abs_sum += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * kronrod;
        let mut asc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        }

        let value = kronrod * half;
        let res_abs = abs_sum * half.abs();
        let res_asc = asc * half.abs();
        if !value.is_finite() || !res_abs.is_finite() {
            return Err(Error::Data(format!(
                "integrand is not finite on [{}, {}]",
                self.lo, self.hi
            )));
        }
        let error = rescale_error(((kronrod - gauss) * half).abs(), res_abs, res_asc);
        Ok(Scored {
            map: self.map,
            lo: self.lo,
            hi: self.hi,
            value,
            error,
        })
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err;
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    map: Map,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        for deg in 0..=31 {
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            let scored = Piece::new(Map::Identity, -1.0, 1.0)
                .evaluate(&|x: f64| x.powi(deg))
                .unwrap();
            assert!(
                (scored.value - exact).abs() < 1e-14,
                "degree {deg}: {} vs {exact}",
                scored.value
            );
        }
    }

    #[test]
    fn linear_polynomial() {
        let r = integrate_adaptive(|x| x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_adaptive(|x| (-x).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
        let r = integrate_adaptive(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-12)
            .unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // 1/sqrt(x) on (0, 1]
        let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn breakpoints_find_narrow_peak() {
        let w = 1e-7;
        let f = |x: f64| (-(x - 0.3) * (x - 0.3) / (2.0 * w * w)).exp();
        let exact = w * (2.0 * std::f64::consts::PI).sqrt();
        let points: Vec<f64> = [-8.0, -2.0, 0.0, 2.0, 8.0]
            .iter()
            .map(|k| 0.3 + k * w)
            .collect();
        let r = Integrator::new()
            .rel_tol(1e-10)
            .points(&points)
            .integrate(f, 0.0, 1.0)
            .unwrap();
        assert!(((r.value - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn reports_failure_with_best_estimate() {
        let err = Integrator::new()
            .max_evaluations(100)
            .integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0)
            .unwrap_err();
        match err {
            Error::Convergence { evaluations, .. } => assert!(evaluations <= 100),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(integrate_adaptive(|x| x, 1.0, 0.0, 1e-10).is_err());
        assert!(integrate_adaptive(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate_adaptive(|_| f64::NAN, 0.0, 1.0, 1e-10).is_err());
    }
}
