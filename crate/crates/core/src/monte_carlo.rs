//! Brute-force realization of the ensemble average: draw emitters, weight
//! each event by the registration physics and histogram the observed
//! frequency ratio.
//!
//! Work is split into fixed-size chunks; chunk `i` draws from stream `i` of
//! the seed and the chunk results are merged in index order, so the output is
//! bit-identical for any number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::juttner::{beta_from_kinetic, juttner_quantile, EnsembleParams, KineticSampler};
use crate::kinematics::doppler_support;
use crate::numerics::{integrate_adaptive, RandomStream, WeightedHistogram};

pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;

/// Weight attached to each emission event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    /// `(1 - beta^2)^2 / (1 - beta cos theta)^3`: received energy.
    Intensity,
    /// `1 - beta cos theta`: arriving wave count.
    Counting,
    /// Unit weight; diagnostic only.
    Unweighted,
}

impl WeightMode {
    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Intensity => "intensity",
            WeightMode::Counting => "counting",
            WeightMode::Unweighted => "unweighted",
        }
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intensity" => Ok(WeightMode::Intensity),
            "counting" => Ok(WeightMode::Counting),
            "unweighted" => Ok(WeightMode::Unweighted),
            other => Err(Error::Config(format!(
                "unknown weight mode '{other}' (expected intensity, counting or unweighted)"
            ))),
        }
    }
}

/// Equal-width binning over `[lo, hi]` in `x = omega / omega0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl BinSpec {
    /// Range holding 99.99% of the emitters' Doppler support at `alpha`.
    pub fn covering(alpha: f64, bins: usize) -> Result<Self> {
        let beta = juttner_quantile(0.9999, alpha)?;
        let (lo, hi) = doppler_support(beta);
        Ok(BinSpec {
            lo: lo.max(1e-6),
            hi,
            bins,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub params: EnsembleParams,
    pub mode: WeightMode,
    pub n_samples: usize,
    pub histogram: BinSpec,
    pub seed: u64,
    pub chunk_size: usize,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk_size must be at least 1".into()));
        }
        let h = self.histogram;
        if h.bins == 0 || !(h.lo > 0.0 && h.lo < 1.0 && h.hi > 1.0) || !h.hi.is_finite() {
            return Err(Error::Config(format!(
                "histogram range must satisfy 0 < lo < 1 < hi with at least one bin (got [{}, {}], {} bins)",
                h.lo, h.hi, h.bins
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub histogram: WeightedHistogram,
    pub n_samples: usize,
    /// `(sum w)^2 / sum w^2`.
    pub effective_sample_size: f64,
    /// Weighted mean of `x` over all events, in or out of the histogram range.
    pub mean_x: f64,
    pub mean_x_error: f64,
    /// `sum w / n`.
    pub mean_weight: f64,
    pub mean_weight_error: f64,
}

/// Running sums of one chunk.
#[derive(Debug, Clone)]
struct Tally {
    histogram: WeightedHistogram,
    sum_w: f64,
    sum_w2: f64,
    sum_wx: f64,
    sum_w2x: f64,
    sum_w2x2: f64,
}

impl Tally {
    fn new(histogram: WeightedHistogram) -> Self {
        Tally {
            histogram,
            sum_w: 0.0,
            sum_w2: 0.0,
            sum_wx: 0.0,
            sum_w2x: 0.0,
            sum_w2x2: 0.0,
        }
    }

    fn add(&mut self, x: f64, w: f64) -> Result<()> {
        self.histogram.fill(x, w)?;
        let w2 = w * w;
        self.sum_w += w;
        self.sum_w2 += w2;
        self.sum_wx += w * x;
        self.sum_w2x += w2 * x;
        self.sum_w2x2 += w2 * x * x;
        Ok(())
    }

    fn merge(&mut self, other: &Tally) -> Result<()> {
        self.histogram.merge(&other.histogram)?;
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
        self.sum_wx += other.sum_wx;
        self.sum_w2x += other.sum_w2x;
        self.sum_w2x2 += other.sum_w2x2;
        Ok(())
    }
}

/// Observed frequency ratio and event weight for kinetic energy `k = gamma - 1`
/// and line-of-sight cosine `cos_theta`.
#[inline]
pub fn event(k: f64, cos_theta: f64, mode: WeightMode) -> (f64, f64) {
    let gamma = 1.0 + k;
    let beta = beta_from_kinetic(k);
    let r = 1.0 - beta * cos_theta;
    let x = 1.0 / (gamma * r);
    let w = match mode {
        WeightMode::Intensity => {
            let g2 = gamma * gamma;
            1.0 / (g2 * g2 * r * r * r)
        }
        WeightMode::Counting => r,
        WeightMode::Unweighted => 1.0,
    };
    (x, w)
}

fn run_chunk(spec: &SimulationSpec, sampler: &KineticSampler, index: usize) -> Result<Tally> {
    let start = index * spec.chunk_size;
    let len = spec.chunk_size.min(spec.n_samples - start);
    let h = spec.histogram;
    let mut tally = Tally::new(WeightedHistogram::uniform(h.lo, h.hi, h.bins)?);
    let mut rng = RandomStream::new(spec.seed, index as u64);
    for _ in 0..len {
        let k = sampler.sample(&mut rng);
        let cos_theta = 2.0 * rng.next_f64() - 1.0;
        let (x, w) = event(k, cos_theta, spec.mode);
        tally.add(x, w)?;
    }
    Ok(tally)
}

/// Run the simulation on the current rayon pool.
pub fn simulate_spectrum(spec: &SimulationSpec) -> Result<SimulationResult> {
    spec.validate()?;
    let sampler = KineticSampler::new(spec.params.alpha)?;
    let chunks = spec.n_samples.div_ceil(spec.chunk_size);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|i| run_chunk(spec, &sampler, i))
        .collect::<Result<Vec<_>>>()?;

    let mut iter = tallies.into_iter();
    let mut total = iter.next().expect("at least one chunk");
    for t in iter {
        total.merge(&t)?;
    }

    let n = spec.n_samples as f64;
    let mean_x = total.sum_wx / total.sum_w;
    // delta-method error of the ratio estimator sum(w x) / sum(w)
    let spread = total.sum_w2x2 - 2.0 * mean_x * total.sum_w2x + mean_x * mean_x * total.sum_w2;
    let mean_x_error = spread.max(0.0).sqrt() / total.sum_w;
    let mean_weight = total.sum_w / n;
    let var_w = (total.sum_w2 / n - mean_weight * mean_weight).max(0.0);
    Ok(SimulationResult {
        histogram: total.histogram,
        n_samples: spec.n_samples,
        effective_sample_size: total.sum_w * total.sum_w / total.sum_w2,
        mean_x,
        mean_x_error,
        mean_weight,
        mean_weight_error: (var_w / n).sqrt(),
    })
}

/// Run the simulation on a dedicated pool of `threads` workers.
pub fn simulate_spectrum_with_threads(
    spec: &SimulationSpec,
    threads: usize,
) -> Result<SimulationResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| simulate_spectrum(spec))
}

/// Agreement between a simulated histogram and a reference density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramDistance {
    /// `sum_i |h_i - e_i|`, with `h_i` the bin weight per sample and `e_i` the
    /// integral of the density over bin `i`.
    pub l1: f64,
    /// Mean of `(h_i - e_i)^2 / sigma_i^2` over the bins with enough entries.
    pub chi2_per_bin: f64,
    pub bins_used: usize,
    pub bins_total: usize,
}

/// Bins with fewer raw entries than this are left out of the chi-square.
pub const MIN_CHI2_ENTRIES: u64 = 5;

pub fn histogram_distance<D>(result: &SimulationResult, density: D) -> Result<HistogramDistance>
where
    D: Fn(f64) -> f64,
{
    let h = &result.histogram;
    if result.n_samples == 0 || h.total_weight() <= 0.0 {
        return Err(Error::Data("histogram is empty".into()));
    }
    let n = result.n_samples as f64;
    let edges = h.edges();
    let mut l1 = 0.0;
    let mut chi2 = 0.0;
    let mut used = 0;
    for i in 0..h.bins() {
        let expected = integrate_adaptive(&density, edges[i], edges[i + 1], 1e-10)?.value;
        let est = h.weighted_counts()[i] / n;
        l1 += (est - expected).abs();
        let var = (h.sum_sq_weights()[i] / n - est * est) / n;
        if h.entries()[i] >= MIN_CHI2_ENTRIES && var > 0.0 {
            let d = est - expected;
            chi2 += d * d / var;
            used += 1;
        }
    }
    Ok(HistogramDistance {
        l1,
        chi2_per_bin: if used > 0 { chi2 / used as f64 } else { 0.0 },
        bins_used: used,
        bins_total: h.bins(),
    })
}
