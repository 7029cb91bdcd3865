//! Shared fixtures for the benchmarks.

use thermoline_core::juttner::EnsembleParams;
use thermoline_core::monte_carlo::{BinSpec, SimulationSpec, WeightMode, DEFAULT_CHUNK_SIZE};

/// Bessel arguments spanning the series and continued-fraction branches.
pub const BESSEL_ARGS: [f64; 6] = [0.01, 0.5, 1.9, 2.1, 30.0, 1e4];

/// Temperatures from a hot to a cold gas.
pub const ALPHAS: [f64; 4] = [0.5, 10.0, 100.0, 1e4];

/// Intensity-mode simulation at `alpha` on the standard 100-bin range.
pub fn simulation(alpha: f64, n_samples: usize) -> SimulationSpec {
    SimulationSpec {
        params: EnsembleParams::dimensionless(alpha).expect("positive alpha"),
        mode: WeightMode::Intensity,
        n_samples,
        histogram: BinSpec::covering(alpha, 100).expect("positive alpha"),
        seed: 0,
        chunk_size: DEFAULT_CHUNK_SIZE,
    }
}
