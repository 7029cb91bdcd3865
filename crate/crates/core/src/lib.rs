//! Spectral line of a thermal ensemble of relativistic monochromatic
//! radiators.
//!
//! Frequencies are measured by `x = omega / omega0` and temperature by
//! `alpha = m c^2 / k T`. The crate provides the closed-form intensity and
//! counting spectra together with independent cross-checks: direct
//! quadrature of the ensemble average, weighted Monte Carlo, and the
//! registration of the line by a resonant detector driven through a Doppler
//! scan.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference constants carry every published digit.
#![allow(clippy::excessive_precision)]

pub mod detector;
pub mod error;
pub mod juttner;
pub mod kinematics;
pub mod monte_carlo;
pub mod numerics;
pub mod special_functions;
pub mod spectrum;

pub use detector::{DetectorConfig, Geometry, ScanCurve};
pub use error::{Error, Result};
pub use juttner::{EmissionSample, EnsembleParams};
pub use kinematics::{EmissionState, FourAcceleration, KinematicState, Vec3};
pub use monte_carlo::{BinSpec, HistogramDistance, SimulationResult, SimulationSpec, WeightMode};
pub use numerics::{QuadratureResult, RandomStream, WeightedHistogram};
pub use special_functions::{BesselRequest, BesselStatus, BesselValue};
pub use spectrum::{SpectralDensity, SpectralKind, SpectralPoint};
