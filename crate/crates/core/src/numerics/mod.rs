//! Quadrature, random streams and weighted histograms shared by the
//! physics modules.

pub mod histogram;
pub mod quadrature;
pub mod random;

pub use histogram::{histogram_accumulate, WeightedHistogram};
pub use quadrature::{integrate_adaptive, Integrator, QuadratureResult};
pub use random::{uniform_stream, RandomStream};
