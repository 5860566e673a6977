//! Distance amplification of binary linear codes by direct-sum lifting over
//! walks on the s-wide replacement product of two expanders.
//!
//! The crate builds the graphs and walk collections, certifies spectral and
//! parity-sampling properties exactly or numerically at desk scale, decodes
//! the resulting code cascades, and evaluates the asymptotic parameter
//! schedule in log domain.

pub mod acceptance;
pub mod decode;
pub mod f2;
pub mod graphs;
pub mod lifting;
pub mod params;
pub mod rpp;
pub mod spectra;

/// Exact rational numbers used for biases, distances and radii.
pub type Rational = num_rational::Ratio<i128>;

pub use f2::{bias, code_bias, relative_distance, LinearCode, Word};
pub use graphs::{BiasedSet, Group, RotationGraph};
pub use spectra::RealOperator;
