//! Periodic and non-periodic orthonormal spline systems of arbitrary order.
//!
//! The crate builds B-spline bases on admissible knot sequences, the Gram
//! matrices of those bases, and the orthonormal functions obtained by
//! inserting one knot at a time. [`analysis`] holds the square and maximal
//! function operators used to study the systems in `L^p`.

pub mod analysis;
pub mod bspline;
pub mod charint;
pub mod error;
pub mod fit;
pub mod gram;
pub mod knots;
pub mod ortho;
pub mod poly;
pub mod quadrature;

pub use bspline::{boehm_coarsen, inner_product, lp_norm, BoehmMap, Repr, Spline, SplineBasis};
pub use charint::{characteristic_interval, CharInterval, Seg};
pub use error::{Error, Result};
pub use fit::DecayFit;
pub use gram::{build_gram, GramSystem};
pub use knots::{maximal_splitting, Domain, KnotSequence, Partition, PartitionKind, PeriodicIndex};
pub use ortho::{build_system, gram_schmidt_oracle, OrthoFunction, OrthoSystem};
