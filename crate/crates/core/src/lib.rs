//! Distance matrices under p-norm coefficients and the statistics derived
//! from them: nearest-neighbor sets, robustness under column changes,
//! concordance, correlation, and expected nearest-neighbor distances.
//!
//! Heavy loops (pairwise distances, leave-one-column-out, searches, Monte
//! Carlo) run on rayon when the default `parallel` feature is on and fall
//! back to plain iteration otherwise. Both paths give identical results.

pub mod association;
pub mod asymptotics;
pub mod coefficients;
pub mod distance;
pub mod error;
pub mod exact;
pub mod exec;
pub mod io;
pub mod neighbors;
pub mod rng;
pub mod robustness;

pub use association::{concordance, correlation, correlation_of, expectation, hadamard, CorrelationResult, SampleSpace};
pub use coefficients::{Coefficient, Exponent};
pub use distance::{DataMatrix, DistanceMatrix};
pub use error::{Error, Result};
pub use neighbors::{nearest_sets, near_total, neighbor_sets, NeighborSets, TiePolicy};
pub use robustness::{adversarial_augment, rob_minus, rob_plus, spacing_values, AdversarialResult, RationalScore};
