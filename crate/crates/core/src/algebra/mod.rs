//! Multi-index combinatorics, weight sequences, Taylor jets and polynomials.

pub mod jet;
pub mod multiindex;
pub mod poly;
pub mod scalar;
pub mod weights;

pub use jet::{layout, Jet, JetLayout};
pub use multiindex::{
    binomial, count_multiindices, enumerate_multiindices, factorial, homogeneous_multiindices,
    MultiIndex,
};
pub use poly::{Coeff, Poly};
pub use scalar::Scalar;
pub use weights::{lift_a, lift_b, Generator, WeightConvention, WeightSequence, WEIGHT_CONVENTION};
