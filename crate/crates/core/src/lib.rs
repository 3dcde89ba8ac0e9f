//! Simulation and coding laboratory for DNA-storage channel models.
//!
//! The crate covers the noisy shuffling-sampling channel (sampling, shuffling
//! and per-symbol noise), the torn-paper channel, closed-form capacity
//! evaluators with regime flags, an index-based inner/outer codec, a random
//! linear scheme with an exhaustive clique-partition decoder, and a
//! MinHash/LSH clustering and trace-reconstruction pipeline.
//!
//! Numerical evaluators are generic over the scalar type through [`Real`];
//! the aliases below fix the common `f64` instantiations.

pub mod capacity;
pub mod channel;
pub mod cluster_recon;
pub mod codec_index;
pub mod codec_linear;
pub mod error;
pub mod gf;
pub mod gf2;
pub mod harness;
pub mod sampling;
pub mod scalar;
pub mod seqcore;

pub use error::{Error, Result};
pub use scalar::Real;
pub use seqcore::{Alphabet, Histogram, RandomStream, ReadPool, Sequence};

/// Capacity evaluation result in double precision.
pub type Capacity = capacity::CapacityResult<f64>;
/// Capacity evaluation result in single precision.
pub type Capacity32 = capacity::CapacityResult<f32>;
/// Storage/recovery rate pair in double precision.
pub type RatePair = capacity::RatePair<f64>;
/// Draw-count law in double precision.
pub type Sampling = sampling::SamplingSpec<f64>;
/// Draw-count law in single precision.
pub type Sampling32 = sampling::SamplingSpec<f32>;
/// Torn-paper capacity case in double precision.
pub type TornCase = capacity::TornCase<f64>;
