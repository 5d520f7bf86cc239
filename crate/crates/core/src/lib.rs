//! Computational laboratory for the Erdős–Kac law along Beatty sequences.
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`]: prime sieves and segmented ω/Ω tables.
//! - [`reals`]: certified real parameters and exact Beatty floors.
//! - [`qlinalg`]: exact rational linear algebra and near-relation search.
//! - [`harmonic`]: window functions, exponential sums and the tuple estimators.
//! - [`stats`]: standardized samples, Kolmogorov distances and moments.
//! - [`kubilius`]: the independent prime model, characteristic functions and smoothing bounds.
//! - [`adversary`]: the Liouville-type construction defeating uniform rates.
//! - [`experiments`]: configuration, orchestration and export behind the `eklab` binary.

pub mod adversary;
pub mod arith;
pub mod error;
pub mod experiments;
pub mod harmonic;
pub mod kubilius;
pub mod qlinalg;
pub mod reals;
pub mod stats;
pub mod util;

pub use error::{Error, Result};
