//! Core numerics for excursion-set inference on lattices: lattices and
//! field samples, Euler characteristics of excursion sets, and the EC-density
//! machinery that turns Monte Carlo EC averages into global p-values.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision types.

pub mod error;
pub mod euler;
pub mod field_io;
pub mod lattice;
pub mod rft;
pub mod scalar;

pub use error::{Error, Result};
pub use euler::{clique_counts, euler_characteristic, excursion_set, CliqueCounts, ExcursionSet};
pub use lattice::{FieldSample, Lattice};
pub use rft::{DensityFamily, EcObservation, LkcSolution, PValueReport};
pub use scalar::Scalar;

pub type Lattice64 = Lattice<f64>;
pub type Lattice32 = Lattice<f32>;
pub type Field64 = FieldSample<f64>;
pub type Field32 = FieldSample<f32>;
pub type Lkc64 = LkcSolution<f64>;
pub type Lkc32 = LkcSolution<f32>;
