//! Monte Carlo side of the pipeline: Gaussian random fields on lattices,
//! EC calibration for LKC estimation, empirical sup-tail validation, and a
//! bump-hunt demonstration.

pub mod bumphunt;
pub mod kernel;
pub mod mc;
pub mod rng;
pub mod sampler;
pub mod validation;

pub use kernel::SquaredExponential;
pub use mc::{chibar_transform, empirical_sup_tail, estimate_expected_ec, EcCalibration, McEstimate, TailEstimate, Transform};
pub use sampler::GrfSampler;
pub use validation::{validation_curve, ValidationConfig, ValidationCurve, ValidationRow};
