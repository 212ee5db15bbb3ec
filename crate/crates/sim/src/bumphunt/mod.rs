//! Bump hunting in the plane: uniform background plus a Gaussian bump of
//! known width, tested at every point of a search lattice by a profile
//! likelihood ratio, with the global p-value from the EC approximation.

mod lrt;
mod model;
mod pipeline;
mod region;

pub use lrt::{density_ratios, log_likelihood_gain, lrt_field, profile_eta, LrtField, ProfileFit};
pub use model::{load_events, read_events, save_events, simulate_events, simulate_events_with, write_events, BumpModel, EventSet, EVENTS_MAGIC};
pub use pipeline::{bump_hunt, default_kernel_length, BumpHuntResult, Calibration, PipelineConfig};
pub use region::Region;
