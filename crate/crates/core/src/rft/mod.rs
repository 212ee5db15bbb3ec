//! Random-field-theory tail approximation: EC densities, Lipschitz–Killing
//! curvature estimation from Monte Carlo EC averages, and global p-values.

mod density;
mod lkc;
mod pvalue;
mod record;
pub mod special;

pub use density::{ec_density, expected_ec, ln_ec_density, ln_expected_ec, DensityFamily};
pub use lkc::{density_matrix, solve_lkc, solve_lkc_with_bound, EcObservation, LkcSolution, DEFAULT_CONDITION_WARNING};
pub use pvalue::{global_pvalue, sigma_from_ln_pvalue, sigma_significance, PValueReport};
pub use record::{load_lkc, read_lkc, save_lkc, write_lkc, LKC_MAGIC};
