//! Direct estimators for strong subregularity, isolated calmness and sharp
//! minima, plus the cross-checks relating them to derivative norms.

pub mod checks;
pub mod report;
pub mod sampling;
pub mod subdiff;
pub mod subregularity;

pub use report::{RegularityReport, RegularityVerdict};
pub use sampling::default_radii;
pub use subregularity::{isolated_calmness_modulus, sharp_minimum_modulus, strong_subregularity_modulus};
pub use subdiff::SubdiffOracle;
pub use checks::{
    check_positive_definite, perturbation_bound_check, subdiff_subregularity_vs_sharp, verify_calmness_criteria,
    verify_sandwich, verify_srg_equals_derivative_norm,
};
