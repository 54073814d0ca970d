//! Linear semi-infinite programs: discretization, an internal LP solver,
//! constraint qualifications and isolated-calmness certificates.

pub mod analysis;
pub mod calmness;
pub mod problem;
pub mod simplex;

pub use analysis::{active_indices, canonical_f, enc_check, feasibility_residual, slater_check, EncReport, SlaterReport};
pub use problem::{Curve, DiscreteProblem, Family, LsipProblem, Profile};
pub use simplex::{solve_lp, LpSolution, LpStatus};
pub use calmness::{
    calmness_certificate, canonical_sharpness, empirical_calmness, CalmnessCertificate, EmpiricalCalmness,
    PerturbationProfile,
};
