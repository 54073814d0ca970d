//! Graphical derivatives, Hadamard (sub)derivatives and the norm-like
//! quantities of positively homogeneous mappings.

mod ball;
pub mod graphical;
pub mod homogeneous;
pub mod limit;
pub mod subderivative;

pub use graphical::{default_cluster_tol, graphical_derivative_image};
pub use homogeneous::HomogeneousSampler;
pub use limit::{classify, LimitEstimate, Tolerances, TraceRow, Verdict};
pub use subderivative::{hadamard_derivative, hadamard_subderivative, subderivative_norm, HadamardDerivative};
