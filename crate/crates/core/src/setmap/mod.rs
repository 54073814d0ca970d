//! Oracles for functions, set-valued mappings and the sampling plumbing
//! shared by every estimator.

pub mod func;
pub mod grid;
pub mod ladder;
pub mod map;
pub mod order;
pub mod set;

pub use func::{Bounds, ScalarFn, VectorFn};
pub use grid::{DirectionGrid, GridScheme};
pub use ladder::ScaleLadder;
pub use map::{invert_map, make_epigraph_map, SetValuedMap, TAU_MEM};
pub use order::HolderOrder;
pub use set::{set_distance, SetRepr};
