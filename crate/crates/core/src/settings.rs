use crate::calculus::Tolerances;
use crate::error::Result;
use crate::moduli::default_radii;
use crate::setmap::{DirectionGrid, ScaleLadder};

/// Numerical knobs shared by every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Scale ladder for derivative limits.
    pub ladder: ScaleLadder,
    /// Neighbourhood radii for the modulus estimators.
    pub radii: ScaleLadder,
    /// Direction count for 2-D and 3-D grids; `None` picks the default.
    pub grid_points: Option<usize>,
    /// Enables seeded random directions above three dimensions.
    pub high_dim_seed: Option<u64>,
    pub tol: Tolerances,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            ladder: ScaleLadder::default(),
            radii: default_radii(),
            grid_points: None,
            high_dim_seed: None,
            tol: Tolerances::default(),
        }
    }
}

impl Settings {
    pub fn grid(&self, n: usize) -> Result<DirectionGrid> {
        DirectionGrid::for_dimension(n, self.grid_points, self.high_dim_seed)
    }
}
