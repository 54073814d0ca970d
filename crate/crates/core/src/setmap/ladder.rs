use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest ladder accepted; finer rungs underflow long before this.
pub const MAX_RUNGS: usize = 200;

/// Geometric scale sequence `t_k = t0 * theta^k`, `k = 0..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    t0: f64,
    theta: f64,
    rungs: Vec<f64>,
}

impl ScaleLadder {
    pub fn new(t0: f64, theta: f64, k: usize) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::usage(format!("ladder start must be positive, got {t0}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::usage(format!("ladder ratio must lie in (0,1), got {theta}")));
        }
        if !(2..=MAX_RUNGS).contains(&k) {
            return Err(Error::usage(format!("ladder needs between 2 and {MAX_RUNGS} rungs, got {k}")));
        }
        let rungs = (0..k).map(|i| t0 * theta.powi(i as i32)).collect();
        Ok(ScaleLadder { t0, theta, rungs })
    }

    /// Rungs ordered coarse to fine.
    pub fn rungs(&self) -> &[f64] {
        &self.rungs
    }

    pub fn len(&self) -> usize {
        self.rungs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rungs.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The finest scale `t_K`.
    pub fn finest(&self) -> f64 {
        *self.rungs.last().expect("ladder has at least two rungs")
    }

    /// Drops rungs finer than `floor`, keeping at least the two coarsest.
    ///
    /// Discretized problems stop resolving anything below their grid
    /// spacing, so rungs under it only measure discretization error.
    pub fn truncated_at(&self, floor: f64) -> ScaleLadder {
        let keep = self.rungs.iter().take_while(|&&t| t >= floor).count().max(2);
        ScaleLadder {
            t0: self.t0,
            theta: self.theta,
            rungs: self.rungs[..keep.min(self.rungs.len())].to_vec(),
        }
    }
}

impl Default for ScaleLadder {
    fn default() -> Self {
        ScaleLadder::new(0.1, 0.5, 20).expect("default ladder is valid")
    }
}
