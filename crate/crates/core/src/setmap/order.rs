use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent `q > 0` fixing the order of every Hölder quantity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HolderOrder(f64);

impl HolderOrder {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(HolderOrder(q))
        } else {
            Err(Error::usage(format!("Hölder order must be finite and positive, got {q}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// The order `1/q` of the inverse of a `q`-homogeneous map.
    pub fn reciprocal(self) -> Self {
        HolderOrder(1.0 / self.0)
    }

    /// `t^q`.
    #[inline]
    pub fn scale(self, t: f64) -> f64 {
        t.powf(self.0)
    }
}

impl TryFrom<f64> for HolderOrder {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        HolderOrder::new(q)
    }
}

impl From<HolderOrder> for f64 {
    fn from(q: HolderOrder) -> f64 {
        q.0
    }
}

impl fmt::Display for HolderOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
