use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::setmap::map::linspace;
use crate::setmap::{Bounds, ScalarFn, SetRepr, SetValuedMap};

type IntervalOracle = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// Step for one-sided difference quotients of [`SubdiffOracle::from_convex`].
const DIFF_STEP: f64 = 1e-7;

/// Subdifferential of a convex function of one variable, given at each
/// point as the interval `[f'_-(x), f'_+(x)]`.
#[derive(Clone)]
pub struct SubdiffOracle {
    f: ScalarFn,
    interval: Arc<IntervalOracle>,
    domain: (f64, f64),
}

impl fmt::Debug for SubdiffOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubdiffOracle").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl SubdiffOracle {
    pub fn new<D>(f: ScalarFn, domain: (f64, f64), interval: D) -> Result<Self>
    where
        D: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        if f.dim() != 1 {
            return Err(Error::Problem("subdifferential oracles are one-dimensional".into()));
        }
        Ok(SubdiffOracle {
            f,
            interval: Arc::new(interval),
            domain,
        })
    }

    /// One-sided difference quotients of `f`.
    pub fn from_convex(f: ScalarFn, domain: (f64, f64)) -> Result<Self> {
        let g = f.clone();
        SubdiffOracle::new(f, domain, move |x| {
            let fx = g.eval(&[x]);
            let lo = (fx - g.eval(&[x - DIFF_STEP])) / DIFF_STEP;
            let hi = (g.eval(&[x + DIFF_STEP]) - fx) / DIFF_STEP;
            (lo.min(hi), hi.max(lo))
        })
    }

    pub fn function(&self) -> &ScalarFn {
        &self.f
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn interval(&self, x: f64) -> (f64, f64) {
        (self.interval)(x)
    }

    pub fn contains_zero(&self, x: f64) -> bool {
        let (lo, hi) = self.interval(x);
        lo <= 1e-12 && hi >= -1e-12
    }

    /// `x ↦ ∂f(x)` as a set-valued map.
    pub fn as_map(&self) -> SetValuedMap {
        let oracle = self.interval.clone();
        let (a, b) = self.domain;
        SetValuedMap::from_image(1, 1, Bounds { lo: vec![a], hi: vec![b] }, move |x| {
            if x[0] < a || x[0] > b {
                return SetRepr::empty(1);
            }
            let (lo, hi) = oracle(x[0]);
            SetRepr::interval(lo, hi)
        })
    }

    /// Checks monotonicity of the intervals on a grid over the domain.
    pub fn check_convex(&self, samples: usize) -> Result<()> {
        let (a, b) = self.domain;
        let mut prev: Option<(f64, (f64, f64))> = None;
        for x in linspace(a, b, samples.max(2)) {
            let (lo, hi) = self.interval(x);
            if lo > hi + 1e-9 || lo.is_nan() || hi.is_nan() {
                return Err(Error::precondition(format!("subdifferential interval at {x} is malformed")));
            }
            if let Some((px, (_, phi))) = prev {
                if phi > lo + 1e-9 * (1.0 + phi.abs()) {
                    return Err(Error::precondition(format!(
                        "subdifferential is not monotone between {px} and {x}: the function is not convex"
                    )));
                }
            }
            prev = Some((x, (lo, hi)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_subdifferential() {
        let o = SubdiffOracle::from_convex(ScalarFn::new(1, |x| x[0].abs()), (-1.0, 1.0)).unwrap();
        let (lo, hi) = o.interval(0.0);
        assert!((lo + 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
        assert!(o.contains_zero(0.0));
        assert!(!o.contains_zero(0.5));
        assert!(o.check_convex(101).is_ok());
        assert!(o.as_map().image(&[0.5]).distance(&[1.0]) < 1e-6);
    }

    #[test]
    fn concave_function_is_rejected() {
        let o = SubdiffOracle::from_convex(ScalarFn::new(1, |x| -x[0] * x[0]), (-1.0, 1.0)).unwrap();
        assert!(matches!(o.check_convex(101), Err(Error::Precondition(_))));
    }
}
