use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Result};

type ScalarOracle = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorOracle = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Bounds {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Extended-real valued function `f: R^n -> R ∪ {+∞}`.
///
/// Points outside the domain evaluate to `+∞`. The oracle is sanitized so a
/// NaN coming out of a user closure is reported as `+∞` as well.
#[derive(Clone)]
pub struct ScalarFn {
    dim: usize,
    eval: Arc<ScalarOracle>,
    domain_hint: Option<Bounds>,
}

impl ScalarFn {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarFn {
            dim,
            eval: Arc::new(f),
            domain_hint: None,
        }
    }

    pub fn with_domain_hint(mut self, hint: Bounds) -> Self {
        self.domain_hint = Some(hint);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_hint(&self) -> Option<&Bounds> {
        self.domain_hint.as_ref()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let v = (self.eval)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval(x))
    }

    /// Pointwise sum; `+∞` absorbs.
    pub fn add(&self, other: &ScalarFn) -> ScalarFn {
        let (a, b) = (self.clone(), other.clone());
        ScalarFn::new(self.dim, move |x| a.eval(x) + b.eval(x))
    }

    pub fn scaled(&self, c: f64) -> ScalarFn {
        let a = self.clone();
        ScalarFn::new(self.dim, move |x| {
            let v = a.eval(x);
            if v.is_infinite() {
                v
            } else {
                c * v
            }
        })
    }

    /// `x ↦ max{0, f(x)}`.
    pub fn positive_part(&self) -> ScalarFn {
        let a = self.clone();
        ScalarFn::new(self.dim, move |x| a.eval(x).max(0.0))
    }

    /// `x ↦ f(x)^p` for a nonnegative function.
    pub fn powf(&self, p: f64) -> ScalarFn {
        let a = self.clone();
        ScalarFn::new(self.dim, move |x| {
            let v = a.eval(x);
            if v.is_infinite() {
                v
            } else {
                v.max(0.0).powf(p)
            }
        })
    }

    pub fn as_vector(&self) -> VectorFn {
        let a = self.clone();
        VectorFn::new(self.dim, 1, move |x| vec![a.eval(x)])
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("dim", &self.dim)
            .field("domain_hint", &self.domain_hint)
            .finish_non_exhaustive()
    }
}

/// Single-valued `g: R^n -> R^m`.
#[derive(Clone)]
pub struct VectorFn {
    n: usize,
    m: usize,
    eval: Arc<VectorOracle>,
}

impl VectorFn {
    pub fn new<F>(n: usize, m: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        VectorFn {
            n,
            m,
            eval: Arc::new(f),
        }
    }

    /// The zero map.
    pub fn zero(n: usize, m: usize) -> Self {
        VectorFn::new(n, m, move |_| vec![0.0; m])
    }

    pub fn input_dim(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.m
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let v = (self.eval)(x);
        debug_assert_eq!(v.len(), self.m);
        v
    }
}

impl fmt::Debug for VectorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFn")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b`
pub(crate) fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_is_reported_as_out_of_domain() {
        let f = ScalarFn::new(1, |x| x[0].sqrt());
        assert_eq!(f.eval(&[-1.0]), f64::INFINITY);
        assert_eq!(f.eval(&[4.0]), 2.0);
    }

    #[test]
    fn infinity_survives_arithmetic() {
        let f = ScalarFn::new(1, |x| if x[0] < 0.0 { f64::INFINITY } else { x[0] });
        assert_eq!(f.scaled(-2.0).eval(&[-1.0]), f64::INFINITY);
        assert_eq!(f.powf(2.0).eval(&[3.0]), 9.0);
        assert!(f.try_eval(&[1.0, 2.0]).is_err());
    }
}
