use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::ball::{ball_max, ball_min};
use crate::calculus::limit::{LimitEstimate, Tolerances, TraceRow};
use crate::error::{check_dim, Error, Result};
use crate::setmap::func::{axpy, ScalarFn, VectorFn};
use crate::setmap::{DirectionGrid, HolderOrder, ScaleLadder};

fn base_value(f: &ScalarFn, xbar: &[f64]) -> Result<f64> {
    let fx = f.try_eval(xbar)?;
    if fx.is_finite() {
        Ok(fx)
    } else {
        Err(Error::precondition("function is not finite at the base point"))
    }
}

/// Per-rung minima of `(f(xbar + t u) - f(xbar)) / t^q` over `u ∈ B∞(x, t)`.
pub(crate) fn subderivative_rungs(f: &ScalarFn, xbar: &[f64], fx: f64, x: &[f64], q: HolderOrder, ladder: &ScaleLadder) -> Vec<f64> {
    ladder
        .rungs()
        .iter()
        .map(|&t| {
            let tq = q.scale(t);
            let phi = |u: &[f64]| (f.eval(&axpy(xbar, t, u)) - fx) / tq;
            ball_min(&phi, x, t).1
        })
        .collect()
}

/// Hadamard directional subderivative `f'_q(xbar; x)`.
pub fn hadamard_subderivative(
    f: &ScalarFn,
    xbar: &[f64],
    x: &[f64],
    q: HolderOrder,
    ladder: &ScaleLadder,
    tol: &Tolerances,
) -> Result<LimitEstimate> {
    check_dim(f.dim(), x.len())?;
    let fx = base_value(f, xbar)?;
    let values = subderivative_rungs(f, xbar, fx, x, q, ladder);
    let per_scale = ladder.rungs().iter().copied().zip(values).collect();
    Ok(LimitEstimate::from_scales(per_scale, tol))
}

/// `inf_{‖x‖=1} (f'_q(xbar; x))₊` over the grid directions.
pub fn subderivative_norm(
    f: &ScalarFn,
    xbar: &[f64],
    q: HolderOrder,
    grid: &DirectionGrid,
    ladder: &ScaleLadder,
    tol: &Tolerances,
) -> Result<LimitEstimate> {
    check_dim(f.dim(), grid.dim())?;
    let fx = base_value(f, xbar)?;
    let per_dir: Vec<Vec<f64>> = grid
        .points()
        .par_iter()
        .map(|u| subderivative_rungs(f, xbar, fx, u, q, ladder))
        .collect();
    Ok(sweep_to_estimate(&per_dir, ladder, tol, |v| v.max(0.0)))
}

/// Folds per-direction rung values into a per-rung minimum, in direction
/// order so the result does not depend on scheduling.
pub(crate) fn sweep_to_estimate(
    per_dir: &[Vec<f64>],
    ladder: &ScaleLadder,
    tol: &Tolerances,
    transform: impl Fn(f64) -> f64,
) -> LimitEstimate {
    let rungs = ladder.rungs();
    let mut mins = vec![f64::INFINITY; rungs.len()];
    let mut trace = Vec::with_capacity(per_dir.len() * rungs.len());
    for (i, vals) in per_dir.iter().enumerate() {
        for (k, &v) in vals.iter().enumerate() {
            trace.push(TraceRow {
                direction_index: i,
                t: rungs[k],
                value: v,
            });
            let w = transform(v);
            if w < mins[k] {
                mins[k] = w;
            }
        }
    }
    let per_scale = rungs.iter().copied().zip(mins).collect();
    LimitEstimate::from_scales(per_scale, tol).with_trace(trace)
}

/// Estimate of a Hadamard directional derivative of a single-valued map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardDerivative {
    /// Midpoint of the finest-rung quotient range, per component.
    pub value: Vec<f64>,
    /// Whether the quotient range collapsed to a point.
    pub single_valued: bool,
    /// `(t_k, max spread over components)` from coarse to fine.
    pub spread: Vec<(f64, f64)>,
}

/// Limit of `(g(xbar + t u) - g(xbar)) / t^q` as `u → x`, `t ↓ 0`.
pub fn hadamard_derivative(
    g: &VectorFn,
    xbar: &[f64],
    x: &[f64],
    q: HolderOrder,
    ladder: &ScaleLadder,
    tol: &Tolerances,
) -> Result<HadamardDerivative> {
    check_dim(g.input_dim(), xbar.len())?;
    check_dim(g.input_dim(), x.len())?;
    let gx = g.eval(xbar);
    if gx.iter().any(|v| !v.is_finite()) {
        return Err(Error::precondition("map is not finite at the base point"));
    }
    let m = g.output_dim();
    let rungs: Vec<(Vec<f64>, Vec<f64>)> = ladder
        .rungs()
        .par_iter()
        .map(|&t| {
            let tq = q.scale(t);
            (0..m)
                .map(|j| {
                    let phi = |u: &[f64]| (g.eval(&axpy(xbar, t, u))[j] - gx[j]) / tq;
                    (ball_min(&phi, x, t).1, ball_max(&phi, x, t).1)
                })
                .unzip()
        })
        .collect();
    let spread: Vec<(f64, f64)> = ladder
        .rungs()
        .iter()
        .zip(&rungs)
        .map(|(&t, (lo, hi))| {
            let s = lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max);
            (t, s)
        })
        .collect();
    let (lo, hi) = rungs.last().expect("ladder is nonempty");
    let (plo, phi) = &rungs[rungs.len() - 2];
    let value: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let prev: Vec<f64> = plo.iter().zip(phi).map(|(a, b)| 0.5 * (a + b)).collect();
    let single_valued = value.iter().zip(&prev).zip(lo.iter().zip(hi)).all(|((v, p), (a, b))| {
        let scale = tol.converge_rel * v.abs().max(1.0);
        v.is_finite() && (b - a).abs() <= scale && (v - p).abs() <= scale
    });
    Ok(HadamardDerivative {
        value,
        single_valued,
        spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::limit::Verdict;

    fn q(v: f64) -> HolderOrder {
        HolderOrder::new(v).unwrap()
    }

    fn semicircle() -> ScalarFn {
        ScalarFn::new(2, |x| (x[0] + 1.0).max((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0))
    }

    #[test]
    fn square_has_unit_second_order_subderivative() {
        let f = ScalarFn::new(1, |x| x[0] * x[0]);
        let tol = Tolerances::default();
        let e = hadamard_subderivative(&f, &[0.0], &[1.0], q(2.0), &ScaleLadder::default(), &tol).unwrap();
        assert!((e.value - 1.0).abs() < 1e-4, "{e:?}");
        assert!(e.converged);
        let g = DirectionGrid::new(1, 2).unwrap();
        let n = subderivative_norm(&f, &[0.0], q(2.0), &g, &ScaleLadder::default(), &tol).unwrap();
        assert!((n.value - 1.0).abs() < 1e-4);
        assert_eq!(n.trace.len(), 2 * 20);
    }

    #[test]
    fn semicircle_second_order_subderivative() {
        let tol = Tolerances::default();
        let e = hadamard_subderivative(&semicircle(), &[-1.0, 0.0], &[0.0, 1.0], q(2.0), &ScaleLadder::default(), &tol)
            .unwrap();
        assert!((e.value - 0.25).abs() < 1e-3, "{e:?}");
    }

    #[test]
    fn zero_direction_gives_zero() {
        let f = ScalarFn::new(1, |x| x[0].abs().sqrt());
        let tol = Tolerances::default();
        for order in [0.5, 1.0, 1.5] {
            let e = hadamard_subderivative(&f, &[0.3], &[0.0], q(order), &ScaleLadder::default(), &tol).unwrap();
            assert_eq!(e.verdict, Verdict::Zero, "q={order}: {e:?}");
        }
        let sq = ScalarFn::new(1, |x| x[0] * x[0]);
        let e = hadamard_subderivative(&sq, &[0.0], &[0.0], q(3.0), &ScaleLadder::default(), &tol).unwrap();
        assert_eq!(e.verdict, Verdict::Zero);
    }

    #[test]
    fn infinite_base_is_a_precondition_error() {
        let f = ScalarFn::new(1, |_| f64::INFINITY);
        let r = hadamard_subderivative(&f, &[0.0], &[1.0], q(1.0), &ScaleLadder::default(), &Tolerances::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn derivative_examples() {
        let tol = Tolerances::default();
        let l = ScaleLadder::default();
        let id = VectorFn::new(1, 1, |x| vec![x[0]]);
        let d = hadamard_derivative(&id, &[0.0], &[1.0], q(1.0), &l, &tol).unwrap();
        assert!((d.value[0] - 1.0).abs() < 1e-9 && d.single_valued);
        let abs = VectorFn::new(1, 1, |x| vec![x[0].abs()]);
        let d = hadamard_derivative(&abs, &[0.0], &[1.0], q(1.0), &l, &tol).unwrap();
        assert!((d.value[0] - 1.0).abs() < 1e-9 && d.single_valued);
        let sq = VectorFn::new(1, 1, |x| vec![x[0] * x[0]]);
        let d = hadamard_derivative(&sq, &[0.0], &[1.0], q(1.0), &l, &tol).unwrap();
        assert!(d.value[0].abs() < 1e-5 && d.single_valued);
        let sqrt = VectorFn::new(1, 1, |x| vec![x[0].abs().sqrt()]);
        let d = hadamard_derivative(&sqrt, &[0.0], &[1.0], q(1.0), &l, &tol).unwrap();
        assert!(!d.single_valued);
    }
}
