use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::graphical::{graphical_derivative_image, rung_image};
use crate::calculus::limit::{LimitEstimate, Tolerances, TraceRow};
use crate::error::{check_dim, Error, Result};
use crate::setmap::func::{norm, VectorFn};
use crate::setmap::{DirectionGrid, HolderOrder, ScaleLadder, SetRepr, SetValuedMap, TAU_MEM};

type HomogeneousOracle = dyn Fn(&[f64]) -> SetRepr + Send + Sync;

#[derive(Clone)]
enum Source {
    /// Closed form on the unit sphere, extended by homogeneity.
    Exact(Arc<HomogeneousOracle>),
    /// `D_qF(xbar, ybar)` approximated rung by rung.
    Derivative {
        map: SetValuedMap,
        xbar: Vec<f64>,
        ybar: Vec<f64>,
        ladder: ScaleLadder,
    },
}

/// A `q`-order positively homogeneous mapping `H: R^n ⇉ R^m`, optionally
/// shifted by a single-valued `q`-homogeneous map.
#[derive(Clone)]
pub struct HomogeneousSampler {
    q: HolderOrder,
    n: usize,
    m: usize,
    source: Source,
    shift: Option<VectorFn>,
    grid: DirectionGrid,
    tol: Tolerances,
}

impl fmt::Debug for HomogeneousSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.source {
            Source::Exact(_) => "exact",
            Source::Derivative { .. } => "derivative",
        };
        f.debug_struct("HomogeneousSampler")
            .field("q", &self.q)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("source", &kind)
            .field("shifted", &self.shift.is_some())
            .finish_non_exhaustive()
    }
}

impl HomogeneousSampler {
    /// `H` given on unit directions; `h(0)` must return `H(0)`.
    pub fn exact<F>(n: usize, m: usize, q: HolderOrder, grid: DirectionGrid, h: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> SetRepr + Send + Sync + 'static,
    {
        check_dim(n, grid.dim())?;
        Ok(HomogeneousSampler {
            q,
            n,
            m,
            source: Source::Exact(Arc::new(h)),
            shift: None,
            grid,
            tol: Tolerances::default(),
        })
    }

    /// The graphical derivative `D_qF(xbar, ybar)`.
    pub fn derivative(
        map: &SetValuedMap,
        xbar: &[f64],
        ybar: &[f64],
        q: HolderOrder,
        ladder: ScaleLadder,
        grid: DirectionGrid,
    ) -> Result<Self> {
        map.check_on_graph(xbar, ybar)?;
        check_dim(map.input_dim(), grid.dim())?;
        Ok(HomogeneousSampler {
            q,
            n: map.input_dim(),
            m: map.output_dim(),
            source: Source::Derivative {
                map: map.clone(),
                xbar: xbar.to_vec(),
                ybar: ybar.to_vec(),
                ladder,
            },
            shift: None,
            grid,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// `H + g`.
    pub fn shifted(&self, g: &VectorFn) -> Result<Self> {
        check_dim(self.n, g.input_dim())?;
        check_dim(self.m, g.output_dim())?;
        let mut out = self.clone();
        out.shift = Some(match &self.shift {
            None => g.clone(),
            Some(prev) => {
                let (a, b) = (prev.clone(), g.clone());
                VectorFn::new(self.n, self.m, move |x| {
                    a.eval(x).iter().zip(b.eval(x)).map(|(u, v)| u + v).collect()
                })
            }
        });
        Ok(out)
    }

    pub fn order(&self) -> HolderOrder {
        self.q
    }

    pub fn input_dim(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    fn apply_shift(&self, x: &[f64], img: SetRepr) -> SetRepr {
        match &self.shift {
            Some(g) => img.translated(&g.eval(x)),
            None => img,
        }
    }

    /// `H(x)` at an arbitrary point.
    ///
    /// Exact sources are extended by homogeneity; derivative sources are
    /// evaluated at `x` directly, so homogeneity there is a property of the
    /// estimator rather than of the construction.
    pub fn image(&self, x: &[f64]) -> Result<SetRepr> {
        check_dim(self.n, x.len())?;
        let img = match &self.source {
            Source::Exact(h) => {
                let r = norm(x);
                if r == 0.0 {
                    h(x)
                } else {
                    let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                    let zero = vec![0.0; self.m];
                    h(&u).rescaled(&zero, self.q.scale(r).recip())
                }
            }
            Source::Derivative { map, xbar, ybar, ladder } => {
                graphical_derivative_image(map, xbar, ybar, x, self.q, ladder, None, &self.tol)?
            }
        };
        Ok(self.apply_shift(x, img))
    }

    /// Per-rung images at `u` paired with the merge tolerance of the rung.
    fn rung_images(&self, u: &[f64]) -> Vec<(f64, SetRepr, f64)> {
        match &self.source {
            Source::Exact(h) => vec![(0.0, self.apply_shift(u, h(u)), TAU_MEM)],
            Source::Derivative { map, xbar, ybar, ladder } => ladder
                .rungs()
                .iter()
                .map(|&t| {
                    let img = rung_image(map, xbar, ybar, u, self.q, t, self.tol.eps_inf);
                    (t, self.apply_shift(u, img), 3.0 * t.powf(self.q.get().min(1.0)))
                })
                .collect(),
        }
    }

    fn sweep(&self, per_dir: impl Fn(&[f64]) -> Vec<f64> + Sync) -> (Vec<Vec<f64>>, Vec<f64>) {
        let per: Vec<Vec<f64>> = self.grid.points().par_iter().map(|u| per_dir(u)).collect();
        let scales = self.rung_images(&self.grid.points()[0]).into_iter().map(|r| r.0).collect();
        (per, scales)
    }

    fn fold(&self, per: Vec<Vec<f64>>, scales: Vec<f64>, init: f64, pick: fn(f64, f64) -> f64) -> LimitEstimate {
        let mut acc = vec![init; scales.len()];
        let mut trace = Vec::with_capacity(per.len() * scales.len());
        for (i, vals) in per.iter().enumerate() {
            for (k, &v) in vals.iter().enumerate() {
                acc[k] = pick(acc[k], v);
                trace.push(TraceRow {
                    direction_index: i,
                    t: scales[k],
                    value: v,
                });
            }
        }
        LimitEstimate::from_scales(scales.into_iter().zip(acc).collect(), &self.tol).with_trace(trace)
    }

    /// `‖H‖⊖ = inf_{‖u‖=1} d(0, H(u))`.
    pub fn norm_lower(&self) -> LimitEstimate {
        let zero = vec![0.0; self.m];
        let (per, scales) = self.sweep(|u| {
            self.rung_images(u)
                .into_iter()
                .map(|(_, img, _)| img.distance(&zero))
                .collect()
        });
        self.fold(per, scales, f64::INFINITY, f64::min)
    }

    /// `‖H‖⁺ = sup_{‖u‖=1} sup{‖y‖ : y ∈ H(u)}`, and `+∞` whenever `H(0)`
    /// carries a nonzero point.
    pub fn norm_outer(&self) -> LimitEstimate {
        let (per, scales) = self.sweep(|u| {
            self.rung_images(u)
                .into_iter()
                .map(|(_, img, _)| img.sup_norm())
                .collect()
        });
        let zero = vec![0.0; self.n];
        let at_zero: Vec<f64> = self
            .rung_images(&zero)
            .into_iter()
            .map(|(_, img, tol)| if img.sup_norm() > tol { f64::INFINITY } else { 0.0 })
            .collect();
        let mut est = self.fold(per, scales.clone(), 0.0, f64::max);
        if at_zero.iter().any(|v| v.is_infinite()) {
            let per_scale: Vec<(f64, f64)> = est
                .per_scale
                .iter()
                .zip(&at_zero)
                .map(|(&(t, v), &z)| (t, v.max(z)))
                .collect();
            let trace = std::mem::take(&mut est.trace);
            est = LimitEstimate::from_scales(per_scale, &self.tol).with_trace(trace);
        }
        est
    }

    /// `‖H‖* = inf{⟨u*, u⟩₊ : ‖u‖ = 1, u* ∈ H(u)}` for `n = m`.
    pub fn norm_star(&self) -> Result<LimitEstimate> {
        if self.n != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: self.m,
            });
        }
        let (per, scales) = self.sweep(|u| {
            self.rung_images(u)
                .into_iter()
                .map(|(_, img, _)| img.min_positive_pairing(u))
                .collect()
        });
        Ok(self.fold(per, scales, f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::limit::Verdict;
    use crate::setmap::{make_epigraph_map, ScalarFn};

    fn q(v: f64) -> HolderOrder {
        HolderOrder::new(v).unwrap()
    }

    fn grid1() -> DirectionGrid {
        DirectionGrid::new(1, 2).unwrap()
    }

    fn epi_square_derivative(order: f64) -> HomogeneousSampler {
        let f = make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]));
        HomogeneousSampler::derivative(&f, &[0.0], &[0.0], q(order), ScaleLadder::default(), grid1()).unwrap()
    }

    #[test]
    fn lower_norm_trichotomy() {
        let l1 = epi_square_derivative(1.0).norm_lower();
        assert_eq!(l1.verdict, Verdict::Zero);
        assert!(l1.value.abs() <= 1e-2);
        let l2 = epi_square_derivative(2.0).norm_lower();
        assert!((l2.value - 1.0).abs() <= 2e-2, "{l2:?}");
        assert_eq!(epi_square_derivative(3.0).norm_lower().verdict, Verdict::Infinite);
    }

    #[test]
    fn epigraph_outer_norm_is_infinite() {
        assert!(epi_square_derivative(2.0).norm_outer().is_infinite());
    }

    #[test]
    fn exact_examples() {
        let tol = Tolerances::default();
        let zero = HomogeneousSampler::exact(1, 1, q(1.0), grid1(), |_| SetRepr::point(vec![0.0])).unwrap();
        assert_eq!(zero.norm_outer().value, 0.0);
        let three = HomogeneousSampler::exact(1, 1, q(1.0), grid1(), |u| SetRepr::point(vec![3.0 * u[0]])).unwrap();
        assert!((three.norm_outer().value - 3.0).abs() < 1e-12);
        let id = HomogeneousSampler::exact(1, 1, q(1.0), grid1(), |u| SetRepr::point(vec![u[0]])).unwrap();
        assert_eq!(id.norm_star().unwrap().value, 1.0);
        let dom0 = HomogeneousSampler::exact(1, 1, q(1.0), grid1(), |u| {
            if u[0] == 0.0 {
                SetRepr::point(vec![0.0])
            } else {
                SetRepr::empty(1)
            }
        })
        .unwrap();
        assert_eq!(dom0.norm_star().unwrap().verdict, Verdict::Infinite);
        assert_eq!(dom0.norm_lower().verdict, Verdict::Infinite);
        let _ = tol;
    }

    #[test]
    fn exact_images_are_homogeneous() {
        let h = HomogeneousSampler::exact(1, 1, q(2.0), grid1(), |u| SetRepr::interval(u[0] * u[0], f64::INFINITY)).unwrap();
        assert_eq!(h.image(&[3.0]).unwrap(), SetRepr::interval(9.0, f64::INFINITY));
    }

    #[test]
    fn star_norm_rejects_rectangular() {
        let h = HomogeneousSampler::exact(1, 2, q(1.0), grid1(), |u| SetRepr::point(vec![u[0], 0.0])).unwrap();
        assert!(h.norm_star().is_err());
    }
}
