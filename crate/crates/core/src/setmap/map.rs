use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::setmap::func::{Bounds, ScalarFn, VectorFn};
use crate::setmap::set::SetRepr;

/// Membership tolerance for graph points.
pub const TAU_MEM: f64 = 1e-9;

/// Default number of sampling points per axis inside a sampling box.
pub const DEFAULT_RESOLUTION: usize = 401;

/// Levels of geometric refinement toward the sampling center.
const REFINE_LEVELS: i32 = 60;

/// Output samples per image interval.
const OUTPUT_RESOLUTION: usize = 17;

type ImageOracle = dyn Fn(&[f64]) -> SetRepr + Send + Sync;
type GraphSampler = dyn Fn(&[f64], &[f64], usize) -> Vec<Vec<f64>> + Send + Sync;

/// Set-valued mapping `F: R^n ⇉ R^m` given by an image oracle and a graph
/// sampler.
///
/// The sampler receives a center in `R^(n+m)`, per-coordinate half-widths
/// (possibly infinite) and a resolution, and returns points of `gph F`
/// inside that box.
#[derive(Clone)]
pub struct SetValuedMap {
    n: usize,
    m: usize,
    image: Arc<ImageOracle>,
    sampler: Arc<GraphSampler>,
    inverse_image: Option<Arc<ImageOracle>>,
    domain: Bounds,
}

impl SetValuedMap {
    /// Map whose graph sampler is derived from the image oracle on a grid
    /// over `domain` (used only where the sampling box is unbounded).
    pub fn from_image<F>(n: usize, m: usize, domain: Bounds, image: F) -> Self
    where
        F: Fn(&[f64]) -> SetRepr + Send + Sync + 'static,
    {
        let image: Arc<ImageOracle> = Arc::new(image);
        let sampler = derived_sampler(n, image.clone(), domain.clone());
        SetValuedMap {
            n,
            m,
            image,
            sampler,
            inverse_image: None,
            domain,
        }
    }

    /// Attaches a closed-form `F^{-1}` image oracle, used by [`invert_map`].
    pub fn with_inverse_image<F>(mut self, inverse: F) -> Self
    where
        F: Fn(&[f64]) -> SetRepr + Send + Sync + 'static,
    {
        self.inverse_image = Some(Arc::new(inverse));
        self
    }

    /// Single-valued map `x ↦ {g(x)}`.
    pub fn single_valued(g: VectorFn, domain: Bounds) -> Self {
        let (n, m) = (g.input_dim(), g.output_dim());
        SetValuedMap::from_image(n, m, domain, move |x| {
            let y = g.eval(x);
            if y.iter().any(|v| !v.is_finite()) {
                SetRepr::empty(m)
            } else {
                SetRepr::point(y)
            }
        })
    }

    pub fn input_dim(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &Bounds {
        &self.domain
    }

    pub fn image(&self, x: &[f64]) -> SetRepr {
        debug_assert_eq!(x.len(), self.n);
        (self.image)(x)
    }

    pub fn try_image(&self, x: &[f64]) -> Result<SetRepr> {
        check_dim(self.n, x.len())?;
        Ok(self.image(x))
    }

    /// `d(y, F(x))`.
    pub fn residual(&self, x: &[f64], y: &[f64]) -> f64 {
        self.image(x).distance(y)
    }

    /// Graph points inside the box `center ± half`.
    pub fn graph_sample_box(&self, center: &[f64], half: &[f64], resolution: usize) -> Vec<Vec<f64>> {
        (self.sampler)(center, half, resolution)
    }

    /// Graph points inside the cube of half-width `radius` around `center`.
    pub fn graph_sample(&self, center: &[f64], radius: f64, resolution: usize) -> Vec<Vec<f64>> {
        let half = vec![radius; self.n + self.m];
        self.graph_sample_box(center, &half, resolution)
    }

    /// Fails with a precondition error unless `(x, y)` lies on the graph.
    pub fn check_on_graph(&self, x: &[f64], y: &[f64]) -> Result<()> {
        check_dim(self.n, x.len())?;
        check_dim(self.m, y.len())?;
        let d = self.residual(x, y);
        if d <= TAU_MEM {
            Ok(())
        } else {
            Err(Error::precondition(format!(
                "base point is not on the graph (distance {d:e})"
            )))
        }
    }

    /// `x ↦ F(x) + g(x)`.
    pub fn add_fn(&self, g: &VectorFn) -> Result<SetValuedMap> {
        check_dim(self.n, g.input_dim())?;
        check_dim(self.m, g.output_dim())?;
        let (f, g) = (self.clone(), g.clone());
        Ok(SetValuedMap::from_image(self.n, self.m, self.domain.clone(), move |x| {
            let shift = g.eval(x);
            if shift.iter().any(|v| !v.is_finite()) {
                return SetRepr::empty(f.m);
            }
            f.image(x).translated(&shift)
        }))
    }
}

impl fmt::Debug for SetValuedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetValuedMap")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("exact_inverse", &self.inverse_image.is_some())
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Epigraphical mapping `x ↦ [f(x), +∞)`, empty where `f = +∞`.
pub fn make_epigraph_map(f: &ScalarFn) -> SetValuedMap {
    let domain = f
        .domain_hint()
        .cloned()
        .unwrap_or_else(|| Bounds::cube(f.dim(), 1.0));
    let f = f.clone();
    SetValuedMap::from_image(f.dim(), 1, domain, move |x| {
        let v = f.eval(x);
        if v == f64::INFINITY {
            SetRepr::empty(1)
        } else {
            SetRepr::interval(v, f64::INFINITY)
        }
    })
}

/// `F^{-1}(y) = {x : y ∈ F(x)}`.
///
/// The sampler swaps coordinates of `F`'s sampler, so double inversion
/// reproduces the original samples exactly. Without a closed-form inverse,
/// images are recovered from `F`'s image oracle over `F`'s domain: in one
/// dimension by grid search plus boundary bisection,
/// otherwise by grid filtering at tolerance `max(τ_mem, grid spacing)`.
pub fn invert_map(f: &SetValuedMap) -> SetValuedMap {
    let (n, m) = (f.n, f.m);
    let inner = f.sampler.clone();
    let sampler: Arc<GraphSampler> = Arc::new(move |center: &[f64], half: &[f64], res: usize| {
        let c = swap(center, m);
        let h = swap(half, m);
        inner(&c, &h, res).into_iter().map(|p| swap(&p, n)).collect()
    });
    let image = match &f.inverse_image {
        Some(inv) => inv.clone(),
        None => filtered_inverse(f),
    };
    let domain = output_box(f);
    SetValuedMap {
        n: m,
        m: n,
        image,
        sampler,
        inverse_image: Some(f.image.clone()),
        domain,
    }
}

/// `(a, b) -> (b, a)` where `a` has length `split`.
fn swap(p: &[f64], split: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    out.extend_from_slice(&p[split..]);
    out.extend_from_slice(&p[..split]);
    out
}

fn output_box(f: &SetValuedMap) -> Bounds {
    Bounds::cube(f.m, f.domain.hi.iter().chain(&f.domain.lo).fold(1.0f64, |a, b| a.max(b.abs())))
}

fn filtered_inverse(f: &SetValuedMap) -> Arc<ImageOracle> {
    let n = f.n;
    let res = per_axis(n, DEFAULT_RESOLUTION);
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| linspace(f.domain.lo[i], f.domain.hi[i], res))
        .collect();
    let image = f.image.clone();
    if n == 1 {
        let xs = axes[0].clone();
        return Arc::new(move |y: &[f64]| fibre_1d(&*image, &xs, y));
    }
    let spacing = (0..n)
        .map(|i| (f.domain.hi[i] - f.domain.lo[i]) / (res - 1) as f64)
        .fold(0.0, f64::max);
    let tol = TAU_MEM.max(spacing);
    let grid = product(&axes);
    Arc::new(move |y: &[f64]| {
        let hits: Vec<Vec<f64>> = grid
            .iter()
            .filter(|x| image(x).distance(y) <= tol)
            .cloned()
            .collect();
        SetRepr::cloud(n, hits).unwrap_or(SetRepr::empty(n))
    })
}

const BISECTIONS: usize = 60;
const GOLDEN_STEPS: usize = 80;

/// `{x : y ∈ F(x)}` on a line. Seeds are grid points and local residual
/// minima within `τ_mem`; piece boundaries are bisected against roundoff-level
/// membership so the tolerance does not inflate fibres at fine scales.
fn fibre_1d(image: &ImageOracle, xs: &[f64], y: &[f64]) -> SetRepr {
    let strict = 4.0 * f64::EPSILON * (1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let member = |x: f64| image(&[x]).distance(y) <= strict;
    let res: Vec<f64> = xs.iter().map(|&x| image(&[x]).distance(y)).collect();
    let mut seeds: Vec<(usize, f64)> = Vec::new();
    for i in 0..xs.len() {
        if res[i] <= TAU_MEM {
            seeds.push((i, xs[i]));
            continue;
        }
        let left = if i > 0 { res[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < xs.len() { res[i + 1] } else { f64::INFINITY };
        if res[i].is_finite() && res[i] <= left && res[i] <= right {
            // each half-bracket separately: symmetric fibres straddle a grid point
            for (lo, hi) in [(xs[i.saturating_sub(1)], xs[i]), (xs[i], xs[(i + 1).min(xs.len() - 1)])] {
                if lo == hi {
                    continue;
                }
                let x = golden_min(&|x| image(&[x]).distance(y), lo, hi);
                if image(&[x]).distance(y) <= TAU_MEM {
                    seeds.push((i, x));
                }
            }
        }
    }
    let mut pieces = Vec::with_capacity(seeds.len());
    for &(i, x) in &seeds {
        let lo_bound = xs[i.saturating_sub(1)];
        let hi_bound = xs[(i + 1).min(xs.len() - 1)];
        if !member(x) {
            pieces.push((x, x));
            continue;
        }
        let a = if member(lo_bound) { lo_bound } else { bisect(&member, x, lo_bound) };
        let b = if member(hi_bound) { hi_bound } else { bisect(&member, x, hi_bound) };
        pieces.push((a.min(x), b.max(x)));
    }
    SetRepr::intervals(pieces)
}

/// Last member point on the segment from `inside` toward `outside`.
fn bisect(member: &dyn Fn(f64) -> bool, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if member(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn golden_min(phi: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..GOLDEN_STEPS {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

fn per_axis(n: usize, resolution: usize) -> usize {
    let cap = match n {
        1 => usize::MAX,
        2 => 61,
        _ => 21,
    };
    resolution.clamp(3, cap) | 1
}

pub(crate) fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

/// Input points of the derived sampler: a uniform grid over the box plus a
/// geometric cluster accumulating at the center along axes and diagonals.
fn input_points(center: &[f64], half: &[f64], domain: &Bounds, resolution: usize) -> Vec<Vec<f64>> {
    let n = center.len();
    let (lo, hi): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            if half[i].is_finite() {
                (center[i] - half[i], center[i] + half[i])
            } else {
                (domain.lo[i].min(center[i]), domain.hi[i].max(center[i]))
            }
        })
        .unzip();
    let res = per_axis(n, resolution);
    let axes: Vec<Vec<f64>> = (0..n).map(|i| linspace(lo[i], hi[i], res)).collect();
    let mut pts = product(&axes);
    pts.push(center.to_vec());

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [-1.0, 1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            dirs.push(d);
        }
    }
    if n > 1 {
        for mask in 0..(1usize << n) {
            dirs.push((0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
    }
    for d in &dirs {
        for j in 1..=REFINE_LEVELS {
            let s = 0.5f64.powi(j);
            let p: Vec<f64> = (0..n)
                .map(|i| center[i] + s * d[i] * (0.5 * (hi[i] - lo[i])))
                .collect();
            if p.iter().zip(&lo).zip(&hi).all(|((v, a), b)| v >= a && v <= b) {
                pts.push(p);
            }
        }
    }
    pts
}

fn derived_sampler(n: usize, image: Arc<ImageOracle>, domain: Bounds) -> Arc<GraphSampler> {
    Arc::new(move |center: &[f64], half: &[f64], resolution: usize| {
        let (cx, cy) = center.split_at(n);
        let (hx, hy) = half.split_at(n);
        let xs = input_points(cx, hx, &domain, resolution);
        xs.par_iter()
            .flat_map_iter(|x| {
                let ys = image(x).sample_in_box(cy, hy, OUTPUT_RESOLUTION);
                ys.into_iter().map(move |y| {
                    let mut p = x.clone();
                    p.extend(y);
                    p
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ScalarFn {
        ScalarFn::new(1, |x| x[0] * x[0])
    }

    #[test]
    fn epigraph_images() {
        let f = make_epigraph_map(&square());
        assert_eq!(f.image(&[2.0]), SetRepr::interval(4.0, f64::INFINITY));
        let g = make_epigraph_map(&ScalarFn::new(1, |_| f64::INFINITY));
        assert!(g.image(&[0.3]).is_empty());
        let a = make_epigraph_map(&ScalarFn::new(1, |x| x[0].abs()));
        assert_eq!(a.image(&[-1.0]), SetRepr::interval(1.0, f64::INFINITY));
    }

    #[test]
    fn samples_lie_on_graph() {
        let f = make_epigraph_map(&square());
        let pts = f.graph_sample(&[0.0, 0.0], 0.5, 101);
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(f.residual(&p[..1], &p[1..]) <= TAU_MEM);
            assert!(p[0].abs() <= 0.5 && p[1].abs() <= 0.5);
        }
        assert!(pts.iter().any(|p| p[0] != 0.0 && p[0].abs() < 1e-12));
    }

    #[test]
    fn inversion_swaps_and_is_an_involution() {
        let f = make_epigraph_map(&square());
        let inv = invert_map(&f);
        let twice = invert_map(&inv);
        let a = f.graph_sample(&[0.2, 0.1], 0.3, 41);
        let b = twice.graph_sample(&[0.2, 0.1], 0.3, 41);
        assert_eq!(a, b);
        let s = inv.graph_sample(&[0.1, 0.2], 0.3, 41);
        assert!(s.iter().any(|p| p == &vec![1.0, 1.0]) || a.iter().all(|p| p != &vec![1.0, 1.0]));
        for p in &s {
            assert!(f.residual(&p[1..], &p[..1]) <= TAU_MEM);
        }
        assert!(twice.image(&[2.0]) == f.image(&[2.0]));
    }

    #[test]
    fn linear_map_inverse_by_filtering() {
        let f = SetValuedMap::single_valued(
            VectorFn::new(1, 1, |x| vec![2.0 * x[0]]),
            Bounds::cube(1, 1.0),
        );
        let inv = invert_map(&f);
        let img = inv.image(&[1.0]);
        assert!(img.distance(&[0.5]) <= 1e-9);
        assert!(img.sup_norm() <= 0.5 + 1e-9);
        let epi_inv = invert_map(&make_epigraph_map(&square()));
        let SetRepr::Intervals(v) = epi_inv.image(&[1e-6]) else { panic!() };
        assert_eq!(v.len(), 1);
        assert!((v[0].0 + 1e-3).abs() < 1e-9 && (v[0].1 - 1e-3).abs() < 1e-9, "{v:?}");
        let exact = f.clone().with_inverse_image(|y| SetRepr::point(vec![y[0] / 2.0]));
        assert_eq!(invert_map(&exact).image(&[1.0]), SetRepr::point(vec![0.5]));
    }

    #[test]
    fn off_graph_base_is_rejected() {
        let f = make_epigraph_map(&square());
        assert!(f.check_on_graph(&[0.0], &[0.0]).is_ok());
        assert!(matches!(f.check_on_graph(&[1.0], &[0.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn sum_with_function() {
        let f = make_epigraph_map(&square());
        let g = VectorFn::new(1, 1, |x| vec![-x[0]]);
        let h = f.add_fn(&g).unwrap();
        assert_eq!(h.image(&[1.0]), SetRepr::interval(0.0, f64::INFINITY));
    }
}
