use rayon::prelude::*;

use crate::setmap::{DirectionGrid, ScaleLadder};

/// Radial samples per grid direction in each annulus.
pub const RADIAL_SAMPLES: usize = 64;

/// Default neighbourhood radii `0.5 * 0.5^k`, `k < 12`.
pub fn default_radii() -> ScaleLadder {
    ScaleLadder::new(0.5, 0.5, 12).expect("default radii are valid")
}

/// Annulus `{x : inner < ‖x - center‖ <= outer}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn contains(&self, center: &[f64], x: &[f64]) -> bool {
        let r = dist(center, x);
        r > self.inner && r <= self.outer * (1.0 + 1e-12)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Consecutive radius pairs, coarse to fine.
pub(crate) fn annuli(radii: &ScaleLadder) -> Vec<Annulus> {
    radii
        .rungs()
        .windows(2)
        .map(|w| Annulus { inner: w[1], outer: w[0] })
        .collect()
}

/// Golden-ratio radial placement inside `(inner, outer]`, always including
/// the outer radius.
pub(crate) fn annulus_points(center: &[f64], a: Annulus, grid: &DirectionGrid) -> Vec<Vec<f64>> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let width = a.outer - a.inner;
    let mut out = Vec::with_capacity(grid.len() * RADIAL_SAMPLES);
    for (i, u) in grid.points().iter().enumerate() {
        for j in 0..RADIAL_SAMPLES {
            let frac = if j == 0 { 1.0 } else { ((j + i) as f64 * inv_phi).fract() };
            let rho = a.inner + width * frac.max(1e-3);
            out.push(center.iter().zip(u).map(|(c, d)| c + rho * d).collect());
        }
    }
    out
}

const REFINE_MAX_EVALS: usize = 300;

/// Compass search on `phi` restricted to the annulus.
fn refine(phi: &(dyn Fn(&[f64]) -> f64 + Sync), center: &[f64], a: Annulus, start: Vec<f64>, start_val: f64) -> (Vec<f64>, f64) {
    let n = center.len();
    let (mut best, mut best_val) = (start, start_val);
    let mut step = 0.25 * (a.outer - a.inner);
    let mut evals = 0;
    while step > 1e-7 * a.outer && evals < REFINE_MAX_EVALS {
        let mut moved = false;
        'axes: for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut cand = best.clone();
                cand[i] += s * step;
                if !a.contains(center, &cand) {
                    continue;
                }
                let v = phi(&cand);
                evals += 1;
                if v < best_val {
                    best = cand;
                    best_val = v;
                    moved = true;
                    break 'axes;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best, best_val)
}

/// Infimum of `phi` over each annulus, with its minimizer.
///
/// The reduction runs in sample order, so the result is independent of
/// thread scheduling.
pub(crate) fn annulus_minima(
    phi: &(dyn Fn(&[f64]) -> f64 + Sync),
    center: &[f64],
    radii: &ScaleLadder,
    grid: &DirectionGrid,
) -> Vec<(Annulus, Vec<f64>, f64)> {
    annuli(radii)
        .into_par_iter()
        .map(|a| {
            let pts = annulus_points(center, a, grid);
            let vals: Vec<f64> = pts.iter().map(|x| phi(x)).collect();
            let (mut arg, mut best) = (pts[0].clone(), vals[0]);
            for (p, v) in pts.iter().zip(&vals) {
                if *v < best {
                    best = *v;
                    arg = p.clone();
                }
            }
            if best.is_finite() {
                let (x, v) = refine(phi, center, a, arg.clone(), best);
                if v < best {
                    arg = x;
                    best = v;
                }
            }
            (a, arg, best)
        })
        .collect()
}

/// Minimum over a finite point list restricted to an annulus.
pub(crate) fn filtered_minimum(
    phi: &dyn Fn(&[f64]) -> f64,
    points: &[Vec<f64>],
    keep: impl Fn(&[f64]) -> bool,
) -> Option<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for p in points.iter().filter(|p| keep(p)) {
        let v = phi(p);
        if best.as_ref().map_or(true, |b| v < b.1) {
            best = Some((p.clone(), v));
        }
    }
    best
}
