//! Minimization of a quotient over the box ball `B∞(x, r)`.

/// Offsets per axis of the seed grid: 9 in 1-D, 5 per axis in 2-D and 3 in 3-D.
fn seeds_per_axis(n: usize) -> usize {
    match n {
        1 => 9,
        2 => 5,
        _ => 3,
    }
}

/// Seed points of the ball around `x` with radius `r`.
pub(crate) fn ball_seeds(x: &[f64], r: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let k = seeds_per_axis(n);
    let offsets: Vec<f64> = (0..k).map(|i| -1.0 + 2.0 * i as f64 / (k - 1) as f64).collect();
    let mut out = vec![Vec::with_capacity(n)];
    for &xi in x {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                offsets.iter().map(move |o| {
                    let mut q = p.clone();
                    q.push(xi + r * o);
                    q
                })
            })
            .collect();
    }
    out
}

const COMPASS_MAX_EVALS: usize = 400;
const COMPASS_MIN_STEP: f64 = 1e-7;

/// Compass search minimizing `phi` inside the ball, started at `start`.
fn compass(phi: &dyn Fn(&[f64]) -> f64, x: &[f64], r: f64, start: &[f64], start_val: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut best = start.to_vec();
    let mut best_val = start_val;
    let mut step = 0.25 * r;
    let mut evals = 0;
    while step >= COMPASS_MIN_STEP * r && evals < COMPASS_MAX_EVALS {
        let mut moved = false;
        'axes: for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut cand = best.clone();
                cand[i] = (cand[i] + s * step).clamp(x[i] - r, x[i] + r);
                if cand[i] == best[i] {
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

/// Approximate `min` of `phi` over `B∞(x, r)`: best seed value, refined by
/// compass search from the two best seeds.
pub(crate) fn ball_min(phi: &dyn Fn(&[f64]) -> f64, x: &[f64], r: f64) -> (Vec<f64>, f64) {
    let mut seeds: Vec<(Vec<f64>, f64)> = ball_seeds(x, r)
        .into_iter()
        .map(|u| {
            let v = phi(&u);
            (u, v)
        })
        .collect();
    seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best = seeds[0].clone();
    for (u, v) in seeds.iter().take(2) {
        if v.is_finite() {
            let cand = compass(phi, x, r, u, *v);
            if cand.1 < best.1 {
                best = cand;
            }
        }
    }
    best
}

/// Approximate `max` of `phi` over `B∞(x, r)`.
pub(crate) fn ball_max(phi: &dyn Fn(&[f64]) -> f64, x: &[f64], r: f64) -> (Vec<f64>, f64) {
    let neg = |u: &[f64]| -phi(u);
    let (u, v) = ball_min(&neg, x, r);
    (u, -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_counts() {
        assert_eq!(ball_seeds(&[0.0], 1.0).len(), 9);
        assert_eq!(ball_seeds(&[0.0, 0.0], 1.0).len(), 25);
        assert_eq!(ball_seeds(&[0.0, 0.0, 0.0], 1.0).len(), 27);
    }

    #[test]
    fn compass_reaches_off_grid_minimum() {
        let phi = |u: &[f64]| (u[0] - 0.137).powi(2) + (u[1] - 0.9).powi(2);
        let (u, v) = ball_min(&phi, &[0.0, 1.0], 0.5);
        assert!(v < 1e-10, "{v}");
        assert!((u[0] - 0.137).abs() < 1e-5);
        let (_, m) = ball_max(&phi, &[0.0, 1.0], 0.5);
        assert!(m > 0.5);
    }
}
