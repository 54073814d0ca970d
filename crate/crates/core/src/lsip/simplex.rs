//! Dense tableau simplex for `min c·x` subject to `A x <= b` with free `x`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Pivot tolerance.
pub const LP_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Rows tight at `x`.
    pub active: Vec<usize>,
    /// Nonnegative multipliers with `c + Aᵀλ = 0`, supported on `active`.
    pub multipliers: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize, m: usize) -> Self {
        LpSolution {
            status,
            x: vec![f64::NAN; n],
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            active: Vec::new(),
            multipliers: vec![0.0; m],
        }
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.t[i][j];
                }
            }
        }
        d
    }

    /// Minimizes `cost` over columns allowed by `usable`, with Bland's rule.
    fn optimize(&mut self, cost: &[f64], usable: &dyn Fn(usize) -> bool) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..self.cols).find(|&j| usable(j) && d[j] < -LP_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[enter];
                if a > LP_TOL {
                    let ratio = row[self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - LP_TOL || (ratio <= lr + LP_TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(false),
            }
        }
        Err(Error::Lp("pivot limit reached".into()))
    }
}

/// Solves `min c·x` subject to `A x <= b`.
pub fn solve_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    check_dim(m, b.len())?;
    for row in a {
        check_dim(n, row.len())?;
    }
    if c.iter().chain(b).chain(a.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Lp("LP data must be finite".into()));
    }

    // Columns: x⁺ (n), x⁻ (n), slacks (m), artificials (one per row with b < 0).
    let neg: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = neg.len();
    let cols = 2 * n + m + n_art;
    let art0 = 2 * n + m;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut art_k = 0;
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = s * a[i][j];
            t[i][n + j] = -s * a[i][j];
        }
        t[i][2 * n + i] = s;
        t[i][cols] = s * b[i];
        if b[i] < 0.0 {
            t[i][art0 + art_k] = 1.0;
            basis[i] = art0 + art_k;
            art_k += 1;
        } else {
            basis[i] = 2 * n + i;
        }
    }
    let mut tab = Tableau { t, basis, cols };

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for v in phase1.iter_mut().skip(art0) {
            *v = 1.0;
        }
        tab.optimize(&phase1, &|_| true)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bj)| bj >= art0)
            .map(|(i, _)| tab.t[i][cols])
            .sum();
        if infeas > LP_TOL * (1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n, m));
        }
        // Drive degenerate artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= art0 {
                if let Some(j) = (0..art0).find(|&j| tab.t[i][j].abs() > LP_TOL) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[j] = c[j];
        cost[n + j] = -c[j];
    }
    let bounded = tab.optimize(&cost, &|j| j < art0)?;
    if !bounded {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, n, m));
    }

    let mut x = vec![0.0; n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        let v = tab.t[i][cols];
        if bj < n {
            x[bj] += v;
        } else if bj < 2 * n {
            x[bj - n] -= v;
        }
    }
    let d = tab.reduced_costs(&cost);
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let active: Vec<usize> = (0..m)
        .filter(|&i| {
            let lhs: f64 = a[i].iter().zip(&x).map(|(u, v)| u * v).sum();
            (lhs - b[i]).abs() <= 1e-8 * (1.0 + b[i].abs())
        })
        .collect();
    let multipliers = (0..m).map(|i| d[2 * n + i].max(0.0)).collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        active,
        multipliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_examples() {
        let s = solve_lp(&[1.0], &[vec![-1.0]], &[0.0]).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.x[0].abs() < 1e-12);
        assert_eq!(s.active, vec![0]);
        assert!((s.multipliers[0] - 1.0).abs() < 1e-12);
        assert_eq!(solve_lp(&[1.0], &[], &[]).unwrap().status, LpStatus::Unbounded);
        let inf = solve_lp(&[1.0], &[vec![1.0], vec![-1.0]], &[-1.0, -1.0]).unwrap();
        assert_eq!(inf.status, LpStatus::Infeasible);
    }

    #[test]
    fn phase_one_finds_a_shifted_optimum() {
        // min x + y with x >= 1, y >= 2, x + y <= 10.
        let a = vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]];
        let s = solve_lp(&[1.0, 1.0], &a, &[-1.0, -2.0, 10.0]).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 2.0).abs() < 1e-12);
        assert!((s.objective - 3.0).abs() < 1e-12);
        // KKT: c + Aᵀλ = 0.
        for j in 0..2 {
            let r: f64 = [1.0, 1.0][j] + (0..3).map(|i| a[i][j] * s.multipliers[i]).sum::<f64>();
            assert!(r.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_data() {
        assert!(solve_lp(&[1.0, 0.0], &[vec![1.0]], &[0.0]).is_err());
        assert!(solve_lp(&[f64::NAN], &[vec![1.0]], &[0.0]).is_err());
    }
}
