use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lsip::problem::DiscreteProblem;
use crate::lsip::simplex::{solve_lp, LpStatus};
use crate::setmap::func::dot;
use crate::setmap::ScalarFn;

/// Strict-feasibility margin required by the Slater check.
pub const SLATER_MARGIN: f64 = 1e-8;
/// Box bound on `x` in the Slater LP.
pub const SLATER_BOX: f64 = 1e3;
/// Largest active set the ENC enumeration accepts.
pub const ENC_ACTIVE_CAP: usize = 30;

/// `max_t (⟨a_t, x⟩ - b_t)`; `-∞` without constraints.
pub fn feasibility_residual(x: &[f64], b: &[f64], p: &DiscreteProblem) -> Result<f64> {
    check_dim(p.n, x.len())?;
    check_dim(p.len(), b.len())?;
    Ok(p.a.iter().zip(b).map(|(a, bt)| dot(a, x) - bt).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaterReport {
    pub holds: bool,
    pub witness: Vec<f64>,
    /// Optimal margin `s` of `⟨a_t, x⟩ + s <= b_t`, capped at 1.
    pub margin: f64,
}

/// Solves `max s` subject to `⟨a_t, x⟩ + s <= b_t`, `‖x‖∞ <= box`, `s <= 1`.
pub fn slater_check(p: &DiscreteProblem) -> Result<SlaterReport> {
    let n = p.n;
    let mut a = Vec::with_capacity(p.len() + 2 * n + 1);
    let mut b = Vec::with_capacity(a.capacity());
    for (row, bt) in p.a.iter().zip(&p.b) {
        let mut r = row.clone();
        r.push(1.0);
        a.push(r);
        b.push(*bt);
    }
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; n + 1];
            r[i] = s;
            a.push(r);
            b.push(SLATER_BOX);
        }
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    a.push(cap);
    b.push(1.0);
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;
    let sol = solve_lp(&c, &a, &b)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("Slater LP ended {:?}", sol.status)));
    }
    let margin = sol.x[n];
    Ok(SlaterReport {
        holds: margin > SLATER_MARGIN,
        witness: sol.x[..n].to_vec(),
        margin,
    })
}

/// Default active tolerance `1e-6 (1 + ‖b‖∞)`.
pub fn default_active_tol(b: &[f64]) -> f64 {
    1e-6 * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// `T_b(x) = {t : |⟨a_t, x⟩ - b_t| <= tol}`.
pub fn active_indices(x: &[f64], b: &[f64], p: &DiscreteProblem, tol: Option<f64>) -> Result<Vec<usize>> {
    let tol = tol.unwrap_or_else(|| default_active_tol(b));
    let r = feasibility_residual(x, b, p)?;
    if r > tol {
        return Err(Error::precondition(format!("point is infeasible (residual {r:e})")));
    }
    Ok(p.a
        .iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (a, bt))| (dot(a, x) - *bt).abs() <= tol)
        .map(|(i, _)| i)
        .collect())
}

/// `x ↦ max{⟨c, x - xbar⟩, max_t (⟨a_t, x⟩ - b_t)}`, zero exactly on the
/// solution set.
pub fn canonical_f(p: &DiscreteProblem, xbar: &[f64]) -> Result<ScalarFn> {
    let r = feasibility_residual(xbar, &p.b, p)?;
    if r > default_active_tol(&p.b) {
        return Err(Error::precondition(format!("base point is infeasible (residual {r:e})")));
    }
    let (a, b, c, xb) = (p.a.clone(), p.b.clone(), p.c.clone(), xbar.to_vec());
    let cx = dot(&c, &xb);
    Ok(ScalarFn::new(p.n, move |x| {
        let mut v = dot(&c, x) - cx;
        for (row, bt) in a.iter().zip(&b) {
            let w = dot(row, x) - bt;
            if w > v {
                v = w;
            }
        }
        v
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncReport {
    pub holds: bool,
    pub slater: bool,
    pub active: Vec<usize>,
    /// A subset `D` of the active set with `|D| < n` and `-c ∈ cone{a_t : t ∈ D}`.
    pub violating: Option<Vec<usize>>,
    /// Parameter values of `violating`.
    pub violating_params: Option<Vec<f64>>,
    /// ℓ1 tolerance used for cone membership.
    pub cone_tol: f64,
}

/// ℓ1 distance from `target` to `cone{generators}`.
pub fn cone_residual(generators: &[&Vec<f64>], target: &[f64]) -> Result<f64> {
    let n = target.len();
    let k = generators.len();
    if k == 0 {
        return Ok(target.iter().map(|v| v.abs()).sum());
    }
    // Variables (γ ∈ R^k, r ∈ R^n): min Σ r, γ >= 0, |Σγ g - target| <= r.
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..k {
        let mut row = vec![0.0; k + n];
        row[j] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; k + n];
            for j in 0..k {
                row[j] = s * generators[j][i];
            }
            row[k + i] = -1.0;
            a.push(row);
            b.push(s * target[i]);
        }
    }
    let mut c = vec![0.0; k + n];
    for v in c.iter_mut().skip(k) {
        *v = 1.0;
    }
    let sol = solve_lp(&c, &a, &b)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective.max(0.0)),
        s => Err(Error::Lp(format!("cone membership LP ended {s:?}"))),
    }
}

/// Extended Nürnberger condition at `xbar`.
///
/// Parametric families only resolve the cone up to the grid, so membership
/// is accepted within `1e-9 + ω‖c‖₁` with `ω` the spacing between
/// neighbouring `a_t`; finite families use `1e-9`.
pub fn enc_check(p: &DiscreteProblem, xbar: &[f64]) -> Result<EncReport> {
    let slater = slater_check(p)?.holds;
    let active = active_indices(xbar, &p.b, p, None)?;
    let cone_tol = 1e-9 + p.spacing * p.c.iter().map(|v| v.abs()).sum::<f64>();
    let mut report = EncReport {
        holds: false,
        slater,
        active: active.clone(),
        violating: None,
        violating_params: None,
        cone_tol,
    };
    if !slater {
        return Ok(report);
    }
    if active.len() > ENC_ACTIVE_CAP {
        return Err(Error::usage(format!(
            "{} active indices exceed the enumeration cap of {ENC_ACTIVE_CAP}; use a coarser active tolerance",
            active.len()
        )));
    }
    let target: Vec<f64> = p.c.iter().map(|v| -v).collect();
    let max_size = p.n.saturating_sub(1).min(active.len());
    for size in 0..=max_size {
        for subset in combinations(&active, size) {
            let gens: Vec<&Vec<f64>> = subset.iter().map(|&i| &p.a[i]).collect();
            if cone_residual(&gens, &target)? <= cone_tol {
                report.violating_params = Some(subset.iter().map(|&i| p.params[i]).collect());
                report.violating = Some(subset);
                return Ok(report);
            }
        }
    }
    report.holds = true;
    Ok(report)
}

/// All `k`-subsets of `items` in lexicographic order.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsip::problem::LsipProblem;
    use std::f64::consts::PI;

    fn circle() -> DiscreteProblem {
        LsipProblem::semicircle(720).discretized().unwrap()
    }

    #[test]
    fn residual_examples() {
        let p = circle();
        assert!(feasibility_residual(&[-1.0, 0.0], &p.b, &p).unwrap().abs() < 1e-4);
        assert!((feasibility_residual(&[0.0, 0.0], &p.b, &p).unwrap() + 1.0).abs() < 1e-15);
        assert!((feasibility_residual(&[2.0, 0.0], &p.b, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slater_examples() {
        let s = slater_check(&circle()).unwrap();
        assert!(s.holds && (s.margin - 1.0).abs() < 1e-12);
        assert!(feasibility_residual(&s.witness, &circle().b, &circle()).unwrap() <= -1.0 + 1e-9);
        let pinned = LsipProblem::finite(vec![0.0], vec![(vec![1.0], 0.0), (vec![-1.0], 0.0)]).unwrap();
        assert!(!slater_check(&pinned.discretized().unwrap()).unwrap().holds);
        let half = LsipProblem::finite(vec![0.0], vec![(vec![1.0], 1.0)]).unwrap();
        assert!(slater_check(&half.discretized().unwrap()).unwrap().holds);
    }

    #[test]
    fn active_examples() {
        let p = LsipProblem::finite(vec![1.0, 1.0], vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 1.0], 5.0)])
            .unwrap()
            .discretized()
            .unwrap();
        assert_eq!(active_indices(&[0.0, 0.0], &p.b, &p, None).unwrap(), vec![0, 1]);
        assert!(active_indices(&[1.0, 1.0], &p.b, &p, None).unwrap().is_empty());
        assert!(active_indices(&[-1.0, 0.0], &p.b, &p, None).is_err());
    }

    #[test]
    fn canonical_function_matches_closed_form() {
        let p = circle();
        let f = canonical_f(&p, &[-1.0, 0.0]).unwrap();
        assert!(f.eval(&[-1.0, 0.0]).abs() < 1e-4);
        assert!((f.eval(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
        for x in [[0.3f64, -0.2], [-0.9, 0.5], [1.2, 0.4]] {
            let exact = (x[0] + 1.0).max((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0);
            assert!((f.eval(&x) - exact).abs() < 1e-4);
        }
    }

    #[test]
    fn enc_examples() {
        let p = circle();
        let sol = solve_lp(&p.c, &p.a, &p.b).unwrap();
        let e = enc_check(&p, &sol.x).unwrap();
        assert!(e.slater && !e.holds);
        let t = e.violating_params.unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0] - PI).abs() <= p.spacing);

        let q = LsipProblem::finite(vec![1.0, 1.0], vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 1.0], 5.0)])
            .unwrap()
            .discretized()
            .unwrap();
        assert!(enc_check(&q, &[0.0, 0.0]).unwrap().holds);
        let r = LsipProblem::finite(vec![1.0, 1.0], vec![(vec![1.0, 1.0], 5.0), (vec![-1.0, 0.0], 3.0), (vec![0.0, -1.0], 3.0)])
            .unwrap()
            .discretized()
            .unwrap();
        let e = enc_check(&r, &[-3.0, -3.0]).unwrap();
        assert!(e.holds);
        let interior = enc_check(&r, &[0.0, 0.0]).unwrap();
        assert!(interior.active.is_empty() && interior.holds);
    }
}
