use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{subderivative_norm, LimitEstimate};
use crate::error::{check_dim, Error, Result};
use crate::lsip::analysis::{canonical_f, default_active_tol, feasibility_residual, slater_check};
use crate::lsip::problem::DiscreteProblem;
use crate::lsip::simplex::{solve_lp, LpStatus};
use crate::moduli::{sharp_minimum_modulus, RegularityReport};
use crate::settings::Settings;
use crate::setmap::func::dot;
use crate::setmap::{HolderOrder, ScaleLadder};

/// Discretized families resolve nothing below this multiple of the spacing
/// between neighbouring constraint normals.
const RESOLUTION_FACTOR: f64 = 1.25;
/// Coordinate spread on the optimal face tolerated by the uniqueness probe.
const UNIQUENESS_TOL: f64 = 1e-6;

/// Drops ladder rungs below the resolution of a discretized family.
pub fn resolution_ladder(p: &DiscreteProblem, ladder: &ScaleLadder) -> ScaleLadder {
    if p.parametric && p.spacing > 0.0 {
        ladder.truncated_at(RESOLUTION_FACTOR * p.spacing)
    } else {
        ladder.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub unique: bool,
    /// Largest coordinate range over the optimal face.
    pub spread: f64,
}

/// Minimizes and maximizes each coordinate over the optimal face.
pub fn uniqueness_probe(p: &DiscreteProblem, optimum: f64) -> Result<UniquenessProbe> {
    let mut a = p.a.clone();
    let mut b = p.b.clone();
    a.push(p.c.clone());
    b.push(optimum + 1e-12 * (1.0 + optimum.abs()));
    let mut spread: f64 = 0.0;
    for i in 0..p.n {
        let mut e = vec![0.0; p.n];
        e[i] = 1.0;
        let lo = solve_lp(&e, &a, &b)?;
        e[i] = -1.0;
        let hi = solve_lp(&e, &a, &b)?;
        if lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal {
            return Ok(UniquenessProbe {
                unique: false,
                spread: f64::INFINITY,
            });
        }
        spread = spread.max(hi.x[i] - lo.x[i]);
    }
    Ok(UniquenessProbe {
        unique: spread <= UNIQUENESS_TOL,
        spread,
    })
}

/// Status of the outer-norm criterion, which needs a finite index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterNormCriterion {
    NotApplicable,
    NotEvaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalmnessCertificate {
    pub q: HolderOrder,
    pub xbar: Vec<f64>,
    pub objective: f64,
    pub slater: bool,
    pub uniqueness: UniquenessProbe,
    /// `‖f'_q(xbar; ·)‖` of the canonical function.
    pub estimate: LimitEstimate,
    pub certified: bool,
    pub outer_norm_criterion: OuterNormCriterion,
}

/// Solves the LP and checks that `xbar` (or the LP solution) is its unique
/// solution under the Slater condition.
pub fn certified_base(p: &DiscreteProblem, xbar: Option<&[f64]>) -> Result<(Vec<f64>, f64, UniquenessProbe)> {
    if !slater_check(p)?.holds {
        return Err(Error::precondition("the Slater condition fails"));
    }
    let sol = solve_lp(&p.c, &p.a, &p.b)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::precondition(format!("the LP is {:?}", sol.status).to_lowercase()));
    }
    let x = match xbar {
        Some(x) => {
            check_dim(p.n, x.len())?;
            let gap = dot(&p.c, x) - sol.objective;
            let tol = default_active_tol(&p.b);
            if feasibility_residual(x, &p.b, p)? > tol || gap > tol * (1.0 + sol.objective.abs()) {
                return Err(Error::precondition("the base point does not solve the LP"));
            }
            x.to_vec()
        }
        None => sol.x.clone(),
    };
    let probe = uniqueness_probe(p, sol.objective)?;
    if !probe.unique {
        return Err(Error::precondition(format!(
            "the solution set is not a singleton (coordinate spread {:e})",
            probe.spread
        )));
    }
    Ok((x, sol.objective, probe))
}

/// `‖f'_q(xbar; ·)‖ > 0` for the canonical function certifies `q`-order
/// isolated calmness of the solution mapping.
pub fn calmness_certificate(p: &DiscreteProblem, xbar: Option<&[f64]>, q: HolderOrder, s: &Settings) -> Result<CalmnessCertificate> {
    let (x, objective, uniqueness) = certified_base(p, xbar)?;
    let f = canonical_f(p, &x)?;
    let ladder = resolution_ladder(p, &s.ladder);
    let estimate = subderivative_norm(&f, &x, q, &s.grid(p.n)?, &ladder, &s.tol)?;
    Ok(CalmnessCertificate {
        q,
        xbar: x,
        objective,
        slater: true,
        uniqueness,
        certified: estimate.verdict.is_positive(),
        estimate,
        outer_norm_criterion: if p.parametric {
            OuterNormCriterion::NotApplicable
        } else {
            OuterNormCriterion::NotEvaluated
        },
    })
}

/// Sharp-minimizer criterion on the canonical function, with radii cut at
/// the discretization resolution.
pub fn canonical_sharpness(p: &DiscreteProblem, xbar: &[f64], q: HolderOrder, s: &Settings) -> Result<RegularityReport> {
    let f = canonical_f(p, xbar)?;
    let radii = resolution_ladder(p, &s.radii);
    sharp_minimum_modulus(&f, xbar, q, &radii, &s.grid(p.n)?, &s.tol)
}

/// Named perturbation profile `t ↦ φ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationProfile {
    Lift,
    Drop,
    Cos,
    Sin,
    Cos2,
    Sin2,
    BumpLeft,
    BumpCenter,
}

impl PerturbationProfile {
    pub const ALL: [PerturbationProfile; 8] = [
        PerturbationProfile::Lift,
        PerturbationProfile::Drop,
        PerturbationProfile::Cos,
        PerturbationProfile::Sin,
        PerturbationProfile::Cos2,
        PerturbationProfile::Sin2,
        PerturbationProfile::BumpLeft,
        PerturbationProfile::BumpCenter,
    ];

    /// Value at the angle `s ∈ [0, 2π]` the parameter range is mapped onto.
    pub fn eval(self, s: f64) -> f64 {
        let bump = |c: f64| (-(s - c).powi(2) / 0.1).exp();
        match self {
            PerturbationProfile::Lift => 1.0,
            PerturbationProfile::Drop => -1.0,
            PerturbationProfile::Cos => s.cos(),
            PerturbationProfile::Sin => s.sin(),
            PerturbationProfile::Cos2 => (2.0 * s).cos(),
            PerturbationProfile::Sin2 => (2.0 * s).sin(),
            PerturbationProfile::BumpLeft => bump(0.5 * PI),
            PerturbationProfile::BumpCenter => bump(PI),
        }
    }
}

pub const DEFAULT_DELTAS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalmnessSample {
    pub profile: PerturbationProfile,
    pub delta: f64,
    /// `‖δφ‖∞ / ‖x(δ) - xbar‖^q`; `+∞` when the solution does not move.
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCalmness {
    pub min_quotient: f64,
    pub witness: Option<CalmnessSample>,
    pub samples: Vec<CalmnessSample>,
    /// Perturbed problems that were infeasible or unbounded.
    pub skipped: usize,
}

/// Smallest `‖δφ‖∞ / ‖x(δ) - xbar‖^q` over perturbations `b + δφ`.
pub fn empirical_calmness(
    p: &DiscreteProblem,
    xbar: &[f64],
    q: HolderOrder,
    profiles: &[PerturbationProfile],
    deltas: &[f64],
) -> Result<EmpiricalCalmness> {
    check_dim(p.n, xbar.len())?;
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::usage("perturbation sizes must be positive"));
    }
    let (lo, hi) = match (p.params.first(), p.params.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => (0.0, 1.0),
    };
    let angle = |t: f64| 2.0 * PI * (t - lo) / (hi - lo);
    let jobs: Vec<(PerturbationProfile, f64)> = profiles.iter().flat_map(|&ph| deltas.iter().map(move |&d| (ph, d))).collect();
    let results: Vec<Result<Option<CalmnessSample>>> = jobs
        .par_iter()
        .map(|&(profile, delta)| {
            let phi: Vec<f64> = p.params.iter().map(|&t| profile.eval(angle(t))).collect();
            let b: Vec<f64> = p.b.iter().zip(&phi).map(|(bt, v)| bt + delta * v).collect();
            let sol = solve_lp(&p.c, &p.a, &b)?;
            if sol.status != LpStatus::Optimal {
                return Ok(None);
            }
            let size = delta * phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let moved = sol.x.iter().zip(xbar).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let quotient = if moved == 0.0 { f64::INFINITY } else { size / q.scale(moved) };
            Ok(Some(CalmnessSample { profile, delta, quotient }))
        })
        .collect();
    let mut samples = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(s) => samples.push(s),
            None => skipped += 1,
        }
    }
    let witness = samples.iter().min_by(|a, b| a.quotient.total_cmp(&b.quotient)).cloned();
    Ok(EmpiricalCalmness {
        min_quotient: witness.as_ref().map_or(f64::INFINITY, |w| w.quotient),
        witness,
        samples,
        skipped,
    })
}
