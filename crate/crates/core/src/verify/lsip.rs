use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{close, magnitudes_agree, Ctx, PropertyResult};
use crate::error::Result;
use crate::lsip::calmness::DEFAULT_DELTAS;
use crate::lsip::{
    calmness_certificate, canonical_f, canonical_sharpness, empirical_calmness, feasibility_residual, solve_lp,
    DiscreteProblem, LpStatus, LsipProblem, PerturbationProfile,
};
use crate::moduli::checks::Magnitude;
use crate::moduli::RegularityVerdict;
use crate::setmap::HolderOrder;

const STABILITY: &str = "estimates are stable under refinement of the index discretization";
const SIMPLEX: &str = "the LP solver matches vertex enumeration on bounded planar programs";
const CANONICAL: &str = "the canonical function vanishes at the solution and is positive at other feasible points";
const CHAIN: &str = "positive subderivative norm of the canonical function gives a sharp minimizer and isolated calmness";
const EMPIRICAL: &str = "certified solutions move at most like the q-th root of the perturbation size";

const RANDOM_LPS: usize = 200;
const CANONICAL_POINTS: usize = 100;
const STABILITY_TOL: f64 = 0.05;
const EMPIRICAL_FLOOR: f64 = 0.05;

fn order(q: f64) -> HolderOrder {
    HolderOrder::new(q).expect("orders are positive")
}

/// `min x₁ + x₂` over the nonnegative quadrant cut by `x₁ + 2x₂ <= 4`.
fn vertex_lp() -> DiscreteProblem {
    LsipProblem::finite(
        vec![1.0, 1.0],
        vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 2.0], 4.0)],
    )
    .and_then(|p| p.discretized())
    .expect("fixture is valid")
}

pub(super) fn run(ctx: &mut Ctx) {
    stability(ctx);
    random_lps(ctx);
    canonical_positivity(ctx);
    let semicircle = LsipProblem::semicircle(720).discretized().expect("fixture is valid");
    for (name, p, qv) in [
        ("semicircle", &semicircle, 2.0),
        ("semicircle", &semicircle, 1.0),
        ("vertex", &vertex_lp(), 1.0),
    ] {
        chain(ctx, name, p, order(qv));
    }
}

fn stability(ctx: &mut Ctx) {
    let s = ctx.s;
    let q = order(2.0);
    let r = (|| -> Result<PropertyResult> {
        let coarse = calmness_certificate(&LsipProblem::semicircle(360).discretized()?, None, q, s)?;
        let fine = calmness_certificate(&LsipProblem::semicircle(720).discretized()?, None, q, s)?;
        let (a, b) = (coarse.estimate.value, fine.estimate.value);
        let objective_ok = close(coarse.objective, fine.objective, STABILITY_TOL, 0.0);
        Ok(PropertyResult::new("", STABILITY, objective_ok && close(a, b, STABILITY_TOL, 0.0), a, b, STABILITY_TOL)
            .with_detail(format!("objectives {} and {}", coarse.objective, fine.objective)))
    })();
    ctx.record("lsip.stability.semicircle.q2".into(), STABILITY, r);
}

/// Minimum of `c·x` over all feasible pairwise row intersections.
fn vertex_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let det = a[i][0] * a[j][1] - a[i][1] * a[j][0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(b[i] * a[j][1] - a[i][1] * b[j]) / det, (a[i][0] * b[j] - b[i] * a[j][0]) / det];
            let feasible = a.iter().zip(b).all(|(row, bk)| row[0] * x[0] + row[1] * x[1] <= bk + 1e-9 * (1.0 + bk.abs()));
            if feasible {
                best = best.min(c[0] * x[0] + c[1] * x[1]);
            }
        }
    }
    best
}

fn random_lps(ctx: &mut Ctx) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a5e_b0c5);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut first_failure = None;
    for k in 0..RANDOM_LPS {
        let mut a: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let mut b = vec![10.0; 4];
        for _ in 0..rng.gen_range(1..12) {
            a.push(vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
            b.push(rng.gen_range(-1.0..3.0));
        }
        let c = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let oracle = vertex_enumeration(&c, &a, &b);
        let ok = match solve_lp(&c, &a, &b) {
            Ok(sol) if oracle.is_finite() => {
                let gap = (sol.objective - oracle).abs();
                worst = worst.max(gap);
                sol.status == LpStatus::Optimal && gap <= 1e-8 * (1.0 + oracle.abs())
            }
            Ok(sol) => sol.status == LpStatus::Infeasible,
            Err(_) => false,
        };
        if !ok {
            failures += 1;
            first_failure.get_or_insert(k);
        }
    }
    ctx.push(PropertyResult {
        property_id: "lsip.simplex_vs_vertices".into(),
        ..PropertyResult::new("", SIMPLEX, failures == 0, worst, 1e-8, 0.0)
            .with_detail(format!("{failures} of {RANDOM_LPS} mismatched; first {first_failure:?}"))
    });
}

fn canonical_positivity(ctx: &mut Ctx) {
    for (name, p) in [("semicircle", LsipProblem::semicircle(720).discretized()), ("vertex", Ok(vertex_lp()))] {
        let r = (|| -> Result<PropertyResult> {
            let p = p?;
            let sol = solve_lp(&p.c, &p.a, &p.b)?;
            let f = canonical_f(&p, &sol.x)?;
            let at_base = f.eval(&sol.x);
            let mut rng = ChaCha8Rng::seed_from_u64(0xca11);
            let mut min_off: f64 = f64::INFINITY;
            let mut drawn = 0;
            while drawn < CANONICAL_POINTS {
                let x: Vec<f64> = (0..p.n).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let dist = x.iter().zip(&sol.x).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                if feasibility_residual(&x, &p.b, &p)? > 0.0 || dist < 1e-3 {
                    continue;
                }
                drawn += 1;
                min_off = min_off.min(f.eval(&x));
            }
            let pass = at_base.abs() <= 1e-9 && min_off > 0.0;
            Ok(PropertyResult::new("", CANONICAL, pass, at_base, min_off, 0.0)
                .with_detail("lhs: value at the solution, rhs: least value at other feasible points"))
        })();
        ctx.record(format!("lsip.canonical_positive.{name}"), CANONICAL, r);
    }
}

fn chain(ctx: &mut Ctx, name: &str, p: &DiscreteProblem, q: HolderOrder) {
    let s = ctx.s;
    let tag = format!("{name}.q{}", q.get());
    let r = (|| -> Result<(PropertyResult, bool, Vec<f64>)> {
        let cert = calmness_certificate(p, None, q, s)?;
        let sharp = canonical_sharpness(p, &cert.xbar, q, s)?;
        let (a, b) = (Magnitude::of_limit(&cert.estimate), Magnitude::of_report(&sharp));
        // near the discretization resolution the sharp estimate may stay
        // inconclusive; it must not contradict the certificate
        let consistent = match sharp.verdict {
            RegularityVerdict::Holds => cert.certified,
            RegularityVerdict::Fails => !cert.certified,
            RegularityVerdict::Inconclusive => true,
        };
        let pass = magnitudes_agree(a, b, s.tol.chained_slack) && consistent;
        let res = PropertyResult::new("", CHAIN, pass, a.value(), b.value(), s.tol.chained_slack)
            .with_detail(format!("certified={} sharp verdict {:?}", cert.certified, sharp.verdict));
        Ok((res, cert.certified, cert.xbar))
    })();
    match r {
        Ok((res, certified, xbar)) => {
            ctx.record(format!("lsip.chain.{tag}"), CHAIN, Ok(res));
            if certified {
                let r = empirical_calmness(p, &xbar, q, &PerturbationProfile::ALL, &DEFAULT_DELTAS).map(|e| {
                    PropertyResult::new("", EMPIRICAL, e.min_quotient >= EMPIRICAL_FLOOR, e.min_quotient, EMPIRICAL_FLOOR, 0.0)
                        .with_detail(format!("{} samples, {} skipped", e.samples.len(), e.skipped))
                });
                ctx.record(format!("lsip.empirical_calmness.{tag}"), EMPIRICAL, r);
            }
        }
        Err(e) => ctx.record(format!("lsip.chain.{tag}"), CHAIN, Err(e)),
    }
}
