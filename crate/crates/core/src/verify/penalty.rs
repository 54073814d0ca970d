use super::{close, Ctx, PropertyResult};
use crate::calculus::{default_cluster_tol, hadamard_subderivative};
use crate::error::Result;
use crate::penalty::{compare_power_example, penalty_threshold, sharp_penalty_check, PenaltyProblem, PowerConvention, Sufficiency};
use crate::setmap::{DirectionGrid, HolderOrder, ScalarFn};

const SUPERADDITIVE: &str = "the subderivative of a sum is at least the sum of subderivatives";
const POWER: &str = "the order-q subderivative of (g+)^p is the p-th power of the order-q/p subderivative of g+";
const MAX_RULE: &str = "the subderivative of a pointwise max of active pieces is the max of their subderivatives";
const SOUND: &str = "penalty parameters above the threshold make the base point a sharp minimizer of the penalty function";
const CONVERSE: &str = "penalty parameters below the threshold leave a descent direction in the examples";
const EXAMPLE: &str = "first-order sharp constant of the power-constraint example";

fn order(q: f64) -> HolderOrder {
    HolderOrder::new(q).expect("orders are positive")
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(super) fn run(ctx: &mut Ctx) {
    superadditivity(ctx);
    power_identity(ctx);
    max_rule(ctx);
    thresholds(ctx);
    power_examples(ctx);
}

fn sub(ctx: &Ctx, f: &ScalarFn, u: &[f64], q: HolderOrder) -> Result<f64> {
    let zero = vec![0.0; f.dim()];
    Ok(hadamard_subderivative(f, &zero, u, q, &ctx.s.ladder, &ctx.s.tol)?.value)
}

fn directions(n: usize) -> Result<DirectionGrid> {
    DirectionGrid::new(n, 16)
}

fn superadditivity(ctx: &mut Ctx) {
    let fs: Vec<(&str, ScalarFn)> = vec![
        ("abs", ScalarFn::new(1, |x| x[0].abs())),
        ("neg_abs", ScalarFn::new(1, |x| -x[0].abs())),
        ("kink", ScalarFn::new(1, |x| x[0].max(-2.0 * x[0]))),
        ("wiggle", ScalarFn::new(1, |x| x[0] * (1.0 + 0.5 * (if x[0] == 0.0 { 0.0 } else { (1.0 / x[0]).sin() })))),
    ];
    for (i, (na, fa)) in fs.iter().enumerate() {
        for (nb, fb) in &fs[i..] {
            let id = format!("penalty.superadditive.{na}+{nb}");
            let r = (|| -> Result<PropertyResult> {
                let q = order(1.0);
                let sum = fa.add(fb);
                let mut worst = f64::INFINITY;
                let mut pass = true;
                for u in directions(1)?.points() {
                    let (l, a, b) = (sub(ctx, &sum, u, q)?, sub(ctx, fa, u, q)?, sub(ctx, fb, u, q)?);
                    let rhs = a + b;
                    let margin = l - rhs;
                    worst = worst.min(margin);
                    if margin.is_nan() || margin < -0.02 * rhs.abs().max(1.0) {
                        pass = false;
                    }
                }
                Ok(PropertyResult::new("", SUPERADDITIVE, pass, worst, 0.0, 0.02).with_detail("lhs: least margin over directions"))
            })();
            ctx.record(id, SUPERADDITIVE, r);
        }
    }
}

fn power_identity(ctx: &mut Ctx) {
    let gs: Vec<(&str, ScalarFn, f64)> = vec![
        ("linear", ScalarFn::new(1, |x| x[0]), 1.0),
        ("abs", ScalarFn::new(1, |x| x[0].abs()), 1.0),
        ("square", ScalarFn::new(1, |x| x[0] * x[0]), 2.0),
        ("l1_2d", ScalarFn::new(2, |x| x[0] + x[1].abs()), 1.0),
        ("norm_2d", ScalarFn::new(2, norm), 1.0),
    ];
    for (name, g, natural) in &gs {
        for p in [0.5, 1.0, 2.0] {
            let id = format!("penalty.power_identity.{name}.p{p}");
            let r = (|| -> Result<PropertyResult> {
                let q = order(natural * p);
                let qp = order(*natural);
                let plus = g.positive_part();
                let gp = plus.clone();
                let powered = ScalarFn::new(g.dim(), move |x| gp.eval(x).powf(p));
                let abs = default_cluster_tol(q, &ctx.s.ladder).max(1e-6);
                let mut worst: f64 = 0.0;
                let mut pass = true;
                for u in directions(g.dim())?.points() {
                    let lhs = sub(ctx, &powered, u, q)?;
                    let rhs = sub(ctx, &plus, u, qp)?.max(0.0).powf(p);
                    if !close(lhs, rhs, 0.02, abs) {
                        pass = false;
                    }
                    worst = worst.max((lhs - rhs).abs());
                }
                Ok(PropertyResult::new("", POWER, pass, worst, abs, 0.02).with_detail("lhs: worst absolute gap"))
            })();
            ctx.record(id, POWER, r);
        }
    }
}

fn max_rule(ctx: &mut Ctx) {
    let pairs: Vec<(&str, ScalarFn, ScalarFn)> = vec![
        ("linear_pair", ScalarFn::new(1, |x| x[0]), ScalarFn::new(1, |x| -2.0 * x[0] + x[0] * x[0])),
        ("abs_and_linear", ScalarFn::new(1, |x| 0.5 * x[0].abs()), ScalarFn::new(1, |x| x[0])),
        ("planar", ScalarFn::new(2, |x| x[0] - x[1]), ScalarFn::new(2, |x| norm(x) - 1.5 * x[0])),
    ];
    for (name, g1, g2) in pairs {
        let id = format!("penalty.max_rule.{name}");
        let r = (|| -> Result<PropertyResult> {
            let q = order(1.0);
            let (a, b) = (g1.clone(), g2.clone());
            let m = ScalarFn::new(g1.dim(), move |x| a.eval(x).max(b.eval(x)));
            let mut worst: f64 = 0.0;
            let mut pass = true;
            for u in directions(g1.dim())?.points() {
                let lhs = sub(ctx, &m, u, q)?;
                let rhs = sub(ctx, &g1, u, q)?.max(sub(ctx, &g2, u, q)?);
                if !close(lhs, rhs, 0.02, 1e-5) {
                    pass = false;
                }
                worst = worst.max((lhs - rhs).abs());
            }
            Ok(PropertyResult::new("", MAX_RULE, pass, worst, 1e-5, 0.02).with_detail("lhs: worst absolute gap"))
        })();
        ctx.record(id, MAX_RULE, r);
    }
}

/// Penalty fixtures with a finite positive threshold at first order.
fn threshold_fixtures() -> Vec<(&'static str, PenaltyProblem)> {
    let two_sided = PenaltyProblem::new(ScalarFn::new(1, |x| x[0]), vec![ScalarFn::new(1, |x| x[0].abs())], 1.0, 1.0, vec![0.0]);
    let planar = PenaltyProblem::new(
        ScalarFn::new(2, |x| x[0]),
        vec![ScalarFn::new(2, |x| x[0].abs() + x[1].abs())],
        1.0,
        1.0,
        vec![0.0, 0.0],
    );
    let split = PenaltyProblem::new(
        ScalarFn::new(1, |x| -x[0]),
        vec![ScalarFn::new(1, |x| x[0]), ScalarFn::new(1, |x| 2.0 * x[0])],
        1.0,
        1.0,
        vec![0.0],
    );
    vec![("two_sided", two_sided), ("planar_l1", planar), ("split", split)]
        .into_iter()
        .map(|(n, p)| (n, p.expect("fixture is valid")))
        .collect()
}

fn thresholds(ctx: &mut Ctx) {
    let s = ctx.s;
    let q = order(1.0);
    for (name, base) in threshold_fixtures() {
        let rho0 = match penalty_threshold(&base, q, s) {
            Ok(t) if t.sufficiency == Sufficiency::Sufficient && t.rho0.is_finite() => t.rho0,
            Ok(t) => {
                let res = PropertyResult::new("", SOUND, false, t.rho0, f64::NAN, 0.0)
                    .with_detail(format!("threshold not usable: {:?}", t.sufficiency));
                ctx.record(format!("penalty.threshold.{name}"), SOUND, Ok(res));
                continue;
            }
            Err(e) => {
                ctx.record(format!("penalty.threshold.{name}"), SOUND, Err(e));
                continue;
            }
        };
        for r in [rho0 + 0.5, 2.0 * rho0 + 1.0] {
            let res = base.with_r(r).and_then(|pr| sharp_penalty_check(&pr, q, s)).map(|c| {
                let pass = c.consistent && c.sharp.modulus > s.tol.eps_pos;
                PropertyResult::new("", SOUND, pass, c.sharp.modulus, rho0, 0.0)
                    .with_detail(format!("r = {r}, lhs: sharp modulus, rhs: threshold"))
            });
            ctx.record(format!("penalty.soundness.{name}.r{r}"), SOUND, res);
        }
        if rho0 > 0.0 {
            let r = 0.5 * rho0;
            let res = base.with_r(r).and_then(|pr| sharp_penalty_check(&pr, q, s)).map(|c| {
                PropertyResult::new("", CONVERSE, !c.sharp.holds() && c.sharp.modulus <= s.tol.eps_pos, c.sharp.modulus, 0.0, 0.0)
                    .with_detail(format!("r = {r}, sharp verdict {:?}", c.sharp.verdict))
            });
            ctx.record(format!("penalty.converse.{name}.r{r}"), CONVERSE, res);
        }
    }
}

fn power_examples(ctx: &mut Ctx) {
    let s = ctx.s;
    for conv in PowerConvention::ALL {
        for (sv, p) in [(0.25, 1.0), (0.5, 1.0), (0.25, 2.0), (1.0, 1.0), (1.0, 0.5)] {
            for r in [0.5, 2.0] {
                let id = format!("penalty.power_example.{}.s{sv}.p{p}.r{r}", conv.as_str());
                let res = compare_power_example(sv, p, r, conv, s).map(|c| {
                    PropertyResult::new("", EXAMPLE, c.matches_expected, c.computed, c.expected, 0.02).with_detail(format!(
                        "published table gives {}{}",
                        c.tabulated,
                        if c.discrepancy { ", which the computation does not reproduce" } else { "" }
                    ))
                });
                ctx.record(id, EXAMPLE, res);
            }
        }
    }
}
