use super::{magnitudes_agree, Ctx, PropertyResult};
use crate::calculus::{subderivative_norm, HomogeneousSampler};
use crate::catalog::{function_catalog, map_catalog};
use crate::error::Result;
use crate::moduli::checks::{
    check_positive_definite, leq_with_slack, perturbation_bound_check, subdiff_subregularity_vs_sharp,
    verify_calmness_criteria, verify_sandwich, witness_floor, Magnitude,
};
use crate::moduli::{isolated_calmness_modulus, sharp_minimum_modulus, strong_subregularity_modulus, SubdiffOracle};
use crate::setmap::{
    invert_map, make_epigraph_map, Bounds, HolderOrder, ScalarFn, SetRepr, SetValuedMap, VectorFn,
};

const SRG_LOWER: &str = "strong subregularity modulus equals the lower norm of the graphical derivative";
const DUALITY: &str = "strong subregularity of F equals isolated calmness of its inverse";
const MONOTONE: &str = "at a fixed radius below 1 the modulus does not increase as q decreases";
const SHARP_LEQ: &str = "sharp minimizer modulus is at most the subderivative norm, with equality in finite dimensions";
const WITNESS: &str = "a holding modulus is not undercut by fresh random points of the final neighbourhood";
const PERTURB: &str = "strong subregularity survives perturbation by a differentiable map, losing at most its derivative norm";
const CALM: &str = "isolated calmness, finite outer norm of the inverse-order derivative, and a trivial zero image are equivalent";
const SANDWICH: &str = "sharpness of order q+1 is bracketed by multiples of the positive-definiteness modulus of the subdifferential derivative";
const SUBDIFF: &str = "subregularity of the subdifferential and (q+1)-order sharpness imply each other with explicit factors";
const PD: &str = "positive definiteness of the subdifferential derivative";

fn order(q: f64) -> HolderOrder {
    HolderOrder::new(q).expect("orders are positive")
}

pub(super) fn run(ctx: &mut Ctx) {
    let maps = map_catalog();
    for m in &maps {
        let grid = match ctx.s.grid(m.map.input_dim()) {
            Ok(g) => g,
            Err(e) => {
                ctx.record(format!("moduli.grid.{}", m.name), SRG_LOWER, Err(e));
                continue;
            }
        };
        for &qv in &m.orders {
            let q = order(qv);
            let tag = format!("{}.q{qv}", m.name);
            let s = ctx.s;
            let srg = strong_subregularity_modulus(&m.map, &m.xbar, &m.ybar, q, &s.radii, &grid, &s.tol);
            let srg = match srg {
                Ok(r) => r,
                Err(e) => {
                    ctx.record(format!("moduli.srg_equals_lower.{tag}"), SRG_LOWER, Err(e));
                    continue;
                }
            };
            let a = Magnitude::of_report(&srg);
            let r = HomogeneousSampler::derivative(&m.map, &m.xbar, &m.ybar, q, s.ladder.clone(), grid.clone()).map(|h| {
                let b = Magnitude::of_limit(&ctx.lower(&h));
                PropertyResult::new("", SRG_LOWER, magnitudes_agree(a, b, s.tol.slack), a.value(), b.value(), s.tol.slack)
            });
            ctx.record(format!("moduli.srg_equals_lower.{tag}"), SRG_LOWER, r);

            if m.map.input_dim() == 1 {
                let r = isolated_calmness_modulus(&invert_map(&m.map), &m.ybar, &m.xbar, q, &s.radii, &s.tol).map(|c| {
                    let b = Magnitude::of_report(&c);
                    PropertyResult::new("", DUALITY, magnitudes_agree(a, b, s.tol.slack), a.value(), b.value(), s.tol.slack)
                });
                ctx.record(format!("moduli.calmness_duality.{tag}"), DUALITY, r);
                let r = verify_calmness_criteria(&invert_map(&m.map), &m.ybar, &m.xbar, q, s).map(|c| {
                    PropertyResult::new("", CALM, c.agree && c.identity.pass, c.identity.lhs, c.identity.rhs, c.identity.slack)
                        .with_detail(format!(
                            "calm={} outer_finite={} zero_image_trivial={}",
                            c.calm, c.outer_finite, c.zero_image_trivial
                        ))
                });
                ctx.record(format!("moduli.calmness_criteria.{tag}"), CALM, r);
            }

            if srg.holds() && a.value().is_finite() {
                let map = m.map.clone();
                let (xb, yb) = (m.xbar.clone(), m.ybar.clone());
                let phi = move |x: &[f64]| {
                    let d: f64 = x.iter().zip(&xb).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                    map.image(x).distance(&yb) / q.scale(d)
                };
                let floor = witness_floor(&phi, &m.xbar, srg.radius * s.radii.theta(), srg.radius, 100, 0x0717_7e55);
                let bound = a.value() * (1.0 - s.tol.slack);
                ctx.push(PropertyResult {
                    property_id: format!("moduli.witness.srg.{tag}"),
                    ..PropertyResult::new("", WITNESS, floor >= bound, floor, bound, s.tol.slack)
                });
            }
        }
    }
    monotone_in_q(ctx);
    sharp_vs_subderivative(ctx);
    perturbations(ctx);
    calmness_examples(ctx);
    subdifferential_checks(ctx);
}

fn monotone_in_q(ctx: &mut Ctx) {
    let s = ctx.s;
    let orders = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    for m in map_catalog().into_iter().filter(|m| m.name.starts_with("epi_")) {
        let id = format!("moduli.monotone_in_q.{}", m.name);
        let r = (|| -> Result<PropertyResult> {
            let grid = s.grid(m.map.input_dim())?;
            let mut prev = f64::NEG_INFINITY;
            let mut pass = true;
            let mut worst_drop: f64 = 0.0;
            for &qv in &orders {
                let rep = strong_subregularity_modulus(&m.map, &m.xbar, &m.ybar, order(qv), &s.radii, &grid, &s.tol)?;
                let v = rep.per_radius.last().map_or(f64::NAN, |p| p.1);
                if v < prev * (1.0 - 1e-9) {
                    pass = false;
                    worst_drop = worst_drop.max(prev - v);
                }
                prev = v;
            }
            Ok(PropertyResult::new("", MONOTONE, pass, worst_drop, 0.0, 1e-9).with_detail("lhs: largest decrease as q grows"))
        })();
        ctx.record(id, MONOTONE, r);
    }
}

fn sharp_vs_subderivative(ctx: &mut Ctx) {
    let s = ctx.s;
    for f in function_catalog() {
        for &qv in &f.orders {
            let q = order(qv);
            let id = format!("moduli.sharp_below_subderivative.{}.q{qv}", f.name);
            let r = (|| -> Result<PropertyResult> {
                let grid = s.grid(f.f.dim())?;
                let sharp = sharp_minimum_modulus(&f.f, &f.xbar, q, &s.radii, &grid, &s.tol)?;
                let norm = subderivative_norm(&f.f, &f.xbar, q, &grid, &s.ladder, &s.tol)?;
                let (a, b) = (Magnitude::of_report(&sharp), Magnitude::of_limit(&norm));
                let equal = magnitudes_agree(a, b, s.tol.slack);
                let pass = leq_with_slack(a.value(), b.value(), s.tol.slack) && equal;
                Ok(PropertyResult::new("", SHARP_LEQ, pass, a.value(), b.value(), s.tol.slack)
                    .with_detail(format!("equality {}", if equal { "holds" } else { "fails" })))
            })();
            ctx.record(id, SHARP_LEQ, r);

            let r = (|| -> Result<Option<PropertyResult>> {
                let grid = s.grid(f.f.dim())?;
                let sharp = sharp_minimum_modulus(&f.f, &f.xbar, q, &s.radii, &grid, &s.tol)?;
                if !sharp.holds() || !sharp.modulus.is_finite() {
                    return Ok(None);
                }
                let fx = f.f.eval(&f.xbar);
                let (g, xb) = (f.f.clone(), f.xbar.clone());
                let phi = move |x: &[f64]| {
                    let d: f64 = x.iter().zip(&xb).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                    (g.eval(x) - fx) / q.scale(d)
                };
                let floor = witness_floor(&phi, &f.xbar, sharp.radius * s.radii.theta(), sharp.radius, 100, 0x5a4f);
                let bound = sharp.modulus * (1.0 - s.tol.slack);
                Ok(Some(PropertyResult::new("", WITNESS, floor >= bound, floor, bound, s.tol.slack)))
            })();
            match r {
                Ok(Some(p)) => ctx.record(format!("moduli.witness.sharp.{}.q{qv}", f.name), WITNESS, Ok(p)),
                Ok(None) => {}
                Err(e) => ctx.record(format!("moduli.witness.sharp.{}.q{qv}", f.name), WITNESS, Err(e)),
            }
        }
    }
}

fn perturbations(ctx: &mut Ctx) {
    let s = ctx.s;
    let epi_sq = make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]));
    let identity = SetValuedMap::single_valued(VectorFn::new(1, 1, |x| vec![x[0]]), Bounds::cube(1, 1.0));
    let cases: Vec<(&str, SetValuedMap, VectorFn, f64)> = vec![
        ("epi_square.zero", epi_sq.clone(), VectorFn::zero(1, 1), 2.0),
        ("epi_square.half_square", epi_sq, VectorFn::new(1, 1, |x| vec![0.5 * x[0] * x[0]]), 2.0),
        ("identity.minus_half", identity, VectorFn::new(1, 1, |x| vec![-0.5 * x[0]]), 1.0),
    ];
    for (name, f, g, qv) in cases {
        let r = perturbation_bound_check(&f, &g, &[0.0], &[0.0], order(qv), s).map(|c| {
            PropertyResult::new("", PERTURB, c.pass, c.perturbed, c.original - c.derivative_norm, s.tol.slack)
        });
        ctx.record(format!("moduli.perturbation.{name}"), PERTURB, r);
    }
    for m in map_catalog() {
        let qv = m.orders[1];
        let n = m.map.input_dim();
        let g = VectorFn::new(n, 1, move |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 {
                vec![0.0]
            } else {
                vec![0.3 * r.powf(qv - 1.0) * x[0]]
            }
        });
        let r = perturbation_bound_check(&m.map, &g, &m.xbar, &m.ybar, order(qv), s).map(|c| {
            PropertyResult::new("", PERTURB, c.pass, c.perturbed, c.original - c.derivative_norm, s.tol.slack)
        });
        ctx.record(format!("moduli.perturbation.{}.q{qv}", m.name), PERTURB, r);
    }
}

fn calmness_examples(ctx: &mut Ctx) {
    let s = ctx.s;
    let whole = SetValuedMap::from_image(1, 1, Bounds::cube(1, 1.0), |_| SetRepr::interval(f64::NEG_INFINITY, f64::INFINITY));
    let identity = SetValuedMap::single_valued(VectorFn::new(1, 1, |y| vec![y[0]]), Bounds::cube(1, 1.0));
    for (name, map, qv, expect) in [("constant_line", whole, 1.0, false), ("identity", identity, 1.0, true)] {
        let r = verify_calmness_criteria(&map, &[0.0], &[0.0], order(qv), s).map(|c| {
            PropertyResult::new("", CALM, c.agree && c.calm == expect && c.identity.pass, c.identity.lhs, c.identity.rhs, c.identity.slack)
        });
        ctx.record(format!("moduli.calmness_criteria.{name}.q{qv}"), CALM, r);
    }
}

fn oracle(name: &str) -> Result<SubdiffOracle> {
    let dom = (-1.0, 1.0);
    match name {
        "square" => SubdiffOracle::new(ScalarFn::new(1, |x| x[0] * x[0]), dom, |x| (2.0 * x, 2.0 * x)),
        "quartic" => SubdiffOracle::new(ScalarFn::new(1, |x| x[0].powi(4)), dom, |x| (4.0 * x.powi(3), 4.0 * x.powi(3))),
        _ => SubdiffOracle::new(ScalarFn::new(1, |x| x[0].abs()), dom, |x| {
            if x > 0.0 {
                (1.0, 1.0)
            } else if x < 0.0 {
                (-1.0, -1.0)
            } else {
                (-1.0, 1.0)
            }
        }),
    }
}

fn subdifferential_checks(ctx: &mut Ctx) {
    let s = ctx.s;
    for (name, qv) in [("square", 1.0), ("quartic", 3.0), ("abs", 1.0)] {
        let q = order(qv);
        let r = oracle(name).and_then(|o| verify_sandwich(&o, 0.0, q, s)).map(|rep| {
            PropertyResult::new("", SANDWICH, rep.pass, rep.middle, rep.upper, s.tol.slack)
                .with_detail(format!("lower bound {}", rep.lower))
        });
        ctx.record(format!("moduli.sandwich.{name}.q{qv}"), SANDWICH, r);
        let r = oracle(name).and_then(|o| subdiff_subregularity_vs_sharp(&o, 0.0, q, s)).map(|rep| {
            PropertyResult::new("", SUBDIFF, rep.pass, rep.sharp, rep.subregularity, s.tol.chained_slack)
                .with_detail(format!("positive-definiteness modulus {}", rep.star_norm))
        });
        ctx.record(format!("moduli.subdiff_vs_sharp.{name}.q{qv}"), SUBDIFF, r);
    }
    for (name, qv, expect) in [("square", 1.0, true), ("quartic", 2.0, false), ("quartic", 3.0, true)] {
        let r = (|| -> Result<PropertyResult> {
            let o = oracle(name)?;
            let h = HomogeneousSampler::derivative(&o.as_map(), &[0.0], &[0.0], order(qv), s.ladder.clone(), s.grid(1)?)?
                .with_tolerances(s.tol);
            let pd = check_positive_definite(&h)?;
            Ok(PropertyResult::new("", PD, pd.positive == expect, pd.modulus, if expect { s.tol.eps_pos } else { 0.0 }, 0.0))
        })();
        ctx.record(format!("moduli.positive_definite.{name}.q{qv}"), PD, r);
    }
    let neg = HomogeneousSampler::exact(1, 1, order(1.0), crate::setmap::DirectionGrid::new(1, 2).expect("1-D grid"), |u: &[f64]| {
        SetRepr::point(vec![-u[0]])
    });
    let r = neg.and_then(|h| check_positive_definite(&h)).map(|pd| PropertyResult::new("", PD, !pd.positive, pd.modulus, 0.0, 0.0));
    ctx.record("moduli.positive_definite.negative_identity.q1".into(), PD, r);
}
