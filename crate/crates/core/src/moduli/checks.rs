use serde::{Deserialize, Serialize};

use crate::calculus::{
    default_cluster_tol, graphical_derivative_image, hadamard_derivative, HomogeneousSampler, LimitEstimate, Verdict,
};
use crate::error::{check_dim, Error, Result};
use crate::moduli::report::{RegularityReport, RegularityVerdict};
use crate::moduli::subdiff::SubdiffOracle;
use crate::moduli::subregularity::{isolated_calmness_modulus, sharp_minimum_modulus, strong_subregularity_modulus};
use crate::settings::Settings;
use crate::setmap::{HolderOrder, SetRepr, SetValuedMap, VectorFn};

/// Coarse magnitude class of an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Magnitude {
    Zero,
    Finite(f64),
    Infinite,
}

impl Magnitude {
    pub fn of_limit(e: &LimitEstimate) -> Self {
        Magnitude::classify(e.verdict, e.value)
    }

    pub fn of_report(r: &RegularityReport) -> Self {
        Magnitude::classify(r.limit_verdict, r.modulus)
    }

    fn classify(verdict: Verdict, value: f64) -> Self {
        match verdict {
            Verdict::Infinite => Magnitude::Infinite,
            Verdict::Zero | Verdict::Negative | Verdict::Divergent => Magnitude::Zero,
            Verdict::Positive => Magnitude::Finite(value),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Magnitude::Zero => 0.0,
            Magnitude::Finite(v) => v,
            Magnitude::Infinite => f64::INFINITY,
        }
    }
}

/// Equal within relative `slack`, or in the same zero/infinite class.
pub fn agree(a: Magnitude, b: Magnitude, slack: f64) -> bool {
    match (a, b) {
        (Magnitude::Zero, Magnitude::Zero) | (Magnitude::Infinite, Magnitude::Infinite) => true,
        (Magnitude::Finite(x), Magnitude::Finite(y)) => (x - y).abs() <= slack * x.abs().max(y.abs()),
        _ => false,
    }
}

/// `a <= b` up to relative slack, with the extended-real order.
pub fn leq_with_slack(a: f64, b: f64, slack: f64) -> bool {
    if a <= b {
        return true;
    }
    if b.is_infinite() || a.is_infinite() {
        return false;
    }
    a <= b + slack * a.abs().max(b.abs())
}

/// A two-sided numerical comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveDefiniteness {
    pub positive: bool,
    pub modulus: f64,
    pub estimate: LimitEstimate,
}

/// `H` is positively definite iff `‖H‖* >= ε_pos`.
pub fn check_positive_definite(h: &HomogeneousSampler) -> Result<PositiveDefiniteness> {
    let estimate = h.norm_star()?;
    Ok(PositiveDefiniteness {
        positive: estimate.verdict.is_positive(),
        modulus: estimate.value,
        estimate,
    })
}

fn subdiff_derivative(oracle: &SubdiffOracle, xbar: f64, q: HolderOrder, s: &Settings) -> Result<HomogeneousSampler> {
    if !oracle.contains_zero(xbar) {
        return Err(Error::precondition("0 is not a subgradient at the base point"));
    }
    HomogeneousSampler::derivative(&oracle.as_map(), &[xbar], &[0.0], q, s.ladder.clone(), s.grid(1)?)
}

/// The factor `q^q / (q+1)^(q+1)`.
pub fn sandwich_factor(q: HolderOrder) -> f64 {
    let q = q.get();
    q.powf(q) / (q + 1.0).powf(q + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub factor: f64,
    /// `factor * ‖D_q ∂f(xbar, 0)‖*`.
    pub lower: f64,
    /// `shrp_{q+1} f(xbar)`.
    pub middle: f64,
    /// `‖D_q ∂f(xbar, 0)‖*`.
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub pass: bool,
}

/// Checks `factor·‖D_q∂f‖* <= shrp_{q+1} f <= ‖D_q∂f‖*` for a convex
/// function of one variable.
pub fn verify_sandwich(oracle: &SubdiffOracle, xbar: f64, q: HolderOrder, s: &Settings) -> Result<SandwichReport> {
    let h = subdiff_derivative(oracle, xbar, q, s)?;
    let upper = Magnitude::of_limit(&h.norm_star()?).value();
    let q1 = HolderOrder::new(q.get() + 1.0)?;
    let sharp = sharp_minimum_modulus(oracle.function(), &[xbar], q1, &s.radii, &s.grid(1)?, &s.tol)?;
    let middle = Magnitude::of_report(&sharp).value();
    let factor = sandwich_factor(q);
    let lower = factor * upper;
    let lower_ok = leq_with_slack(lower, middle, s.tol.slack);
    let upper_ok = leq_with_slack(middle, upper, s.tol.slack);
    Ok(SandwichReport {
        factor,
        lower,
        middle,
        upper,
        lower_ok,
        upper_ok,
        pass: lower_ok && upper_ok,
    })
}

/// `srg_q F(xbar, ybar)` against `‖D_qF(xbar, ybar)‖⊖`. Disagreement is
/// inconclusive rather than a refutation.
pub fn verify_srg_equals_derivative_norm(
    f: &SetValuedMap,
    xbar: &[f64],
    ybar: &[f64],
    q: HolderOrder,
    s: &Settings,
) -> Result<Comparison> {
    let grid = s.grid(f.input_dim())?;
    let srg = strong_subregularity_modulus(f, xbar, ybar, q, &s.radii, &grid, &s.tol)?;
    let lower = HomogeneousSampler::derivative(f, xbar, ybar, q, s.ladder.clone(), grid)?
        .with_tolerances(s.tol)
        .norm_lower();
    let (a, b) = (Magnitude::of_report(&srg), Magnitude::of_limit(&lower));
    Ok(Comparison {
        lhs: a.value(),
        rhs: b.value(),
        slack: s.tol.slack,
        pass: agree(a, b, s.tol.slack),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalmnessCriteria {
    /// (i) direct isolated calmness.
    pub calm: bool,
    /// (ii) finite outer norm of `D_{1/q}S(ybar, xbar)`.
    pub outer_finite: bool,
    /// (iii) `D_{1/q}S(ybar, xbar)(0) = {0}`.
    pub zero_image_trivial: bool,
    pub agree: bool,
    pub modulus: f64,
    pub outer_norm: f64,
    /// `clm_q S` against `(‖D_{1/q}S‖⁺)^{-q}`.
    pub identity: Comparison,
}

/// Evaluates the three equivalent isolated-calmness criteria.
pub fn verify_calmness_criteria(
    smap: &SetValuedMap,
    ybar: &[f64],
    xbar: &[f64],
    q: HolderOrder,
    s: &Settings,
) -> Result<CalmnessCriteria> {
    let clm = isolated_calmness_modulus(smap, ybar, xbar, q, &s.radii, &s.tol)?;
    let inv_q = q.reciprocal();
    let grid = s.grid(smap.input_dim())?;
    let outer = HomogeneousSampler::derivative(smap, ybar, xbar, inv_q, s.ladder.clone(), grid)?
        .with_tolerances(s.tol)
        .norm_outer();
    let zero = vec![0.0; smap.input_dim()];
    let at_zero = graphical_derivative_image(smap, ybar, xbar, &zero, inv_q, &s.ladder, None, &s.tol)?;
    let ctol = default_cluster_tol(inv_q, &s.ladder);
    let origin = vec![0.0; smap.output_dim()];
    let zero_image_trivial = at_zero.distance(&origin) <= ctol && at_zero.sup_norm() <= ctol;

    let calm = clm.verdict == RegularityVerdict::Holds;
    let outer_mag = Magnitude::of_limit(&outer);
    let outer_finite = !matches!(outer_mag, Magnitude::Infinite);
    let predicted = match outer_mag {
        Magnitude::Infinite => Magnitude::Zero,
        Magnitude::Zero => Magnitude::Infinite,
        Magnitude::Finite(v) => Magnitude::Finite(v.powf(-q.get())),
    };
    let clm_mag = Magnitude::of_report(&clm);
    let slack = s.tol.chained_slack;
    Ok(CalmnessCriteria {
        calm,
        outer_finite,
        zero_image_trivial,
        agree: calm == outer_finite && outer_finite == zero_image_trivial,
        modulus: clm_mag.value(),
        outer_norm: outer_mag.value(),
        identity: Comparison {
            lhs: clm_mag.value(),
            rhs: predicted.value(),
            slack,
            pass: agree(clm_mag, predicted, slack),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    /// `srg_q (F + g)(xbar, ybar + g(xbar))`.
    pub perturbed: f64,
    /// `srg_q F(xbar, ybar)`.
    pub original: f64,
    /// `‖D_q g(xbar)‖⁺`.
    pub derivative_norm: f64,
    pub pass: bool,
}

/// `‖D_q g(xbar)‖⁺` over the grid, failing unless `g` is Hadamard
/// differentiable of order `q` in every grid direction.
pub fn derivative_outer_norm(g: &VectorFn, xbar: &[f64], q: HolderOrder, s: &Settings) -> Result<f64> {
    let grid = s.grid(g.input_dim())?;
    let mut sup: f64 = 0.0;
    for u in grid.points() {
        let d = hadamard_derivative(g, xbar, u, q, &s.ladder, &s.tol)?;
        if !d.single_valued {
            return Err(Error::precondition(
                "perturbation is not Hadamard directionally differentiable at this order",
            ));
        }
        sup = sup.max(d.value.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok(sup)
}

/// `srg_q(F + g) >= srg_q F - ‖D_q g‖⁺` within slack.
pub fn perturbation_bound_check(
    f: &SetValuedMap,
    g: &VectorFn,
    xbar: &[f64],
    ybar: &[f64],
    q: HolderOrder,
    s: &Settings,
) -> Result<PerturbationCheck> {
    check_dim(f.input_dim(), g.input_dim())?;
    let derivative_norm = derivative_outer_norm(g, xbar, q, s)?;
    let grid = s.grid(f.input_dim())?;
    let original = Magnitude::of_report(&strong_subregularity_modulus(f, xbar, ybar, q, &s.radii, &grid, &s.tol)?).value();
    let fg = f.add_fn(g)?;
    let gx = g.eval(xbar);
    let y2: Vec<f64> = ybar.iter().zip(&gx).map(|(a, b)| a + b).collect();
    let perturbed = Magnitude::of_report(&strong_subregularity_modulus(&fg, xbar, &y2, q, &s.radii, &grid, &s.tol)?).value();
    let rhs = original - derivative_norm;
    let pass = rhs.is_nan() || leq_with_slack(rhs, perturbed, s.tol.slack);
    Ok(PerturbationCheck {
        perturbed,
        original,
        derivative_norm,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdiffSharpReport {
    /// `srg_q ∂f(xbar, 0)`.
    pub subregularity: f64,
    /// `shrp_{q+1} f(xbar)`.
    pub sharp: f64,
    /// `‖D_q∂f(xbar, 0)‖*`.
    pub star_norm: f64,
    pub factor: f64,
    /// `shrp <= srg`.
    pub sharp_implies_subregular: bool,
    /// `factor·srg <= shrp`.
    pub subregular_implies_sharp: bool,
    /// `‖D_q∂f‖* <= srg <= ‖D_q∂f‖* / factor`.
    pub star_bounds: bool,
    pub pass: bool,
}

/// Compares subregularity of `∂f` with sharpness of `f` for convex `f`.
pub fn subdiff_subregularity_vs_sharp(oracle: &SubdiffOracle, xbar: f64, q: HolderOrder, s: &Settings) -> Result<SubdiffSharpReport> {
    oracle.check_convex(401)?;
    let h = subdiff_derivative(oracle, xbar, q, s)?;
    let star_norm = Magnitude::of_limit(&h.norm_star()?).value();
    let grid = s.grid(1)?;
    let map = oracle.as_map();
    let srg = strong_subregularity_modulus(&map, &[xbar], &[0.0], q, &s.radii, &grid, &s.tol)?;
    let subregularity = Magnitude::of_report(&srg).value();
    let q1 = HolderOrder::new(q.get() + 1.0)?;
    let sharp = Magnitude::of_report(&sharp_minimum_modulus(oracle.function(), &[xbar], q1, &s.radii, &grid, &s.tol)?).value();
    let factor = sandwich_factor(q);
    let slack = s.tol.chained_slack;
    let sharp_implies_subregular = leq_with_slack(sharp, subregularity, slack);
    let subregular_implies_sharp = leq_with_slack(factor * subregularity, sharp, slack);
    let star_bounds = leq_with_slack(star_norm, subregularity, slack) && leq_with_slack(subregularity, star_norm / factor, slack);
    Ok(SubdiffSharpReport {
        subregularity,
        sharp,
        star_norm,
        factor,
        sharp_implies_subregular,
        subregular_implies_sharp,
        star_bounds,
        pass: sharp_implies_subregular && subregular_implies_sharp && star_bounds,
    })
}

/// Re-evaluates a quotient at fresh random points of the final
/// neighbourhood; returns the smallest value seen.
pub fn witness_floor(phi: &dyn Fn(&[f64]) -> f64, center: &[f64], inner: f64, outer: f64, count: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = center.len();
    let mut best = f64::INFINITY;
    let mut drawn = 0;
    while drawn < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 || r > 1.0 {
            continue;
        }
        let rho = rng.gen_range(inner..=outer);
        let x: Vec<f64> = center.iter().zip(&v).map(|(c, d)| c + rho * d / r).collect();
        best = best.min(phi(&x));
        drawn += 1;
    }
    best
}

/// Whether a sampled image is `{0}` up to `tol`.
pub fn is_origin(set: &SetRepr, tol: f64) -> bool {
    !set.is_empty() && set.sup_norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setmap::{make_epigraph_map, Bounds, ScalarFn};

    fn q(v: f64) -> HolderOrder {
        HolderOrder::new(v).unwrap()
    }

    fn power_oracle(k: i32) -> SubdiffOracle {
        let f = ScalarFn::new(1, move |x| x[0].powi(k));
        SubdiffOracle::new(f, (-1.0, 1.0), move |x| {
            let d = k as f64 * x.powi(k - 1);
            (d, d)
        })
        .unwrap()
    }

    #[test]
    fn positive_definite_examples() {
        let s = Settings::default();
        let h = subdiff_derivative(&power_oracle(2), 0.0, q(1.0), &s).unwrap();
        let pd = check_positive_definite(&h).unwrap();
        assert!(pd.positive && (pd.modulus - 2.0).abs() < 2e-2, "{pd:?}");
        let h = subdiff_derivative(&power_oracle(4), 0.0, q(2.0), &s).unwrap();
        assert!(!check_positive_definite(&h).unwrap().positive);
        let neg = HomogeneousSampler::exact(1, 1, q(1.0), s.grid(1).unwrap(), |u| SetRepr::point(vec![-u[0]])).unwrap();
        assert!(!check_positive_definite(&neg).unwrap().positive);
    }

    #[test]
    fn sandwich_for_even_powers() {
        let s = Settings::default();
        let r = verify_sandwich(&power_oracle(2), 0.0, q(1.0), &s).unwrap();
        assert!(r.pass && (r.middle - 1.0).abs() < 1e-6 && (r.upper - 2.0).abs() < 2e-2, "{r:?}");
        let r = verify_sandwich(&power_oracle(4), 0.0, q(3.0), &s).unwrap();
        assert!(r.pass && (r.upper - 4.0).abs() < 4e-2 && (r.factor - 27.0 / 256.0).abs() < 1e-15, "{r:?}");
        let abs = SubdiffOracle::new(ScalarFn::new(1, |x| x[0].abs()), (-1.0, 1.0), |x| {
            if x == 0.0 {
                (-1.0, 1.0)
            } else {
                (x.signum(), x.signum())
            }
        })
        .unwrap();
        let r = verify_sandwich(&abs, 0.0, q(1.0), &s).unwrap();
        assert!(r.pass && r.upper.is_infinite(), "{r:?}");
        assert!(verify_sandwich(&power_oracle(2), 0.5, q(1.0), &s).is_err());
    }

    #[test]
    fn srg_matches_lower_norm_on_epigraph() {
        let s = Settings::default();
        let f = make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]));
        for order in [1.0, 2.0, 3.0] {
            let c = verify_srg_equals_derivative_norm(&f, &[0.0], &[0.0], q(order), &s).unwrap();
            assert!(c.pass, "q={order}: {c:?}");
        }
    }

    #[test]
    fn calmness_criteria_examples() {
        let s = Settings::default();
        let inv = crate::setmap::invert_map(&make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0])));
        let c = verify_calmness_criteria(&inv, &[0.0], &[0.0], q(2.0), &s).unwrap();
        assert!(c.calm && c.agree && c.identity.pass, "{c:?}");
        let whole = SetValuedMap::from_image(1, 1, Bounds::cube(1, 1.0), |_| SetRepr::interval(f64::NEG_INFINITY, f64::INFINITY));
        let c = verify_calmness_criteria(&whole, &[0.0], &[0.0], q(1.0), &s).unwrap();
        assert!(!c.calm && c.agree, "{c:?}");
        let id = SetValuedMap::single_valued(VectorFn::new(1, 1, |y| vec![y[0]]), Bounds::cube(1, 1.0));
        let c = verify_calmness_criteria(&id, &[0.0], &[0.0], q(1.0), &s).unwrap();
        assert!(c.calm && c.agree && (c.modulus - 1.0).abs() < 1e-6, "{c:?}");
    }

    #[test]
    fn perturbation_examples() {
        let s = Settings::default();
        let epi = make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]));
        let c = perturbation_bound_check(&epi, &VectorFn::zero(1, 1), &[0.0], &[0.0], q(2.0), &s).unwrap();
        assert!(c.pass);
        let half_sq = VectorFn::new(1, 1, |x| vec![0.5 * x[0] * x[0]]);
        let c = perturbation_bound_check(&epi, &half_sq, &[0.0], &[0.0], q(2.0), &s).unwrap();
        assert!(c.pass && (c.derivative_norm - 0.5).abs() < 1e-3, "{c:?}");
        let id = SetValuedMap::single_valued(VectorFn::new(1, 1, |x| vec![x[0]]), Bounds::cube(1, 1.0));
        let c = perturbation_bound_check(&id, &VectorFn::new(1, 1, |x| vec![-0.5 * x[0]]), &[0.0], &[0.0], q(1.0), &s).unwrap();
        assert!(c.pass && (c.perturbed - 0.5).abs() < 1e-6, "{c:?}");
        let kink = VectorFn::new(1, 1, |x| vec![x[0].abs().sqrt()]);
        assert!(perturbation_bound_check(&id, &kink, &[0.0], &[0.0], q(1.0), &s).is_err());
    }

    #[test]
    fn subdiff_vs_sharp_examples() {
        let s = Settings::default();
        let r = subdiff_subregularity_vs_sharp(&power_oracle(2), 0.0, q(1.0), &s).unwrap();
        assert!(r.pass && (r.subregularity - 2.0).abs() < 1e-6 && (r.sharp - 1.0).abs() < 1e-6, "{r:?}");
        let r = subdiff_subregularity_vs_sharp(&power_oracle(4), 0.0, q(3.0), &s).unwrap();
        assert!(r.pass && (r.subregularity - 4.0).abs() < 1e-6, "{r:?}");
        let concave = SubdiffOracle::new(ScalarFn::new(1, |x| -x[0] * x[0]), (-1.0, 1.0), |x| (-2.0 * x, -2.0 * x)).unwrap();
        assert!(subdiff_subregularity_vs_sharp(&concave, 0.0, q(1.0), &s).is_err());
    }

    #[test]
    fn witness_floor_respects_modulus() {
        let phi = |x: &[f64]| x[0].abs() / x[0].abs();
        assert_eq!(witness_floor(&phi, &[0.0], 1e-3, 1e-2, 100, 1), 1.0);
    }
}
