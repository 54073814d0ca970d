use rayon::prelude::*;

use crate::calculus::{LimitEstimate, Tolerances, Verdict};
use crate::error::{check_dim, Error, Result};
use crate::moduli::report::{RegularityReport, RegularityVerdict};
use crate::moduli::sampling::{annuli, annulus_minima, dist, filtered_minimum, Annulus};
use crate::setmap::map::DEFAULT_RESOLUTION;
use crate::setmap::{DirectionGrid, HolderOrder, ScalarFn, ScaleLadder, SetValuedMap, TAU_MEM};

/// Half-width of the output neighbourhood sampled by the calmness estimator.
const OUTPUT_HALF_WIDTH: f64 = 1.0;

fn assemble(quantity: &str, q: HolderOrder, minima: Vec<(Annulus, Option<Vec<f64>>, f64)>, tol: &Tolerances) -> RegularityReport {
    let per_radius: Vec<(f64, f64)> = minima.iter().map(|(a, _, v)| (a.outer, *v)).collect();
    let limit = LimitEstimate::from_scales(per_radius.clone(), tol);
    let k = minima.len();
    let witness = minima[k.saturating_sub(2)..]
        .iter()
        .filter(|m| m.1.is_some())
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .and_then(|m| m.1.clone());
    RegularityReport {
        quantity: quantity.to_string(),
        modulus: limit.value.max(0.0),
        q,
        radius: minima.last().map_or(0.0, |m| m.0.outer),
        witness,
        per_radius,
        converged: limit.converged,
        limit_verdict: limit.verdict,
        verdict: RegularityVerdict::from_limit(&limit),
        isolated: None,
        diagnostics: Vec::new(),
    }
}

/// `srg_q F(xbar, ybar)`: limiting infimum of `d(ybar, F(x)) / ‖x - xbar‖^q`.
pub fn strong_subregularity_modulus(
    f: &SetValuedMap,
    xbar: &[f64],
    ybar: &[f64],
    q: HolderOrder,
    radii: &ScaleLadder,
    grid: &DirectionGrid,
    tol: &Tolerances,
) -> Result<RegularityReport> {
    f.check_on_graph(xbar, ybar)?;
    check_dim(f.input_dim(), grid.dim())?;
    let phi = |x: &[f64]| f.residual(x, ybar) / q.scale(dist(x, xbar));
    let minima = annulus_minima(&phi, xbar, radii, grid)
        .into_iter()
        .map(|(a, x, v)| (a, Some(x), v))
        .collect();
    Ok(assemble("strong_subregularity", q, minima, tol))
}

/// `clm_q S(ybar, xbar)`: limiting infimum of `‖y - ybar‖ / ‖x - xbar‖^q`
/// over graph points of `S` with `x` near `xbar`.
pub fn isolated_calmness_modulus(
    s: &SetValuedMap,
    ybar: &[f64],
    xbar: &[f64],
    q: HolderOrder,
    radii: &ScaleLadder,
    tol: &Tolerances,
) -> Result<RegularityReport> {
    s.check_on_graph(ybar, xbar)?;
    let (ny, nx) = (s.input_dim(), s.output_dim());
    let mut center = ybar.to_vec();
    center.extend_from_slice(xbar);
    let minima: Vec<(Annulus, Option<Vec<f64>>, f64)> = annuli(radii)
        .into_par_iter()
        .map(|a| {
            let mut half = vec![OUTPUT_HALF_WIDTH; ny];
            half.extend(std::iter::repeat(a.outer).take(nx));
            let pts = s.graph_sample_box(&center, &half, DEFAULT_RESOLUTION);
            let phi = |p: &[f64]| dist(&p[..ny], ybar) / q.scale(dist(&p[ny..], xbar));
            match filtered_minimum(&phi, &pts, |p| a.contains(xbar, &p[ny..])) {
                Some((p, v)) => (a, Some(p), v),
                None => (a, None, f64::INFINITY),
            }
        })
        .collect();
    let mut report = assemble("isolated_calmness", q, minima, tol);
    let finest = radii.finest();
    let fibre = s.image(ybar).sample_in_box(xbar, &vec![finest; nx], 17);
    report.isolated = Some(fibre.iter().all(|x| dist(x, xbar) <= TAU_MEM));
    Ok(report)
}

/// `shrp_q f(xbar)`: limiting infimum of `(f(x) - f(xbar)) / ‖x - xbar‖^q`.
///
/// A sampled decrease below `f(xbar)` in the two finest annuli makes the
/// verdict `fails` with modulus 0.
pub fn sharp_minimum_modulus(
    f: &ScalarFn,
    xbar: &[f64],
    q: HolderOrder,
    radii: &ScaleLadder,
    grid: &DirectionGrid,
    tol: &Tolerances,
) -> Result<RegularityReport> {
    check_dim(f.dim(), grid.dim())?;
    let fx = f.try_eval(xbar)?;
    if !fx.is_finite() {
        return Err(Error::precondition("function is not finite at the base point"));
    }
    let phi = |x: &[f64]| (f.eval(x) - fx) / q.scale(dist(x, xbar));
    let raw = annulus_minima(&phi, xbar, radii, grid);
    // only the annuli that decide the limit may refute it
    let descent = raw[raw.len().saturating_sub(2)..]
        .iter()
        .find(|(_, x, _)| f.eval(x) - fx < -TAU_MEM)
        .map(|(_, x, _)| x.clone());
    let minima = raw.into_iter().map(|(a, x, v)| (a, Some(x), v)).collect();
    let mut report = assemble("sharp_minimum", q, minima, tol);
    if let Some(x) = descent {
        report.modulus = 0.0;
        report.verdict = RegularityVerdict::Fails;
        report.limit_verdict = Verdict::Negative;
        report.witness = Some(x);
        report.diagnostics.push("a sampled point lies strictly below the base value".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::sampling::default_radii;
    use crate::setmap::{invert_map, make_epigraph_map, Bounds, SetRepr, VectorFn};

    fn q(v: f64) -> HolderOrder {
        HolderOrder::new(v).unwrap()
    }

    fn g1() -> DirectionGrid {
        DirectionGrid::new(1, 2).unwrap()
    }

    fn epi_square() -> SetValuedMap {
        make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]))
    }

    #[test]
    fn srg_examples() {
        let tol = Tolerances::default();
        let r = default_radii();
        let f = epi_square();
        let s2 = strong_subregularity_modulus(&f, &[0.0], &[0.0], q(2.0), &r, &g1(), &tol).unwrap();
        assert!((s2.modulus - 1.0).abs() < 1e-9 && s2.holds(), "{s2:?}");
        let s1 = strong_subregularity_modulus(&f, &[0.0], &[0.0], q(1.0), &r, &g1(), &tol).unwrap();
        assert_eq!(s1.verdict, RegularityVerdict::Fails);
        assert!(s1.modulus < 1e-2);
        let id = SetValuedMap::single_valued(VectorFn::new(1, 1, |x| vec![x[0]]), Bounds::cube(1, 1.0));
        let s = strong_subregularity_modulus(&id, &[0.0], &[0.0], q(1.0), &r, &g1(), &tol).unwrap();
        assert!((s.modulus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clm_examples() {
        let tol = Tolerances::default();
        let r = default_radii();
        let inv = invert_map(&epi_square());
        let c2 = isolated_calmness_modulus(&inv, &[0.0], &[0.0], q(2.0), &r, &tol).unwrap();
        assert!((c2.modulus - 1.0).abs() < 2e-2, "{c2:?}");
        let c1 = isolated_calmness_modulus(&inv, &[0.0], &[0.0], q(1.0), &r, &tol).unwrap();
        assert_eq!(c1.verdict, RegularityVerdict::Fails);
        let id = SetValuedMap::single_valued(VectorFn::new(1, 1, |y| vec![y[0]]), Bounds::cube(1, 1.0));
        let c = isolated_calmness_modulus(&id, &[0.0], &[0.0], q(1.0), &r, &tol).unwrap();
        assert!((c.modulus - 1.0).abs() < 1e-9 && c.isolated == Some(true));
        let whole = SetValuedMap::from_image(1, 1, Bounds::cube(1, 1.0), |_| SetRepr::interval(f64::NEG_INFINITY, f64::INFINITY));
        let c = isolated_calmness_modulus(&whole, &[0.0], &[0.0], q(1.0), &r, &tol).unwrap();
        assert_eq!(c.verdict, RegularityVerdict::Fails);
        assert_eq!(c.isolated, Some(false));
    }

    #[test]
    fn sharp_examples() {
        let tol = Tolerances::default();
        let r = default_radii();
        let sq = ScalarFn::new(1, |x| x[0] * x[0]);
        let s = sharp_minimum_modulus(&sq, &[0.0], q(2.0), &r, &g1(), &tol).unwrap();
        assert!((s.modulus - 1.0).abs() < 1e-9);
        let s = sharp_minimum_modulus(&sq, &[0.0], q(1.0), &r, &g1(), &tol).unwrap();
        assert_eq!(s.verdict, RegularityVerdict::Fails);
        let abs = ScalarFn::new(1, |x| x[0].abs());
        let s = sharp_minimum_modulus(&abs, &[0.0], q(1.0), &r, &g1(), &tol).unwrap();
        assert!((s.modulus - 1.0).abs() < 1e-12 && s.holds());
        let lin = ScalarFn::new(1, |x| x[0]);
        let s = sharp_minimum_modulus(&lin, &[0.0], q(1.0), &r, &g1(), &tol).unwrap();
        assert_eq!((s.verdict, s.modulus), (RegularityVerdict::Fails, 0.0));
    }
}
