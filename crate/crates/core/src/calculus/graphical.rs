use crate::calculus::ball::ball_seeds;
use crate::calculus::limit::Tolerances;
use crate::error::{check_dim, Result};
use crate::setmap::func::axpy;
use crate::setmap::{HolderOrder, ScaleLadder, SetRepr, SetValuedMap};

/// Consecutive empty finest rungs required before an image is declared empty.
const EMPTY_PERSISTENCE: usize = 3;

/// Default merge tolerance `3 t_K^{min(q,1)}` for outer-limit clusters.
pub fn default_cluster_tol(q: HolderOrder, ladder: &ScaleLadder) -> f64 {
    3.0 * ladder.finest().powf(q.get().min(1.0))
}

/// Rescaled graph slice at scale `t`: the union over `x' = xbar + t v`,
/// `v ∈ B∞(u, t)`, of `(F(x') - ybar) / t^q`, with pieces escaping beyond
/// `eps_inf` discarded.
pub(crate) fn rung_image(
    f: &SetValuedMap,
    xbar: &[f64],
    ybar: &[f64],
    u: &[f64],
    q: HolderOrder,
    t: f64,
    eps_inf: f64,
) -> SetRepr {
    let tq = q.scale(t);
    let pieces: Vec<SetRepr> = ball_seeds(u, t)
        .iter()
        .map(|v| f.image(&axpy(xbar, t, v)).rescaled(ybar, tq))
        .collect();
    SetRepr::union_merged(&pieces, 0.0).without_far_pieces(eps_inf)
}

/// Image `D_qF(xbar, ybar)(u)` of the graphical derivative.
///
/// Returns the finest nonempty rung among the last three, merged with
/// `cluster_tol` (default [`default_cluster_tol`]); empty when all three
/// are empty.
#[allow(clippy::too_many_arguments)]
pub fn graphical_derivative_image(
    f: &SetValuedMap,
    xbar: &[f64],
    ybar: &[f64],
    u: &[f64],
    q: HolderOrder,
    ladder: &ScaleLadder,
    cluster_tol: Option<f64>,
    tol: &Tolerances,
) -> Result<SetRepr> {
    f.check_on_graph(xbar, ybar)?;
    check_dim(f.input_dim(), u.len())?;
    let rungs = ladder.rungs();
    let tail = &rungs[rungs.len().saturating_sub(EMPTY_PERSISTENCE)..];
    let cluster_tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(q, ladder));
    for &t in tail.iter().rev() {
        let img = rung_image(f, xbar, ybar, u, q, t, tol.eps_inf);
        if !img.is_empty() {
            return Ok(SetRepr::union_merged(&[img], cluster_tol));
        }
    }
    Ok(SetRepr::empty(f.output_dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setmap::{make_epigraph_map, ScalarFn};

    fn q(v: f64) -> HolderOrder {
        HolderOrder::new(v).unwrap()
    }

    #[test]
    fn epigraph_of_square_trichotomy() {
        let f = make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]));
        let l = ScaleLadder::default();
        let tol = Tolerances::default();
        let img = |order: f64| graphical_derivative_image(&f, &[0.0], &[0.0], &[1.0], q(order), &l, None, &tol).unwrap();

        let ctol = default_cluster_tol(q(2.0), &l);
        let SetRepr::Intervals(v) = img(2.0) else { panic!() };
        assert_eq!(v.len(), 1);
        assert!((v[0].0 - 1.0).abs() <= ctol && v[0].1 == f64::INFINITY);

        let ctol = default_cluster_tol(q(1.0), &l);
        let SetRepr::Intervals(v) = img(1.0) else { panic!() };
        assert!(v[0].0.abs() <= ctol && v[0].1 == f64::INFINITY);

        assert!(img(3.0).is_empty());
    }

    #[test]
    fn off_graph_base_fails() {
        let f = make_epigraph_map(&ScalarFn::new(1, |x| x[0] * x[0]));
        let r = graphical_derivative_image(
            &f,
            &[0.0],
            &[-1.0],
            &[1.0],
            q(1.0),
            &ScaleLadder::default(),
            None,
            &Tolerances::default(),
        );
        assert!(r.is_err());
    }
}
