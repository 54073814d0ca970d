use crate::error::{check_dim, Error, Result};
use crate::setmap::func::{dot, norm, sub};

/// Finite description of a closed subset of `R^m`.
///
/// Subsets of the real line are finite unions of closed intervals (endpoints
/// may be infinite), kept sorted and disjoint. Higher-dimensional sets are
/// finite point clouds.
#[derive(Debug, Clone, PartialEq)]
pub enum SetRepr {
    Empty { dim: usize },
    Intervals(Vec<(f64, f64)>),
    Cloud { dim: usize, points: Vec<Vec<f64>> },
}

impl SetRepr {
    pub fn empty(dim: usize) -> Self {
        SetRepr::Empty { dim }
    }

    pub fn point(y: Vec<f64>) -> Self {
        if y.len() == 1 {
            SetRepr::Intervals(vec![(y[0], y[0])])
        } else {
            SetRepr::Cloud {
                dim: y.len(),
                points: vec![y],
            }
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        SetRepr::intervals(vec![(lo, hi)])
    }

    /// Normalizes: drops empty/NaN pieces, sorts, and merges overlaps.
    pub fn intervals(pieces: Vec<(f64, f64)>) -> Self {
        SetRepr::intervals_merged(pieces, 0.0)
    }

    /// Like [`SetRepr::intervals`] but also merges pieces separated by a
    /// gap of at most `gap`.
    pub fn intervals_merged(mut pieces: Vec<(f64, f64)>, gap: f64) -> Self {
        pieces.retain(|&(lo, hi)| !lo.is_nan() && !hi.is_nan() && lo <= hi && lo < f64::INFINITY && hi > f64::NEG_INFINITY);
        if pieces.is_empty() {
            return SetRepr::Empty { dim: 1 };
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match out.last_mut() {
                Some(last) if lo <= last.1 + gap => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        SetRepr::Intervals(out)
    }

    pub fn cloud(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        for p in &points {
            check_dim(dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Problem("point clouds must be finite and NaN-free".into()));
            }
        }
        if points.is_empty() {
            return Ok(SetRepr::Empty { dim });
        }
        if dim == 1 {
            return Ok(SetRepr::intervals(points.iter().map(|p| (p[0], p[0])).collect()));
        }
        Ok(SetRepr::Cloud { dim, points })
    }

    pub fn dim(&self) -> usize {
        match self {
            SetRepr::Empty { dim } | SetRepr::Cloud { dim, .. } => *dim,
            SetRepr::Intervals(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetRepr::Empty { .. } => true,
            SetRepr::Intervals(v) => v.is_empty(),
            SetRepr::Cloud { points, .. } => points.is_empty(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            SetRepr::Intervals(v) => v.iter().all(|&(lo, hi)| lo.is_finite() && hi.is_finite()),
            _ => true,
        }
    }

    /// Exact Euclidean distance from `y`; `+∞` for the empty set.
    pub fn distance(&self, y: &[f64]) -> f64 {
        match self.nearest(y) {
            Some(p) => norm(&sub(y, &p)),
            None => f64::INFINITY,
        }
    }

    /// A nearest point of the set to `y`, if the set is nonempty.
    pub fn nearest(&self, y: &[f64]) -> Option<Vec<f64>> {
        match self {
            SetRepr::Empty { .. } => None,
            SetRepr::Intervals(v) => {
                let y0 = y[0];
                v.iter()
                    .map(|&(lo, hi)| y0.clamp(lo, hi))
                    .min_by(|a, b| (a - y0).abs().total_cmp(&(b - y0).abs()))
                    .map(|p| vec![p])
            }
            SetRepr::Cloud { points, .. } => points
                .iter()
                .min_by(|a, b| norm(&sub(y, a)).total_cmp(&norm(&sub(y, b))))
                .cloned(),
        }
    }

    /// `sup{‖y‖ : y ∈ S}` with the convention `sup ∅ = 0`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            SetRepr::Empty { .. } => 0.0,
            SetRepr::Intervals(v) => v
                .iter()
                .map(|&(lo, hi)| lo.abs().max(hi.abs()))
                .fold(0.0, f64::max),
            SetRepr::Cloud { points, .. } => points.iter().map(|p| norm(p)).fold(0.0, f64::max),
        }
    }

    /// `inf{⟨y, u⟩₊ : y ∈ S}`; `+∞` when empty.
    pub fn min_positive_pairing(&self, u: &[f64]) -> f64 {
        match self {
            SetRepr::Empty { .. } => f64::INFINITY,
            SetRepr::Intervals(v) => {
                let u0 = u[0];
                v.iter()
                    .map(|&(lo, hi)| {
                        // ⟨y,u⟩ is monotone in y, so the minimum sits at an endpoint.
                        let a = lo * u0;
                        let b = hi * u0;
                        let m = if a.is_nan() { b } else if b.is_nan() { a } else { a.min(b) };
                        m.max(0.0)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            SetRepr::Cloud { points, .. } => points
                .iter()
                .map(|p| dot(p, u).max(0.0))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `{(y - shift) / scale : y ∈ S}` for `scale > 0`.
    pub fn rescaled(&self, shift: &[f64], scale: f64) -> SetRepr {
        match self {
            SetRepr::Empty { .. } => self.clone(),
            SetRepr::Intervals(v) => SetRepr::Intervals(
                v.iter()
                    .map(|&(lo, hi)| ((lo - shift[0]) / scale, (hi - shift[0]) / scale))
                    .collect(),
            ),
            SetRepr::Cloud { dim, points } => SetRepr::Cloud {
                dim: *dim,
                points: points
                    .iter()
                    .map(|p| p.iter().zip(shift).map(|(a, b)| (a - b) / scale).collect())
                    .collect(),
            },
        }
    }

    /// `S + v`.
    pub fn translated(&self, v: &[f64]) -> SetRepr {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        self.rescaled(&neg, 1.0)
    }

    /// Union of sets of equal dimension, merging features closer than `tol`.
    pub fn union_merged(sets: &[SetRepr], tol: f64) -> SetRepr {
        let dim = sets.first().map(|s| s.dim()).unwrap_or(1);
        if dim == 1 {
            let pieces = sets
                .iter()
                .flat_map(|s| match s {
                    SetRepr::Intervals(v) => v.clone(),
                    _ => Vec::new(),
                })
                .collect();
            return SetRepr::intervals_merged(pieces, tol);
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        for s in sets {
            if let SetRepr::Cloud { points: ps, .. } = s {
                for p in ps {
                    if !points.iter().any(|q| norm(&sub(p, q)) <= tol) {
                        points.push(p.clone());
                    }
                }
            }
        }
        if points.is_empty() {
            SetRepr::Empty { dim }
        } else {
            SetRepr::Cloud { dim, points }
        }
    }

    /// Drops every connected piece lying entirely farther than `radius` from
    /// the origin. Used to discard rescaled mass escaping to infinity.
    pub fn without_far_pieces(&self, radius: f64) -> SetRepr {
        match self {
            SetRepr::Empty { .. } => self.clone(),
            SetRepr::Intervals(v) => {
                let kept: Vec<_> = v
                    .iter()
                    .copied()
                    .filter(|&(lo, hi)| 0.0f64.clamp(lo, hi).abs() <= radius)
                    .collect();
                if kept.is_empty() {
                    SetRepr::Empty { dim: 1 }
                } else {
                    SetRepr::Intervals(kept)
                }
            }
            SetRepr::Cloud { dim, points } => {
                let kept: Vec<_> = points.iter().filter(|p| norm(p) <= radius).cloned().collect();
                if kept.is_empty() {
                    SetRepr::Empty { dim: *dim }
                } else {
                    SetRepr::Cloud { dim: *dim, points: kept }
                }
            }
        }
    }

    /// Finite sample of the part of the set inside the box `center ± half`:
    /// the projection of `center`, the clipped endpoints, and `resolution`
    /// evenly spaced points per bounded clipped piece.
    pub fn sample_in_box(&self, center: &[f64], half: &[f64], resolution: usize) -> Vec<Vec<f64>> {
        match self {
            SetRepr::Empty { .. } => Vec::new(),
            SetRepr::Intervals(v) => {
                let (c, h) = (center[0], half[0]);
                let (blo, bhi) = (c - h, c + h);
                let mut out = Vec::new();
                for &(lo, hi) in v {
                    let (lo, hi) = (lo.max(blo), hi.min(bhi));
                    if lo > hi {
                        continue;
                    }
                    out.push(vec![c.clamp(lo, hi)]);
                    for e in [lo, hi] {
                        if e.is_finite() {
                            out.push(vec![e]);
                        }
                    }
                    if lo.is_finite() && hi.is_finite() && resolution >= 2 && hi > lo {
                        for i in 0..resolution {
                            out.push(vec![lo + (hi - lo) * i as f64 / (resolution - 1) as f64]);
                        }
                    }
                }
                out.sort_by(|a, b| a[0].total_cmp(&b[0]));
                out.dedup();
                out
            }
            SetRepr::Cloud { points, .. } => points
                .iter()
                .filter(|p| p.iter().zip(center).zip(half).all(|((x, c), h)| (x - c).abs() <= *h))
                .cloned()
                .collect(),
        }
    }
}

/// Distance from `y` to `set`, with `inf ∅ = +∞`.
pub fn set_distance(y: &[f64], set: &SetRepr) -> Result<f64> {
    check_dim(set.dim(), y.len())?;
    Ok(set.distance(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(set_distance(&[0.0], &SetRepr::interval(1.0, f64::INFINITY)).unwrap(), 1.0);
        assert_eq!(set_distance(&[0.0], &SetRepr::empty(1)).unwrap(), f64::INFINITY);
        let cloud = SetRepr::cloud(2, vec![vec![3.0, 4.0], vec![1.0, 1.0]]).unwrap();
        assert!((set_distance(&[0.0, 0.0], &cloud).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            set_distance(&[0.0, 0.0], &SetRepr::interval(0.0, 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn intervals_are_normalized() {
        let s = SetRepr::intervals(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0), (5.0, 4.0)]);
        assert_eq!(s, SetRepr::Intervals(vec![(0.0, 2.0), (3.0, 4.0)]));
        let m = SetRepr::intervals_merged(vec![(0.0, 1.0), (1.1, 2.0)], 0.2);
        assert_eq!(m, SetRepr::Intervals(vec![(0.0, 2.0)]));
    }

    #[test]
    fn cloud_rejects_nan() {
        assert!(SetRepr::cloud(2, vec![vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn pairing_and_sup() {
        let s = SetRepr::interval(2.0, f64::INFINITY);
        assert_eq!(s.min_positive_pairing(&[1.0]), 2.0);
        assert_eq!(s.min_positive_pairing(&[-1.0]), 0.0);
        assert_eq!(s.sup_norm(), f64::INFINITY);
        assert_eq!(SetRepr::empty(1).sup_norm(), 0.0);
        assert_eq!(SetRepr::empty(1).min_positive_pairing(&[1.0]), f64::INFINITY);
    }

    #[test]
    fn far_pieces_are_dropped() {
        let s = SetRepr::intervals(vec![(-1.0, 0.5), (5e6, f64::INFINITY)]);
        assert_eq!(s.without_far_pieces(1e6), SetRepr::Intervals(vec![(-1.0, 0.5)]));
        let t = SetRepr::interval(2e6, f64::INFINITY);
        assert!(t.without_far_pieces(1e6).is_empty());
    }

    proptest! {
        #[test]
        fn zero_distance_iff_member(lo in -10.0f64..10.0, len in 0.0f64..5.0, y in -20.0f64..20.0) {
            let s = SetRepr::interval(lo, lo + len);
            let d = s.distance(&[y]);
            prop_assert_eq!(d == 0.0, lo <= y && y <= lo + len);
            prop_assert!(d >= 0.0);
        }

        #[test]
        fn box_samples_are_members(lo in -3.0f64..3.0, len in 0.0f64..3.0, c in -3.0f64..3.0, h in 0.01f64..2.0) {
            let s = SetRepr::interval(lo, lo + len);
            for p in s.sample_in_box(&[c], &[h], 11) {
                prop_assert!(s.distance(&p) <= 1e-9);
                prop_assert!((p[0] - c).abs() <= h + 1e-12);
            }
        }
    }
}
