use std::fmt;

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::GeomError;
use crate::joints::{JointSet2D, Point2};

/// |w| at or below this is treated as a point on the line at infinity.
const W_EPS: f64 = 1e-9;
/// Relative triangle-area threshold for collinearity.
const COLLINEAR_TOL: f64 = 1e-6;
/// Ratio of the second-smallest to largest singular value below which the
/// null space is not one-dimensional.
const RANK_TOL: f64 = 1e-12;

/// A matched point pair from an external matcher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub src: Point2,
    pub dst: Point2,
    pub weight: f64,
}

impl Correspondence {
    pub fn new(src: Point2, dst: Point2) -> Self {
        Self { src, dst, weight: 1.0 }
    }

    pub fn is_valid(&self) -> bool {
        self.src.iter().chain(self.dst.iter()).all(|v| v.is_finite())
            && self.weight.is_finite()
            && self.weight >= 0.0
    }

    pub fn residual(&self) -> f64 {
        ((self.dst[0] - self.src[0]).powi(2) + (self.dst[1] - self.src[1]).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Three of the source points are (nearly) collinear.
    CollinearSource,
    /// Three of the destination points are (nearly) collinear.
    CollinearDestination,
    /// All points coincide; no scale can be normalized.
    Coincident,
    /// The design matrix has a null space of dimension > 1.
    RankDeficient,
    /// The estimated matrix is singular or not finite.
    SingularResult,
    /// Correspondences with zero or invalid weight leave fewer than 4 usable pairs.
    InvalidPairs,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Degeneracy::CollinearSource => "collinear source points",
            Degeneracy::CollinearDestination => "collinear destination points",
            Degeneracy::Coincident => "coincident points",
            Degeneracy::RankDeficient => "rank-deficient design matrix",
            Degeneracy::SingularResult => "singular homography",
            Degeneracy::InvalidPairs => "too few usable correspondences",
        };
        f.write_str(s)
    }
}

/// Projective map of the plane. Stored with `h[2][2] = 1` whenever that entry is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Homography {
    h: Matrix3<f64>,
}

impl Homography {
    pub fn identity() -> Self {
        Self { h: Matrix3::identity() }
    }

    pub fn new(h: Matrix3<f64>) -> Result<Self, GeomError> {
        if !h.iter().all(|v| v.is_finite()) {
            return Err(GeomError::Degenerate(Degeneracy::SingularResult));
        }
        let h = if h[(2, 2)] != 0.0 { h / h[(2, 2)] } else { h };
        let scale = h.abs().max();
        if scale == 0.0 || (h.determinant() / scale.powi(3)).abs() < 1e-14 {
            return Err(GeomError::Degenerate(Degeneracy::SingularResult));
        }
        Ok(Self { h })
    }

    pub fn from_row_major(m: &[f64; 9]) -> Result<Self, GeomError> {
        Self::new(Matrix3::from_row_slice(m))
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self { h: Matrix3::new(1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0) }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.h
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = self.h[(r, c)];
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.h == Matrix3::identity()
    }

    pub fn inverse(&self) -> Homography {
        let inv = self.h.try_inverse().expect("homography invariant: nonsingular");
        let inv = if inv[(2, 2)] != 0.0 { inv / inv[(2, 2)] } else { inv };
        Homography { h: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Homography) -> Result<Homography, GeomError> {
        Homography::new(self.h * other.h)
    }

    /// Map one point; `None` if it lands on the line at infinity.
    pub fn apply_point(&self, p: Point2) -> Option<Point2> {
        let h = &self.h;
        let [u, v] = p;
        let w = h[(2, 0)] * u + h[(2, 1)] * v + h[(2, 2)];
        if w.abs() <= W_EPS {
            return None;
        }
        let x = (h[(0, 0)] * u + h[(0, 1)] * v + h[(0, 2)]) / w;
        let y = (h[(1, 0)] * u + h[(1, 1)] * v + h[(1, 2)]) / w;
        (x.is_finite() && y.is_finite()).then_some([x, y])
    }
}

impl Default for Homography {
    fn default() -> Self {
        Self::identity()
    }
}

impl TryFrom<[f64; 9]> for Homography {
    type Error = GeomError;

    fn try_from(m: [f64; 9]) -> Result<Self, Self::Error> {
        Homography::from_row_major(&m)
    }
}

impl From<Homography> for [f64; 9] {
    fn from(h: Homography) -> Self {
        h.to_row_major()
    }
}

pub fn apply_homography(h: &Homography, pts: &JointSet2D) -> JointSet2D {
    JointSet2D::new(pts.joints.iter().map(|p| p.and_then(|p| h.apply_point(p))).collect())
}

/// Root mean square of the forward (`|H·src - dst|`) and backward
/// (`|H⁻¹·dst - src|`) transfer distances, in pixels. Infinite when either
/// mapping is undefined.
pub fn symmetric_transfer_error(h: &Homography, h_inv: &Homography, c: &Correspondence) -> f64 {
    let dist = |a: Option<Point2>, b: Point2| match a {
        Some(a) => (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2),
        None => f64::INFINITY,
    };
    let fwd = dist(h.apply_point(c.src), c.dst);
    let bwd = dist(h_inv.apply_point(c.dst), c.src);
    ((fwd + bwd) / 2.0).sqrt()
}

fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs() / 2.0
}

fn bbox_diagonal_sq(pts: &[Point2]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)
}

/// True when some triple of `pts` spans less than `1e-6 · diag²` of area.
///
/// Every triple is tested for four points; for larger sets only the
/// all-collinear case is rejected (the largest triangle on the set is small).
pub(crate) fn is_collinear(pts: &[Point2]) -> bool {
    let tol = COLLINEAR_TOL * bbox_diagonal_sq(pts);
    if tol == 0.0 {
        return true;
    }
    let n = pts.len();
    if n <= 4 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if triangle_area(pts[i], pts[j], pts[k]) < tol {
                        return true;
                    }
                }
            }
        }
        return false;
    }
    // Farthest pair from an anchor approximates the set's principal line.
    let far = |from: Point2| {
        pts.iter()
            .copied()
            .max_by(|a, b| {
                let da = (a[0] - from[0]).powi(2) + (a[1] - from[1]).powi(2);
                let db = (b[0] - from[0]).powi(2) + (b[1] - from[1]).powi(2);
                da.total_cmp(&db)
            })
            .unwrap()
    };
    let a = far(pts[0]);
    let b = far(a);
    let max_area = pts.iter().map(|&c| triangle_area(a, b, c)).fold(0.0, f64::max);
    max_area < tol
}

/// Translate to the centroid and scale so the mean distance to it is √2.
fn normalizer(pts: &[Point2]) -> Option<Matrix3<f64>> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean_dist = pts.iter().map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()).sum::<f64>() / n;
    if !(mean_dist > 1e-12) || !mean_dist.is_finite() {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn transform(t: &Matrix3<f64>, p: Point2) -> Point2 {
    let v = t * Vector3::new(p[0], p[1], 1.0);
    [v.x / v.z, v.y / v.z]
}

/// Round entries that sit within 1e-10 of an integer, so clean inputs (identity,
/// integer shifts) yield exact matrices.
fn snap_integers(h: &mut Matrix3<f64>) {
    for v in h.iter_mut() {
        let r = v.round();
        if (*v - r).abs() <= 1e-10 * r.abs().max(1.0) {
            *v = r;
        }
    }
}

/// Normalized direct linear transform: least-squares algebraic fit of `dst ~ H·src`.
pub fn estimate_homography_dlt(pairs: &[Correspondence]) -> Result<Homography, GeomError> {
    if pairs.len() < 4 {
        return Err(GeomError::TooFewPairs(pairs.len()));
    }
    if let Some(i) = pairs.iter().position(|c| !c.is_valid()) {
        return Err(GeomError::InvalidInput(format!("correspondence {i} is not finite or has negative weight")));
    }
    let usable: Vec<&Correspondence> = pairs.iter().filter(|c| c.weight > 0.0).collect();
    if usable.len() < 4 {
        return Err(GeomError::Degenerate(Degeneracy::InvalidPairs));
    }
    let src: Vec<Point2> = usable.iter().map(|c| c.src).collect();
    let dst: Vec<Point2> = usable.iter().map(|c| c.dst).collect();
    if is_collinear(&src) {
        return Err(GeomError::Degenerate(Degeneracy::CollinearSource));
    }
    if usable.len() == 4 && is_collinear(&dst) {
        return Err(GeomError::Degenerate(Degeneracy::CollinearDestination));
    }
    let t_src = normalizer(&src).ok_or(GeomError::Degenerate(Degeneracy::Coincident))?;
    let t_dst = normalizer(&dst).ok_or(GeomError::Degenerate(Degeneracy::Coincident))?;

    let n = usable.len();
    // At least 9 rows so the thin SVD exposes the full right singular basis.
    let mut a = DMatrix::<f64>::zeros((2 * n).max(9), 9);
    for (k, c) in usable.iter().enumerate() {
        let [x, y] = transform(&t_src, c.src);
        let [u, v] = transform(&t_dst, c.dst);
        let w = c.weight.sqrt();
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for j in 0..9 {
            a[(2 * k, j)] = w * r0[j];
            a[(2 * k + 1, j)] = w * r1[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(GeomError::Degenerate(Degeneracy::RankDeficient))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let largest = svd.singular_values[order[order.len() - 1]];
    if svd.singular_values[order[1]] <= RANK_TOL * largest {
        return Err(GeomError::Degenerate(Degeneracy::RankDeficient));
    }
    let null: Vec<f64> = v_t.row(order[0]).iter().copied().collect();
    let hn = Matrix3::from_row_slice(&null);
    let t_dst_inv = t_dst.try_inverse().ok_or(GeomError::Degenerate(Degeneracy::Coincident))?;
    let mut h = t_dst_inv * hn * t_src;
    if h[(2, 2)].abs() > 1e-15 {
        h /= h[(2, 2)];
    }
    snap_integers(&mut h);
    Homography::new(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corners() -> Vec<Point2> {
        vec![[0.0, 0.0], [100.0, 0.0], [100.0, 80.0], [0.0, 80.0]]
    }

    #[test]
    fn identity_from_equal_points() {
        let pairs: Vec<_> = corners().into_iter().map(|p| Correspondence::new(p, p)).collect();
        let h = estimate_homography_dlt(&pairs).unwrap();
        assert!(h.is_identity(), "{:?}", h);
    }

    #[test]
    fn translation_is_exact() {
        let pairs: Vec<_> =
            corners().into_iter().map(|p| Correspondence::new(p, [p[0] + 5.0, p[1]])).collect();
        let h = estimate_homography_dlt(&pairs).unwrap();
        let expect = [1.0, 0.0, 5.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        for (a, b) in h.to_row_major().iter().zip(expect) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn three_pairs_rejected() {
        let pairs: Vec<_> = corners()[..3].iter().map(|&p| Correspondence::new(p, p)).collect();
        assert_eq!(estimate_homography_dlt(&pairs), Err(GeomError::TooFewPairs(3)));
    }

    #[test]
    fn collinear_source_rejected() {
        let src = [[0.0, 0.0], [10.0, 10.0], [20.0, 20.0], [0.0, 30.0]];
        let pairs: Vec<_> = src.iter().map(|&p| Correspondence::new(p, p)).collect();
        assert_eq!(
            estimate_homography_dlt(&pairs),
            Err(GeomError::Degenerate(Degeneracy::CollinearSource))
        );
    }

    #[test]
    fn all_collinear_large_set_rejected() {
        let pairs: Vec<_> =
            (0..10).map(|i| f64::from(i)).map(|t| Correspondence::new([t, 2.0 * t], [t, t])).collect();
        assert_eq!(
            estimate_homography_dlt(&pairs),
            Err(GeomError::Degenerate(Degeneracy::CollinearSource))
        );
    }

    #[test]
    fn zero_weight_pairs_ignored() {
        let mut pairs: Vec<_> = corners().into_iter().map(|p| Correspondence::new(p, p)).collect();
        pairs.push(Correspondence { src: [50.0, 40.0], dst: [500.0, 900.0], weight: 0.0 });
        assert!(estimate_homography_dlt(&pairs).unwrap().is_identity());
        pairs[0].weight = 0.0;
        assert_eq!(estimate_homography_dlt(&pairs), Err(GeomError::Degenerate(Degeneracy::InvalidPairs)));
    }

    #[test]
    fn apply_examples() {
        let pts = JointSet2D::all_visible([[10.0, 10.0]]);
        assert_eq!(apply_homography(&Homography::identity(), &pts), pts);
        assert_eq!(apply_homography(&Homography::translation(5.0, 0.0), &pts).get(0), Some([15.0, 10.0]));
        let scale = Homography::from_row_major(&[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(apply_homography(&scale, &pts).get(0), Some([20.0, 20.0]));
    }

    #[test]
    fn point_at_infinity_is_invisible() {
        let h = Homography::from_row_major(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.01, 0.0, 1.0]).unwrap();
        let out = apply_homography(&h, &JointSet2D::all_visible([[-100.0, 3.0], [1.0, 1.0]]));
        assert_eq!(out.get(0), None);
        assert!(out.get(1).is_some());
    }

    #[test]
    fn invisible_passes_through() {
        let pts = JointSet2D::new(vec![None, Some([1.0, 2.0])]);
        let out = apply_homography(&Homography::translation(1.0, 1.0), &pts);
        assert_eq!(out.joints, vec![None, Some([2.0, 3.0])]);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(Homography::from_row_major(&[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]).is_err());
        assert!(Homography::from_row_major(&[f64::NAN, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).is_err());
    }
}
