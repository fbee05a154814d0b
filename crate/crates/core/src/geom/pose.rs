use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use super::GeomError;

const ORTHO_TOL: f64 = 1e-6;

/// Rigid transform `p' = R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 16]", into = "[f64; 16]")]
pub struct Pose3 {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose3 {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Fails unless `rotation` is orthonormal with determinant +1 (within 1e-6).
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeomError> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(GeomError::InvalidInput("pose contains non-finite values".into()));
        }
        let gram = rotation.transpose() * rotation;
        let ortho_err = (gram - Matrix3::identity()).abs().max();
        if ortho_err > ORTHO_TOL || (rotation.determinant() - 1.0).abs() > ORTHO_TOL {
            return Err(GeomError::InvalidInput(format!(
                "rotation is not a proper orthonormal matrix (|RᵀR - I| = {ortho_err:.3e})"
            )));
        }
        Ok(Self { rotation, translation })
    }

    pub fn from_translation(t: [f64; 3]) -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::from(t) }
    }

    /// Rotation of `angle` radians about `axis` followed by translation `t`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64, t: [f64; 3]) -> Self {
        let axis = nalgebra::Unit::new_normalize(Vector3::from(axis));
        let rotation = *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix();
        Self { rotation, translation: Vector3::from(t) }
    }

    /// Parse a row-major homogeneous 4×4 matrix.
    pub fn from_row_major(m: &[f64; 16]) -> Result<Self, GeomError> {
        let mat = Matrix4::from_row_slice(m);
        let bottom = [mat[(3, 0)], mat[(3, 1)], mat[(3, 2)], mat[(3, 3)]];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(GeomError::InvalidInput(format!(
                "bottom row of pose must be [0, 0, 0, 1], got {bottom:?}"
            )));
        }
        let rotation = mat.fixed_view::<3, 3>(0, 0).into_owned();
        let translation = mat.fixed_view::<3, 1>(0, 3).into_owned();
        Self::new(rotation, translation)
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 4 + c] = self.rotation[(r, c)];
            }
            out[r * 4 + 3] = self.translation[r];
        }
        out[15] = 1.0;
        out
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform_point(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.rotation * Vector3::from(p) + self.translation;
        [q.x, q.y, q.z]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose3) -> Pose3 {
        Pose3 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose3 {
        let rt = self.rotation.transpose();
        Pose3 { rotation: rt, translation: -(rt * self.translation) }
    }
}

impl Default for Pose3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl TryFrom<[f64; 16]> for Pose3 {
    type Error = GeomError;

    fn try_from(m: [f64; 16]) -> Result<Self, Self::Error> {
        Pose3::from_row_major(&m)
    }
}

impl From<Pose3> for [f64; 16] {
    fn from(p: Pose3) -> Self {
        p.to_row_major()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reflection() {
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Pose3::new(r, Vector3::zeros()).is_err());
    }

    #[test]
    fn row_major_roundtrip() {
        let p = Pose3::from_axis_angle([0.3, -1.0, 0.2], 0.7, [1.0, 2.0, 3.0]);
        let back = Pose3::from_row_major(&p.to_row_major()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn bad_bottom_row() {
        let mut m = Pose3::identity().to_row_major();
        m[12] = 0.5;
        assert!(Pose3::from_row_major(&m).is_err());
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let p = Pose3::from_axis_angle([1.0, 2.0, 3.0], 1.1, [0.5, -0.2, 4.0]);
        let q = p.compose(&p.inverse());
        let x = q.transform_point([1.0, 2.0, 3.0]);
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_is_associative() {
        let a = Pose3::from_axis_angle([1.0, 0.0, 0.0], 0.4, [1.0, 0.0, 0.0]);
        let b = Pose3::from_axis_angle([0.0, 1.0, 0.0], -0.9, [0.0, 2.0, 0.0]);
        let c = Pose3::from_axis_angle([0.0, 0.3, 1.0], 2.0, [0.0, 0.0, 3.0]);
        let lhs = a.compose(&b).compose(&c);
        let rhs = a.compose(&b.compose(&c));
        let diff = lhs.to_row_major().iter().zip(rhs.to_row_major()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}
