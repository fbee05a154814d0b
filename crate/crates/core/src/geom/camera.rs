use serde::{Deserialize, Serialize};

use super::{GeomError, Pose3};
use crate::joints::{JointSet2D, JointSet3D};

/// Minimum camera-frame depth (meters) for a point to be projected.
pub const MIN_DEPTH: f64 = 1e-6;

/// Pinhole camera without lens distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub world_to_cam: Pose3,
    pub width: u32,
    pub height: u32,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        world_to_cam: Pose3,
        width: u32,
        height: u32,
    ) -> Result<Self, GeomError> {
        let cam = Self { fx, fy, cx, cy, world_to_cam, width, height };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(GeomError::InvalidInput(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        let in_range = |c: f64, len: u32| c >= 0.0 && c < f64::from(len);
        if !in_range(self.cx, self.width) || !in_range(self.cy, self.height) {
            return Err(GeomError::InvalidInput(format!(
                "principal point ({}, {}) outside {}x{} frame",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Project one world point; `None` when it is behind (or on) the camera plane.
    pub fn project(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        let [x, y, z] = self.world_to_cam.transform_point(p);
        if z <= MIN_DEPTH {
            return None;
        }
        Some([self.fx * x / z + self.cx, self.fy * y / z + self.cy])
    }
}

pub fn project_points(points: &JointSet3D, cam: &CameraModel) -> Result<JointSet2D, GeomError> {
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.joints.iter().enumerate() {
        match p {
            Some(p) if !p.iter().all(|v| v.is_finite()) => {
                return Err(GeomError::InvalidInput(format!("joint {i} has non-finite coordinates")));
            }
            Some(p) => out.push(cam.project(*p)),
            None => out.push(None),
        }
    }
    Ok(JointSet2D::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel {
        CameraModel::new(100.0, 100.0, 360.0, 240.0, Pose3::identity(), 720, 480).unwrap()
    }

    #[test]
    fn principal_axis_hits_principal_point() {
        let out = project_points(&JointSet3D::all_visible([[0.0, 0.0, 2.0]]), &cam()).unwrap();
        assert_eq!(out.get(0), Some([360.0, 240.0]));
    }

    #[test]
    fn off_axis_point() {
        let out = project_points(&JointSet3D::all_visible([[1.0, 0.0, 2.0]]), &cam()).unwrap();
        assert_eq!(out.get(0), Some([410.0, 240.0]));
    }

    #[test]
    fn behind_camera_is_invisible() {
        let out = project_points(&JointSet3D::all_visible([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0]]), &cam()).unwrap();
        assert_eq!(out.joints, vec![None, None]);
    }

    #[test]
    fn non_finite_rejected() {
        let pts = JointSet3D::all_visible([[f64::NAN, 0.0, 1.0]]);
        assert!(matches!(project_points(&pts, &cam()), Err(GeomError::InvalidInput(_))));
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(CameraModel::new(0.0, 1.0, 1.0, 1.0, Pose3::identity(), 10, 10).is_err());
        assert!(CameraModel::new(1.0, 1.0, 10.0, 1.0, Pose3::identity(), 10, 10).is_err());
    }

    #[test]
    fn pose_applied_before_projection() {
        let c = CameraModel { world_to_cam: Pose3::from_translation([0.0, 0.0, 2.0]), ..cam() };
        assert_eq!(c.project([1.0, 0.0, 0.0]), Some([410.0, 240.0]));
    }
}
