use serde::{Deserialize, Serialize};

use super::{SkeletonError, SkeletonTopology};
use crate::geom::Pose3;
use crate::joints::JointSet3D;

/// End-effector pose plus jaw openness (fraction of maximum width).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperState {
    pub ee_pose: Pose3,
    pub openness: f64,
}

impl GripperState {
    pub fn new(ee_pose: Pose3, openness: f64) -> Result<Self, SkeletonError> {
        if !(0.0..=1.0).contains(&openness) {
            return Err(SkeletonError::InvalidInput(format!("openness must be in [0, 1], got {openness}")));
        }
        Ok(Self { ee_pose, openness })
    }
}

/// Parallel-jaw gripper geometry in the end-effector frame (meters).
/// The jaws open along local x and the fingers point along local +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GripperTemplate {
    pub max_width: f64,
    pub root_depth: f64,
    pub finger_length: f64,
    /// +1 or -1; -1 mirrors the template across the local y-z plane.
    pub x_sign: f64,
}

impl Default for GripperTemplate {
    fn default() -> Self {
        Self { max_width: 0.08, root_depth: 0.02, finger_length: 0.06, x_sign: 1.0 }
    }
}

impl GripperTemplate {
    pub fn mirrored(self) -> Self {
        Self { x_sign: -self.x_sign, ..self }
    }

    /// Joint positions in the end-effector frame.
    pub fn local_joints(&self, openness: f64) -> [[f64; 3]; 7] {
        let half = self.x_sign * openness * self.max_width / 2.0;
        let d = self.root_depth;
        let tip = d + self.finger_length;
        [
            [0.0, 0.0, 0.0],
            [0.0, 0.0, d],
            [half, 0.0, d],
            [-half, 0.0, d],
            [half, 0.0, tip],
            [-half, 0.0, tip],
            [0.0, 0.0, tip],
        ]
    }
}

/// Joint order: wrist, palm, left root, right root, left tip, right tip, and
/// the tool center point between the tips.
pub fn gripper_topology() -> SkeletonTopology {
    let names = ["wrist", "palm", "finger_a_root", "finger_b_root", "finger_a_tip", "finger_b_tip", "tcp"];
    SkeletonTopology::new(
        names.iter().map(|s| s.to_string()).collect(),
        vec![(0, 1), (1, 2), (1, 3), (2, 4), (3, 5)],
        vec![[255, 255, 255], [0, 200, 255], [0, 200, 255], [255, 120, 0], [255, 120, 0]],
    )
    .expect("gripper topology is a tree")
}

pub fn gripper_fk(state: &GripperState, template: &GripperTemplate) -> JointSet3D {
    JointSet3D::all_visible(
        template.local_joints(state.openness).into_iter().map(|p| state.ee_pose.transform_point(p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(pose: Pose3, w: f64) -> GripperState {
        GripperState::new(pose, w).unwrap()
    }

    #[test]
    fn closed_jaws_coincide() {
        let j = gripper_fk(&state(Pose3::identity(), 0.0), &GripperTemplate::default());
        assert_eq!(j.get(2), Some([0.0, 0.0, 0.02]));
        assert_eq!(j.get(2), j.get(3));
    }

    #[test]
    fn open_tips() {
        let j = gripper_fk(&state(Pose3::identity(), 1.0), &GripperTemplate::default());
        let tip = 0.02 + 0.06;
        assert_eq!(j.get(4), Some([0.04, 0.0, tip]));
        assert_eq!(j.get(5), Some([-0.04, 0.0, tip]));
    }

    #[test]
    fn translation_equivariance() {
        let t = [0.3, -0.1, 0.7];
        let base = gripper_fk(&state(Pose3::identity(), 0.4), &GripperTemplate::default());
        let moved = gripper_fk(&state(Pose3::from_translation(t), 0.4), &GripperTemplate::default());
        for (a, b) in base.joints.iter().zip(&moved.joints) {
            let (a, b) = (a.unwrap(), b.unwrap());
            for k in 0..3 {
                assert!((a[k] + t[k] - b[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn openness_out_of_range() {
        assert!(GripperState::new(Pose3::identity(), 1.5).is_err());
        assert!(GripperState::new(Pose3::identity(), f64::NAN).is_err());
    }

    #[test]
    fn mirror_reflects_x() {
        let s = state(Pose3::identity(), 0.7);
        let a = gripper_fk(&s, &GripperTemplate::default());
        let b = gripper_fk(&s, &GripperTemplate::default().mirrored());
        for (p, q) in a.joints.iter().zip(&b.joints) {
            let (p, q) = (p.unwrap(), q.unwrap());
            assert_eq!(p[0], -q[0]);
            assert_eq!(p[1], q[1]);
            assert_eq!(p[2], q[2]);
        }
    }

    #[test]
    fn topology_matches_joint_count() {
        let j = gripper_fk(&state(Pose3::identity(), 0.5), &GripperTemplate::default());
        assert_eq!(j.len(), gripper_topology().joint_count());
        assert_eq!(j.len(), 7);
    }

    proptest! {
        #[test]
        fn fk_is_rigid(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0, ang in -3.0f64..3.0,
                       tx in -2.0f64..2.0, ty in -2.0f64..2.0, tz in -2.0f64..2.0, w in 0.0f64..=1.0) {
            let tmpl = GripperTemplate::default();
            let a = gripper_fk(&state(Pose3::identity(), w), &tmpl);
            let b = gripper_fk(&state(Pose3::from_axis_angle([ax, ay, az], ang, [tx, ty, tz]), w), &tmpl);
            let dist = |s: &JointSet3D, i: usize, j: usize| {
                let (p, q) = (s.get(i).unwrap(), s.get(j).unwrap());
                ((p[0]-q[0]).powi(2) + (p[1]-q[1]).powi(2) + (p[2]-q[2]).powi(2)).sqrt()
            };
            for i in 0..7 {
                for j in 0..7 {
                    prop_assert!((dist(&a, i, j) - dist(&b, i, j)).abs() < 1e-12);
                }
            }
        }
    }
}
