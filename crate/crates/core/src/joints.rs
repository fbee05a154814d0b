//! Joint coordinate sets shared by projection, rendering and tracking.
//!
//! Invisible joints are `None`; coordinates of visible joints are always finite.

use serde::{Deserialize, Serialize};

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

/// 2D joint positions in pixels. Pixel `(i, j)` has its center at `(i, j)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointSet2D {
    pub joints: Vec<Option<Point2>>,
}

/// 3D joint positions in meters (world frame unless stated otherwise).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointSet3D {
    pub joints: Vec<Option<Point3>>,
}

impl JointSet2D {
    pub fn new(joints: Vec<Option<Point2>>) -> Self {
        Self { joints }
    }

    pub fn all_visible(points: impl IntoIterator<Item = Point2>) -> Self {
        Self { joints: points.into_iter().map(Some).collect() }
    }

    pub fn invisible(n: usize) -> Self {
        Self { joints: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Point2> {
        self.joints.get(i).copied().flatten()
    }

    pub fn is_visible(&self, i: usize) -> bool {
        self.get(i).is_some()
    }

    pub fn visible_count(&self) -> usize {
        self.joints.iter().filter(|j| j.is_some()).count()
    }

    /// Shift every visible joint by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            joints: self.joints.iter().map(|j| j.map(|[x, y]| [x + dx, y + dy])).collect(),
        }
    }

    /// True when every visible coordinate is finite.
    pub fn is_finite(&self) -> bool {
        self.joints.iter().flatten().all(|p| p.iter().all(|v| v.is_finite()))
    }
}

impl JointSet3D {
    pub fn new(joints: Vec<Option<Point3>>) -> Self {
        Self { joints }
    }

    pub fn all_visible(points: impl IntoIterator<Item = Point3>) -> Self {
        Self { joints: points.into_iter().map(Some).collect() }
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Point3> {
        self.joints.get(i).copied().flatten()
    }
}
