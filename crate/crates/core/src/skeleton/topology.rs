use serde::{Deserialize, Serialize};

use super::SkeletonError;

pub type Rgb8 = [u8; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonTopology {
    joint_names: Vec<String>,
    bones: Vec<(usize, usize)>,
    bone_colors: Vec<Rgb8>,
}

impl SkeletonTopology {
    /// Validates index ranges, matching color count, and that bones form a forest.
    pub fn new(
        joint_names: Vec<String>,
        bones: Vec<(usize, usize)>,
        bone_colors: Vec<Rgb8>,
    ) -> Result<Self, SkeletonError> {
        let n = joint_names.len();
        if bone_colors.len() != bones.len() {
            return Err(SkeletonError::InvalidTopology(format!(
                "{} bones but {} colors",
                bones.len(),
                bone_colors.len()
            )));
        }
        // union-find: an edge joining two already-connected joints closes a cycle
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (k, &(a, b)) in bones.iter().enumerate() {
            if a >= n || b >= n {
                return Err(SkeletonError::InvalidTopology(format!(
                    "bone {k} ({a}, {b}) references a joint outside 0..{n}"
                )));
            }
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra == rb {
                return Err(SkeletonError::InvalidTopology(format!("bone {k} ({a}, {b}) closes a cycle")));
            }
            parent[ra] = rb;
        }
        Ok(Self { joint_names, bones, bone_colors })
    }

    pub fn joint_count(&self) -> usize {
        self.joint_names.len()
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn bones(&self) -> &[(usize, usize)] {
        &self.bones
    }

    pub fn bone_colors(&self) -> &[Rgb8] {
        &self.bone_colors
    }
}

pub const HAND_JOINTS: usize = 21;

const FINGERS: [(&str, [&str; 4], Rgb8); 5] = [
    ("thumb", ["cmc", "mcp", "ip", "tip"], [255, 64, 64]),
    ("index", ["mcp", "pip", "dip", "tip"], [255, 200, 0]),
    ("middle", ["mcp", "pip", "dip", "tip"], [64, 220, 64]),
    ("ring", ["mcp", "pip", "dip", "tip"], [0, 180, 255]),
    ("pinky", ["mcp", "pip", "dip", "tip"], [200, 80, 255]),
];

/// Wrist followed by four joints per finger, thumb to pinky. Every bone of a
/// finger shares that finger's color.
pub fn hand_topology() -> SkeletonTopology {
    let mut names = vec!["wrist".to_string()];
    let mut bones = Vec::with_capacity(20);
    let mut colors = Vec::with_capacity(20);
    for (f, (finger, parts, color)) in FINGERS.iter().enumerate() {
        let base = 1 + 4 * f;
        for (k, part) in parts.iter().enumerate() {
            names.push(format!("{finger}_{part}"));
            let parent = if k == 0 { 0 } else { base + k - 1 };
            bones.push((parent, base + k));
            colors.push(*color);
        }
    }
    SkeletonTopology::new(names, bones, colors).expect("hand topology is a tree")
}
