use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::topology::Rgb8;
use super::{SkeletonError, SkeletonTopology};
use crate::joints::{JointSet2D, Point2};

pub const DEFAULT_CANVAS: (u32, u32) = (720, 480);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub line_radius: f64,
    pub joint_radius: f64,
    pub joint_color: Rgb8,
    pub background: Rgb8,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self { line_radius: 3.0, joint_radius: 4.0, joint_color: [255, 255, 255], background: [0, 0, 0] }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), SkeletonError> {
        let ok = |r: f64| r > 0.0 && r.is_finite();
        if !ok(self.line_radius) || !ok(self.joint_radius) {
            return Err(SkeletonError::InvalidInput(format!(
                "radii must be positive, got line {} joint {}",
                self.line_radius, self.joint_radius
            )));
        }
        Ok(())
    }
}

/// A rendered prompt sequence: `T` equally sized RGB frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptClip {
    pub frames: Vec<RgbImage>,
    pub fps: f64,
}

impl PromptClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Inclusive pixel range covering `[lo - r, hi + r]`, clipped to `0..len`.
fn pixel_span(lo: f64, hi: f64, r: f64, len: u32) -> Option<(u32, u32)> {
    let first = (lo - r).ceil().max(0.0);
    let last = (hi + r).floor().min(f64::from(len) - 1.0);
    (first <= last).then(|| (first as u32, last as u32))
}

fn fill_capsule(img: &mut RgbImage, a: Point2, b: Point2, r: f64, color: Rgb8) {
    let (w, h) = img.dimensions();
    let Some((x0, x1)) = pixel_span(a[0].min(b[0]), a[0].max(b[0]), r, w) else { return };
    let Some((y0, y1)) = pixel_span(a[1].min(b[1]), a[1].max(b[1]), r, h) else { return };
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ex * ex + ey * ey;
    let r2 = r * r;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (qx, qy) = (f64::from(x) - a[0], f64::from(y) - a[1]);
            let dot = qx * ex + qy * ey;
            // Past an endpoint the nearest point is that endpoint; otherwise
            // compare the perpendicular distance without dividing.
            let inside = if dot <= 0.0 {
                qx * qx + qy * qy <= r2
            } else if dot >= len2 {
                let (dx, dy) = (qx - ex, qy - ey);
                dx * dx + dy * dy <= r2
            } else {
                let cross = qx * ey - qy * ex;
                cross * cross <= r2 * len2
            };
            if inside {
                img.put_pixel(x, y, Rgb(color));
            }
        }
    }
}

/// Rasterize a skeleton without anti-aliasing: bones as capsules (pixel centers
/// within `line_radius` of the segment) in topology order, then joints as disks.
pub fn render_skeleton(
    joints: &JointSet2D,
    topo: &SkeletonTopology,
    style: &RenderStyle,
    size: (u32, u32),
) -> Result<RgbImage, SkeletonError> {
    let (w, h) = size;
    if w == 0 || h == 0 {
        return Err(SkeletonError::InvalidInput(format!("canvas must be non-empty, got {w}x{h}")));
    }
    let mut img = RgbImage::from_pixel(w, h, Rgb(style.background));
    draw_skeleton(&mut img, joints, topo, style)?;
    Ok(img)
}

/// Draw a skeleton over an existing frame; `style.background` is unused.
pub fn draw_skeleton(
    img: &mut RgbImage,
    joints: &JointSet2D,
    topo: &SkeletonTopology,
    style: &RenderStyle,
) -> Result<(), SkeletonError> {
    style.validate()?;
    if joints.len() != topo.joint_count() {
        return Err(SkeletonError::InvalidInput(format!(
            "{} joints given for a {}-joint topology",
            joints.len(),
            topo.joint_count()
        )));
    }
    if !joints.is_finite() {
        return Err(SkeletonError::InvalidInput("visible joints must have finite coordinates".into()));
    }
    for (&(a, b), &color) in topo.bones().iter().zip(topo.bone_colors()) {
        if let (Some(pa), Some(pb)) = (joints.get(a), joints.get(b)) {
            fill_capsule(img, pa, pb, style.line_radius, color);
        }
    }
    for p in joints.joints.iter().flatten() {
        fill_capsule(img, *p, *p, style.joint_radius, style.joint_color);
    }
    Ok(())
}

/// One frame per joint set; frames are rendered in parallel.
pub fn render_clip(
    sequence: &[JointSet2D],
    topo: &SkeletonTopology,
    style: &RenderStyle,
    size: (u32, u32),
    fps: f64,
) -> Result<PromptClip, SkeletonError> {
    if sequence.is_empty() {
        return Err(SkeletonError::InvalidInput("joint sequence is empty".into()));
    }
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(SkeletonError::InvalidInput(format!("fps must be positive, got {fps}")));
    }
    let frames = sequence
        .par_iter()
        .map(|j| render_skeleton(j, topo, style, size))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PromptClip { frames, fps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::hand_topology;
    use proptest::prelude::*;

    fn one_bone() -> SkeletonTopology {
        SkeletonTopology::new(vec!["a".into(), "b".into()], vec![(0, 1)], vec![[10, 200, 30]]).unwrap()
    }

    #[test]
    fn invisible_joints_give_background() {
        let style = RenderStyle { background: [7, 8, 9], ..Default::default() };
        let img = render_skeleton(&JointSet2D::invisible(21), &hand_topology(), &style, (32, 24)).unwrap();
        assert!(img.pixels().all(|p| p.0 == [7, 8, 9]));
    }

    #[test]
    fn vertical_capsule() {
        let style = RenderStyle { line_radius: 2.0, joint_radius: 1.0, ..Default::default() };
        let joints = JointSet2D::all_visible([[10.0, 20.0], [10.0, 40.0]]);
        let img = render_skeleton(&joints, &one_bone(), &style, (64, 64)).unwrap();
        assert_eq!(img.get_pixel(10, 30).0, [10, 200, 30]);
        assert_eq!(img.get_pixel(12, 30).0, [10, 200, 30]);
        assert_eq!(img.get_pixel(13, 30).0, [0, 0, 0]);
        assert_eq!(img.get_pixel(30, 30).0, [0, 0, 0]);
        // rounded caps: (10,18) is inside, (11,18) is not (distance √5 > 2)
        assert_eq!(img.get_pixel(10, 18).0, [10, 200, 30]);
        assert_eq!(img.get_pixel(11, 18).0, [0, 0, 0]);
        // joint disk overwrites the bone at its center
        assert_eq!(img.get_pixel(10, 20).0, [255, 255, 255]);
    }

    #[test]
    fn half_visible_bone_not_drawn() {
        let joints = JointSet2D::new(vec![Some([10.0, 10.0]), None]);
        let img = render_skeleton(&joints, &one_bone(), &RenderStyle::default(), (32, 32)).unwrap();
        let colored = img.pixels().filter(|p| p.0 == [10, 200, 30]).count();
        assert_eq!(colored, 0);
    }

    #[test]
    fn errors() {
        let j = JointSet2D::all_visible([[1.0, 1.0], [2.0, 2.0]]);
        assert!(render_skeleton(&j, &one_bone(), &RenderStyle::default(), (0, 10)).is_err());
        assert!(render_skeleton(&JointSet2D::invisible(3), &one_bone(), &RenderStyle::default(), (5, 5)).is_err());
        let bad = RenderStyle { line_radius: 0.0, ..Default::default() };
        assert!(render_skeleton(&j, &one_bone(), &bad, (5, 5)).is_err());
        assert!(render_clip(&[], &one_bone(), &RenderStyle::default(), (5, 5), 25.0).is_err());
    }

    #[test]
    fn far_offscreen_geometry_is_clipped() {
        let j = JointSet2D::all_visible([[-1e12, 5.0], [1e12, 5.0]]);
        let img = render_skeleton(&j, &one_bone(), &RenderStyle::default(), (16, 16)).unwrap();
        assert_eq!(img.get_pixel(8, 5).0, [10, 200, 30]);
    }

    #[test]
    fn clip_frames_match_single_renders() {
        let seq: Vec<_> = (0..25).map(|i| JointSet2D::all_visible([[5.0 + f64::from(i), 5.0], [20.0, 30.0]])).collect();
        let clip = render_clip(&seq, &one_bone(), &RenderStyle::default(), (48, 40), 25.0).unwrap();
        assert_eq!(clip.len(), 25);
        for (f, j) in clip.frames.iter().zip(&seq) {
            assert_eq!(f, &render_skeleton(j, &one_bone(), &RenderStyle::default(), (48, 40)).unwrap());
        }
    }

    proptest! {
        #[test]
        fn integer_shift_equivariance(
            pts in proptest::collection::vec((16i32..48, 16i32..48), 21),
            dx in -8i32..8, dy in -8i32..8,
        ) {
            // quarter-pixel coordinates stay exact under integer shifts
            let base = JointSet2D::all_visible(pts.iter().map(|&(x, y)| [f64::from(x) * 0.75 + 0.25, f64::from(y) * 0.75]));
            let shifted = base.translated(f64::from(dx), f64::from(dy));
            let style = RenderStyle::default();
            let a = render_skeleton(&base, &hand_topology(), &style, (64, 64)).unwrap();
            let b = render_skeleton(&shifted, &hand_topology(), &style, (64, 64)).unwrap();
            for y in 0..64i32 {
                for x in 0..64i32 {
                    let (sx, sy) = (x - dx, y - dy);
                    if (0..64).contains(&sx) && (0..64).contains(&sy) {
                        prop_assert_eq!(b.get_pixel(x as u32, y as u32), a.get_pixel(sx as u32, sy as u32));
                    }
                }
            }
        }
    }
}
