//! Seeded synthetic scenes with exact ground truth: robot episodes whose
//! observed video drifts from the rendered prompt by a known homography, and
//! a two-hand clip with noisy detections.
//!
//! Each output draws from its own ChaCha8 stream of the scene seed, so a
//! single episode can be regenerated without the rest of the scene.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::records::{write_camera, write_jsonl};
use super::{
    frames::{write_frames, write_masks},
    CorrespondenceRecord, DetectionFrameRecord, DetectionRecord, HandTruthRecord, HomographyTruthRecord, Manifest,
    ManifestEntry, PipelineError, StateRecord,
};
use crate::geom::{apply_homography, CameraModel, Correspondence, Homography, Pose3};
use crate::joints::{JointSet2D, Point2};
use crate::mask::BinaryMask;
use crate::rectify::FrameCorrespondences;
use crate::skeleton::{draw_skeleton, gripper_topology, hand_topology, occupancy, GripperTemplate, RenderStyle};
use crate::track::{BBox, Detection, Handedness};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Probability that a true hand is not detected in a frame.
    pub dropout: f64,
    /// Probability, per true hand and frame, of an extra random detection.
    pub spurious: f64,
    /// σ of Gaussian noise on detected boxes and joints, px.
    pub jitter_px: f64,
    /// Probability that a detection carries the wrong handedness.
    pub handedness_flip: f64,
    /// Fraction of correspondences per frame that are outliers.
    pub outlier_fraction: f64,
    /// σ of Gaussian noise on inlier correspondence targets, px.
    pub match_noise_px: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            dropout: 0.1,
            spurious: 0.05,
            jitter_px: 1.0,
            handedness_flip: 0.0,
            outlier_fraction: 0.3,
            match_noise_px: 0.3,
        }
    }
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { dropout: 0.0, spurious: 0.0, jitter_px: 0.0, handedness_flip: 0.0, outlier_fraction: 0.0, match_noise_px: 0.0 }
    }
}

/// One robot episode; `drift_px` is the typical displacement between the
/// rendered prompt and the observed video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub drift_px: f64,
}

/// Axis-aligned rectangle drawn into the background; `center` is a fraction of the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub center: [f64; 2],
    pub half_size: [f64; 2],
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthScene {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub frames: usize,
    pub fps: f64,
    /// Amplitude of the hands' motion as a fraction of the canvas width.
    pub hand_motion: f64,
    pub episodes: Vec<EpisodeSpec>,
    pub matches_per_frame: usize,
    pub objects: Vec<SceneObject>,
    pub noise: NoiseSpec,
}

impl Default for SynthScene {
    fn default() -> Self {
        Self {
            seed: 0,
            width: 320,
            height: 240,
            frames: 48,
            fps: 30.0,
            hand_motion: 0.08,
            episodes: vec![EpisodeSpec { drift_px: 3.0 }, EpisodeSpec { drift_px: 14.0 }],
            matches_per_frame: 40,
            objects: vec![
                SceneObject { center: [0.3, 0.75], half_size: [22.0, 14.0], color: [170, 60, 50] },
                SceneObject { center: [0.7, 0.8], half_size: [16.0, 16.0], color: [60, 90, 170] },
            ],
            noise: NoiseSpec::default(),
        }
    }
}

impl SynthScene {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let n = &self.noise;
        let ok = self.width >= 32
            && self.height >= 32
            && self.frames >= 2
            && self.fps > 0.0
            && self.fps.is_finite()
            && (0.0..=0.2).contains(&self.hand_motion)
            && self.matches_per_frame >= 4
            && prob(n.dropout)
            && prob(n.spurious)
            && prob(n.handedness_flip)
            && (0.0..1.0).contains(&n.outlier_fraction)
            && n.jitter_px >= 0.0
            && n.match_noise_px >= 0.0
            && n.jitter_px.is_finite()
            && n.match_noise_px.is_finite()
            && self.episodes.iter().all(|e| e.drift_px >= 0.0 && e.drift_px <= 100.0);
        if !ok {
            return Err(PipelineError::InvalidInput(
                "scene needs a canvas of at least 32x32, >= 2 frames, >= 4 matches, probabilities in [0, 1], \
                 outlier fraction below 1 and non-negative noise and drift"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn camera(&self) -> CameraModel {
        let f = 0.9 * f64::from(self.width);
        CameraModel {
            fx: f,
            fy: f,
            cx: (f64::from(self.width) - 1.0) / 2.0,
            cy: (f64::from(self.height) - 1.0) / 2.0,
            world_to_cam: Pose3::identity(),
            width: self.width,
            height: self.height,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn background(&self) -> RgbImage {
        let h = f64::from(self.height);
        let mut img = RgbImage::from_fn(self.width, self.height, |_, y| {
            let v = (40.0 + 50.0 * f64::from(y) / h) as u8;
            Rgb([v, v, v.saturating_add(10)])
        });
        for o in &self.objects {
            let cx = o.center[0] * f64::from(self.width);
            let cy = o.center[1] * h;
            for y in 0..self.height {
                for x in 0..self.width {
                    if (f64::from(x) - cx).abs() <= o.half_size[0] && (f64::from(y) - cy).abs() <= o.half_size[1] {
                        img.put_pixel(x, y, Rgb(o.color));
                    }
                }
            }
        }
        img
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRobotEpisode {
    pub clip_id: String,
    pub camera: CameraModel,
    pub states: Vec<StateRecord>,
    /// Observed video: the gripper drawn where it really is.
    pub frames: Vec<RgbImage>,
    pub correspondences: Vec<FrameCorrespondences>,
    /// Map from prompt pixels to observed pixels, per frame.
    pub homographies: Vec<Homography>,
    pub prompt_joints: Vec<JointSet2D>,
    pub observed_joints: Vec<JointSet2D>,
    pub drift_px: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthHandClip {
    pub clip_id: String,
    pub frames: Vec<RgbImage>,
    /// Union of both hands' rendered pixels.
    pub masks: Vec<BinaryMask>,
    pub detections: Vec<Detection>,
    pub truth: Vec<HandTruthRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub robot: Vec<SynthRobotEpisode>,
    pub hands: SynthHandClip,
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    }
}

fn ee_pose(t: f64, phase: f64) -> Pose3 {
    let (x, y, z) = (0.12 * (2.0 * PI * t + phase).sin(), 0.06 * (4.0 * PI * t).sin(), 0.5 + 0.03 * (2.0 * PI * t).cos());
    // Fingers (local +z) point down the image (+y), with a slow yaw wobble.
    let down = Pose3::from_axis_angle([1.0, 0.0, 0.0], -FRAC_PI_2, [0.0, 0.0, 0.0]);
    let yaw = Pose3::from_axis_angle([0.0, 1.0, 0.0], 0.3 * (2.0 * PI * t).sin(), [x, y, z]);
    yaw.compose(&down)
}

/// Open, close around a third of the way through, reopen at two thirds.
fn openness_at(i: usize, n: usize) -> f64 {
    let ramp = 6.0;
    let (a, b) = (n as f64 / 3.0, 2.0 * n as f64 / 3.0);
    let t = i as f64;
    let closing = ((t - a) / ramp).clamp(0.0, 1.0);
    let opening = ((t - b) / ramp).clamp(0.0, 1.0);
    1.0 - 0.8 * closing + 0.8 * opening
}

fn drift_homography(scene: &SynthScene, drift: f64, t: f64, phases: [f64; 4]) -> Result<Homography, PipelineError> {
    let c = [(f64::from(scene.width) - 1.0) / 2.0, (f64::from(scene.height) - 1.0) / 2.0];
    let mag = drift * (0.9 + 0.1 * (2.0 * PI * t + phases[0]).sin());
    let dir = phases[1] + 0.3 * (2.0 * PI * t).sin();
    let theta = drift * 1e-3 * (2.0 * PI * t + phases[2]).sin();
    let g = drift * 1e-6 * (2.0 * PI * t + phases[3]).cos();
    let to_center = Matrix3::new(1.0, 0.0, -c[0], 0.0, 1.0, -c[1], 0.0, 0.0, 1.0);
    let from_center = Matrix3::new(1.0, 0.0, c[0], 0.0, 1.0, c[1], 0.0, 0.0, 1.0);
    let (s, co) = theta.sin_cos();
    let rot = Matrix3::new(co, -s, 0.0, s, co, 0.0, g, -g, 1.0);
    let shift = Matrix3::new(1.0, 0.0, mag * dir.cos(), 0.0, 1.0, mag * dir.sin(), 0.0, 0.0, 1.0);
    Homography::new(shift * from_center * rot * to_center)
        .map_err(|e| PipelineError::InvalidInput(format!("drift homography: {e}")))
}

fn shuffle<T>(rng: &mut ChaCha8Rng, v: &mut [T]) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i as u32) as usize;
        v.swap(i, j);
    }
}

fn correspondences(
    scene: &SynthScene,
    h: &Homography,
    rng: &mut ChaCha8Rng,
) -> Vec<Correspondence> {
    let (w, hgt) = (f64::from(scene.width), f64::from(scene.height));
    let n = scene.matches_per_frame;
    let n_out = (scene.noise.outlier_fraction * n as f64).round() as usize;
    let margin = 8.0;
    let point = |rng: &mut ChaCha8Rng| [rng.random_range(margin..w - margin), rng.random_range(margin..hgt - margin)];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let src = point(rng);
        let truth = h.apply_point(src).expect("drift keeps points finite");
        let dst = if k < n_out {
            loop {
                let d = point(rng);
                if (d[0] - truth[0]).hypot(d[1] - truth[1]) > 10.0 {
                    break d;
                }
            }
        } else {
            let sigma = scene.noise.match_noise_px;
            [truth[0] + gaussian(rng, sigma), truth[1] + gaussian(rng, sigma)]
        };
        out.push(Correspondence::new(src, dst));
    }
    shuffle(rng, &mut out);
    out
}

/// Robot episode `index` of the scene.
pub fn synth_robot_episode(scene: &SynthScene, index: usize) -> Result<SynthRobotEpisode, PipelineError> {
    scene.validate()?;
    let spec = scene
        .episodes
        .get(index)
        .ok_or_else(|| PipelineError::InvalidInput(format!("scene has no episode {index}")))?;
    let mut rng = scene.rng(1 + index as u64);
    let camera = scene.camera();
    let template = GripperTemplate::default();
    let n = scene.frames;
    let phase = rng.random_range(0.0..2.0 * PI);
    let phases = [(); 4].map(|_| rng.random_range(0.0..2.0 * PI));
    let states: Vec<StateRecord> = (0..n)
        .map(|i| StateRecord {
            schema_version: SCHEMA_VERSION,
            frame_index: i,
            timestamp_s: i as f64 / scene.fps,
            ee_pose: ee_pose(i as f64 / n as f64, phase),
            openness: openness_at(i, n),
        })
        .collect();
    let prompt_joints = super::robot_prompt_joints(&states, &camera, &template)?;
    let homographies = (0..n)
        .map(|i| drift_homography(scene, spec.drift_px, i as f64 / n as f64, phases))
        .collect::<Result<Vec<_>, _>>()?;
    let observed_joints: Vec<JointSet2D> =
        prompt_joints.iter().zip(&homographies).map(|(j, h)| apply_homography(h, j)).collect();
    let correspondences = homographies
        .iter()
        .enumerate()
        .map(|(i, h)| FrameCorrespondences { frame_index: i, pairs: correspondences(scene, h, &mut rng) })
        .collect();
    let background = scene.background();
    let topo = gripper_topology();
    let style = RenderStyle::default();
    let frames = observed_joints
        .par_iter()
        .map(|j| {
            let mut img = background.clone();
            draw_skeleton(&mut img, j, &topo, &style).map(|_| img)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::InvalidInput(e.to_string()))?;
    Ok(SynthRobotEpisode {
        clip_id: format!("robot_{index:03}"),
        camera,
        states,
        frames,
        correspondences,
        homographies,
        prompt_joints,
        observed_joints,
        drift_px: spec.drift_px,
    })
}

/// Right hand, palm toward the camera, fingers up, relative to the box center.
fn hand_template() -> Vec<Point2> {
    let bases: [(f64, f64, f64); 5] = [(10.0, 14.0, -0.9), (7.0, -2.0, -0.15), (1.0, -4.0, 0.0), (-5.0, -2.0, 0.12), (-10.0, 2.0, 0.3)];
    let lengths = [6.0, 6.5, 5.5];
    let mut out = vec![[0.0, 24.0]];
    for (bx, by, lean) in bases {
        let mut p = [bx, by];
        out.push(p);
        for l in lengths {
            p = [p[0] - lean * l, p[1] - l];
            out.push(p);
        }
    }
    out
}

fn hand_joints(template: &[Point2], hand: Handedness, center: Point2) -> Vec<Point2> {
    let sign = if hand == Handedness::Right { 1.0 } else { -1.0 };
    template.iter().map(|p| [center[0] + sign * p[0], center[1] + p[1]]).collect()
}

fn joints_box(joints: &[Point2], pad: f64) -> BBox {
    let (mut x1, mut y1, mut x2, mut y2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in joints {
        x1 = x1.min(p[0]);
        y1 = y1.min(p[1]);
        x2 = x2.max(p[0]);
        y2 = y2.max(p[1]);
    }
    BBox::from_array([x1 - pad, y1 - pad, x2 + pad, y2 + pad])
}

/// The two-hand clip of the scene.
pub fn synth_hands(scene: &SynthScene) -> Result<SynthHandClip, PipelineError> {
    scene.validate()?;
    let mut rng = scene.rng(0);
    let (w, h) = (f64::from(scene.width), f64::from(scene.height));
    let n = scene.frames;
    let template = hand_template();
    let phases = [(); 4].map(|_| rng.random_range(0.0..2.0 * PI));
    let center = |hand: Handedness, t: f64| {
        let (x0, p) = if hand == Handedness::Left { (0.28, &phases[..2]) } else { (0.72, &phases[2..]) };
        [
            x0 * w + scene.hand_motion * w * (2.0 * PI * t + p[0]).sin(),
            0.45 * h + 0.12 * h * (2.0 * PI * t + p[1]).cos(),
        ]
    };
    let noise = scene.noise;
    let mut truth = Vec::with_capacity(n);
    let mut detections = Vec::new();
    for i in 0..n {
        let t = i as f64 / n as f64;
        let mut hands = Vec::with_capacity(2);
        for hand in [Handedness::Left, Handedness::Right] {
            let joints = hand_joints(&template, hand, center(hand, t));
            let bbox = joints_box(&joints, 4.0);
            hands.push(DetectionRecord { bbox, confidence: 1.0, handedness: hand, joints2d: Some(joints), track_id: None });
        }
        for true_hand in &hands {
            if rng.random::<f64>() >= noise.dropout {
                let s = noise.jitter_px;
                let b = true_hand.bbox.to_array().map(|v| v + gaussian(&mut rng, s));
                let bbox = BBox::new(b[0].min(b[2]), b[1].min(b[3]), b[0].max(b[2]), b[1].max(b[3]))
                    .expect("jittered box stays finite");
                let joints = true_hand
                    .joints2d
                    .as_ref()
                    .map(|js| js.iter().map(|p| [p[0] + gaussian(&mut rng, s), p[1] + gaussian(&mut rng, s)]).collect());
                let confidence = 0.75 + 0.2 * rng.random::<f64>();
                let flip = rng.random::<f64>() < noise.handedness_flip;
                let handedness = if flip { true_hand.handedness.flipped() } else { true_hand.handedness };
                detections.push(Detection { frame_index: i, bbox, confidence, handedness, joints2d: joints, track_id: None });
            }
            if rng.random::<f64>() < noise.spurious {
                let size = rng.random_range(30.0..60.0);
                let x = rng.random_range(0.0..w - size);
                let y = rng.random_range(0.0..h - size);
                let bbox = BBox::new(x, y, x + size, y + size).expect("ordered box");
                let joints = (0..template.len())
                    .map(|_| [x + rng.random_range(0.0..size), y + rng.random_range(0.0..size)])
                    .collect();
                let confidence = 0.2 + 0.5 * rng.random::<f64>();
                let handedness = if rng.random::<bool>() { Handedness::Left } else { Handedness::Right };
                detections.push(Detection { frame_index: i, bbox, confidence, handedness, joints2d: Some(joints), track_id: None });
            }
        }
        truth.push(HandTruthRecord { schema_version: SCHEMA_VERSION, frame_index: i, hands });
    }

    let background = scene.background();
    let topo = hand_topology();
    let style = RenderStyle::default();
    let rendered = truth
        .par_iter()
        .map(|rec| {
            let mut img = background.clone();
            let mut only = RgbImage::from_pixel(scene.width, scene.height, Rgb(style.background));
            for hand in &rec.hands {
                let j = JointSet2D::all_visible(hand.joints2d.iter().flatten().copied());
                draw_skeleton(&mut img, &j, &topo, &style)?;
                draw_skeleton(&mut only, &j, &topo, &style)?;
            }
            Ok((img, occupancy(&only, style.background)))
        })
        .collect::<Result<Vec<_>, crate::skeleton::SkeletonError>>()
        .map_err(|e| PipelineError::InvalidInput(e.to_string()))?;
    let (frames, masks) = rendered.into_iter().unzip();
    Ok(SynthHandClip { clip_id: "hands".into(), frames, masks, detections, truth })
}

/// Every clip of the scene.
pub fn synth_generate(scene: &SynthScene) -> Result<SynthOutput, PipelineError> {
    scene.validate()?;
    let robot = (0..scene.episodes.len()).map(|i| synth_robot_episode(scene, i)).collect::<Result<Vec<_>, _>>()?;
    Ok(SynthOutput { robot, hands: synth_hands(scene)? })
}

fn detection_records(dets: &[Detection], frames: usize) -> Vec<DetectionFrameRecord> {
    let mut out: Vec<DetectionFrameRecord> = (0..frames)
        .map(|i| DetectionFrameRecord { schema_version: SCHEMA_VERSION, frame_index: i, detections: Vec::new() })
        .collect();
    for d in dets {
        out[d.frame_index].detections.push(DetectionRecord {
            bbox: d.bbox,
            confidence: d.confidence,
            handedness: d.handedness,
            joints2d: d.joints2d.clone(),
            track_id: d.track_id,
        });
    }
    out
}

/// Write clips, hand masks under `masks/`, ground truth and the scene under
/// `truth/`, and `manifest.jsonl` into `dir`.
pub fn synth_write(scene: &SynthScene, out: &SynthOutput, dir: &Path) -> Result<Manifest, PipelineError> {
    let mut entries = Vec::new();
    for ep in &out.robot {
        let root = dir.join(&ep.clip_id);
        write_frames(&root.join("frames"), &ep.frames)?;
        write_camera(&root.join("camera.json"), &ep.camera)?;
        write_jsonl(&root.join("state_log.jsonl"), &ep.states)?;
        let corr: Vec<CorrespondenceRecord> = ep
            .correspondences
            .iter()
            .map(|f| CorrespondenceRecord {
                schema_version: SCHEMA_VERSION,
                frame_index: f.frame_index,
                pairs: f.pairs.iter().map(|c| [c.src[0], c.src[1], c.dst[0], c.dst[1], c.weight]).collect(),
            })
            .collect();
        write_jsonl(&root.join("correspondences.jsonl"), &corr)?;
        let truth: Vec<HomographyTruthRecord> = ep
            .homographies
            .iter()
            .zip(&ep.observed_joints)
            .enumerate()
            .map(|(i, (h, j))| HomographyTruthRecord {
                schema_version: SCHEMA_VERSION,
                frame_index: i,
                homography: h.to_row_major(),
                joints2d: j.clone(),
            })
            .collect();
        write_jsonl(&dir.join("truth").join(format!("{}_homographies.jsonl", ep.clip_id)), &truth)?;
        let id = &ep.clip_id;
        let mut e = ManifestEntry::new(id.clone(), format!("{id}/frames"), scene.fps);
        e.camera_file = Some(format!("{id}/camera.json").into());
        e.state_log = Some(format!("{id}/state_log.jsonl").into());
        e.correspondence_file = Some(format!("{id}/correspondences.jsonl").into());
        e.caption = Some(format!("synthetic gripper episode, drift {} px", ep.drift_px));
        entries.push(e);
    }
    let hands = &out.hands;
    let root = dir.join(&hands.clip_id);
    write_frames(&root.join("frames"), &hands.frames)?;
    write_masks(&dir.join("masks").join(&hands.clip_id), &hands.masks)?;
    write_jsonl(&root.join("detections.jsonl"), &detection_records(&hands.detections, hands.frames.len()))?;
    write_jsonl(&dir.join("truth").join(format!("{}_tracks.jsonl", hands.clip_id)), &hands.truth)?;
    let id = &hands.clip_id;
    let mut e = ManifestEntry::new(id.clone(), format!("{id}/frames"), scene.fps);
    e.detection_file = Some(format!("{id}/detections.jsonl").into());
    e.caption = Some("synthetic two-hand clip".into());
    entries.push(e);

    let mut text = serde_json::to_string_pretty(scene).map_err(|e| PipelineError::io(dir, e))?;
    text.push('\n');
    let scene_path = dir.join("truth").join("scene.json");
    fs::write(&scene_path, text).map_err(|e| PipelineError::io(&scene_path, e))?;
    let manifest = Manifest::new(dir, entries)?;
    manifest.write(&dir.join("manifest.jsonl"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rectify::{rectify_episode, RectifyParams};

    fn small() -> SynthScene {
        SynthScene { frames: 12, ..Default::default() }
    }

    #[test]
    fn same_seed_same_output() {
        let s = small();
        assert_eq!(synth_generate(&s).unwrap(), synth_generate(&s).unwrap());
        let other = synth_generate(&SynthScene { seed: 1, ..small() }).unwrap();
        assert_ne!(other.hands.detections, synth_generate(&s).unwrap().hands.detections);
    }

    #[test]
    fn zero_drift_is_identity() {
        let s = SynthScene { episodes: vec![EpisodeSpec { drift_px: 0.0 }], noise: NoiseSpec::none(), ..small() };
        let ep = synth_robot_episode(&s, 0).unwrap();
        assert!(ep.homographies.iter().all(Homography::is_identity));
        assert_eq!(ep.prompt_joints, ep.observed_joints);
        let r = rectify_episode(&ep.prompt_joints, &ep.correspondences, &RectifyParams::default()).unwrap();
        assert!(r.frames.iter().all(|f| f.homography.is_identity()));
    }

    #[test]
    fn drift_is_recovered() {
        let s = SynthScene { episodes: vec![EpisodeSpec { drift_px: 6.0 }], ..small() };
        let ep = synth_robot_episode(&s, 0).unwrap();
        let r = rectify_episode(&ep.prompt_joints, &ep.correspondences, &RectifyParams::default()).unwrap();
        for (f, truth) in r.frames.iter().zip(&ep.observed_joints) {
            for k in 0..truth.len() {
                let (a, b) = (f.joints.get(k).unwrap(), truth.get(k).unwrap());
                assert!((a[0] - b[0]).hypot(a[1] - b[1]) < 0.5);
            }
        }
    }

    #[test]
    fn joints_stay_on_canvas() {
        let out = synth_generate(&SynthScene::default()).unwrap();
        for ep in &out.robot {
            for j in &ep.prompt_joints {
                assert_eq!(j.visible_count(), 7);
                for p in j.joints.iter().flatten() {
                    assert!(p[0] > 0.0 && p[0] < 319.0 && p[1] > 0.0 && p[1] < 239.0, "{p:?}");
                }
            }
        }
        assert!(out.hands.masks.iter().all(|m| m.count() > 0));
    }
}
