//! Rasterizer golden cases shared by the golden test and the acceptance run.

#![allow(dead_code)]

use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ImageFormat, RgbImage};
use vaprompt_core::geom::{project_points, CameraModel, Pose3};
use vaprompt_core::skeleton::{
    gripper_fk, gripper_topology, hand_topology, render_skeleton, GripperState, GripperTemplate, RenderStyle,
};
use vaprompt_core::{JointSet2D, SkeletonTopology};

pub struct Case {
    pub name: &'static str,
    pub joints: JointSet2D,
    pub topo: SkeletonTopology,
    pub style: RenderStyle,
    pub size: (u32, u32),
}

/// Every pixel tested against every primitive, later primitives winning.
pub fn reference(c: &Case) -> RgbImage {
    let covers = |x: f64, y: f64, a: [f64; 2], b: [f64; 2], r: f64| {
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let (qx, qy) = (x - a[0], y - a[1]);
        let (rx, ry) = (x - b[0], y - b[1]);
        let len2 = ex * ex + ey * ey;
        let dot = qx * ex + qy * ey;
        if dot <= 0.0 {
            qx * qx + qy * qy <= r * r
        } else if dot >= len2 {
            rx * rx + ry * ry <= r * r
        } else {
            (qx * ey - qy * ex).powi(2) <= r * r * len2
        }
    };
    RgbImage::from_fn(c.size.0, c.size.1, |x, y| {
        let (px, py) = (f64::from(x), f64::from(y));
        let mut color = c.style.background;
        for (&(i, j), &bc) in c.topo.bones().iter().zip(c.topo.bone_colors()) {
            if let (Some(a), Some(b)) = (c.joints.get(i), c.joints.get(j)) {
                if covers(px, py, a, b, c.style.line_radius) {
                    color = bc;
                }
            }
        }
        for p in c.joints.joints.iter().flatten() {
            if covers(px, py, *p, *p, c.style.joint_radius) {
                color = c.style.joint_color;
            }
        }
        image::Rgb(color)
    })
}

fn hand(center: [f64; 2], scale: f64, curl: f64) -> Vec<[f64; 2]> {
    let bases = [(10.0, 14.0, -0.75), (7.0, -2.0, -0.25), (1.0, -4.0, 0.0), (-5.0, -2.0, 0.25), (-10.0, 2.0, 0.5)];
    let mut out = vec![[center[0], center[1] + 24.0 * scale]];
    for (bx, by, lean) in bases {
        let mut p = [bx, by];
        out.push(p);
        for (k, l) in [6.0, 6.5, 5.5].into_iter().enumerate() {
            let down = if k > 0 { curl } else { 0.0 };
            p = [p[0] - lean * l, p[1] - l + 2.0 * down * l];
            out.push(p);
        }
    }
    // Snap to quarter pixels so every case is exactly representable.
    let q = |v: f64| (v * 4.0).round() / 4.0;
    out.iter()
        .enumerate()
        .map(|(i, p)| if i == 0 { [q(p[0]), q(p[1])] } else { [q(center[0] + scale * p[0]), q(center[1] + scale * p[1])] })
        .collect()
}

fn gripper(openness: f64, yaw: f64, template: GripperTemplate, shift: [f64; 3]) -> JointSet2D {
    let down = Pose3::from_axis_angle([1.0, 0.0, 0.0], -std::f64::consts::FRAC_PI_2, [0.0, 0.0, 0.0]);
    let pose = Pose3::from_axis_angle([0.0, 1.0, 0.0], yaw, [shift[0], shift[1], 0.4 + shift[2]]).compose(&down);
    let cam = CameraModel {
        fx: 200.0,
        fy: 200.0,
        cx: 63.5,
        cy: 47.5,
        world_to_cam: Pose3::identity(),
        width: 128,
        height: 96,
    };
    let j = project_points(&gripper_fk(&GripperState::new(pose, openness).unwrap(), &template), &cam).unwrap();
    JointSet2D::new(j.joints.iter().map(|p| p.map(|p| [(p[0] * 4.0).round() / 4.0, (p[1] * 4.0).round() / 4.0])).collect())
}

pub fn cases() -> Vec<Case> {
    let hand_topo = hand_topology;
    let default = RenderStyle::default();
    let mut partial = hand([64.0, 60.0], 2.0, 0.0);
    let mut partial_set: Vec<Option<[f64; 2]>> = partial.drain(..).map(Some).collect();
    for k in [3, 4, 8, 13, 14, 15, 16] {
        partial_set[k] = None;
    }
    vec![
        Case {
            name: "vertical_capsule",
            joints: JointSet2D::all_visible([[10.0, 5.0], [10.0, 40.0]]),
            topo: SkeletonTopology::new(vec!["a".into(), "b".into()], vec![(0, 1)], vec![[255, 0, 0]]).unwrap(),
            style: default,
            size: (40, 48),
        },
        Case {
            name: "hand_open",
            joints: JointSet2D::all_visible(hand([64.0, 60.0], 2.0, 0.0)),
            topo: hand_topo(),
            style: default,
            size: (128, 128),
        },
        Case {
            name: "hand_curled",
            joints: JointSet2D::all_visible(hand([64.0, 60.0], 2.0, 0.6)),
            topo: hand_topo(),
            style: default,
            size: (128, 128),
        },
        Case { name: "hand_partial", joints: JointSet2D::new(partial_set), topo: hand_topo(), style: default, size: (128, 128) },
        Case {
            name: "hand_subpixel",
            joints: JointSet2D::all_visible(hand([40.25, 37.75], 1.25, 0.2)),
            topo: hand_topo(),
            style: RenderStyle { line_radius: 1.5, joint_radius: 2.25, ..default },
            size: (80, 80),
        },
        Case {
            name: "hand_styled",
            joints: JointSet2D::all_visible(hand([64.0, 60.0], 2.5, 0.1)),
            topo: hand_topo(),
            style: RenderStyle { line_radius: 5.0, joint_radius: 6.0, joint_color: [20, 20, 20], background: [240, 235, 200] },
            size: (128, 128),
        },
        Case {
            name: "gripper_open",
            joints: gripper(1.0, 0.0, GripperTemplate::default(), [0.0, 0.0, 0.0]),
            topo: gripper_topology(),
            style: default,
            size: (128, 96),
        },
        Case {
            name: "gripper_closed",
            joints: gripper(0.0, 0.0, GripperTemplate::default(), [0.0, 0.0, 0.0]),
            topo: gripper_topology(),
            style: default,
            size: (128, 96),
        },
        Case {
            name: "gripper_mirrored_yawed",
            joints: gripper(0.6, 0.5, GripperTemplate::default().mirrored(), [0.03, 0.0, 0.0]),
            topo: gripper_topology(),
            style: default,
            size: (128, 96),
        },
        Case {
            name: "gripper_clipped",
            joints: gripper(0.8, -0.3, GripperTemplate::default(), [0.13, 0.07, 0.0]),
            topo: gripper_topology(),
            style: RenderStyle { line_radius: 2.0, joint_radius: 3.0, ..default },
            size: (128, 96),
        },
    ]
}

pub fn encode(img: &RgbImage) -> Vec<u8> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).unwrap();
    buf.into_inner()
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/goldens")
}

/// Renders every case and checks it against the reference rasterizer and the
/// stored PNG bytes; returns the names of mismatching cases.
pub fn check_all(update: bool) -> Vec<String> {
    let dir = golden_dir();
    let mut bad = Vec::new();
    for c in &cases() {
        let img = render_skeleton(&c.joints, &c.topo, &c.style, c.size).expect("valid case");
        let bytes = encode(&img);
        let path = dir.join(format!("{}.png", c.name));
        if update {
            std::fs::write(&path, &bytes).expect("writable golden dir");
        }
        let stored = std::fs::read(&path).unwrap_or_default();
        let decoded_ok = image::load_from_memory(&stored).is_ok_and(|g| g.to_rgb8() == img);
        if img != reference(c) || bytes != stored || !decoded_ok {
            bad.push(c.name.to_string());
        }
    }
    bad
}
