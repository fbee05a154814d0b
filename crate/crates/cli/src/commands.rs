use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use vaprompt_core::metrics::{aggregate, evaluate_clip_pair, AggregateReport, MaskTrack, MetricsReport, VideoClip};
use vaprompt_core::pipeline::{
    probe_frames, read_camera, read_correspondences, read_detections, read_frames, read_masks, read_states,
    robot_prompt_joints, sample_clips, synth_generate, synth_write, write_frames, write_jsonl, EpisodeRecord,
    HandRecord, Manifest, ManifestEntry, PipelineConfig, PipelineError, RectifiedRecord, TrackRecord,
};
use vaprompt_core::rectify::{filter_episode, filter_episodes, rectify_episode, score_episode, FrameStatus};
use vaprompt_core::skeleton::{draw_skeleton, gripper_topology, hand_topology, render_clip};
use vaprompt_core::track::{run_hoi_pipeline, Handedness};
use vaprompt_core::SCHEMA_VERSION;

use crate::{config, CommonArgs, Command, EvaluateArgs, SettingsArgs, SynthArgs};

/// Why one clip failed: the manifest field involved, if any, and what was expected.
#[derive(Debug, Clone)]
pub struct ClipError {
    pub field: Option<String>,
    pub message: String,
}

impl ClipError {
    fn new(field: &str, message: impl ToString) -> Self {
        Self { field: Some(field.to_string()), message: message.to_string() }
    }

    fn general(message: impl ToString) -> Self {
        Self { field: None, message: message.to_string() }
    }
}

trait FieldContext<T> {
    fn field(self, name: &str) -> Result<T, ClipError>;
}

impl<T, E: ToString> FieldContext<T> for Result<T, E> {
    fn field(self, name: &str) -> Result<T, ClipError> {
        self.map_err(|e| ClipError::new(name, e))
    }
}

pub enum Outcome {
    Done(Map<String, Value>),
    Skipped(String),
}

type ClipResult = Result<Outcome, ClipError>;

struct Ctx {
    manifest: Manifest,
    config: PipelineConfig,
    out: PathBuf,
}

impl Ctx {
    fn clip_dir(&self, e: &ManifestEntry) -> PathBuf {
        self.out.join(&e.clip_id)
    }

    fn path(&self, p: &Path) -> PathBuf {
        self.manifest.resolve(p)
    }
}

fn details(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n.max(1));
    }
    b.build().context("starting worker pool")
}

fn prepare_out(out: &Path, config: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.toml"), config::dump(config)?).context("writing config.toml")?;
    Ok(())
}

fn load_settings(s: &SettingsArgs) -> Result<PipelineConfig> {
    config::load(s.config.as_deref(), s.seed, &s.sets)
}

fn summary_line(command: &str, clip_id: &str, result: &ClipResult) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("clip_id".into(), json!(clip_id));
    match result {
        Ok(Outcome::Done(d)) => {
            m.insert("status".into(), json!("ok"));
            m.extend(d.clone());
        }
        Ok(Outcome::Skipped(reason)) => {
            m.insert("status".into(), json!("skipped"));
            m.insert("reason".into(), json!(reason));
        }
        Err(e) => {
            m.insert("status".into(), json!("error"));
            m.insert("field".into(), json!(e.field));
            m.insert("error".into(), json!(e.message));
        }
    }
    Value::Object(m)
}

/// Runs `f` on every selected clip in parallel; prints summaries in manifest order.
fn run_clips<F>(
    command: &str,
    args: &CommonArgs,
    out: &mut dyn Write,
    f: F,
) -> Result<(i32, Ctx, Vec<(String, ClipResult)>)>
where
    F: Fn(&Ctx, &ManifestEntry) -> ClipResult + Sync,
{
    let config = load_settings(&args.settings)?;
    let manifest = Manifest::read(&args.manifest).with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    prepare_out(&args.out, &config)?;
    let ctx = Ctx { manifest, config, out: args.out.clone() };
    let selected = ctx.manifest.select(&args.clips)?;
    let results: Vec<(String, ClipResult)> = pool(args.settings.workers)?.install(|| {
        selected
            .par_iter()
            .map(|e| {
                let r = match ctx.manifest.check_entry(e) {
                    Err((field, expected)) => Err(ClipError::new(&field, format!("expected {expected}"))),
                    Ok(()) => catch_unwind(AssertUnwindSafe(|| f(&ctx, e)))
                        .unwrap_or_else(|_| Err(ClipError::general("internal error while processing clip"))),
                };
                (e.clip_id.clone(), r)
            })
            .collect()
    });
    let mut failed = 0;
    let mut skipped = 0;
    for (id, r) in &results {
        writeln!(out, "{}", summary_line(command, id, r))?;
        match r {
            Err(_) => failed += 1,
            Ok(Outcome::Skipped(_)) => skipped += 1,
            Ok(Outcome::Done(_)) => {}
        }
    }
    let total = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "clips": results.len(),
        "ok": results.len() - failed - skipped,
        "skipped": skipped,
        "failed": failed,
    });
    writeln!(out, "{total}")?;
    Ok((i32::from(failed > 0), ctx, results))
}

fn require<'a>(p: &'a Option<PathBuf>, field: &str) -> Result<&'a Path, Outcome> {
    p.as_deref().ok_or_else(|| Outcome::Skipped(format!("clip has no {field}")))
}

macro_rules! require {
    ($e:expr, $field:literal) => {
        match require(&$e, $field) {
            Ok(p) => p,
            Err(skip) => return Ok(skip),
        }
    };
}

fn write_err(p: &Path) -> impl Fn(PipelineError) -> ClipError + '_ {
    move |e| ClipError::general(format!("writing {}: {e}", p.display()))
}

fn render_robot(ctx: &Ctx, e: &ManifestEntry) -> ClipResult {
    let cam_path = require!(e.camera_file, "camera_file");
    let log_path = require!(e.state_log, "state_log");
    let cam = read_camera(&ctx.path(cam_path)).field("camera_file")?;
    let states = read_states(&ctx.path(log_path)).field("state_log")?;
    let joints = robot_prompt_joints(&states, &cam, &ctx.config.gripper).field("state_log")?;
    let clip = render_clip(&joints, &gripper_topology(), &ctx.config.render, (cam.width, cam.height), e.fps)
        .field("state_log")?;
    let dir = ctx.clip_dir(e).join("prompt");
    write_frames(&dir, &clip.frames).map_err(write_err(&dir))?;
    Ok(Outcome::Done(details(json!({ "frames": clip.frames.len(), "output": "prompt" }))))
}

fn track_hands(ctx: &Ctx, e: &ManifestEntry) -> ClipResult {
    let det_path = require!(e.detection_file, "detection_file");
    let stream = read_detections(&ctx.path(det_path)).field("detection_file")?;
    let (frame_count, (w, h)) = probe_frames(&ctx.path(&e.frame_dir)).field("frame_dir")?;
    if let Some((_, last)) = stream.frame_range() {
        if last >= frame_count {
            return Err(ClipError::new(
                "detection_file",
                format!("frame indices below the clip's {frame_count} frames, found {last}"),
            ));
        }
    }
    let out = run_hoi_pipeline(&stream, &ctx.config.hoi).field("detection_file")?;
    let mut records: Vec<TrackRecord> = (0..frame_count)
        .map(|i| TrackRecord { schema_version: SCHEMA_VERSION, frame_index: i, hands: Vec::new() })
        .collect();
    let mut interpolated = 0;
    for t in &out.tracklets {
        for en in &t.entries {
            interpolated += usize::from(en.interpolated);
            if let Some(rec) = records.get_mut(en.frame_index) {
                rec.hands.push(HandRecord {
                    handedness: t.handedness,
                    tracklet_id: t.id.0,
                    bbox: en.bbox,
                    confidence: en.confidence,
                    interpolated: en.interpolated,
                    joints2d: en.joints2d.clone(),
                });
            }
        }
    }
    let clip_dir = ctx.clip_dir(e);
    let path = clip_dir.join("tracks.jsonl");
    write_jsonl(&path, &records).map_err(write_err(&path))?;

    let topo = hand_topology();
    let style = ctx.config.render;
    let left = out.joint_sequence(Handedness::Left, frame_count);
    let right = out.joint_sequence(Handedness::Right, frame_count);
    let frames = left
        .par_iter()
        .zip(&right)
        .map(|(l, r)| {
            let mut img = RgbImage::from_pixel(w, h, Rgb(style.background));
            draw_skeleton(&mut img, l, &topo, &style)?;
            draw_skeleton(&mut img, r, &topo, &style)?;
            Ok(img)
        })
        .collect::<Result<Vec<_>, vaprompt_core::skeleton::SkeletonError>>()
        .field("detection_file")?;
    let dir = clip_dir.join("prompt");
    write_frames(&dir, &frames).map_err(write_err(&dir))?;
    let frames_for = |hand| out.hand(hand).map_or(0, |t| t.len());
    Ok(Outcome::Done(details(json!({
        "tracklets": out.tracklets.len(),
        "left_frames": frames_for(Handedness::Left),
        "right_frames": frames_for(Handedness::Right),
        "interpolated": interpolated,
    }))))
}

fn rectify(ctx: &Ctx, e: &ManifestEntry) -> ClipResult {
    let cam_path = require!(e.camera_file, "camera_file");
    let log_path = require!(e.state_log, "state_log");
    let corr_path = require!(e.correspondence_file, "correspondence_file");
    let cam = read_camera(&ctx.path(cam_path)).field("camera_file")?;
    let states = read_states(&ctx.path(log_path)).field("state_log")?;
    let corr = read_correspondences(&ctx.path(corr_path)).field("correspondence_file")?;
    let joints = robot_prompt_joints(&states, &cam, &ctx.config.gripper).field("state_log")?;
    let result = rectify_episode(&joints, &corr, &ctx.config.rectify).field("correspondence_file")?;
    let records: Vec<RectifiedRecord> = result
        .frames
        .iter()
        .map(|f| RectifiedRecord {
            schema_version: SCHEMA_VERSION,
            frame_index: f.frame_index,
            homography: f.homography.to_row_major(),
            status: f.status,
            inlier_ratio: f.inlier_ratio,
            joints2d: f.joints.clone(),
        })
        .collect();
    let clip_dir = ctx.clip_dir(e);
    let path = clip_dir.join("rectified.jsonl");
    write_jsonl(&path, &records).map_err(write_err(&path))?;
    let rectified: Vec<_> = result.frames.iter().map(|f| f.joints.clone()).collect();
    let clip = render_clip(&rectified, &gripper_topology(), &ctx.config.render, (cam.width, cam.height), e.fps)
        .field("correspondence_file")?;
    let dir = clip_dir.join("prompt_rectified");
    write_frames(&dir, &clip.frames).map_err(write_err(&dir))?;
    let count = |s| result.frames.iter().filter(|f| f.status == s).count();
    let ratios: Vec<f64> = result.frames.iter().filter_map(|f| f.inlier_ratio).collect();
    let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    Ok(Outcome::Done(details(json!({
        "frames": result.frames.len(),
        "estimated": count(FrameStatus::Estimated),
        "carried_over": count(FrameStatus::CarriedOver),
        "no_consensus": count(FrameStatus::NoConsensus),
        "mean_inlier_ratio": mean_ratio,
    }))))
}

fn filter_one(ctx: &Ctx, e: &ManifestEntry) -> ClipResult {
    let corr_path = require!(e.correspondence_file, "correspondence_file");
    let corr = read_correspondences(&ctx.path(corr_path)).field("correspondence_file")?;
    let score = score_episode(&corr).field("correspondence_file")?;
    let d = filter_episode(&score, &ctx.config.filter);
    let rec = EpisodeRecord {
        schema_version: SCHEMA_VERSION,
        clip_id: e.clip_id.clone(),
        keep: d.keep,
        reason: d.reason,
        episode_median: score.episode_median,
        bad_fraction: d.bad_fraction,
        frames_evaluated: score.frames_evaluated,
        frames_skipped: score.frames_skipped,
    };
    let path = ctx.clip_dir(e).join("episode.jsonl");
    write_jsonl(&path, std::slice::from_ref(&rec)).map_err(write_err(&path))?;
    Ok(Outcome::Done(details(serde_json::to_value(&rec).map_err(ClipError::general)?)))
}

/// FNV-1a, so each clip gets its own deterministic sampling stream.
fn clip_hash(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn sample_one(ctx: &Ctx, e: &ManifestEntry) -> ClipResult {
    let log_path = require!(e.state_log, "state_log");
    let states = read_states(&ctx.path(log_path)).field("state_log")?;
    let openness: Vec<f64> = states.iter().map(|s| s.openness).collect();
    let params = ctx.config.sampling;
    let windows = sample_clips(&openness, &e.clip_id, e.fps, &params, ctx.config.seed ^ clip_hash(&e.clip_id))
        .field("state_log")?;
    let path = ctx.clip_dir(e).join("windows.jsonl");
    write_jsonl(&path, &windows).map_err(write_err(&path))?;
    let events = vaprompt_core::pipeline::gripper_events(&openness, params.openness_delta).len();
    Ok(Outcome::Done(details(json!({ "windows": windows.len(), "events": events }))))
}

fn mask_source(root: &Path, clip_id: &str) -> Option<PathBuf> {
    let dir = root.join(clip_id);
    if dir.is_dir() {
        return Some(dir);
    }
    let file = root.join(format!("{clip_id}.jsonl"));
    file.is_file().then_some(file)
}

fn load_masks(src: &Path, field: &str) -> Result<MaskTrack, ClipError> {
    MaskTrack::new(read_masks(src).field(field)?).field(field)
}

/// Both tracks, or none when neither root holds masks for the clip.
fn clip_masks(args: &EvaluateArgs, clip_id: &str) -> Result<Option<(MaskTrack, MaskTrack)>, ClipError> {
    let (Some(gen_root), Some(gt_root)) = (&args.gen_masks, &args.gt_masks) else { return Ok(None) };
    match (mask_source(gen_root, clip_id), mask_source(gt_root, clip_id)) {
        (None, None) => Ok(None),
        (Some(g), Some(t)) => Ok(Some((load_masks(&g, "gen_masks")?, load_masks(&t, "gt_masks")?))),
        (g, _) => {
            let (field, root) = if g.is_none() { ("gen_masks", gen_root) } else { ("gt_masks", gt_root) };
            Err(ClipError::new(
                field,
                format!("expected masks at {0}/{clip_id}/ or {0}/{clip_id}.jsonl", root.display()),
            ))
        }
    }
}

fn evaluate_one(ctx: &Ctx, e: &ManifestEntry, args: &EvaluateArgs) -> ClipResult {
    let gt_frames = read_frames(&ctx.path(&e.frame_dir)).field("frame_dir")?;
    let gen_root = args.gen.join(&e.clip_id);
    let gen_dir = if gen_root.join("frames").is_dir() { gen_root.join("frames") } else { gen_root };
    let gen_frames = read_frames(&gen_dir).field("gen")?;
    let gt = VideoClip::new(gt_frames, e.fps).field("frame_dir")?;
    let gen = VideoClip::new(gen_frames, e.fps).field("gen")?;
    let masks = clip_masks(args, &e.clip_id)?;
    let report = evaluate_clip_pair(&gen, &gt, masks.as_ref().map(|(a, b)| (a, b)), &ctx.config.metrics).field("gen")?;
    let path = ctx.clip_dir(e).join("metrics.json");
    write_json(&path, &report).map_err(ClipError::general)?;
    Ok(Outcome::Done(details(json!({ "report": report }))))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn print_table(out: &mut dyn Write, rows: &[(String, MetricsReport)], agg: &AggregateReport) -> Result<()> {
    writeln!(out, "{:<20} {:>9} {:>8} {:>8} {:>8} {:>8} {:>8}", "clip", "psnr", "ssim", "st_iou", "mask", "bound", "j&f")?;
    for (id, r) in rows {
        let m = r.masks.as_ref();
        writeln!(
            out,
            "{:<20} {:>9.3} {:>8.4} {:>8.4} {:>8} {:>8} {:>8}",
            id,
            r.psnr,
            r.ssim,
            r.st_iou,
            fmt_opt(m.map(|m| m.mask_iou)),
            fmt_opt(m.map(|m| m.boundary_iou)),
            fmt_opt(m.map(|m| m.jf)),
        )?;
    }
    writeln!(
        out,
        "{:<20} {:>9} {:>8} {:>8} {:>8} {:>8} {:>8}",
        format!("mean ({})", agg.clips),
        agg.psnr.map_or_else(|| "-".into(), |x| format!("{x:.3}")),
        fmt_opt(agg.ssim),
        fmt_opt(agg.st_iou),
        fmt_opt(agg.mask_iou),
        fmt_opt(agg.boundary_iou),
        fmt_opt(agg.jf),
    )?;
    Ok(())
}

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::RenderRobot(a) => Ok(run_clips("render-robot", &a, out, render_robot)?.0),
        Command::TrackHands(a) => Ok(run_clips("track-hands", &a, out, track_hands)?.0),
        Command::Rectify(a) => Ok(run_clips("rectify", &a, out, rectify)?.0),
        Command::FilterEpisodes(a) => {
            filter_episodes(&[], &load_settings(&a.settings)?.filter)?;
            let (code, ctx, results) = run_clips("filter-episodes", &a, out, filter_one)?;
            let kept: Vec<Value> = results
                .iter()
                .filter_map(|(_, r)| match r {
                    Ok(Outcome::Done(d)) => Some(Value::Object(d.clone())),
                    _ => None,
                })
                .collect();
            write_jsonl(&ctx.out.join("episodes.jsonl"), &kept)?;
            Ok(code)
        }
        Command::SampleClips(a) => Ok(run_clips("sample-clips", &a, out, sample_one)?.0),
        Command::Evaluate(a) => {
            let (code, ctx, results) = run_clips("evaluate", &a.common, out, |ctx, e| evaluate_one(ctx, e, &a))?;
            let mut rows = Vec::new();
            for (id, r) in results {
                if let Ok(Outcome::Done(mut d)) = r {
                    let report: MetricsReport = serde_json::from_value(d.remove("report").unwrap_or_default())?;
                    rows.push((id, report));
                }
            }
            let reports: Vec<MetricsReport> = rows.iter().map(|(_, r)| r.clone()).collect();
            let agg = aggregate(&reports);
            write_json(&ctx.out.join("metrics_summary.json"), &agg)?;
            print_table(out, &rows, &agg)?;
            Ok(code)
        }
        Command::Synth(a) => synth(&a, out),
    }
}

fn synth(args: &SynthArgs, out: &mut dyn Write) -> Result<i32> {
    let config = load_settings(&args.settings)?;
    prepare_out(&args.out, &config)?;
    let scene = &config.synth;
    let output = pool(args.settings.workers)?.install(|| synth_generate(scene))?;
    let manifest = synth_write(scene, &output, &args.out)?;
    for c in &manifest.clips {
        let line = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "synth",
            "clip_id": c.clip_id,
            "status": "ok",
            "frames": scene.frames,
        });
        writeln!(out, "{line}")?;
    }
    Ok(0)
}
