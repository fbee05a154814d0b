//! Command-line front end: every subcommand reads a manifest, processes the
//! selected clips in parallel, writes artifacts under `--out/<clip_id>/` and
//! prints one JSON summary line per clip.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "vaprompt", version, about = "Build, rectify and evaluate rendered skeleton action prompts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Line-delimited clip manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; artifacts go under <out>/<clip_id>/.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub settings: SettingsArgs,
    /// Only these clips (comma-separated or repeated).
    #[arg(long, value_delimiter = ',')]
    pub clips: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SettingsArgs {
    /// TOML file overriding built-in defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Config override, e.g. --set filter.median_threshold=6.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render gripper skeleton prompts from state logs and cameras.
    RenderRobot(CommonArgs),
    /// Build hand tracklets from detections and render hand prompts.
    TrackHands(CommonArgs),
    /// Rectify gripper prompts with per-frame homographies from correspondences.
    Rectify(CommonArgs),
    /// Score episodes by correspondence discrepancy and mark bad ones excluded.
    FilterEpisodes(CommonArgs),
    /// Sample training windows biased toward gripper open/close events.
    SampleClips(CommonArgs),
    /// Compare generated clips against the manifest's videos.
    Evaluate(EvaluateArgs),
    /// Write a synthetic scene with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Generated videos: <gen>/<clip_id>/frames/ or <gen>/<clip_id>/ holding PNG frames.
    #[arg(long)]
    pub gen: PathBuf,
    /// Ground-truth masks: <root>/<clip_id>/ PNGs or <root>/<clip_id>.jsonl run-length records.
    #[arg(long)]
    pub gt_masks: Option<PathBuf>,
    /// Generated-video masks, laid out like --gt-masks.
    #[arg(long)]
    pub gen_masks: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub settings: SettingsArgs,
}

/// Runs a parsed command; the returned code is nonzero when any clip failed.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    commands::dispatch(cli.command, &mut std::io::stdout().lock())
}
