use serde::{Deserialize, Serialize};

use super::{SamplingParams, SynthScene};
use crate::metrics::MetricsConfig;
use crate::rectify::{FilterParams, RectifyParams};
use crate::skeleton::{GripperTemplate, RenderStyle};
use crate::track::HoiConfig;

/// Every tunable of every command. Missing fields take their defaults, so a
/// partial file only overrides what it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seeds RANSAC, clip sampling and the synthetic generator.
    pub seed: u64,
    pub render: RenderStyle,
    pub gripper: GripperTemplate,
    pub hoi: HoiConfig,
    pub rectify: RectifyParams,
    pub filter: FilterParams,
    pub sampling: SamplingParams,
    pub metrics: MetricsConfig,
    pub synth: SynthScene,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            render: RenderStyle::default(),
            gripper: GripperTemplate::default(),
            hoi: HoiConfig::default(),
            rectify: RectifyParams::default(),
            filter: FilterParams::default(),
            sampling: SamplingParams::default(),
            metrics: MetricsConfig::default(),
            synth: SynthScene::default(),
        }
    }
}

impl PipelineConfig {
    /// Copy of the config with the top-level seed pushed into every seeded stage.
    pub fn seeded(&self) -> Self {
        let mut c = self.clone();
        c.rectify.ransac.seed = c.seed;
        c.synth.seed = c.seed;
        c
    }
}
