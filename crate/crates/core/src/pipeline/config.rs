//! Pipeline configuration file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boxfit::FitConfig;
use crate::emd::{InhibitionKernel, SearchConfig};
use crate::error::{Error, Result};
use crate::eval::{IouThreshold, View};
use crate::fusion::{ClusterConfig, FusionConfig};
use crate::preprocess::{BevConfig, GroundConfig};

/// Where frames come from. Exactly one source must be given for `detect`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Directory written by `synth` (scans, poses, labels).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kitti: Option<KittiInput>,
}

/// One KITTI tracking sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KittiInput {
    /// Directory of `NNNNNN.bin` scans.
    pub velodyne: PathBuf,
    /// Oxts file, one record per frame.
    pub oxts: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calib: Option<PathBuf>,
    #[serde(default = "default_cadence")]
    pub cadence_hz: f64,
}

fn default_cadence() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProposalConfig {
    /// Dilation of the cluster footprint, in cells.
    pub expansion: usize,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self { expansion: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub views: Vec<View>,
    pub iou_threshold: IouThreshold,
    /// Upper bound of the last closed distance bin; bins are 10 m wide.
    pub max_distance: f64,
    /// `eval` exits with a threshold failure when the first view falls below
    /// these.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_recall: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            views: vec![View::Bev, View::ThreeD, View::Image],
            iou_threshold: IouThreshold::default(),
            max_distance: 60.0,
            min_precision: None,
            min_recall: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuntimeConfig {
    /// Frames replayed through the low-pass filter before each comparison.
    pub lowpass_window: usize,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Full-disc matching at every occupied cell.
    pub exhaustive: bool,
    /// Write a CSV and PPM of each fused motion field.
    pub export_fields: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            lowpass_window: 4,
            threads: 0,
            exhaustive: false,
            export_fields: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub output: PathBuf,
    pub bev: BevConfig,
    pub ground: GroundConfig,
    pub search: SearchConfig,
    pub inhibition: InhibitionKernel,
    pub fusion: FusionConfig,
    pub cluster: ClusterConfig,
    pub proposals: ProposalConfig,
    pub fit: FitConfig,
    pub eval: EvalConfig,
    pub runtime: RuntimeConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Config(format!("line {line}: {}", e.message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config serializes")
    }

    /// SHA-256 of [`PipelineConfig::to_toml`] with `output` cleared, hex
    /// encoded. Where results are written does not change them.
    pub fn hash(&self) -> String {
        let canonical = PipelineConfig {
            output: PathBuf::new(),
            ..self.clone()
        };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        self.bev.validate()?;
        self.ground.validate()?;
        self.search.validate()?;
        self.inhibition.validate()?;
        self.fusion.validate()?;
        self.cluster.validate()?;
        self.fit.validate()?;
        if self.runtime.lowpass_window < 1 {
            return Err(Error::Config("lowpass_window must be at least 1".into()));
        }
        if self.eval.views.is_empty() {
            return Err(Error::Config("eval.views must not be empty".into()));
        }
        let t = match self.eval.iou_threshold {
            IouThreshold::Uniform(t) => vec![t],
            IouThreshold::Classwise { car, other } => vec![car, other],
        };
        if t.iter().any(|v| !(0.0..=1.0).contains(v) || *v == 0.0) {
            return Err(Error::Config("IoU thresholds must be in (0, 1]".into()));
        }
        if self.input.sequence.is_some() && self.input.kitti.is_some() {
            return Err(Error::Config("give either input.sequence or input.kitti, not both".into()));
        }
        Ok(())
    }
}

/// Parses `a..b` (inclusive), `a..` (to `last`) or a single frame `a`.
pub fn parse_frame_range(text: &str, last: usize) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::Config(format!("frame range {text:?}: expected `a..b`, `a..` or `a`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (a, b) = match text.split_once("..") {
        Some((a, "")) => (num(a)?, last),
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let a = num(text)?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}
