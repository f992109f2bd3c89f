//! JSON experiment configurations.
//!
//! Every file is one object tagged by `"command"`. Output names are
//! relative to the `--out` directory.

use std::path::PathBuf;

use gabor_stab::cheeger::CheegerOptions;
use gabor_stab::entire::{BallNormOptions, GrowthClassSpec};
use gabor_stab::grid::{AnalyticSignalSpec, Bump};
use gabor_stab::stability::NoiseSpec;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum ExperimentConfig {
    Gen(GenConfig),
    Gabor(GaborConfig),
    Cheeger(CheegerConfig),
    Entire(EntireConfig),
    Stability(StabilityConfig),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn command(&self) -> &'static str {
        match self {
            Self::Gen(_) => "gen",
            Self::Gabor(_) => "gabor",
            Self::Cheeger(_) => "cheeger",
            Self::Entire(_) => "entire",
            Self::Stability(_) => "stability",
        }
    }
}

/// Uniform grid: sample `k` of axis `a` sits at `origin[a] + k·spacing[a]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub extents: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalConfig {
    Gaussian { dim: usize },
    ShiftedGaussian { bump: Bump },
    TwoBump { first: Bump, second: Bump, sign: f64 },
    /// L²-normalised Hermite function with one order per axis.
    Hermite { orders: Vec<usize> },
    /// Complex `GGR1` grid; its geometry replaces `signal_geometry`.
    File { path: PathBuf },
}

impl SignalConfig {
    pub fn analytic(&self) -> Option<AnalyticSignalSpec> {
        match self {
            Self::Gaussian { dim } => Some(AnalyticSignalSpec::Gaussian { dim: *dim }),
            Self::ShiftedGaussian { bump } => Some(AnalyticSignalSpec::ShiftedGaussian { bump: bump.clone() }),
            Self::TwoBump { first, second, sign } => {
                Some(AnalyticSignalSpec::TwoBump { first: first.clone(), second: second.clone(), sign: *sign })
            }
            _ => None,
        }
    }
}

fn default_signal_output() -> String {
    "signal.ggr".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub signal: SignalConfig,
    pub geometry: GeometryConfig,
    #[serde(default = "default_signal_output")]
    pub output: String,
}

fn default_two() -> f64 {
    2.0
}

fn default_gabor_output() -> String {
    "gabor.ggr".into()
}

fn default_gabor_summary() -> String {
    "gabor.json".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaborConfig {
    pub signal: SignalConfig,
    #[serde(default)]
    pub signal_geometry: Option<GeometryConfig>,
    pub phase: GeometryConfig,
    /// Exponent of the reported modulation norm.
    #[serde(default = "default_two")]
    pub p: f64,
    #[serde(default = "default_gabor_output")]
    pub output: String,
    #[serde(default)]
    pub spectrogram_output: Option<String>,
    #[serde(default = "default_gabor_summary")]
    pub summary: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightConfig {
    /// `|Gf|^p` on the phase grid.
    Spectrogram { signal: SignalConfig, signal_geometry: Option<GeometryConfig>, phase: GeometryConfig },
    /// `e^{−π|z|²/2}` sampled on the grid.
    Gaussian { geometry: GeometryConfig },
    /// Real `GGR1` grid used as the weight itself.
    File { path: PathBuf },
}

fn default_one() -> f64 {
    1.0
}

fn default_cheeger_output() -> String {
    "cheeger.json".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheegerConfig {
    pub weight: WeightConfig,
    /// Power applied to spectrogram weights.
    #[serde(default = "default_one")]
    pub p: f64,
    /// Active cells are those above this fraction of the maximum; all
    /// positive cells when absent.
    #[serde(default)]
    pub mask_threshold: Option<f64>,
    /// Average the weight over this many blocks per axis first.
    #[serde(default)]
    pub coarsen: Option<Vec<usize>>,
    #[serde(default)]
    pub options: CheegerOptions,
    #[serde(default = "default_cheeger_output")]
    pub output: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionConfig {
    /// Coefficients `[re, im]` in increasing degree.
    Polynomial { coefficients: Vec<[f64; 2]> },
    /// `e^{c z²}` with `c = [re, im]`.
    GaussianExponential { c: [f64; 2] },
    /// Entire lift of a transformed signal.
    Lifted { signal: SignalConfig, signal_geometry: Option<GeometryConfig>, phase: GeometryConfig },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RadiiConfig {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        log: bool,
    },
}

impl RadiiConfig {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { start, stop, count, log } => {
                let n = (*count).max(1);
                (0..n)
                    .map(|k| {
                        let s = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                        if *log {
                            start * (stop / start).powf(s)
                        } else {
                            start + (stop - start) * s
                        }
                    })
                    .collect()
            }
        }
    }
}

fn default_ballnorm_output() -> String {
    "ballnorms.csv".into()
}

fn default_entire_summary() -> String {
    "entire.json".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntireConfig {
    pub function: FunctionConfig,
    #[serde(default = "default_one")]
    pub p: f64,
    pub radii: RadiiConfig,
    #[serde(default)]
    pub class: Option<GrowthClassSpec>,
    #[serde(default)]
    pub options: BallNormOptions,
    #[serde(default = "default_ballnorm_output")]
    pub output: String,
    #[serde(default = "default_entire_summary")]
    pub summary: String,
}

/// Split of phase space at `coordinate[axis] = cut`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalvesConfig {
    pub axis: usize,
    pub cut: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub f: SignalConfig,
    pub g: SignalConfig,
}

/// Instability pairs `f_±` over a list of separations.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d: usize,
    pub t: Vec<f64>,
}

fn default_mask_threshold() -> f64 {
    1e-9
}

fn default_stability_output() -> String {
    "stability.json".into()
}

fn default_sweep_csv() -> String {
    "sweep.csv".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub p: f64,
    pub q: f64,
    pub signal_geometry: GeometryConfig,
    pub phase: GeometryConfig,
    #[serde(default = "default_mask_threshold")]
    pub mask_threshold: f64,
    #[serde(default)]
    pub cheeger: CheegerOptions,
    #[serde(default)]
    pub oracle_blocks: Option<Vec<usize>>,
    #[serde(default)]
    pub partition: Option<HalvesConfig>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub pair: Option<PairConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_stability_output")]
    pub output: String,
    #[serde(default = "default_sweep_csv")]
    pub csv: String,
}
