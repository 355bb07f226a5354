//! Pipeline configuration and its flat `key = value` text form.
//!
//! The text form lists every key, so a snapshot written by
//! [`PdcConfig::to_config_string`] reproduces a run exactly when parsed back.

use std::fmt;
use std::str::FromStr;

use crate::depth::DEFAULT_MAX_DEPTH;
use crate::error::{PdcError, Result};
use crate::filter::{BilateralParams, GaussianParams};
use crate::morphology::Kernel;
use crate::spgraph::MatchParams;
use crate::superpixel::SegmentationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlurKind {
    None,
    Gaussian,
    #[default]
    Bilateral,
}

impl fmt::Display for BlurKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlurKind::None => "none",
            BlurKind::Gaussian => "gaussian",
            BlurKind::Bilateral => "bilateral",
        })
    }
}

impl FromStr for BlurKind {
    type Err = PdcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(BlurKind::None),
            "gaussian" => Ok(BlurKind::Gaussian),
            "bilateral" => Ok(BlurKind::Bilateral),
            other => Err(PdcError::InvalidConfig(format!("unknown blur {other:?}"))),
        }
    }
}

/// Structuring elements of the individual morphology stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernels {
    /// Sparsity reduction right after inversion.
    pub initial_dilate: Kernel,
    pub set_close: Kernel,
    pub set_dilate: Kernel,
    /// Final hole filling over the whole frame.
    pub fill_remaining: Kernel,
}

impl Default for Kernels {
    fn default() -> Self {
        Self {
            initial_dilate: Kernel::diamond(5),
            set_close: Kernel::full(5),
            set_dilate: Kernel::full(5),
            fill_remaining: Kernel::full(9),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdcConfig {
    pub max_depth: f64,
    pub segmentation: SegmentationParams,
    pub matching: MatchParams,
    pub kernels: Kernels,
    /// When false every region is completed on its own.
    pub use_superpixel_sets: bool,
    pub extrapolate_top: bool,
    pub blur: BlurKind,
    pub gaussian: GaussianParams,
    pub bilateral: BilateralParams,
    pub fill_remaining_iterations: usize,
}

impl Default for PdcConfig {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
            segmentation: SegmentationParams::default(),
            matching: MatchParams::default(),
            kernels: Kernels::default(),
            use_superpixel_sets: true,
            extrapolate_top: true,
            blur: BlurKind::default(),
            gaussian: GaussianParams::default(),
            bilateral: BilateralParams::default(),
            fill_remaining_iterations: 8,
        }
    }
}

/// Every recognized key, in snapshot order.
pub const CONFIG_KEYS: &[&str] = &[
    "max_depth",
    "superpixels",
    "compactness",
    "slic_iterations",
    "min_region_size",
    "tau",
    "alpha",
    "set_size",
    "cost_mode",
    "initial_dilate_kernel",
    "set_close_kernel",
    "set_dilate_kernel",
    "fill_remaining_kernel",
    "fill_remaining_iterations",
    "use_superpixel_sets",
    "extrapolate_top",
    "blur",
    "gaussian_size",
    "gaussian_sigma",
    "bilateral_size",
    "bilateral_sigma_range",
    "bilateral_sigma_space",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| PdcError::InvalidConfig(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(PdcError::InvalidConfig(format!("bad boolean {value:?} for {key}"))),
    }
}

impl PdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_depth.is_finite() && self.max_depth > 0.0) {
            return Err(PdcError::InvalidConfig("max_depth must be > 0".into()));
        }
        if self.fill_remaining_iterations == 0 {
            return Err(PdcError::InvalidConfig(
                "fill_remaining_iterations must be >= 1".into(),
            ));
        }
        self.segmentation.validate()?;
        self.matching.validate()?;
        self.gaussian.validate()?;
        self.bilateral.validate()
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "max_depth" => self.max_depth = parse(key, value)?,
            "superpixels" => self.segmentation.superpixels = parse(key, value)?,
            "compactness" => self.segmentation.compactness = parse(key, value)?,
            "slic_iterations" => self.segmentation.iterations = parse(key, value)?,
            "min_region_size" => {
                self.segmentation.min_region_size = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "tau" => self.matching.tau = parse(key, value)?,
            "alpha" => self.matching.alpha = parse(key, value)?,
            "set_size" => self.matching.set_size = parse(key, value)?,
            "cost_mode" => self.matching.cost_mode = value.parse()?,
            "initial_dilate_kernel" => self.kernels.initial_dilate = value.parse()?,
            "set_close_kernel" => self.kernels.set_close = value.parse()?,
            "set_dilate_kernel" => self.kernels.set_dilate = value.parse()?,
            "fill_remaining_kernel" => self.kernels.fill_remaining = value.parse()?,
            "fill_remaining_iterations" => self.fill_remaining_iterations = parse(key, value)?,
            "use_superpixel_sets" => self.use_superpixel_sets = parse_bool(key, value)?,
            "extrapolate_top" => self.extrapolate_top = parse_bool(key, value)?,
            "blur" => self.blur = value.parse()?,
            "gaussian_size" => self.gaussian.size = parse(key, value)?,
            "gaussian_sigma" => self.gaussian.sigma = parse(key, value)?,
            "bilateral_size" => self.bilateral.size = parse(key, value)?,
            "bilateral_sigma_range" => self.bilateral.sigma_range = parse(key, value)?,
            "bilateral_sigma_space" => self.bilateral.sigma_space = parse(key, value)?,
            other => return Err(PdcError::InvalidConfig(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Text value of one key.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "max_depth" => self.max_depth.to_string(),
            "superpixels" => self.segmentation.superpixels.to_string(),
            "compactness" => self.segmentation.compactness.to_string(),
            "slic_iterations" => self.segmentation.iterations.to_string(),
            "min_region_size" => self
                .segmentation
                .min_region_size
                .map_or_else(|| "auto".to_string(), |v| v.to_string()),
            "tau" => self.matching.tau.to_string(),
            "alpha" => self.matching.alpha.to_string(),
            "set_size" => self.matching.set_size.to_string(),
            "cost_mode" => self.matching.cost_mode.to_string(),
            "initial_dilate_kernel" => self.kernels.initial_dilate.to_string(),
            "set_close_kernel" => self.kernels.set_close.to_string(),
            "set_dilate_kernel" => self.kernels.set_dilate.to_string(),
            "fill_remaining_kernel" => self.kernels.fill_remaining.to_string(),
            "fill_remaining_iterations" => self.fill_remaining_iterations.to_string(),
            "use_superpixel_sets" => self.use_superpixel_sets.to_string(),
            "extrapolate_top" => self.extrapolate_top.to_string(),
            "blur" => self.blur.to_string(),
            "gaussian_size" => self.gaussian.size.to_string(),
            "gaussian_sigma" => self.gaussian.sigma.to_string(),
            "bilateral_size" => self.bilateral.size.to_string(),
            "bilateral_sigma_range" => self.bilateral.sigma_range.to_string(),
            "bilateral_sigma_space" => self.bilateral.sigma_space.to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PdcError::InvalidConfig(format!("line {}: expected key = value", n + 1))
            })?;
            self.set(key, value).map_err(|e| match e {
                PdcError::InvalidConfig(msg) => {
                    PdcError::InvalidConfig(format!("line {}: {msg}", n + 1))
                }
                other => other,
            })?;
        }
        Ok(())
    }

    /// Defaults overridden by `text`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_config_str(text)?;
        Ok(cfg)
    }

    /// Every key with its current value, one `key = value` per line.
    pub fn to_config_string(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("listed key")))
            .collect()
    }
}
