use std::path::{Path, PathBuf};

use anyhow::Result;
use pdc_core::{PdcConfig, PdcReport, PdcWarning, StageTimings};
use serde::Serialize;

use crate::files::{median, write_atomic};

#[derive(Debug, Serialize)]
pub struct FrameRecord {
    pub name: String,
    pub rgb: PathBuf,
    pub sparse: PathBuf,
    pub output: PathBuf,
    pub timings: StageTimings,
    pub regions: usize,
    pub residual_invalid: usize,
    pub warnings: Vec<PdcWarning>,
}

impl FrameRecord {
    pub fn new(name: String, rgb: PathBuf, sparse: PathBuf, output: PathBuf, report: PdcReport) -> Self {
        Self {
            name,
            rgb,
            sparse,
            output,
            timings: report.timings,
            regions: report.regions,
            residual_invalid: report.residual_invalid,
            warnings: report.warnings,
        }
    }
}

/// What was run and with which effective configuration. `config` is the
/// full `key = value` snapshot and can be fed back through `--config`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: String,
    pub frames: Vec<FrameRecord>,
    pub median_timings: StageTimings,
}

impl RunManifest {
    pub fn new(command: &'static str, cfg: &PdcConfig, frames: Vec<FrameRecord>) -> Self {
        let med = |f: fn(&StageTimings) -> f64| {
            let mut v: Vec<f64> = frames.iter().map(|r| f(&r.timings)).collect();
            median(&mut v)
        };
        let median_timings = StageTimings {
            init_ms: med(|t| t.init_ms),
            cost_map_ms: med(|t| t.cost_map_ms),
            segmentation_ms: med(|t| t.segmentation_ms),
            graph_ms: med(|t| t.graph_ms),
            set_loop_ms: med(|t| t.set_loop_ms),
            refinement_ms: med(|t| t.refinement_ms),
        };
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: cfg.to_config_string(),
            frames,
            median_timings,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(path, &json)
    }
}
