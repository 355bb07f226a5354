use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use pdc_core::{BlurKind, CostMode, PdcConfig};

/// Flags shared by every command. Precedence: built-in defaults, then the
/// `--config` file, then the typed flags, then `--set` pairs in order.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonOpts {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "none|gaussian|bilateral")]
    pub blur: Option<BlurKind>,
    /// Skip copying the topmost depth of each column upward.
    #[arg(long, global = true)]
    pub no_extrapolate: bool,
    /// Complete every superpixel on its own.
    #[arg(long, global = true)]
    pub no_sets: bool,
    #[arg(long, global = true, value_name = "penalize-distance|as-written")]
    pub cost_mode: Option<CostMode>,
    /// Override any config key, e.g. `--set tau=12`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl CommonOpts {
    pub fn resolve_config(&self) -> Result<PdcConfig> {
        let mut cfg = PdcConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_config_str(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        if let Some(blur) = self.blur {
            cfg.blur = blur;
        }
        if self.no_extrapolate {
            cfg.extrapolate_top = false;
        }
        if self.no_sets {
            cfg.use_superpixel_sets = false;
        }
        if let Some(mode) = self.cost_mode {
            cfg.matching.cost_mode = mode;
        }
        for pair in &self.overrides {
            let (k, v) = pair
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            anyhow::ensure!(n >= 1, "--workers must be at least 1");
            b = b.num_threads(n);
        }
        Ok(b.build()?)
    }
}
