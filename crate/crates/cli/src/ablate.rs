use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use pdc_core::io::{read_depth_png, read_rgb_png};
use pdc_core::{evaluate, run_pdc, BlurKind, EvalAggregate, EvalResult, PdcConfig};
use rayon::prelude::*;

use crate::files::{png_names, write_atomic};
use crate::opts::CommonOpts;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory holding `rgb/` and `sparse/`.
    pub dataset: PathBuf,
    pub gt: PathBuf,
    /// Output directory (default: `<DATASET>/ablation`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub const HEADER: &str =
    "bilateral_blur\tgaussian_blur\textrapolated\tsuperpixel_set\trmse_mm\tmae_mm\tframes";

/// The swept configurations, derived from `base` by changing only the
/// blur, extrapolation, and superpixel-set switches.
pub fn sweep(base: &PdcConfig) -> Vec<PdcConfig> {
    let mut out = Vec::with_capacity(12);
    for blur in [BlurKind::None, BlurKind::Gaussian, BlurKind::Bilateral] {
        for extrapolate in [true, false] {
            for sets in [true, false] {
                let mut cfg = base.clone();
                cfg.blur = blur;
                cfg.extrapolate_top = extrapolate;
                cfg.use_superpixel_sets = sets;
                out.push(cfg);
            }
        }
    }
    out
}

fn mark(on: bool) -> &'static str {
    if on {
        "x"
    } else {
        "-"
    }
}

fn slug(i: usize, cfg: &PdcConfig) -> String {
    format!(
        "{i:02}_blur-{}_extrapolate-{}_sets-{}",
        cfg.blur,
        if cfg.extrapolate_top { "on" } else { "off" },
        if cfg.use_superpixel_sets { "on" } else { "off" }
    )
}

pub fn run(common: &CommonOpts, args: &Args) -> Result<()> {
    let base = common.resolve_config()?;
    let rgb_dir = args.dataset.join("rgb");
    let sparse_dir = args.dataset.join("sparse");
    let rgb_names = png_names(&rgb_dir)?;
    let gt_names = png_names(&args.gt)?;
    let frames: Vec<String> = png_names(&sparse_dir)?
        .into_iter()
        .filter(|n| rgb_names.contains(n) && gt_names.contains(n))
        .collect();
    if frames.is_empty() {
        bail!(
            "no frame names shared by {}, {} and {}",
            rgb_dir.display(),
            sparse_dir.display(),
            args.gt.display()
        );
    }
    let inputs = frames
        .par_iter()
        .map(|n| {
            Ok((
                read_rgb_png(rgb_dir.join(n))?,
                read_depth_png(sparse_dir.join(n))?,
                read_depth_png(args.gt.join(n))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let out_dir = args.out.clone().unwrap_or_else(|| args.dataset.join("ablation"));
    let mut text = String::new();
    writeln!(text, "{HEADER}").unwrap();
    for (i, cfg) in sweep(&base).iter().enumerate() {
        let results = inputs
            .par_iter()
            .map(|(rgb, sparse, gt)| Ok(evaluate(&run_pdc(rgb, sparse, cfg)?, gt)?))
            .collect::<Result<Vec<EvalResult>>>()?;
        let agg: EvalAggregate = results.iter().collect();
        let mean = agg.mean().expect("at least one frame");
        writeln!(
            text,
            "{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{}",
            mark(cfg.blur == BlurKind::Bilateral),
            mark(cfg.blur == BlurKind::Gaussian),
            mark(cfg.extrapolate_top),
            mark(cfg.use_superpixel_sets),
            mean.rmse_mm,
            mean.mae_mm,
            agg.frames()
        )
        .unwrap();
        write_atomic(
            &out_dir.join("configs").join(format!("{}.cfg", slug(i, cfg))),
            cfg.to_config_string().as_bytes(),
        )?;
        log::info!("configuration {} of 12 done", i + 1);
    }
    print!("{text}");
    write_atomic(&out_dir.join("ablation.tsv"), text.as_bytes())
}
