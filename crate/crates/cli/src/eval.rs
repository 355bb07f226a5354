use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pdc_core::io::{encode_rgb_png, read_depth_png};
use pdc_core::metrics::error_map;
use pdc_core::{evaluate, EvalAggregate, EvalResult};
use rayon::prelude::*;

use crate::files::{png_names, write_atomic};

#[derive(Debug, clap::Args)]
pub struct Args {
    pub pred: PathBuf,
    pub gt: PathBuf,
    /// Table destination (default: `<PRED>/eval.tsv`).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write a color error map per frame into this directory.
    #[arg(long, value_name = "DIR")]
    pub error_maps: Option<PathBuf>,
    /// Error at which the error-map color saturates.
    #[arg(long, default_value_t = 100.0, value_name = "MM")]
    pub threshold_mm: f64,
}

pub const HEADER: &str = "frame\tstatus\trmse_mm\tmae_mm\tevaluated_pixels\tinvalid_prediction_pixels";

pub fn format_row(name: &str, status: &str, r: &EvalResult) -> String {
    format!(
        "{name}\t{status}\t{:.3}\t{:.3}\t{}\t{}",
        r.rmse_mm, r.mae_mm, r.evaluated_pixels, r.invalid_prediction_pixels
    )
}

/// Evaluates every ground-truth frame that has a prediction of the same
/// name. Missing predictions are reported as skipped rows.
pub fn evaluate_dirs(
    pred: &Path,
    gt: &Path,
    error_maps: Option<(&Path, f64)>,
) -> Result<Vec<(String, Option<EvalResult>)>> {
    let gt_names = png_names(gt)?;
    let pred_names = png_names(pred)?;
    if gt_names.intersection(&pred_names).next().is_none() {
        bail!("no frame names shared by {} and {}", pred.display(), gt.display());
    }
    let frames: Vec<String> = gt_names.into_iter().collect();
    frames
        .par_iter()
        .map(|n| {
            if !pred_names.contains(n) {
                log::warn!("{n}: no prediction, skipped");
                return Ok((n.clone(), None));
            }
            let p = read_depth_png(pred.join(n))?;
            let g = read_depth_png(gt.join(n))?;
            let r = evaluate(&p, &g).with_context(|| format!("evaluating {n}"))?;
            if let Some((dir, threshold)) = error_maps {
                write_atomic(&dir.join(n), &encode_rgb_png(&error_map(&p, &g, threshold)?)?)?;
            }
            Ok((n.clone(), Some(r)))
        })
        .collect()
}

pub fn table(rows: &[(String, Option<EvalResult>)]) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    let mut agg = EvalAggregate::default();
    for (name, r) in rows {
        match r {
            Some(r) => {
                agg.push(r);
                writeln!(out, "{}", format_row(name, "ok", r)).unwrap();
            }
            None => writeln!(out, "{name}\tskipped\t-\t-\t-\t-").unwrap(),
        }
    }
    if let Some(mean) = agg.mean() {
        writeln!(out, "{}", format_row("TOTAL", &format!("frames={}", agg.frames()), &mean)).unwrap();
    }
    out
}

pub fn run(args: &Args) -> Result<()> {
    let maps = args.error_maps.as_deref().map(|d| (d, args.threshold_mm));
    let rows = evaluate_dirs(&args.pred, &args.gt, maps)?;
    let text = table(&rows);
    print!("{text}");
    let out = args.out.clone().unwrap_or_else(|| args.pred.join("eval.tsv"));
    write_atomic(&out, text.as_bytes())
}
