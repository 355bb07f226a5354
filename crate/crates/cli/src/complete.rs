use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pdc_core::io::{encode_depth_png, encode_rgb_png, read_depth_png, read_rgb_png};
use pdc_core::spgraph::{build_adjacency, build_regions, write_edge_list};
use pdc_core::superpixel::{label_image, segment};
use pdc_core::{run_pdc_with_report, to_gray, PdcConfig, PdcWarning};
use rayon::prelude::*;

use crate::files::{png_names, write_atomic};
use crate::manifest::{FrameRecord, RunManifest};
use crate::opts::CommonOpts;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Color image, or a directory of them.
    pub rgb: PathBuf,
    /// Sparse 16-bit depth PNG, or a directory with matching file names.
    pub sparse: PathBuf,
    /// Output PNG, or an output directory.
    pub out: PathBuf,
    /// Also write the superpixel labeling as a color image (single frame).
    #[arg(long, value_name = "PATH")]
    pub dump_labels: Option<PathBuf>,
    /// Also write the superpixel adjacency graph as TSV (single frame).
    #[arg(long, value_name = "PATH")]
    pub dump_graph: Option<PathBuf>,
}

pub fn run(common: &CommonOpts, args: &Args) -> Result<()> {
    let cfg = common.resolve_config()?;
    if args.rgb.is_dir() {
        if args.dump_labels.is_some() || args.dump_graph.is_some() {
            bail!("--dump-labels and --dump-graph need a single frame");
        }
        run_dir(&cfg, args)
    } else {
        run_single(&cfg, args)
    }
}

struct Completed {
    png: Vec<u8>,
    record: FrameRecord,
}

fn complete_frame(cfg: &PdcConfig, name: String, rgb: &Path, sparse: &Path, out: PathBuf) -> Result<Completed> {
    let img = read_rgb_png(rgb)?;
    let depth = read_depth_png(sparse)?;
    let res = run_pdc_with_report(&img, &depth, cfg)
        .with_context(|| format!("completing {}", sparse.display()))?;
    for w in &res.report.warnings {
        match w {
            PdcWarning::NoValidDepth => log::warn!("{name}: no valid depth in input"),
            PdcWarning::ResidualInvalid { count } => log::warn!("{name}: {count} pixel(s) left invalid"),
        }
    }
    let png = encode_depth_png(&res.depth)?;
    Ok(Completed {
        png,
        record: FrameRecord::new(name, rgb.to_path_buf(), sparse.to_path_buf(), out, res.report),
    })
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn run_single(cfg: &PdcConfig, args: &Args) -> Result<()> {
    let name = args
        .sparse
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let done = complete_frame(cfg, name, &args.rgb, &args.sparse, args.out.clone())?;
    write_atomic(&args.out, &done.png)?;
    if args.dump_labels.is_some() || args.dump_graph.is_some() {
        dump_debug(cfg, args)?;
    }
    RunManifest::new("complete", cfg, vec![done.record]).write(&manifest_path_for(&args.out))?;
    log::info!("wrote {}", args.out.display());
    Ok(())
}

fn dump_debug(cfg: &PdcConfig, args: &Args) -> Result<()> {
    let img = read_rgb_png(&args.rgb)?;
    let lab = segment(&img, &cfg.segmentation)?;
    if let Some(path) = &args.dump_labels {
        write_atomic(path, &encode_rgb_png(&label_image(&lab))?)?;
    }
    if let Some(path) = &args.dump_graph {
        let table = build_regions(&lab, &to_gray(&img))?;
        let mut tsv = Vec::new();
        write_edge_list(&mut tsv, &build_adjacency(&lab), &table, &cfg.matching)?;
        write_atomic(path, &tsv)?;
    }
    Ok(())
}

/// Frames are the sparse file names that also exist in the rgb directory.
/// Nothing is written unless every frame completes.
fn run_dir(cfg: &PdcConfig, args: &Args) -> Result<()> {
    let rgb_names = png_names(&args.rgb)?;
    let frames: Vec<String> = png_names(&args.sparse)?
        .into_iter()
        .filter(|n| {
            let keep = rgb_names.contains(n);
            if !keep {
                log::warn!("{n}: no matching color image, skipped");
            }
            keep
        })
        .collect();
    if frames.is_empty() {
        bail!(
            "no frame names shared by {} and {}",
            args.rgb.display(),
            args.sparse.display()
        );
    }
    let done: Vec<Completed> = frames
        .par_iter()
        .map(|n| {
            complete_frame(
                cfg,
                n.clone(),
                &args.rgb.join(n),
                &args.sparse.join(n),
                args.out.join(n),
            )
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(done.len());
    for d in done {
        write_atomic(&d.record.output, &d.png)?;
        records.push(d.record);
    }
    RunManifest::new("complete", cfg, records).write(&args.out.join("manifest.json"))?;
    log::info!("completed {} frame(s) into {}", frames.len(), args.out.display());
    Ok(())
}
