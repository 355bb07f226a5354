//! End-to-end completion: inversion and sparsity reduction, segmentation
//! and neighbor matching, per-set morphological interpolation, and the
//! frame-level refinements.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BlurKind, PdcConfig};
use crate::depth::{to_gray, DepthMap, InvertedDepthMap, RgbImage};
use crate::error::{PdcError, Result};
use crate::filter::{masked_bilateral, masked_gaussian};
use crate::morphology::{close_fill, dilate_fill, median_fill_in_place, Domain, Kernel};
use crate::spgraph::{build_adjacency, build_regions, select_set, SuperpixelSet};
use crate::superpixel::{segment, Labeling};

/// Pixel lists and bounding boxes of every region of a labeling.
#[derive(Debug, Clone)]
pub struct RegionMembers {
    pixels: Vec<Vec<usize>>,
    /// `(x0, y0, x1, y1)`, inclusive.
    bounds: Vec<(usize, usize, usize, usize)>,
}

impl RegionMembers {
    pub fn new(lab: &Labeling) -> Self {
        let w = lab.width();
        let pixels = lab.members();
        let bounds = pixels
            .iter()
            .map(|ps| {
                ps.iter().fold(
                    (usize::MAX, usize::MAX, 0, 0),
                    |(x0, y0, x1, y1), &p| {
                        let (x, y) = (p % w, p / w);
                        (x0.min(x), y0.min(y), x1.max(x), y1.max(y))
                    },
                )
            })
            .collect();
        Self { pixels, bounds }
    }

    pub fn pixels(&self, region: usize) -> &[usize] {
        &self.pixels[region]
    }
}

/// Completed values for the pixels of one center region. A value of `0`
/// means the pixel is still invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPatch {
    pub region: usize,
    pub pixels: Vec<usize>,
    pub values: Vec<f64>,
}

/// Interpolates one superpixel set and returns the center region's values.
///
/// Inside the union of the set's regions: close, dilate, drop dilated values
/// whose source lies in another region, then fill what is left of the center
/// region with the lower median of its valid values.
pub fn complete_set(
    inv: &InvertedDepthMap,
    lab: &Labeling,
    members: &RegionMembers,
    set: &SuperpixelSet,
    cfg: &PdcConfig,
) -> RegionPatch {
    let (w, _) = inv.dims();
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for r in set.regions() {
        let b = members.bounds[r];
        x0 = x0.min(b.0);
        y0 = y0.min(b.1);
        x1 = x1.max(b.2);
        y1 = y1.max(b.3);
    }
    let (lw, lh) = (x1 - x0 + 1, y1 - y0 + 1);
    let to_local = |p: usize| (p / w - y0) * lw + (p % w - x0);
    let to_global = |q: usize| (q / lw + y0) * w + (q % lw + x0);

    let src = inv.as_slice();
    let labels = lab.as_slice();
    let mut values = vec![0.0; lw * lh];
    let mut domain = vec![false; lw * lh];
    for r in set.regions() {
        for &p in members.pixels(r) {
            let q = to_local(p);
            domain[q] = true;
            values[q] = src[p];
        }
    }
    let local = InvertedDepthMap::from_parts(lw, lh, inv.max_depth(), values);

    let closed = close_fill(&local, &cfg.kernels.set_close, Domain::Mask(&domain));
    let (dilated, provenance) = dilate_fill(&closed, &cfg.kernels.set_dilate, Domain::Mask(&domain));
    let mut values = dilated.as_slice().to_vec();
    for (q, v) in values.iter_mut().enumerate() {
        if let Some(s) = provenance.source_index(q) {
            if labels[to_global(s)] != labels[to_global(q)] {
                *v = 0.0;
            }
        }
    }

    let center: Vec<usize> = members.pixels(set.center).iter().map(|&p| to_local(p)).collect();
    median_fill_in_place(&mut values, &center);
    RegionPatch {
        region: set.center,
        pixels: members.pixels(set.center).to_vec(),
        values: center.iter().map(|&q| values[q]).collect(),
    }
}

/// Output map assembled from region patches. Each pixel is written once.
#[derive(Debug, Clone)]
pub struct MaskAccumulator {
    mask: InvertedDepthMap,
    written: Vec<bool>,
}

impl MaskAccumulator {
    pub fn new(width: usize, height: usize, max_depth: f64) -> Self {
        Self {
            mask: InvertedDepthMap::empty(width, height, max_depth),
            written: vec![false; width * height],
        }
    }

    /// Copies `patch` into the mask, skipping pixels that were already
    /// written. Returns the number of pixels skipped.
    pub fn write(&mut self, patch: &RegionPatch) -> usize {
        let mut skipped = 0;
        let out = self.mask.as_mut_slice();
        for (&p, &v) in patch.pixels.iter().zip(&patch.values) {
            if self.written[p] {
                skipped += 1;
                continue;
            }
            self.written[p] = true;
            out[p] = v;
        }
        skipped
    }

    pub fn is_written(&self, idx: usize) -> bool {
        self.written[idx]
    }

    pub fn into_map(self) -> InvertedDepthMap {
        self.mask
    }
}

/// Copies the topmost valid value of each column to every pixel above it.
pub fn extrapolate_top(inv: &InvertedDepthMap) -> InvertedDepthMap {
    let (w, h) = inv.dims();
    let mut out = inv.clone();
    let v = out.as_mut_slice();
    for x in 0..w {
        if let Some(top) = (0..h).find(|&y| v[y * w + x] > 0.0) {
            let value = v[top * w + x];
            for y in 0..top {
                v[y * w + x] = value;
            }
        }
    }
    out
}

/// Repeated full-frame [`dilate_fill`] until no hole is left, no pass makes
/// progress, or `iterations` passes ran.
pub fn fill_remaining(inv: &InvertedDepthMap, kernel: &Kernel, iterations: usize) -> InvertedDepthMap {
    let mut cur = inv.clone();
    let mut holes = cur.invalid_count();
    for _ in 0..iterations {
        if holes == 0 {
            break;
        }
        cur = dilate_fill(&cur, kernel, Domain::All).0;
        let left = cur.invalid_count();
        if left == holes {
            break;
        }
        holes = left;
    }
    cur
}

/// Wall-clock stage durations of one frame, milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    /// Inversion and initial dilation.
    pub init_ms: f64,
    /// Gray-scale cost map.
    pub cost_map_ms: f64,
    pub segmentation_ms: f64,
    /// Region table and adjacency graph.
    pub graph_ms: f64,
    pub set_loop_ms: f64,
    pub refinement_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PdcWarning {
    /// The sparse input had no valid pixel; the output is all invalid.
    NoValidDepth,
    /// Holes left after hole filling.
    ResidualInvalid { count: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PdcReport {
    pub timings: StageTimings,
    pub regions: usize,
    pub residual_invalid: usize,
    pub warnings: Vec<PdcWarning>,
}

#[derive(Debug, Clone)]
pub struct PdcOutput {
    pub depth: DepthMap,
    pub report: PdcReport,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Completes `sparse` guided by `rgb`.
pub fn run_pdc(rgb: &RgbImage, sparse: &DepthMap, cfg: &PdcConfig) -> Result<DepthMap> {
    run_pdc_with_report(rgb, sparse, cfg).map(|o| o.depth)
}

/// [`run_pdc`] plus stage timings and warnings.
pub fn run_pdc_with_report(rgb: &RgbImage, sparse: &DepthMap, cfg: &PdcConfig) -> Result<PdcOutput> {
    if rgb.dims() != sparse.dims() {
        return Err(PdcError::mismatch(rgb.dims(), sparse.dims()));
    }
    cfg.validate()?;
    let (w, h) = sparse.dims();
    let mut report = PdcReport::default();

    if sparse.valid_count() == 0 {
        log::warn!("frame has no valid depth; returning an empty map");
        report.residual_invalid = w * h;
        report.warnings.push(PdcWarning::NoValidDepth);
        return Ok(PdcOutput {
            depth: DepthMap::empty(w, h),
            report,
        });
    }

    let t = Instant::now();
    let inv = sparse.invert(cfg.max_depth)?;
    let (inv, _) = dilate_fill(&inv, &cfg.kernels.initial_dilate, Domain::All);
    report.timings.init_ms = elapsed_ms(t);

    let t = Instant::now();
    let gray = to_gray(rgb);
    report.timings.cost_map_ms = elapsed_ms(t);

    let t = Instant::now();
    let lab = segment(rgb, &cfg.segmentation)?;
    report.timings.segmentation_ms = elapsed_ms(t);
    report.regions = lab.count();

    let t = Instant::now();
    let members = RegionMembers::new(&lab);
    let (table, graph) = if cfg.use_superpixel_sets {
        (Some(build_regions(&lab, &gray)?), Some(build_adjacency(&lab)))
    } else {
        (None, None)
    };
    report.timings.graph_ms = elapsed_ms(t);

    let t = Instant::now();
    let patches: Vec<RegionPatch> = (0..lab.count())
        .into_par_iter()
        .map(|i| {
            let set = match (&graph, &table) {
                (Some(g), Some(tb)) => select_set(g, tb, i, &cfg.matching),
                _ => SuperpixelSet::center_only(i),
            };
            complete_set(&inv, &lab, &members, &set, cfg)
        })
        .collect();
    let mut acc = MaskAccumulator::new(w, h, cfg.max_depth);
    for patch in &patches {
        acc.write(patch);
    }
    report.timings.set_loop_ms = elapsed_ms(t);

    let t = Instant::now();
    let mut mask = acc.into_map();
    if cfg.extrapolate_top {
        mask = extrapolate_top(&mask);
    }
    mask = fill_remaining(&mask, &cfg.kernels.fill_remaining, cfg.fill_remaining_iterations);
    let residual = mask.invalid_count();
    if residual > 0 {
        log::warn!("{residual} pixel(s) still invalid after hole filling");
        report.warnings.push(PdcWarning::ResidualInvalid { count: residual });
    }
    report.residual_invalid = residual;
    mask = match cfg.blur {
        BlurKind::None => mask,
        BlurKind::Gaussian => masked_gaussian(&mask, cfg.gaussian.size, cfg.gaussian.sigma),
        BlurKind::Bilateral => masked_bilateral(
            &mask,
            cfg.bilateral.size,
            cfg.bilateral.sigma_range,
            cfg.bilateral.sigma_space,
        ),
    };
    let depth = mask.uninvert();
    report.timings.refinement_ms = elapsed_ms(t);

    Ok(PdcOutput { depth, report })
}
