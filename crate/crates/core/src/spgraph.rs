//! Region statistics, the region adjacency graph, and neighbor matching.
//!
//! Two adjacent regions are compared by `epsilon`, the mean absolute gray
//! difference between evenly spaced order statistics of both regions.
//! Neighbors with `epsilon <= tau` form the shortlist, which is ranked by
//! `cost = weight(D) * epsilon` where `D` is the distance between the
//! regions' center pixels.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::depth::GrayImage;
use crate::error::{PdcError, Result};
use crate::superpixel::Labeling;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionStats {
    pub size: usize,
    /// Member pixel closest to the centroid, as `(x, y)`.
    pub center: (usize, usize),
    /// Gray values of all member pixels, ascending.
    pub gray: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionTable {
    regions: Vec<RegionStats>,
}

impl RegionTable {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn get(&self, i: usize) -> &RegionStats {
        &self.regions[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegionStats> {
        self.regions.iter()
    }
}

/// Collects per-region size, center pixel, and sorted gray values.
///
/// The center is the member pixel with the smallest squared distance to the
/// region centroid; ties go to the smaller row, then the smaller column.
pub fn build_regions(lab: &Labeling, gray: &GrayImage) -> Result<RegionTable> {
    if lab.dims() != gray.dims() {
        return Err(PdcError::mismatch(lab.dims(), gray.dims()));
    }
    let w = lab.width();
    let g = gray.as_slice();
    let regions = lab
        .members()
        .into_iter()
        .map(|pixels| {
            let n = pixels.len() as i64;
            let (sx, sy) = pixels.iter().fold((0i64, 0i64), |(sx, sy), &p| {
                (sx + (p % w) as i64, sy + (p / w) as i64)
            });
            // compare n^2 * squared distance in exact integer arithmetic;
            // pixels are in scan order so the first minimum wins ties
            let mut best = (i128::MAX, 0usize);
            for &p in &pixels {
                let dx = i128::from(n * (p % w) as i64 - sx);
                let dy = i128::from(n * (p / w) as i64 - sy);
                let d = dx * dx + dy * dy;
                if d < best.0 {
                    best = (d, p);
                }
            }
            let mut values: Vec<u8> = pixels.iter().map(|&p| g[p]).collect();
            values.sort_unstable();
            RegionStats {
                size: pixels.len(),
                center: (best.1 % w, best.1 / w),
                gray: values,
            }
        })
        .collect();
    Ok(RegionTable { regions })
}

/// Undirected graph of 4-adjacent regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted neighbor ids of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_adjacency(lab: &Labeling) -> AdjacencyGraph {
    let (w, h) = lab.dims();
    let labels = lab.as_slice();
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let a = labels[p];
            if x + 1 < w && labels[p + 1] != a {
                pairs.push((a, labels[p + 1]));
            }
            if y + 1 < h && labels[p + w] != a {
                pairs.push((a, labels[p + w]));
            }
        }
    }
    let mut neighbors = vec![Vec::new(); lab.count()];
    for (a, b) in pairs {
        neighbors[a as usize].push(b as usize);
        neighbors[b as usize].push(a as usize);
    }
    for ns in &mut neighbors {
        ns.sort_unstable();
        ns.dedup();
    }
    AdjacencyGraph { neighbors }
}

/// Euclidean distance between the center pixels of two regions.
pub fn distance(table: &RegionTable, i: usize, j: usize) -> f64 {
    let (xi, yi) = table.get(i).center;
    let (xj, yj) = table.get(j).center;
    let dx = xi as f64 - xj as f64;
    let dy = yi as f64 - yj as f64;
    (dx * dx + dy * dy).sqrt()
}

/// Index of the `k`-th of `n` evenly spaced picks from a sorted sequence of
/// length `len` (`n <= len`); a single pick is the lower median.
#[inline]
fn sample_index(k: usize, n: usize, len: usize) -> usize {
    if n == 1 {
        (len - 1) / 2
    } else {
        // round(k * (len - 1) / (n - 1)), half up
        (2 * k * (len - 1) + (n - 1)) / (2 * (n - 1))
    }
}

/// Appearance distance of two regions in gray levels, in `[0, 255]`.
pub fn epsilon(table: &RegionTable, i: usize, j: usize) -> f64 {
    let a = &table.get(i).gray;
    let b = &table.get(j).gray;
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let total: u64 = (0..n)
        .map(|k| {
            let va = a[sample_index(k, n, a.len())];
            let vb = b[sample_index(k, n, b.len())];
            u64::from(va.abs_diff(vb))
        })
        .sum();
    total as f64 / n as f64
}

/// Sign convention of the distance weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    /// `exp(+D / alpha)`: far neighbors cost more.
    #[default]
    PenalizeDistance,
    /// `exp(-D / alpha)`.
    AsWritten,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::PenalizeDistance => "penalize-distance",
            CostMode::AsWritten => "as-written",
        })
    }
}

impl FromStr for CostMode {
    type Err = PdcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "penalize-distance" => Ok(CostMode::PenalizeDistance),
            "as-written" => Ok(CostMode::AsWritten),
            other => Err(PdcError::InvalidConfig(format!("unknown cost mode {other:?}"))),
        }
    }
}

pub fn weight(distance: f64, alpha: f64, mode: CostMode) -> f64 {
    match mode {
        CostMode::PenalizeDistance => (distance / alpha).exp(),
        CostMode::AsWritten => (-distance / alpha).exp(),
    }
}

pub fn cost(table: &RegionTable, i: usize, j: usize, alpha: f64, mode: CostMode) -> f64 {
    weight(distance(table, i, j), alpha, mode) * epsilon(table, i, j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchParams {
    /// Shortlist threshold on `epsilon`, gray levels.
    pub tau: f64,
    /// Distance regularization, pixels.
    pub alpha: f64,
    /// How many best neighbors join a center region.
    pub set_size: usize,
    pub cost_mode: CostMode,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            tau: 10.0,
            alpha: 50.0,
            set_size: 2,
            cost_mode: CostMode::PenalizeDistance,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(PdcError::InvalidConfig("tau must be > 0".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(PdcError::InvalidConfig("alpha must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub region: usize,
    pub cost: f64,
}

/// A center region and its best fitting neighbors, cheapest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelSet {
    pub center: usize,
    pub neighbors: Vec<Neighbor>,
}

impl SuperpixelSet {
    pub fn center_only(center: usize) -> Self {
        Self {
            center,
            neighbors: Vec::new(),
        }
    }

    /// Center first, then neighbors in rank order.
    pub fn regions(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.center).chain(self.neighbors.iter().map(|n| n.region))
    }
}

/// Shortlists the neighbors of `center` with `epsilon <= tau` and keeps the
/// `set_size` cheapest (ties go to the smaller region id).
pub fn select_set(
    graph: &AdjacencyGraph,
    table: &RegionTable,
    center: usize,
    params: &MatchParams,
) -> SuperpixelSet {
    let mut shortlist: Vec<Neighbor> = graph
        .neighbors(center)
        .iter()
        .filter_map(|&j| {
            let eps = epsilon(table, center, j);
            (eps <= params.tau).then(|| Neighbor {
                region: j,
                cost: weight(distance(table, center, j), params.alpha, params.cost_mode) * eps,
            })
        })
        .collect();
    shortlist.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.region.cmp(&b.region)));
    shortlist.truncate(params.set_size);
    SuperpixelSet {
        center,
        neighbors: shortlist,
    }
}

/// Writes the graph as a tab-separated edge list with `D`, `epsilon`, and
/// `cost` columns (cost seen from the lower id).
pub fn write_edge_list<W: Write>(
    out: &mut W,
    graph: &AdjacencyGraph,
    table: &RegionTable,
    params: &MatchParams,
) -> std::io::Result<()> {
    writeln!(out, "i\tj\tdistance\tepsilon\tcost")?;
    for (i, j) in graph.edges() {
        let d = distance(table, i, j);
        let e = epsilon(table, i, j);
        let c = weight(d, params.alpha, params.cost_mode) * e;
        writeln!(out, "{i}\t{j}\t{d:.6}\t{e:.6}\t{c:.6}")?;
    }
    Ok(())
}
