//! Superpixel segmentation of the reference image.
//!
//! Grid-seeded iterative clustering in a joint color/position space
//! (SLIC-style), followed by a connectivity pass that merges undersized
//! fragments. Everything is deterministic: fixed seeds, fixed iteration
//! count, and ties resolved toward the smaller label.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use crate::depth::{luma, to_gray, GrayImage, RgbImage};
use crate::error::{PdcError, Result};

/// Per-pixel region ids forming a full partition with compact ids `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: usize,
}

impl Labeling {
    /// Wraps raw labels. Ids must be compact: every id below the maximum
    /// has to occur at least once.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height || labels.is_empty() {
            return Err(PdcError::BufferLength {
                width,
                height,
                len: labels.len(),
            });
        }
        let count = *labels.iter().max().expect("nonempty") as usize + 1;
        let mut seen = vec![false; count];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(PdcError::InvalidArgument(format!(
                "label {missing} is unused; labels must be compact"
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            count,
        })
    }

    /// Relabels arbitrary ids compactly in order of first appearance.
    pub fn compacted(width: usize, height: usize, raw: &[u32]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len() as u32;
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Number of regions.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x] as usize
    }

    /// Pixel count of every region.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Row-major pixel indices of every region, each list in scan order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes().into_iter().map(Vec::with_capacity).collect();
        for (p, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(p);
        }
        out
    }

    /// True when every region is a single 4-connected component.
    pub fn is_connected(&self) -> bool {
        components(self.width, self.height, &self.labels).1 == self.count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationParams {
    /// Target region count.
    pub superpixels: usize,
    /// Weight of the spatial term against the color term.
    pub compactness: f64,
    pub iterations: usize,
    /// Smallest allowed region; `None` picks a quarter of the mean size.
    pub min_region_size: Option<usize>,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            superpixels: 1000,
            compactness: 10.0,
            iterations: 10,
            min_region_size: None,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if self.superpixels == 0 {
            return Err(PdcError::InvalidConfig("superpixels must be >= 1".into()));
        }
        if !(self.compactness.is_finite() && self.compactness >= 0.0) {
            return Err(PdcError::InvalidConfig("compactness must be >= 0".into()));
        }
        if self.iterations == 0 {
            return Err(PdcError::InvalidConfig("iterations must be >= 1".into()));
        }
        if self.min_region_size == Some(0) {
            return Err(PdcError::InvalidConfig("min_region_size must be >= 1".into()));
        }
        Ok(())
    }

    /// Effective minimum region size for an image of `pixels` pixels.
    pub fn resolved_min_region_size(&self, pixels: usize) -> usize {
        self.min_region_size
            .unwrap_or_else(|| pixels / self.superpixels.max(1) / 4)
            .max(1)
    }
}

#[derive(Clone, Copy)]
struct Center {
    color: [f64; 4],
    x: f64,
    y: f64,
}

fn feature(rgb: [u8; 3]) -> [f64; 4] {
    [
        f64::from(rgb[0]),
        f64::from(rgb[1]),
        f64::from(rgb[2]),
        f64::from(luma(rgb)),
    ]
}

fn grid_shape(w: usize, h: usize, k: usize) -> (usize, usize) {
    let step = ((w * h) as f64 / k as f64).sqrt();
    let mut nx = ((w as f64 / step).round() as usize).clamp(1, w);
    let mut ny = ((h as f64 / step).round() as usize).clamp(1, h);
    while nx * ny > 2 * k {
        if nx >= ny {
            nx -= 1;
        } else {
            ny -= 1;
        }
    }
    (nx, ny)
}

/// Segments `img` into roughly `params.superpixels` connected regions.
pub fn segment(img: &RgbImage, params: &SegmentationParams) -> Result<Labeling> {
    params.validate()?;
    let (w, h) = img.dims();
    let n = w * h;
    if n == 0 {
        return Err(PdcError::InvalidArgument("empty image".into()));
    }
    if params.superpixels > n {
        return Err(PdcError::TooManySuperpixels {
            requested: params.superpixels,
            pixels: n,
        });
    }
    let features: Vec<[f64; 4]> = img.pixels().iter().copied().map(feature).collect();
    let (nx, ny) = grid_shape(w, h, params.superpixels);
    let sx = w as f64 / nx as f64;
    let sy = h as f64 / ny as f64;
    let step = ((n as f64) / params.superpixels as f64).sqrt();
    let spatial_weight = (params.compactness / step).powi(2);
    let radius = sx.max(sy).ceil() as isize;

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = (i as f64 + 0.5) * sx - 0.5;
            let y = (j as f64 + 0.5) * sy - 0.5;
            let px = (x.round() as usize).min(w - 1);
            let py = (y.round() as usize).min(h - 1);
            centers.push(Center {
                color: features[py * w + px],
                x,
                y,
            });
        }
    }

    let mut labels: Vec<u32> = (0..n)
        .map(|p| {
            let (x, y) = (p % w, p / w);
            let i = ((x * nx) / w).min(nx - 1);
            let j = ((y * ny) / h).min(ny - 1);
            (j * nx + i) as u32
        })
        .collect();
    let mut best = vec![f64::INFINITY; n];

    for _ in 0..params.iterations {
        best.fill(f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let cx = center.x.round() as isize;
            let cy = center.y.round() as isize;
            // centers are pixel means, so they always lie inside the image
            let y0 = (cy - radius).max(0) as usize;
            let y1 = ((cy + radius).max(0) as usize).min(h - 1);
            let x0 = (cx - radius).max(0) as usize;
            let x1 = ((cx + radius).max(0) as usize).min(w - 1);
            for y in y0..=y1 {
                let dy = y as f64 - center.y;
                for x in x0..=x1 {
                    let p = y * w + x;
                    let f = &features[p];
                    let mut dc = 0.0;
                    for k in 0..4 {
                        let d = f[k] - center.color[k];
                        dc += d * d;
                    }
                    let dx = x as f64 - center.x;
                    let dist = dc + spatial_weight * (dx * dx + dy * dy);
                    // centers are visited in label order: strict `<` keeps the smaller label on ties
                    if dist < best[p] {
                        best[p] = dist;
                        labels[p] = c as u32;
                    }
                }
            }
        }

        let mut sums = vec![([0.0f64; 4], 0.0f64, 0.0f64, 0usize); centers.len()];
        for (p, &l) in labels.iter().enumerate() {
            let s = &mut sums[l as usize];
            for k in 0..4 {
                s.0[k] += features[p][k];
            }
            s.1 += (p % w) as f64;
            s.2 += (p / w) as f64;
            s.3 += 1;
        }
        for (center, (color, x, y, count)) in centers.iter_mut().zip(sums) {
            if count > 0 {
                let inv = 1.0 / count as f64;
                center.color = color.map(|c| c * inv);
                center.x = x * inv;
                center.y = y * inv;
            }
        }
    }

    let gray = to_gray(img);
    let min_size = params.resolved_min_region_size(n);
    Ok(merge_fragments(
        w,
        h,
        &labels,
        &gray,
        min_size,
        2 * params.superpixels,
    ))
}

/// Splits every label into 4-connected components and merges components
/// smaller than `min_region_size` into the adjacent component whose mean
/// gray value is closest (ties go to the smaller component id). Output ids
/// are compact, numbered in scan order of each region's first pixel.
pub fn enforce_connectivity(lab: &Labeling, gray: &GrayImage, min_region_size: usize) -> Labeling {
    assert_eq!(lab.dims(), gray.dims(), "labeling and gray image differ in size");
    merge_fragments(
        lab.width,
        lab.height,
        &lab.labels,
        gray,
        min_region_size.max(1),
        usize::MAX,
    )
}

/// Component ids in scan order of first pixel, plus the component count.
fn components(w: usize, h: usize, labels: &[u32]) -> (Vec<u32>, usize) {
    const UNSET: u32 = u32::MAX;
    let mut comp = vec![UNSET; labels.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        if comp[start] != UNSET {
            continue;
        }
        let l = labels[start];
        comp[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if comp[q] == UNSET && labels[q] == l {
                    comp[q] = next;
                    queue.push_back(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        next += 1;
    }
    (comp, next as usize)
}

struct Fragment {
    size: usize,
    gray_sum: u64,
    neighbors: BTreeSet<usize>,
}

impl Fragment {
    fn mean(&self) -> f64 {
        self.gray_sum as f64 / self.size as f64
    }
}

fn merge_fragments(
    w: usize,
    h: usize,
    labels: &[u32],
    gray: &GrayImage,
    min_size: usize,
    max_regions: usize,
) -> Labeling {
    let (comp, count) = components(w, h, labels);
    let mut frags: Vec<Fragment> = (0..count)
        .map(|_| Fragment {
            size: 0,
            gray_sum: 0,
            neighbors: BTreeSet::new(),
        })
        .collect();
    let g = gray.as_slice();
    for p in 0..labels.len() {
        let c = comp[p] as usize;
        frags[c].size += 1;
        frags[c].gray_sum += u64::from(g[p]);
        let (x, y) = (p % w, p / w);
        if x + 1 < w && comp[p + 1] as usize != c {
            let d = comp[p + 1] as usize;
            frags[c].neighbors.insert(d);
            frags[d].neighbors.insert(c);
        }
        if y + 1 < h && comp[p + w] as usize != c {
            let d = comp[p + w] as usize;
            frags[c].neighbors.insert(d);
            frags[d].neighbors.insert(c);
        }
    }

    // parent[c] == c for live fragments
    let mut parent: Vec<usize> = (0..count).collect();
    let mut alive = count;
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        frags.iter().enumerate().map(|(i, f)| Reverse((f.size, i))).collect();

    while alive > 1 {
        let Some(Reverse((size, c))) = heap.pop() else {
            break;
        };
        if parent[c] != c || frags[c].size != size {
            continue;
        }
        if size >= min_size && alive <= max_regions {
            break;
        }
        let mean = frags[c].mean();
        let target = frags[c]
            .neighbors
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = (frags[a].mean() - mean).abs();
                let db = (frags[b].mean() - mean).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("a fragment in a multi-fragment image has a neighbor");

        let absorbed = std::mem::take(&mut frags[c].neighbors);
        for &nb in &absorbed {
            frags[nb].neighbors.remove(&c);
            if nb != target {
                frags[nb].neighbors.insert(target);
                frags[target].neighbors.insert(nb);
            }
        }
        frags[target].size += frags[c].size;
        frags[target].gray_sum += frags[c].gray_sum;
        parent[c] = target;
        alive -= 1;
        heap.push(Reverse((frags[target].size, target)));
    }

    let mut root = parent.clone();
    for c in 0..count {
        let mut r = c;
        while parent[r] != r {
            r = parent[r];
        }
        root[c] = r;
    }
    let raw: Vec<u32> = comp.iter().map(|&c| root[c as usize] as u32).collect();
    Labeling::compacted(w, h, &raw).expect("merged labeling is a partition")
}

/// Color-coded rendering of a labeling for debugging.
pub fn label_image(lab: &Labeling) -> RgbImage {
    let pixels = lab
        .as_slice()
        .iter()
        .map(|&l| {
            let mut v = (u64::from(l) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            v ^= v >> 29;
            [(v >> 8) as u8, (v >> 24) as u8, (v >> 40) as u8]
        })
        .collect();
    RgbImage::from_pixels(lab.width, lab.height, pixels).expect("size matches")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_of(w: usize, h: usize, v: Vec<u8>) -> GrayImage {
        GrayImage::from_values(w, h, v).unwrap()
    }

    #[test]
    fn uniform_image_forms_grid() {
        let img = RgbImage::new(60, 60, [90, 120, 30]);
        let params = SegmentationParams {
            superpixels: 9,
            ..Default::default()
        };
        let lab = segment(&img, &params).unwrap();
        assert_eq!(lab.count(), 9);
        assert!(lab.is_connected());
        let mean = 3600.0 / 9.0;
        for s in lab.sizes() {
            assert!((s as f64) < 2.0 * mean && (s as f64) > mean / 2.0, "size {s}");
        }
    }

    #[test]
    fn two_tone_boundary_is_exact() {
        let (w, h) = (64, 40);
        let mut img = RgbImage::new(w, h, [200, 40, 40]);
        for y in 0..h {
            for x in 23..w {
                img.put(x, y, [30, 60, 220]);
            }
        }
        let params = SegmentationParams {
            superpixels: 2,
            ..Default::default()
        };
        let lab = segment(&img, &params).unwrap();
        assert_eq!(lab.count(), 2);
        for y in 0..h {
            for x in 0..w {
                assert_eq!(lab.get(x, y), usize::from(x >= 23), "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn single_pixel_image() {
        let img = RgbImage::new(1, 1, [1, 2, 3]);
        let lab = segment(
            &img,
            &SegmentationParams {
                superpixels: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(lab.as_slice(), &[0]);
    }

    #[test]
    fn too_many_superpixels() {
        let img = RgbImage::new(2, 2, [0, 0, 0]);
        let err = segment(
            &img,
            &SegmentationParams {
                superpixels: 5,
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(PdcError::TooManySuperpixels { .. })));
    }

    #[test]
    fn segmentation_is_deterministic() {
        let mut img = RgbImage::new(50, 30, [10, 10, 10]);
        for y in 0..30 {
            for x in 0..50 {
                img.put(x, y, [(x * 5) as u8, (y * 7) as u8, ((x * y) % 256) as u8]);
            }
        }
        let params = SegmentationParams {
            superpixels: 12,
            ..Default::default()
        };
        assert_eq!(segment(&img, &params).unwrap(), segment(&img, &params).unwrap());
    }

    #[test]
    fn valid_labeling_is_unchanged() {
        let lab = Labeling::new(4, 2, vec![0, 0, 1, 1, 0, 0, 1, 1]).unwrap();
        let gray = gray_of(4, 2, vec![0; 8]);
        assert_eq!(enforce_connectivity(&lab, &gray, 1), lab);
    }

    #[test]
    fn orphan_fragment_joins_most_similar_neighbor() {
        // 10x10: left half label 0 (gray 20), right half label 1 (gray 200);
        // a 2-px piece of label 0 sits inside the right half with gray 190.
        let (w, h) = (10, 10);
        let mut labels = vec![0u32; w * h];
        let mut gray = vec![20u8; w * h];
        for y in 0..h {
            for x in 5..w {
                labels[y * w + x] = 1;
                gray[y * w + x] = 200;
            }
        }
        for x in [7, 8] {
            labels[5 * w + x] = 0;
            gray[5 * w + x] = 190;
        }
        let lab = Labeling::new(w, h, labels).unwrap();
        assert!(!lab.is_connected());
        let out = enforce_connectivity(&lab, &gray_of(w, h, gray), 25);
        assert_eq!(out.count(), 2);
        assert!(out.is_connected());
        assert_eq!(out.get(7, 5), out.get(9, 9));
        assert_eq!(out.sizes(), vec![50, 50]);
    }

    #[test]
    fn orphan_prefers_closest_gray_over_size() {
        // 3x1: [a b c] with labels 0,1,2 and b undersized; gray(b) is closer to c
        let lab = Labeling::new(5, 1, vec![0, 0, 1, 2, 2]).unwrap();
        let out = enforce_connectivity(&lab, &gray_of(5, 1, vec![10, 10, 90, 100, 100]), 2);
        assert_eq!(out.as_slice(), &[0, 0, 1, 1, 1]);
        // equal distances: smaller component id wins
        let out = enforce_connectivity(&lab, &gray_of(5, 1, vec![10, 10, 50, 90, 90]), 2);
        assert_eq!(out.as_slice(), &[0, 0, 0, 1, 1]);
    }

    #[test]
    fn checkerboard_collapses() {
        let (w, h) = (4, 4);
        let labels: Vec<u32> = (0..w * h).map(|p| (((p % w) + (p / w)) % 2) as u32).collect();
        let lab = Labeling::new(w, h, labels).unwrap();
        let out = enforce_connectivity(&lab, &gray_of(w, h, vec![128; 16]), 25);
        assert_eq!(out.count(), 1);
        assert!(out.as_slice().iter().all(|&l| l == 0));
    }

    #[test]
    fn compact_labels_are_required() {
        assert!(Labeling::new(2, 1, vec![0, 2]).is_err());
        assert_eq!(Labeling::compacted(3, 1, &[7, 3, 7]).unwrap().as_slice(), &[0, 1, 0]);
    }
}
