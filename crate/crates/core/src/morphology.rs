//! Masked grayscale morphology on inverted depth.
//!
//! Invalid pixels (value `0`) are absent rather than competing as zeros, and
//! every operation is confined to a [`Domain`]: window cells outside it are
//! ignored and pixels outside it are copied through untouched. None of the
//! fill operations overwrites a pixel that was valid in its input.

use std::fmt;
use std::str::FromStr;

use crate::depth::InvertedDepthMap;
use crate::error::PdcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelShape {
    /// Full square.
    Full,
    /// L1 ball.
    Diamond,
    /// Plus sign: center row and center column.
    Cross,
}

/// Odd-sized structuring element anchored at its center cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Kernel {
    shape: KernelShape,
    size: usize,
}

impl Kernel {
    pub fn new(shape: KernelShape, size: usize) -> Result<Self, PdcError> {
        if size < 3 || size % 2 == 0 {
            return Err(PdcError::InvalidKernel(format!(
                "size must be odd and >= 3, got {size}"
            )));
        }
        Ok(Self { shape, size })
    }

    pub fn full(size: usize) -> Self {
        Self::new(KernelShape::Full, size).expect("valid kernel size")
    }

    pub fn diamond(size: usize) -> Self {
        Self::new(KernelShape::Diamond, size).expect("valid kernel size")
    }

    pub fn cross(size: usize) -> Self {
        Self::new(KernelShape::Cross, size).expect("valid kernel size")
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> isize {
        (self.size / 2) as isize
    }

    /// Cell offsets `(dy, dx)` in row-major order.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius();
        let mut out = Vec::with_capacity(self.size * self.size);
        for dy in -r..=r {
            for dx in -r..=r {
                let keep = match self.shape {
                    KernelShape::Full => true,
                    KernelShape::Diamond => dy.abs() + dx.abs() <= r,
                    KernelShape::Cross => dy == 0 || dx == 0,
                };
                if keep {
                    out.push((dy, dx));
                }
            }
        }
        out
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.shape {
            KernelShape::Full => "full",
            KernelShape::Diamond => "diamond",
            KernelShape::Cross => "cross",
        };
        write!(f, "{name}:{}", self.size)
    }
}

impl FromStr for Kernel {
    type Err = PdcError;

    /// Parses `shape:size`, e.g. `diamond:5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (shape, size) = s
            .split_once(':')
            .ok_or_else(|| PdcError::InvalidKernel(format!("expected shape:size, got {s:?}")))?;
        let shape = match shape.trim() {
            "full" | "square" => KernelShape::Full,
            "diamond" => KernelShape::Diamond,
            "cross" => KernelShape::Cross,
            other => return Err(PdcError::InvalidKernel(format!("unknown shape {other:?}"))),
        };
        let size = size
            .trim()
            .parse()
            .map_err(|_| PdcError::InvalidKernel(format!("bad size in {s:?}")))?;
        Kernel::new(shape, size)
    }
}

/// Set of pixels an operation may read from and write to.
#[derive(Debug, Clone, Copy)]
pub enum Domain<'a> {
    All,
    /// Row-major membership flags, one per pixel.
    Mask(&'a [bool]),
}

impl Domain<'_> {
    #[inline]
    fn contains(&self, idx: usize) -> bool {
        match self {
            Domain::All => true,
            Domain::Mask(m) => m[idx],
        }
    }

    fn check(&self, len: usize) {
        if let Domain::Mask(m) = self {
            assert_eq!(m.len(), len, "domain mask size does not match the map");
        }
    }
}

const NO_SOURCE: u32 = u32::MAX;

/// For each pixel filled by a dilation, the pixel its value was copied from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceMap {
    width: usize,
    source: Vec<u32>,
}

impl ProvenanceMap {
    fn new(width: usize, len: usize) -> Self {
        Self {
            width,
            source: vec![NO_SOURCE; len],
        }
    }

    /// Source pixel of `(x, y)`, if dilation produced its value.
    pub fn source(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        self.source_index(y * self.width + x)
            .map(|s| (s % self.width, s / self.width))
    }

    /// Row-major variant of [`ProvenanceMap::source`].
    pub fn source_index(&self, idx: usize) -> Option<usize> {
        let s = self.source[idx];
        (s != NO_SOURCE).then_some(s as usize)
    }

    /// Number of pixels carrying a source.
    pub fn defined_count(&self) -> usize {
        self.source.iter().filter(|&&s| s != NO_SOURCE).count()
    }
}

/// Iterates the in-image neighbors of `(x, y)` under `offsets`, in offset order.
#[inline]
fn window<'a>(
    offsets: &'a [(isize, isize)],
    x: usize,
    y: usize,
    w: usize,
    h: usize,
) -> impl Iterator<Item = usize> + 'a {
    offsets.iter().filter_map(move |&(dy, dx)| {
        let yy = y as isize + dy;
        let xx = x as isize + dx;
        (yy >= 0 && xx >= 0 && (yy as usize) < h && (xx as usize) < w)
            .then(|| yy as usize * w + xx as usize)
    })
}

/// Fills invalid domain pixels with the maximum valid value in their window.
///
/// Ties between equal maxima go to the source with the smallest row, then
/// the smallest column. Valid pixels and pixels outside `domain` are copied.
pub fn dilate_fill(
    inv: &InvertedDepthMap,
    kernel: &Kernel,
    domain: Domain<'_>,
) -> (InvertedDepthMap, ProvenanceMap) {
    let (w, h) = inv.dims();
    domain.check(inv.len());
    let src = inv.as_slice();
    let offsets = kernel.offsets();
    let mut out = src.to_vec();
    let mut prov = ProvenanceMap::new(w, src.len());
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if src[p] > 0.0 || !domain.contains(p) {
                continue;
            }
            let mut best = 0.0;
            let mut best_q = NO_SOURCE;
            // offsets are row-major, so strict `>` keeps the first maximum
            for q in window(&offsets, x, y, w, h) {
                if domain.contains(q) && src[q] > best {
                    best = src[q];
                    best_q = q as u32;
                }
            }
            if best_q != NO_SOURCE {
                out[p] = best;
                prov.source[p] = best_q;
            }
        }
    }
    (inv.with_values(out), prov)
}

/// Masked minimum filter over the valid pixels of the input.
///
/// Only pixels that are valid and inside `domain` are rewritten; each takes
/// the minimum of the valid window cells inside `domain` (which always
/// includes itself). Invalid pixels stay invalid.
pub fn erode(inv: &InvertedDepthMap, kernel: &Kernel, domain: Domain<'_>) -> InvertedDepthMap {
    let (w, h) = inv.dims();
    domain.check(inv.len());
    let src = inv.as_slice();
    let offsets = kernel.offsets();
    let mut out = src.to_vec();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if src[p] <= 0.0 || !domain.contains(p) {
                continue;
            }
            let mut low = src[p];
            for q in window(&offsets, x, y, w, h) {
                if domain.contains(q) && src[q] > 0.0 && src[q] < low {
                    low = src[q];
                }
            }
            out[p] = low;
        }
    }
    inv.with_values(out)
}

/// Morphological close restricted to `domain` that only fills gaps.
///
/// Runs [`dilate_fill`] then [`erode`]. A pixel that was invalid in the
/// input keeps the closed value only if every window cell inside `domain`
/// was covered by the dilation, i.e. it survives the binary erosion of the
/// dilated support. Gaps wider than the kernel therefore stay open and the
/// valid area never grows past its outline. Originally valid pixels keep
/// their input values.
pub fn close_fill(inv: &InvertedDepthMap, kernel: &Kernel, domain: Domain<'_>) -> InvertedDepthMap {
    let (w, h) = inv.dims();
    let (dilated, _) = dilate_fill(inv, kernel, domain);
    let eroded = erode(&dilated, kernel, domain);
    let src = inv.as_slice();
    let dil = dilated.as_slice();
    let ero = eroded.as_slice();
    let offsets = kernel.offsets();
    let mut out = src.to_vec();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if src[p] > 0.0 || ero[p] <= 0.0 || !domain.contains(p) {
                continue;
            }
            let covered = window(&offsets, x, y, w, h).all(|q| !domain.contains(q) || dil[q] > 0.0);
            if covered {
                out[p] = ero[p];
            }
        }
    }
    inv.with_values(out)
}

/// Lower median, the `(n - 1) / 2`-th order statistic. Always an element of
/// `values`. Returns `None` for an empty slice.
pub fn lower_median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let k = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(k, f64::total_cmp);
    Some(*m)
}

/// Sets every invalid pixel of `region` (row-major indices) to the lower
/// median of the region's valid values. A region without valid pixels is
/// left unchanged.
pub fn median_fill(inv: &InvertedDepthMap, region: &[usize]) -> InvertedDepthMap {
    let mut out = inv.clone();
    median_fill_in_place(out.as_mut_slice(), region);
    out
}

pub(crate) fn median_fill_in_place(values: &mut [f64], region: &[usize]) {
    let mut valid: Vec<f64> = region
        .iter()
        .map(|&p| values[p])
        .filter(|&v| v > 0.0)
        .collect();
    if let Some(m) = lower_median(&mut valid) {
        for &p in region {
            if values[p] <= 0.0 {
                values[p] = m;
            }
        }
    }
}
