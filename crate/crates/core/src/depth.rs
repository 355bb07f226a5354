//! Raster types shared by every stage: metric depth maps, their inverted
//! form used by the morphology, and the 8-bit color/gray reference images.

use crate::error::{PdcError, Result};

/// Default inversion constant in meters.
pub const DEFAULT_MAX_DEPTH: f64 = 100.0;

/// Per-pixel metric depth in meters. A stored value of `0.0` marks a pixel
/// without a measurement; every positive value is a valid depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f32>,
}

impl DepthMap {
    /// An all-invalid map.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            depth: vec![0.0; width * height],
        }
    }

    /// Builds a map from row-major depths. Zero means "no measurement";
    /// negative or non-finite values are rejected.
    pub fn from_depths(width: usize, height: usize, depth: Vec<f32>) -> Result<Self> {
        if depth.len() != width * height {
            return Err(PdcError::BufferLength {
                width,
                height,
                len: depth.len(),
            });
        }
        if let Some(i) = depth.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(PdcError::InvalidDepthValue {
                x: i % width,
                y: i / width,
                depth: f64::from(depth[i]),
            });
        }
        Ok(Self {
            width,
            height,
            depth,
        })
    }

    /// Builds a map from depths plus an explicit validity mask. Depth values
    /// under an invalid mask entry are discarded.
    pub fn from_masked(width: usize, height: usize, depth: &[f32], valid: &[bool]) -> Result<Self> {
        if valid.len() != depth.len() {
            return Err(PdcError::BufferLength {
                width,
                height,
                len: valid.len(),
            });
        }
        let canonical = depth
            .iter()
            .zip(valid)
            .map(|(&d, &v)| if v { d } else { 0.0 })
            .collect();
        let map = Self::from_depths(width, height, canonical)?;
        if let Some(i) = valid
            .iter()
            .zip(&map.depth)
            .position(|(&v, &d)| v && d <= 0.0)
        {
            return Err(PdcError::InvalidDepthValue {
                x: i % width,
                y: i / width,
                depth: f64::from(map.depth[i]),
            });
        }
        Ok(map)
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

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    /// Row-major depths; invalid pixels read as `0.0`.
    pub fn as_slice(&self) -> &[f32] {
        &self.depth
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let d = self.depth[y * self.width + x];
        (d > 0.0).then_some(d)
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.depth[y * self.width + x] > 0.0
    }

    /// Writes `depth` at `(x, y)`; `None` clears the pixel.
    pub fn set(&mut self, x: usize, y: usize, depth: Option<f32>) {
        let v = depth.unwrap_or(0.0);
        assert!(v.is_finite() && v >= 0.0, "depth must be finite and non-negative");
        self.depth[y * self.width + x] = v;
    }

    pub fn valid_count(&self) -> usize {
        self.depth.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn invalid_count(&self) -> usize {
        self.len() - self.valid_count()
    }

    pub fn valid_mask(&self) -> Vec<bool> {
        self.depth.iter().map(|&d| d > 0.0).collect()
    }

    /// Remaps the map so that `inv = max_depth - depth` on valid pixels and
    /// `0` elsewhere. Every valid depth must lie strictly below `max_depth`.
    pub fn invert(&self, max_depth: f64) -> Result<InvertedDepthMap> {
        if !(max_depth.is_finite() && max_depth > 0.0) {
            return Err(PdcError::InvalidConfig(format!(
                "max_depth must be positive, got {max_depth}"
            )));
        }
        let mut inv = Vec::with_capacity(self.depth.len());
        for (i, &d) in self.depth.iter().enumerate() {
            if d > 0.0 {
                let d = f64::from(d);
                if d >= max_depth {
                    return Err(PdcError::DepthExceedsMax {
                        x: i % self.width,
                        y: i / self.width,
                        depth: d,
                        max_depth,
                    });
                }
                inv.push(max_depth - d);
            } else {
                inv.push(0.0);
            }
        }
        Ok(InvertedDepthMap {
            width: self.width,
            height: self.height,
            max_depth,
            inv,
        })
    }
}

/// Depth in the inverted domain. Invalid pixels hold `0`, which sorts below
/// every valid value, so a plain max filter fills holes with the surface
/// nearest to the camera.
///
/// Values are stored as `f64` while [`DepthMap`] stores `f32`: for integer
/// `max_depth` and depths above a micrometer, `max_depth - d` is exact and the
/// round trip back to `f32` reproduces the input bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedDepthMap {
    width: usize,
    height: usize,
    max_depth: f64,
    inv: Vec<f64>,
}

impl InvertedDepthMap {
    /// Builds an inverted map from raw values. Each value must be finite,
    /// non-negative and below `max_depth` (a value equal to `max_depth`
    /// would decode to zero depth).
    pub fn from_values(width: usize, height: usize, max_depth: f64, inv: Vec<f64>) -> Result<Self> {
        if inv.len() != width * height {
            return Err(PdcError::BufferLength {
                width,
                height,
                len: inv.len(),
            });
        }
        if let Some(i) = inv
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v >= max_depth)
        {
            return Err(PdcError::InvalidDepthValue {
                x: i % width,
                y: i / width,
                depth: inv[i],
            });
        }
        Ok(Self {
            width,
            height,
            max_depth,
            inv,
        })
    }

    /// All-invalid map with the given inversion constant.
    pub fn empty(width: usize, height: usize, max_depth: f64) -> Self {
        Self {
            width,
            height,
            max_depth,
            inv: vec![0.0; width * height],
        }
    }

    pub(crate) fn from_parts(width: usize, height: usize, max_depth: f64, inv: Vec<f64>) -> Self {
        debug_assert_eq!(inv.len(), width * height);
        Self {
            width,
            height,
            max_depth,
            inv,
        }
    }

    pub(crate) fn with_values(&self, inv: Vec<f64>) -> Self {
        debug_assert_eq!(inv.len(), self.inv.len());
        Self {
            width: self.width,
            height: self.height,
            max_depth: self.max_depth,
            inv,
        }
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

    pub fn max_depth(&self) -> f64 {
        self.max_depth
    }

    pub fn len(&self) -> usize {
        self.inv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.inv
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.inv
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.inv[y * self.width + x]
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.inv[y * self.width + x] > 0.0
    }

    pub fn invalid_count(&self) -> usize {
        self.inv.iter().filter(|&&v| v <= 0.0).count()
    }

    /// Back to metric depth.
    pub fn uninvert(&self) -> DepthMap {
        let depth = self
            .inv
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    (self.max_depth - v) as f32
                } else {
                    0.0
                }
            })
            .collect();
        DepthMap {
            width: self.width,
            height: self.height,
            depth,
        }
    }
}

/// 8-bit RGB image, row-major, interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(PdcError::BufferLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.data[y * self.width + x] = rgb;
    }
}

/// 8-bit intensity image; the cost map used for region appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn from_values(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(PdcError::BufferLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// BT.601 luma of one pixel, rounded half up.
#[inline]
pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    // 299 + 587 + 114 = 1000, so the sum never exceeds 255_500.
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

pub fn to_gray(img: &RgbImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().copied().map(luma).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gray_reference_colors() {
        assert_eq!(luma([255, 255, 255]), 255);
        assert_eq!(luma([0, 0, 0]), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(luma([255, 0, 0]), 76);
        assert_eq!(luma([0, 255, 0]), 150);
        assert_eq!(luma([0, 0, 255]), 29);
    }

    #[test]
    fn invert_examples() {
        let map = DepthMap::from_depths(3, 1, vec![20.0, 0.0, 99.999]).unwrap();
        let inv = map.invert(100.0).unwrap();
        assert_eq!(inv.get(0, 0), 80.0);
        assert_eq!(inv.get(1, 0), 0.0);
        let edge = inv.get(2, 0);
        assert!(edge > 0.0 && (edge - 0.001).abs() < 1e-5, "{edge}");
        assert!(inv.is_valid(2, 0));
    }

    #[test]
    fn invert_rejects_depth_at_max() {
        let map = DepthMap::from_depths(2, 1, vec![5.0, 100.0]).unwrap();
        assert!(matches!(
            map.invert(100.0),
            Err(PdcError::DepthExceedsMax { x: 1, y: 0, .. })
        ));
    }

    #[test]
    fn masked_constructor_canonicalizes_invalid() {
        let m = DepthMap::from_masked(2, 1, &[3.0, 7.0], &[true, false]).unwrap();
        assert_eq!(m.as_slice(), &[3.0, 0.0]);
        assert!(DepthMap::from_masked(1, 1, &[0.0], &[true]).is_err());
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(DepthMap::from_depths(1, 1, vec![-1.0]).is_err());
        assert!(DepthMap::from_depths(1, 1, vec![f32::NAN]).is_err());
        assert!(DepthMap::from_depths(2, 1, vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn inversion_round_trip_is_exact(
            depths in proptest::collection::vec(prop_oneof![Just(0.0f32), 0.001f32..99.99f32], 1..64)
        ) {
            let n = depths.len();
            let map = DepthMap::from_depths(n, 1, depths).unwrap();
            let inv = map.invert(100.0).unwrap();
            for (d, v) in map.as_slice().iter().zip(inv.as_slice()) {
                prop_assert_eq!(*d > 0.0, *v > 0.0);
            }
            prop_assert_eq!(inv.uninvert(), map);
        }

        #[test]
        fn gray_matches_float_formula(r: u8, g: u8, b: u8) {
            let exact = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
            let v = luma([r, g, b]);
            prop_assert!((f64::from(v) - exact).abs() <= 0.5 + 1e-9);
        }
    }
}
