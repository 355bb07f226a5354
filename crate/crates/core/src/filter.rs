//! Smoothing filters applied to the completed map in the inverted domain.
//!
//! Both filters replicate the border. The public entry points require a
//! dense map; the pipeline uses the masked variants, which skip invalid
//! window cells and leave invalid pixels untouched (identical results on a
//! dense map).

use crate::depth::InvertedDepthMap;
use crate::error::{PdcError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub size: usize,
    pub sigma: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            size: 5,
            sigma: 1.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    pub size: usize,
    /// Range sigma, meters.
    pub sigma_range: f64,
    /// Spatial sigma, pixels.
    pub sigma_space: f64,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            size: 5,
            sigma_range: 1.5,
            sigma_space: 2.0,
        }
    }
}

fn check_size(size: usize) -> Result<()> {
    if size < 3 || size % 2 == 0 {
        return Err(PdcError::InvalidConfig(format!(
            "blur size must be odd and >= 3, got {size}"
        )));
    }
    Ok(())
}

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(PdcError::InvalidConfig(format!("{name} must be > 0, got {sigma}")));
    }
    Ok(())
}

impl GaussianParams {
    pub fn validate(&self) -> Result<()> {
        check_size(self.size)?;
        check_sigma("gaussian sigma", self.sigma)
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        check_size(self.size)?;
        check_sigma("bilateral sigma_range", self.sigma_range)?;
        check_sigma("bilateral sigma_space", self.sigma_space)
    }
}

/// Normalized `size x size` Gaussian, row-major.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn require_dense(inv: &InvertedDepthMap) -> Result<()> {
    match inv.invalid_count() {
        0 => Ok(()),
        count => Err(PdcError::InvalidPixelsPresent { count }),
    }
}

pub fn gaussian_blur(inv: &InvertedDepthMap, size: usize, sigma: f64) -> Result<InvertedDepthMap> {
    GaussianParams { size, sigma }.validate()?;
    require_dense(inv)?;
    Ok(masked_gaussian(inv, size, sigma))
}

pub fn bilateral_blur(
    inv: &InvertedDepthMap,
    size: usize,
    sigma_range: f64,
    sigma_space: f64,
) -> Result<InvertedDepthMap> {
    BilateralParams {
        size,
        sigma_range,
        sigma_space,
    }
    .validate()?;
    require_dense(inv)?;
    Ok(masked_bilateral(inv, size, sigma_range, sigma_space))
}

pub(crate) fn masked_gaussian(inv: &InvertedDepthMap, size: usize, sigma: f64) -> InvertedDepthMap {
    let kernel = gaussian_kernel(size, sigma);
    convolve(inv, size, |_, _, spatial| spatial, &kernel)
}

pub(crate) fn masked_bilateral(
    inv: &InvertedDepthMap,
    size: usize,
    sigma_range: f64,
    sigma_space: f64,
) -> InvertedDepthMap {
    let kernel = gaussian_kernel(size, sigma_space);
    let denom = 2.0 * sigma_range * sigma_range;
    convolve(
        inv,
        size,
        move |center, value, spatial| {
            let d = center - value;
            spatial * (-(d * d) / denom).exp()
        },
        &kernel,
    )
}

fn convolve<F>(inv: &InvertedDepthMap, size: usize, weight: F, spatial: &[f64]) -> InvertedDepthMap
where
    F: Fn(f64, f64, f64) -> f64,
{
    let (w, h) = inv.dims();
    let r = (size / 2) as isize;
    let src = inv.as_slice();
    let mut out = src.to_vec();
    for y in 0..h {
        for x in 0..w {
            let center = src[y * w + x];
            if center <= 0.0 {
                continue;
            }
            let (mut acc, mut norm) = (0.0, 0.0);
            let mut k = 0;
            for dy in -r..=r {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in -r..=r {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    let v = src[yy * w + xx];
                    if v > 0.0 {
                        let wt = weight(center, v, spatial[k]);
                        acc += wt * v;
                        norm += wt;
                    }
                    k += 1;
                }
            }
            // the center cell always contributes, so norm > 0
            out[y * w + x] = acc / norm;
        }
    }
    inv.with_values(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, v: Vec<f64>) -> InvertedDepthMap {
        InvertedDepthMap::from_values(w, h, 100.0, v).unwrap()
    }

    fn step(w: usize, h: usize, split: usize) -> InvertedDepthMap {
        let v = (0..w * h)
            .map(|p| if p % w < split { 80.0 } else { 20.0 })
            .collect();
        map(w, h, v)
    }

    #[test]
    fn kernel_sums_to_one() {
        let k = gaussian_kernel(5, 1.1);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k[12] > k[0]);
    }

    #[test]
    fn constant_map_unchanged() {
        let m = map(6, 5, vec![42.0; 30]);
        let g = gaussian_blur(&m, 5, 1.0).unwrap();
        let b = bilateral_blur(&m, 5, 1.5, 2.0).unwrap();
        for (a, c) in g.as_slice().iter().zip(b.as_slice()) {
            assert!((a - 42.0).abs() < 1e-12 && (c - 42.0).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_reproduces_kernel() {
        // linearity: background 1 plus an impulse of height 1 at the center
        let mut v = vec![1.0; 81];
        v[40] = 2.0;
        let out = gaussian_blur(&map(9, 9, v), 5, 1.3).unwrap();
        let k = gaussian_kernel(5, 1.3);
        for dy in 0..5 {
            for dx in 0..5 {
                let got = out.get(2 + dx, 2 + dy) - 1.0;
                assert!((got - k[(4 - dy) * 5 + (4 - dx)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_creates_intermediate_values_at_edges() {
        let out = gaussian_blur(&step(10, 4, 5), 5, 1.1).unwrap();
        let mid = out.get(4, 1);
        assert!(mid > 20.5 && mid < 79.5, "{mid}");
    }

    #[test]
    fn bilateral_keeps_edges() {
        let out = bilateral_blur(&step(10, 4, 5), 5, 1.5, 2.0).unwrap();
        for y in 0..4 {
            assert!((out.get(4, y) - 80.0).abs() < 0.5);
            assert!((out.get(5, y) - 20.0).abs() < 0.5);
        }
    }

    #[test]
    fn bilateral_converges_to_gaussian() {
        let v: Vec<f64> = (0..81).map(|i| 1.0 + ((i * 37) % 50) as f64).collect();
        let m = map(9, 9, v);
        let g = gaussian_blur(&m, 5, 2.0).unwrap();
        let b = bilateral_blur(&m, 5, 1e6, 2.0).unwrap();
        for (a, c) in g.as_slice().iter().zip(b.as_slice()) {
            assert!((a - c).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_pixels_rejected() {
        let m = map(2, 1, vec![0.0, 5.0]);
        assert!(matches!(
            gaussian_blur(&m, 3, 1.0),
            Err(PdcError::InvalidPixelsPresent { count: 1 })
        ));
        assert!(bilateral_blur(&m, 3, 1.0, 1.0).is_err());
        assert!(gaussian_blur(&map(1, 1, vec![1.0]), 4, 1.0).is_err());
        assert!(gaussian_blur(&map(1, 1, vec![1.0]), 3, 0.0).is_err());
    }

    #[test]
    fn masked_variant_skips_holes() {
        let m = map(3, 1, vec![10.0, 0.0, 30.0]);
        let out = masked_gaussian(&m, 5, 1.0);
        assert_eq!(out.get(1, 0), 0.0);
        assert!(out.get(0, 0) > 10.0 && out.get(0, 0) < 30.0);
    }
}
