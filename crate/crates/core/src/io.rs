//! PNG ingestion and export in the KITTI depth-completion conventions:
//! depth is a 16-bit single-channel image holding `round(256 * meters)`,
//! with `0` meaning "no measurement"; color is 8-bit RGB.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use crate::depth::{DepthMap, RgbImage};
use crate::error::{PdcError, Result};

/// Depth quantization step of the 16-bit format.
pub const DEPTH_SCALE: f64 = 256.0;

fn open(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| PdcError::io(path, e))?;
    let reader = reader
        .with_guessed_format()
        .map_err(|e| PdcError::io(path, e))?;
    reader.decode().map_err(|e| PdcError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn sample_bits(img: &DynamicImage) -> (u16, u8) {
    let color = img.color();
    let channels = color.channel_count();
    let bits = u16::from(color.bytes_per_pixel()) * 8 / u16::from(channels);
    (bits, channels)
}

/// Reads a 16-bit KITTI depth png.
pub fn read_depth_png(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let img = open(path)?;
    let (bits, channels) = sample_bits(&img);
    if bits != 16 {
        return Err(PdcError::WrongBitDepth { found: bits });
    }
    if channels != 1 {
        return Err(PdcError::WrongChannelCount {
            expected: 1,
            found: channels,
        });
    }
    let luma = img.into_luma16();
    let (w, h) = (luma.width() as usize, luma.height() as usize);
    Ok(depth_from_raw(w, h, luma.as_raw()))
}

/// Converts raw 16-bit samples to metric depth.
pub fn depth_from_raw(width: usize, height: usize, raw: &[u16]) -> DepthMap {
    let depth = raw
        .iter()
        .map(|&r| (f64::from(r) / DEPTH_SCALE) as f32)
        .collect();
    DepthMap::from_depths(width, height, depth).expect("raw samples are finite and non-negative")
}

/// Quantizes to raw 16-bit samples. Fails when a valid depth would round to
/// zero or overflow the format.
pub fn depth_to_raw(map: &DepthMap) -> Result<Vec<u16>> {
    let w = map.width();
    map.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d <= 0.0 {
                return Ok(0);
            }
            // round half up; depths are positive
            let raw = (f64::from(d) * DEPTH_SCALE + 0.5).floor();
            if raw < 1.0 || raw > f64::from(u16::MAX) {
                Err(PdcError::DepthNotEncodable {
                    x: i % w,
                    y: i / w,
                    depth: f64::from(d),
                })
            } else {
                Ok(raw as u16)
            }
        })
        .collect()
}

/// PNG bytes for a depth map. Encoding is deterministic.
pub fn encode_depth_png(map: &DepthMap) -> Result<Vec<u8>> {
    let raw = depth_to_raw(map)?;
    // 16-bit samples are handed to the encoder in native byte order.
    let bytes: Vec<u8> = raw.iter().flat_map(|v| v.to_ne_bytes()).collect();
    encode(
        &bytes,
        map.width(),
        map.height(),
        ExtendedColorType::L16,
        Path::new("<memory>"),
    )
}

pub fn write_depth_png(map: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_depth_png(map)?;
    std::fs::write(path, bytes).map_err(|e| PdcError::io(path, e))
}

/// Reads an 8-bit RGB png. An alpha channel, if present, is dropped.
pub fn read_rgb_png(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = open(path)?;
    let (bits, channels) = sample_bits(&img);
    if bits != 8 {
        return Err(PdcError::WrongBitDepth { found: bits });
    }
    if channels < 3 {
        return Err(PdcError::WrongChannelCount {
            expected: 3,
            found: channels,
        });
    }
    let rgb = img.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RgbImage::from_pixels(w, h, pixels)
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    encode(
        &bytes,
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
        Path::new("<memory>"),
    )
}

pub fn write_rgb_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_rgb_png(img)?;
    std::fs::write(path, bytes).map_err(|e| PdcError::io(path, e))
}

fn encode(
    bytes: &[u8],
    width: usize,
    height: usize,
    color: ExtendedColorType,
    path: &Path,
) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    PngEncoder::new(&mut out)
        .write_image(bytes, width as u32, height as u32, color)
        .map_err(|e| PdcError::Encode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    Ok(out.into_inner())
}
