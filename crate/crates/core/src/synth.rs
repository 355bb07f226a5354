//! Synthetic scenes with exact ground truth.
//!
//! Scenes are piecewise constant in depth, and every surface has a color
//! whose gray value differs from every other surface by at least
//! [`MIN_GRAY_SEPARATION`], so color edges and depth edges coincide.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::depth::{luma, DepthMap, RgbImage};
use crate::error::{PdcError, Result};

pub const MIN_GRAY_SEPARATION: u8 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    /// Meters.
    pub depth: f32,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Rectangle {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    Disk {
        cx: usize,
        cy: usize,
        radius: usize,
    },
}

impl Shape {
    fn contains(&self, px: usize, py: usize) -> bool {
        match *self {
            Shape::Rectangle {
                x,
                y,
                width,
                height,
            } => px >= x && px < x + width && py >= y && py < y + height,
            Shape::Disk { cx, cy, radius } => {
                let dx = px.abs_diff(cx);
                let dy = py.abs_diff(cy);
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    fn fits(&self, w: usize, h: usize) -> bool {
        match *self {
            Shape::Rectangle {
                x,
                y,
                width,
                height,
            } => width > 0 && height > 0 && x + width <= w && y + height <= h,
            Shape::Disk { cx, cy, radius } => {
                radius > 0 && cx >= radius && cy >= radius && cx + radius < w && cy + radius < h
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    #[serde(flatten)]
    pub shape: Shape,
    pub depth: f32,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background: Surface,
    /// Painted in order; later objects occlude earlier ones.
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    /// A centered rectangle at 5 m in front of a 20 m background.
    pub fn two_plane(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            background: Surface {
                depth: 20.0,
                color: [60, 90, 140],
            },
            objects: vec![SceneObject {
                shape: Shape::Rectangle {
                    x: width / 4,
                    y: height / 4,
                    width: width / 2,
                    height: height / 2,
                },
                depth: 5.0,
                color: [220, 180, 60],
            }],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(PdcError::InvalidScene("empty frame".into()));
        }
        let check_depth = |d: f32| {
            if !(d.is_finite() && d > 0.0) {
                Err(PdcError::InvalidScene(format!("depth {d} must be positive")))
            } else {
                Ok(())
            }
        };
        check_depth(self.background.depth)?;
        let mut grays = vec![luma(self.background.color)];
        for (i, o) in self.objects.iter().enumerate() {
            check_depth(o.depth)?;
            if o.depth == self.background.depth {
                return Err(PdcError::InvalidScene(format!(
                    "object {i} has the background depth"
                )));
            }
            if !o.shape.fits(self.width, self.height) {
                return Err(PdcError::InvalidScene(format!("object {i} leaves the frame")));
            }
            grays.push(luma(o.color));
        }
        for i in 0..grays.len() {
            for j in i + 1..grays.len() {
                if grays[i].abs_diff(grays[j]) < MIN_GRAY_SEPARATION {
                    return Err(PdcError::InvalidScene(format!(
                        "surfaces {i} and {j} differ by less than {MIN_GRAY_SEPARATION} gray levels"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Renders the color image and the dense ground-truth depth.
pub fn gen_scene(spec: &SceneSpec) -> Result<(RgbImage, DepthMap)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rgb = RgbImage::new(w, h, spec.background.color);
    let mut depth = vec![spec.background.depth; w * h];
    for o in &spec.objects {
        for y in 0..h {
            for x in 0..w {
                if o.shape.contains(x, y) {
                    rgb.put(x, y, o.color);
                    depth[y * w + x] = o.depth;
                }
            }
        }
    }
    Ok((rgb, DepthMap::from_depths(w, h, depth)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LidarStyle {
    /// Samples only rows that are multiples of `spacing`.
    Scanlines,
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarPattern {
    pub style: LidarStyle,
    /// Fraction of all frame pixels that receive a measurement, in `(0, 1]`.
    pub density: f64,
    /// Row spacing for [`LidarStyle::Scanlines`].
    #[serde(default = "default_spacing")]
    pub spacing: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_spacing() -> usize {
    4
}

impl LidarPattern {
    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(PdcError::InvalidArgument(format!(
                "density must be in (0, 1], got {}",
                self.density
            )));
        }
        if self.spacing == 0 {
            return Err(PdcError::InvalidArgument("spacing must be >= 1".into()));
        }
        Ok(())
    }
}

/// Keeps `round(density * pixels)` measurements of `gt` (capped by the
/// number of eligible pixels), chosen uniformly by the pattern's seed.
pub fn sample_lidar(gt: &DepthMap, pattern: &LidarPattern) -> Result<DepthMap> {
    pattern.validate()?;
    if gt.invalid_count() > 0 {
        return Err(PdcError::InvalidArgument(
            "ground truth must be dense to sample from".into(),
        ));
    }
    let (w, h) = gt.dims();
    let eligible: Vec<usize> = match pattern.style {
        LidarStyle::UniformRandom => (0..w * h).collect(),
        LidarStyle::Scanlines => (0..h)
            .step_by(pattern.spacing)
            .flat_map(|y| (0..w).map(move |x| y * w + x))
            .collect(),
    };
    let want = ((pattern.density * (w * h) as f64).round() as usize).clamp(1, eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(pattern.seed);
    let mut out = DepthMap::empty(w, h);
    for i in index::sample(&mut rng, eligible.len(), want) {
        let p = eligible[i];
        out.set(p % w, p / w, gt.get(p % w, p / w));
    }
    Ok(out)
}

/// Pixels whose completed depth is not (within 1e-9 m) one of the sparse
/// input depths.
pub fn oracle_value_provenance(sparse: &DepthMap, completed: &DepthMap) -> Vec<(usize, usize)> {
    assert_eq!(sparse.dims(), completed.dims(), "maps differ in size");
    let mut values: Vec<f64> = sparse
        .as_slice()
        .iter()
        .filter(|&&d| d > 0.0)
        .map(|&d| f64::from(d))
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let known = |d: f64| {
        let i = values.partition_point(|&v| v < d);
        [i.wrapping_sub(1), i]
            .iter()
            .filter_map(|&j| values.get(j))
            .any(|&v| (v - d).abs() <= 1e-9)
    };
    let w = completed.width();
    completed
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0 && !known(f64::from(d)))
        .map(|(p, _)| (p % w, p / w))
        .collect()
}

/// Ranges for [`random_scene`]. All ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSceneOptions {
    pub width: (usize, usize),
    pub height: (usize, usize),
    pub objects: (usize, usize),
    /// Smallest object side (or diameter), pixels.
    pub min_object_size: usize,
    pub density: (f64, f64),
    /// `None` picks one per scene.
    pub style: Option<LidarStyle>,
    pub spacing: (usize, usize),
}

impl Default for RandomSceneOptions {
    fn default() -> Self {
        Self {
            width: (128, 256),
            height: (64, 128),
            objects: (2, 5),
            min_object_size: 16,
            density: (0.05, 0.20),
            style: None,
            spacing: (2, 4),
        }
    }
}

impl RandomSceneOptions {
    /// Scanline coverage whose row gaps survive the initial dilation but are
    /// narrow enough for a set-wide close to bridge. Superpixels lying wholly
    /// inside a gap have no measurement of their own.
    pub fn gap_scenes() -> Self {
        Self {
            width: (160, 256),
            height: (96, 128),
            objects: (2, 4),
            min_object_size: 16,
            density: (1.0, 1.0),
            style: Some(LidarStyle::Scanlines),
            spacing: (8, 9),
        }
    }
}

/// Gray levels spaced widely enough that any two picks, perturbed by at
/// most 3 levels, stay [`MIN_GRAY_SEPARATION`] apart.
const GRAY_SLOTS: [u8; 7] = [18, 54, 90, 126, 162, 198, 234];

fn color_with_gray(rng: &mut ChaCha8Rng, target: u8) -> [u8; 3] {
    for _ in 0..64 {
        let dr: i32 = rng.gen_range(-40..=40);
        let db: i32 = rng.gen_range(-40..=40);
        let dg = (-(299 * dr + 114 * db) as f64 / 587.0).round() as i32;
        let t = i32::from(target);
        let c = [t + dr, t + dg, t + db].map(|v| v.clamp(0, 255) as u8);
        if luma(c).abs_diff(target) <= 3 {
            return c;
        }
    }
    [target; 3]
}

fn grid_depth(rng: &mut ChaCha8Rng, lo: f32, hi: f32) -> f32 {
    // quantized to the 16-bit png step so files reproduce the scene exactly
    let raw = rng.gen_range((lo * 256.0) as u32..=(hi * 256.0) as u32);
    raw as f32 / 256.0
}

/// A random valid scene together with a LiDAR pattern, both fixed by `seed`.
pub fn random_scene(seed: u64, opts: &RandomSceneOptions) -> (SceneSpec, LidarPattern) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = rng.gen_range(opts.width.0..=opts.width.1);
    let height = rng.gen_range(opts.height.0..=opts.height.1);
    let n_objects = rng
        .gen_range(opts.objects.0..=opts.objects.1)
        .min(GRAY_SLOTS.len() - 1);

    let picks: Vec<u8> = index::sample(&mut rng, GRAY_SLOTS.len(), n_objects + 1)
        .into_iter()
        .map(|i| GRAY_SLOTS[i])
        .collect();

    let background = Surface {
        depth: grid_depth(&mut rng, 25.0, 60.0),
        color: color_with_gray(&mut rng, picks[0]),
    };
    let mut used_depths = vec![background.depth];
    let min = opts.min_object_size.max(2);
    let mut objects = Vec::with_capacity(n_objects);
    for &gray in &picks[1..] {
        let depth = loop {
            let d = grid_depth(&mut rng, 3.0, 24.0);
            if !used_depths.contains(&d) {
                break d;
            }
        };
        used_depths.push(depth);
        let max_w = (width / 2).max(min);
        let max_h = (height / 2).max(min);
        let shape = if rng.gen_bool(0.5) {
            let w = rng.gen_range(min..=max_w.min(width));
            let h = rng.gen_range(min..=max_h.min(height));
            Shape::Rectangle {
                x: rng.gen_range(0..=width - w),
                y: rng.gen_range(0..=height - h),
                width: w,
                height: h,
            }
        } else {
            let r_max = (max_w.min(max_h) / 2).max(min / 2).min((width.min(height) - 1) / 2);
            let radius = rng.gen_range((min / 2).min(r_max)..=r_max).max(1);
            Shape::Disk {
                cx: rng.gen_range(radius..width - radius),
                cy: rng.gen_range(radius..height - radius),
                radius,
            }
        };
        objects.push(SceneObject {
            shape,
            depth,
            color: color_with_gray(&mut rng, gray),
        });
    }

    let style = opts.style.unwrap_or(if rng.gen_bool(0.5) {
        LidarStyle::Scanlines
    } else {
        LidarStyle::UniformRandom
    });
    let spacing = rng.gen_range(opts.spacing.0..=opts.spacing.1);
    let mut density = rng.gen_range(opts.density.0..=opts.density.1);
    if style == LidarStyle::Scanlines {
        // cannot sample more than the scanline rows hold
        density = density.min(1.0 / spacing as f64);
    }
    let spec = SceneSpec {
        width,
        height,
        background,
        objects,
        seed,
    };
    let pattern = LidarPattern {
        style,
        density,
        spacing,
        seed: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0x5EED,
    };
    (spec, pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scene_is_uniform() {
        let spec = SceneSpec {
            width: 8,
            height: 4,
            background: Surface {
                depth: 12.0,
                color: [1, 2, 3],
            },
            objects: vec![],
            seed: 0,
        };
        let (rgb, depth) = gen_scene(&spec).unwrap();
        assert!(rgb.pixels().iter().all(|&c| c == [1, 2, 3]));
        assert!(depth.as_slice().iter().all(|&d| d == 12.0));
    }

    #[test]
    fn two_plane_edges_coincide() {
        let (rgb, depth) = gen_scene(&SceneSpec::two_plane(40, 20)).unwrap();
        let mut values: Vec<f32> = depth.as_slice().to_vec();
        values.sort_by(f32::total_cmp);
        values.dedup();
        assert_eq!(values, vec![5.0, 20.0]);
        for y in 0..20 {
            for x in 0..40 {
                assert_eq!(depth.get(x, y) == Some(5.0), rgb.get(x, y) == [220, 180, 60]);
            }
        }
    }

    #[test]
    fn later_objects_occlude() {
        let mut spec = SceneSpec::two_plane(40, 20);
        spec.objects.push(SceneObject {
            shape: Shape::Disk {
                cx: 20,
                cy: 10,
                radius: 3,
            },
            depth: 2.0,
            color: [255, 255, 255],
        });
        let (rgb, depth) = gen_scene(&spec).unwrap();
        assert_eq!(depth.get(20, 10), Some(2.0));
        assert_eq!(rgb.get(20, 10), [255, 255, 255]);
        assert_eq!(depth.get(11, 6), Some(5.0));
    }

    #[test]
    fn invalid_scenes_are_rejected() {
        let mut s = SceneSpec::two_plane(40, 20);
        s.objects[0].color = [70, 90, 140];
        assert!(matches!(gen_scene(&s), Err(PdcError::InvalidScene(_))));
        let mut s = SceneSpec::two_plane(40, 20);
        s.objects[0].depth = 20.0;
        assert!(s.validate().is_err());
        let mut s = SceneSpec::two_plane(40, 20);
        s.objects[0].shape = Shape::Rectangle {
            x: 30,
            y: 0,
            width: 20,
            height: 5,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn sampling_examples() {
        let (_, gt) = gen_scene(&SceneSpec::two_plane(100, 100)).unwrap();
        let full = LidarPattern {
            style: LidarStyle::UniformRandom,
            density: 1.0,
            spacing: 1,
            seed: 3,
        };
        assert_eq!(sample_lidar(&gt, &full).unwrap(), gt);

        let lines = LidarPattern {
            style: LidarStyle::Scanlines,
            density: 0.2,
            spacing: 4,
            seed: 3,
        };
        let s = sample_lidar(&gt, &lines).unwrap();
        for y in 0..100 {
            for x in 0..100 {
                if s.is_valid(x, y) {
                    assert_eq!(y % 4, 0);
                    assert_eq!(s.get(x, y), gt.get(x, y));
                }
            }
        }

        let random = LidarPattern {
            style: LidarStyle::UniformRandom,
            density: 0.1,
            spacing: 1,
            seed: 7,
        };
        let a = sample_lidar(&gt, &random).unwrap();
        assert_eq!(a.valid_count(), 1000);
        assert_eq!(a, sample_lidar(&gt, &random).unwrap());
        assert!(sample_lidar(&gt, &LidarPattern { density: 0.0, ..random }).is_err());
    }

    #[test]
    fn provenance_oracle_examples() {
        let sparse = DepthMap::from_depths(4, 1, vec![5.0, 0.0, 20.0, 0.0]).unwrap();
        let filled = DepthMap::from_depths(4, 1, vec![5.0, 5.0, 20.0, 20.0]).unwrap();
        assert!(oracle_value_provenance(&sparse, &filled).is_empty());
        let mixed = DepthMap::from_depths(4, 1, vec![5.0, 12.5, 20.0, 20.0]).unwrap();
        assert_eq!(oracle_value_provenance(&sparse, &mixed), vec![(1, 0)]);
    }

    #[test]
    fn random_scenes_are_valid_and_reproducible() {
        let opts = RandomSceneOptions::default();
        for seed in 0..50 {
            let (spec, pattern) = random_scene(seed, &opts);
            spec.validate().unwrap();
            pattern.validate().unwrap();
            assert!(spec.width <= 256 && spec.height <= 128);
            assert!((2..=5).contains(&spec.objects.len()));
            assert!(pattern.density >= 0.05 - 1e-12 && pattern.density <= 0.2);
            assert_eq!(random_scene(seed, &opts), (spec, pattern));
        }
    }

    #[test]
    fn blurred_step_has_violations_at_the_edge() {
        let spec = SceneSpec {
            width: 12,
            height: 6,
            background: Surface {
                depth: 20.0,
                color: [0, 0, 0],
            },
            objects: vec![SceneObject {
                shape: Shape::Rectangle {
                    x: 0,
                    y: 0,
                    width: 6,
                    height: 6,
                },
                depth: 5.0,
                color: [255, 255, 255],
            }],
            seed: 0,
        };
        let (_, gt) = gen_scene(&spec).unwrap();
        let inv = gt.invert(crate::depth::DEFAULT_MAX_DEPTH).unwrap();
        let blurred = crate::filter::gaussian_blur(&inv, 5, 1.1).unwrap().uninvert();
        let bad = oracle_value_provenance(&gt, &blurred);
        assert!(!bad.is_empty());
        assert!(bad.iter().all(|&(x, _)| (4..=7).contains(&x)));
    }
}
