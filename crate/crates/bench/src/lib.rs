//! Fixtures for the benchmarks: KITTI-sized synthetic frames.

use pdc_core::synth::{gen_scene, random_scene, sample_lidar, RandomSceneOptions};
use pdc_core::{DepthMap, RgbImage};

pub const KITTI_WIDTH: usize = 1242;
pub const KITTI_HEIGHT: usize = 375;

/// A random scene at KITTI resolution with roughly 5% scanline coverage.
pub fn kitti_sized_frame(seed: u64) -> (RgbImage, DepthMap, DepthMap) {
    let opts = RandomSceneOptions {
        width: (KITTI_WIDTH, KITTI_WIDTH),
        height: (KITTI_HEIGHT, KITTI_HEIGHT),
        objects: (4, 6),
        min_object_size: 40,
        density: (0.05, 0.05),
        style: None,
        spacing: (4, 4),
    };
    let (spec, pattern) = random_scene(seed, &opts);
    let (rgb, gt) = gen_scene(&spec).expect("generated scenes are valid");
    let sparse = sample_lidar(&gt, &pattern).expect("ground truth is dense");
    (rgb, sparse, gt)
}
