#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdc_core::io::{write_depth_png, write_rgb_png};
use pdc_core::synth::{gen_scene, random_scene, sample_lidar, RandomSceneOptions};
use pdc_core::{DepthMap, LidarPattern, RgbImage, SceneSpec};

pub fn pdc<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_pdc"))
        .args(args)
        .output()
        .expect("run pdc")
}

pub fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "pdc failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn small_opts() -> RandomSceneOptions {
    RandomSceneOptions {
        width: (64, 112),
        height: (48, 72),
        objects: (2, 3),
        ..RandomSceneOptions::default()
    }
}

pub fn scene(seed: u64, opts: &RandomSceneOptions) -> (RgbImage, DepthMap, DepthMap) {
    let (spec, pattern) = random_scene(seed, opts);
    render(&spec, &pattern)
}

pub fn render(spec: &SceneSpec, pattern: &LidarPattern) -> (RgbImage, DepthMap, DepthMap) {
    let (rgb, gt) = gen_scene(spec).unwrap();
    let sparse = sample_lidar(&gt, pattern).unwrap();
    (rgb, sparse, gt)
}

/// Writes `DIR/{rgb,sparse,gt}/frame_NN.png` for the given seeds.
pub fn write_dataset(dir: &Path, seeds: impl IntoIterator<Item = u64>, opts: &RandomSceneOptions) {
    for sub in ["rgb", "sparse", "gt"] {
        std::fs::create_dir_all(dir.join(sub)).unwrap();
    }
    for seed in seeds {
        let (rgb, sparse, gt) = scene(seed, opts);
        let name = format!("frame_{seed:02}.png");
        write_rgb_png(&rgb, dir.join("rgb").join(&name)).unwrap();
        write_depth_png(&sparse, dir.join("sparse").join(&name)).unwrap();
        write_depth_png(&gt, dir.join("gt").join(&name)).unwrap();
    }
}

pub fn sorted_files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}
