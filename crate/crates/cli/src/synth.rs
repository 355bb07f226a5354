use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pdc_core::io::{encode_depth_png, encode_rgb_png};
use pdc_core::synth::{gen_scene, random_scene, sample_lidar, RandomSceneOptions};
use pdc_core::{LidarPattern, LidarStyle, SceneSpec};
use serde::{Deserialize, Serialize};

use crate::files::write_atomic;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scene files (TOML).
    pub specs: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Also generate this many random scenes.
    #[arg(long, default_value_t = 0, value_name = "N")]
    pub random: u64,
    /// First seed of the random scenes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw random scenes with narrow scanline gaps.
    #[arg(long)]
    pub gap_scenes: bool,
}

/// A scene plus the LiDAR pattern to sample it with. Without a `[lidar]`
/// table the scene is sampled uniformly at 10% with the scene's seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(flatten)]
    pub scene: SceneSpec,
    pub lidar: Option<LidarPattern>,
}

impl SceneFile {
    fn pattern(&self) -> LidarPattern {
        self.lidar.unwrap_or(LidarPattern {
            style: LidarStyle::UniformRandom,
            density: 0.1,
            spacing: 1,
            seed: self.scene.seed,
        })
    }
}

fn render(out: &Path, name: &str, file: &SceneFile) -> Result<()> {
    let (rgb, gt) = gen_scene(&file.scene).with_context(|| format!("scene {name}"))?;
    let sparse = sample_lidar(&gt, &file.pattern()).with_context(|| format!("scene {name}"))?;
    let png = format!("{name}.png");
    write_atomic(&out.join("rgb").join(&png), &encode_rgb_png(&rgb)?)?;
    write_atomic(&out.join("sparse").join(&png), &encode_depth_png(&sparse)?)?;
    write_atomic(&out.join("gt").join(&png), &encode_depth_png(&gt)?)?;
    Ok(())
}

pub fn run(args: &Args) -> Result<()> {
    if args.specs.is_empty() && args.random == 0 {
        bail!("nothing to render: pass scene files or --random N");
    }
    let mut scenes = Vec::new();
    for path in &args.specs {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let file: SceneFile =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scene".into());
        scenes.push((name, file));
    }
    let opts = if args.gap_scenes {
        RandomSceneOptions::gap_scenes()
    } else {
        RandomSceneOptions::default()
    };
    for seed in args.seed..args.seed + args.random {
        let (scene, lidar) = random_scene(seed, &opts);
        let file = SceneFile {
            scene,
            lidar: Some(lidar),
        };
        let name = format!("scene_{seed:05}");
        // keep the drawn parameters so a random scene can be re-rendered alone
        write_atomic(
            &args.out.join("specs").join(format!("{name}.toml")),
            toml::to_string(&file)?.as_bytes(),
        )?;
        scenes.push((name, file));
    }
    for (name, file) in &scenes {
        render(&args.out, name, file)?;
    }
    log::info!("rendered {} scene(s) into {}", scenes.len(), args.out.display());
    Ok(())
}
