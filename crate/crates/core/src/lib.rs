//! Depth completion for sparse LiDAR guided by a registered color image.
//!
//! Sparse depth is densified one superpixel neighborhood at a time with
//! masked morphology, so every filled pixel copies a measured depth from
//! its own surface instead of interpolating across an edge.

pub mod config;
pub mod depth;
pub mod error;
pub mod filter;
pub mod io;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod spgraph;
pub mod superpixel;
pub mod synth;

pub use config::{BlurKind, Kernels, PdcConfig};
pub use depth::{to_gray, DepthMap, GrayImage, InvertedDepthMap, RgbImage, DEFAULT_MAX_DEPTH};
pub use error::{PdcError, Result};
pub use metrics::{evaluate, EvalAggregate, EvalResult};
pub use morphology::{Domain, Kernel, KernelShape};
pub use pipeline::{run_pdc, run_pdc_with_report, PdcOutput, PdcReport, PdcWarning, StageTimings};
pub use spgraph::{CostMode, MatchParams};
pub use superpixel::{Labeling, SegmentationParams};
pub use synth::{LidarPattern, LidarStyle, SceneSpec};
