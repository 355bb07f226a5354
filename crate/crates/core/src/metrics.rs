//! Error metrics in millimeters, error-map rendering, and the count of
//! depths stranded between two surfaces.

use serde::Serialize;

use crate::depth::{DepthMap, RgbImage};
use crate::error::{PdcError, Result};

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub rmse_mm: f64,
    pub mae_mm: f64,
    /// Pixels valid in both maps.
    pub evaluated_pixels: usize,
    /// Ground-truth pixels the prediction left invalid.
    pub invalid_prediction_pixels: usize,
}

/// Compares `pred` against `gt` over the pixels valid in both.
pub fn evaluate(pred: &DepthMap, gt: &DepthMap) -> Result<EvalResult> {
    if pred.dims() != gt.dims() {
        return Err(PdcError::mismatch(pred.dims(), gt.dims()));
    }
    let mut sq = CompensatedSum::default();
    let mut abs = CompensatedSum::default();
    let (mut n, mut missing) = (0usize, 0usize);
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        if g <= 0.0 {
            continue;
        }
        if p <= 0.0 {
            missing += 1;
            continue;
        }
        let e = f64::from(p) - f64::from(g);
        sq.add(e * e);
        abs.add(e.abs());
        n += 1;
    }
    if n == 0 {
        return Err(PdcError::NoOverlap);
    }
    Ok(EvalResult {
        rmse_mm: (sq.value() / n as f64).sqrt() * 1000.0,
        mae_mm: abs.value() / n as f64 * 1000.0,
        evaluated_pixels: n,
        invalid_prediction_pixels: missing,
    })
}

/// Frame-level aggregate: metrics are averaged over frames, pixel counts
/// summed.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalAggregate {
    frames: usize,
    rmse: CompensatedSum,
    mae: CompensatedSum,
    evaluated: usize,
    missing: usize,
}

impl EvalAggregate {
    pub fn push(&mut self, r: &EvalResult) {
        self.frames += 1;
        self.rmse.add(r.rmse_mm);
        self.mae.add(r.mae_mm);
        self.evaluated += r.evaluated_pixels;
        self.missing += r.invalid_prediction_pixels;
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Mean over frames; `None` before the first frame.
    pub fn mean(&self) -> Option<EvalResult> {
        (self.frames > 0).then(|| EvalResult {
            rmse_mm: self.rmse.value() / self.frames as f64,
            mae_mm: self.mae.value() / self.frames as f64,
            evaluated_pixels: self.evaluated,
            invalid_prediction_pixels: self.missing,
        })
    }
}

impl<'a> FromIterator<&'a EvalResult> for EvalAggregate {
    fn from_iter<I: IntoIterator<Item = &'a EvalResult>>(iter: I) -> Self {
        let mut agg = Self::default();
        iter.into_iter().for_each(|r| agg.push(r));
        agg
    }
}

pub const ERROR_MAP_NO_GT: [u8; 3] = [0, 0, 0];
pub const ERROR_MAP_CORRECT: [u8; 3] = [0, 0, 255];
/// Ground truth present but no prediction.
pub const ERROR_MAP_MISSING: [u8; 3] = [255, 255, 255];

/// Per-pixel error visualization. Black: no ground truth. Blue: within
/// `threshold_mm`. Otherwise a ramp that runs from yellow to red for depths
/// that are too far and from yellow-green to green for depths that are too
/// near, saturating at four times the threshold.
pub fn error_map(pred: &DepthMap, gt: &DepthMap, threshold_mm: f64) -> Result<RgbImage> {
    if pred.dims() != gt.dims() {
        return Err(PdcError::mismatch(pred.dims(), gt.dims()));
    }
    let pixels = pred
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .map(|(&p, &g)| {
            if g <= 0.0 {
                return ERROR_MAP_NO_GT;
            }
            if p <= 0.0 {
                return ERROR_MAP_MISSING;
            }
            let err_mm = (f64::from(p) - f64::from(g)) * 1000.0;
            if err_mm.abs() <= threshold_mm {
                return ERROR_MAP_CORRECT;
            }
            let t = ((err_mm.abs() - threshold_mm) / (3.0 * threshold_mm)).clamp(0.0, 1.0);
            let fade = (200.0 * (1.0 - t)).round() as u8;
            if err_mm > 0.0 {
                [255, fade, 0]
            } else {
                [fade, 255, 0]
            }
        })
        .collect();
    RgbImage::from_pixels(pred.width(), pred.height(), pixels)
}

/// Number of valid pixels strictly between `d_near + margin` and
/// `d_far - margin`.
pub fn intermediate_count(pred: &DepthMap, d_near: f64, d_far: f64, margin: f64) -> Result<usize> {
    let lo = d_near + margin;
    let hi = d_far - margin;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(PdcError::InvalidArgument(format!(
            "empty band: {d_near} + {margin} must be below {d_far} - {margin}"
        )));
    }
    Ok(pred
        .as_slice()
        .iter()
        .filter(|&&d| d > 0.0 && f64::from(d) > lo && f64::from(d) < hi)
        .count())
}
