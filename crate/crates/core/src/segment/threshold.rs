use crate::error::{Error, Result};
use crate::raster::Raster;

use super::oracle::label_eps;
use super::{SegmentInput, Segmenter};

/// Mask of bins where `defected - reference` exceeds `k · σ`, with σ the RMS
/// of the negative part of the difference (the noise floor, since defects
/// only add attenuation).
///
/// The threshold never drops below the label threshold `1e-3 · max(defected)`,
/// so that float rounding on noiseless data does not count as noise.
pub fn threshold_segment(defected: &Raster, reference: &Raster, k: f64) -> Result<Raster> {
    defected.ensure_same_dims(reference, "threshold_segment")?;
    if !(k > 0.0) {
        return Err(Error::Argument(format!("k must be > 0, got {k}")));
    }
    let diff: Vec<f64> = defected
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(&d, &r)| d as f64 - r as f64)
        .collect();
    let (sq, n) = diff
        .iter()
        .filter(|&&d| d < 0.0)
        .fold((0.0, 0usize), |(s, n), &d| (s + d * d, n + 1));
    let sigma = if n == 0 { 0.0 } else { (sq / n as f64).sqrt() };
    let tau = (k * sigma).max(label_eps(defected) as f64);
    log::debug!("threshold_segment: sigma={sigma:.4e} tau={tau:.4e}");
    let (rows, cols) = defected.dims();
    Raster::from_vec(
        rows,
        cols,
        diff.iter().map(|&d| if d > tau { 1.0 } else { 0.0 }).collect(),
    )
}

#[derive(Debug, Clone)]
pub struct ThresholdSegmenter {
    pub k: f64,
}

impl Segmenter for ThresholdSegmenter {
    fn name(&self) -> &'static str {
        "threshold"
    }

    fn segment(&self, input: &SegmentInput<'_>) -> Result<Raster> {
        let reference = input.require_clean("threshold")?;
        threshold_segment(input.sino, reference, self.k)
    }
}
