use crate::error::Result;
use crate::raster::Raster;

use super::{SegmentInput, Segmenter};

pub const LABEL_EPS_FRACTION: f32 = 1e-3;

/// Default label threshold: `1e-3 · max(sino)`.
pub fn label_eps(sino: &Raster) -> f32 {
    LABEL_EPS_FRACTION * sino.max().max(0.0)
}

/// Mask of bins where `defected - clean > eps`.
pub fn oracle_segment(clean_sino: &Raster, defected_sino: &Raster, eps: f32) -> Result<Raster> {
    clean_sino.ensure_same_dims(defected_sino, "oracle_segment")?;
    let (rows, cols) = clean_sino.dims();
    let data = clean_sino
        .as_slice()
        .iter()
        .zip(defected_sino.as_slice())
        .map(|(&c, &d)| if d - c > eps { 1.0 } else { 0.0 })
        .collect();
    Raster::from_vec(rows, cols, data)
}

#[derive(Debug, Clone, Default)]
pub struct OracleSegmenter {
    pub eps: Option<f32>,
}

impl Segmenter for OracleSegmenter {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn segment(&self, input: &SegmentInput<'_>) -> Result<Raster> {
        let clean = input.require_clean("oracle")?;
        let eps = self.eps.unwrap_or_else(|| label_eps(input.sino));
        oracle_segment(clean, input.sino, eps)
    }
}
