use rand::Rng;

use crate::error::{Error, Result};
use crate::phantom::rng_for;
use crate::raster::Raster;

use super::oracle::OracleSegmenter;
use super::{SegmentInput, Segmenter, SegmenterParams};

/// Background bins within this many bins (along the row) of foreground may
/// turn into false positives.
pub const FP_BAND: usize = 3;

fn band_mask(mask: &Raster) -> Vec<bool> {
    let (rows, cols) = mask.dims();
    let mut band = vec![false; rows * cols];
    for r in 0..rows {
        let row = mask.row(r);
        for c in 0..cols {
            if row[c] != 0.0 {
                continue;
            }
            let lo = c.saturating_sub(FP_BAND);
            let hi = (c + FP_BAND).min(cols - 1);
            band[r * cols + c] = row[lo..=hi].iter().any(|&v| v != 0.0);
        }
    }
    band
}

/// Simulated segmentation errors: foreground bins drop out with probability
/// `p_fn`; background bins in the band next to the foreground switch on with
/// probability `p_fp`.
pub fn degrade_mask(mask: &Raster, p_fn: f64, p_fp: f64, seed: u64) -> Result<Raster> {
    if !(0.0..=1.0).contains(&p_fn) || !(0.0..=1.0).contains(&p_fp) {
        return Err(Error::Argument(format!(
            "flip probabilities must lie in [0, 1], got p_fn={p_fn} p_fp={p_fp}"
        )));
    }
    mask.ensure_binary("mask")?;
    let band = band_mask(mask);
    let mut rng = rng_for(seed);
    let mut out = mask.clone();
    for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
        if *v != 0.0 {
            if rng.random::<f64>() < p_fn {
                *v = 0.0;
            }
        } else if band[i] && rng.random::<f64>() < p_fp {
            *v = 1.0;
        }
    }
    Ok(out)
}

/// Flip probabilities that give the requested expected recall and precision.
pub fn flip_rates_for(mask: &Raster, recall: f64, precision: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&recall) || !(0.0 < precision && precision <= 1.0) {
        return Err(Error::Argument(format!(
            "need recall in [0,1] and precision in (0,1], got {recall}, {precision}"
        )));
    }
    let fg = mask.count_nonzero() as f64;
    let band = band_mask(mask).iter().filter(|&&b| b).count() as f64;
    let p_fn = 1.0 - recall;
    let tp = recall * fg;
    let fp = tp * (1.0 / precision - 1.0);
    let p_fp = if band > 0.0 { (fp / band).min(1.0) } else { 0.0 };
    Ok((p_fn, p_fp))
}

/// [`degrade_mask`] with rates chosen by [`flip_rates_for`].
pub fn degrade_for_quality(mask: &Raster, recall: f64, precision: f64, seed: u64) -> Result<Raster> {
    let (p_fn, p_fp) = flip_rates_for(mask, recall, precision)?;
    degrade_mask(mask, p_fn, p_fp, seed)
}

#[derive(Debug, Clone)]
pub struct DegradedSegmenter {
    pub oracle: OracleSegmenter,
    /// Explicit `(p_fn, p_fp)`; otherwise derived from the quality targets.
    pub rates: Option<(f64, f64)>,
    pub recall: f64,
    pub precision: f64,
}

impl DegradedSegmenter {
    pub fn from_params(p: &SegmenterParams) -> Result<Self> {
        let rates = match (p.p_fn, p.p_fp) {
            (None, None) => None,
            (a, b) => Some((a.unwrap_or(0.0), b.unwrap_or(0.0))),
        };
        Ok(Self {
            oracle: OracleSegmenter { eps: p.eps },
            rates,
            recall: p.target_recall,
            precision: p.target_precision,
        })
    }
}

impl Segmenter for DegradedSegmenter {
    fn name(&self) -> &'static str {
        "degraded"
    }

    fn segment(&self, input: &SegmentInput<'_>) -> Result<Raster> {
        let mask = self.oracle.segment(input)?;
        match self.rates {
            Some((p_fn, p_fp)) => degrade_mask(&mask, p_fn, p_fp, input.seed),
            None => degrade_for_quality(&mask, self.recall, self.precision, input.seed),
        }
    }
}
