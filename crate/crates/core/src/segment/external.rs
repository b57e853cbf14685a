use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{read_raster_typed, Dtype, Raster};

use super::{SegmentInput, Segmenter};

/// Reads a mask produced outside this crate (e.g. by a trained network).
/// The file must be a uint8 container holding only 0 and 1.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Raster> {
    let (mask, dtype) = read_raster_typed(path.as_ref())?;
    if dtype != Dtype::U8 {
        return Err(Error::Format {
            field: "dtype",
            message: format!("mask {} must be uint8", path.as_ref().display()),
        });
    }
    mask.ensure_binary("mask")?;
    Ok(mask)
}

#[derive(Debug, Clone, Default)]
pub struct ExternalSegmenter;

impl Segmenter for ExternalSegmenter {
    fn name(&self) -> &'static str {
        "external"
    }

    fn segment(&self, input: &SegmentInput<'_>) -> Result<Raster> {
        let path = input
            .external_mask
            .ok_or_else(|| Error::Argument("external segmenter needs a mask path".into()))?;
        let mask = load_mask(path)?;
        mask.ensure_same_dims(input.sino, "external mask")?;
        Ok(mask)
    }
}
