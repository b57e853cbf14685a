//! Splitting a union defect mask into one mask per defect.
//!
//! Pipeline: per-row run extraction, cleanup of pinholes and speckle,
//! removal of rows where traces cross, row-scan provisional labels followed
//! by a sinusoid Hough fit and relabel, and finally painting each label's
//! runs back (rows lost to crossings are rebuilt from the fitted trace).

mod dilate;
mod hough;
mod intersections;
mod reclassify;
mod skeleton;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::ScanGeometry;
use crate::raster::Raster;
use crate::types::{Skeleton, SinusoidParams};

pub use dilate::{dilate_to_masks, refill_span, Refill, RefillWidth};
pub use hough::{accumulate, hough_sinusoid, Accumulator, HoughParams, DEDUP_RADIUS};
pub use intersections::{
    link_paths, remove_intersections, run_count_percentile, LINK_TOLERANCE,
    RADIUS_OUTLIER_FACTOR,
};
pub use reclassify::{
    assign_runs, provisional_labels, reclassify, Reclassification, ReclassifyParams,
    ASSIGN_TOLERANCE,
};
pub use skeleton::{bridge_gaps, drop_narrow_runs, paint, skeletonize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceParams {
    /// Row gaps up to this many bins are closed before labeling.
    pub max_gap: usize,
    /// Runs narrower than this are discarded before labeling.
    pub min_width: usize,
    pub refill_width: RefillWidth,
    pub reclassify: ReclassifyParams,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            max_gap: 2,
            min_width: 3,
            refill_width: RefillWidth::default(),
            reclassify: ReclassifyParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instances {
    pub masks: Vec<Raster>,
    pub sinusoids: Vec<SinusoidParams>,
    /// Cleaned runs with their final labels.
    pub skeleton: Skeleton,
    pub diagnostics: Vec<String>,
}

/// Full instance separation of a binary union mask.
///
/// The sinusoids are fitted on the intersection-free skeleton; labels are
/// then assigned over all cleaned runs so that runs in rows dropped only for
/// their run count are kept when they clearly belong to one trace.
pub fn separate_instances(mask: &Raster, g: &ScanGeometry, params: &InstanceParams) -> Result<Instances> {
    let raw = skeletonize(mask)?;
    let cleaned = drop_narrow_runs(&bridge_gaps(&raw, params.max_gap), params.min_width);
    let free = remove_intersections(&cleaned);
    let rc = reclassify(&free, g, &params.reclassify)?;
    let (skeleton, sinusoids) = assign_runs(
        &cleaned,
        &rc.sinusoids,
        g,
        params.reclassify.assign_tolerance,
    );
    let masks = dilate_to_masks(&skeleton, &sinusoids, g, &Refill::Missing, params.refill_width);
    Ok(Instances {
        masks,
        sinusoids,
        skeleton,
        diagnostics: rc.diagnostics,
    })
}
