//! Binary defect masks for sinograms.
//!
//! Segmentation strategies implement [`Segmenter`] and are looked up by name
//! in a [`SegmenterRegistry`]. The built-in strategies are:
//!
//! * `oracle` – thresholds the difference to the clean sinogram (the label rule),
//! * `threshold` – noise-adaptive threshold against a reference sinogram,
//! * `degraded` – the oracle mask with simulated segmentation errors,
//! * `external` – a mask produced elsewhere, read from disk.

mod degrade;
mod external;
mod oracle;
mod threshold;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

pub use degrade::{degrade_for_quality, degrade_mask, DegradedSegmenter};
pub use external::{load_mask, ExternalSegmenter};
pub use oracle::{label_eps, oracle_segment, OracleSegmenter, LABEL_EPS_FRACTION};
pub use threshold::{threshold_segment, ThresholdSegmenter};

/// Everything a strategy may look at for one sample.
#[derive(Debug, Clone, Copy)]
pub struct SegmentInput<'a> {
    pub sino: &'a Raster,
    /// Defect-free (nominal) sinogram, when available.
    pub clean_sino: Option<&'a Raster>,
    pub external_mask: Option<&'a Path>,
    pub seed: u64,
}

impl<'a> SegmentInput<'a> {
    pub fn new(sino: &'a Raster) -> Self {
        Self {
            sino,
            clean_sino: None,
            external_mask: None,
            seed: 0,
        }
    }

    pub(crate) fn require_clean(&self, who: &str) -> Result<&'a Raster> {
        self.clean_sino
            .ok_or_else(|| Error::Argument(format!("{who} segmenter needs a clean sinogram")))
    }
}

pub trait Segmenter: Send + Sync {
    fn name(&self) -> &'static str;
    fn segment(&self, input: &SegmentInput<'_>) -> Result<Raster>;
}

/// Tunables shared by the built-in strategies; each reads what it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterParams {
    /// Label threshold; `None` uses `1e-3 · max(sino)`.
    pub eps: Option<f32>,
    /// Multiplier on the noise sigma for `threshold`.
    pub k: f64,
    pub p_fn: Option<f64>,
    pub p_fp: Option<f64>,
    /// Used by `degraded` when `p_fn`/`p_fp` are not given.
    pub target_recall: f64,
    pub target_precision: f64,
}

impl Default for SegmenterParams {
    fn default() -> Self {
        Self {
            eps: None,
            k: 5.0,
            p_fn: None,
            p_fp: None,
            target_recall: 0.926,
            target_precision: 0.999,
        }
    }
}

type Factory = fn(&SegmenterParams) -> Result<Box<dyn Segmenter>>;

pub struct SegmenterRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

impl Default for SegmenterRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl SegmenterRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("oracle", |p| Ok(Box::new(OracleSegmenter { eps: p.eps })));
        reg.register("threshold", |p| {
            if !(p.k > 0.0) {
                return Err(Error::Argument(format!("threshold k must be > 0, got {}", p.k)));
            }
            Ok(Box::new(ThresholdSegmenter { k: p.k }))
        });
        reg.register("degraded", |p| Ok(Box::new(DegradedSegmenter::from_params(p)?)));
        reg.register("external", |_| Ok(Box::new(ExternalSegmenter)));
        reg
    }

    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn create(&self, name: &str, params: &SegmenterParams) -> Result<Box<dyn Segmenter>> {
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::Validation(format!(
                "unknown segmentation method {name:?} (known: {})",
                self.names().join(", ")
            ))
        })?;
        factory(params)
    }
}
