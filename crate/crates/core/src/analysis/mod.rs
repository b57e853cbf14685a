//! Center and size estimation from a single-defect sinogram mask.
//!
//! Estimators implement [`Localizer`] and are registered by name:
//! `circlebox` (fit the center trace, radius from run half-widths),
//! `overlapbox` (intersect the narrowest projection strip with its
//! perpendicular), `overlapbox-avg` (average over all perpendicular pairs)
//! and `auto` (pick one of the first two from the spread of projection
//! widths).

mod circlebox;
mod overlap;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::raster::Raster;
use crate::types::DefectEstimate;

pub use circlebox::{circlebox, CircleBox};
pub use overlap::{extent_profile, extent_spread, overlap_box, OverlapBox, RowExtent};

/// Masks whose projection widths vary less than this (σ/μ) are treated as
/// discs by the `auto` router.
pub const CIRCLE_SPREAD_MAX: f64 = 0.05;

pub trait Localizer: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, mask: &Raster, g: &ScanGeometry) -> Result<DefectEstimate>;
}

/// Routes each mask to CircleBox or the overlap box by its width spread.
pub struct AutoLocalizer {
    pub circle: CircleBox,
    pub square: OverlapBox,
    pub spread_max: f64,
}

impl Default for AutoLocalizer {
    fn default() -> Self {
        Self {
            circle: CircleBox::default(),
            square: OverlapBox::default(),
            spread_max: CIRCLE_SPREAD_MAX,
        }
    }
}

impl AutoLocalizer {
    /// Name of the strategy that would handle `mask`.
    pub fn route(&self, mask: &Raster) -> Result<&'static str> {
        let spread = extent_spread(mask)?;
        Ok(if spread <= self.spread_max {
            self.circle.name()
        } else {
            self.square.name()
        })
    }
}

impl Localizer for AutoLocalizer {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn estimate(&self, mask: &Raster, g: &ScanGeometry) -> Result<DefectEstimate> {
        if self.route(mask)? == self.circle.name() {
            self.circle.estimate(mask, g)
        } else {
            self.square.estimate(mask, g)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeHint {
    Circle,
    Square,
    Auto,
}

impl ShapeHint {
    pub fn localizer_name(self) -> &'static str {
        match self {
            ShapeHint::Circle => "circlebox",
            ShapeHint::Square => "overlapbox",
            ShapeHint::Auto => "auto",
        }
    }
}

impl std::str::FromStr for ShapeHint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(ShapeHint::Circle),
            "square" => Ok(ShapeHint::Square),
            "auto" => Ok(ShapeHint::Auto),
            other => Err(Error::Validation(format!(
                "unknown shape hint {other:?} (expected circle, square or auto)"
            ))),
        }
    }
}

type Factory = fn() -> Box<dyn Localizer>;

pub struct LocalizerRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

impl Default for LocalizerRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl LocalizerRegistry {
    pub fn builtin() -> Self {
        let mut factories: BTreeMap<&'static str, Factory> = BTreeMap::new();
        factories.insert("circlebox", || Box::new(CircleBox::default()));
        factories.insert("overlapbox", || Box::new(OverlapBox::default()));
        factories.insert("overlapbox-avg", || {
            Box::new(OverlapBox {
                average_pairs: true,
            })
        });
        factories.insert("auto", || Box::new(AutoLocalizer::default()));
        Self { factories }
    }

    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Localizer>> {
        self.factories.get(name).map(|f| f()).ok_or_else(|| {
            Error::Validation(format!(
                "unknown localization method {name:?} (known: {})",
                self.names().join(", ")
            ))
        })
    }
}

/// Estimates every mask with the strategy selected by `hint`. Masks are
/// processed concurrently; results keep the input order.
pub fn analyze(masks: &[Raster], hint: ShapeHint, g: &ScanGeometry) -> Result<Vec<DefectEstimate>> {
    let localizer = LocalizerRegistry::builtin().create(hint.localizer_name())?;
    analyze_with(masks, localizer.as_ref(), g)
}

pub fn analyze_with(
    masks: &[Raster],
    localizer: &dyn Localizer,
    g: &ScanGeometry,
) -> Result<Vec<DefectEstimate>> {
    masks
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            localizer.estimate(m, g).map_err(|e| match e {
                Error::Argument(msg) => Error::Argument(format!("mask {i}: {msg}")),
                other => other.in_sample(i),
            })
        })
        .collect()
}
