use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::instance::{hough_sinusoid, skeletonize, HoughParams};
use crate::raster::Raster;
use crate::types::{DefectEstimate, Method};

use super::Localizer;

/// Disc estimate: the center is the strongest Hough sinusoid through the run
/// centers of the mask, the radius is the median run half-width.
pub fn circlebox(mask: &Raster, g: &ScanGeometry, hough: &HoughParams) -> Result<DefectEstimate> {
    let sk = skeletonize(mask)?;
    if sk.is_empty() {
        return Err(Error::Argument("circlebox needs a non-empty mask".into()));
    }
    let points: Vec<(usize, f64)> = sk.runs.iter().map(|r| (r.row, r.center())).collect();
    let peak = hough_sinusoid(&points, g, hough)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Argument("no center sinusoid found in mask".into()))?;
    let mut radii: Vec<f64> = sk.runs.iter().map(|r| r.radius()).collect();
    radii.sort_by(f64::total_cmp);
    let n = radii.len();
    let radius = if n % 2 == 1 {
        radii[n / 2]
    } else {
        (radii[n / 2 - 1] + radii[n / 2]) / 2.0
    };
    if !(radius > 0.0) {
        return Err(Error::Argument(
            "mask runs are single bins; radius is undefined".into(),
        ));
    }
    Ok(DefectEstimate {
        center: [peak.cx, peak.cy],
        radius: Some(radius),
        extents: None,
        area: std::f64::consts::PI * radius * radius,
        method: Method::Circlebox,
    })
}

#[derive(Debug, Clone, Default)]
pub struct CircleBox {
    pub hough: HoughParams,
}

impl Localizer for CircleBox {
    fn name(&self) -> &'static str {
        "circlebox"
    }

    fn estimate(&self, mask: &Raster, g: &ScanGeometry) -> Result<DefectEstimate> {
        circlebox(mask, g, &self.hough)
    }
}
