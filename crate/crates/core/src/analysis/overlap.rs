use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::raster::Raster;
use crate::types::{DefectEstimate, Method};

use super::Localizer;

/// Outermost foreground bins of one sinogram row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowExtent {
    pub row: usize,
    pub left: usize,
    pub right: usize,
}

impl RowExtent {
    /// Width in bins, `right - left + 1`.
    pub fn extent(&self) -> f64 {
        (self.right - self.left + 1) as f64
    }

    pub fn midline(&self) -> f64 {
        (self.left + self.right) as f64 / 2.0
    }
}

/// Per-row extent of the mask; `None` for empty rows.
pub fn extent_profile(mask: &Raster) -> Result<Vec<Option<RowExtent>>> {
    mask.ensure_binary("mask")?;
    Ok((0..mask.rows())
        .map(|row| {
            let r = mask.row(row);
            let left = r.iter().position(|&v| v != 0.0)?;
            let right = r.iter().rposition(|&v| v != 0.0)?;
            Some(RowExtent { row, left, right })
        })
        .collect())
}

/// Coefficient of variation σ/μ of the row extents.
pub fn extent_spread(mask: &Raster) -> Result<f64> {
    let ext: Vec<f64> = extent_profile(mask)?
        .into_iter()
        .flatten()
        .map(|e| e.extent())
        .collect();
    if ext.is_empty() {
        return Err(Error::Argument("extent spread of an empty mask".into()));
    }
    let n = ext.len() as f64;
    let mean = ext.iter().sum::<f64>() / n;
    let var = ext.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// Intersection of the midlines of rows `i` and `j` in image coordinates.
fn midline_intersection(g: &ScanGeometry, a: &RowExtent, b: &RowExtent) -> [f64; 2] {
    let (cx0, cy0) = g.rot_center();
    let s0 = g.det_center();
    let (sa, ca) = g.angle_of(a.row).sin_cos();
    let (sb, cb) = g.angle_of(b.row).sin_cos();
    let (ra, rb) = (a.midline() - s0, b.midline() - s0);
    // [ca sa; cb sb] · [dx; dy] = [ra; rb]
    let det = ca * sb - sa * cb;
    let dx = (ra * sb - sa * rb) / det;
    let dy = (ca * rb - ra * cb) / det;
    [cx0 + dx, cy0 + dy]
}

/// Overlap-box estimate: the narrowest projection and the one perpendicular
/// to it bound a rectangle around the defect. The midline intersection is
/// the center, the strip widths are the extents and their product the area.
///
/// With `average_pairs`, the center is averaged over every perpendicular
/// row pair in which both rows are non-empty.
pub fn overlap_box(mask: &Raster, g: &ScanGeometry, average_pairs: bool) -> Result<DefectEstimate> {
    if g.n_angles % 2 != 0 {
        return Err(Error::Argument(format!(
            "overlap box needs an even number of angles, got {}",
            g.n_angles
        )));
    }
    if mask.rows() != g.n_angles {
        return Err(Error::Argument(format!(
            "mask has {} rows but the scan has {} angles",
            mask.rows(),
            g.n_angles
        )));
    }
    let profile = extent_profile(mask)?;
    let narrowest = profile
        .iter()
        .flatten()
        .min_by(|a, b| a.extent().total_cmp(&b.extent()).then(a.row.cmp(&b.row)))
        .copied()
        .ok_or_else(|| Error::Argument("overlap box needs a non-empty mask".into()))?;
    let half = g.n_angles / 2;
    let perpendicular = profile[(narrowest.row + half) % g.n_angles].ok_or_else(|| {
        Error::Argument(format!(
            "insufficient angular coverage: row {} perpendicular to row {} is empty",
            (narrowest.row + half) % g.n_angles,
            narrowest.row
        ))
    })?;

    let center = if average_pairs {
        let centers: Vec<[f64; 2]> = (0..half)
            .filter_map(|i| match (profile[i], profile[i + half]) {
                (Some(a), Some(b)) => Some(midline_intersection(g, &a, &b)),
                _ => None,
            })
            .collect();
        let n = centers.len() as f64;
        [
            centers.iter().map(|c| c[0]).sum::<f64>() / n,
            centers.iter().map(|c| c[1]).sum::<f64>() / n,
        ]
    } else {
        midline_intersection(g, &narrowest, &perpendicular)
    };
    let (u, v) = (narrowest.extent(), perpendicular.extent());
    Ok(DefectEstimate {
        center,
        radius: None,
        extents: Some([u, v]),
        area: u * v,
        method: Method::Overlapbox,
    })
}

#[derive(Debug, Clone, Default)]
pub struct OverlapBox {
    pub average_pairs: bool,
}

impl Localizer for OverlapBox {
    fn name(&self) -> &'static str {
        if self.average_pairs {
            "overlapbox-avg"
        } else {
            "overlapbox"
        }
    }

    fn estimate(&self, mask: &Raster, g: &ScanGeometry) -> Result<DefectEstimate> {
        overlap_box(mask, g, self.average_pairs)
    }
}
