//! Domain values shared across stages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;

/// Defect shape. `radius` on records means circle radius or square half-side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Circle,
    Square,
}

impl Shape {
    /// Exact area of a shape with the given radius / half-side.
    pub fn area(self, radius: f64) -> f64 {
        match self {
            Shape::Circle => std::f64::consts::PI * radius * radius,
            Shape::Square => 4.0 * radius * radius,
        }
    }

    /// True when pixel `(x, y)` lies inside a shape centered at `(cx, cy)`.
    #[inline]
    pub fn contains(self, cx: f64, cy: f64, radius: f64, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - cx, y - cy);
        match self {
            Shape::Circle => dx * dx + dy * dy <= radius * radius,
            Shape::Square => dx.abs() <= radius && dy.abs() <= radius,
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Shape::Circle),
            "square" => Ok(Shape::Square),
            other => Err(Error::Validation(format!("unknown shape {other:?}"))),
        }
    }
}

/// A maximal horizontal run of foreground bins in one sinogram row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Run {
    pub row: usize,
    pub left: usize,
    /// Inclusive.
    pub right: usize,
}

impl Run {
    pub fn new(row: usize, left: usize, right: usize) -> Self {
        debug_assert!(left <= right);
        Self { row, left, right }
    }

    #[inline]
    pub fn center(&self) -> f64 {
        (self.left + self.right) as f64 / 2.0
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        (self.right - self.left) as f64 / 2.0
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }
}

/// Per-row runs of a sinogram mask with their labels.
///
/// Runs are kept sorted by `(row, left)`. Label 0 means unlabeled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Skeleton {
    pub n_rows: usize,
    pub n_cols: usize,
    pub runs: Vec<Run>,
    pub labels: Vec<u32>,
}

impl Skeleton {
    pub fn new(n_rows: usize, n_cols: usize, mut runs: Vec<Run>) -> Self {
        runs.sort_by_key(|r| (r.row, r.left));
        let labels = vec![0; runs.len()];
        Self {
            n_rows,
            n_cols,
            runs,
            labels,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    /// Index range into `runs` for every row.
    pub fn row_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut ranges = vec![0..0; self.n_rows];
        let mut i = 0;
        for (row, range) in ranges.iter_mut().enumerate() {
            let start = i;
            while i < self.runs.len() && self.runs[i].row == row {
                i += 1;
            }
            *range = start..i;
        }
        ranges
    }

    pub fn runs_per_row(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_rows];
        for r in &self.runs {
            counts[r.row] += 1;
        }
        counts
    }

    /// Keeps only the runs for which `keep` returns true, preserving labels.
    pub fn retain(&self, mut keep: impl FnMut(usize, &Run) -> bool) -> Skeleton {
        let mut runs = Vec::new();
        let mut labels = Vec::new();
        for (i, (r, &l)) in self.runs.iter().zip(&self.labels).enumerate() {
            if keep(i, r) {
                runs.push(*r);
                labels.push(l);
            }
        }
        Skeleton {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            runs,
            labels,
        }
    }

    /// Distinct non-zero labels in ascending order.
    pub fn label_set(&self) -> Vec<u32> {
        let mut ls: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    }
}

/// A defect-center trace in the sinogram, stored as the center it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidParams {
    pub cx: f64,
    pub cy: f64,
    /// Accumulator support, in effective point counts.
    #[serde(default)]
    pub votes: f64,
}

impl SinusoidParams {
    pub fn new(cx: f64, cy: f64) -> Self {
        Self { cx, cy, votes: 0.0 }
    }

    pub fn amplitude(&self, g: &ScanGeometry) -> f64 {
        let (cx0, cy0) = g.rot_center();
        (self.cx - cx0).hypot(self.cy - cy0)
    }

    pub fn phase(&self, g: &ScanGeometry) -> f64 {
        let (cx0, cy0) = g.rot_center();
        (self.cy - cy0).atan2(self.cx - cx0)
    }

    /// Detector coordinate of the trace at angle row `row`.
    #[inline]
    pub fn trace_at(&self, row: usize, g: &ScanGeometry) -> f64 {
        g.project_point(self.cx, self.cy, row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub id: usize,
    pub shape: Shape,
    pub center: [f64; 2],
    pub radius: f64,
    pub intensity_mean: f64,
    pub intensity_sigma: f64,
}

impl DefectRecord {
    pub fn area(&self) -> f64 {
        self.shape.area(self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Circlebox,
    Overlapbox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectEstimate {
    pub center: [f64; 2],
    /// Set by the CircleBox method.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<f64>,
    /// Strip widths along two orthogonal directions, set by the overlap box.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extents: Option<[f64; 2]>,
    pub area: f64,
    pub method: Method,
}

impl DefectEstimate {
    /// Radius-equivalent size: the CircleBox radius, or the mean half-extent.
    pub fn size_radius(&self) -> f64 {
        match (self.radius, self.extents) {
            (Some(r), _) => r,
            (None, Some([u, v])) => (u + v) / 4.0,
            (None, None) => (self.area / std::f64::consts::PI).sqrt(),
        }
    }
}
