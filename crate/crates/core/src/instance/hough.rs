//! Sinusoid Hough transform in center space.
//!
//! A sinogram point `(θ, s)` is consistent with every image-space center on
//! the line `(x - cx0)·cos θ + (y - cy0)·sin θ = s - s0`, so voting happens on
//! a grid of candidate centers: each point draws its line across the
//! accumulator, splitting one unit of vote per column (or row, whichever the
//! line is steeper along) between the two nearest cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::types::SinusoidParams;

/// Peaks closer than this many pixels are the same sinusoid.
pub const DEDUP_RADIUS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoughParams {
    /// Accumulator cell size in pixels.
    pub grid_step: f64,
    /// Absolute vote threshold. `None` means half the number of distinct
    /// angle rows present among the input points.
    pub min_votes: Option<f64>,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            grid_step: 1.0,
            min_votes: None,
        }
    }
}

/// Dense vote grid over the image plane.
#[derive(Debug, Clone)]
pub struct Accumulator {
    pub nx: usize,
    pub ny: usize,
    pub step: f64,
    pub votes: Vec<f64>,
}

impl Accumulator {
    fn new(g: &ScanGeometry, step: f64) -> Self {
        let nx = (g.image_w as f64 / step).ceil() as usize;
        let ny = (g.image_h as f64 / step).ceil() as usize;
        Self {
            nx,
            ny,
            step,
            votes: vec![0.0; nx * ny],
        }
    }

    #[inline]
    fn add(&mut self, ix: isize, iy: isize, w: f64) {
        if ix >= 0 && iy >= 0 && (ix as usize) < self.nx && (iy as usize) < self.ny {
            self.votes[iy as usize * self.nx + ix as usize] += w;
        }
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.votes[iy * self.nx + ix]
    }

    fn vote(&mut self, cos: f64, sin: f64, rhs: f64, cx0: f64, cy0: f64) {
        let step = self.step;
        if sin.abs() >= cos.abs() {
            for ix in 0..self.nx {
                let x = ix as f64 * step;
                let fy = (cy0 + (rhs - (x - cx0) * cos) / sin) / step;
                let iy = fy.floor();
                let w = fy - iy;
                self.add(ix as isize, iy as isize, 1.0 - w);
                self.add(ix as isize, iy as isize + 1, w);
            }
        } else {
            for iy in 0..self.ny {
                let y = iy as f64 * step;
                let fx = (cx0 + (rhs - (y - cy0) * sin) / cos) / step;
                let ix = fx.floor();
                let w = fx - ix;
                self.add(ix as isize, iy as isize, 1.0 - w);
                self.add(ix as isize + 1, iy as isize, w);
            }
        }
    }

    /// Sum over the 3×3 neighborhood and its vote-weighted centroid in cells.
    fn neighborhood(&self, ix: usize, iy: usize) -> (f64, f64, f64) {
        let (mut sum, mut mx, mut my) = (0.0, 0.0, 0.0);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (x, y) = (ix as isize + dx, iy as isize + dy);
                if x < 0 || y < 0 || x as usize >= self.nx || y as usize >= self.ny {
                    continue;
                }
                let v = self.get(x as usize, y as usize);
                sum += v;
                mx += v * x as f64;
                my += v * y as f64;
            }
        }
        (sum, mx / sum, my / sum)
    }

    fn is_local_max(&self, ix: usize, iy: usize) -> bool {
        let v = self.get(ix, iy);
        if v <= 0.0 {
            return false;
        }
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (x, y) = (ix as isize + dx, iy as isize + dy);
                if x < 0 || y < 0 || x as usize >= self.nx || y as usize >= self.ny {
                    continue;
                }
                if self.get(x as usize, y as usize) > v {
                    return false;
                }
            }
        }
        true
    }
}

/// Accumulates votes for `(row, s)` points.
pub fn accumulate(points: &[(usize, f64)], g: &ScanGeometry, grid_step: f64) -> Result<Accumulator> {
    if !(grid_step > 0.0) {
        return Err(Error::Argument(format!("grid_step must be > 0, got {grid_step}")));
    }
    let (cx0, cy0) = g.rot_center();
    let s0 = g.det_center();
    let trig = g.trig_table();
    let mut acc = Accumulator::new(g, grid_step);
    for &(row, s) in points {
        let (c, sn) = *trig
            .get(row)
            .ok_or_else(|| Error::Argument(format!("row {row} outside the scan")))?;
        acc.vote(c, sn, s - s0, cx0, cy0);
    }
    Ok(acc)
}

/// Finds every sinusoid supported by at least `min_votes` points.
///
/// Peaks are local maxima of the accumulator; their strength is the 3×3
/// neighborhood sum divided by three (a line crossing the neighborhood
/// deposits about one vote per column), and their position is the
/// vote-weighted centroid of that neighborhood. Results are ordered by
/// strength, and weaker peaks within [`DEDUP_RADIUS`] of a stronger one are
/// discarded.
pub fn hough_sinusoid(
    points: &[(usize, f64)],
    g: &ScanGeometry,
    params: &HoughParams,
) -> Result<Vec<SinusoidParams>> {
    if points.is_empty() {
        return Err(Error::Argument("hough_sinusoid needs at least one point".into()));
    }
    let acc = accumulate(points, g, params.grid_step)?;
    let min_votes = params.min_votes.unwrap_or_else(|| {
        let mut rows: Vec<usize> = points.iter().map(|p| p.0).collect();
        rows.sort_unstable();
        rows.dedup();
        0.5 * rows.len() as f64
    });

    let mut peaks = Vec::new();
    for iy in 0..acc.ny {
        for ix in 0..acc.nx {
            if !acc.is_local_max(ix, iy) {
                continue;
            }
            let (sum, mx, my) = acc.neighborhood(ix, iy);
            let strength = sum / 3.0;
            if strength >= min_votes {
                peaks.push(SinusoidParams {
                    cx: mx * acc.step,
                    cy: my * acc.step,
                    votes: strength,
                });
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.votes
            .total_cmp(&a.votes)
            .then(a.cy.total_cmp(&b.cy))
            .then(a.cx.total_cmp(&b.cx))
    });
    let mut kept: Vec<SinusoidParams> = Vec::new();
    for p in peaks {
        if kept
            .iter()
            .all(|k| (k.cx - p.cx).hypot(k.cy - p.cy) > DEDUP_RADIUS)
        {
            kept.push(p);
        }
    }
    Ok(kept)
}
