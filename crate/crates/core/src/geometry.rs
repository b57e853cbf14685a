//! Parallel-beam scan geometry.
//!
//! Pixel `(x, y)` means column `x`, row `y`. The rotation center sits at
//! `((W-1)/2, (H-1)/2)` and the detector center at `(D-1)/2`, so a point at
//! image position `(x, y)` lands on detector coordinate
//! `s(θ) = s0 + (x - cx0)·cos θ + (y - cy0)·sin θ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIZE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGeometry {
    pub image_w: usize,
    pub image_h: usize,
    pub n_angles: usize,
    pub detector_w: usize,
}

impl Default for ScanGeometry {
    fn default() -> Self {
        Self {
            image_w: DEFAULT_SIZE,
            image_h: DEFAULT_SIZE,
            n_angles: DEFAULT_SIZE,
            detector_w: DEFAULT_SIZE,
        }
    }
}

impl ScanGeometry {
    pub fn new(image_size: usize, n_angles: usize, detector_w: usize) -> Result<Self> {
        let g = Self {
            image_w: image_size,
            image_h: image_size,
            n_angles,
            detector_w,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square image with as many angles and detector bins as image pixels.
    pub fn square(size: usize) -> Result<Self> {
        Self::new(size, size, size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_angles < 2 {
            return Err(Error::Validation(format!(
                "n_angles must be >= 2, got {}",
                self.n_angles
            )));
        }
        if self.detector_w < 1 {
            return Err(Error::Validation("detector_w must be >= 1".into()));
        }
        if self.image_w != self.image_h || self.image_w == 0 {
            return Err(Error::Validation(format!(
                "image must be square and non-empty, got {}x{}",
                self.image_w, self.image_h
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn angle_of(&self, row: usize) -> f64 {
        row as f64 * std::f64::consts::PI / self.n_angles as f64
    }

    #[inline]
    pub fn rot_center(&self) -> (f64, f64) {
        (
            (self.image_w as f64 - 1.0) / 2.0,
            (self.image_h as f64 - 1.0) / 2.0,
        )
    }

    #[inline]
    pub fn det_center(&self) -> f64 {
        (self.detector_w as f64 - 1.0) / 2.0
    }

    /// `(cos θ_i, sin θ_i)` for every angle row.
    pub fn trig_table(&self) -> Vec<(f64, f64)> {
        (0..self.n_angles)
            .map(|i| {
                let (s, c) = self.angle_of(i).sin_cos();
                (c, s)
            })
            .collect()
    }

    /// Detector coordinate of image point `(x, y)` at angle row `row`.
    #[inline]
    pub fn project_point(&self, x: f64, y: f64, row: usize) -> f64 {
        let (cx0, cy0) = self.rot_center();
        let (s, c) = self.angle_of(row).sin_cos();
        self.det_center() + (x - cx0) * c + (y - cy0) * s
    }

    /// Radius of the circle inscribed in the image, about the rotation center.
    pub fn inscribed_radius(&self) -> f64 {
        self.image_w as f64 / 2.0
    }
}
