//! Parallel-beam forward projection.
//!
//! Pixel-driven: each pixel is a unit square of constant value, whose
//! shadow at angle θ is a trapezoid of width |cosθ| + |sinθ| and unit area.
//! The trapezoid is integrated exactly over every detector bin it touches,
//! so each pixel that lands on the detector deposits exactly its value per
//! angle and row sums equal the phantom sum for phantoms inside the
//! inscribed circle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::raster::Raster;

/// Sinogram of `phantom`: `n_angles` rows by `detector_w` columns.
pub fn radon(phantom: &Raster, g: &ScanGeometry) -> Result<Raster> {
    g.validate()?;
    if phantom.dims() != (g.image_h, g.image_w) {
        return Err(Error::Argument(format!(
            "phantom is {:?} but geometry expects {}x{}",
            phantom.dims(),
            g.image_h,
            g.image_w
        )));
    }
    let (cx0, cy0) = g.rot_center();
    let s0 = g.det_center();
    let width = g.detector_w;

    // Only nonzero pixels contribute; defect-only phantoms are very sparse.
    // Each span is (row, first column, one past the last column).
    let spans: Vec<(usize, usize, usize)> = (0..phantom.rows())
        .flat_map(|y| {
            let row = phantom.row(y);
            let mut out = Vec::new();
            let mut x = 0;
            while x < row.len() {
                if row[x] == 0.0 {
                    x += 1;
                    continue;
                }
                let start = x;
                while x < row.len() && row[x] != 0.0 {
                    x += 1;
                }
                out.push((y, start, x));
            }
            out
        })
        .collect();

    let trig = g.trig_table();
    let mut sino = Raster::zeros(g.n_angles, width);
    sino.as_mut_slice()
        .par_chunks_mut(width)
        .zip(trig.par_iter())
        .for_each(|(out, &(c, s))| {
            let fp = Footprint::new(c, s);
            let mut acc = vec![0.0f64; width + 4];
            let frame = Frame {
                s0,
                cx0,
                cy0,
                c,
                s,
                half: fp.half,
                last: width as f64 - 1.0,
            };
            if fp.b < BOX_LIMIT {
                splat(phantom, &spans, &frame, |t| fp.cdf_box(t), &mut acc);
            } else {
                splat(phantom, &spans, &frame, |t| fp.cdf(t), &mut acc);
            }
            let acc = &acc[2..width + 2];
            for (o, a) in out.iter_mut().zip(acc) {
                *o = *a as f32;
            }
        });
    Ok(sino)
}

/// Below this narrower-box width the footprint is treated as a plain box.
const BOX_LIMIT: f64 = 1e-6;

struct Frame {
    s0: f64,
    cx0: f64,
    cy0: f64,
    c: f64,
    s: f64,
    half: f64,
    last: f64,
}

/// Accumulates one angle row into `acc`, which has two guard cells on
/// each side of the detector.
///
/// The footprint is at most √2 wide, so it meets at most three bins: `lo`
/// (the first cell whose upper edge lies above `pos - half`), `lo + 1` and
/// `lo + 2`.
#[inline(always)]
fn splat(
    phantom: &Raster,
    spans: &[(usize, usize, usize)],
    f: &Frame,
    cdf: impl Fn(f64) -> f64,
    acc: &mut [f64],
) {
    for &(y, x0, x1) in spans {
        let row_base = f.s0 + (y as f64 - f.cy0) * f.s - f.cx0 * f.c;
        for (x, &v) in (x0..x1).zip(&phantom.row(y)[x0..x1]) {
            let pos = row_base + x as f64 * f.c;
            let lo = (pos - f.half + 0.5).floor();
            if lo < -2.0 || lo > f.last {
                continue;
            }
            let edge = lo + 0.5 - pos;
            let f1 = cdf(edge);
            let f2 = cdf(edge + 1.0);
            let k = (lo + 2.0) as usize;
            let v = v as f64;
            acc[k] += v * f1;
            acc[k + 1] += v * (f2 - f1);
            acc[k + 2] += v * (1.0 - f2);
        }
    }
}

/// Shadow of a unit pixel: the convolution of boxes of widths |cosθ| and
/// |sinθ|, i.e. a trapezoid of unit area centered at 0.
struct Footprint {
    /// wider and narrower box
    a: f64,
    b: f64,
    half: f64,
    /// half-length of the flat top
    k: f64,
    inv_2ab: f64,
}

impl Footprint {
    fn new(c: f64, s: f64) -> Self {
        let (c, s) = (c.abs(), s.abs());
        let (a, b) = if c >= s { (c, s) } else { (s, c) };
        Self {
            a,
            b,
            half: (a + b) / 2.0,
            k: (a - b) / 2.0,
            // unused for box footprints
            inv_2ab: if b > 0.0 { 0.5 / (a * b) } else { 0.0 },
        }
    }

    /// Mass of the footprint left of `t`.
    #[inline(always)]
    fn cdf(&self, t: f64) -> f64 {
        let h = self.half;
        if t <= -h {
            0.0
        } else if t >= h {
            1.0
        } else if t < -self.k {
            (t + h) * (t + h) * self.inv_2ab
        } else if t <= self.k {
            (t + h - self.b / 2.0) / self.a
        } else {
            1.0 - (h - t) * (h - t) * self.inv_2ab
        }
    }

    /// Same for a footprint whose narrower box has zero width.
    #[inline(always)]
    fn cdf_box(&self, t: f64) -> f64 {
        ((t + self.a / 2.0) / self.a).clamp(0.0, 1.0)
    }

    #[cfg(test)]
    fn mass_left_of(&self, t: f64) -> f64 {
        if self.b < BOX_LIMIT {
            self.cdf_box(t)
        } else {
            self.cdf(t)
        }
    }
}

/// Detector coordinate of image point `(cx, cy)` at every angle row.
pub fn point_trace(cx: f64, cy: f64, g: &ScanGeometry) -> Vec<(usize, f64)> {
    (0..g.n_angles)
        .map(|i| (i, g.project_point(cx, cy, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Strip-integrated line integrals of the bilinear interpolant of `img`,
    /// by dense sampling across each bin and along each ray.
    fn dense_oracle_row(img: &Raster, g: &ScanGeometry, row: usize, sub: usize) -> Vec<f64> {
        let (cx0, cy0) = g.rot_center();
        let s0 = g.det_center();
        let (sn, c) = g.angle_of(row).sin_cos();
        let n = img.cols() as isize;
        let bil = |x: f64, y: f64| -> f64 {
            let (x0, y0) = (x.floor(), y.floor());
            let (fx, fy) = (x - x0, y - y0);
            let mut v = 0.0;
            for (dx, dy, w) in [
                (0, 0, (1.0 - fx) * (1.0 - fy)),
                (1, 0, fx * (1.0 - fy)),
                (0, 1, (1.0 - fx) * fy),
                (1, 1, fx * fy),
            ] {
                let (xi, yi) = (x0 as isize + dx, y0 as isize + dy);
                if xi >= 0 && yi >= 0 && xi < n && yi < n {
                    v += w * img.get(yi as usize, xi as usize) as f64;
                }
            }
            v
        };
        let half = img.cols() as f64;
        let du = 1.0 / sub as f64;
        (0..g.detector_w)
            .map(|j| {
                let mut total = 0.0;
                for k in 0..sub {
                    let t = j as f64 - s0 - 0.5 + (k as f64 + 0.5) / sub as f64;
                    let mut u = -half;
                    while u < half {
                        let x = cx0 + t * c - u * sn;
                        let y = cy0 + t * sn + u * c;
                        total += bil(x, y) * du;
                        u += du;
                    }
                }
                total / sub as f64
            })
            .collect()
    }

    #[test]
    fn zero_phantom_gives_zero_sinogram() {
        let g = ScanGeometry::square(32).unwrap();
        let s = radon(&Raster::zeros(32, 32), &g).unwrap();
        assert_eq!(s.dims(), (32, 32));
        assert!(s.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = ScanGeometry::square(32).unwrap();
        assert!(matches!(
            radon(&Raster::zeros(16, 32), &g),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn centered_impulse_conserves_mass_per_row() {
        let g = ScanGeometry::square(33).unwrap();
        let mut img = Raster::zeros(33, 33);
        img.set(16, 16, 1.0);
        let sino = radon(&img, &g).unwrap();
        let s0 = g.det_center();
        for row in 0..g.n_angles {
            let total: f64 = sino.row(row).iter().map(|&v| v as f64).sum();
            assert!((total - 1.0).abs() <= 0.01, "row {row}: {total}");
            // mass concentrated at the bins adjacent to s0
            let near: f64 = sino.row(row)[(s0 - 1.0) as usize..=(s0 + 1.0) as usize]
                .iter()
                .map(|&v| v as f64)
                .sum();
            assert!((near - total).abs() < 1e-9);
        }
        // the dense strip-integral oracle agrees on row totals
        for row in [0, 4, 8, 13] {
            let oracle: f64 = dense_oracle_row(&img, &g, row, 8).iter().sum();
            assert!((oracle - 1.0).abs() <= 0.01, "oracle row {row}: {oracle}");
        }
    }

    #[test]
    fn off_center_impulse_row_totals_match_dense_oracle() {
        let g = ScanGeometry::square(64).unwrap();
        let mut img = Raster::zeros(64, 64);
        img.set(32, 32, 1.0);
        let sino = radon(&img, &g).unwrap();
        for row in [0, 5, 16, 23, 40] {
            let ours: f64 = sino.row(row).iter().map(|&v| v as f64).sum();
            let oracle: f64 = dense_oracle_row(&img, &g, row, 8).iter().sum();
            assert!((ours - oracle).abs() <= 0.01, "row {row}: {ours} vs {oracle}");
        }
    }

    /// Strip integrals of the piecewise-constant image: every pixel is split
    /// into `sub × sub` point masses, each dropped into the bin it falls in.
    fn subpixel_oracle_row(img: &Raster, g: &ScanGeometry, row: usize, sub: usize) -> Vec<f64> {
        let (cx0, cy0) = g.rot_center();
        let s0 = g.det_center();
        let (sn, c) = g.angle_of(row).sin_cos();
        let mut out = vec![0.0; g.detector_w];
        let w = 1.0 / (sub * sub) as f64;
        for y in 0..img.rows() {
            for x in 0..img.cols() {
                let v = img.get(y, x) as f64;
                if v == 0.0 {
                    continue;
                }
                for i in 0..sub {
                    for k in 0..sub {
                        let px = x as f64 - 0.5 + (i as f64 + 0.5) / sub as f64 - cx0;
                        let py = y as f64 - 0.5 + (k as f64 + 0.5) / sub as f64 - cy0;
                        let bin = (s0 + px * c + py * sn + 0.5).floor();
                        if bin >= 0.0 && (bin as usize) < out.len() {
                            out[bin as usize] += v * w;
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn bins_match_subpixel_oracle() {
        let g = ScanGeometry::new(24, 12, 24).unwrap();
        let img = Raster::from_fn(24, 24, |y, x| {
            let (dx, dy) = (x as f64 - 11.5, y as f64 - 11.5);
            if dx * dx + dy * dy < 64.0 {
                ((x * 7 + y * 3) % 5) as f32 * 0.25
            } else {
                0.0
            }
        });
        let sino = radon(&img, &g).unwrap();
        for row in 0..g.n_angles {
            let oracle = subpixel_oracle_row(&img, &g, row, 64);
            for (j, &o) in oracle.iter().enumerate() {
                let ours = sino.get(row, j) as f64;
                assert!((ours - o).abs() < 0.02 + 0.015 * o, "row {row} bin {j}: {ours} vs {o}");
            }
        }
    }

    #[test]
    fn footprint_cdf_is_a_distribution() {
        for deg in [0.0f64, 10.0, 30.0, 45.0, 63.0, 90.0, 135.0] {
            let t = deg.to_radians();
            let fp = Footprint::new(t.cos(), t.sin());
            assert_eq!(fp.mass_left_of(-fp.half - 1e-9), 0.0);
            assert_eq!(fp.mass_left_of(fp.half + 1e-9), 1.0);
            assert!((fp.mass_left_of(0.0) - 0.5).abs() < 1e-12);
            let mut prev = 0.0;
            for i in 0..=100 {
                let x = -fp.half + 2.0 * fp.half * i as f64 / 100.0;
                let v = fp.mass_left_of(x);
                assert!(v + 1e-12 >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn centered_disc_rows() {
        let g = ScanGeometry::default();
        let (cx0, cy0) = g.rot_center();
        let img = Raster::from_fn(512, 512, |y, x| {
            let (dx, dy) = (x as f64 - cx0, y as f64 - cy0);
            if dx * dx + dy * dy <= 50.0 * 50.0 {
                1.0
            } else {
                0.0
            }
        });
        let sino = radon(&img, &g).unwrap();
        let area = std::f64::consts::PI * 2500.0;
        for row in 0..g.n_angles {
            let total: f64 = sino.row(row).iter().map(|&v| v as f64).sum();
            assert!((total - area).abs() / area <= 0.005, "row {row}: {total}");
            let nz = sino.row(row).iter().filter(|&&v| v > 1e-3).count();
            assert!((98..=103).contains(&nz), "row {row}: width {nz}");
            // chord profile 2*sqrt(R^2 - t^2) at t = 0.5 and t = 30.5
            let mid = sino.row(row)[256] as f64;
            assert!((mid - 2.0 * (2500.0f64 - 0.25).sqrt()).abs() < 2.0, "{mid}");
            let off = sino.row(row)[286] as f64;
            assert!((off - 2.0 * (2500.0f64 - 30.5 * 30.5).sqrt()).abs() < 2.5, "{off}");
        }
    }

    #[test]
    fn point_trace_values() {
        let g = ScanGeometry::default();
        let flat = point_trace(255.5, 255.5, &g);
        assert!(flat.iter().all(|&(_, s)| (s - 255.5).abs() < 1e-9));
        let t = point_trace(355.5, 255.5, &g);
        assert!((t[0].1 - 355.5).abs() < 1e-9);
        // row 256 is θ = π/2
        assert!((t[256].1 - 255.5).abs() < 1e-9, "{}", t[256].1);
    }

    #[test]
    fn point_trace_matches_impulse_argmax() {
        let g = ScanGeometry::default();
        let mut img = Raster::zeros(512, 512);
        img.set(200, 300, 1.0);
        let sino = radon(&img, &g).unwrap();
        for (row, s) in point_trace(300.0, 200.0, &g) {
            let r = sino.row(row);
            let argmax = (0..r.len())
                .max_by(|&a, &b| r[a].total_cmp(&r[b]))
                .unwrap();
            assert!((argmax as f64 - s).abs() <= 0.5 + 1e-9, "row {row}");
        }
    }
}
