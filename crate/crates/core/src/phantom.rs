//! Procedural phantoms, defect injection and ground-truth label masks.
//!
//! The phantom generator is a stand-in for a block-like test object made of
//! assorted shapes: a handful of rectangles, ellipses and convex polygons
//! composited additively inside the inscribed circle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::projector::radon;
use crate::raster::Raster;
use crate::segment::{label_eps, oracle_segment};
use crate::types::{DefectRecord, Shape};

/// Defect centers keep this distance from the inscribed circle (plus the
/// defect's own extent).
pub const PLACEMENT_MARGIN: f64 = 30.0;
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
/// Defect mean intensity relative to the phantom maximum.
pub const DEFECT_INTENSITY_FACTOR: f64 = 1.5;
/// Defect intensity sigma relative to its mean.
pub const DEFECT_SIGMA_FACTOR: f64 = 0.1;

const MIN_PRIMITIVES: usize = 3;
const MAX_PRIMITIVES: usize = 8;

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// What a trace gap is measured between.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMeasure {
    /// The two center sinusoids.
    #[default]
    Centers,
    /// The facing edges of the two projected supports.
    Edges,
}

/// Minimum gap between the sinogram traces of two defects, required over a
/// fraction of all angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSeparation {
    pub min_gap_bins: f64,
    pub min_fraction: f64,
    #[serde(default)]
    pub measure: GapMeasure,
}

/// How defects are drawn for one phantom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub shape: Shape,
    pub count_min: usize,
    pub count_max: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<TraceSeparation>,
}

impl Default for DefectSpec {
    fn default() -> Self {
        Self {
            shape: Shape::Circle,
            count_min: 1,
            count_max: 3,
            radius_min: 8.0,
            radius_max: 30.0,
            separation: None,
        }
    }
}

impl DefectSpec {
    pub fn validate(&self, g: &ScanGeometry) -> Result<()> {
        let cap = g.image_w as f64 / 8.0;
        if !(self.radius_min >= 1.0) {
            return Err(Error::Validation(format!(
                "radius_min must be >= 1, got {}",
                self.radius_min
            )));
        }
        if !(self.radius_max <= cap && self.radius_max >= self.radius_min) {
            return Err(Error::Validation(format!(
                "radius_max must lie in [radius_min, {cap}], got {}",
                self.radius_max
            )));
        }
        if self.count_min > self.count_max {
            return Err(Error::Validation(format!(
                "count_min {} exceeds count_max {}",
                self.count_min, self.count_max
            )));
        }
        if let Some(sep) = self.separation {
            if !(0.0..=1.0).contains(&sep.min_fraction) || sep.min_gap_bins.is_nan() {
                return Err(Error::Validation(
                    "separation.min_fraction must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Half-width of a shape's projection at angle `theta`.
pub fn projected_half_width(shape: Shape, radius: f64, theta: f64) -> f64 {
    match shape {
        Shape::Circle => radius,
        Shape::Square => radius * (theta.cos().abs() + theta.sin().abs()),
    }
}

/// Fraction of angle rows at which the traces of `a` and `b` are more than
/// `sep.min_gap_bins` apart.
pub fn separated_fraction(a: &DefectRecord, b: &DefectRecord, g: &ScanGeometry, sep: &TraceSeparation) -> f64 {
    let mut ok = 0;
    for row in 0..g.n_angles {
        let theta = g.angle_of(row);
        let sa = g.project_point(a.center[0], a.center[1], row);
        let sb = g.project_point(b.center[0], b.center[1], row);
        let mut gap = (sa - sb).abs();
        if sep.measure == GapMeasure::Edges {
            gap -= projected_half_width(a.shape, a.radius, theta)
                + projected_half_width(b.shape, b.radius, theta);
        }
        if gap > sep.min_gap_bins {
            ok += 1;
        }
    }
    ok as f64 / g.n_angles as f64
}

enum Primitive {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, a: f64, b: f64, cos: f64, sin: f64 },
    /// Counter-clockwise vertices of a convex polygon.
    Polygon { verts: Vec<(f64, f64)> },
}

impl Primitive {
    fn random(rng: &mut ChaCha8Rng, center: (f64, f64), spread: f64, size: usize) -> Self {
        let n = size as f64;
        let cx = center.0 + rng.random_range(-spread..=spread);
        let cy = center.1 + rng.random_range(-spread..=spread);
        match rng.random_range(0..3) {
            0 => {
                let hw = rng.random_range(0.04 * n..=0.25 * n);
                let hh = rng.random_range(0.04 * n..=0.25 * n);
                Primitive::Rect {
                    x0: cx - hw,
                    x1: cx + hw,
                    y0: cy - hh,
                    y1: cy + hh,
                }
            }
            1 => {
                let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
                Primitive::Ellipse {
                    cx,
                    cy,
                    a: rng.random_range(0.04 * n..=0.25 * n),
                    b: rng.random_range(0.04 * n..=0.25 * n),
                    cos: phi.cos(),
                    sin: phi.sin(),
                }
            }
            _ => {
                // points on a circle in angular order are always convex
                let r = rng.random_range(0.06 * n..=0.25 * n);
                let k = rng.random_range(3..=7);
                let mut angles: Vec<f64> = (0..k)
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect();
                angles.sort_by(f64::total_cmp);
                Primitive::Polygon {
                    verts: angles
                        .into_iter()
                        .map(|t| (cx + r * t.cos(), cy + r * t.sin()))
                        .collect(),
                }
            }
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Primitive::Rect { x0, x1, y0, y1 } => x >= *x0 && x <= *x1 && y >= *y0 && y <= *y1,
            Primitive::Ellipse { cx, cy, a, b, cos, sin } => {
                let (dx, dy) = (x - cx, y - cy);
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
            Primitive::Polygon { verts } => {
                let n = verts.len();
                (0..n).all(|i| {
                    let (ax, ay) = verts[i];
                    let (bx, by) = verts[(i + 1) % n];
                    (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0.0
                })
            }
        }
    }
}

/// Radius inside which phantom content is allowed. Two pixels inside the
/// inscribed circle so that bilinear rotation cannot push mass outside it.
pub fn support_radius(g: &ScanGeometry) -> f64 {
    g.inscribed_radius() - 2.0
}

/// Deterministic procedural phantom: 3 to 8 primitives with attenuation in
/// `[0.2, 1.0]`, composited additively and cut to the support circle.
pub fn gen_phantom(seed: u64, g: &ScanGeometry) -> Raster {
    let mut rng = rng_for(seed);
    let n = g.image_w;
    let (cx0, cy0) = g.rot_center();
    let count = rng.random_range(MIN_PRIMITIVES..=MAX_PRIMITIVES);
    let prims: Vec<(Primitive, f32)> = (0..count)
        .map(|_| {
            let p = Primitive::random(&mut rng, (cx0, cy0), 0.25 * n as f64, n);
            let v = rng.random_range(0.2f32..=1.0);
            (p, v)
        })
        .collect();
    let r2 = support_radius(g).powi(2);
    Raster::from_fn(g.image_h, n, |y, x| {
        let (xf, yf) = (x as f64, y as f64);
        if (xf - cx0).powi(2) + (yf - cy0).powi(2) > r2 {
            return 0.0;
        }
        prims
            .iter()
            .filter(|(p, _)| p.contains(xf, yf))
            .map(|(_, v)| *v)
            .sum()
    })
}

/// Rotates a phantom about the rotation center by `degrees` (bilinear
/// resampling, values clamped at zero, support kept inside the circle).
pub fn rotate_phantom(phantom: &Raster, degrees: f64, g: &ScanGeometry) -> Raster {
    if degrees == 0.0 {
        return phantom.clone();
    }
    let (cx0, cy0) = g.rot_center();
    let (s, c) = degrees.to_radians().sin_cos();
    let (rows, cols) = phantom.dims();
    let r2 = support_radius(g).powi(2);
    let sample = |x: f64, y: f64| -> f64 {
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
            if xi >= 0 && yi >= 0 && (xi as usize) < cols && (yi as usize) < rows {
                v += w * phantom.get(yi as usize, xi as usize) as f64;
            }
        }
        v
    };
    Raster::from_fn(rows, cols, |y, x| {
        let (dx, dy) = (x as f64 - cx0, y as f64 - cy0);
        if dx * dx + dy * dy > r2 {
            return 0.0;
        }
        // inverse rotation of the output pixel
        let sx = cx0 + c * dx + s * dy;
        let sy = cy0 - s * dx + c * dy;
        sample(sx, sy).max(0.0) as f32
    })
}

fn overlaps(a: &DefectRecord, b: &DefectRecord) -> bool {
    let (dx, dy) = (a.center[0] - b.center[0], a.center[1] - b.center[1]);
    let limit = a.radius + b.radius + 2.0;
    if dx.hypot(dy) <= limit {
        return true;
    }
    // Euclidean clearance alone does not separate two squares
    a.shape == Shape::Square && b.shape == Shape::Square && dx.abs().max(dy.abs()) <= limit
}

/// Adds `n` non-overlapping high-attenuation defects to a copy of `phantom`.
///
/// Defect pixels are i.i.d. Gaussian with mean `1.5 · max(phantom)` and sigma
/// `0.1 · mean`, clamped positive.
pub fn inject_defects(
    phantom: &Raster,
    n: usize,
    spec: &DefectSpec,
    seed: u64,
    g: &ScanGeometry,
) -> Result<(Raster, Vec<DefectRecord>)> {
    spec.validate(g)?;
    if n == 0 {
        return Ok((phantom.clone(), Vec::new()));
    }
    let mut rng = rng_for(seed);
    let peak = phantom.max().max(0.0) as f64;
    // an empty background still needs a defect that stands out
    let mean = DEFECT_INTENSITY_FACTOR * if peak > 0.0 { peak } else { 1.0 };
    let sigma = DEFECT_SIGMA_FACTOR * mean;
    let (cx0, cy0) = g.rot_center();
    let place_radius = g.inscribed_radius() - PLACEMENT_MARGIN;

    let mut records: Vec<DefectRecord> = Vec::with_capacity(n);
    for id in 0..n {
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let radius = if spec.radius_min == spec.radius_max {
                spec.radius_min
            } else {
                rng.random_range(spec.radius_min..=spec.radius_max)
            };
            let extent = match spec.shape {
                Shape::Circle => radius,
                Shape::Square => radius * std::f64::consts::SQRT_2,
            };
            let reach = place_radius - extent;
            if reach < 0.0 {
                continue;
            }
            // uniform over the disc of admissible centers
            let rho = reach * rng.random::<f64>().sqrt();
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let candidate = DefectRecord {
                id,
                shape: spec.shape,
                center: [cx0 + rho * phi.cos(), cy0 + rho * phi.sin()],
                radius,
                intensity_mean: mean,
                intensity_sigma: sigma,
            };
            let clear = records.iter().all(|r| {
                !overlaps(r, &candidate)
                    && spec.separation.is_none_or(|sep| {
                        separated_fraction(r, &candidate, g, &sep) >= sep.min_fraction
                    })
            });
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        match placed {
            Some(rec) => records.push(rec),
            None => {
                return Err(Error::Capacity(format!(
                    "could not place defect {} of {n} after {MAX_PLACEMENT_ATTEMPTS} attempts",
                    id + 1
                )))
            }
        }
    }

    let normal = Normal::new(mean, sigma).map_err(|e| Error::Argument(e.to_string()))?;
    let mut out = phantom.clone();
    for rec in &records {
        for (x, y) in support_pixels(rec, g) {
            let v = normal.sample(&mut rng).max(1e-3 * mean);
            let cur = out.get(y, x);
            out.set(y, x, cur + v as f32);
        }
    }
    Ok((out, records))
}

/// Image pixels `(x, y)` covered by a defect, in row-major order.
pub fn support_pixels(rec: &DefectRecord, g: &ScanGeometry) -> Vec<(usize, usize)> {
    let [cx, cy] = rec.center;
    let reach = rec.radius * std::f64::consts::SQRT_2 + 1.0;
    let y0 = (cy - reach).floor().max(0.0) as usize;
    let y1 = ((cy + reach).ceil() as usize).min(g.image_h - 1);
    let x0 = (cx - reach).floor().max(0.0) as usize;
    let x1 = ((cx + reach).ceil() as usize).min(g.image_w - 1);
    let mut px = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if rec.shape.contains(cx, cy, rec.radius, x as f64, y as f64) {
                px.push((x, y));
            }
        }
    }
    px
}

/// Sinograms and label masks for one phantom/defect pair.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub clean_sino: Raster,
    pub sino: Raster,
    pub union: Raster,
    pub instances: Vec<Raster>,
    pub eps: f32,
}

/// Labels by projecting both phantoms and thresholding their difference at
/// `eps` (default `1e-3 · max(sino)`); per-defect masks threshold each
/// defect patch's projection at the same level.
pub fn gt_masks(
    clean: &Raster,
    defected: &Raster,
    records: &[DefectRecord],
    g: &ScanGeometry,
    eps: Option<f32>,
) -> Result<GroundTruth> {
    clean.ensure_same_dims(defected, "gt_masks")?;
    let clean_sino = radon(clean, g)?;
    let sino = radon(defected, g)?;
    let eps = eps.unwrap_or_else(|| label_eps(&sino));
    let union = oracle_segment(&clean_sino, &sino, eps)?;
    let instances = records
        .iter()
        .map(|rec| {
            let mut patch = Raster::zeros(g.image_h, g.image_w);
            for (x, y) in support_pixels(rec, g) {
                patch.set(y, x, defected.get(y, x) - clean.get(y, x));
            }
            let proj = radon(&patch, g)?;
            Ok(threshold_mask(&proj, eps))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroundTruth {
        clean_sino,
        sino,
        union,
        instances,
        eps,
    })
}

pub(crate) fn threshold_mask(values: &Raster, eps: f32) -> Raster {
    let (rows, cols) = values.dims();
    Raster::from_fn(rows, cols, |r, c| if values.get(r, c) > eps { 1.0 } else { 0.0 })
}

/// Adds i.i.d. zero-mean Gaussian noise, e.g. to emulate detector noise.
pub fn add_gaussian_noise(r: &Raster, sigma: f64, seed: u64) -> Raster {
    let mut rng = rng_for(seed);
    let mut out = r.clone();
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        for v in out.as_mut_slice() {
            *v += normal.sample(&mut rng) as f32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScanGeometry {
        ScanGeometry::square(128).unwrap()
    }

    #[test]
    fn phantom_is_deterministic() {
        let g = small();
        assert_eq!(gen_phantom(7, &g), gen_phantom(7, &g));
        assert_ne!(gen_phantom(7, &g), gen_phantom(8, &g));
    }

    #[test]
    fn phantom_values_bounded_and_inside_circle() {
        let g = ScanGeometry::square(96).unwrap();
        let (cx0, cy0) = g.rot_center();
        let r = g.inscribed_radius();
        for seed in 0..100 {
            let p = gen_phantom(seed, &g);
            assert!(p.max() <= 8.0 && p.min() >= 0.0, "seed {seed}");
            assert!(p.max() >= 0.2, "seed {seed} is empty");
            for y in 0..96 {
                for x in 0..96 {
                    if p.get(y, x) != 0.0 {
                        let d = (x as f64 - cx0).hypot(y as f64 - cy0);
                        assert!(d <= r, "seed {seed}: pixel ({x},{y}) outside circle");
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_keeps_support_and_nonnegativity() {
        let g = small();
        let p = gen_phantom(3, &g);
        let r = rotate_phantom(&p, 37.0, &g);
        assert!(r.min() >= 0.0);
        let (cx0, cy0) = g.rot_center();
        for y in 0..128 {
            for x in 0..128 {
                if r.get(y, x) != 0.0 {
                    assert!((x as f64 - cx0).hypot(y as f64 - cy0) <= support_radius(&g));
                }
            }
        }
        // mass roughly preserved by a rotation
        assert!((r.sum() - p.sum()).abs() / p.sum() < 0.02);
        assert_eq!(rotate_phantom(&p, 0.0, &g), p);
    }

    #[test]
    fn zero_defects_is_identity() {
        let g = small();
        let p = gen_phantom(1, &g);
        let spec = DefectSpec {
            radius_min: 4.0,
            radius_max: 8.0,
            ..DefectSpec::default()
        };
        let (out, recs) = inject_defects(&p, 0, &spec, 5, &g).unwrap();
        assert_eq!(out, p);
        assert!(recs.is_empty());
    }

    #[test]
    fn single_disc_difference_is_exact_disc() {
        let g = ScanGeometry::default();
        let p = gen_phantom(11, &g);
        let spec = DefectSpec {
            radius_min: 10.0,
            radius_max: 10.0,
            ..DefectSpec::default()
        };
        let (out, recs) = inject_defects(&p, 1, &spec, 5, &g).unwrap();
        assert_eq!(recs.len(), 1);
        let [cx, cy] = recs[0].center;
        let diff = out.sub(&p).unwrap();
        for y in 0..512 {
            for x in 0..512 {
                let inside = (x as f64 - cx).hypot(y as f64 - cy) <= 10.0;
                assert_eq!(diff.get(y, x) > 0.0, inside, "pixel ({x},{y})");
            }
        }
        let mean = 1.5 * p.max() as f64;
        assert!((recs[0].intensity_mean - mean).abs() < 1e-9);
        assert!((recs[0].intensity_sigma - 0.1 * mean).abs() < 1e-9);
    }

    #[test]
    fn three_defects_never_touch() {
        let g = ScanGeometry::default();
        let blank = Raster::zeros(512, 512);
        for seed in 0..100 {
            let (_, recs) = inject_defects(&blank, 3, &DefectSpec::default(), seed, &g).unwrap();
            for i in 0..3 {
                for j in i + 1..3 {
                    let (a, b) = (&recs[i], &recs[j]);
                    let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
                    assert!(d > a.radius + b.radius + 2.0, "seed {seed}");
                }
                assert!((8.0..=30.0).contains(&recs[i].radius));
            }
        }
    }

    #[test]
    fn square_supports_are_disjoint() {
        let g = ScanGeometry::default();
        let blank = Raster::zeros(512, 512);
        let spec = DefectSpec {
            shape: Shape::Square,
            ..DefectSpec::default()
        };
        for seed in 0..30 {
            let (_, recs) = inject_defects(&blank, 3, &spec, seed, &g).unwrap();
            let mut seen = std::collections::HashSet::new();
            for rec in &recs {
                for px in support_pixels(rec, &g) {
                    assert!(seen.insert(px), "seed {seed}: overlap at {px:?}");
                }
            }
        }
    }

    #[test]
    fn impossible_placement_is_capacity_error() {
        let g = ScanGeometry::square(128).unwrap();
        let spec = DefectSpec {
            radius_min: 16.0,
            radius_max: 16.0,
            ..DefectSpec::default()
        };
        let err = inject_defects(&Raster::zeros(128, 128), 20, &spec, 0, &g).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn masks_of_identical_phantoms_are_empty() {
        let g = small();
        let p = gen_phantom(2, &g);
        let gt = gt_masks(&p, &p, &[], &g, None).unwrap();
        assert_eq!(gt.union.count_nonzero(), 0);
    }

    #[test]
    fn centered_disc_mask_rows() {
        let g = ScanGeometry::default();
        let clean = Raster::zeros(512, 512);
        let rec = DefectRecord {
            id: 0,
            shape: Shape::Circle,
            center: [255.5, 255.5],
            radius: 10.0,
            intensity_mean: 1.5,
            intensity_sigma: 0.0,
        };
        let mut defected = clean.clone();
        for (x, y) in support_pixels(&rec, &g) {
            defected.set(y, x, 1.5);
        }
        let gt = gt_masks(&clean, &defected, &[rec], &g, None).unwrap();
        for row in 0..g.n_angles {
            let ones: Vec<usize> = (0..512).filter(|&j| gt.union.get(row, j) == 1.0).collect();
            let (l, r) = (ones[0], *ones.last().unwrap());
            assert_eq!(r - l + 1, ones.len(), "row {row} not a single run");
            assert!((19..=23).contains(&ones.len()), "row {row}: {}", ones.len());
            assert!(((l + r) as f64 / 2.0 - 255.5).abs() <= 1.0);
        }
        assert_eq!(gt.instances[0], gt.union);
    }

    #[test]
    fn union_is_or_of_instances_on_disjoint_rows() {
        let g = ScanGeometry::default();
        let p = gen_phantom(21, &g);
        let (d, recs) = inject_defects(&p, 3, &DefectSpec::default(), 4, &g).unwrap();
        let gt = gt_masks(&p, &d, &recs, &g, None).unwrap();
        let mut or = gt.instances[0].clone();
        for m in &gt.instances[1..] {
            or = or.or(m).unwrap();
        }
        let mut checked = 0;
        for row in 0..g.n_angles {
            // rows where instance supports are at least two bins apart, so
            // sub-threshold tails of neighbours cannot add up
            let touching = (0..510).any(|j| {
                gt.instances
                    .iter()
                    .filter(|m| (j..j + 3).any(|k| m.get(row, k) == 1.0))
                    .count()
                    > 1
            });
            if !touching {
                assert_eq!(gt.union.row(row), or.row(row), "row {row}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn separation_fraction_matches_closed_form() {
        let g = ScanGeometry::default();
        let rec = |x: f64, y: f64, r: f64| DefectRecord {
            id: 0,
            shape: Shape::Circle,
            center: [x, y],
            radius: r,
            intensity_mean: 1.0,
            intensity_sigma: 0.1,
        };
        // centers 60 px apart along x: trace gap is 60 |cos θ|
        let (a, b) = (rec(200.0, 255.5, 10.0), rec(260.0, 255.5, 10.0));
        let centers = TraceSeparation {
            min_gap_bins: 8.0,
            min_fraction: 0.9,
            measure: GapMeasure::Centers,
        };
        let expect = (0..512)
            .filter(|&i| 60.0 * g.angle_of(i).cos().abs() > 8.0)
            .count() as f64
            / 512.0;
        assert_eq!(separated_fraction(&a, &b, &g, &centers), expect);
        let edges = TraceSeparation {
            measure: GapMeasure::Edges,
            ..centers
        };
        let expect = (0..512)
            .filter(|&i| 60.0 * g.angle_of(i).cos().abs() - 20.0 > 8.0)
            .count() as f64
            / 512.0;
        assert_eq!(separated_fraction(&a, &b, &g, &edges), expect);
    }
}
