//! Segmentation and localization metrics.
//!
//! Pixel metrics follow the usual confusion-matrix definitions. An instance
//! sample counts as correct when prediction and ground truth have the same
//! number of masks and a greedy max-IoU matching pairs all of them at or
//! above the IoU threshold. Localization errors are relative to the detector
//! width; raw pixel distances are reported alongside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::raster::Raster;
use crate::types::{DefectEstimate, DefectRecord};

pub const DEFAULT_IOU_MIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelMetrics {
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

pub fn confusion(pred: &Raster, gt: &Raster) -> Result<Confusion> {
    pred.ensure_same_dims(gt, "pixel_metrics")?;
    pred.ensure_binary("prediction")?;
    gt.ensure_binary("ground truth")?;
    let mut c = Confusion::default();
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        match (p != 0.0, g != 0.0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c)
}

impl Confusion {
    pub fn metrics(&self) -> PixelMetrics {
        let Confusion { tp, fp, fn_ } = *self;
        if tp + fp + fn_ == 0 {
            return PixelMetrics {
                iou: 1.0,
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            };
        }
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        PixelMetrics {
            iou: ratio(tp, tp + fp + fn_),
            precision,
            recall,
            f1,
        }
    }
}

pub fn pixel_metrics(pred: &Raster, gt: &Raster) -> Result<PixelMetrics> {
    Ok(confusion(pred, gt)?.metrics())
}

pub fn iou(a: &Raster, b: &Raster) -> Result<f64> {
    Ok(pixel_metrics(a, b)?.iou)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMatch {
    pub correct: bool,
    /// `(pred index, gt index, iou)`, best pairs first.
    pub matches: Vec<(usize, usize, f64)>,
}

/// Greedy max-IoU matching: repeatedly take the best remaining pair at or
/// above `iou_min`.
pub fn greedy_match(pred: &[Raster], gt: &[Raster], iou_min: f64) -> Result<Vec<(usize, usize, f64)>> {
    let mut pairs = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let v = iou(p, g)?;
            if v >= iou_min && v > 0.0 {
                pairs.push((i, j, v));
            }
        }
    }
    // ties broken by index so the result does not depend on input order
    // beyond the IoU values themselves
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut used_p = vec![false; pred.len()];
    let mut used_g = vec![false; gt.len()];
    let mut out = Vec::new();
    for (i, j, v) in pairs {
        if !used_p[i] && !used_g[j] {
            used_p[i] = true;
            used_g[j] = true;
            out.push((i, j, v));
        }
    }
    Ok(out)
}

pub fn instance_correct_rate(pred: &[Raster], gt: &[Raster], iou_min: f64) -> Result<InstanceMatch> {
    let matches = greedy_match(pred, gt, iou_min)?;
    let correct = pred.len() == gt.len() && matches.len() == gt.len();
    Ok(InstanceMatch { correct, matches })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationErrors {
    pub dist_px: f64,
    pub dist_rel: f64,
    pub radius_rel: f64,
    pub area_rel: f64,
}

pub fn localization_errors(
    est: &DefectEstimate,
    gt: &DefectRecord,
    g: &ScanGeometry,
) -> Result<LocalizationErrors> {
    if !(gt.radius > 0.0) {
        return Err(Error::Argument(format!(
            "ground-truth defect {} has non-positive radius",
            gt.id
        )));
    }
    let dist_px = (est.center[0] - gt.center[0]).hypot(est.center[1] - gt.center[1]);
    let gt_area = gt.area();
    Ok(LocalizationErrors {
        dist_px,
        dist_rel: dist_px / g.detector_w as f64,
        radius_rel: (est.size_radius() - gt.radius).abs() / gt.radius,
        area_rel: (est.area - gt_area).abs() / gt_area,
    })
}

/// Errors for every matched `(estimate, record)` pair.
pub fn matched_errors(
    estimates: &[DefectEstimate],
    records: &[DefectRecord],
    matches: &[(usize, usize, f64)],
    g: &ScanGeometry,
) -> Result<Vec<LocalizationErrors>> {
    matches
        .iter()
        .map(|&(i, j, _)| {
            let est = estimates
                .get(i)
                .ok_or_else(|| Error::Argument(format!("estimate {i} has no match")))?;
            let rec = records
                .get(j)
                .ok_or_else(|| Error::Argument(format!("record {j} does not exist")))?;
            localization_errors(est, rec, g)
        })
        .collect()
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Per-sample evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEval {
    pub id: usize,
    pub pixel: PixelMetrics,
    pub n_pred: usize,
    pub n_gt: usize,
    pub correct: bool,
    pub errors: Vec<LocalizationErrors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationSummary {
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub correct_rate: f64,
    pub distance_relative_error: f64,
    pub area_relative_error: f64,
    pub radius_relative_error: f64,
    pub center_error_px: f64,
    pub matched_defects: usize,
    pub total_defects: usize,
}

/// Sample-averaged segmentation and localization report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: usize,
    pub sinogram_segmentation: SegmentationSummary,
    pub instance_segmentation: InstanceSummary,
}

impl MetricsReport {
    pub fn from_samples(samples: &[SampleEval]) -> Self {
        let errs: Vec<&LocalizationErrors> = samples.iter().flat_map(|s| &s.errors).collect();
        Self {
            samples: samples.len(),
            sinogram_segmentation: SegmentationSummary {
                iou: mean(samples.iter().map(|s| s.pixel.iou)),
                precision: mean(samples.iter().map(|s| s.pixel.precision)),
                recall: mean(samples.iter().map(|s| s.pixel.recall)),
                f1: mean(samples.iter().map(|s| s.pixel.f1)),
            },
            instance_segmentation: InstanceSummary {
                correct_rate: mean(samples.iter().map(|s| if s.correct { 1.0 } else { 0.0 })),
                distance_relative_error: mean(errs.iter().map(|e| e.dist_rel)),
                area_relative_error: mean(errs.iter().map(|e| e.area_rel)),
                radius_relative_error: mean(errs.iter().map(|e| e.radius_rel)),
                center_error_px: mean(errs.iter().map(|e| e.dist_px)),
                matched_defects: errs.len(),
                total_defects: samples.iter().map(|s| s.n_gt).sum(),
            },
        }
    }
}

/// One CSV line per sample, for plotting.
pub fn samples_csv(samples: &[SampleEval]) -> String {
    let mut out = String::from(
        "id,iou,precision,recall,f1,n_pred,n_gt,correct,mean_dist_px,mean_radius_rel,mean_area_rel\n",
    );
    for s in samples {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{},{},{},{:.6},{:.6},{:.6}\n",
            s.id,
            s.pixel.iou,
            s.pixel.precision,
            s.pixel.recall,
            s.pixel.f1,
            s.n_pred,
            s.n_gt,
            s.correct as u8,
            mean(s.errors.iter().map(|e| e.dist_px)),
            mean(s.errors.iter().map(|e| e.radius_rel)),
            mean(s.errors.iter().map(|e| e.area_rel)),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Method, Shape};
    use proptest::prelude::*;

    fn mask(rows: usize, cols: usize, on: &[(usize, usize)]) -> Raster {
        let mut m = Raster::zeros(rows, cols);
        for &(r, c) in on {
            m.set(r, c, 1.0);
        }
        m
    }

    #[test]
    fn identical_masks_score_one() {
        let m = mask(2, 4, &[(0, 1), (1, 2)]);
        let pm = pixel_metrics(&m, &m).unwrap();
        assert_eq!(
            pm,
            PixelMetrics {
                iou: 1.0,
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
    }

    #[test]
    fn empty_against_empty_scores_one() {
        let z = Raster::zeros(3, 3);
        assert_eq!(pixel_metrics(&z, &z).unwrap().iou, 1.0);
        assert_eq!(pixel_metrics(&z, &z).unwrap().f1, 1.0);
    }

    #[test]
    fn disjoint_masks_score_zero() {
        let a = mask(1, 4, &[(0, 0)]);
        let b = mask(1, 4, &[(0, 3)]);
        let pm = pixel_metrics(&a, &b).unwrap();
        assert_eq!((pm.iou, pm.precision, pm.recall, pm.f1), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn half_coverage() {
        let gt = mask(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)]);
        let pred = mask(1, 4, &[(0, 0), (0, 1)]);
        let pm = pixel_metrics(&pred, &gt).unwrap();
        assert_eq!(pm.precision, 1.0);
        assert_eq!(pm.recall, 0.5);
        assert_eq!(pm.iou, 0.5);
        assert!((pm.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pixel_metrics_validate_inputs() {
        assert!(pixel_metrics(&Raster::zeros(1, 2), &Raster::zeros(2, 1)).is_err());
        let bad = Raster::from_vec(1, 1, vec![0.5]).unwrap();
        assert!(pixel_metrics(&bad, &bad).is_err());
    }

    #[test]
    fn instance_counts_must_agree() {
        let a = mask(1, 6, &[(0, 0)]);
        let b = mask(1, 6, &[(0, 2)]);
        let c = mask(1, 6, &[(0, 4)]);
        let gts = vec![a.clone(), b.clone(), c];
        assert!(!instance_correct_rate(&[a.clone(), b.clone()], &gts, 0.5).unwrap().correct);
        assert!(instance_correct_rate(&gts, &gts, 0.5).unwrap().correct);
    }

    #[test]
    fn localization_closed_forms() {
        let g = ScanGeometry::default();
        let rec = DefectRecord {
            id: 0,
            shape: Shape::Circle,
            center: [100.0, 100.0],
            radius: 10.0,
            intensity_mean: 1.0,
            intensity_sigma: 0.1,
        };
        let exact = DefectEstimate {
            center: [100.0, 100.0],
            radius: Some(10.0),
            extents: None,
            area: rec.area(),
            method: Method::Circlebox,
        };
        let e = localization_errors(&exact, &rec, &g).unwrap();
        assert_eq!((e.dist_rel, e.radius_rel, e.area_rel), (0.0, 0.0, 0.0));
        let shifted = DefectEstimate {
            center: [103.0, 104.0],
            ..exact
        };
        let e = localization_errors(&shifted, &rec, &g).unwrap();
        assert!((e.dist_rel - 5.0 / 512.0).abs() < 1e-12);
        assert_eq!(e.dist_px, 5.0);
    }

    #[test]
    fn unmatched_estimate_is_an_error() {
        let g = ScanGeometry::default();
        assert!(matched_errors(&[], &[], &[(0, 0, 1.0)], &g).is_err());
    }

    fn random_mask(bits: &[bool]) -> Raster {
        Raster::from_vec(4, 8, bits.iter().map(|&b| b as u8 as f32).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_f1_consistent(
            a in proptest::collection::vec(any::<bool>(), 32),
            b in proptest::collection::vec(any::<bool>(), 32),
        ) {
            let (ma, mb) = (random_mask(&a), random_mask(&b));
            let ab = pixel_metrics(&ma, &mb).unwrap();
            let ba = pixel_metrics(&mb, &ma).unwrap();
            prop_assert_eq!(ab.iou, ba.iou);
            if ab.precision + ab.recall > 0.0 {
                let f1 = 2.0 * ab.precision * ab.recall / (ab.precision + ab.recall);
                prop_assert!((ab.f1 - f1).abs() < 1e-12);
            }
        }

        #[test]
        fn instance_matching_permutation_invariant(
            masks in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 32), 1..4),
            rot in 0usize..4,
        ) {
            let gts: Vec<Raster> = masks.iter().map(|m| random_mask(m)).collect();
            let mut preds = gts.clone();
            let n = preds.len();
            preds.rotate_left(rot % n);
            let mut rev = gts.clone();
            rev.reverse();
            let a = instance_correct_rate(&preds, &gts, 0.5).unwrap().correct;
            let b = instance_correct_rate(&gts, &rev, 0.5).unwrap().correct;
            let c = instance_correct_rate(&gts, &gts, 0.5).unwrap().correct;
            prop_assert_eq!(a, c);
            prop_assert_eq!(b, c);
        }
    }
}
