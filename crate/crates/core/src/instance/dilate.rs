use serde::{Deserialize, Serialize};

use crate::geometry::ScanGeometry;
use crate::raster::Raster;
use crate::types::{Skeleton, SinusoidParams};

use super::intersections::lower_median;

/// Which rows without a run of a label are rebuilt from its fitted trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refill {
    None,
    /// Only these rows (e.g. the ones cleared as intersections).
    Rows(Vec<usize>),
    /// Every row in which the label has no run.
    Missing,
}

/// Half-width given to a refilled run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefillWidth {
    /// The (lower) median radius of the label's runs.
    Median,
    /// Where the fitted trace lies inside an unlabeled (merged) run, the
    /// distance from the trace to the nearer end of that run, which is the
    /// label's own outer edge; capped at the label's largest measured
    /// radius. Elsewhere, linear interpolation between the radii of the
    /// nearest rows on either side holding a run of the label (rows wrap
    /// around: a projection at θ + π has the width it has at θ). Follows
    /// the angular width variation of non-circular defects.
    #[default]
    Adaptive,
}

/// Bins `[left, right]` of a refilled run of radius `radius` centered on the
/// trace position `s`. Always `2·radius + 1` wide before clipping.
pub fn refill_span(s: f64, radius: f64, detector_w: usize) -> Option<(usize, usize)> {
    let left = (s - radius + 0.5).floor();
    let right = left + (2.0 * radius).round();
    let max = detector_w as f64 - 1.0;
    if right < 0.0 || left > max {
        return None;
    }
    Some((left.max(0.0) as usize, right.min(max) as usize))
}

/// Radius of `row` interpolated between the nearest rows with a known
/// radius, wrapping around the angle axis.
fn interpolated_radius(radius: &[Option<f64>], row: usize) -> Option<f64> {
    let n = radius.len();
    let (back, r0) = (1..n).find_map(|d| radius[(row + n - d) % n].map(|r| (d, r)))?;
    let (ahead, r1) = (1..n).find_map(|d| radius[(row + d) % n].map(|r| (d, r)))?;
    Some(r0 + (r1 - r0) * back as f64 / (back + ahead) as f64)
}

/// Distance from trace position `s` to the nearer end of the unlabeled run
/// of `row` that contains it.
fn merged_edge_radius(sk: &Skeleton, row: usize, s: f64) -> Option<f64> {
    sk.runs
        .iter()
        .zip(&sk.labels)
        .filter(|(run, &l)| l == 0 && run.row == row)
        .find(|(run, _)| s >= run.left as f64 && s <= run.right as f64)
        .map(|(run, _)| (s - run.left as f64).min(run.right as f64 - s))
}

/// One mask per label: every labeled run is painted back over its stored
/// endpoints, and rows chosen by `refill` get a run centered on the label's
/// fitted trace, with a half-width chosen by `width`.
pub fn dilate_to_masks(
    sk: &Skeleton,
    sinusoids: &[SinusoidParams],
    g: &ScanGeometry,
    refill: &Refill,
    width: RefillWidth,
) -> Vec<Raster> {
    (1..=sinusoids.len() as u32)
        .map(|label| {
            let mut mask = Raster::zeros(sk.n_rows, sk.n_cols);
            // per-row extent of the label's runs
            let mut span: Vec<Option<(usize, usize)>> = vec![None; sk.n_rows];
            let mut radii = Vec::new();
            for (run, &l) in sk.runs.iter().zip(&sk.labels) {
                if l == label {
                    mask.row_mut(run.row)[run.left..=run.right].fill(1.0);
                    radii.push(run.radius());
                    let e = span[run.row].get_or_insert((run.left, run.right));
                    *e = (e.0.min(run.left), e.1.max(run.right));
                }
            }
            if radii.is_empty() {
                return mask;
            }
            let r_max = radii.iter().copied().fold(0.0, f64::max);
            let r_bar = lower_median(&mut radii);
            let row_radius: Vec<Option<f64>> = span
                .iter()
                .map(|e| e.map(|(l, r)| (r - l) as f64 / 2.0))
                .collect();
            let fit = &sinusoids[label as usize - 1];
            let rows: Vec<usize> = match refill {
                Refill::None => Vec::new(),
                Refill::Rows(rows) => rows.clone(),
                Refill::Missing => (0..sk.n_rows).filter(|&r| span[r].is_none()).collect(),
            };
            for row in rows {
                if row >= sk.n_rows || span[row].is_some() {
                    continue;
                }
                let s = fit.trace_at(row, g);
                let r = match width {
                    RefillWidth::Median => r_bar,
                    RefillWidth::Adaptive => merged_edge_radius(sk, row, s)
                        .map(|r| r.min(r_max))
                        .or_else(|| interpolated_radius(&row_radius, row))
                        .unwrap_or(r_bar),
                };
                if let Some((l, r)) = refill_span(s, r, sk.n_cols) {
                    mask.row_mut(row)[l..=r].fill(1.0);
                }
            }
            mask
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::skeleton::skeletonize;
    use crate::types::Run;
    use proptest::prelude::*;

    #[test]
    fn single_label_round_trip() {
        let g = ScanGeometry::square(64).unwrap();
        let mut m = Raster::zeros(64, 64);
        for r in 0..64 {
            m.row_mut(r)[20 + r % 5..=30 + r % 3].fill(1.0);
        }
        let mut sk = skeletonize(&m).unwrap();
        sk.labels.iter_mut().for_each(|l| *l = 1);
        let fit = SinusoidParams::new(31.5, 31.5);
        let out = dilate_to_masks(&sk, &[fit], &g, &Refill::Missing, RefillWidth::Median);
        assert_eq!(out, vec![m]);
    }

    #[test]
    fn refilled_row_width() {
        let g = ScanGeometry::default();
        let fit = SinusoidParams::new(300.0, 200.0);
        let mut runs = Vec::new();
        for row in 0..512 {
            if row == 100 {
                continue;
            }
            let s = fit.trace_at(row, &g).round() as usize;
            runs.push(Run::new(row, s - 10, s + 11));
        }
        let mut sk = Skeleton::new(512, 512, runs);
        sk.labels.iter_mut().for_each(|l| *l = 1);
        let out = dilate_to_masks(&sk, &[fit], &g, &Refill::Rows(vec![100]), RefillWidth::Median);
        let ones: Vec<usize> = (0..512).filter(|&j| out[0].get(100, j) == 1.0).collect();
        // r̄ = 10.5 → width 2·10.5 + 1 = 22, centered on the trace
        assert_eq!(ones.len(), 22);
        let mid = (ones[0] + ones[21]) as f64 / 2.0;
        assert!((mid - fit.trace_at(100, &g)).abs() <= 0.5);

        let none = dilate_to_masks(&sk, &[fit], &g, &Refill::None, RefillWidth::Median);
        assert_eq!(none[0].row(100).iter().filter(|&&v| v == 1.0).count(), 0);
    }

    #[test]
    fn interpolated_width_follows_neighbours() {
        let radius = vec![Some(4.0), None, None, Some(10.0), None];
        assert_eq!(interpolated_radius(&radius, 1), Some(6.0));
        assert_eq!(interpolated_radius(&radius, 2), Some(8.0));
        // row 4 sits between row 3 and row 0 (wrapped)
        assert_eq!(interpolated_radius(&radius, 4), Some(7.0));
        assert_eq!(interpolated_radius(&[None, None], 0), None);
    }

    #[test]
    fn adaptive_refill_matches_median_for_constant_width() {
        let g = ScanGeometry::default();
        let fit = SinusoidParams::new(300.0, 200.0);
        let runs: Vec<Run> = (0..512)
            .filter(|&row| !(200..210).contains(&row))
            .map(|row| {
                let s = fit.trace_at(row, &g).round() as usize;
                Run::new(row, s - 10, s + 10)
            })
            .collect();
        let mut sk = Skeleton::new(512, 512, runs);
        sk.labels.iter_mut().for_each(|l| *l = 1);
        let a = dilate_to_masks(&sk, &[fit], &g, &Refill::Missing, RefillWidth::Median);
        let b = dilate_to_masks(&sk, &[fit], &g, &Refill::Missing, RefillWidth::Adaptive);
        assert_eq!(a, b);
    }

    #[test]
    fn merged_rows_take_the_outer_edge() {
        let g = ScanGeometry::default();
        let fit = SinusoidParams::new(255.5, 255.5);
        // label 1 has radius 6 everywhere except row 7, where its run merged
        // with a neighbour on the right into one unlabeled run
        let mut runs: Vec<Run> = (0..512).filter(|&r| r != 7).map(|r| Run::new(r, 250, 262)).collect();
        runs.push(Run::new(7, 251, 290));
        let mut sk = Skeleton::new(512, 512, runs);
        for (run, l) in sk.runs.iter().zip(sk.labels.iter_mut()) {
            *l = if run.row == 7 { 0 } else { 1 };
        }
        let out = dilate_to_masks(&sk, &[fit], &g, &Refill::Missing, RefillWidth::Adaptive);
        let ones: Vec<usize> = (0..512).filter(|&j| out[0].get(7, j) == 1.0).collect();
        // 255.5 - 251 = 4.5 → width 10 centered on the trace
        assert_eq!((ones[0], *ones.last().unwrap()), (251, 260));
    }

    proptest! {
        #[test]
        fn refill_span_width(s in 40.0f64..400.0, twice_r in 0u32..60) {
            let r = twice_r as f64 / 2.0;
            let (l, rr) = refill_span(s, r, 512).unwrap();
            prop_assert_eq!(rr - l, twice_r as usize);
            prop_assert!(((l + rr) as f64 / 2.0 - s).abs() <= 0.5 + 1e-9);
        }
    }
}
