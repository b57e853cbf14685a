use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::ScanGeometry;
use crate::types::{Skeleton, SinusoidParams};

use super::hough::{hough_sinusoid, HoughParams};
use super::intersections::{median, RADIUS_OUTLIER_FACTOR};

/// A run joins a sinusoid when the trace passes within this many bins of
/// the run center.
pub const ASSIGN_TOLERANCE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReclassifyParams {
    pub hough: HoughParams,
    pub assign_tolerance: f64,
}

impl Default for ReclassifyParams {
    fn default() -> Self {
        Self {
            hough: HoughParams::default(),
            assign_tolerance: ASSIGN_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reclassification {
    /// Input runs with final labels; label `i + 1` belongs to `sinusoids[i]`.
    pub skeleton: Skeleton,
    /// Row-scan labels, one per run.
    pub provisional: Vec<u32>,
    pub sinusoids: Vec<SinusoidParams>,
    pub diagnostics: Vec<String>,
}

/// Row-scan labeling: within a block of consecutive non-empty rows the
/// n-th run of every row gets label `start + n`; an empty row closes the
/// block, and the next block starts after the labels the previous row used.
pub fn provisional_labels(sk: &Skeleton) -> Vec<u32> {
    let mut labels = vec![0u32; sk.runs.len()];
    let (mut start, mut end) = (1u32, 1u32);
    for range in sk.row_ranges() {
        if range.is_empty() {
            start = end;
        } else {
            end = start + range.len() as u32;
            for (k, i) in range.enumerate() {
                labels[i] = start + k as u32;
            }
        }
    }
    labels
}

/// Labels every run by the fitted sinusoid whose trace passes closest to its
/// center, within `tolerance` bins.
///
/// Runs left unlabeled: those no trace reaches, those containing more than
/// one trace (merged projections), and those wider than 1.8× the median
/// radius of their label. Labels are renumbered so that every remaining
/// label has at least one run; `sinusoids` is filtered to match.
pub fn assign_runs(
    sk: &Skeleton,
    sinusoids: &[SinusoidParams],
    g: &ScanGeometry,
    tolerance: f64,
) -> (Skeleton, Vec<SinusoidParams>) {
    let mut out = sk.clone();
    for (run, label) in out.runs.iter().zip(out.labels.iter_mut()) {
        *label = 0;
        let traces: Vec<f64> = sinusoids.iter().map(|p| p.trace_at(run.row, g)).collect();
        let inside = traces
            .iter()
            .filter(|&&s| s >= run.left as f64 - 0.5 && s <= run.right as f64 + 0.5)
            .count();
        if inside > 1 {
            continue;
        }
        let best = traces
            .iter()
            .enumerate()
            .map(|(i, &s)| (i, (s - run.center()).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, d)) = best {
            if d <= tolerance {
                *label = i as u32 + 1;
            }
        }
    }

    for l in 1..=sinusoids.len() as u32 {
        let mut radii: Vec<f64> = out
            .runs
            .iter()
            .zip(&out.labels)
            .filter(|(_, &x)| x == l)
            .map(|(r, _)| r.radius())
            .collect();
        if radii.is_empty() {
            continue;
        }
        let med = median(&mut radii);
        for (run, label) in out.runs.iter().zip(out.labels.iter_mut()) {
            if *label == l && run.radius() > RADIUS_OUTLIER_FACTOR * med {
                *label = 0;
            }
        }
    }

    // compact labels, dropping sinusoids without runs
    let mut remap = vec![0u32; sinusoids.len() + 1];
    let mut kept = Vec::new();
    for (i, p) in sinusoids.iter().enumerate() {
        if out.labels.contains(&(i as u32 + 1)) {
            kept.push(*p);
            remap[i + 1] = kept.len() as u32;
        }
    }
    for label in out.labels.iter_mut() {
        *label = remap[*label as usize];
    }
    (out, kept)
}

/// Provisional row-scan labels, then a Hough fit over all run centers, then
/// final labels by nearest fitted sinusoid.
pub fn reclassify(sk: &Skeleton, g: &ScanGeometry, params: &ReclassifyParams) -> Result<Reclassification> {
    let provisional = provisional_labels(sk);
    let mut diagnostics = Vec::new();
    if sk.is_empty() {
        diagnostics.push("skeleton is empty; nothing to label".to_string());
        return Ok(Reclassification {
            skeleton: sk.clone(),
            provisional,
            sinusoids: Vec::new(),
            diagnostics,
        });
    }
    let points: Vec<(usize, f64)> = sk.runs.iter().map(|r| (r.row, r.center())).collect();
    let fitted = hough_sinusoid(&points, g, &params.hough)?;
    if fitted.is_empty() {
        diagnostics.push(format!(
            "no Hough peak reached the vote threshold for {} points",
            points.len()
        ));
        log::warn!("reclassify: {}", diagnostics[0]);
        let mut skeleton = sk.clone();
        skeleton.labels.iter_mut().for_each(|l| *l = 0);
        return Ok(Reclassification {
            skeleton,
            provisional,
            sinusoids: Vec::new(),
            diagnostics,
        });
    }
    let (skeleton, sinusoids) = assign_runs(sk, &fitted, g, params.assign_tolerance);
    let unlabeled = skeleton.labels.iter().filter(|&&l| l == 0).count();
    if unlabeled > 0 {
        diagnostics.push(format!("{unlabeled} runs matched no sinusoid"));
    }
    let n_prov = provisional.iter().copied().max().unwrap_or(0);
    log::debug!(
        "reclassify: {} provisional labels -> {} sinusoids",
        n_prov,
        sinusoids.len()
    );
    Ok(Reclassification {
        skeleton,
        provisional,
        sinusoids,
        diagnostics,
    })
}
