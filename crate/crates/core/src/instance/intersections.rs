use crate::types::Skeleton;

/// Runs in consecutive rows belong to the same path when their centers
/// differ by at most this many bins.
pub const LINK_TOLERANCE: f64 = 3.0;
/// Runs wider than this multiple of their path's median radius are merged
/// projections of several defects.
pub const RADIUS_OUTLIER_FACTOR: f64 = 1.8;
pub const RUN_COUNT_PERCENTILE: f64 = 0.9;

/// Nearest-rank percentile of the per-row run counts.
pub fn run_count_percentile(sk: &Skeleton, q: f64) -> usize {
    let mut counts = sk.runs_per_row();
    if counts.is_empty() {
        return 0;
    }
    counts.sort_unstable();
    let rank = ((q * counts.len() as f64).ceil() as usize).clamp(1, counts.len());
    counts[rank - 1]
}

/// Groups runs into paths: runs in adjacent rows whose centers are within
/// `tolerance` bins are connected. Each path lists run indices in order.
pub fn link_paths(sk: &Skeleton, tolerance: f64) -> Vec<Vec<usize>> {
    let n = sk.runs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let ranges = sk.row_ranges();
    for row in 1..sk.n_rows {
        for a in ranges[row - 1].clone() {
            for b in ranges[row].clone() {
                if (sk.runs[a].center() - sk.runs[b].center()).abs() <= tolerance {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        by_root.entry(root).or_default().push(i);
    }
    by_root.into_values().collect()
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Lower median: always one of the inputs.
pub(crate) fn lower_median(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// Removes the places where defect traces cross.
///
/// With `k` the 90th-percentile run count per row, rows holding fewer than
/// `k` runs lose all their runs (two traces merged into one run there). Of
/// what remains, runs wider than 1.8× the median radius of their linked path
/// are dropped as well.
pub fn remove_intersections(sk: &Skeleton) -> Skeleton {
    let k = run_count_percentile(sk, RUN_COUNT_PERCENTILE);
    let counts = sk.runs_per_row();
    let kept = sk.retain(|_, r| counts[r.row] >= k);

    let mut drop = vec![false; kept.runs.len()];
    for path in link_paths(&kept, LINK_TOLERANCE) {
        let mut radii: Vec<f64> = path.iter().map(|&i| kept.runs[i].radius()).collect();
        let med = median(&mut radii);
        for &i in &path {
            if kept.runs[i].radius() > RADIUS_OUTLIER_FACTOR * med {
                drop[i] = true;
            }
        }
    }
    kept.retain(|i, _| !drop[i])
}
