use crate::error::Result;
use crate::raster::Raster;
use crate::types::{Run, Skeleton};

/// Reduces every maximal row run of foreground bins to a [`Run`], keeping
/// both endpoints so the mask can be rebuilt exactly.
pub fn skeletonize(mask: &Raster) -> Result<Skeleton> {
    mask.ensure_binary("mask")?;
    let (rows, cols) = mask.dims();
    let mut runs = Vec::new();
    for r in 0..rows {
        let row = mask.row(r);
        let mut c = 0;
        while c < cols {
            if row[c] == 0.0 {
                c += 1;
                continue;
            }
            let left = c;
            while c + 1 < cols && row[c + 1] != 0.0 {
                c += 1;
            }
            runs.push(Run::new(r, left, c));
            c += 1;
        }
    }
    Ok(Skeleton::new(rows, cols, runs))
}

/// Rebuilds the mask covered by all runs, ignoring labels.
pub fn paint(sk: &Skeleton) -> Raster {
    let mut m = Raster::zeros(sk.n_rows, sk.n_cols);
    for run in &sk.runs {
        m.row_mut(run.row)[run.left..=run.right].fill(1.0);
    }
    m
}

/// Merges runs of the same row separated by at most `max_gap` empty bins.
/// Closes pinholes left by an imperfect segmenter.
pub fn bridge_gaps(sk: &Skeleton, max_gap: usize) -> Skeleton {
    let mut runs: Vec<Run> = Vec::with_capacity(sk.runs.len());
    for &run in &sk.runs {
        match runs.last_mut() {
            Some(prev) if prev.row == run.row && run.left - prev.right - 1 <= max_gap => {
                prev.right = run.right;
            }
            _ => runs.push(run),
        }
    }
    Skeleton::new(sk.n_rows, sk.n_cols, runs)
}

/// Drops runs narrower than `min_width` bins (isolated speckle).
pub fn drop_narrow_runs(sk: &Skeleton, min_width: usize) -> Skeleton {
    sk.retain(|_, r| r.width() >= min_width)
}
