//! End-to-end runs over a manifest: segment, separate instances, localize,
//! and score against ground truth.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{Localizer, LocalizerRegistry, ShapeHint};
use crate::dataset::{load_sample, read_json, sample_dir, sample_seed, write_json, Manifest, SampleEntry};
use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::instance::{separate_instances, InstanceParams, Instances};
use crate::metrics::{
    instance_correct_rate, localization_errors, pixel_metrics, samples_csv, LocalizationErrors,
    MetricsReport, SampleEval, DEFAULT_IOU_MIN,
};
use crate::raster::{write_mask, Raster};
use crate::segment::{load_mask, SegmentInput, Segmenter, SegmenterParams, SegmenterRegistry};
use crate::types::{DefectEstimate, DefectRecord, SinusoidParams};

pub const METRICS_FILE: &str = "metrics.json";
pub const SAMPLES_CSV: &str = "samples.csv";
pub const ESTIMATES_FILE: &str = "estimates.json";
pub const SINUSOIDS_FILE: &str = "sinusoids.json";
pub const PRED_MASK_FILE: &str = "pred_mask.sgr";

/// Location of an externally produced mask for a sinogram: the sinogram's
/// relative path with `.sgr` replaced by `.mask.sgr`, under `masks_dir`.
pub fn external_mask_path(masks_dir: &Path, sino_rel: &Path) -> PathBuf {
    let name = sino_rel
        .file_stem()
        .map(|s| format!("{}.mask.sgr", s.to_string_lossy()))
        .unwrap_or_else(|| "mask.sgr".into());
    masks_dir.join(sino_rel.with_file_name(name))
}

pub fn instance_file(k: usize) -> String {
    format!("instance_{k}.sgr")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Segmentation strategy name, see [`SegmenterRegistry`].
    pub method: String,
    pub segmenter: SegmenterParams,
    pub instance: InstanceParams,
    pub shape: ShapeHint,
    pub iou_min: f64,
    /// Directory of `*.mask.sgr` files for the `external` method.
    pub masks_dir: Option<PathBuf>,
    /// Reseeds the randomized segmenters; by default each sample uses the
    /// seed recorded in the manifest.
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: "oracle".into(),
            segmenter: SegmenterParams::default(),
            instance: InstanceParams::default(),
            shape: ShapeHint::Auto,
            iou_min: DEFAULT_IOU_MIN,
            masks_dir: None,
            seed: None,
        }
    }
}

/// Strategies resolved once per run.
pub struct Stages {
    pub segmenter: Box<dyn Segmenter>,
    pub localizer: Box<dyn Localizer>,
    pub config: PipelineConfig,
}

impl Stages {
    pub fn new(config: &PipelineConfig) -> Result<Self> {
        if config.method == "external" && config.masks_dir.is_none() {
            return Err(Error::Validation(
                "the external method needs a masks directory".into(),
            ));
        }
        Ok(Self {
            segmenter: SegmenterRegistry::builtin().create(&config.method, &config.segmenter)?,
            localizer: LocalizerRegistry::builtin().create(config.shape.localizer_name())?,
            config: config.clone(),
        })
    }
}

/// Everything produced for one sample.
#[derive(Debug, Clone)]
pub struct SampleResult {
    pub id: usize,
    pub mask: Raster,
    pub instances: Instances,
    /// One entry per instance mask; `None` where localization failed.
    pub estimates: Vec<Option<DefectEstimate>>,
    pub eval: SampleEval,
}

/// Ground truth a sample is scored against.
pub struct Truth<'a> {
    pub mask: &'a Raster,
    pub instances: &'a [Raster],
    pub records: &'a [DefectRecord],
}

/// Localizes each instance mask; failures are logged and left as `None`.
pub fn localize_all(
    masks: &[Raster],
    localizer: &dyn Localizer,
    g: &ScanGeometry,
    id: usize,
) -> Vec<Option<DefectEstimate>> {
    masks
        .iter()
        .enumerate()
        .map(|(k, m)| match localizer.estimate(m, g) {
            Ok(e) => Some(e),
            Err(e) => {
                log::warn!("sample {id}: instance {k}: {e}");
                None
            }
        })
        .collect()
}

/// Scores predictions of one sample.
pub fn evaluate_sample(
    id: usize,
    mask: &Raster,
    instances: &[Raster],
    estimates: &[Option<DefectEstimate>],
    truth: &Truth<'_>,
    iou_min: f64,
    g: &ScanGeometry,
) -> Result<SampleEval> {
    let pixel = pixel_metrics(mask, truth.mask)?;
    let m = instance_correct_rate(instances, truth.instances, iou_min)?;
    let errors = m
        .matches
        .iter()
        .filter_map(|&(i, j, _)| {
            let est = estimates.get(i)?.as_ref()?;
            truth.records.get(j).map(|rec| localization_errors(est, rec, g))
        })
        .collect::<Result<Vec<LocalizationErrors>>>()?;
    Ok(SampleEval {
        id,
        pixel,
        n_pred: instances.len(),
        n_gt: truth.instances.len(),
        correct: m.correct,
        errors,
    })
}

/// Runs every stage after segmentation on an already segmented mask.
pub fn process_mask(
    id: usize,
    mask: Raster,
    truth: &Truth<'_>,
    stages: &Stages,
    g: &ScanGeometry,
) -> Result<SampleResult> {
    let instances = separate_instances(&mask, g, &stages.config.instance)?;
    let estimates = localize_all(&instances.masks, stages.localizer.as_ref(), g, id);
    let eval = evaluate_sample(
        id,
        &mask,
        &instances.masks,
        &estimates,
        truth,
        stages.config.iou_min,
        g,
    )?;
    Ok(SampleResult {
        id,
        mask,
        instances,
        estimates,
        eval,
    })
}

/// Segments one sample, then [`process_mask`].
pub fn process_sample(
    id: usize,
    input: &SegmentInput<'_>,
    truth: &Truth<'_>,
    stages: &Stages,
    g: &ScanGeometry,
) -> Result<SampleResult> {
    let mask = stages.segmenter.segment(input)?;
    process_mask(id, mask, truth, stages, g)
}

fn run_entry(root: &Path, entry: &SampleEntry, stages: &Stages, g: &ScanGeometry) -> Result<SampleResult> {
    let s = load_sample(root, entry)?;
    let external = stages
        .config
        .masks_dir
        .as_ref()
        .map(|d| external_mask_path(d, &entry.paths.sino));
    let input = SegmentInput {
        sino: &s.sino,
        clean_sino: Some(&s.clean_sino),
        external_mask: external.as_deref(),
        seed: stages.config.seed.map_or(entry.seed, |s| sample_seed(s, entry.id)),
    };
    let truth = Truth {
        mask: &s.mask,
        instances: &s.instances,
        records: &s.records,
    };
    process_sample(entry.id, &input, &truth, stages, g)
}

fn write_result(out: &Path, r: &SampleResult) -> Result<()> {
    let dir = out.join(sample_dir(r.id));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_mask(&r.mask, dir.join(PRED_MASK_FILE))?;
    for (k, m) in r.instances.masks.iter().enumerate() {
        write_mask(m, dir.join(instance_file(k)))?;
    }
    write_json(&dir.join(ESTIMATES_FILE), &r.estimates)?;
    write_json(&dir.join(SINUSOIDS_FILE), &r.instances.sinusoids)
}

/// Runs the whole pipeline over `manifest` (whose files live under `root`)
/// and writes per-sample outputs, `metrics.json` and `samples.csv` to `out`.
/// Output bytes do not depend on thread count or scheduling.
pub fn run_pipeline(
    manifest: &Manifest,
    root: &Path,
    config: &PipelineConfig,
    out: &Path,
) -> Result<MetricsReport> {
    let g = manifest.spec.geometry()?;
    let stages = Stages::new(config)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let evals = manifest
        .samples
        .par_iter()
        .map(|entry| {
            let r = run_entry(root, entry, &stages, &g)?;
            write_result(out, &r)?;
            Ok(r.eval)
        })
        .collect::<Result<Vec<SampleEval>>>()?;
    write_report(out, &evals)
}

fn write_report(out: &Path, evals: &[SampleEval]) -> Result<MetricsReport> {
    let report = MetricsReport::from_samples(evals);
    write_json(&out.join(METRICS_FILE), &report)?;
    let csv = out.join(SAMPLES_CSV);
    fs::write(&csv, samples_csv(evals)).map_err(|e| Error::io(&csv, e))?;
    Ok(report)
}

/// Re-scores a finished pipeline output directory against the manifest's
/// ground truth and rewrites its report.
pub fn evaluate_outputs(manifest: &Manifest, root: &Path, results: &Path, iou_min: f64) -> Result<MetricsReport> {
    let g = manifest.spec.geometry()?;
    let evals = manifest
        .samples
        .par_iter()
        .map(|entry| {
            let s = load_sample(root, entry)?;
            let dir = results.join(sample_dir(entry.id));
            let mask = load_mask(dir.join(PRED_MASK_FILE))?;
            let estimates: Vec<Option<DefectEstimate>> = read_json(&dir.join(ESTIMATES_FILE))?;
            let instances = (0..estimates.len())
                .map(|k| load_mask(dir.join(instance_file(k))))
                .collect::<Result<Vec<_>>>()?;
            let truth = Truth {
                mask: &s.mask,
                instances: &s.instances,
                records: &s.records,
            };
            evaluate_sample(entry.id, &mask, &instances, &estimates, &truth, iou_min, &g)
        })
        .collect::<Result<Vec<SampleEval>>>()?;
    write_report(results, &evals)
}

/// Reads the sinusoid fits written for one sample.
pub fn read_sinusoids(results: &Path, id: usize) -> Result<Vec<SinusoidParams>> {
    read_json(&results.join(sample_dir(id)).join(SINUSOIDS_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn external_mask_naming() {
        let p = external_mask_path(Path::new("/m"), Path::new("samples/000003/sino.sgr"));
        assert_eq!(p, PathBuf::from("/m/samples/000003/sino.mask.sgr"));
    }

    #[test]
    fn external_needs_masks_dir() {
        let cfg = PipelineConfig {
            method: "external".into(),
            ..PipelineConfig::default()
        };
        assert!(Stages::new(&cfg).is_err());
    }
}
