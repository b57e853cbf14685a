//! Seeded synthetic datasets: phantoms, rotation augmentation, defect
//! injection, ground-truth masks and the manifest that ties them together.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::phantom::{gen_phantom, gt_masks, inject_defects, rng_for, rotate_phantom, DefectSpec, GroundTruth};
use crate::raster::{read_raster, write_mask, write_raster, Dtype, Raster};
use crate::segment::load_mask;
use crate::types::DefectRecord;

pub const MANIFEST_FILE: &str = "manifest.json";

const SPLIT_SALT: u64 = 0x5911_7a55_1e6e_0001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub seed: u64,
    /// Ignored when `phantom_paths` is non-empty.
    #[serde(default)]
    pub n_phantoms: usize,
    #[serde(default = "default_size")]
    pub image_size: usize,
    #[serde(default = "default_size")]
    pub n_angles: usize,
    #[serde(default = "default_size")]
    pub detector_w: usize,
    #[serde(default)]
    pub defects: DefectSpec,
    #[serde(default = "default_rotations")]
    pub rotations_deg: Vec<f64>,
    #[serde(default)]
    pub split: SplitFractions,
    /// SGR1 float rasters used as clean phantoms instead of generated ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phantom_paths: Vec<PathBuf>,
}

fn default_size() -> usize {
    512
}

fn default_rotations() -> Vec<f64> {
    vec![0.0]
}

impl DatasetSpec {
    pub fn new(seed: u64, n_phantoms: usize) -> Self {
        Self {
            seed,
            n_phantoms,
            image_size: 512,
            n_angles: 512,
            detector_w: 512,
            defects: DefectSpec::default(),
            rotations_deg: default_rotations(),
            split: SplitFractions::default(),
            phantom_paths: Vec::new(),
        }
    }

    /// Full training-set scale: 500 phantoms, each rotated
    /// 0 to 80 degrees in 1 degree steps, up to three defects each.
    pub fn full_scale(seed: u64) -> Self {
        Self {
            rotations_deg: (0..=80).map(f64::from).collect(),
            split: SplitFractions {
                train: 1.0,
                val: 0.0,
                test: 0.0,
            },
            ..Self::new(seed, 500)
        }
    }

    pub fn geometry(&self) -> Result<ScanGeometry> {
        ScanGeometry::new(self.image_size, self.n_angles, self.detector_w)
    }

    pub fn phantom_count(&self) -> usize {
        if self.phantom_paths.is_empty() {
            self.n_phantoms
        } else {
            self.phantom_paths.len()
        }
    }

    pub fn validate(&self) -> Result<ScanGeometry> {
        let g = self.geometry()?;
        self.defects.validate(&g)?;
        if self.phantom_count() == 0 {
            return Err(Error::Validation(
                "n_phantoms must be at least 1 (or phantom_paths non-empty)".into(),
            ));
        }
        if self.rotations_deg.is_empty() || self.rotations_deg.iter().any(|d| !d.is_finite()) {
            return Err(Error::Validation(
                "rotations_deg must be a non-empty list of finite angles".into(),
            ));
        }
        let s = self.split;
        let parts = [("split.train", s.train), ("split.val", s.val), ("split.test", s.test)];
        if let Some((name, v)) = parts.iter().find(|(_, v)| !(*v >= 0.0)) {
            return Err(Error::Validation(format!("{name} must be >= 0, got {v}")));
        }
        if ((s.train + s.val + s.test) - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "split fractions must sum to 1, got {}",
                s.train + s.val + s.test
            )));
        }
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePaths {
    pub clean_sino: PathBuf,
    pub sino: PathBuf,
    pub mask: PathBuf,
    pub instance_masks: Vec<PathBuf>,
    pub records: PathBuf,
}

impl SamplePaths {
    /// Relative locations of the files of sample `id` holding `n` defects.
    pub fn for_sample(id: usize, n: usize) -> Self {
        let dir = sample_dir(id);
        Self {
            clean_sino: dir.join("clean_sino.sgr"),
            sino: dir.join("sino.sgr"),
            mask: dir.join("mask.sgr"),
            instance_masks: (0..n).map(|k| dir.join(format!("instance_{k}.sgr"))).collect(),
            records: dir.join("records.json"),
        }
    }
}

/// Relative directory of sample `id`.
pub fn sample_dir(id: usize) -> PathBuf {
    PathBuf::from("samples").join(format!("{id:06}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: usize,
    pub seed: u64,
    pub phantom: usize,
    pub rotation_deg: f64,
    pub n_defects: usize,
    pub paths: SamplePaths,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: DatasetSpec,
    pub samples: Vec<SampleEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleEntry> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG seed of one sample: the dataset seed xor the sample index, mixed so
/// that neighbouring indices get unrelated streams.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ index as u64)
}

fn phantom_seed(seed: u64, phantom: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ phantom as u64)
}

/// Per-phantom split assignment, so rotations of one phantom never straddle
/// splits.
fn phantom_splits(spec: &DatasetSpec) -> Vec<Split> {
    let n = spec.phantom_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(splitmix64(spec.seed ^ SPLIT_SALT)));
    let n_train = (spec.split.train * n as f64).round() as usize;
    let n_val = ((spec.split.val * n as f64).round() as usize).min(n - n_train.min(n));
    let mut splits = vec![Split::Test; n];
    for (rank, &p) in order.iter().enumerate() {
        splits[p] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }
    splits
}

/// The full sample list of a dataset, without generating anything.
pub fn plan(spec: &DatasetSpec) -> Result<Vec<SampleEntry>> {
    spec.validate()?;
    let splits = phantom_splits(spec);
    let n_rot = spec.rotations_deg.len();
    Ok((0..spec.phantom_count() * n_rot)
        .map(|id| {
            let (phantom, r) = (id / n_rot, id % n_rot);
            let seed = sample_seed(spec.seed, id);
            let d = &spec.defects;
            let n_defects = if d.count_min == d.count_max {
                d.count_min
            } else {
                rng_for(seed).random_range(d.count_min..=d.count_max)
            };
            SampleEntry {
                id,
                seed,
                phantom,
                rotation_deg: spec.rotations_deg[r],
                n_defects,
                paths: SamplePaths::for_sample(id, n_defects),
                split: splits[phantom],
            }
        })
        .collect())
}

/// In-memory content of one generated sample.
#[derive(Debug, Clone)]
pub struct SampleData {
    pub phantom: Raster,
    pub defected: Raster,
    pub records: Vec<DefectRecord>,
    pub truth: GroundTruth,
}

fn clean_phantom(spec: &DatasetSpec, entry: &SampleEntry, g: &ScanGeometry) -> Result<Raster> {
    let base = match spec.phantom_paths.get(entry.phantom) {
        Some(path) => {
            let p = read_raster(path)?;
            if p.dims() != (g.image_h, g.image_w) {
                return Err(Error::Validation(format!(
                    "phantom {} is {}x{}, expected {}x{}",
                    path.display(),
                    p.rows(),
                    p.cols(),
                    g.image_h,
                    g.image_w
                )));
            }
            p
        }
        None => gen_phantom(phantom_seed(spec.seed, entry.phantom), g),
    };
    Ok(if entry.rotation_deg == 0.0 {
        base
    } else {
        rotate_phantom(&base, entry.rotation_deg, g)
    })
}

/// Generates one sample of a plan in memory.
pub fn generate_sample(spec: &DatasetSpec, entry: &SampleEntry) -> Result<SampleData> {
    let g = spec.geometry()?;
    let phantom = clean_phantom(spec, entry, &g)?;
    let (defected, records) = inject_defects(
        &phantom,
        entry.n_defects,
        &spec.defects,
        splitmix64(entry.seed),
        &g,
    )?;
    let truth = gt_masks(&phantom, &defected, &records, &g, None)?;
    Ok(SampleData {
        phantom,
        defected,
        records,
        truth,
    })
}

fn write_sample(root: &Path, entry: &SampleEntry, data: &SampleData) -> Result<()> {
    let dir = root.join(sample_dir(entry.id));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let p = &entry.paths;
    write_raster(&data.truth.clean_sino, Dtype::F32, root.join(&p.clean_sino))?;
    write_raster(&data.truth.sino, Dtype::F32, root.join(&p.sino))?;
    write_mask(&data.truth.union, root.join(&p.mask))?;
    for (mask, path) in data.truth.instances.iter().zip(&p.instance_masks) {
        write_mask(mask, root.join(path))?;
    }
    write_json(&root.join(&p.records), &data.records)
}

/// Generates and writes every sample of `spec` under `out_dir`, then the
/// manifest. Samples are produced concurrently; file contents depend only
/// on the spec.
pub fn gen_dataset(spec: &DatasetSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let root = out_dir.as_ref();
    let samples = plan(spec)?;
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    samples.par_iter().try_for_each(|entry| {
        generate_sample(spec, entry)
            .and_then(|data| write_sample(root, entry, &data))
            .map_err(|e| e.in_sample(entry.id))
    })?;
    let manifest = Manifest {
        spec: spec.clone(),
        samples,
    };
    manifest.save(root.join(MANIFEST_FILE))?;
    log::info!("wrote {} samples to {}", manifest.samples.len(), root.display());
    Ok(manifest)
}

/// A sample read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub clean_sino: Raster,
    pub sino: Raster,
    pub mask: Raster,
    pub instances: Vec<Raster>,
    pub records: Vec<DefectRecord>,
}

/// Reads the files of `entry`; relative paths resolve against `root`.
pub fn load_sample(root: &Path, entry: &SampleEntry) -> Result<LoadedSample> {
    let p = &entry.paths;
    Ok(LoadedSample {
        clean_sino: read_raster(root.join(&p.clean_sino))?,
        sino: read_raster(root.join(&p.sino))?,
        mask: load_mask(root.join(&p.mask))?,
        instances: p
            .instance_masks
            .iter()
            .map(|m| load_mask(root.join(m)))
            .collect::<Result<_>>()?,
        records: read_json(&root.join(&p.records))?,
    })
}
