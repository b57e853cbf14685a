use std::fs;
use std::path::Path;

use sinolocate::dataset::{gen_dataset, DatasetSpec, Manifest, MANIFEST_FILE};
use sinolocate::phantom::DefectSpec;
use sinolocate::pipeline::{external_mask_path, run_pipeline, PipelineConfig};
use sinolocate::raster::{write_mask, write_raster};
use sinolocate::segment::load_mask;
use sinolocate::{Dtype, Raster};

fn small_spec(seed: u64, n: usize) -> DatasetSpec {
    DatasetSpec {
        image_size: 128,
        n_angles: 128,
        detector_w: 128,
        defects: DefectSpec {
            radius_min: 4.0,
            radius_max: 10.0,
            ..DefectSpec::default()
        },
        ..DatasetSpec::new(seed, n)
    }
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn external_masks_equal_to_labels_score_like_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let manifest = gen_dataset(&small_spec(5, 6), &ds).unwrap();

    // stand-in for masks exported by a separately trained segmenter
    let masks = dir.path().join("masks");
    for e in &manifest.samples {
        let dst = external_mask_path(&masks, &e.paths.sino);
        fs::create_dir_all(dst.parent().unwrap()).unwrap();
        fs::copy(ds.join(&e.paths.mask), &dst).unwrap();
    }

    let oracle = run_pipeline(&manifest, &ds, &PipelineConfig::default(), &dir.path().join("o")).unwrap();
    let external = run_pipeline(
        &manifest,
        &ds,
        &PipelineConfig {
            method: "external".into(),
            masks_dir: Some(masks),
            ..PipelineConfig::default()
        },
        &dir.path().join("x"),
    )
    .unwrap();
    assert_eq!(oracle, external);
    assert_eq!(oracle.sinogram_segmentation.iou, 1.0);
}

#[test]
fn float_masks_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mask.sgr");
    let m = Raster::from_fn(4, 4, |r, c| ((r + c) % 2) as f32);
    write_raster(&m, Dtype::F32, &path).unwrap();
    assert!(load_mask(&path).is_err());
    write_mask(&m, &path).unwrap();
    assert_eq!(load_mask(&path).unwrap(), m);
}

#[test]
fn dataset_bytes_depend_only_on_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    gen_dataset(&small_spec(9, 4), &a).unwrap();
    gen_dataset(&small_spec(9, 4), &b).unwrap();
    assert_eq!(tree(&a), tree(&b));
    let m = Manifest::load(a.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.samples.len(), 4);
}
