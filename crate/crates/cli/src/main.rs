use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sinolocate::analysis::{analyze, ShapeHint};
use sinolocate::dataset::{gen_dataset, DatasetSpec, Manifest};
use sinolocate::instance::{separate_instances, InstanceParams};
use sinolocate::pipeline::{
    evaluate_outputs, instance_file, run_pipeline, PipelineConfig, SINUSOIDS_FILE,
};
use sinolocate::projector::radon;
use sinolocate::raster::{read_raster, write_mask, write_pgm, write_raster};
use sinolocate::segment::{load_mask, SegmentInput, SegmenterParams, SegmenterRegistry};
use sinolocate::{Dtype, Error, Result, ScanGeometry};

const LOG_ENV: &str = "SINOLOCATE_LOG";

#[derive(Parser)]
#[command(name = "sinolocate", version, about = "Locate defects in CT sinograms without reconstruction")]
struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a JSON dataset spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a phantom raster to a sinogram.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of projection angles (default: image size).
        #[arg(long)]
        angles: Option<usize>,
        /// Detector bins (default: image size).
        #[arg(long)]
        detector: Option<usize>,
    },
    /// Produce a binary defect mask for one sinogram.
    Segment(SegmentArgs),
    /// Split a union mask into per-defect masks and fit their sinusoids.
    Instances {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Image size the sinogram was taken of (default: detector width).
        #[arg(long)]
        image_size: Option<usize>,
    },
    /// Estimate center and size from single-defect masks.
    Analyze {
        #[arg(long, num_args = 1.., required = true)]
        masks: Vec<PathBuf>,
        #[arg(long, default_value = "auto")]
        shape: ShapeHint,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        image_size: Option<usize>,
    },
    /// Run all stages over a manifest and score the result.
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "oracle")]
        method: String,
        #[arg(long, default_value = "auto")]
        shape: ShapeHint,
        #[arg(long)]
        out: PathBuf,
        /// Directory holding `*.mask.sgr` files for `--method external`.
        #[arg(long)]
        masks_dir: Option<PathBuf>,
        #[command(flatten)]
        seg: SegmenterFlags,
        #[arg(long, default_value_t = sinolocate::metrics::DEFAULT_IOU_MIN)]
        iou_min: f64,
    },
    /// Re-score finished pipeline outputs against the manifest's ground truth.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        results: PathBuf,
        /// Also copy the report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = sinolocate::metrics::DEFAULT_IOU_MIN)]
        iou_min: f64,
    },
    /// Render a raster as an 8-bit PGM.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Value mapped to black (default: raster minimum).
        #[arg(long)]
        min: Option<f32>,
        /// Value mapped to white (default: raster maximum).
        #[arg(long)]
        max: Option<f32>,
    },
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long, default_value = "oracle")]
    method: String,
    #[arg(long)]
    sino: PathBuf,
    /// Defect-free sinogram of the same object.
    #[arg(long)]
    clean: Option<PathBuf>,
    /// Precomputed mask for `--method external`.
    #[arg(long)]
    mask_in: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    seg: SegmenterFlags,
}

#[derive(Args)]
struct SegmenterFlags {
    /// Label threshold (default: 1e-3 of the sinogram maximum).
    #[arg(long)]
    eps: Option<f32>,
    /// Noise multiplier for `threshold`.
    #[arg(long)]
    k: Option<f64>,
    /// Target recall for `degraded`.
    #[arg(long)]
    recall: Option<f64>,
    /// Target precision for `degraded`.
    #[arg(long)]
    precision: Option<f64>,
}

impl SegmenterFlags {
    fn params(&self) -> SegmenterParams {
        let mut p = SegmenterParams {
            eps: self.eps,
            ..SegmenterParams::default()
        };
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(r) = self.recall {
            p.target_recall = r;
        }
        if let Some(q) = self.precision {
            p.target_precision = q;
        }
        p
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command, cli.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(command: Command, seed: Option<u64>) -> Result<()> {
    match command {
        Command::Gen { spec, out } => {
            let mut spec = DatasetSpec::load(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            gen_dataset(&spec, &out)?;
            Ok(())
        }
        Command::Project {
            input,
            out,
            angles,
            detector,
        } => {
            let phantom = read_raster(&input)?;
            let (h, w) = phantom.dims();
            if h != w {
                return Err(Error::Validation(format!("phantom must be square, got {h}x{w}")));
            }
            let g = ScanGeometry::new(w, angles.unwrap_or(w), detector.unwrap_or(w))?;
            write_raster(&radon(&phantom, &g)?, Dtype::F32, &out)
        }
        Command::Segment(args) => segment(args, seed.unwrap_or(0)),
        Command::Instances {
            mask,
            out,
            image_size,
        } => {
            let mask = load_mask(&mask)?;
            let g = mask_geometry(&mask, image_size)?;
            let inst = separate_instances(&mask, &g, &InstanceParams::default())?;
            for d in &inst.diagnostics {
                log::info!("{d}");
            }
            create_dir(&out)?;
            for (k, m) in inst.masks.iter().enumerate() {
                write_mask(m, out.join(instance_file(k)))?;
            }
            write_json(&out.join(SINUSOIDS_FILE), &inst.sinusoids)
        }
        Command::Analyze {
            masks,
            shape,
            out,
            image_size,
        } => {
            let masks = masks.iter().map(load_mask).collect::<Result<Vec<_>>>()?;
            let g = mask_geometry(&masks[0], image_size)?;
            let estimates = analyze(&masks, shape, &g)?;
            write_json(&out, &estimates)
        }
        Command::Pipeline {
            manifest,
            method,
            shape,
            out,
            masks_dir,
            seg,
            iou_min,
        } => {
            let m = Manifest::load(&manifest)?;
            let config = PipelineConfig {
                method,
                segmenter: seg.params(),
                shape,
                iou_min,
                masks_dir,
                seed,
                ..PipelineConfig::default()
            };
            let report = run_pipeline(&m, manifest_root(&manifest), &config, &out)?;
            log::info!(
                "{} samples, correct rate {:.4}",
                report.samples,
                report.instance_segmentation.correct_rate
            );
            Ok(())
        }
        Command::Eval {
            manifest,
            results,
            out,
            iou_min,
        } => {
            let m = Manifest::load(&manifest)?;
            let report = evaluate_outputs(&m, manifest_root(&manifest), &results, iou_min)?;
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            Ok(())
        }
        Command::Render {
            input,
            out,
            min,
            max,
        } => {
            let r = read_raster(&input)?;
            let lo = min.unwrap_or_else(|| r.min());
            let mut hi = max.unwrap_or_else(|| r.max());
            if max.is_none() && hi <= lo {
                // flat image: render it black rather than refuse
                hi = lo + 1.0;
            }
            write_pgm(&r, &out, lo, hi)
        }
    }
}

fn segment(args: SegmentArgs, seed: u64) -> Result<()> {
    let segmenter = SegmenterRegistry::builtin().create(&args.method, &args.seg.params())?;
    let sino = read_raster(&args.sino)?;
    let clean = args.clean.as_ref().map(read_raster).transpose()?;
    let input = SegmentInput {
        sino: &sino,
        clean_sino: clean.as_ref(),
        external_mask: args.mask_in.as_deref(),
        seed,
    };
    write_mask(&segmenter.segment(&input)?, &args.out)
}

/// Scan geometry implied by a sinogram-shaped mask.
fn mask_geometry(mask: &sinolocate::Raster, image_size: Option<usize>) -> Result<ScanGeometry> {
    let (rows, cols) = mask.dims();
    ScanGeometry::new(image_size.unwrap_or(cols), rows, cols)
}

/// Sample paths in a manifest are relative to the directory holding it.
fn manifest_root(manifest: &Path) -> &Path {
    manifest.parent().unwrap_or(Path::new("."))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.into(),
        source,
    })
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}
