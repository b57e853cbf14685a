//! Reconstruction-free defect localization for 2D parallel-beam CT.
//!
//! Phantoms are projected to sinograms, defect pixels are segmented in the
//! sinogram, per-defect traces are separated by run skeletons and a
//! sinusoid Hough fit, and each defect's center and size are read off its
//! own trace without ever reconstructing an image.

pub mod analysis;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod instance;
pub mod metrics;
pub mod phantom;
pub mod pipeline;
pub mod projector;
pub mod raster;
pub mod segment;
pub mod types;

pub use error::{Error, Result};
pub use geometry::ScanGeometry;
pub use raster::{Dtype, Raster};
pub use types::{DefectEstimate, DefectRecord, Method, Run, Shape, SinusoidParams, Skeleton};
