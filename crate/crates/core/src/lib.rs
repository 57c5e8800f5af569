//! Water-quality spectral indices (WQEI) for small ponds in multispectral
//! satellite scenes: scene loading, preprocessing, index kernels, pond
//! extraction, coefficient calibration against lab reports, and reporting.

pub mod calibrate;
pub mod error;
pub mod indices;
pub mod kv;
pub mod pipeline;
pub mod ponds;
pub mod preprocess;
pub mod raster;
pub mod report;
pub mod scene_io;
pub mod synth;

pub use error::{Error, Result};

/// Guard applied to every division whose denominator could vanish.
pub const EPSILON: f64 = 1e-9;
