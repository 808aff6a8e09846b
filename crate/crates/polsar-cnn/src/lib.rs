//! Compact adaptive CNN classifier for polarimetric SAR imagery.
//!
//! The crate covers the full path from polarimetric measurements to a
//! land-cover map:
//!
//! - [`polsar`] — scattering vectors, coherency/covariance estimation,
//!   multilooking, and the real-valued feature channels derived from them
//!   ([`polsar::feature`]);
//! - [`cnn`] — the compact network itself: merged convolution/subsampling
//!   layers, an MLP head, backpropagation, SGD training with an adaptive
//!   learning rate ([`cnn::train`]), and finite-difference verification
//!   ([`cnn::gradcheck`]);
//! - [`pipeline`] — ground-truth sampling, patch extraction with mirror
//!   padding, and whole-image classification;
//! - [`metrics`] — confusion matrices with producer's/user's/overall
//!   accuracies;
//! - [`synth`] — a complex-Wishart scene simulator used as a
//!   self-contained oracle;
//! - [`io`] — file formats for cubes, polarimetric inputs, label/mask
//!   rasters, models, and the small text sidecar formats.
//!
//! Everything is deterministic given its seeds: training, sampling,
//! synthesis, and serialization all reproduce bit-identically.

pub mod cnn;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod polsar;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
