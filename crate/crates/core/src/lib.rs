//! Detect-or-track: per-frame scheduling between a single-frame detector and a
//! correlation tracker, with the supporting tracker, association, training and
//! evaluation machinery.
//!
//! Module map:
//!
//! - [`geometry`]: boxes and IOU.
//! - [`featmap`]: dense tensors, convolution primitives and the shared feature extractor.
//! - [`tracker`]: single-box and RoI-convolution multi-box correlation tracking.
//! - [`scheduler`]: correlation layer, the detect/track classifier and its training.
//! - [`association`]: Hungarian assignment and ID inheritance on detect frames.
//! - [`pipeline`]: the sequential detect-or-track loop.
//! - [`synthdata`]: synthetic video generation and dataset I/O.
//! - [`eval`]: box/tracklet mAP, confusion matrices, cost model and sweeps.

pub mod association;
pub mod eval;
pub mod featmap;
pub mod geometry;
pub mod pipeline;
pub mod scheduler;
pub mod synthdata;
pub mod tracker;

mod error;
pub(crate) mod seed;

pub use error::{Error, Result};
