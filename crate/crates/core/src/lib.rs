//! Patch-of-interest composition for object detection on high-resolution
//! frames.
//!
//! Instead of shrinking a whole frame to the detector input size, or
//! tiling it, moving regions are cut out as patches, resized by a
//! perspective-dependent factor, and packed into as few detector-sized
//! sub-frames as possible. Detections are mapped back to frame coordinates.
//!
//! ```
//! use patchcomp::prelude::*;
//!
//! let frame = FrameSize::new(1280, 720);
//! let patches = vec![
//!     Patch::new(0, Rect::new(100.0, 100.0, 40.0, 60.0), 1.0),
//!     Patch::new(1, Rect::new(900.0, 500.0, 50.0, 50.0), 1.0),
//! ];
//! let plan = compose(
//!     &patches,
//!     &ScalingProfile::uniform(720),
//!     &ObjectiveConfig::default(),
//!     &GaConfig::default(),
//!     300.0,
//!     frame,
//! )
//! .unwrap();
//! plan.validate(&patches).unwrap();
//! assert!(plan.sub_frames.len() <= 2);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod extraction;
pub mod geometry;
pub mod objective;
pub mod optimizer;
pub mod oracle;
pub mod pipeline;
pub mod raster;
pub mod scaling;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::extraction::{extract_patches, BinaryMask, ExtractionConfig};
    pub use crate::geometry::{
        CompositionPlan, FrameSize, Patch, Placement, PlacementMode, Rect, SubFrame,
    };
    pub use crate::objective::ObjectiveConfig;
    pub use crate::optimizer::{compose, compose_detailed, GaConfig};
    pub use crate::raster::Raster;
    pub use crate::scaling::{Calibration, ScalingProfile};
}
