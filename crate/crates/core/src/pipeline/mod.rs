//! Per-frame flow: extract patches, compose, render sub-frames, detect,
//! map detections back, and score them against ground truth.

pub mod baselines;
pub mod detector;
pub mod eval;
pub mod mapback;
pub mod render;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::extraction::{extract_patches, BinaryMask, ExtractionConfig};
use crate::geometry::{CompositionPlan, FrameSize, Patch};
use crate::objective::ObjectiveConfig;
use crate::optimizer::{compose, GaConfig};
use crate::raster::Raster;
use crate::scaling::ScalingProfile;

pub use baselines::{run_div, run_ds};
pub use detector::{Detector, DetectorError, DetectorInput, ExternalDetector, OracleDetector};
pub use eval::{evaluate, Annotation, EvalReport, Prediction};
pub use mapback::{map_back, suppress_duplicates, MapBackResult};
pub use render::{render_subframes, Interpolation};

/// Coordinate space a box is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxSpace {
    SubFrame(usize),
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    pub label: String,
    pub score: f64,
    pub rect: crate::geometry::Rect,
    pub space: BoxSpace,
}

impl DetectionBox {
    pub fn into_prediction(self, frame_id: &str) -> Prediction {
        Prediction {
            frame_id: frame_id.to_string(),
            label: self.label,
            rect: self.rect,
            score: self.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub extraction: ExtractionConfig,
    pub objective: ObjectiveConfig,
    pub ga: GaConfig,
    pub detector_size: u32,
    pub interpolation: Interpolation,
    pub nms_iou: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            extraction: ExtractionConfig::default(),
            objective: ObjectiveConfig::default(),
            ga: GaConfig::default(),
            detector_size: 300,
            interpolation: Interpolation::Nearest,
            nms_iou: 0.5,
        }
    }
}

/// Wall time per stage of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageTimes {
    pub extraction: Duration,
    pub composition: Duration,
    pub render: Duration,
    pub detect: Duration,
    pub map_back: Duration,
}

/// Everything up to (not including) detection.
#[derive(Debug, Clone)]
pub struct PreparedFrame {
    pub frame_id: String,
    pub patches: Vec<Patch>,
    pub plan: CompositionPlan,
    pub images: Vec<Raster>,
    pub times: StageTimes,
}

#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub frame_id: String,
    pub patches: Vec<Patch>,
    pub plan: CompositionPlan,
    pub boxes: Vec<DetectionBox>,
    pub dropped: usize,
    pub times: StageTimes,
}

/// Extraction, composition and rendering. Pure, so frames can be prepared
/// in parallel.
pub fn prepare_frame(
    frame_id: &str,
    frame: &Raster,
    mask: &BinaryMask,
    profile: &ScalingProfile,
    cfg: &PipelineConfig,
) -> Result<PreparedFrame> {
    let mut times = StageTimes::default();
    let t = Instant::now();
    let patches = extract_patches(mask, profile, &cfg.extraction);
    times.extraction = t.elapsed();

    let t = Instant::now();
    let plan = compose(
        &patches,
        profile,
        &cfg.objective,
        &cfg.ga,
        cfg.detector_size as f64,
        FrameSize::new(frame.width, frame.height),
    )?;
    times.composition = t.elapsed();

    let t = Instant::now();
    let images = render_subframes(frame, &plan, cfg.interpolation)?;
    times.render = t.elapsed();
    Ok(PreparedFrame {
        frame_id: frame_id.to_string(),
        patches,
        plan,
        images,
        times,
    })
}

/// Run the detector on every sub-frame image and map the boxes back.
pub fn finish_frame(
    prepared: PreparedFrame,
    detector: &mut dyn Detector,
    nms_iou: f64,
) -> std::result::Result<FrameOutput, DetectorError> {
    let PreparedFrame {
        frame_id,
        patches,
        plan,
        images,
        mut times,
    } = prepared;
    let t = Instant::now();
    let mut per_sub_frame = Vec::with_capacity(images.len());
    for (j, img) in images.iter().enumerate() {
        let hosted: Vec<_> = plan.hosted(j).copied().collect();
        per_sub_frame.push(detector.detect(&DetectorInput {
            frame_id: &frame_id,
            index: j,
            raster: img,
            placements: &hosted,
            frame_view: None,
        })?);
    }
    times.detect = t.elapsed();

    let t = Instant::now();
    let mapped = map_back(&plan, &per_sub_frame, nms_iou);
    times.map_back = t.elapsed();
    Ok(FrameOutput {
        frame_id,
        patches,
        plan,
        boxes: mapped.boxes,
        dropped: mapped.dropped,
        times,
    })
}

/// Whole chain for one frame.
pub fn process_frame(
    frame_id: &str,
    frame: &Raster,
    mask: &BinaryMask,
    profile: &ScalingProfile,
    cfg: &PipelineConfig,
    detector: &mut dyn Detector,
) -> Result<FrameOutput> {
    let prepared = prepare_frame(frame_id, frame, mask, profile, cfg)?;
    Ok(finish_frame(prepared, detector, cfg.nms_iou)?)
}
