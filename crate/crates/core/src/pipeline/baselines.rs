//! Reference strategies: whole-frame downsampling and fixed tiling.

use crate::error::Result;
use crate::geometry::{CompositionPlan, FrameSize, Placement, PlacementMode, Rect};
use crate::optimizer::div_tiles;
use crate::raster::Raster;

use super::detector::{Detector, DetectorInput};
use super::mapback::map_back;
use super::render::{render_subframes, Interpolation};
use super::{BoxSpace, DetectionBox};

/// Nearest-neighbour resize to `size × size`, ignoring aspect ratio.
pub fn resize_square(frame: &Raster, size: u32) -> Raster {
    let mut out = Raster::new(size, size, frame.channels, 0);
    let sx = frame.width as f64 / size as f64;
    let sy = frame.height as f64 / size as f64;
    for v in 0..size {
        let y = (((v as f64 + 0.5) * sy) as u32).min(frame.height - 1);
        for u in 0..size {
            let x = (((u as f64 + 0.5) * sx) as u32).min(frame.width - 1);
            out.pixel_mut(u, v).copy_from_slice(frame.pixel(x, y));
        }
    }
    out
}

/// Detect on the whole frame squeezed into one detector input.
pub fn run_ds(
    frame: &Raster,
    frame_id: &str,
    detector: &mut dyn Detector,
    detector_size: u32,
) -> Result<Vec<DetectionBox>> {
    let img = resize_square(frame, detector_size);
    let sx = frame.width as f64 / detector_size as f64;
    let sy = frame.height as f64 / detector_size as f64;
    let input = DetectorInput {
        frame_id,
        index: 0,
        raster: &img,
        placements: &[],
        frame_view: Some(Rect::new(0.0, 0.0, frame.width as f64, frame.height as f64)),
    };
    Ok(detector
        .detect(&input)?
        .into_iter()
        .map(|b| DetectionBox {
            rect: Rect::new(b.rect.x * sx, b.rect.y * sy, b.rect.w * sx, b.rect.h * sy),
            space: BoxSpace::Original,
            ..b
        })
        .collect())
}

/// The tiling as a plan with no placements; each tile shows its crop.
pub fn div_plan(frame_size: FrameSize, detector_size: f64) -> CompositionPlan {
    CompositionPlan {
        frame_size,
        detector_size,
        sub_frames: div_tiles(frame_size, detector_size),
        placements: Vec::new(),
    }
}

/// Detect on every tile and merge.
pub fn run_div(
    frame: &Raster,
    frame_id: &str,
    detector: &mut dyn Detector,
    detector_size: u32,
    nms_iou: f64,
) -> Result<Vec<DetectionBox>> {
    let plan = div_plan(FrameSize::new(frame.width, frame.height), detector_size as f64);
    let imgs = render_subframes(frame, &plan, Interpolation::Nearest)?;
    let mut per_tile = Vec::with_capacity(imgs.len());
    for (j, img) in imgs.iter().enumerate() {
        let r = plan.sub_frame_rect(j);
        // Views for detectors that reason about regions rather than pixels.
        let view = [Placement {
            patch_id: j as u32,
            mode: PlacementMode::InSitu,
            host: j,
            scale: 1.0,
            src: r,
            dst: Rect::new(0.0, 0.0, r.w, r.h),
        }];
        per_tile.push(detector.detect(&DetectorInput {
            frame_id,
            index: j,
            raster: img,
            placements: &view,
            frame_view: Some(r),
        })?);
    }
    Ok(map_back(&plan, &per_tile, nms_iou).boxes)
}
