//! Sub-frame detections back to original coordinates.

use crate::geometry::{CompositionPlan, PlacementMode, Rect};

use super::{BoxSpace, DetectionBox};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapBackResult {
    pub boxes: Vec<DetectionBox>,
    /// Boxes whose center fell on dead space.
    pub dropped: usize,
}

/// Map every box through the placement whose destination contains its
/// center (relocated placements checked first), else through the host
/// crop if the center lies on crop content, else drop it. Duplicates
/// across sub-frames are then suppressed.
pub fn map_back(
    plan: &CompositionPlan,
    per_sub_frame: &[Vec<DetectionBox>],
    nms_iou: f64,
) -> MapBackResult {
    let mut mapped = Vec::new();
    let mut dropped = 0;
    for (j, boxes) in per_sub_frame.iter().enumerate().take(plan.sub_frames.len()) {
        let f = &plan.sub_frames[j];
        let r = plan.sub_frame_rect(j);
        let mut hosted: Vec<_> = plan.hosted(j).collect();
        hosted.sort_by_key(|p| p.mode != PlacementMode::Relocated);
        for b in boxes {
            let via_placement = hosted.iter().find_map(|p| p.inverse_map(&b.rect).ok());
            let rect = via_placement.or_else(|| {
                let (cx, cy) = b.rect.center();
                let (cw, ch) = (r.w * f.beta, r.h * f.beta);
                (cx >= 0.0 && cy >= 0.0 && cx <= cw && cy <= ch).then(|| {
                    Rect::new(
                        r.x + b.rect.x / f.beta,
                        r.y + b.rect.y / f.beta,
                        b.rect.w / f.beta,
                        b.rect.h / f.beta,
                    )
                })
            });
            match rect {
                Some(rect) => mapped.push(DetectionBox {
                    rect,
                    space: BoxSpace::Original,
                    ..b.clone()
                }),
                None => dropped += 1,
            }
        }
    }
    MapBackResult {
        boxes: suppress_duplicates(mapped, nms_iou),
        dropped,
    }
}

/// Greedy per-label suppression: visit boxes by descending score and keep
/// one unless it overlaps an already kept box of the same label with
/// IoU ≥ `iou`.
pub fn suppress_duplicates(mut boxes: Vec<DetectionBox>, iou: f64) -> Vec<DetectionBox> {
    boxes.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.label.cmp(&b.label))
            .then(a.rect.y.total_cmp(&b.rect.y))
            .then(a.rect.x.total_cmp(&b.rect.x))
            .then(a.rect.w.total_cmp(&b.rect.w))
            .then(a.rect.h.total_cmp(&b.rect.h))
    });
    let mut kept: Vec<DetectionBox> = Vec::with_capacity(boxes.len());
    for b in boxes {
        if !kept
            .iter()
            .any(|k| k.label == b.label && k.rect.iou(&b.rect) >= iou)
        {
            kept.push(b);
        }
    }
    kept
}
