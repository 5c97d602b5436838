//! Final feasibility check: every patch must end up either inside some
//! sub-frame (in situ) or pasted into a blank rectangle of one.

use crate::geometry::{
    contains, CompositionPlan, FrameSize, Patch, Placement, PlacementMode, Rect, SubFrame, EPS,
};

use super::blank::largest_blank_rects;

/// A patch that fits in no blank rectangle of any sub-frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("verification failed: patch {patch_id} cannot be placed")]
pub struct VerificationFailure {
    pub patch_id: u32,
}

/// Image of `r` under the crop+scale transform of a sub-frame.
pub(crate) fn in_situ_image(r: &Rect, host: &Rect, beta: f64) -> Rect {
    Rect::new(
        (r.x - host.x) * beta,
        (r.y - host.y) * beta,
        r.w * beta,
        r.h * beta,
    )
}

/// Assign in-situ hosts, then relocate the uncovered patches largest first,
/// each into the smallest blank rectangle (over all sub-frames) that holds
/// its detector-space footprint. Blank rectangles of the receiving
/// sub-frame are recomputed after every placement.
///
/// In-situ hosting goes to the first sub-frame that contains the patch.
/// Every contained patch is an obstacle in every sub-frame containing it,
/// hosted there or not, since its pixels show up in that crop either way.
pub fn verify_and_relocate(
    sub_frames: &[SubFrame],
    patches: &[Patch],
    frame_size: FrameSize,
    detector_size: f64,
    n_r: usize,
) -> Result<CompositionPlan, VerificationFailure> {
    let canvas = Rect::new(0.0, 0.0, detector_size, detector_size);
    let rects: Vec<Rect> = sub_frames.iter().map(|f| f.rect(frame_size)).collect();
    let mut obstacles: Vec<Vec<Rect>> = vec![Vec::new(); sub_frames.len()];
    let mut placed: Vec<Option<Placement>> = vec![None; patches.len()];

    for (i, p) in patches.iter().enumerate() {
        for (j, (f, r)) in sub_frames.iter().zip(&rects).enumerate() {
            if !contains(r, &p.rect) {
                continue;
            }
            let img = in_situ_image(&p.rect, r, f.beta);
            obstacles[j].push(img);
            if placed[i].is_none() {
                placed[i] = Some(Placement {
                    patch_id: p.id,
                    mode: PlacementMode::InSitu,
                    host: j,
                    scale: f.beta,
                    src: p.rect,
                    dst: img,
                });
            }
        }
    }

    let mut uncovered: Vec<usize> = (0..patches.len()).filter(|&i| placed[i].is_none()).collect();
    if !uncovered.is_empty() {
        uncovered.sort_by(|&a, &b| Patch::size_order(&patches[a], &patches[b]));
        let mut blanks: Vec<Vec<Rect>> = obstacles
            .iter()
            .map(|obs| largest_blank_rects(&canvas, obs, n_r))
            .collect();

        for i in uncovered {
            let p = &patches[i];
            let (fw, fh) = p.footprint();
            let mut best: Option<(usize, Rect)> = None;
            for (j, list) in blanks.iter().enumerate() {
                for b in list {
                    if b.w + EPS < fw || b.h + EPS < fh {
                        continue;
                    }
                    if best.is_none_or(|(_, cur)| b.area() < cur.area()) {
                        best = Some((j, *b));
                    }
                }
            }
            let (j, b) = best.ok_or(VerificationFailure { patch_id: p.id })?;
            let dst = Rect::new(b.x, b.y, fw, fh);
            placed[i] = Some(Placement {
                patch_id: p.id,
                mode: PlacementMode::Relocated,
                host: j,
                scale: p.beta,
                src: p.rect,
                dst,
            });
            obstacles[j].push(dst);
            blanks[j] = largest_blank_rects(&canvas, &obstacles[j], n_r);
        }
    }

    Ok(CompositionPlan {
        frame_size,
        detector_size,
        sub_frames: sub_frames.to_vec(),
        placements: placed.into_iter().map(|p| p.expect("every patch placed")).collect(),
    })
}
