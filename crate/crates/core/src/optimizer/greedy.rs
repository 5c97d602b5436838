//! Greedy sub-frame counting (bounds for the search) and the tiling
//! fallback that always produces a feasible plan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{contains, CompositionPlan, FrameSize, Patch, Rect, SubFrame};
use crate::scaling::ScalingProfile;

use super::verify::verify_and_relocate;

/// Range of sub-frame counts searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub l_min: usize,
    pub l_max: usize,
}

impl Bounds {
    pub fn new(l_min: usize, l_max: usize) -> Self {
        let l_min = l_min.max(1);
        Self {
            l_min,
            l_max: l_max.max(l_min),
        }
    }

    pub fn shifted(&self, by: usize) -> Self {
        Self::new(self.l_min + by, self.l_max + by)
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.l_min..=self.l_max).contains(&n)
    }
}

/// Cover patches largest first, one sub-frame per patch not yet inside an
/// earlier sub-frame. `l_min` is the count at which the summed scaled
/// window area first reaches the summed scaled patch area, `l_max` where
/// it first reaches twice that; a threshold never reached falls back to the
/// final count. Also returns the greedy sub-frames themselves.
pub fn greedy_bounds(
    patches: &[Patch],
    profile: &ScalingProfile,
    detector_size: f64,
    frame_size: FrameSize,
) -> Result<(Bounds, Vec<SubFrame>)> {
    if patches.is_empty() {
        return Err(Error::NothingToCompose);
    }
    let total: f64 = patches.iter().map(Patch::scaled_area).sum();
    let mut order: Vec<&Patch> = patches.iter().collect();
    order.sort_by(|a, b| Patch::size_order(a, b));

    let mut frames: Vec<SubFrame> = Vec::new();
    let mut rects: Vec<Rect> = Vec::new();
    let (mut l_min, mut l_max) = (None, None);
    let mut area = 0.0;
    for p in order {
        if rects.iter().any(|r| contains(r, &p.rect)) {
            continue;
        }
        let (cx, cy) = p.rect.center();
        let f = SubFrame::new(cx, cy, profile.beta_for(cy), detector_size);
        area += f.scaled_area(frame_size);
        rects.push(f.rect(frame_size));
        frames.push(f);
        if l_min.is_none() && area >= total {
            l_min = Some(frames.len());
        }
        if l_max.is_none() && area >= 2.0 * total {
            l_max = Some(frames.len());
        }
    }
    let n = frames.len();
    Ok((Bounds::new(l_min.unwrap_or(n), l_max.unwrap_or(n)), frames))
}

/// Non-overlapping `detector_size` tiles covering the frame; the last row
/// and column are shifted back to end at the frame edge.
pub fn div_tiles(frame_size: FrameSize, detector_size: f64) -> Vec<SubFrame> {
    let (w, h) = (frame_size.width as f64, frame_size.height as f64);
    let nx = (w / detector_size).ceil().max(1.0) as usize;
    let ny = (h / detector_size).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let f = SubFrame::new(
                (ix as f64 + 0.5) * detector_size,
                (iy as f64 + 0.5) * detector_size,
                1.0,
                detector_size,
            );
            // Re-center on the clamped extent so the stored center is honest.
            let (cx, cy) = f.rect(frame_size).center();
            out.push(SubFrame::new(cx, cy, 1.0, detector_size));
        }
    }
    out
}

pub fn div_tile_count(frame_size: FrameSize, detector_size: f64) -> usize {
    let nx = (frame_size.width as f64 / detector_size).ceil().max(1.0) as usize;
    let ny = (frame_size.height as f64 / detector_size).ceil().max(1.0) as usize;
    nx * ny
}

/// Always-feasible plan built from the tiling: first the tiles touching
/// some patch, then all tiles, and finally, while a patch still cannot be
/// placed, an extra sub-frame centered on that patch at its own scale.
/// Each extra sub-frame holds its patch in situ, so at most one is added
/// per patch.
pub fn tiling_fallback(
    patches: &[Patch],
    profile: &ScalingProfile,
    detector_size: f64,
    frame_size: FrameSize,
    n_r: usize,
) -> CompositionPlan {
    let tiles = div_tiles(frame_size, detector_size);
    let touched: Vec<SubFrame> = tiles
        .iter()
        .filter(|t| {
            let r = t.rect(frame_size);
            patches.iter().any(|p| r.overlaps(&p.rect))
        })
        .copied()
        .collect();
    if let Ok(plan) = verify_and_relocate(&touched, patches, frame_size, detector_size, n_r) {
        return plan;
    }
    let mut frames = tiles;
    loop {
        match verify_and_relocate(&frames, patches, frame_size, detector_size, n_r) {
            Ok(plan) => return plan,
            Err(fail) => {
                let p = patches
                    .iter()
                    .find(|p| p.id == fail.patch_id)
                    .expect("failure names an input patch");
                let (cx, cy) = p.rect.center();
                log::debug!("fallback: dedicated sub-frame for patch {}", p.id);
                frames.push(SubFrame::new(cx, cy, profile.beta_for(cy), detector_size));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: FrameSize = FrameSize {
        width: 1280,
        height: 720,
    };

    fn patch(id: u32, x: f64, y: f64, w: f64, h: f64) -> Patch {
        Patch::new(id, Rect::new(x, y, w, h), 1.0)
    }

    #[test]
    fn bounds_from_area_thresholds() {
        // Sub-frames of scaled area 90 (side ≈ 9.49, β = 1) against three
        // patches of total area 100 spread far apart.
        let d = 90f64.sqrt();
        let ps = [
            patch(0, 0.0, 0.0, 6.0, 6.0),
            patch(1, 100.0, 100.0, 6.0, 6.0),
            patch(2, 200.0, 200.0, 8.0, 8.0),
        ];
        let total: f64 = ps.iter().map(Patch::scaled_area).sum();
        assert_eq!(total, 136.0);
        let (b, seeds) = greedy_bounds(&ps, &ScalingProfile::uniform(720), d, F).unwrap();
        // 90 < 136 ≤ 180 → l_min = 2; 270 < 272 → never reaches 2×, final count 3.
        assert_eq!(b, Bounds::new(2, 3));
        assert_eq!(seeds.len(), 3);
        assert_eq!(seeds[0].cx, 204.0);
    }

    #[test]
    fn single_patch_gives_unit_bounds() {
        let ps = [patch(0, 500.0, 300.0, 40.0, 40.0)];
        let (b, seeds) = greedy_bounds(&ps, &ScalingProfile::uniform(720), 300.0, F).unwrap();
        assert_eq!(b, Bounds::new(1, 1));
        assert_eq!(seeds.len(), 1);
    }

    #[test]
    fn covered_patches_are_skipped() {
        let ps = [
            patch(0, 100.0, 100.0, 80.0, 80.0),
            patch(1, 120.0, 120.0, 10.0, 10.0),
            patch(2, 60.0, 60.0, 20.0, 20.0),
        ];
        let (b, seeds) = greedy_bounds(&ps, &ScalingProfile::uniform(720), 300.0, F).unwrap();
        assert_eq!((b, seeds.len()), (Bounds::new(1, 1), 1));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(
            greedy_bounds(&[], &ScalingProfile::uniform(720), 300.0, F),
            Err(Error::NothingToCompose)
        ));
    }

    #[test]
    fn tiling_matches_arithmetic() {
        let tiles = div_tiles(F, 300.0);
        assert_eq!(tiles.len(), 15);
        assert_eq!(div_tile_count(F, 300.0), 15);
        let last = tiles[14].rect(F);
        assert_eq!(last, Rect::new(980.0, 420.0, 300.0, 300.0));
    }

    #[test]
    fn fallback_is_feasible_for_straddling_patches() {
        // Each patch straddles a tile seam, so no tile holds one in situ.
        let ps: Vec<Patch> = (0..4)
            .map(|k| patch(k, 250.0 + 300.0 * k as f64, 250.0, 100.0, 100.0))
            .collect();
        let plan = tiling_fallback(&ps, &ScalingProfile::uniform(720), 300.0, F, 16);
        plan.validate(&ps).unwrap();
        assert!(plan.sub_frames.len() <= 15);
    }
}
