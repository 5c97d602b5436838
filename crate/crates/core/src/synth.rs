//! Seeded synthetic inputs: patch sets and frames with known objects.
//!
//! Used by the benchmarks, examples and tests; everything here is
//! deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::extraction::BinaryMask;
use crate::geometry::{FrameSize, Patch, Rect};
use crate::pipeline::Annotation;
use crate::raster::Raster;
use crate::scaling::ScalingProfile;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` pairwise disjoint integer rectangles with sides in
/// `[min_side, max_side]`, separated by at least `gap` pixels. Gives up on
/// a rectangle after a bounded number of rejections, so fewer than `n` may
/// come back on crowded frames.
pub fn disjoint_rects(
    rng: &mut ChaCha8Rng,
    frame: FrameSize,
    n: usize,
    min_side: u32,
    max_side: u32,
    gap: f64,
) -> Vec<Rect> {
    let mut out: Vec<Rect> = Vec::with_capacity(n);
    let max_side = max_side.min(frame.width).min(frame.height);
    let min_side = min_side.min(max_side);
    for _ in 0..n {
        for _ in 0..200 {
            let w = rng.gen_range(min_side..=max_side);
            let h = rng.gen_range(min_side..=max_side);
            let x = rng.gen_range(0..=frame.width - w);
            let y = rng.gen_range(0..=frame.height - h);
            let r = Rect::new(x as f64, y as f64, w as f64, h as f64);
            let grown = Rect::new(r.x - gap, r.y - gap, r.w + 2.0 * gap, r.h + 2.0 * gap);
            if out.iter().all(|o| !o.overlaps(&grown)) {
                out.push(r);
                break;
            }
        }
    }
    out
}

/// Patches on disjoint rectangles, β from `profile` at each center, ids
/// in generation order.
pub fn random_patches(
    rng: &mut ChaCha8Rng,
    frame: FrameSize,
    profile: &ScalingProfile,
    n: usize,
    min_side: u32,
    max_side: u32,
) -> Vec<Patch> {
    disjoint_rects(rng, frame, n, min_side, max_side, 0.0)
        .into_iter()
        .enumerate()
        .map(|(i, r)| Patch::new(i as u32, r, profile.beta_for(r.center().1)))
        .collect()
}

/// A frame with textured background, solid objects, their foreground mask
/// and their ground-truth boxes.
#[derive(Debug, Clone)]
pub struct Scene {
    pub frame_id: String,
    pub frame: Raster,
    pub mask: BinaryMask,
    pub annotations: Vec<Annotation>,
}

/// Objects are separated by more than twice `margin` so extraction keeps
/// them as separate patches.
pub fn scene(
    rng: &mut ChaCha8Rng,
    frame_id: &str,
    size: FrameSize,
    n_objects: usize,
    min_side: u32,
    max_side: u32,
    margin: u32,
) -> Scene {
    let mut frame = Raster::new(size.width, size.height, 1, 0);
    for y in 0..size.height {
        for x in 0..size.width {
            frame.pixel_mut(x, y)[0] = (40 + (x * 3 + y * 5) % 60) as u8;
        }
    }
    let mut mask = BinaryMask::new(size.width, size.height);
    let rects = disjoint_rects(rng, size, n_objects, min_side, max_side, 2.0 * margin as f64 + 2.0);
    let mut annotations = Vec::with_capacity(rects.len());
    for r in rects {
        let shade: u8 = rng.gen_range(150..=250);
        let (x, y, w, h) = (r.x as u32, r.y as u32, r.w as u32, r.h as u32);
        for yy in y..y + h {
            for xx in x..x + w {
                frame.pixel_mut(xx, yy)[0] = shade;
            }
        }
        mask.fill_rect(x, y, w, h);
        annotations.push(Annotation {
            frame_id: frame_id.to_string(),
            label: "object".into(),
            rect: r,
        });
    }
    Scene {
        frame_id: frame_id.to_string(),
        frame,
        mask,
        annotations,
    }
}
