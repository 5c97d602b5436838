//! Foreground mask to patch list: differencing, 3×3 morphology,
//! 8-connected labeling, margin expansion and overlap merging.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{FrameSize, Patch, Rect};
use crate::raster::Raster;
use crate::scaling::ScalingProfile;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    /// Nonzero samples are foreground. RGB rasters are reduced to luma first.
    pub fn from_raster(r: &Raster) -> Self {
        let g = r.to_gray();
        Self {
            width: g.width,
            height: g.height,
            bits: g.data.iter().map(|&v| v != 0).collect(),
        }
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    /// Set every pixel of the integer rectangle, clipped to the mask.
    pub fn fill_rect(&mut self, x: u32, y: u32, w: u32, h: u32) {
        for yy in y..(y + h).min(self.height) {
            for xx in x..(x + w).min(self.width) {
                self.set(xx, yy, true);
            }
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Extraction knobs. Defaults: threshold 25, one opening and one closing
/// pass, components under 16 px dropped, 3 px margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    pub diff_threshold: u8,
    pub open_iterations: u32,
    pub close_iterations: u32,
    pub min_component_area: usize,
    pub margin: u32,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            diff_threshold: 25,
            open_iterations: 1,
            close_iterations: 1,
            min_component_area: 16,
            margin: 3,
        }
    }
}

/// Pixel is foreground iff `|a − b| ≥ threshold` (on luma).
pub fn frame_difference(a: &Raster, b: &Raster, threshold: u8) -> Result<BinaryMask> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch {
            expected: a.size(),
            actual: b.size(),
        });
    }
    let (ga, gb) = (a.to_gray(), b.to_gray());
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits: ga
            .data
            .iter()
            .zip(&gb.data)
            .map(|(&p, &q)| p.abs_diff(q) >= threshold)
            .collect(),
    })
}

#[derive(Clone, Copy)]
enum Morph {
    Erode,
    Dilate,
}

#[inline(always)]
fn reduce3(op: Morph, a: bool, b: bool, c: bool) -> bool {
    match op {
        Morph::Erode => a & b & c,
        Morph::Dilate => a | b | c,
    }
}

/// One 3×3 box pass, done as a horizontal then a vertical 3-tap pass.
/// Pixels outside the mask are ignored, so borders are not eroded.
fn morph_pass(mask: &BinaryMask, op: Morph) -> BinaryMask {
    let (w, h) = (mask.width as usize, mask.height as usize);
    if w == 0 || h == 0 {
        return mask.clone();
    }
    let mut tmp = vec![false; w * h];
    for (src, dst) in mask.bits.chunks_exact(w).zip(tmp.chunks_exact_mut(w)) {
        dst[0] = reduce3(op, src[0], src[0], src[(1).min(w - 1)]);
        for x in 1..w.saturating_sub(1) {
            dst[x] = reduce3(op, src[x - 1], src[x], src[x + 1]);
        }
        if w > 1 {
            dst[w - 1] = reduce3(op, src[w - 2], src[w - 1], src[w - 1]);
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        let up = &tmp[y.saturating_sub(1) * w..][..w];
        let mid = &tmp[y * w..][..w];
        let down = &tmp[(y + 1).min(h - 1) * w..][..w];
        let dst = &mut out[y * w..][..w];
        for x in 0..w {
            dst[x] = reduce3(op, up[x], mid[x], down[x]);
        }
    }
    BinaryMask {
        width: mask.width,
        height: mask.height,
        bits: out,
    }
}

/// Opening (erode then dilate) followed by closing (dilate then erode),
/// 3×3 box element, `n` iterations of each primitive per stage.
pub fn morphological_filter(
    mask: &BinaryMask,
    open_iterations: u32,
    close_iterations: u32,
) -> BinaryMask {
    let mut m = mask.clone();
    let repeat = |m: BinaryMask, op, n| (0..n).fold(m, |acc, _| morph_pass(&acc, op));
    m = repeat(m, Morph::Erode, open_iterations);
    m = repeat(m, Morph::Dilate, open_iterations);
    m = repeat(m, Morph::Dilate, close_iterations);
    m = repeat(m, Morph::Erode, close_iterations);
    m
}

/// Tight bounding boxes of 8-connected components with at least
/// `min_area` pixels, sorted by top-left corner in row-major order.
pub fn connected_components(mask: &BinaryMask, min_area: usize) -> Vec<Rect> {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut boxes = Vec::new();
    for start in 0..w * h {
        if !mask.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut count = 0usize;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            count += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if mask.bits[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if count >= min_area {
            boxes.push(Rect::new(
                x0 as f64,
                y0 as f64,
                (x1 - x0 + 1) as f64,
                (y1 - y0 + 1) as f64,
            ));
        }
    }
    boxes.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    boxes
}

/// Expand each box by `margin`, clip to the frame, merge overlapping boxes
/// into their union until no two overlap, then assign ids in row-major
/// order and β from the profile at each box's vertical center.
pub fn make_patches(
    boxes: &[Rect],
    profile: &ScalingProfile,
    frame_size: FrameSize,
    margin: u32,
) -> Vec<Patch> {
    let bounds = frame_size.rect();
    let mut rects: Vec<Rect> = boxes
        .iter()
        .map(|b| b.expand_clamped(margin as f64, &bounds))
        .filter(Rect::is_valid)
        .collect();

    'merge: loop {
        for i in 0..rects.len() {
            for j in (i + 1)..rects.len() {
                if rects[i].overlaps(&rects[j]) {
                    let merged = rects[i].union(&rects[j]);
                    rects.swap_remove(j);
                    rects[i] = merged;
                    continue 'merge;
                }
            }
        }
        break;
    }

    rects.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    rects
        .into_iter()
        .enumerate()
        .map(|(i, r)| Patch::new(i as u32, r, profile.beta_for(r.center().1)))
        .collect()
}

/// Full mask-to-patches chain.
pub fn extract_patches(
    mask: &BinaryMask,
    profile: &ScalingProfile,
    cfg: &ExtractionConfig,
) -> Vec<Patch> {
    let filtered = morphological_filter(mask, cfg.open_iterations, cfg.close_iterations);
    let boxes = connected_components(&filtered, cfg.min_component_area);
    make_patches(
        &boxes,
        profile,
        FrameSize::new(mask.width, mask.height),
        cfg.margin,
    )
}

#[derive(Debug, Deserialize)]
struct PatchRecord {
    id: u32,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    beta: f64,
}

/// Parse `id,x,y,w,h,beta` CSV (header required).
pub fn read_patches_csv(reader: impl std::io::Read) -> Result<Vec<Patch>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["id", "x", "y", "w", "h", "beta"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidInput(format!(
            "patch CSV header must be `{}`",
            expected.join(",")
        )));
    }
    let mut out: Vec<Patch> = Vec::new();
    for rec in rdr.deserialize() {
        let r: PatchRecord = rec?;
        let rect = Rect::new(r.x, r.y, r.w, r.h);
        if !rect.is_valid() || !(r.beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "patch {}: width, height and beta must be positive",
                r.id
            )));
        }
        if out.iter().any(|p| p.id == r.id) {
            return Err(Error::InvalidInput(format!("duplicate patch id {}", r.id)));
        }
        out.push(Patch::new(r.id, rect, r.beta));
    }
    Ok(out)
}

pub fn load_patches(path: impl AsRef<Path>) -> Result<Vec<Patch>> {
    read_patches_csv(std::fs::File::open(path)?)
}

pub fn write_patches_csv(mut w: impl Write, patches: &[Patch]) -> Result<()> {
    writeln!(w, "id,x,y,w,h,beta")?;
    for p in patches {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.id, p.rect.x, p.rect.y, p.rect.w, p.rect.h, p.beta
        )?;
    }
    Ok(())
}

pub fn save_patches(path: impl AsRef<Path>, patches: &[Patch]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_patches_csv(&mut f, patches)?;
    f.flush()?;
    Ok(())
}
