//! Rasterize sub-frames: the resized crop with relocated patches pasted in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CompositionPlan, PlacementMode, Rect};
use crate::raster::Raster;

/// Fill value for pixels that show neither crop content nor a placement.
pub const DEAD_SPACE: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Nearest,
    Bilinear,
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "bilinear" => Ok(Self::Bilinear),
            other => Err(Error::InvalidInput(format!("unknown interpolation {other:?}"))),
        }
    }
}

/// Sample `src` at continuous original coordinates `(x, y)`, restricted to
/// the pixels of `clip`.
fn sample(src: &Raster, x: f64, y: f64, clip: &Rect, interp: Interpolation, out: &mut [u8]) {
    let x0 = clip.x.max(0.0) as i64;
    let y0 = clip.y.max(0.0) as i64;
    let x1 = (clip.right().ceil() as i64).min(src.width as i64) - 1;
    let y1 = (clip.bottom().ceil() as i64).min(src.height as i64) - 1;
    let cx = |v: i64| v.clamp(x0, x1.max(x0)) as u32;
    let cy = |v: i64| v.clamp(y0, y1.max(y0)) as u32;
    match interp {
        Interpolation::Nearest => {
            out.copy_from_slice(src.pixel(cx(x.floor() as i64), cy(y.floor() as i64)));
        }
        Interpolation::Bilinear => {
            let fx = x - 0.5;
            let fy = y - 0.5;
            let (ix, iy) = (fx.floor(), fy.floor());
            let (tx, ty) = (fx - ix, fy - iy);
            let (ix, iy) = (ix as i64, iy as i64);
            let p00 = src.pixel(cx(ix), cy(iy));
            let p10 = src.pixel(cx(ix + 1), cy(iy));
            let p01 = src.pixel(cx(ix), cy(iy + 1));
            let p11 = src.pixel(cx(ix + 1), cy(iy + 1));
            for c in 0..out.len() {
                let top = p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx;
                let bot = p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx;
                out[c] = (top * (1.0 - ty) + bot * ty).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
}

/// One detector-size raster per sub-frame, in plan order.
pub fn render_subframes(
    frame: &Raster,
    plan: &CompositionPlan,
    interp: Interpolation,
) -> Result<Vec<Raster>> {
    let fs = plan.frame_size;
    if frame.size() != (fs.width, fs.height) {
        return Err(Error::DimensionMismatch {
            expected: (fs.width, fs.height),
            actual: frame.size(),
        });
    }
    let d = plan.detector_size.round() as u32;
    let ch = frame.channels as usize;
    let mut out = Vec::with_capacity(plan.sub_frames.len());
    for (j, f) in plan.sub_frames.iter().enumerate() {
        let r = plan.sub_frame_rect(j);
        let relocated: Vec<_> = plan
            .hosted(j)
            .filter(|p| p.mode == PlacementMode::Relocated)
            .collect();
        let content_w = r.w * f.beta;
        let content_h = r.h * f.beta;
        let mut img = Raster::new(d, d, frame.channels, DEAD_SPACE);
        let mut px = vec![0u8; ch];
        for v in 0..d {
            let py = v as f64 + 0.5;
            for u in 0..d {
                let pxc = u as f64 + 0.5;
                if let Some(p) = relocated.iter().find(|p| p.dst.contains_point(pxc, py)) {
                    let sx = p.src.x + (pxc - p.dst.x) / p.scale;
                    let sy = p.src.y + (py - p.dst.y) / p.scale;
                    sample(frame, sx, sy, &p.src, interp, &mut px);
                } else if pxc < content_w && py < content_h {
                    let ox = r.x + pxc / f.beta;
                    let oy = r.y + py / f.beta;
                    sample(frame, ox, oy, &r, interp, &mut px);
                } else {
                    continue;
                }
                img.pixel_mut(u, v).copy_from_slice(&px);
            }
        }
        out.push(img);
    }
    Ok(out)
}
