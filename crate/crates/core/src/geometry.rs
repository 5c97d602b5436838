//! Coordinate conventions and the shared domain types.
//!
//! Origin is the top-left corner, `y` grows downward. Original-frame
//! coordinates are whole pixels; detector-space coordinates are real-valued
//! and only rounded when pixels are actually sampled.

use serde::{Deserialize, Serialize};

/// Tolerance used for closed containment tests on real-valued rectangles.
pub const EPS: f64 = 1e-9;

/// Width and height of a frame in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameSize {
    pub width: u32,
    pub height: u32,
}

impl FrameSize {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width as f64, self.height as f64)
    }

    pub fn area(&self) -> f64 {
        self.width as f64 * self.height as f64
    }
}

/// Axis-aligned rectangle given by its top-left corner and extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(x0, y0, x1 - x0, y1 - y0)
    }

    pub fn is_valid(&self) -> bool {
        self.w > 0.0 && self.h > 0.0 && self.x.is_finite() && self.y.is_finite()
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Closed containment: touching edges count as inside.
    pub fn contains(&self, inner: &Rect) -> bool {
        contains(self, inner)
    }

    /// Half-open point test, `[x, x+w) × [y, y+h)`.
    pub fn contains_point(&self, px: f64, py: f64) -> bool {
        px >= self.x && px < self.right() && py >= self.y && py < self.bottom()
    }

    /// True when the interiors overlap (shared edges do not count).
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.right() - EPS
            && other.x < self.right() - EPS
            && self.y < other.bottom() - EPS
            && other.y < self.bottom() - EPS
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::from_corners(x0, y0, x1, y1))
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::from_corners(
            self.x.min(other.x),
            self.y.min(other.y),
            self.right().max(other.right()),
            self.bottom().max(other.bottom()),
        )
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).map_or(0.0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    /// Grow by `margin` on every side, then clip to `bounds`.
    pub fn expand_clamped(&self, margin: f64, bounds: &Rect) -> Rect {
        let x0 = (self.x - margin).max(bounds.x);
        let y0 = (self.y - margin).max(bounds.y);
        let x1 = (self.right() + margin).min(bounds.right());
        let y1 = (self.bottom() + margin).min(bounds.bottom());
        Rect::from_corners(x0, y0, x1, y1)
    }

    /// Largest per-coordinate absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &Rect) -> f64 {
        [
            (self.x - other.x).abs(),
            (self.y - other.y).abs(),
            (self.w - other.w).abs(),
            (self.h - other.h).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Closed containment of `inner` in `outer`.
pub fn contains(outer: &Rect, inner: &Rect) -> bool {
    inner.x >= outer.x - EPS
        && inner.y >= outer.y - EPS
        && inner.right() <= outer.right() + EPS
        && inner.bottom() <= outer.bottom() + EPS
}

/// A margin-expanded region of interest in original-frame pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub id: u32,
    pub rect: Rect,
    pub beta: f64,
}

impl Patch {
    pub fn new(id: u32, rect: Rect, beta: f64) -> Self {
        Self { id, rect, beta }
    }

    /// `w·h·β`, the size measure used by the objective and the greedy bounds.
    pub fn scaled_area(&self) -> f64 {
        self.rect.area() * self.beta
    }

    /// Width and height once resized into detector space.
    pub fn footprint(&self) -> (f64, f64) {
        (self.rect.w * self.beta, self.rect.h * self.beta)
    }

    /// Total order that depends only on geometry: larger scaled area first,
    /// then position and size. Keeps results independent of input order.
    pub fn size_order(a: &Patch, b: &Patch) -> std::cmp::Ordering {
        b.scaled_area()
            .total_cmp(&a.scaled_area())
            .then(a.rect.y.total_cmp(&b.rect.y))
            .then(a.rect.x.total_cmp(&b.rect.x))
            .then(a.rect.w.total_cmp(&b.rect.w))
            .then(a.rect.h.total_cmp(&b.rect.h))
            .then(a.beta.total_cmp(&b.beta))
            .then(a.id.cmp(&b.id))
    }
}

/// One detector window. `(cx, cy)` is the requested center; the actual
/// extent comes from [`subframe_rect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubFrame {
    pub cx: f64,
    pub cy: f64,
    pub beta: f64,
    pub detector_size: f64,
}

impl SubFrame {
    pub fn new(cx: f64, cy: f64, beta: f64, detector_size: f64) -> Self {
        Self {
            cx,
            cy,
            beta,
            detector_size,
        }
    }

    /// Nominal side length in original pixels.
    pub fn side(&self) -> f64 {
        self.detector_size / self.beta
    }

    pub fn rect(&self, frame: FrameSize) -> Rect {
        subframe_rect(self, frame)
    }

    /// `w·h·β` of the clamped extent.
    pub fn scaled_area(&self, frame: FrameSize) -> f64 {
        self.rect(frame).area() * self.beta
    }
}

/// Original-coordinate extent of a sub-frame: a square of side
/// `detector_size / beta` centered at `(cx, cy)`, shifted (never shrunk)
/// to lie inside the frame. Only a frame smaller than the square truncates it.
pub fn subframe_rect(f: &SubFrame, frame: FrameSize) -> Rect {
    let side = f.side();
    let (fw, fh) = (frame.width as f64, frame.height as f64);
    let w = side.min(fw);
    let h = side.min(fh);
    let x = (f.cx - side / 2.0).clamp(0.0, fw - w);
    let y = (f.cy - side / 2.0).clamp(0.0, fh - h);
    Rect::new(x, y, w, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementMode {
    /// The patch is visible at its own position inside the host crop.
    InSitu,
    /// The patch pixels are pasted into a blank area of the host.
    Relocated,
}

/// Where one patch ends up in detector space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub patch_id: u32,
    pub mode: PlacementMode,
    pub host: usize,
    pub scale: f64,
    pub src: Rect,
    pub dst: Rect,
}

/// A detector-space box whose center falls outside the placement.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("unmappable box: center ({cx:.1}, {cy:.1}) lies outside the placement")]
pub struct Unmappable {
    pub cx: f64,
    pub cy: f64,
}

impl Placement {
    /// Original coordinates to detector coordinates.
    pub fn forward_map(&self, b: &Rect) -> Rect {
        Rect::new(
            self.dst.x + (b.x - self.src.x) * self.scale,
            self.dst.y + (b.y - self.src.y) * self.scale,
            b.w * self.scale,
            b.h * self.scale,
        )
    }

    /// Detector coordinates back to original coordinates. The box center
    /// must lie inside `dst` (closed).
    pub fn inverse_map(&self, b: &Rect) -> Result<Rect, Unmappable> {
        let (cx, cy) = b.center();
        let d = &self.dst;
        if cx < d.x - EPS || cx > d.right() + EPS || cy < d.y - EPS || cy > d.bottom() + EPS {
            return Err(Unmappable { cx, cy });
        }
        Ok(Rect::new(
            self.src.x + (b.x - d.x) / self.scale,
            self.src.y + (b.y - d.y) / self.scale,
            b.w / self.scale,
            b.h / self.scale,
        ))
    }
}

/// The final sub-frame set with one placement per input patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub frame_size: FrameSize,
    pub detector_size: f64,
    pub sub_frames: Vec<SubFrame>,
    pub placements: Vec<Placement>,
}

impl CompositionPlan {
    pub fn empty(frame_size: FrameSize, detector_size: f64) -> Self {
        Self {
            frame_size,
            detector_size,
            sub_frames: Vec::new(),
            placements: Vec::new(),
        }
    }

    pub fn sub_frame_rect(&self, j: usize) -> Rect {
        self.sub_frames[j].rect(self.frame_size)
    }

    pub fn placement_for(&self, patch_id: u32) -> Option<&Placement> {
        self.placements.iter().find(|p| p.patch_id == patch_id)
    }

    pub fn hosted(&self, j: usize) -> impl Iterator<Item = &Placement> {
        self.placements.iter().filter(move |p| p.host == j)
    }

    pub fn relocated_count(&self) -> usize {
        self.placements
            .iter()
            .filter(|p| p.mode == PlacementMode::Relocated)
            .count()
    }

    /// Check every structural invariant against the input patches.
    pub fn validate(&self, patches: &[Patch]) -> Result<(), String> {
        if self.placements.len() != patches.len() {
            return Err(format!(
                "{} placements for {} patches",
                self.placements.len(),
                patches.len()
            ));
        }
        let canvas = Rect::new(0.0, 0.0, self.detector_size, self.detector_size);
        for patch in patches {
            let n = self
                .placements
                .iter()
                .filter(|p| p.patch_id == patch.id)
                .count();
            if n != 1 {
                return Err(format!("patch {} placed {} times", patch.id, n));
            }
            let pl = self.placement_for(patch.id).unwrap();
            if pl.host >= self.sub_frames.len() {
                return Err(format!("patch {} has unknown host {}", patch.id, pl.host));
            }
            if pl.src != patch.rect {
                return Err(format!("patch {} src differs from its rect", patch.id));
            }
            if !contains(&canvas, &pl.dst) {
                return Err(format!("patch {} dst leaves the detector canvas", patch.id));
            }
            let host = &self.sub_frames[pl.host];
            let hrect = host.rect(self.frame_size);
            match pl.mode {
                PlacementMode::InSitu => {
                    if !contains(&hrect, &pl.src) {
                        return Err(format!("in-situ patch {} not inside host", patch.id));
                    }
                    let expect = Rect::new(
                        (pl.src.x - hrect.x) * host.beta,
                        (pl.src.y - hrect.y) * host.beta,
                        pl.src.w * host.beta,
                        pl.src.h * host.beta,
                    );
                    if expect.max_abs_diff(&pl.dst) > 1e-6 {
                        return Err(format!("in-situ patch {} dst is not its crop image", patch.id));
                    }
                }
                PlacementMode::Relocated => {
                    // Disjoint from every in-situ image in the host, hosted or not.
                    for other in patches {
                        if !contains(&hrect, &other.rect) {
                            continue;
                        }
                        let img = Rect::new(
                            (other.rect.x - hrect.x) * host.beta,
                            (other.rect.y - hrect.y) * host.beta,
                            other.rect.w * host.beta,
                            other.rect.h * host.beta,
                        );
                        if img.overlaps(&pl.dst) {
                            return Err(format!(
                                "relocated patch {} overlaps in-situ patch {}",
                                patch.id, other.id
                            ));
                        }
                    }
                    for other in self.placements.iter() {
                        if other.patch_id != pl.patch_id
                            && other.host == pl.host
                            && other.mode == PlacementMode::Relocated
                            && other.dst.overlaps(&pl.dst)
                        {
                            return Err(format!(
                                "relocated patches {} and {} overlap",
                                patch.id, other.patch_id
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HD: FrameSize = FrameSize {
        width: 1280,
        height: 720,
    };

    #[test]
    fn containment_examples() {
        let outer = Rect::new(0.0, 0.0, 10.0, 10.0);
        assert!(contains(&outer, &Rect::new(0.0, 0.0, 10.0, 10.0)));
        assert!(!contains(&outer, &Rect::new(5.0, 5.0, 10.0, 10.0)));
        let big = Rect::new(0.0, 0.0, 300.0, 300.0);
        assert!(contains(&big, &Rect::new(297.0, 0.0, 3.0, 3.0)));
    }

    #[test]
    fn subframe_rect_examples() {
        let f = SubFrame::new(150.0, 150.0, 1.0, 300.0);
        assert_eq!(subframe_rect(&f, HD), Rect::new(0.0, 0.0, 300.0, 300.0));
        let f = SubFrame::new(0.0, 0.0, 1.0, 300.0);
        assert_eq!(subframe_rect(&f, HD), Rect::new(0.0, 0.0, 300.0, 300.0));
        let f = SubFrame::new(640.0, 600.0, 0.5, 300.0);
        assert_eq!(subframe_rect(&f, HD), Rect::new(340.0, 120.0, 600.0, 600.0));
    }

    #[test]
    fn subframe_larger_than_frame_is_truncated() {
        let f = SubFrame::new(10.0, 10.0, 0.25, 300.0);
        assert_eq!(subframe_rect(&f, HD), Rect::new(0.0, 0.0, 1200.0, 720.0));
    }

    #[test]
    fn identity_and_linear_maps() {
        let r = Rect::new(5.0, 6.0, 7.0, 8.0);
        let id = Placement {
            patch_id: 0,
            mode: PlacementMode::InSitu,
            host: 0,
            scale: 1.0,
            src: r,
            dst: r,
        };
        let b = Rect::new(6.0, 7.0, 2.0, 2.0);
        assert_eq!(id.forward_map(&b), b);
        assert_eq!(id.inverse_map(&b).unwrap(), b);

        let p = Placement {
            patch_id: 0,
            mode: PlacementMode::Relocated,
            host: 0,
            scale: 2.0,
            src: Rect::new(100.0, 100.0, 50.0, 50.0),
            dst: Rect::new(0.0, 0.0, 100.0, 100.0),
        };
        let fwd = p.forward_map(&Rect::new(110.0, 110.0, 10.0, 10.0));
        assert_eq!(fwd, Rect::new(20.0, 20.0, 20.0, 20.0));
        assert_eq!(p.inverse_map(&fwd).unwrap(), Rect::new(110.0, 110.0, 10.0, 10.0));
    }

    #[test]
    fn inverse_map_rejects_outside_center() {
        let p = Placement {
            patch_id: 0,
            mode: PlacementMode::Relocated,
            host: 0,
            scale: 1.0,
            src: Rect::new(0.0, 0.0, 10.0, 10.0),
            dst: Rect::new(50.0, 50.0, 10.0, 10.0),
        };
        assert!(p.inverse_map(&Rect::new(0.0, 0.0, 4.0, 4.0)).is_err());
    }

    fn arb_rect() -> impl Strategy<Value = Rect> {
        (0.0..500.0f64, 0.0..500.0f64, 1.0..200.0f64, 1.0..200.0f64)
            .prop_map(|(x, y, w, h)| Rect::new(x, y, w, h))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn contains_is_reflexive_and_transitive(a in arb_rect(), d in (0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64)) {
            prop_assert!(contains(&a, &a));
            let b = Rect::new(a.x + d.0.min(a.w / 4.0), a.y + d.1.min(a.h / 4.0), a.w / 2.0, a.h / 2.0);
            let c = Rect::new(b.x + d.2.min(b.w / 4.0), b.y + d.3.min(b.h / 4.0), b.w / 2.0, b.h / 2.0);
            prop_assert!(contains(&a, &b));
            prop_assert!(contains(&b, &c));
            prop_assert!(contains(&a, &c));
        }

        #[test]
        fn subframe_side_is_nominal_when_it_fits(cx in -100.0..1400.0f64, cy in -100.0..800.0f64, beta in 0.42..3.0f64) {
            let f = SubFrame::new(cx, cy, beta, 300.0);
            let r = subframe_rect(&f, HD);
            prop_assert!(contains(&HD.rect(), &r));
            prop_assert!((r.w - 300.0 / beta).abs() < 1e-9);
            prop_assert!((r.h - 300.0 / beta).abs() < 1e-9);
        }

        #[test]
        fn map_round_trip_within_a_pixel(src in arb_rect(), ox in 0.0..300.0f64, oy in 0.0..300.0f64,
                                         scale in 0.2..4.0f64, fx in 0.0..1.0f64, fy in 0.0..1.0f64,
                                         fw in 0.01..1.0f64, fh in 0.01..1.0f64) {
            let dst = Rect::new(ox, oy, src.w * scale, src.h * scale);
            let p = Placement { patch_id: 1, mode: PlacementMode::Relocated, host: 0, scale, src, dst };
            let bw = src.w * fw;
            let bh = src.h * fh;
            let b = Rect::new(src.x + (src.w - bw) * fx, src.y + (src.h - bh) * fy, bw, bh);
            let back = p.inverse_map(&p.forward_map(&b)).unwrap();
            prop_assert!(back.max_abs_diff(&b) <= 1.0);
        }
    }
}
