//! Scoring of candidate sub-frame sets. Higher is better.
//!
//! ```text
//! score = (alpha·psi + Σ_j phi_j) / H(N_F) − delta·G
//! ```
//!
//! `psi` rewards covering much of the (β-weighted) patch area in situ,
//! `phi_j` rewards covered patches that sit away from the center of
//! sub-frame `j` (leaving contiguous blank room), `H` grows with the number
//! of sub-frames, and `G` flags candidates whose total window area cannot
//! possibly hold the patches.

use std::f64::consts::E;

use crate::geometry::{contains, FrameSize, Patch, Rect, SubFrame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConfig {
    pub alpha: f64,
    pub delta: f64,
    pub k_count: f64,
    pub b_count: f64,
    pub psi_epsilon: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            delta: 1e6,
            k_count: 1.0,
            b_count: 0.5,
            psi_epsilon: 1e-9,
        }
    }
}

/// `cover[i][j]`: sub-frame `j` contains patch `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    n_patches: usize,
    n_frames: usize,
    cells: Vec<bool>,
}

impl CoverageMatrix {
    pub fn n_patches(&self) -> usize {
        self.n_patches
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n_frames + j]
    }

    pub fn is_covered(&self, i: usize) -> bool {
        (0..self.n_frames).any(|j| self.get(i, j))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_patches).filter(move |&i| self.get(i, j))
    }
}

pub fn coverage(patches: &[Patch], sub_frames: &[SubFrame], frame_size: FrameSize) -> CoverageMatrix {
    let rects: Vec<Rect> = sub_frames.iter().map(|f| f.rect(frame_size)).collect();
    coverage_of_rects(patches, &rects)
}

pub(crate) fn coverage_of_rects(patches: &[Patch], rects: &[Rect]) -> CoverageMatrix {
    let mut cells = Vec::with_capacity(patches.len() * rects.len());
    for p in patches {
        cells.extend(rects.iter().map(|r| contains(r, &p.rect)));
    }
    CoverageMatrix {
        n_patches: patches.len(),
        n_frames: rects.len(),
        cells,
    }
}

/// Location term: `ln(1 / max(A_total/A_cov − 1, ε) + e)` over β-weighted
/// patch areas. Uncovered everything gives exactly 1; full coverage gives
/// the capped maximum `ln(1/ε + e)`.
pub fn psi(patches: &[Patch], cov: &CoverageMatrix, psi_epsilon: f64) -> f64 {
    let (mut total, mut covered) = (0.0, 0.0);
    for (i, p) in patches.iter().enumerate() {
        let a = p.scaled_area();
        total += a;
        if cov.is_covered(i) {
            covered += a;
        }
    }
    psi_from_areas(total, covered, psi_epsilon)
}

pub(crate) fn psi_from_areas(total: f64, covered: f64, psi_epsilon: f64) -> f64 {
    if covered <= 0.0 {
        return 1.0;
    }
    let excess = (total / covered - 1.0).max(psi_epsilon);
    (1.0 / excess + E).ln()
}

/// Distribution term for sub-frame `j`: mean over the patches it covers of
/// `sqrt(|dx·dy|)·sqrt(w·h)`, with offsets measured between patch and
/// sub-frame centers. Zero when nothing is covered.
pub fn phi(patches: &[Patch], j: usize, frame_rect: &Rect, cov: &CoverageMatrix) -> f64 {
    let (fx, fy) = frame_rect.center();
    let (mut sum, mut n) = (0.0, 0usize);
    for i in cov.column(j) {
        sum += phi_contribution(&patches[i].rect, fx, fy);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[inline]
pub(crate) fn phi_contribution(r: &Rect, fx: f64, fy: f64) -> f64 {
    let (px, py) = r.center();
    ((px - fx) * (py - fy)).abs().sqrt() * r.area().sqrt()
}

/// Count term `k·N + b`.
pub fn h_count(cfg: &ObjectiveConfig, n_frames: usize) -> f64 {
    cfg.k_count * n_frames as f64 + cfg.b_count
}

/// 0 when the β-weighted window area reaches the β-weighted patch area
/// (inclusive), 1 otherwise.
pub fn g_penalty(patches: &[Patch], sub_frames: &[SubFrame], frame_size: FrameSize) -> u8 {
    let frames: f64 = sub_frames.iter().map(|f| f.scaled_area(frame_size)).sum();
    let need: f64 = patches.iter().map(Patch::scaled_area).sum();
    u8::from(frames < need)
}

/// Combined score. An empty sub-frame set scores `−delta`.
pub fn score(
    patches: &[Patch],
    sub_frames: &[SubFrame],
    frame_size: FrameSize,
    cfg: &ObjectiveConfig,
) -> f64 {
    if sub_frames.is_empty() {
        return -cfg.delta;
    }
    let rects: Vec<Rect> = sub_frames.iter().map(|f| f.rect(frame_size)).collect();
    let cov = coverage_of_rects(patches, &rects);
    let loc = psi(patches, &cov, cfg.psi_epsilon);
    let dist: f64 = rects
        .iter()
        .enumerate()
        .map(|(j, r)| phi(patches, j, r, &cov))
        .sum();
    (cfg.alpha * loc + dist) / h_count(cfg, sub_frames.len())
        - cfg.delta * g_penalty(patches, sub_frames, frame_size) as f64
}
