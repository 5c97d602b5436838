//! Exhaustive minimum sub-frame count for tiny unscaled instances.
//!
//! Feasibility is decided by [`verify_and_relocate`], the same routine the
//! optimizer uses, so the optimum is defined under identical semantics.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CompositionPlan, FrameSize, Patch, SubFrame, EPS};
use crate::optimizer::{check_capacity, verify_and_relocate};

/// Largest number of sub-frame combinations examined for one count.
pub const MAX_COMBINATIONS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub n_min: usize,
    pub witness: CompositionPlan,
}

/// Distinct windows reachable from grid centers `(k·stride, l·stride)`
/// inside the frame, in row-major order of their first center.
pub fn grid_windows(frame_size: FrameSize, detector_size: f64, grid_stride: u32) -> Vec<SubFrame> {
    let stride = grid_stride.max(1);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for iy in 0..=frame_size.height / stride {
        for ix in 0..=frame_size.width / stride {
            let f = SubFrame::new((ix * stride) as f64, (iy * stride) as f64, 1.0, detector_size);
            let r = f.rect(frame_size);
            if seen.insert((r.x.to_bits(), r.y.to_bits())) {
                out.push(f);
            }
        }
    }
    out
}

/// `C(m + n − 1, n)`, saturating.
fn multisets(m: u64, n: u64) -> u64 {
    let mut acc: u64 = 1;
    for k in 1..=n {
        acc = match acc.checked_mul(m + k - 1) {
            Some(v) => v / k,
            None => return u64::MAX,
        };
    }
    acc
}

/// With pairwise disjoint patches every placed image is disjoint from the
/// others in its host, so the detector canvases must hold the total area.
fn area_lower_bound(patches: &[Patch], detector_size: f64) -> usize {
    let disjoint = patches
        .iter()
        .enumerate()
        .all(|(i, a)| patches[i + 1..].iter().all(|b| !a.rect.overlaps(&b.rect)));
    if !disjoint {
        return 1;
    }
    let area: f64 = patches.iter().map(|p| p.rect.area()).sum();
    ((area / (detector_size * detector_size) - EPS).ceil() as usize).max(1)
}

/// Smallest number of grid windows (repeats allowed) under which every
/// patch can be placed, with the first feasible combination as witness.
pub fn brute_force_min_subframes(
    patches: &[Patch],
    detector_size: f64,
    frame_size: FrameSize,
    grid_stride: u32,
    n_r: usize,
) -> Result<OracleSolution> {
    if let Some(p) = patches.iter().find(|p| p.beta != 1.0) {
        return Err(Error::InvalidInput(format!(
            "oracle handles unscaled instances only; patch {} has beta {}",
            p.id, p.beta
        )));
    }
    check_capacity(patches, detector_size, frame_size)?;
    if patches.is_empty() {
        return Ok(OracleSolution {
            n_min: 0,
            witness: CompositionPlan::empty(frame_size, detector_size),
        });
    }
    let windows = grid_windows(frame_size, detector_size, grid_stride);
    let m = windows.len();
    for n in area_lower_bound(patches, detector_size).. {
        let count = multisets(m as u64, n as u64);
        if count > MAX_COMBINATIONS {
            return Err(Error::OracleTooLarge(format!(
                "{count} combinations of {n} among {m} windows"
            )));
        }
        let mut idx = vec![0usize; n];
        let mut frames = Vec::with_capacity(n);
        loop {
            frames.clear();
            frames.extend(idx.iter().map(|&i| windows[i]));
            if let Ok(witness) =
                verify_and_relocate(&frames, patches, frame_size, detector_size, n_r)
            {
                return Ok(OracleSolution { n_min: n, witness });
            }
            // Next non-decreasing index vector.
            let Some(k) = (0..n).rev().find(|&k| idx[k] + 1 < m) else {
                break;
            };
            let v = idx[k] + 1;
            idx[k..].iter_mut().for_each(|i| *i = v);
        }
    }
    unreachable!("loop returns or errors")
}
