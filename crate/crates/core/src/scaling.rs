//! Perspective scale calibration.
//!
//! Two reference lines at heights `y_ab` (near) and `y_cd` (far) and the
//! pixel heights `l_ab`, `l_cd` of a person standing on each give a linear
//! model of apparent size against image row. Scaled by `k_cal` that model is
//! the resize factor β applied to content at that row before detection.
//! The frame is split into a few horizontal bands with one β each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference measurements for the linear size model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub y_ab: f64,
    pub y_cd: f64,
    pub l_ab: f64,
    pub l_cd: f64,
    pub k_cal: f64,
}

impl Calibration {
    pub fn validate(&self) -> Result<()> {
        if self.y_ab == self.y_cd {
            return Err(Error::InvalidInput(
                "calibration: y_ab and y_cd must differ".into(),
            ));
        }
        if !(self.l_ab > 0.0 && self.l_cd > 0.0) {
            return Err(Error::InvalidInput(
                "calibration: l_ab and l_cd must be positive".into(),
            ));
        }
        if !(self.k_cal > 0.0) {
            return Err(Error::InvalidInput(
                "calibration: k_cal must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Unquantized β at row `y`, extrapolating outside `[y_cd, y_ab]`.
    pub fn beta_continuous(&self, y: f64) -> Result<f64> {
        let dy = self.y_ab - self.y_cd;
        let slope = (self.l_ab - self.l_cd) / dy;
        let intercept = (self.y_ab * self.l_cd - self.y_cd * self.l_ab) / dy;
        let beta = self.k_cal * (slope * y + intercept);
        if beta > 0.0 {
            Ok(beta)
        } else {
            Err(Error::NonPositiveBeta { y, beta })
        }
    }
}

/// Half-open row interval `[y_min, y_max)` sharing one scaling factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub y_min: f64,
    pub y_max: f64,
    pub beta: f64,
}

impl Band {
    pub fn midpoint(&self) -> f64 {
        (self.y_min + self.y_max) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingProfile {
    pub calibration: Option<Calibration>,
    pub bands: Vec<Band>,
}

impl ScalingProfile {
    /// One band with β = 1: composition without perspective correction.
    pub fn uniform(frame_height: u32) -> Self {
        Self::constant(frame_height, 1.0)
    }

    pub fn constant(frame_height: u32, beta: f64) -> Self {
        Self {
            calibration: None,
            bands: vec![Band {
                y_min: 0.0,
                y_max: frame_height as f64,
                beta,
            }],
        }
    }

    pub fn calibrated(cal: Calibration, n_bands: usize, frame_height: u32) -> Result<Self> {
        cal.validate()?;
        let bands = build_bands(&cal, n_bands, frame_height)?;
        Ok(Self {
            calibration: Some(cal),
            bands,
        })
    }

    /// Explicit bands; they must tile `[0, frame_height)` in order.
    pub fn from_bands(bands: Vec<Band>, frame_height: u32) -> Result<Self> {
        if bands.is_empty() || bands.len() > 3 {
            return Err(Error::InvalidInput("1 to 3 bands required".into()));
        }
        let mut edge = 0.0;
        for b in &bands {
            if b.y_min != edge || b.y_max <= b.y_min || !(b.beta > 0.0) {
                return Err(Error::InvalidInput(format!("bad band {b:?}")));
            }
            edge = b.y_max;
        }
        if edge != frame_height as f64 {
            return Err(Error::InvalidInput(
                "bands do not cover the frame height".into(),
            ));
        }
        Ok(Self {
            calibration: None,
            bands,
        })
    }

    /// β of the band containing row `y`. Rows outside the frame use the
    /// nearest band.
    pub fn beta_for(&self, y: f64) -> f64 {
        self.bands
            .iter()
            .find(|b| y < b.y_max)
            .unwrap_or_else(|| self.bands.last().expect("profile has bands"))
            .beta
    }

    pub fn frame_height(&self) -> f64 {
        self.bands.last().map_or(0.0, |b| b.y_max)
    }

    pub fn max_beta(&self) -> f64 {
        self.bands.iter().map(|b| b.beta).fold(0.0, f64::max)
    }
}

/// Split `[0, frame_height)` into `n_bands` equal intervals, each sampling β
/// at its vertical midpoint.
pub fn build_bands(cal: &Calibration, n_bands: usize, frame_height: u32) -> Result<Vec<Band>> {
    if !(1..=3).contains(&n_bands) {
        return Err(Error::InvalidInput(format!(
            "n_bands must be 1, 2 or 3 (got {n_bands})"
        )));
    }
    if frame_height == 0 {
        return Err(Error::InvalidInput("frame height must be positive".into()));
    }
    let h = frame_height as f64;
    (0..n_bands)
        .map(|i| {
            let y_min = (i as f64 * h / n_bands as f64).floor();
            let y_max = if i + 1 == n_bands {
                h
            } else {
                ((i + 1) as f64 * h / n_bands as f64).floor()
            };
            let beta = cal.beta_continuous((y_min + y_max) / 2.0)?;
            Ok(Band { y_min, y_max, beta })
        })
        .collect()
}
