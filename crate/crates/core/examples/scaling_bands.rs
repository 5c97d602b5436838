//! Perspective calibration to per-band scaling factors.
//!
//! Two reference lines with known person heights fix how apparent size
//! shrinks with distance; the frame is split into horizontal bands that
//! each get one β.

use patchcomp::prelude::*;

fn main() -> Result<()> {
    // People are 120 px tall near the bottom of a 720-row frame and 30 px
    // near the top. One β unit per 120 px keeps near people at scale 1.
    let cal = Calibration {
        y_ab: 700.0,
        y_cd: 100.0,
        l_ab: 120.0,
        l_cd: 30.0,
        k_cal: 1.0 / 120.0,
    };
    for n in 1..=3 {
        let profile = ScalingProfile::calibrated(cal, n, 720)?;
        println!("{n} band(s):");
        for b in &profile.bands {
            println!(
                "  rows {:>5.0}..{:<5.0} beta {:.3}  sub-frame side {:.0} px",
                b.y_min,
                b.y_max,
                b.beta,
                300.0 / b.beta
            );
        }
    }

    let profile = ScalingProfile::calibrated(cal, 3, 720)?;
    for y in [50.0, 360.0, 700.0] {
        println!("continuous beta at y={y}: {:.3}, banded: {:.3}", cal.beta_continuous(y)?, profile.beta_for(y));
    }
    Ok(())
}
