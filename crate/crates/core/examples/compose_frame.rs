//! Compose one frame's patches into sub-frames and draw the layout.
//!
//! Usage: `cargo run --release --example compose_frame [OUT.svg]`

use patchcomp::optimizer::div_tile_count;
use patchcomp::prelude::*;
use patchcomp::svg::plan_svg;
use patchcomp::synth;

fn main() -> Result<()> {
    let frame = FrameSize::new(1280, 720);
    let profile = ScalingProfile::calibrated(
        Calibration {
            y_ab: 700.0,
            y_cd: 100.0,
            l_ab: 120.0,
            l_cd: 30.0,
            k_cal: 1.0 / 120.0,
        },
        3,
        720,
    )?;
    let patches = synth::random_patches(&mut synth::rng(11), frame, &profile, 20, 8, 90);
    let ga = GaConfig {
        rng_seed: 7,
        ..GaConfig::default()
    };
    let t = std::time::Instant::now();
    let comp = compose_detailed(&patches, &profile, &ObjectiveConfig::default(), &ga, 300.0, frame)?;
    let elapsed = t.elapsed();
    comp.plan.validate(&patches).map_err(Error::InvalidInput)?;

    println!(
        "{} patches -> {} sub-frames ({} with tiling), {} relocated, {:.2} ms",
        patches.len(),
        comp.plan.sub_frames.len(),
        div_tile_count(frame, 300.0),
        comp.plan.relocated_count(),
        elapsed.as_secs_f64() * 1e3
    );
    for (k, a) in comp.stats.attempts.iter().enumerate() {
        println!(
            "  attempt {k}: bounds [{}, {}], population {}, {} generations, verified {}",
            a.bounds.l_min,
            a.bounds.l_max,
            a.population,
            a.best_scores.len(),
            a.verified
        );
    }
    for (j, f) in comp.plan.sub_frames.iter().enumerate() {
        let r = comp.plan.sub_frame_rect(j);
        println!(
            "  S{j}: beta {:.3}, window ({:.0},{:.0}) side {:.0}, hosts {}",
            f.beta,
            r.x,
            r.y,
            r.w,
            comp.plan.hosted(j).count()
        );
    }

    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("compose_frame.svg"));
    std::fs::write(&out, plan_svg(&comp.plan, &patches))?;
    println!("layout written to {}", out.display());
    Ok(())
}
