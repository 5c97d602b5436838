//! Talking to a detector process over the line protocol.
//!
//! The child reads `DETECT <path>` lines and answers with `BOX label score
//! x y w h` lines closed by `END`. This stand-in reports one fixed box per
//! image; a real detector would load the image at `<path>`.

use std::time::Duration;

use patchcomp::pipeline::{process_frame, ExternalDetector, PipelineConfig};
use patchcomp::prelude::*;
use patchcomp::synth;

const SCRIPT: &str = r#"while read cmd path; do
  [ "$cmd" = DETECT ] || exit 1
  [ -s "$path" ] || exit 1
  echo "BOX thing 0.9 10 10 20 20"
  echo END
done"#;

fn main() -> Result<()> {
    let size = FrameSize::new(640, 360);
    let scene = synth::scene(&mut synth::rng(2), "f0", size, 5, 10, 50, 3);
    let mut detector = ExternalDetector::new(SCRIPT, Duration::from_secs(10))?;
    let out = process_frame(
        &scene.frame_id,
        &scene.frame,
        &scene.mask,
        &ScalingProfile::uniform(size.height),
        &PipelineConfig::default(),
        &mut detector,
    )?;
    println!("{} sub-frames, {} boxes mapped back, {} dropped", out.plan.sub_frames.len(), out.boxes.len(), out.dropped);
    for b in &out.boxes {
        println!("  {} {:.2} at ({:.0},{:.0}) {:.0}x{:.0}", b.label, b.score, b.rect.x, b.rect.y, b.rect.w, b.rect.h);
    }

    // A child that breaks the protocol surfaces an error instead of boxes.
    let mut broken = ExternalDetector::new("read x; echo nonsense", Duration::from_secs(5))?;
    let err = process_frame(
        &scene.frame_id,
        &scene.frame,
        &scene.mask,
        &ScalingProfile::uniform(size.height),
        &PipelineConfig::default(),
        &mut broken,
    )
    .unwrap_err();
    println!("broken detector: {err}");
    Ok(())
}
