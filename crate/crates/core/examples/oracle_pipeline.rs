//! End to end on synthetic frames with the ground-truth detector, against
//! whole-frame downsampling and fixed tiling.

use patchcomp::pipeline::{evaluate, process_frame, run_div, run_ds, OracleDetector, PipelineConfig, Prediction};
use patchcomp::prelude::*;
use patchcomp::synth;

fn main() -> Result<()> {
    let size = FrameSize::new(1280, 720);
    let mut rng = synth::rng(5);
    let scenes: Vec<_> = (0..10)
        .map(|i| synth::scene(&mut rng, &format!("frame{i:02}"), size, 12, 8, 60, 3))
        .collect();
    let gt: Vec<_> = scenes.iter().flat_map(|s| s.annotations.clone()).collect();
    // Objects narrower than 6 detector pixels go unseen, as with a real
    // detector; that is what hurts whole-frame downsampling.
    let mut detector = OracleDetector::new(&gt).with_min_side(6.0);
    let cfg = PipelineConfig::default();
    let profile = ScalingProfile::uniform(size.height);

    let (mut ours, mut ds, mut div) = (Vec::<Prediction>::new(), Vec::new(), Vec::new());
    let (mut invocations, mut dropped) = (0, 0);
    for s in &scenes {
        let out = process_frame(&s.frame_id, &s.frame, &s.mask, &profile, &cfg, &mut detector)?;
        invocations += out.plan.sub_frames.len();
        dropped += out.dropped;
        ours.extend(out.boxes.into_iter().map(|b| b.into_prediction(&s.frame_id)));
        ds.extend(run_ds(&s.frame, &s.frame_id, &mut detector, 300)?.into_iter().map(|b| b.into_prediction(&s.frame_id)));
        div.extend(
            run_div(&s.frame, &s.frame_id, &mut detector, 300, cfg.nms_iou)?
                .into_iter()
                .map(|b| b.into_prediction(&s.frame_id)),
        );
    }
    println!("{} frames, {} objects", scenes.len(), gt.len());
    println!("composed: {invocations} detector calls, {dropped} boxes dropped");
    println!("tiling:   {} detector calls", scenes.len() * 15);
    for (name, preds) in [("composed", &ours), ("ds", &ds), ("div", &div)] {
        let r = evaluate(preds, &gt, 0.5);
        println!(
            "{name:>9}: 1-precision {:.3} recall {:.3} f1 {:.3}",
            r.one_minus_precision, r.recall, r.f1
        );
    }
    Ok(())
}
