//! Per-stage timing of the pipeline on synthetic frames.
//!
//! Usage: `cargo run --release --example bench_stages [FRAMES]`

use std::time::Duration;

use patchcomp::pipeline::{process_frame, OracleDetector, PipelineConfig, StageTimes};
use patchcomp::prelude::*;
use patchcomp::synth;

fn main() -> Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let size = FrameSize::new(1280, 720);
    let profile = ScalingProfile::uniform(size.height);
    let cfg = PipelineConfig::default();
    let mut rng = synth::rng(9);
    let mut times: Vec<StageTimes> = Vec::with_capacity(n);
    let mut sub_frames = 0;
    for i in 0..n {
        let k = 1 + i % 30;
        let s = synth::scene(&mut rng, &format!("f{i}"), size, k, 8, 80, 3);
        let mut det = OracleDetector::new(&s.annotations);
        let out = process_frame(&s.frame_id, &s.frame, &s.mask, &profile, &cfg, &mut det)?;
        sub_frames += out.plan.sub_frames.len();
        times.push(out.times);
    }
    let mean = |f: fn(&StageTimes) -> Duration| times.iter().map(|t| f(t).as_secs_f64()).sum::<f64>() * 1e3 / n as f64;
    println!("{n} frames of 1280x720, {:.2} sub-frames per frame", sub_frames as f64 / n as f64);
    println!("  extraction  {:>7.3} ms", mean(|t| t.extraction));
    println!("  composition {:>7.3} ms", mean(|t| t.composition));
    println!("  render      {:>7.3} ms", mean(|t| t.render));
    println!("  detect      {:>7.3} ms", mean(|t| t.detect));
    println!("  map back    {:>7.3} ms", mean(|t| t.map_back));
    Ok(())
}
