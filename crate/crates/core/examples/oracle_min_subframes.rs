//! The exhaustive minimum next to the search result on small instances.

use patchcomp::oracle::brute_force_min_subframes;
use patchcomp::prelude::*;
use patchcomp::synth;

fn main() -> Result<()> {
    let frame = FrameSize::new(640, 360);
    let profile = ScalingProfile::uniform(360);
    let mut rng = synth::rng(21);
    let mut agree = 0;
    let trials = 20;
    for t in 0..trials {
        let patches = synth::random_patches(&mut rng, frame, &profile, 5, 60, 170);
        let oracle = brute_force_min_subframes(&patches, 300.0, frame, 32, 16)?;
        let ga = GaConfig {
            rng_seed: t,
            grid_stride: 32,
            ..GaConfig::default()
        };
        let plan = compose(&patches, &profile, &ObjectiveConfig::default(), &ga, 300.0, frame)?;
        let n = plan.sub_frames.len();
        agree += usize::from(n == oracle.n_min);
        println!("instance {t:>2}: {} patches, optimum {}, search {n}", patches.len(), oracle.n_min);
    }
    println!("search matched the optimum on {agree}/{trials}");
    Ok(())
}
