//! Foreground mask to patches: differencing against a background, 3x3
//! opening and closing, connected components, margin.

use patchcomp::extraction::frame_difference;
use patchcomp::prelude::*;
use patchcomp::synth;

fn main() -> Result<()> {
    let size = FrameSize::new(640, 360);
    let scene = synth::scene(&mut synth::rng(3), "f0", size, 8, 10, 60, 3);

    // Background: the same texture without the objects.
    let mut background = Raster::new(size.width, size.height, 1, 0);
    for y in 0..size.height {
        for x in 0..size.width {
            background.pixel_mut(x, y)[0] = (40 + (x * 3 + y * 5) % 60) as u8;
        }
    }
    let cfg = ExtractionConfig::default();
    let mask = frame_difference(&scene.frame, &background, cfg.diff_threshold)?;
    println!("foreground pixels: {}", mask.count());

    let profile = ScalingProfile::uniform(size.height);
    let patches = extract_patches(&mask, &profile, &cfg);
    println!("{} objects, {} patches", scene.annotations.len(), patches.len());
    for p in &patches {
        let gt = scene
            .annotations
            .iter()
            .find(|a| p.rect.contains(&a.rect))
            .map(|a| format!("holds object at ({:.0},{:.0})", a.rect.x, a.rect.y))
            .unwrap_or_else(|| "no object".into());
        println!(
            "  patch {:>2}: x={:>4.0} y={:>4.0} {:>3.0}x{:<3.0} {gt}",
            p.id, p.rect.x, p.rect.y, p.rect.w, p.rect.h
        );
    }
    Ok(())
}
