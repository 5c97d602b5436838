//! Blank areas of a sub-frame and relocation of a patch that no window
//! contains.

use patchcomp::optimizer::{largest_blank_rects, verify_and_relocate};
use patchcomp::prelude::*;

fn main() {
    let frame = FrameSize::new(1280, 720);
    // Two patches near the top-left corner, one far away at the bottom right.
    let patches = vec![
        Patch::new(0, Rect::new(20.0, 20.0, 60.0, 80.0), 1.0),
        Patch::new(1, Rect::new(150.0, 40.0, 40.0, 40.0), 1.0),
        Patch::new(2, Rect::new(1100.0, 600.0, 50.0, 70.0), 1.0),
    ];
    let window = SubFrame::new(150.0, 150.0, 1.0, 300.0);
    let canvas = Rect::new(0.0, 0.0, 300.0, 300.0);
    let occupied: Vec<Rect> = patches[..2].iter().map(|p| p.rect).collect();
    println!("largest blank rectangles in the window:");
    for r in largest_blank_rects(&canvas, &occupied, 4) {
        println!("  ({:.0},{:.0}) {:.0}x{:.0}", r.x, r.y, r.w, r.h);
    }

    // The third patch is outside the only window, so it has to be pasted
    // into blank space.
    let plan = verify_and_relocate(&[window], &patches, frame, 300.0, 16).expect("room for the far patch");
    for p in &plan.placements {
        println!(
            "patch {} {:?}: src ({:.0},{:.0}) -> dst ({:.0},{:.0}) in S{}",
            p.patch_id, p.mode, p.src.x, p.src.y, p.dst.x, p.dst.y, p.host
        );
    }

    // A detection inside the relocated patch maps back to where the patch
    // really is.
    let moved = plan.placement_for(2).unwrap();
    let det = moved.forward_map(&Rect::new(1110.0, 610.0, 30.0, 50.0));
    let back = moved.inverse_map(&det).unwrap();
    println!(
        "box in detector space ({:.0},{:.0}) maps back to ({:.0},{:.0})",
        det.x, det.y, back.x, back.y
    );

    // Too little room: a patch larger than every blank rectangle fails.
    let big = vec![patches[0], patches[1], Patch::new(2, Rect::new(900.0, 400.0, 250.0, 250.0), 1.0)];
    match verify_and_relocate(&[window], &big, frame, 300.0, 16) {
        Ok(_) => println!("unexpectedly verified"),
        Err(e) => println!("as expected: {e}"),
    }
}
