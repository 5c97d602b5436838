//! SVG overlay of a composition plan in frame coordinates.
//!
//! Patches are blue, sub-frame windows yellow, and each relocated patch
//! gets a red arrow toward its host window. Relocation destinations are
//! drawn as dashed boxes, mapped back into the host window's frame area.

use std::fmt::Write;

use crate::geometry::{CompositionPlan, Patch, PlacementMode, Rect};

fn rect_el(out: &mut String, r: &Rect, style: &str) {
    let _ = writeln!(
        out,
        r#"  <rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" {style}/>"#,
        r.x, r.y, r.w, r.h
    );
}

pub fn plan_svg(plan: &CompositionPlan, patches: &[Patch]) -> String {
    let (w, h) = (plan.frame_size.width, plan.frame_size.height);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    s.push_str(
        "  <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" \
         markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">\
         <path d=\"M0,0 L10,5 L0,10 z\" fill=\"#d62728\"/></marker></defs>\n",
    );
    let _ = writeln!(s, r##"  <rect width="{w}" height="{h}" fill="#202020"/>"##);

    for j in 0..plan.sub_frames.len() {
        let r = plan.sub_frame_rect(j);
        rect_el(
            &mut s,
            &r,
            r##"fill="#ffd700" fill-opacity="0.12" stroke="#ffd700" stroke-width="2""##,
        );
        let _ = writeln!(
            s,
            r##"  <text x="{:.1}" y="{:.1}" fill="#ffd700" font-size="14">S{j}</text>"##,
            r.x + 4.0,
            r.y + 16.0
        );
    }
    for p in patches {
        rect_el(
            &mut s,
            &p.rect,
            r##"fill="#1f77b4" fill-opacity="0.35" stroke="#1f77b4" stroke-width="1.5""##,
        );
    }
    for pl in plan.placements.iter().filter(|p| p.mode == PlacementMode::Relocated) {
        let host = plan.sub_frame_rect(pl.host);
        let k = host.w / plan.detector_size;
        let target = Rect::new(host.x + pl.dst.x * k, host.y + pl.dst.y * k, pl.dst.w * k, pl.dst.h * k);
        rect_el(
            &mut s,
            &target,
            r##"fill="none" stroke="#d62728" stroke-width="1" stroke-dasharray="4 2""##,
        );
        let (x0, y0) = pl.src.center();
        let (x1, y1) = target.center();
        let _ = writeln!(
            s,
            r##"  <line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y1:.1}" stroke="#d62728" stroke-width="1.5" marker-end="url(#arrow)"/>"##
        );
    }
    s.push_str("</svg>\n");
    s
}
