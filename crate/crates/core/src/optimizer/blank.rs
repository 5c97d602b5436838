//! Maximal empty rectangles inside a container with rectangular obstacles.
//!
//! Every maximal empty rectangle has its left edge on the container's left
//! side or on some obstacle's right edge, and its right edge on the
//! container's right side or some obstacle's left edge. For each such pair
//! of x-coordinates the obstacles crossing that slab cut it into vertical
//! gaps; each gap is vertically maximal by construction and is kept when no
//! obstacle-free room remains on either side. `O(n³)` for `n` obstacles,
//! which is fine for the few dozen patches a sub-frame holds.

use crate::geometry::{Rect, EPS};

pub fn maximal_empty_rects(container: &Rect, obstacles: &[Rect]) -> Vec<Rect> {
    let obs: Vec<Rect> = obstacles
        .iter()
        .filter_map(|o| o.intersection(container))
        .filter(|o| o.w > EPS && o.h > EPS)
        .collect();

    let mut lefts: Vec<f64> = std::iter::once(container.x)
        .chain(obs.iter().map(Rect::right).filter(|&x| x < container.right() - EPS))
        .collect();
    let mut rights: Vec<f64> = std::iter::once(container.right())
        .chain(obs.iter().map(|o| o.x).filter(|&x| x > container.x + EPS))
        .collect();
    sort_dedup(&mut lefts);
    sort_dedup(&mut rights);

    let mut out = Vec::new();
    let mut blockers: Vec<(f64, f64)> = Vec::with_capacity(obs.len());
    for &l in &lefts {
        for &r in rights.iter().filter(|&&r| r > l + EPS) {
            blockers.clear();
            blockers.extend(
                obs.iter()
                    .filter(|o| o.x < r - EPS && o.right() > l + EPS)
                    .map(|o| (o.y, o.bottom())),
            );
            blockers.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut cursor = container.y;
            let mut gaps = Vec::new();
            for &(y0, y1) in &blockers {
                if y0 > cursor + EPS {
                    gaps.push((cursor, y0));
                }
                cursor = cursor.max(y1);
            }
            if container.bottom() > cursor + EPS {
                gaps.push((cursor, container.bottom()));
            }

            for (y0, y1) in gaps {
                let touches = |edge: f64, side: fn(&Rect) -> f64| {
                    obs.iter().any(|o| {
                        (side(o) - edge).abs() <= EPS && o.y < y1 - EPS && o.bottom() > y0 + EPS
                    })
                };
                let left_closed = (l - container.x).abs() <= EPS || touches(l, Rect::right);
                let right_closed = (r - container.right()).abs() <= EPS || touches(r, |o| o.x);
                if left_closed && right_closed {
                    out.push(Rect::from_corners(l, y0, r, y1));
                }
            }
        }
    }
    out.sort_by(blank_order);
    out
}

/// Largest first; ties broken by position so the order is reproducible.
pub(crate) fn blank_order(a: &Rect, b: &Rect) -> std::cmp::Ordering {
    b.area()
        .total_cmp(&a.area())
        .then(a.y.total_cmp(&b.y))
        .then(a.x.total_cmp(&b.x))
        .then(a.w.total_cmp(&b.w))
}

/// The `n_r` largest maximal empty rectangles.
pub fn largest_blank_rects(container: &Rect, obstacles: &[Rect], n_r: usize) -> Vec<Rect> {
    let mut all = maximal_empty_rects(container, obstacles);
    all.truncate(n_r);
    all
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= EPS);
}
