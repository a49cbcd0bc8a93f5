//! SVG rendering of combs.
//!
//! The canvas is 900 by 450. Space `x` in [0, 1] maps to `40 + 820 x`; time
//! `t` maps to `410 - 370 t / top`, where `top` is 1.05 times the last
//! event time (1.05 when the comb never changes). A point `(x, t)` is dark
//! when `x` is not in `I_t`: isolated points of the complement become
//! vertical segments from 0 up to the comb function, and gaps of positive
//! length become rectangles over each event interval.

use std::fmt::Write;

use combkit::{Comb, CombView, Height};

pub const WIDTH: f64 = 900.0;
pub const HEIGHT: f64 = 450.0;
const LEFT: f64 = 40.0;
const RIGHT: f64 = 860.0;
const BASE: f64 = 410.0;
const CEILING: f64 = 40.0;

struct Frame {
    top: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        LEFT + (RIGHT - LEFT) * x
    }

    fn y(&self, t: f64) -> f64 {
        BASE - (BASE - CEILING) * (t / self.top).min(1.0)
    }
}

pub fn render_comb(comb: &Comb) -> String {
    let last = comb.last_time();
    let frame = Frame {
        top: if last > 0.0 { last * 1.05 } else { 1.05 },
    };
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    for x in boundary_points(comb) {
        let top = match comb.comb_function(x) {
            Height::Finite(h) => h,
            Height::Never => frame.top,
        };
        if top > 0.0 {
            writeln!(
                svg,
                r##"<line class="tooth" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#222" stroke-width="1"/>"##,
                frame.x(x),
                frame.y(0.0),
                frame.x(x),
                frame.y(top)
            )
            .unwrap();
        }
    }

    let events = comb.events();
    for (i, event) in events.iter().enumerate() {
        let until = events.get(i + 1).map_or(frame.top, |e| e.time);
        let comps = event.partition.components();
        let mut gaps = Vec::new();
        let mut prev = 0.0;
        for c in comps {
            if c.left > prev {
                gaps.push((prev, c.left));
            }
            prev = c.right;
        }
        if prev < 1.0 {
            gaps.push((prev, 1.0));
        }
        for (l, r) in gaps {
            writeln!(
                svg,
                r##"<rect class="dust" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#222"/>"##,
                frame.x(l),
                frame.y(until),
                frame.x(r) - frame.x(l),
                frame.y(event.time) - frame.y(until)
            )
            .unwrap();
        }
    }

    writeln!(
        svg,
        r##"<line class="baseline" x1="{LEFT:.3}" y1="{BASE:.3}" x2="{RIGHT:.3}" y2="{BASE:.3}" stroke="#222" stroke-width="1"/>"##
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

/// Interior points where two components of some value touch.
fn boundary_points(comb: &Comb) -> Vec<f64> {
    let mut points = Vec::new();
    for e in comb.events() {
        for w in e.partition.components().windows(2) {
            if w[0].right == w[1].left {
                points.push(w[0].right);
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}
