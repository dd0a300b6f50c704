//! SVG drawings of scenes, grasps and squeeze traces.
//!
//! One metre is 1000 px and the y axis points up, as in the scene frame.
//! Output depends only on the inputs, so identical inputs give identical
//! files.

use std::fmt::Write;

use mograsp::geometry::{ConvexPolygon, Vec2};
use mograsp::grasping::internal_region;
use mograsp::sim::TraceFrame;
use mograsp::{Grasp, Gripper, Scene};

pub const PX_PER_M: f64 = 1000.0;
const MARGIN_PX: f64 = 10.0;
/// At most this many trace keyframes are drawn, evenly spaced.
const MAX_KEYFRAMES: usize = 8;

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7"];

fn colour(id: usize) -> &'static str {
    PALETTE[id % PALETTE.len()]
}

fn px(v: Vec2) -> (f64, f64) {
    (v.x * PX_PER_M, -v.y * PX_PER_M)
}

fn path(poly: &ConvexPolygon) -> String {
    let mut d = String::new();
    for (i, &v) in poly.vertices().iter().enumerate() {
        let (x, y) = px(v);
        let _ = write!(d, "{}{x:.3} {y:.3} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

/// Draws `scene`, optionally with the jaws of `grasp` at full opening and
/// the keyframes of a squeeze `trace`.
pub fn render_svg(scene: &Scene, grasp: Option<(&Grasp, &Gripper)>, trace: Option<&[TraceFrame]>) -> String {
    let mut layers: Vec<String> = Vec::new();
    let mut extent: Vec<Vec2> = Vec::new();

    if let Some(frames) = trace.filter(|f| !f.is_empty()) {
        let stride = frames.len().div_ceil(MAX_KEYFRAMES).max(1);
        let mut picks: Vec<&TraceFrame> = frames.iter().step_by(stride).collect();
        if picks.last().map(|f| f.step) != frames.last().map(|f| f.step) {
            picks.push(frames.last().expect("nonempty"));
        }
        for f in picks {
            for &(id, pose) in &f.poses {
                if let Some(o) = scene.get(id) {
                    let poly = o.shape().transform(&pose);
                    extent.extend_from_slice(poly.vertices());
                    layers.push(format!(
                        "<path class=\"keyframe\" d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-opacity=\"0.45\" stroke-width=\"0.6\"/>",
                        path(&poly),
                        colour(id)
                    ));
                }
            }
        }
    }

    for o in scene.objects() {
        let poly = o.world_polygon();
        extent.extend_from_slice(poly.vertices());
        layers.push(format!(
            "<path class=\"object\" id=\"obj{}\" d=\"{}\" fill=\"{}\" fill-opacity=\"0.8\" stroke=\"#333333\" stroke-width=\"0.5\"/>",
            o.id,
            path(&poly),
            colour(o.id)
        ));
    }

    if let Some((g, gripper)) = grasp {
        let region = internal_region(gripper, g, gripper.w_max).expect("full opening is always valid");
        for (class, poly, style) in [
            ("region", &region.rect, "fill=\"none\" stroke=\"#555555\" stroke-dasharray=\"3 2\" stroke-width=\"0.6\""),
            ("jaw", &region.left_jaw, "fill=\"#000000\""),
            ("jaw", &region.right_jaw, "fill=\"#000000\""),
        ] {
            extent.extend_from_slice(poly.vertices());
            layers.push(format!("<path class=\"{class}\" d=\"{}\" {style}/>", path(poly)));
        }
    }

    let (mut lo, mut hi) = ((0.0f64, 0.0f64), (0.0f64, 0.0f64));
    if let Some(&first) = extent.first() {
        lo = px(first);
        hi = lo;
        for &v in &extent {
            let (x, y) = px(v);
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
    }
    let (x0, y0) = (lo.0 - MARGIN_PX, lo.1 - MARGIN_PX);
    let (w, h) = (hi.0 - lo.0 + 2.0 * MARGIN_PX, hi.1 - lo.1 + 2.0 * MARGIN_PX);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.3} {y0:.3} {w:.3} {h:.3}\" width=\"{w:.0}\" height=\"{h:.0}\">"
    );
    let _ = writeln!(svg, "<rect x=\"{x0:.3}\" y=\"{y0:.3}\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"#ffffff\"/>");
    for l in layers {
        svg.push_str(&l);
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}
