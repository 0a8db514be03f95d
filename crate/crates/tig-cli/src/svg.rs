//! SVG rendering of scenarios, planned paths and execution traces.
//!
//! One SVG unit is one meter and the view box equals the scenario bounds;
//! the drawing group is y-flipped so the map reads with y up. Obstacles are
//! filled ellipses with dashed inflated boundaries (dotted virtual ellipses
//! on request); paths are polylines; sensor-range circles mark replan
//! positions, and they are the only circle elements emitted.

use std::fmt::Write;

use tig_core::dtig::TraceEvent;
use tig_core::geometry::{Ellipse, Point2};
use tig_core::world::Scenario;

use crate::paths::PathDoc;

pub struct RenderInputs<'a> {
    pub scenario: &'a Scenario,
    pub path: Option<&'a PathDoc>,
    pub trace: Option<&'a [TraceEvent]>,
    /// Draw the waypoint-hosting virtual ellipses as dotted outlines.
    pub show_virtual: bool,
}

fn ellipse_element(out: &mut String, e: &Ellipse, extra: f64, style: &str) {
    let deg = e.theta.to_degrees();
    let _ = writeln!(
        out,
        r#"  <ellipse cx="{:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}" transform="rotate({:.3} {:.3} {:.3})" {style}/>"#,
        e.cx,
        e.cy,
        e.a + e.r_safe + extra,
        e.b + e.r_safe + extra,
        deg,
        e.cx,
        e.cy,
    );
}

fn polyline_element(out: &mut String, pts: &[Point2], style: &str) {
    if pts.len() < 2 {
        return;
    }
    let mut coords = String::new();
    for p in pts {
        let _ = write!(coords, "{:.3},{:.3} ", p.x, p.y);
    }
    let _ = writeln!(
        out,
        r#"  <polyline fill="none" {style} points="{}"/>"#,
        coords.trim_end()
    );
}

fn marker(out: &mut String, p: Point2, fill: &str) {
    let _ = writeln!(
        out,
        r#"  <rect x="{:.3}" y="{:.3}" width="4" height="4" fill="{fill}"/>"#,
        p.x - 2.0,
        p.y - 2.0,
    );
}

pub fn render(inputs: &RenderInputs) -> String {
    let s = inputs.scenario;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3} {h:.3}" width="{w:.3}" height="{h:.3}">
<rect width="100%" height="100%" fill="white"/>
<g transform="translate(0 {h:.3}) scale(1 -1)">"#,
        w = s.width,
        h = s.height,
    );

    for e in &s.obstacles {
        let raw = Ellipse { r_safe: 0.0, ..*e };
        ellipse_element(&mut out, &raw, 0.0, r##"fill="#b0b6bd""##);
        ellipse_element(
            &mut out,
            e,
            0.0,
            r##"fill="none" stroke="#6b7280" stroke-width="0.8" stroke-dasharray="4 3""##,
        );
        if inputs.show_virtual {
            ellipse_element(
                &mut out,
                e,
                s.params.d_vir,
                r##"fill="none" stroke="#9ca3af" stroke-width="0.5" stroke-dasharray="1 2""##,
            );
        }
    }
    for e in &s.hidden_obstacles {
        let raw = Ellipse { r_safe: 0.0, ..*e };
        ellipse_element(&mut out, &raw, 0.0, r##"fill="#f2b27a""##);
        ellipse_element(
            &mut out,
            e,
            0.0,
            r##"fill="none" stroke="#d97706" stroke-width="0.8" stroke-dasharray="4 3""##,
        );
    }

    if let Some(doc) = inputs.path {
        polyline_element(
            &mut out,
            &doc.waypoints,
            r##"stroke="#1d4ed8" stroke-width="1.2""##,
        );
        if let Some(smoothed) = &doc.smoothed {
            polyline_element(
                &mut out,
                smoothed,
                r##"stroke="#15803d" stroke-width="1.2""##,
            );
        }
    }

    if let Some(events) = inputs.trace {
        for event in events {
            if let TraceEvent::Replan { position, .. } = event {
                let _ = writeln!(
                    out,
                    r##"  <circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#7c3aed" stroke-width="0.6" stroke-dasharray="5 4"/>"##,
                    position.x, position.y, s.params.sensor_range,
                );
            }
        }
        let executed: Vec<Point2> = events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Move { position } => Some(*position),
                _ => None,
            })
            .collect();
        polyline_element(
            &mut out,
            &executed,
            r##"stroke="#1d4ed8" stroke-width="1.2""##,
        );
    }

    marker(&mut out, s.start, "#16a34a");
    marker(&mut out, s.target, "#dc2626");
    out.push_str("</g>\n</svg>\n");
    out
}
