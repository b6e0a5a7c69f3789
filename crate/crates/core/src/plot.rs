//! Deterministic SVG emission for curves, heatmaps and linkage drawings.
//! Plain string assembly with fixed-precision coordinates keeps reruns
//! byte-identical; no plotting stack involved.

use crate::complexity::BoxCountCurve;
use crate::geom::Vec2;
use crate::grasp::CoverageMap;
use crate::rcm::{carried_center, PlatformPose, TrapezoidDesign};
use std::fmt::Write;

const MARGIN: f64 = 48.0;

struct Canvas {
    width: f64,
    height: f64,
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Canvas {
        Canvas { width, height, body: String::new() }
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        writeln!(
            self.body,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{stroke}" stroke-width="{width}"/>"#,
            a.0, a.1, b.0, b.1
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for (x, y) in pts {
            write!(d, "{:.3},{:.3} ", x, y).unwrap();
        }
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        )
        .unwrap();
    }

    fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        writeln!(
            self.body,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{fill}"/>"#,
            c.0, c.1, r
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        writeln!(
            self.body,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            x, y, w, h
        )
        .unwrap();
    }

    fn text(&mut self, at: (f64, f64), size: f64, content: &str) {
        writeln!(
            self.body,
            r#"<text x="{:.3}" y="{:.3}" font-size="{size}" font-family="monospace">{content}</text>"#,
            at.0, at.1
        )
        .unwrap();
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// Two stacked panels: log10 N versus log10(1/eps) with a slope-1 guide, and
/// the direct ratio plus windowed slope versus log10 eps.
pub fn loglog_curve_svg(curve: &BoxCountCurve, title: &str) -> String {
    let w = 560.0;
    let h = 640.0;
    let mut c = Canvas::new(w, h);
    c.text((MARGIN, 24.0), 14.0, title);

    let xs: Vec<f64> = curve.epsilons.iter().map(|e| (1.0 / e).log10()).collect();
    let ys: Vec<f64> = curve.counts.iter().map(|n| n.log10()).collect();
    let panel = |vals: &[f64]| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-9);
        (lo - 0.05 * span, hi + 0.05 * span)
    };

    // panel 1: counts
    let (x0, x1) = panel(&xs);
    let (y0, y1) = panel(&ys);
    let top = 40.0;
    let ph = 250.0;
    let map1 = |x: f64, y: f64| {
        (
            MARGIN + (x - x0) / (x1 - x0) * (w - 2.0 * MARGIN),
            top + ph - (y - y0) / (y1 - y0) * ph,
        )
    };
    c.line(map1(x0, y0), map1(x1, y0), "black", 1.0);
    c.line(map1(x0, y0), map1(x0, y1), "black", 1.0);
    let pts: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(&x, &y)| map1(x, y)).collect();
    c.polyline(&pts, "#d95f02", 1.5);
    for p in &pts {
        c.circle(*p, 2.0, "#d95f02");
    }
    // slope-1 reference through the finest-scale point
    let (xa, ya) = (xs[xs.len() - 1], ys[ys.len() - 1]);
    c.line(map1(x0, ya - (xa - x0)), map1(xa, ya), "#888888", 1.0);
    c.text((MARGIN, top + ph + 18.0), 11.0, "log10(1/eps)");
    c.text((8.0, top + 10.0), 11.0, "log10 N");

    // panel 2: direct ratio and slope against log10 eps
    let top2 = top + ph + 60.0;
    let exs: Vec<f64> = curve.epsilons.iter().map(|e| e.log10()).collect();
    let (ex0, ex1) = panel(&exs);
    let mut vals = curve.dbc.clone();
    vals.extend_from_slice(&curve.slope_dbc);
    let (v0, v1) = panel(&vals);
    let map2 = |x: f64, y: f64| {
        (
            MARGIN + (x - ex0) / (ex1 - ex0) * (w - 2.0 * MARGIN),
            top2 + ph - (y - v0) / (v1 - v0) * ph,
        )
    };
    c.line(map2(ex0, v0), map2(ex1, v0), "black", 1.0);
    c.line(map2(ex0, v0), map2(ex0, v1), "black", 1.0);
    if v0 < 1.0 && 1.0 < v1 {
        c.line(map2(ex0, 1.0), map2(ex1, 1.0), "#bbbbbb", 1.0);
    }
    let ratio: Vec<(f64, f64)> =
        exs.iter().zip(&curve.dbc).map(|(&x, &y)| map2(x, y)).collect();
    c.polyline(&ratio, "#1b9e77", 1.5);
    let slope: Vec<(f64, f64)> =
        exs.iter().zip(&curve.slope_dbc).map(|(&x, &y)| map2(x, y)).collect();
    c.polyline(&slope, "#7570b3", 1.5);
    c.text((MARGIN, top2 + ph + 18.0), 11.0, "log10 eps");
    c.text((8.0, top2 + 10.0), 11.0, "ratio (green), slope (violet)");
    c.finish()
}

/// Closure grid as a two-color heatmap with theta axes.
pub fn heatmap_svg(map: &CoverageMap, title: &str) -> String {
    let g = map.grid_size;
    let cell = (480.0 / g as f64).max(1.0);
    let side = cell * g as f64;
    let w = side + 2.0 * MARGIN;
    let h = side + 2.0 * MARGIN + 20.0;
    let mut c = Canvas::new(w, h);
    c.text((MARGIN, 24.0), 14.0, title);
    for i in 0..g {
        for j in 0..g {
            if map.at(i, j) {
                // theta_a on x, theta_b on y, origin bottom-left
                let x = MARGIN + i as f64 * cell;
                let y = MARGIN + 20.0 + side - (j + 1) as f64 * cell;
                c.rect(x, y, cell, cell, "#d95f02");
            }
        }
    }
    c.line(
        (MARGIN, MARGIN + 20.0 + side),
        (MARGIN + side, MARGIN + 20.0 + side),
        "black",
        1.0,
    );
    c.line((MARGIN, MARGIN + 20.0), (MARGIN, MARGIN + 20.0 + side), "black", 1.0);
    c.text((MARGIN + side / 2.0 - 30.0, MARGIN + 20.0 + side + 24.0), 11.0, "theta_A");
    c.text((4.0, MARGIN + 20.0 + side / 2.0), 11.0, "theta_B");
    c.text(
        (MARGIN, h - 6.0),
        11.0,
        &format!("coverage = {:.4}", map.coverage_fraction),
    );
    c.finish()
}

/// Linkage drawing: ground link, legs and platform at the neutral pose plus
/// any extra poses, the remote center marked, drifted centers dotted.
pub fn linkage_svg(design: &TrapezoidDesign, poses: &[PlatformPose], title: &str) -> String {
    let extent = design.ground_width.max(design.center_height + design.depth) * 1.3;
    let scale = 420.0 / extent;
    let w = 560.0;
    let h = 560.0;
    let cx = w / 2.0;
    let cy = 120.0;
    let map = |p: Vec2| (cx + p.x * scale, cy - p.y * scale);
    let mut c = Canvas::new(w, h);
    c.text((MARGIN, 24.0), 14.0, title);

    let [gl, gr] = design.ground_pivots;
    c.line(map(gl), map(gr), "#444444", 2.5);
    c.circle(map(gl), 4.0, "#444444");
    c.circle(map(gr), 4.0, "#444444");

    let mut all: Vec<PlatformPose> = Vec::with_capacity(poses.len() + 1);
    all.push(PlatformPose {
        psi: 0.0,
        midpoint: design.platform_midpoint(),
        left_pivot: design.platform_pivots[0],
        right_pivot: design.platform_pivots[1],
    });
    all.extend_from_slice(poses);
    for (k, pose) in all.iter().enumerate() {
        let color = if k == 0 { "#1b9e77" } else { "#7570b3" };
        let width = if k == 0 { 2.5 } else { 1.5 };
        c.line(map(gl), map(pose.left_pivot), color, width);
        c.line(map(gr), map(pose.right_pivot), color, width);
        c.line(map(pose.left_pivot), map(pose.right_pivot), color, width);
        c.circle(map(pose.left_pivot), 3.0, color);
        c.circle(map(pose.right_pivot), 3.0, color);
        if k > 0 {
            c.circle(map(carried_center(design, pose)), 2.5, "#e7298a");
        }
    }
    c.circle(map(design.remote_center()), 5.0, "#e7298a");
    c.text(
        (map(design.remote_center()).0 + 8.0, map(design.remote_center()).1 - 8.0),
        11.0,
        "O",
    );
    c.finish()
}
