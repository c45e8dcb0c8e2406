//! Static SVG figures: persistence step curves and the runtime plot.

use std::fmt::Write;

use topofc_core::{barycenter, variance_profile, BenchRow, GraphPersistence, Result};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 280.0;
const MARGIN: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Panel {
    x0: f64,
    y0: f64,
    y_max: f64,
}

impl Panel {
    fn px(&self, t: f64) -> f64 {
        self.x0 + t * PANEL_W
    }

    fn py(&self, v: f64) -> f64 {
        self.y0 + PANEL_H - (v / self.y_max) * PANEL_H
    }

    /// Step curve through sorted values, each occupying an equal share of
    /// the normalized rank axis.
    fn step_points(&self, values: &[f64]) -> Vec<(f64, f64)> {
        let n = values.len() as f64;
        let mut pts = Vec::with_capacity(2 * values.len());
        for (l, &v) in values.iter().enumerate() {
            pts.push((self.px(l as f64 / n), self.py(v)));
            pts.push((self.px((l + 1) as f64 / n), self.py(v)));
        }
        pts
    }

    fn frame(&self, out: &mut String, title: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{PANEL_W:.2}" height="{PANEL_H:.2}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
            self.x0 + PANEL_W / 2.0,
            self.y0 - 10.0,
            escape(title)
        );
        for i in 0..=4 {
            let v = self.y_max * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{v:.2}</text>"#,
                self.x0 - 5.0,
                self.py(v) + 3.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">normalized rank</text>"#,
            self.x0 + PANEL_W / 2.0,
            self.y0 + PANEL_H + 20.0
        );
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, width: f64) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
        coords.join(" ")
    );
}

fn polygon(out: &mut String, pts: &[(f64, f64)], color: &str) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#,
        coords.join(" ")
    );
}

/// Births and deaths of each summary as step curves. With `band` and more
/// than one input, draws the barycenter with a one-standard-deviation band.
pub fn persistence_svg(items: &[(String, GraphPersistence)], band: bool) -> Result<String> {
    let y_max = items
        .iter()
        .flat_map(|(_, p)| p.births().iter().chain(p.deaths()))
        .fold(1.0f64, |m, &v| m.max(v));
    let panels = [
        Panel { x0: MARGIN, y0: MARGIN, y_max },
        Panel { x0: 2.0 * MARGIN + PANEL_W, y0: MARGIN, y_max },
    ];
    let width = 3.0 * MARGIN + 2.0 * PANEL_W;
    let height = 2.0 * MARGIN + PANEL_H + 30.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panels[0].frame(&mut out, "births (connected components)");
    panels[1].frame(&mut out, "deaths (cycles)");

    if band && items.len() > 1 {
        let summaries: Vec<GraphPersistence> = items.iter().map(|(_, p)| p.clone()).collect();
        let bary = barycenter(&summaries)?;
        let (var_b, var_d) = variance_profile(&summaries)?;
        for (panel, mean, var) in [
            (&panels[0], &bary.mean_births, &var_b),
            (&panels[1], &bary.mean_deaths, &var_d),
        ] {
            if mean.is_empty() {
                continue;
            }
            let upper: Vec<f64> = mean.iter().zip(var.iter()).map(|(m, v)| m + v.sqrt()).collect();
            let lower: Vec<f64> = mean.iter().zip(var.iter()).map(|(m, v)| m - v.sqrt()).collect();
            let mut shape = panel.step_points(&upper);
            shape.extend(panel.step_points(&lower).into_iter().rev());
            polygon(&mut out, &shape, PALETTE[0]);
            polyline(&mut out, &panel.step_points(mean), PALETTE[0], 3.0);
        }
    } else {
        for (i, (_, p)) in items.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            for (panel, values) in [(&panels[0], p.births()), (&panels[1], p.deaths())] {
                if !values.is_empty() {
                    polyline(&mut out, &panel.step_points(values), color, 1.5);
                }
            }
        }
    }

    for (i, (name, _)) in items.iter().enumerate().take(12) {
        let color = if band && items.len() > 1 { PALETTE[0] } else { PALETTE[i % PALETTE.len()] };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 + 12.0 * i as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Mean runtime against edge count on log-log axes.
pub fn bench_svg(rows: &[BenchRow]) -> String {
    let width = 2.0 * MARGIN + PANEL_W;
    let height = 2.0 * MARGIN + PANEL_H;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN:.2}" y="{MARGIN:.2}" width="{PANEL_W:.2}" height="{PANEL_H:.2}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">runtime vs edges (log-log)</text>"#,
        MARGIN + PANEL_W / 2.0,
        MARGIN - 10.0
    );
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n_edges > 0 && r.mean_s > 0.0)
        .map(|r| ((r.n_edges as f64).log10(), r.mean_s.log10()))
        .collect();
    if !pts.is_empty() {
        let (x_lo, x_hi) = span(pts.iter().map(|p| p.0));
        let (y_lo, y_hi) = span(pts.iter().map(|p| p.1));
        let map = |(x, y): (f64, f64)| {
            (
                MARGIN + (x - x_lo) / (x_hi - x_lo) * PANEL_W,
                MARGIN + PANEL_H - (y - y_lo) / (y_hi - y_lo) * PANEL_H,
            )
        };
        let screen: Vec<(f64, f64)> = pts.iter().copied().map(map).collect();
        polyline(&mut out, &screen, PALETTE[1], 2.0);
        for ((sx, sy), r) in screen.iter().zip(rows) {
            let _ = writeln!(out, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="3" fill="{}"/>"#, PALETTE[1]);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="10">{} nodes, {:.3e} s</text>"#,
                sx + 5.0,
                sy - 5.0,
                r.m,
                r.mean_s
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
