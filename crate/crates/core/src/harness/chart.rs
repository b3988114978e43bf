//! Tiny SVG chart writer: polylines, std bands, and color-ramped scatter.
//!
//! Just enough plotting to draw the comparison figures without any external
//! dependency: fixed canvas, linear axes with five ticks, a legend, and a
//! viridis-style ramp for scalar-colored scatter plots. Output is a plain
//! string, deterministic for identical input.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

/// One labeled polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    /// Any SVG color string, e.g. "#1f77b4".
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

/// A filled region between two curves sharing x-coordinates (mean ± std).
#[derive(Debug, Clone)]
pub struct Band {
    pub color: String,
    pub lo: Vec<(f64, f64)>,
    pub hi: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
}

/// Points colored by a scalar via the ramp; used for embedding snapshots.
#[derive(Debug, Clone, Default)]
pub struct ScatterChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Label for the color scale.
    pub value_label: String,
    /// (x, y, value) triples.
    pub points: Vec<(f64, f64, f64)>,
}

/// Compact tick label: plain decimal in a friendly range, scientific outside.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.2e}");
    }
    let mut s = format!("{v:.3}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

#[derive(Debug, Clone, Copy)]
struct AxisMap {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl AxisMap {
    fn from_bounds(mut x: (f64, f64), mut y: (f64, f64)) -> Self {
        // Guard degenerate extents so the projection stays finite.
        if x.0 == x.1 {
            x = (x.0 - 0.5, x.1 + 0.5);
        }
        if y.0 == y.1 {
            y = (y.0 - 0.5, y.1 + 0.5);
        }
        // 4% padding keeps extreme points off the frame.
        let xp = 0.04 * (x.1 - x.0);
        let yp = 0.04 * (y.1 - y.0);
        Self { x_min: x.0 - xp, x_max: x.1 + xp, y_min: y.0 - yp, y_max: y.1 + yp }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        // SVG y grows downward.
        HEIGHT - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

fn draw_frame(out: &mut String, map: &AxisMap, title: &str, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        out,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#444444\"/>",
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = map.x_min + t * (map.x_max - map.x_min);
        let yv = map.y_min + t * (map.y_max - map.y_min);
        let px = map.px(xv);
        let py = map.py(yv);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{}\" stroke=\"#444444\"/>",
            fmt_coord(px),
            fmt_coord(px),
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
             fill=\"#222222\">{}</text>",
            fmt_coord(px),
            y0 + 20.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{x0}\" y2=\"{}\" stroke=\"#444444\"/>",
            x0 - 5.0,
            fmt_coord(py),
            fmt_coord(py)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\" \
             fill=\"#222222\">{}</text>",
            x0 - 8.0,
            fmt_coord(py + 4.0),
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" \
         fill=\"#000000\">{}</text>",
        (x0 + x1) / 2.0,
        title
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" \
         fill=\"#222222\">{}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        x_label
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222222\" \
         transform=\"rotate(-90 18 {})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        y_label
    );
}

impl LineChart {
    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        let mut take = |p: &(f64, f64)| {
            x.0 = x.0.min(p.0);
            x.1 = x.1.max(p.0);
            y.0 = y.0.min(p.1);
            y.1 = y.1.max(p.1);
        };
        for s in &self.series {
            s.points.iter().for_each(&mut take);
        }
        for b in &self.bands {
            b.lo.iter().for_each(&mut take);
            b.hi.iter().for_each(&mut take);
        }
        if !x.0.is_finite() {
            // No data at all: draw an empty unit frame.
            return ((0.0, 1.0), (0.0, 1.0));
        }
        (x, y)
    }

    pub fn render(&self) -> String {
        let (xb, yb) = self.bounds();
        let map = AxisMap::from_bounds(xb, yb);
        let mut out = String::new();
        svg_open(&mut out);
        draw_frame(&mut out, &map, &self.title, &self.x_label, &self.y_label);

        for band in &self.bands {
            if band.lo.is_empty() {
                continue;
            }
            let mut pts = String::new();
            for p in &band.lo {
                let _ = write!(pts, "{},{} ", fmt_coord(map.px(p.0)), fmt_coord(map.py(p.1)));
            }
            for p in band.hi.iter().rev() {
                let _ = write!(pts, "{},{} ", fmt_coord(map.px(p.0)), fmt_coord(map.py(p.1)));
            }
            let _ = writeln!(
                out,
                "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>",
                pts.trim_end(),
                band.color
            );
        }

        for series in &self.series {
            if series.points.is_empty() {
                continue;
            }
            let mut pts = String::new();
            for p in &series.points {
                let _ = write!(pts, "{},{} ", fmt_coord(map.px(p.0)), fmt_coord(map.py(p.1)));
            }
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"/>",
                pts.trim_end(),
                series.color
            );
        }

        // Legend in the top-left of the plot area.
        for (i, series) in self.series.iter().enumerate() {
            let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" \
                 stroke-width=\"3\"/>",
                MARGIN_L + 10.0,
                MARGIN_L + 34.0,
                series.color
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#222222\">{}</text>",
                MARGIN_L + 40.0,
                ly + 4.0,
                series.label
            );
        }

        out.push_str("</svg>\n");
        out
    }
}

/// Five-anchor viridis-style ramp; `t` in [0,1].
pub fn ramp_color(t: f64) -> String {
    const ANCHORS: [[f64; 3]; 5] = [
        [68.0, 1.0, 84.0],
        [59.0, 82.0, 139.0],
        [33.0, 145.0, 140.0],
        [94.0, 201.0, 98.0],
        [253.0, 231.0, 37.0],
    ];
    let t = t.clamp(0.0, 1.0);
    let scaled = t * (ANCHORS.len() - 1) as f64;
    let i = (scaled.floor() as usize).min(ANCHORS.len() - 2);
    let f = scaled - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(ANCHORS[i][0], ANCHORS[i + 1][0]),
        mix(ANCHORS[i][1], ANCHORS[i + 1][1]),
        mix(ANCHORS[i][2], ANCHORS[i + 1][2]),
    )
}

impl ScatterChart {
    pub fn render(&self) -> String {
        let mut xb = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yb = (f64::INFINITY, f64::NEG_INFINITY);
        let mut vb = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y, v) in &self.points {
            xb = (xb.0.min(x), xb.1.max(x));
            yb = (yb.0.min(y), yb.1.max(y));
            vb = (vb.0.min(v), vb.1.max(v));
        }
        if !xb.0.is_finite() {
            xb = (0.0, 1.0);
            yb = (0.0, 1.0);
            vb = (0.0, 1.0);
        }
        let map = AxisMap::from_bounds(xb, yb);
        let vspan = if vb.1 > vb.0 { vb.1 - vb.0 } else { 1.0 };

        let mut out = String::new();
        svg_open(&mut out);
        draw_frame(&mut out, &map, &self.title, &self.x_label, &self.y_label);
        for &(x, y, v) in &self.points {
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.8\"/>",
                fmt_coord(map.px(x)),
                fmt_coord(map.py(y)),
                ramp_color((v - vb.0) / vspan)
            );
        }

        // Color scale: a stack of ramp swatches with min/max labels.
        let bar_x = WIDTH - MARGIN_R + 4.0;
        let bar_top = MARGIN_T;
        let bar_h = HEIGHT - MARGIN_T - MARGIN_B;
        let n_sw = 24;
        for k in 0..n_sw {
            let t = 1.0 - (k as f64 + 0.5) / n_sw as f64;
            let _ = writeln!(
                out,
                "<rect x=\"{bar_x}\" y=\"{}\" width=\"10\" height=\"{}\" fill=\"{}\"/>",
                fmt_coord(bar_top + bar_h * k as f64 / n_sw as f64),
                fmt_coord(bar_h / n_sw as f64 + 0.5),
                ramp_color(t)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{bar_x}\" y=\"{}\" font-size=\"10\" fill=\"#222222\">{}</text>",
            bar_top - 6.0,
            fmt_tick(vb.1)
        );
        let _ = writeln!(
            out,
            "<text x=\"{bar_x}\" y=\"{}\" font-size=\"10\" fill=\"#222222\">{}</text>",
            bar_top + bar_h + 12.0,
            fmt_tick(vb.0)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#222222\" \
             text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{}</text>",
            bar_x - 2.0,
            bar_top + bar_h / 2.0,
            bar_x - 2.0,
            bar_top + bar_h / 2.0,
            self.value_label
        );
        out.push_str("</svg>\n");
        out
    }
}
