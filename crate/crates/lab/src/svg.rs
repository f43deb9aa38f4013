//! Hand-written SVG: framed panels, polylines, markers and class maps.

use std::fmt::Write;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// A plotting rectangle in pixels and the data ranges it maps.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub xr: (f64, f64),
    pub yr: (f64, f64),
}

impl Panel {
    pub fn px(&self, v: f64) -> f64 {
        self.x + (v - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    pub fn py(&self, v: f64) -> f64 {
        self.y + self.h - (v - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }
}

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut body = String::new();
        writeln!(body, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
        Self { width, height, body }
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let s = s.replace('&', "&amp;").replace('<', "&lt;");
        writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="{size}" text-anchor="{anchor}" font-family="sans-serif">{s}</text>"#
        )
        .unwrap();
    }

    /// Border and title only.
    pub fn border(&mut self, p: &Panel, title: &str) {
        writeln!(
            self.body,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            p.x, p.y, p.w, p.h
        )
        .unwrap();
        self.text(p.x + p.w / 2.0, p.y - 6.0, 12.0, "middle", title);
    }

    /// Border, range labels at the corners, title above.
    pub fn frame(&mut self, p: &Panel, title: &str, xlabel: &str, ylabel: &str) {
        self.border(p, title);
        self.text(p.x, p.y + p.h + 13.0, 9.0, "start", &short(p.xr.0));
        self.text(p.x + p.w, p.y + p.h + 13.0, 9.0, "end", &short(p.xr.1));
        self.text(p.x - 3.0, p.y + p.h, 9.0, "end", &short(p.yr.0));
        self.text(p.x - 3.0, p.y + 9.0, 9.0, "end", &short(p.yr.1));
        if !xlabel.is_empty() {
            self.text(p.x + p.w / 2.0, p.y + p.h + 24.0, 10.0, "middle", xlabel);
        }
        if !ylabel.is_empty() {
            let (cx, cy) = (p.x - 30.0, p.y + p.h / 2.0);
            writeln!(
                self.body,
                r#"<text x="{cx:.1}" y="{cy:.1}" font-size="10" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 {cx:.1} {cy:.1})">{ylabel}</text>"#
            )
            .unwrap();
        }
    }

    pub fn polyline(&mut self, p: &Panel, pts: &[(f64, f64)], color: &str, dashed: bool) {
        let mut d = String::new();
        for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            write!(d, "{:.2},{:.2} ", p.px(x), p.py(y)).unwrap();
        }
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
            d.trim_end()
        )
        .unwrap();
    }

    pub fn marker(&mut self, p: &Panel, x: f64, y: f64, r: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map_or(String::new(), |s| format!(r#" stroke="{s}" stroke-width="1.2""#));
        writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"{stroke}/>"#,
            p.px(x),
            p.py(y)
        )
        .unwrap();
    }

    /// Two-colour class map, row 0 at the top, run-length encoded per row.
    pub fn class_map(&mut self, p: &Panel, width: usize, height: usize, cells: &[u8], colors: [&str; 2]) {
        let cw = p.w / width as f64;
        let ch = p.h / height as f64;
        for r in 0..height {
            let row = &cells[r * width..(r + 1) * width];
            let mut c = 0;
            while c < width {
                let v = row[c];
                let start = c;
                while c < width && row[c] == v {
                    c += 1;
                }
                writeln!(
                    self.body,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    p.x + start as f64 * cw,
                    p.y + r as f64 * ch,
                    (c - start) as f64 * cw + 0.05,
                    ch + 0.05,
                    colors[usize::from(v.min(1))]
                )
                .unwrap();
            }
        }
    }

    pub fn legend(&mut self, x: f64, y: f64, entries: &[(String, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let yy = y + i as f64 * 14.0;
            writeln!(
                self.body,
                r#"<line x1="{x:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="{color}" stroke-width="2"/>"#,
                x + 16.0
            )
            .unwrap();
            self.text(x + 20.0, yy + 4.0, 10.0, "start", label);
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Data range with a little headroom; degenerate ranges are widened.
pub fn range_of(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}
