//! Minimal self-contained SVG line and scatter plots. Numbers are printed
//! with fixed precision so identical input gives identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 240.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

pub struct Point {
    pub x: f64,
    pub y: f64,
    pub group: String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Maps data coordinates into one panel.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    top: f64,
    height: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r) = (MARGIN, W - MARGIN);
        let (t, b) = (self.top, self.top + self.height);
        writeln!(
            out,
            r##"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888"/>"##,
            r - l,
            b - t
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{l:.1}" y="{:.1}" font-size="10">{:.4}</text><text x="{r:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.4}</text>"#,
            b + 12.0,
            self.x.0,
            b + 12.0,
            self.x.1
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.4}</text><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.4}</text>"#,
            l - 4.0,
            b,
            self.y.0,
            l - 4.0,
            t + 10.0,
            self.y.1
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            W / 2.0,
            b + 24.0,
            escape(x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="12" y="{:.1}" font-size="11" transform="rotate(-90 12 {:.1})" text-anchor="middle">{}</text>"#,
            t + self.height / 2.0,
            t + self.height / 2.0,
            escape(y_label)
        )
        .unwrap();
    }
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], colour: &str) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
        pts.join(" ")
    )
    .unwrap();
}

fn open(out: &mut String, height: f64, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0}" height="{height:.0}" viewBox="0 0 {W:.0} {height:.0}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="20" font-size="13" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();
}

/// Raw spectrum (top panel) above its processed version (bottom panel) on
/// a shared wavelength axis.
pub fn spectrum_pair(id: &str, wavelengths: &[f64], raw: &[f64], processed: &[f64], chain: &str) -> String {
    let total = 2.0 * H + 3.0 * MARGIN;
    let mut s = String::new();
    open(&mut s, total, id);
    let x = range(wavelengths.iter().copied());
    let top = Frame {
        x,
        y: range(raw.iter().copied()),
        top: MARGIN,
        height: H,
    };
    top.axes(&mut s, "wavelength", "raw");
    polyline(&mut s, &top, wavelengths, raw, PALETTE[0]);
    let bottom = Frame {
        x,
        y: range(processed.iter().copied()),
        top: 2.0 * MARGIN + H,
        height: H,
    };
    bottom.axes(&mut s, "wavelength", chain);
    polyline(&mut s, &bottom, wavelengths, processed, PALETTE[1]);
    s.push_str("</svg>\n");
    s
}

/// First two feature dimensions, one colour per group with a legend.
pub fn scatter(points: &[Point], x_label: &str, y_label: &str, title: &str) -> String {
    let height = 2.0 * H + 2.0 * MARGIN;
    let f = Frame {
        x: range(points.iter().map(|p| p.x)),
        y: range(points.iter().map(|p| p.y)),
        top: MARGIN,
        height: 2.0 * H - MARGIN,
    };
    let groups: BTreeMap<&str, &str> = {
        let mut names: Vec<&str> = points.iter().map(|p| p.group.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
            .into_iter()
            .enumerate()
            .map(|(i, g)| (g, PALETTE[i % PALETTE.len()]))
            .collect()
    };
    let mut s = String::new();
    open(&mut s, height, title);
    f.axes(&mut s, x_label, y_label);
    for p in points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.8"/>"#,
            f.px(p.x),
            f.py(p.y),
            groups[p.group.as_str()]
        )
        .unwrap();
    }
    for (i, (g, c)) in groups.iter().enumerate() {
        let y = MARGIN + 12.0 + 14.0 * i as f64;
        writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{c}"/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#,
            W - MARGIN - 80.0,
            y - 3.0,
            W - MARGIN - 72.0,
            y,
            escape(g)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
