//! Minimal SVG charts: line plots with optional logarithmic axes and
//! lattice scatter plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::LabResult;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: &str, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LinePlot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn map(&self, p: (f64, f64)) -> Option<(f64, f64)> {
        let x = if self.log_x { p.0.log10() } else { p.0 };
        let y = if self.log_y { p.1.log10() } else { p.1 };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.iter().filter_map(|p| self.map(*p))).collect();
        let (mut x0, mut x1, mut y0, mut y1) = bounds(&pts);
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        let (l, r, t, b) = MARGIN;
        let sx = |x: f64| l + (x - x0) / (x1 - x0) * (W - l - r);
        let sy = |y: f64| H - b - (y - y0) / (y1 - y0) * (H - t - b);

        let mut out = header();
        let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(
            out,
            r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            W - l - r,
            H - t - b
        );
        for v in ticks(x0, x1) {
            let x = sx(v);
            let _ = writeln!(out, r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="#ddd"/>"##, t, H - b);
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                H - b + 15.0,
                label(v, self.log_x)
            );
        }
        for v in ticks(y0, y1) {
            let y = sy(v);
            let _ = writeln!(out, r##"<line x1="{l}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, W - r);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
                l - 5.0,
                y + 4.0,
                label(v, self.log_y)
            );
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, W / 2.0, H - 10.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter_map(|p| self.map(*p))
                .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#,
                path.join(" ")
            );
            let ly = t + 15.0 + 15.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/><text x="{}" y="{}" font-size="11">{}</text>"#,
                W - r - 150.0,
                W - r - 130.0,
                W - r - 125.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn write(&self, path: &Path) -> LabResult<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

/// Lattice points coloured by group, e.g. cluster labels.
pub fn scatter(title: &str, points: &[(f64, f64, usize)]) -> String {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = bounds(&xy);
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let (l, r, t, b) = MARGIN;
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * (W - l - r);
    let sy = |y: f64| H - b - (y - y0) / (y1 - y0) * (H - t - b);
    let mut out = header();
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    for &(x, y, g) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="2" fill="{}"/>"#,
            sx(x),
            sy(y),
            PALETTE[g % PALETTE.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn bounds(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    if pts.is_empty() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    pts.iter().fold((f64::MAX, f64::MIN, f64::MAX, f64::MIN), |(a, b, c, d), p| {
        (a.min(p.0), b.max(p.0), c.min(p.1), d.max(p.1))
    })
}

fn pad(lo: &mut f64, hi: &mut f64) {
    if *hi - *lo < 1e-12 * (1.0 + lo.abs()) {
        *lo -= 0.5;
        *hi += 0.5;
    } else {
        let d = 0.05 * (*hi - *lo);
        *lo -= d;
        *hi += d;
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + 1e-12 * step && out.len() < 20 {
        out.push(v);
        v += step;
    }
    out
}

fn label(v: f64, log: bool) -> String {
    if log {
        let p = 10f64.powf(v);
        if v.fract().abs() < 1e-9 {
            format!("1e{}", v.round() as i64)
        } else {
            format!("{p:.2e}")
        }
    } else if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 1e6).round() / 1e6)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
