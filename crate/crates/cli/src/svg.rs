//! Self-contained SVG histogram with normal density overlays.

use std::f64::consts::PI;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const RANGE: f64 = 4.0;
const BINS: usize = 64;

pub struct Curve<'a> {
    pub label: &'a str,
    pub sd: f64,
    pub color: &'a str,
}

fn normal_pdf(x: f64, sd: f64) -> f64 {
    (-0.5 * (x / sd).powi(2)).exp() / (sd * (2.0 * PI).sqrt())
}

/// Density histogram of `z` on `[-4, 4]`.
pub fn histogram_svg(z: &[f64], title: &str, curves: &[Curve<'_>]) -> String {
    let width = 2.0 * RANGE / BINS as f64;
    let mut counts = [0usize; BINS];
    for &x in z {
        if x >= -RANGE && x < RANGE {
            counts[((x + RANGE) / width) as usize] += 1;
        }
    }
    let n = z.len().max(1) as f64;
    let dens: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let peak = curves
        .iter()
        .map(|c| normal_pdf(0.0, c.sd))
        .chain(dens.iter().copied())
        .fold(0.0, f64::max)
        * 1.1;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x + RANGE) / (2.0 * RANGE) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - y / peak * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    for (i, &d) in dens.iter().enumerate() {
        let x0 = px(-RANGE + i as f64 * width);
        let y0 = py(d);
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>"##,
            plot_w / BINS as f64,
            HEIGHT - MARGIN - y0
        );
    }
    for (k, c) in curves.iter().enumerate() {
        let pts: Vec<String> = (0..=200)
            .map(|i| {
                let x = -RANGE + 2.0 * RANGE * i as f64 / 200.0;
                format!("{:.2},{:.2}", px(x), py(normal_pdf(x, c.sd)))
            })
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, c.color, pts.join(" "));
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{2}" stroke-width="1.5"/><text x="{3}" y="{4}">{5}</text>"#,
            WIDTH - 200.0,
            WIDTH - 180.0,
            c.color,
            WIDTH - 174.0,
            ly + 4.0,
            escape(c.label)
        );
    }
    let base = HEIGHT - MARGIN;
    let _ = writeln!(s, r#"<line x1="{MARGIN}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#, WIDTH - MARGIN);
    for tick in -4..=4 {
        let x = px(tick as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{tick}</text>"#,
            base + 4.0,
            base + 18.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let z: Vec<f64> = (0..1000).map(|i| (i as f64 / 1000.0 - 0.5) * 6.0).collect();
        let svg = histogram_svg(&z, "a < b", &[Curve { label: "N(0,1)", sd: 1.0, color: "red" }]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("href"));
    }
}
