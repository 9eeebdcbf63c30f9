//! Static SVG scatter plots and barcode diagrams.

use std::fmt::Write;

use rtd_core::{Barcode, PointCloud};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Maps `[lo, hi]` onto `[a, b]`; a degenerate range maps to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !title.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn axes(out: &mut String, x_range: (f64, f64), y_range: Option<(f64, f64)>) {
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/></g>"#
    );
    let mut ticks = String::new();
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = x_range.0 + t * (x_range.1 - x_range.0);
        let px = left + t * (right - left);
        let _ = write!(ticks, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 16.0, label(xv));
        if let Some((lo, hi)) = y_range {
            let yv = lo + t * (hi - lo);
            let py = bottom - t * (bottom - top);
            let _ = write!(ticks, r#"<text x="{:.2}" y="{py:.2}" text-anchor="end">{}</text>"#, left - 4.0, label(yv));
        }
    }
    let _ = writeln!(out, r#"<g class="ticks" font-family="sans-serif" font-size="10">{ticks}</g>"#);
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Scatter plot of the first two coordinates (a single coordinate is drawn
/// on a line). `labels` colour the points.
pub fn scatter_svg(cloud: &PointCloud, labels: Option<&[usize]>, title: &str) -> String {
    let pts = cloud.points();
    let xs: Vec<f64> = pts.column(0).to_vec();
    let ys: Vec<f64> = if cloud.dim() > 1 { pts.column(1).to_vec() } else { vec![0.0; xs.len()] };
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (xr, yr) = (range(&xs), range(&ys));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, xr, Some(yr));
    let _ = writeln!(out, r#"<g class="points" fill-opacity="0.8">"#);
    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        let px = scale(x, xr.0, xr.1, MARGIN + 6.0, WIDTH - MARGIN - 6.0);
        let py = scale(y, yr.0, yr.1, HEIGHT - MARGIN - 6.0, MARGIN + 6.0);
        let colour = PALETTE[labels.map_or(0, |l| l[i]) % PALETTE.len()];
        let _ = writeln!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="{colour}"/>"#);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Barcode diagram: one horizontal segment per bar, grouped by degree and
/// coloured by it. Infinite bars run to the right edge with a dashed end.
pub fn barcode_svg(barcode: &Barcode, title: &str) -> String {
    let finite_max = barcode
        .bars
        .iter()
        .flat_map(|b| [b.birth, b.death])
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let hi = if finite_max > 0.0 { finite_max * 1.1 } else { 1.0 };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, (0.0, hi), None);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let n = barcode.bars.len();
    let step = if n > 0 { (bottom - top - 10.0) / n as f64 } else { 0.0 };
    let _ = writeln!(out, r#"<g class="bars" stroke-width="{:.2}">"#, step.clamp(0.5, 6.0));
    // bars are sorted by degree, so each degree forms one block
    for (i, b) in barcode.bars.iter().enumerate() {
        let y = bottom - 5.0 - (i as f64 + 0.5) * step;
        let x1 = scale(b.birth, 0.0, hi, left, right);
        let colour = PALETTE[b.dim % PALETTE.len()];
        if b.death.is_finite() {
            let x2 = scale(b.death, 0.0, hi, left, right);
            let _ = writeln!(
                out,
                r#"<line class="bar" data-dim="{}" x1="{x1:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}" stroke="{colour}"/>"#,
                b.dim
            );
        } else {
            let _ = writeln!(
                out,
                r#"<line class="bar" data-dim="{}" x1="{x1:.2}" y1="{y:.2}" x2="{right:.2}" y2="{y:.2}" stroke="{colour}" stroke-dasharray="6 3"/>"#,
                b.dim
            );
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rtd_core::Bar;

    fn bar(dim: usize, birth: f64, death: f64) -> Bar {
        Bar { dim, birth, death, birth_simplex: 0, death_simplex: None }
    }

    #[test]
    fn empty_barcode_has_axes_only() {
        let svg = barcode_svg(&Barcode::default(), "");
        assert!(svg.contains(r#"class="axes""#));
        assert!(!svg.contains(r#"class="bar""#));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn every_bar_gets_its_own_row() {
        let bc = Barcode::new(vec![bar(0, 0.0, 1.0), bar(0, 0.0, f64::INFINITY), bar(1, 0.5, 0.7), bar(1, 0.6, 0.9)]);
        let svg = barcode_svg(&bc, "x");
        let ys: Vec<&str> = svg.lines().filter(|l| l.contains(r#"class="bar""#)).map(|l| l.split("y1=\"").nth(1).unwrap().split('"').next().unwrap()).collect();
        assert_eq!(ys.len(), 4);
        let mut distinct = ys.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn scatter_draws_each_point() {
        let c = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(scatter_svg(&c, None, "t").matches("<circle").count(), 3);
        let line = PointCloud::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(scatter_svg(&line, Some(&[0, 1]), "").matches("<circle").count(), 2);
    }

    #[test]
    fn titles_are_escaped() {
        assert!(scatter_svg(&PointCloud::from_rows(&[vec![0.0]]).unwrap(), None, "a<b").contains("a&lt;b"));
    }
}
