//! Minimal static SVG plots: a log-log scatter with a fitted line, and a
//! regime strip chart.

use std::fmt::Write;

use nstrans::regime::RegimeLabel;
use nstrans::scaling::FitResult;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

fn header(out: &mut String, timestamp: Option<&str>) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    if let Some(ts) = timestamp {
        writeln!(out, "<!-- generated {ts} -->").unwrap();
    }
    writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
}

struct LogAxis {
    lo: f64,
    hi: f64,
    px0: f64,
    px1: f64,
}

impl LogAxis {
    fn new(values: impl Iterator<Item = f64>, px0: f64, px1: f64) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let l = v.log10();
            (lo.min(l), hi.max(l))
        });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        // pad to whole decades, at least one decade wide
        lo = lo.floor();
        hi = hi.ceil().max(lo + 1.0);
        Self { lo, hi, px0, px1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.px0 + (v.log10() - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)
    }

    fn decades(&self) -> impl Iterator<Item = i32> {
        (self.lo as i32)..=(self.hi as i32)
    }
}

/// Log-log scatter of `(x, y)` with an optional fitted power law.
pub fn loglog_scatter(
    points: &[(f64, f64)],
    fit: Option<&FitResult>,
    x_label: &str,
    y_label: &str,
    timestamp: Option<&str>,
) -> String {
    let (ml, mr, mt, mb) = MARGIN;
    let xa = LogAxis::new(points.iter().map(|p| p.0), ml, W - mr);
    let ya = LogAxis::new(points.iter().map(|p| p.1), H - mb, mt);
    let mut s = String::new();
    header(&mut s, timestamp);
    writeln!(
        s,
        "<clipPath id=\"frame\"><rect x=\"{ml}\" y=\"{mt}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath>",
        W - ml - mr,
        H - mt - mb
    )
    .unwrap();

    writeln!(s, "<g stroke=\"#ccc\">").unwrap();
    for d in xa.decades() {
        let x = xa.map(10f64.powi(d));
        writeln!(s, "<line x1=\"{x:.2}\" y1=\"{mt}\" x2=\"{x:.2}\" y2=\"{:.2}\"/>", H - mb).unwrap();
    }
    for d in ya.decades() {
        let y = ya.map(10f64.powi(d));
        writeln!(s, "<line x1=\"{ml}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\"/>", W - mr).unwrap();
    }
    s.push_str("</g>\n");
    for d in xa.decades() {
        let x = xa.map(10f64.powi(d));
        writeln!(s, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">1e{d}</text>", H - mb + 16.0).unwrap();
    }
    for d in ya.decades() {
        let y = ya.map(10f64.powi(d));
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>", ml - 6.0, y + 4.0).unwrap();
    }
    writeln!(
        s,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        W - ml - mr,
        H - mt - mb
    )
    .unwrap();
    writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>", (ml + W - mr) / 2.0, H - 12.0).unwrap();
    writeln!(
        s,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>",
        (mt + H - mb) / 2.0,
        (mt + H - mb) / 2.0
    )
    .unwrap();

    if let Some(f) = fit {
        let (x0, x1) = (10f64.powf(xa.lo), 10f64.powf(xa.hi));
        let y = |x: f64| f.prefactor_k1 * x.powf(f.exponent);
        writeln!(
            s,
            "<line class=\"fit\" clip-path=\"url(#frame)\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c33\" stroke-width=\"1.5\"/>",
            xa.map(x0),
            ya.map(y(x0)),
            xa.map(x1),
            ya.map(y(x1))
        )
        .unwrap();
        writeln!(
            s,
            "<text class=\"slope\" x=\"{:.2}\" y=\"{:.2}\" fill=\"#c33\">slope = {:.2}, R² = {:.4}</text>",
            ml + 10.0,
            mt + 18.0,
            f.exponent,
            f.r_squared
        )
        .unwrap();
    }
    for &(x, y) in points {
        writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#236\"/>", xa.map(x), ya.map(y)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn label_colour(l: RegimeLabel) -> &'static str {
    match l {
        RegimeLabel::Laminar => "#9ecae1",
        RegimeLabel::CriticalEquilibrium => "#a1d99b",
        RegimeLabel::SingularityOnset => "#fdae6b",
        RegimeLabel::TransitionInstant => "#fb6a4a",
        RegimeLabel::FullyTurbulent => "#9e9ac8",
    }
}

/// Regime bands over time with the singularity indicator drawn on top.
pub fn regime_strip(
    times: &[f64],
    labels: &[RegimeLabel],
    indicator: &[Option<f64>],
    timestamp: Option<&str>,
) -> String {
    let (ml, mr, mt, mb) = MARGIN;
    let mut s = String::new();
    header(&mut s, timestamp);
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let px = |t: f64| ml + (t - t0) / (t1 - t0) * (W - ml - mr);
    let band_top = mt;
    let band_h = H - mt - mb;
    let py = |v: f64| band_top + (1.0 - v) * band_h;

    // each snapshot owns the interval up to the midpoint with its neighbours
    for (k, (&t, &l)) in times.iter().zip(labels).enumerate() {
        let left = if k == 0 { t0 } else { 0.5 * (times[k - 1] + t) };
        let right = if k + 1 == times.len() { t1 } else { 0.5 * (t + times[k + 1]) };
        let width = (px(right) - px(left)).max(1.0);
        writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{band_top}\" width=\"{width:.2}\" height=\"{band_h}\" fill=\"{}\"><title>{l}</title></rect>",
            px(left),
            label_colour(l)
        )
        .unwrap();
    }
    let pts: Vec<String> = times
        .iter()
        .zip(indicator)
        .filter_map(|(&t, i)| i.map(|i| format!("{:.2},{:.2}", px(t), py(i))))
        .collect();
    if !pts.is_empty() {
        writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>", pts.join(" ")).unwrap();
    }
    writeln!(
        s,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{:.2}\" height=\"{band_h}\" fill=\"none\" stroke=\"black\"/>",
        W - ml - mr
    )
    .unwrap();
    for v in [0.0, 0.5, 1.0] {
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.1}</text>", ml - 6.0, py(v) + 4.0).unwrap();
    }
    writeln!(s, "<text x=\"{ml}\" y=\"{:.2}\">t = {t0:.3}</text>", H - mb + 16.0).unwrap();
    writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">t = {t1:.3}</text>", W - mr, H - mb + 16.0).unwrap();
    // legend
    for (i, l) in RegimeLabel::ALL.iter().enumerate() {
        let x = ml + i as f64 * 110.0;
        writeln!(s, "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\"/>", H - 22.0, label_colour(*l)).unwrap();
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{l}</text>", x + 14.0, H - 13.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
