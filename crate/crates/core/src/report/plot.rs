//! Static SVG charts: accuracy curves with an interquartile band, mean-rank
//! panels and box plots.

use std::fmt::Write;

use super::stats::BoxStats;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" viewBox=\"0 0 {W} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

/// Linear map from data range to pixel range.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(d0: f64, d1: f64, p0: f64, p1: f64) -> Scale {
        let (d0, d1) = if (d1 - d0).abs() < 1e-12 { (d0 - 0.5, d1 + 0.5) } else { (d0, d1) };
        Scale { d0, d1, p0, p1 }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn axes(out: &mut String, x: Scale, y: Scale, xlabel: &str, ylabel: &str, yticks: &[f64]) {
    let (xa, xb, yb, ya) = (x.p0, x.p1, y.p0, y.p1);
    let _ = writeln!(out, "<line x1=\"{xa}\" y1=\"{yb}\" x2=\"{xb}\" y2=\"{yb}\" stroke=\"black\"/>");
    let _ = writeln!(out, "<line x1=\"{xa}\" y1=\"{yb}\" x2=\"{xa}\" y2=\"{ya}\" stroke=\"black\"/>");
    for &t in yticks {
        let py = y.at(t);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            xa - 6.0,
            py + 4.0,
            (t * 1000.0).round() / 1000.0
        );
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", (xa + xb) / 2.0, yb + 35.0, escape(xlabel));
    let _ = writeln!(
        out,
        "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{}</text>",
        (ya + yb) / 2.0,
        (ya + yb) / 2.0,
        escape(ylabel)
    );
}

fn legend(out: &mut String, labels: &[String]) {
    for (i, l) in labels.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 15.0;
        let _ = writeln!(out, "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>", y - 10.0, color(i));
        let _ = writeln!(out, "<text x=\"{}\" y=\"{y}\">{}</text>", x + 18.0, escape(l));
    }
}

/// Median accuracy per iteration with its interquartile band.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub label: String,
    pub median: Vec<f64>,
    pub q1: Vec<f64>,
    pub q3: Vec<f64>,
}

/// One polyline per series over a shaded band.
pub fn curve_plot(title: &str, series: &[CurveSeries]) -> String {
    let n = series.iter().map(|s| s.median.len()).max().unwrap_or(1).max(1);
    let vals = series.iter().flat_map(|s| s.q1.iter().chain(&s.q3).chain(&s.median));
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let x = Scale::new(1.0, n as f64, LEFT, W - RIGHT);
    let y = Scale::new(lo, hi, H - BOTTOM, TOP);
    let mut out = header(title, H);
    axes(&mut out, x, y, "iteration", "test accuracy", &[lo, (lo + hi) / 2.0, hi]);
    for (i, s) in series.iter().enumerate() {
        let pt = |k: usize, v: f64| format!("{:.2},{:.2}", x.at((k + 1) as f64), y.at(v));
        if !s.q1.is_empty() && s.q1.len() == s.q3.len() {
            let upper = s.q3.iter().enumerate().map(|(k, &v)| pt(k, v));
            let lower = s.q1.iter().enumerate().rev().map(|(k, &v)| pt(k, v));
            let poly: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\"/>", poly.join(" "), color(i));
        }
        let line: Vec<String> = s.median.iter().enumerate().map(|(k, &v)| pt(k, v)).collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"><title>{}</title></polyline>",
            line.join(" "),
            color(i),
            escape(&s.label)
        );
    }
    legend(&mut out, &series.iter().map(|s| s.label.clone()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// One panel per domain; algorithms placed on a shared rank axis.
pub fn rank_plot(title: &str, panels: &[(String, Vec<(String, f64)>)], n_algorithms: usize) -> String {
    let panel_h = 70.0;
    let height = TOP + 30.0 + panel_h * panels.len().max(1) as f64;
    let x = Scale::new(1.0, n_algorithms.max(2) as f64, LEFT + 60.0, W - 40.0);
    let mut out = header(title, height);
    for (p, (domain, ranks)) in panels.iter().enumerate() {
        let y0 = TOP + 20.0 + panel_h * p as f64;
        let axis_y = y0 + 30.0;
        let _ = writeln!(out, "<g class=\"panel\"><text x=\"10\" y=\"{}\">{}</text>", axis_y + 4.0, escape(domain));
        let _ = writeln!(out, "<line x1=\"{}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" stroke=\"black\"/>", x.p0, x.p1);
        for r in 1..=n_algorithms.max(2) {
            let px = x.at(r as f64);
            let _ = writeln!(out, "<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{r}</text>", axis_y + 14.0);
        }
        for (i, (alg, rank)) in ranks.iter().enumerate() {
            let px = x.at(*rank);
            let label_y = y0 + if i % 2 == 0 { 4.0 } else { 52.0 };
            let _ = writeln!(out, "<circle cx=\"{px:.1}\" cy=\"{axis_y}\" r=\"4\" fill=\"{}\"><title>{} {:.2}</title></circle>", color(i), escape(alg), rank);
            let _ = writeln!(out, "<text x=\"{px:.1}\" y=\"{label_y}\" text-anchor=\"middle\" font-size=\"10\" fill=\"{}\">{}</text>", color(i), escape(alg));
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// One box per group.
pub fn box_plot(title: &str, xlabel: &str, groups: &[(String, BoxStats)]) -> String {
    let vals = groups.iter().flat_map(|(_, b)| {
        [b.whisker_low, b.whisker_high].into_iter().chain(b.outliers.iter().copied())
    });
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let x = Scale::new(0.0, groups.len().max(1) as f64, LEFT, W - 40.0);
    let y = Scale::new(lo, hi, H - BOTTOM, TOP);
    let mut out = header(title, H);
    axes(&mut out, x, y, xlabel, "median AUC", &[lo, (lo + hi) / 2.0, hi]);
    let slot = (x.p1 - x.p0) / groups.len().max(1) as f64;
    for (i, (label, b)) in groups.iter().enumerate() {
        let cx = x.p0 + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let _ = writeln!(out, "<g class=\"box\">");
        let _ = writeln!(out, "<line x1=\"{cx:.1}\" y1=\"{:.2}\" x2=\"{cx:.1}\" y2=\"{:.2}\" stroke=\"black\"/>", y.at(b.whisker_low), y.at(b.whisker_high));
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.2}\" width=\"{:.1}\" height=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.4\" stroke=\"black\"/>",
            cx - half,
            y.at(b.q3),
            2.0 * half,
            (y.at(b.q1) - y.at(b.q3)).max(0.5),
            color(0)
        );
        let _ = writeln!(out, "<line x1=\"{:.1}\" y1=\"{:.2}\" x2=\"{:.1}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"2\"/>", cx - half, y.at(b.median), cx + half, y.at(b.median));
        for &o in &b.outliers {
            let _ = writeln!(out, "<circle cx=\"{cx:.1}\" cy=\"{:.2}\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>", y.at(o));
        }
        let _ = writeln!(out, "<text x=\"{cx:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>", H - BOTTOM + 16.0, escape(label));
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
