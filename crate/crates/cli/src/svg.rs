//! Minimal SVG writers for the score bar chart and the density plots.

use std::fmt::Write;

use physcue::dataset::Label;
use physcue::{FeatureClass, FeatureMetrics, Thresholds};

use crate::histogram::HistogramSpec;

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn class_color(c: FeatureClass) -> &'static str {
    match c {
        FeatureClass::CoreFeature => "#2ca02c",
        FeatureClass::UsableFeature => "#ff7f0e",
        FeatureClass::UnstableHighDiscrim => "#d62728",
        FeatureClass::UnusableFeature => "#7f7f7f",
    }
}

fn label_color(l: Label) -> &'static str {
    match l {
        Label::Real => "#1f77b4",
        Label::Fake => "#d62728",
    }
}

struct Doc {
    buf: String,
}

impl Doc {
    fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        let _ = write!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
             viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        Self { buf }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(self.buf, "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>");
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(self.buf, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" {style}/>");
    }

    fn text(&mut self, x: f64, y: f64, attrs: &str, s: &str) {
        let _ = writeln!(self.buf, "<text x=\"{x:.2}\" y=\"{y:.2}\" {attrs}>{}</text>", escape(s));
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.buf,
            "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

const AXIS: &str = "stroke=\"black\" stroke-width=\"1\"";
const DASHED: &str = "stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"4 3\"";

/// Two panels of horizontal bars: stability on the left, discriminability on
/// the right, coloured by class, with the core thresholds dashed.
pub fn score_chart(metrics: &[FeatureMetrics], t: &Thresholds) -> String {
    let (label_w, panel_w, bar_h, top) = (170.0, 260.0, 18.0, 40.0);
    let height = top + bar_h * metrics.len() as f64 + 70.0;
    let width = 2.0 * (label_w + panel_w) + 40.0;
    let mut doc = Doc::new(width, height);
    let panels = [("Stability (Ss)", t.core_ss, 0usize), ("Discriminability (Sd)", t.core_sd, 1)];
    for (title, threshold, p) in panels {
        let x0 = 10.0 + p as f64 * (label_w + panel_w + 20.0) + label_w;
        doc.text(x0, 20.0, "font-size=\"13\"", title);
        for (i, m) in metrics.iter().enumerate() {
            let y = top + i as f64 * bar_h;
            let score = if p == 0 { m.stability } else { m.discriminability };
            doc.text(x0 - 6.0, y + bar_h * 0.7, "text-anchor=\"end\"", &m.feature);
            doc.rect(x0, y + 2.0, panel_w * score.clamp(0.0, 1.0), bar_h - 4.0, class_color(m.class));
        }
        let bottom = top + bar_h * metrics.len() as f64;
        doc.line(x0, top, x0, bottom, AXIS);
        doc.line(x0, bottom, x0 + panel_w, bottom, AXIS);
        for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let x = x0 + panel_w * tick;
            doc.line(x, bottom, x, bottom + 4.0, AXIS);
            doc.text(x, bottom + 16.0, "text-anchor=\"middle\"", &format!("{tick:.2}"));
        }
        let tx = x0 + panel_w * threshold;
        doc.line(tx, top, tx, bottom, DASHED);
    }
    let legend_y = height - 18.0;
    for (i, c) in FeatureClass::ALL.into_iter().enumerate() {
        let x = 10.0 + i as f64 * 190.0;
        doc.rect(x, legend_y - 10.0, 12.0, 12.0, class_color(c));
        doc.text(x + 18.0, legend_y, "", c.as_str());
    }
    doc.finish()
}

/// One panel per dataset with the real (blue) and fake (red) densities as
/// step outlines. `specs` holds real/fake pairs in dataset order.
pub fn density_chart(feature: &str, specs: &[HistogramSpec]) -> String {
    let (panel_w, panel_h, margin) = (320.0, 200.0, 45.0);
    let pairs: Vec<&[HistogramSpec]> = specs.chunks(2).collect();
    let width = margin + pairs.len() as f64 * (panel_w + margin);
    let height = panel_h + 2.0 * margin + 20.0;
    let mut doc = Doc::new(width.max(300.0), height);
    doc.text(margin, 18.0, "font-size=\"13\"", feature);
    for (p, pair) in pairs.iter().enumerate() {
        let x0 = margin + p as f64 * (panel_w + margin);
        let y0 = margin;
        let edges = &pair[0].bin_edges;
        let (lo, hi) = (edges[0], edges[edges.len() - 1]);
        let dmax = pair.iter().flat_map(|s| &s.densities).copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let sx = |v: f64| x0 + (v - lo) / (hi - lo) * panel_w;
        let sy = |d: f64| y0 + panel_h - d / dmax * panel_h;
        for s in pair.iter() {
            let mut pts = vec![(sx(lo), sy(0.0))];
            for (d, e) in s.densities.iter().zip(s.bin_edges.windows(2)) {
                pts.push((sx(e[0]), sy(*d)));
                pts.push((sx(e[1]), sy(*d)));
            }
            pts.push((sx(hi), sy(0.0)));
            doc.polyline(&pts, label_color(s.label));
        }
        doc.line(x0, y0 + panel_h, x0 + panel_w, y0 + panel_h, AXIS);
        doc.line(x0, y0, x0, y0 + panel_h, AXIS);
        doc.text(x0 + panel_w / 2.0, y0 - 6.0, "text-anchor=\"middle\"", &pair[0].dataset_id);
        doc.text(x0, y0 + panel_h + 16.0, "text-anchor=\"start\"", &format!("{lo:.4}"));
        doc.text(x0 + panel_w, y0 + panel_h + 16.0, "text-anchor=\"end\"", &format!("{hi:.4}"));
    }
    let ly = height - 12.0;
    for (i, l) in [Label::Real, Label::Fake].into_iter().enumerate() {
        let x = margin + i as f64 * 80.0;
        doc.rect(x, ly - 10.0, 12.0, 12.0, label_color(l));
        doc.text(x + 18.0, ly, "", l.as_str());
    }
    doc.finish()
}
