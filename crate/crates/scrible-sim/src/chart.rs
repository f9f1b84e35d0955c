//! Minimal static SVG line chart for sweep results: ε on the x-axis, mean
//! cumulative loss on the y-axis, one polyline per algorithm. Written
//! directly as markup; no plotting dependency.

use std::collections::BTreeMap;

use scrible_core::learner::AlgorithmKind;

use crate::harness::SweepRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn color(kind: AlgorithmKind) -> &'static str {
    // Blue for the lifted algorithm, yellow for the increasing-rate
    // variant, green for the classic baseline.
    match kind {
        AlgorithmKind::Lifted => "#1f77b4",
        AlgorithmKind::IncreasingLr => "#e6b400",
        AlgorithmKind::Classic => "#2ca02c",
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if (1e-3..1e5).contains(&magnitude) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Renders the sweep as a self-contained SVG document.
pub fn sweep_chart(rows: &[SweepRow]) -> String {
    let mut series: BTreeMap<&'static str, (AlgorithmKind, Vec<(f64, f64)>)> = BTreeMap::new();
    for row in rows {
        series
            .entry(row.algorithm.label())
            .or_insert_with(|| (row.algorithm, Vec::new()))
            .1
            .push((row.epsilon, row.mean_cum_loss));
    }
    for (_, points) in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let xs: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_cum_loss).collect();
    let (x_min, x_max) = padded_range(&xs);
    let (y_min, y_max) = padded_range(&ys);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |v: f64| MARGIN_LEFT + (v - x_min) / (x_max - x_min) * plot_w;
    let to_y = |v: f64| MARGIN_TOP + plot_h - (v - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{:.2}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{MARGIN_TOP}\" stroke=\"black\"/>\n"
    ));

    // Y ticks.
    for i in 0..=4 {
        let v = y_min + (y_max - y_min) * i as f64 / 4.0;
        let y = to_y(v);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            x0 - 8.0,
            y + 4.0,
            fmt_tick(v)
        ));
    }

    // X ticks at the distinct ε values.
    let mut x_ticks: Vec<f64> = xs.clone();
    x_ticks.sort_by(f64::total_cmp);
    x_ticks.dedup();
    for v in &x_ticks {
        let x = to_x(*v);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            y0 + 20.0,
            fmt_tick(*v)
        ));
    }

    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">epsilon</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">average cumulative loss</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Series polylines and legend.
    let mut legend_y = MARGIN_TOP + 10.0;
    for (label, (kind, points)) in &series {
        let path: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", to_x(*x), to_y(*y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
            color(*kind),
            path.join(" ")
        ));
        for (x, y) in points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>\n",
                to_x(*x),
                to_y(*y),
                color(*kind)
            ));
        }
        let lx = WIDTH - MARGIN_RIGHT + 16.0;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            lx + 24.0,
            color(*kind)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{label}</text>\n",
            lx + 30.0,
            legend_y + 4.0
        ));
        legend_y += 20.0;
    }

    svg.push_str("</svg>\n");
    svg
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.1;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}
