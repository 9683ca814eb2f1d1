//! Report rendering: the importance table and ROC/PR plots.
//!
//! Plots are written as hand-assembled SVG — axes, gridlines, and one
//! polyline per series — so the output is a small, diff-able text file
//! that is byte-stable across runs and platforms.

/// One polyline on a chart. Points live in the unit square.
pub struct ChartSeries<'a> {
    pub label: &'a str,
    /// CSS color for the stroke, e.g. `#1a73e8`.
    pub color: &'a str,
    pub points: &'a [(f64, f64)],
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 70.0;
const PLOT_RIGHT: f64 = 610.0;
const PLOT_TOP: f64 = 40.0;
const PLOT_BOTTOM: f64 = 420.0;

fn to_px(x: f64, y: f64) -> (f64, f64) {
    (
        PLOT_LEFT + x * (PLOT_RIGHT - PLOT_LEFT),
        PLOT_BOTTOM - y * (PLOT_BOTTOM - PLOT_TOP),
    )
}

/// Renders a unit-square line chart (both axes 0..1) with optional
/// diagonal reference line. Deterministic: same inputs, same bytes.
pub fn line_chart_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[ChartSeries<'_>],
    diagonal: bool,
) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0
    ));

    // Gridlines and tick labels at 0, 0.25, ..., 1.
    for i in 0..=4 {
        let t = f64::from(i) / 4.0;
        let (px, py) = to_px(t, t);
        svg.push_str(&format!(
            "  <line x1=\"{px:.2}\" y1=\"{PLOT_TOP:.2}\" x2=\"{px:.2}\" y2=\"{PLOT_BOTTOM:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "  <line x1=\"{PLOT_LEFT:.2}\" y1=\"{py:.2}\" x2=\"{PLOT_RIGHT:.2}\" y2=\"{py:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{t:.2}</text>\n",
            PLOT_BOTTOM + 16.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{t:.2}</text>\n",
            PLOT_LEFT - 6.0,
            py + 4.0
        ));
    }

    if diagonal {
        let (x1, y1) = to_px(0.0, 0.0);
        let (x2, y2) = to_px(1.0, 1.0);
        svg.push_str(&format!(
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"#bbbbbb\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n"
        ));
    }

    // Axes drawn after the grid so they sit on top.
    svg.push_str(&format!(
        "  <line x1=\"{PLOT_LEFT:.2}\" y1=\"{PLOT_BOTTOM:.2}\" x2=\"{PLOT_RIGHT:.2}\" \
         y2=\"{PLOT_BOTTOM:.2}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{PLOT_LEFT:.2}\" y1=\"{PLOT_TOP:.2}\" x2=\"{PLOT_LEFT:.2}\" \
         y2=\"{PLOT_BOTTOM:.2}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{x_label}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        PLOT_BOTTOM + 40.0
    ));
    svg.push_str(&format!(
        "  <text x=\"20\" y=\"{mid:.2}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 20 {mid:.2})\">{y_label}</text>\n",
        mid = (PLOT_TOP + PLOT_BOTTOM) / 2.0
    ));

    for entry in series {
        let mut coords = String::new();
        for (x, y) in entry.points {
            let (px, py) = to_px(*x, *y);
            coords.push_str(&format!("{px:.2},{py:.2} "));
        }
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            coords.trim_end(),
            entry.color
        ));
    }

    // Legend, top-left inside the plot so PR curves (which end bottom
    // right) are not covered.
    for (i, entry) in series.iter().enumerate() {
        let y = PLOT_TOP + 18.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n",
            PLOT_LEFT + 12.0,
            PLOT_LEFT + 40.0,
            entry.color
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            PLOT_LEFT + 46.0,
            y + 4.0,
            entry.label
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// `feature,importance` table, one row per feature, ranked as given.
pub fn importance_csv(ranked: &[(String, f64)]) -> String {
    let mut csv = String::from("feature,importance\n");
    for (name, value) in ranked {
        csv.push_str(&format!("{name},{value}\n"));
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn importance_table_lists_rows_in_given_order() {
        let ranked = vec![("channel_index".to_owned(), 0.8), ("ppr".to_owned(), 0.7)];
        let csv = importance_csv(&ranked);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "feature,importance");
        assert_eq!(lines[1], "channel_index,0.8");
        assert_eq!(lines[2], "ppr,0.7");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn chart_contains_one_polyline_per_series_plus_chrome() {
        let roc_a = [(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)];
        let roc_b = [(0.0, 0.0), (0.5, 0.6), (1.0, 1.0)];
        let series = [
            ChartSeries {
                label: "baseline",
                color: "#9aa0a6",
                points: &roc_b,
            },
            ChartSeries {
                label: "with ppr",
                color: "#1a73e8",
                points: &roc_a,
            },
        ];
        let svg = line_chart_svg("ROC curve", "fpr", "tpr", &series, true);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("ROC curve"));
        assert!(svg.contains("with ppr"));
        assert!(svg.contains("stroke-dasharray"), "diagonal reference drawn");
        // Corner points land on the plot frame.
        assert!(svg.contains("70.00,420.00"));
        assert!(svg.contains("610.00,40.00"));
    }

    #[test]
    fn chart_without_diagonal_omits_the_dashed_line() {
        let points = [(0.0, 1.0), (1.0, 0.5)];
        let series = [ChartSeries {
            label: "pr",
            color: "#111111",
            points: &points,
        }];
        let svg = line_chart_svg("PR", "recall", "precision", &series, false);
        assert!(!svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
