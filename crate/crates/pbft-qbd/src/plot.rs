//! Minimal self-contained SVG rendering for sweep results.
//!
//! One panel per plotted metric, the first swept parameter on the x axis,
//! one polyline per value of the second swept parameter. No rendering
//! dependencies; output is deterministic text.

use std::fmt::Write;

use crate::sweep::{MetricKind, SweepConfig, SweepRow};
use crate::{Error, Result};

const PANEL_WIDTH: f64 = 460.0;
const PANEL_HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn axis_label(param: &str) -> &str {
    match param {
        "lambda" => "lambda (packages/unit time)",
        "mu" => "mu (1/unit time)",
        "f" => "f (Byzantine nodes)",
        "c" => "c (reward/block)",
        other => other,
    }
}

fn param_value(row: &SweepRow, name: &str) -> f64 {
    match name {
        "lambda" => row.lambda,
        "mu" => row.mu,
        "f" => f64::from(row.f),
        "c" => row.c,
        _ => f64::NAN,
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs();
    if (0.01..10_000.0).contains(&magnitude) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Option<Range> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            return None;
        }
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
            // Degenerate span (e.g. a conserved quantity): pad around it.
            let pad = if scale == 0.0 { 1.0 } else { scale * 0.05 };
            lo -= pad;
            hi += pad;
        }
        Some(Range { lo, hi })
    }

    fn scale(&self, v: f64, pixel_lo: f64, pixel_hi: f64) -> f64 {
        pixel_lo + (v - self.lo) / (self.hi - self.lo) * (pixel_hi - pixel_lo)
    }
}

/// Renders the sweep as an SVG document, one panel per metric in
/// `config.plot_metrics`. Points that failed are simply absent from their
/// curve.
pub fn render_svg(config: &SweepConfig, rows: &[SweepRow]) -> Result<String> {
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::InvalidSweepConfig("no rows to plot".into()));
    }
    let x_param = &config.sweep[0].param;
    let curve_param = config.sweep.get(1).map(|sp| sp.param.as_str());

    // Curve keys in first-appearance (grid) order.
    let mut curve_keys: Vec<Option<u64>> = Vec::new();
    for row in rows {
        let key = curve_param.map(|p| param_value(row, p).to_bits());
        if !curve_keys.contains(&key) {
            curve_keys.push(key);
        }
    }

    let panels = &config.plot_metrics;
    let total_width = PANEL_WIDTH * panels.len() as f64;
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">",
        total_width, PANEL_HEIGHT, total_width, PANEL_HEIGHT
    )
    .unwrap();
    writeln!(
        svg,
        "<rect width=\"{total_width}\" height=\"{PANEL_HEIGHT}\" fill=\"white\"/>"
    )
    .unwrap();

    for (panel_index, metric) in panels.iter().enumerate() {
        render_panel(
            &mut svg,
            panel_index as f64 * PANEL_WIDTH,
            *metric,
            x_param,
            curve_param,
            &curve_keys,
            rows,
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_panel(
    svg: &mut String,
    x_offset: f64,
    metric: MetricKind,
    x_param: &str,
    curve_param: Option<&str>,
    curve_keys: &[Option<u64>],
    rows: &[SweepRow],
) {
    let plot_left = x_offset + MARGIN_LEFT;
    let plot_right = x_offset + PANEL_WIDTH - MARGIN_RIGHT;
    let plot_top = MARGIN_TOP;
    let plot_bottom = PANEL_HEIGHT - MARGIN_BOTTOM;

    let xs = Range::of(rows.iter().map(|r| param_value(r, x_param)));
    let ys = Range::of(rows.iter().filter_map(|r| r.metric(metric)));
    let (Some(xs), Some(ys)) = (xs, ys) else {
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">no finite data for {}</text>",
            plot_left,
            (plot_top + plot_bottom) / 2.0,
            metric.label()
        )
        .unwrap();
        return;
    };

    // Frame and title.
    writeln!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>",
        fmt_coord(plot_left),
        fmt_coord(plot_top),
        fmt_coord(plot_right - plot_left),
        fmt_coord(plot_bottom - plot_top)
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{} vs {}</text>",
        fmt_coord((plot_left + plot_right) / 2.0),
        metric.label(),
        x_param
    )
    .unwrap();

    // Ticks.
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = xs.lo + t * (xs.hi - xs.lo);
        let xp = xs.scale(xv, plot_left, plot_right);
        writeln!(
            svg,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#333\"/>",
            fmt_coord(plot_bottom),
            fmt_coord(plot_bottom + 4.0),
            x = fmt_coord(xp)
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt_coord(xp),
            fmt_coord(plot_bottom + 17.0),
            fmt_tick(xv)
        )
        .unwrap();

        let yv = ys.lo + t * (ys.hi - ys.lo);
        let yp = ys.scale(yv, plot_bottom, plot_top);
        writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#333\"/>",
            fmt_coord(plot_left - 4.0),
            fmt_coord(plot_left),
            y = fmt_coord(yp)
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
            fmt_coord(plot_left - 7.0),
            fmt_coord(yp),
            fmt_tick(yv)
        )
        .unwrap();
    }

    // Axis labels.
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        fmt_coord((plot_left + plot_right) / 2.0),
        fmt_coord(PANEL_HEIGHT - 14.0),
        axis_label(x_param)
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{}</text>",
        fmt_coord(x_offset + 16.0),
        fmt_coord((plot_top + plot_bottom) / 2.0),
        fmt_coord(x_offset + 16.0),
        fmt_coord((plot_top + plot_bottom) / 2.0),
        metric.label()
    )
    .unwrap();

    // Curves and legend.
    for (curve_index, key) in curve_keys.iter().enumerate() {
        let color = PALETTE[curve_index % PALETTE.len()];
        let mut points = String::new();
        for row in rows {
            let row_key = curve_param.map(|p| param_value(row, p).to_bits());
            if row_key != *key {
                continue;
            }
            let Some(y) = row.metric(metric) else {
                continue;
            };
            if !y.is_finite() {
                continue;
            }
            let xp = xs.scale(param_value(row, x_param), plot_left, plot_right);
            let yp = ys.scale(y, plot_bottom, plot_top);
            if !points.is_empty() {
                points.push(' ');
            }
            write!(points, "{},{}", fmt_coord(xp), fmt_coord(yp)).unwrap();
        }
        if points.is_empty() {
            continue;
        }
        writeln!(
            svg,
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        )
        .unwrap();

        if let (Some(curve_param), Some(bits)) = (curve_param, key) {
            let legend_y = plot_top + 14.0 + 16.0 * curve_index as f64;
            let legend_x = plot_right - 120.0;
            writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>",
                fmt_coord(legend_x),
                fmt_coord(legend_x + 18.0),
                y = fmt_coord(legend_y - 4.0)
            )
            .unwrap();
            writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\">{} = {}</text>",
                fmt_coord(legend_x + 24.0),
                fmt_coord(legend_y),
                curve_param,
                fmt_tick(f64::from_bits(*bits))
            )
            .unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{self, Mode, SweepConfig, SweptParam, SweptValues};

    fn config() -> SweepConfig {
        let mut config: SweepConfig = toml::from_str(
            r#"
            [fixed]
            lambda = 1.0
            c = 12.5

            [[sweep]]
            param = "mu"
            start = 2.0
            stop = 4.0
            steps = 3

            [[sweep]]
            param = "f"
            list = [1, 2]
        "#,
        )
        .unwrap();
        config.mode = Mode::Analytic;
        config
    }

    #[test]
    fn svg_contains_curves_axes_and_legend() {
        let config = config();
        let rows = sweep::run_sweep(&config).unwrap();
        let svg = render_svg(&config, &rows).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 4); // 2 panels x 2 curves
        assert!(svg.contains("mu (1/unit time)"));
        assert!(svg.contains("E[K] (packages)"));
        assert!(svg.contains("f = 1"));
        assert!(svg.contains("f = 2"));
    }

    #[test]
    fn svg_is_deterministic() {
        let config = config();
        let rows = sweep::run_sweep(&config).unwrap();
        assert_eq!(
            render_svg(&config, &rows).unwrap(),
            render_svg(&config, &rows).unwrap()
        );
    }

    #[test]
    fn failed_points_leave_gaps_not_errors() {
        let mut config = config();
        // mu = 0.4 makes f=1 unstable (rho = 13/12 / 0.4 ... > 1), f=2 also unstable;
        // mu = 2.0 and 4.0 stable.
        config.sweep[0].values = SweptValues::Range {
            start: 0.4,
            stop: 4.0,
            steps: 2,
        };
        let rows = sweep::run_sweep(&config).unwrap();
        assert!(rows.iter().any(|r| r.error_code.is_some()));
        let svg = render_svg(&config, &rows).unwrap();
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn single_swept_parameter_draws_one_curve_per_panel() {
        let config = SweepConfig {
            sweep: vec![SweptParam {
                param: "mu".into(),
                values: SweptValues::Range {
                    start: 2.0,
                    stop: 4.0,
                    steps: 5,
                },
            }],
            fixed: [
                ("lambda".to_string(), 1.0),
                ("c".to_string(), 1.0),
                ("f".to_string(), 1.0),
            ]
            .into_iter()
            .collect(),
            ..config()
        };
        let rows = sweep::run_sweep(&config).unwrap();
        let svg = render_svg(&config, &rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2); // 2 panels x 1 curve
    }
}
