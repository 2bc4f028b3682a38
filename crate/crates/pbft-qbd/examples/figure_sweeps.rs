//! Runs every shipped preset grid (the four standard performance figures),
//! writes CSV and SVG for each, and prints a trend summary.
//!
//! ```bash
//! cargo run --release -p pbft-qbd --example figure_sweeps [output-dir]
//! ```

use std::fs;
use std::path::PathBuf;

use pbft_qbd::plot;
use pbft_qbd::sweep::{self, MetricKind};

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("pbft-qbd-figures"));
    fs::create_dir_all(&out_dir).expect("create output directory");

    for (name, config) in sweep::presets() {
        let rows = sweep::run_sweep(&config).expect("preset sweeps are valid");
        let failures = rows.iter().filter(|r| r.error_code.is_some()).count();

        let csv_path = out_dir.join(format!("{name}.csv"));
        let mut buffer = Vec::new();
        sweep::write_csv(&mut buffer, &rows, config.columns()).unwrap();
        fs::write(&csv_path, buffer).unwrap();

        let svg_path = out_dir.join(format!("{name}.svg"));
        fs::write(&svg_path, plot::render_svg(&config, &rows).unwrap()).unwrap();

        // Direction of each plotted metric along the swept axis, per curve.
        let x_param = &config.sweep[0].param;
        let mut summary = Vec::new();
        for metric in [
            MetricKind::EK,
            MetricKind::EM,
            MetricKind::Gamma,
            MetricKind::Upsilon,
        ] {
            let mut increasing = 0;
            let mut decreasing = 0;
            let mut fs_seen: Vec<u32> = Vec::new();
            for row in &rows {
                if !fs_seen.contains(&row.f) {
                    fs_seen.push(row.f);
                }
            }
            for f in fs_seen {
                let curve: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.f == f)
                    .filter_map(|r| r.metric(metric))
                    .collect();
                for pair in curve.windows(2) {
                    if pair[1] > pair[0] + 1e-12 {
                        increasing += 1;
                    } else if pair[1] < pair[0] - 1e-12 {
                        decreasing += 1;
                    }
                }
            }
            let direction = match (increasing, decreasing) {
                (0, 0) => "flat",
                (_, 0) => "increasing",
                (0, _) => "decreasing",
                _ => "mixed",
            };
            summary.push(format!("{} {direction} in {x_param}", metric.label()));
        }

        println!(
            "{name}: {} rows ({failures} failed) -> {}, {}",
            rows.len(),
            csv_path.display(),
            svg_path.display()
        );
        for line in summary {
            println!("    {line}");
        }
    }
}
