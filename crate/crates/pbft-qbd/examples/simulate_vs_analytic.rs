//! Runs the discrete-event simulator against the analytic engine and
//! checks that each 95% confidence interval covers the analytic value.
//!
//! ```bash
//! cargo run -p pbft-qbd --example simulate_vs_analytic
//! ```

use pbft_qbd::metrics;
use pbft_qbd::model::ModelParams;
use pbft_qbd::sim::{simulate, SimConfig};

fn main() {
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let analytic = metrics::evaluate_all(&params, 1e-12).unwrap();

    let config = SimConfig::new(1_000_000.0, 42);
    println!(
        "horizon {}, warmup {}, {} batches, seed {}",
        config.horizon, config.warmup, config.batches, config.seed
    );
    let est = simulate(&params, &config).unwrap();
    println!(
        "{} events, {} blocks pegged\n",
        est.events, est.pegged_blocks
    );

    println!(
        "{:>8} {:>12} {:>22} {:>8}",
        "measure", "analytic", "simulated (95% CI)", "covered"
    );
    for (name, reference, mean, hw) in [
        ("E[K]", analytic.e_k, est.e_k_mean, est.half_widths.e_k),
        ("E[M]", analytic.e_m, est.e_m_mean, est.half_widths.e_m),
        (
            "gamma",
            analytic.gamma,
            est.gamma_mean,
            est.half_widths.gamma,
        ),
    ] {
        println!(
            "{name:>8} {reference:>12.6} {:>22} {:>8}",
            format!("{mean:.6} ± {hw:.6}"),
            (mean - reference).abs() <= hw
        );
    }
}
