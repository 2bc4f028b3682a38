//! Where does the consensus queue saturate? Sweeps the arrival rate
//! across the stability boundary and prints the mean-drift verdict.
//!
//! ```bash
//! cargo run -p pbft-qbd --example stability
//! ```

use pbft_qbd::model::ModelParams;
use pbft_qbd::solver;

fn main() {
    let mu = 2.0;
    let f = 2;
    println!("mu = {mu}, f = {f}, N = {}", 3 * f + 1);
    println!(
        "{:>8} {:>10} {:>12} {:>12} {:>9}",
        "lambda", "rho", "drift_in", "drift_out", "stable"
    );
    for i in 0..12 {
        let lambda = 0.3 + 0.15 * i as f64;
        let params = ModelParams::new(lambda, mu, f, 0.0).unwrap();
        let report = solver::check_stability(&params);
        println!(
            "{:>8.2} {:>10.5} {:>12.5} {:>12.5} {:>9}",
            lambda, report.rho, report.drift_in, report.drift_out, report.stable
        );
    }

    // The boundary sits exactly where lambda equals the drain rate
    // mu / sum_k 1/(N-k).
    let probe = ModelParams::new(1.0, mu, f, 0.0).unwrap();
    let critical = 1.0 / probe.utilization();
    println!("\ncritical arrival rate: lambda* = {critical:.6}");
}
