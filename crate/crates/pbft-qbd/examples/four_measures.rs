//! Evaluates the four performance measures at a production-scale point:
//! 151 nodes (f = 50), block reward 12.5.
//!
//! ```bash
//! cargo run -p pbft-qbd --example four_measures
//! ```

use pbft_qbd::metrics;
use pbft_qbd::model::ModelParams;

fn main() {
    let params = ModelParams::new(1.0, 3.0, 50, 12.5).unwrap();
    println!(
        "lambda = {}, mu = {}, f = {}, N = {}, c = {}",
        params.lambda(),
        params.mu(),
        params.f(),
        params.n(),
        params.c()
    );
    println!("rho = {:.6}\n", params.utilization());

    let m = metrics::evaluate_all(&params, 1e-12).unwrap();
    println!("E[K]    = {:>12.8}  packages waiting at the client", m.e_k);
    println!("E[M]    = {:>12.8}  nodes done verifying", m.e_m);
    println!("gamma   = {:>12.8}  blocks pegged per unit time", m.gamma);
    println!(
        "Upsilon = {:>12.8}  reward per unit time for the major node",
        m.upsilon
    );
    println!(
        "\nflow conservation check: |gamma - lambda| = {:.2e}",
        m.gamma_minus_lambda.abs()
    );
    println!("(every arriving package is eventually pegged, so gamma = lambda)");
}
