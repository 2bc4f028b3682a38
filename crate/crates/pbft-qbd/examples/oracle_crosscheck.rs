//! Cross-checks the matrix-geometric engine against the brute-force
//! truncated-chain solve over a small grid and prints the worst
//! disagreement per measure.
//!
//! ```bash
//! cargo run -p pbft-qbd --example oracle_crosscheck
//! ```

use pbft_qbd::metrics;
use pbft_qbd::model::ModelParams;
use pbft_qbd::oracle;

fn main() {
    println!(
        "{:>3} {:>6} {:>6} {:>5} {:>11} {:>11} {:>11} {:>11}",
        "f", "rho", "mu", "L", "dE[K]", "dE[M]", "dgamma", "dUpsilon"
    );
    let mut worst = [0.0f64; 4];
    for f in [1u32, 2, 3] {
        for rho_target in [0.3, 0.6, 0.85] {
            for mu in [1.0, 5.0] {
                let probe = ModelParams::new(1.0, mu, f, 12.5).unwrap();
                let lambda = rho_target / probe.utilization();
                let params = ModelParams::new(lambda, mu, f, 12.5).unwrap();

                let analytic = metrics::evaluate_all(&params, 1e-12).unwrap();
                let cap = oracle::adaptive_level_cap(&params, 1e-10);
                let truncated = oracle::truncated_stationary(&params, cap, 1e-10).unwrap();
                let reference = oracle::oracle_metrics(&truncated, &params);

                let diffs = [
                    (analytic.e_k - reference.e_k).abs(),
                    (analytic.e_m - reference.e_m).abs(),
                    (analytic.gamma - reference.gamma).abs(),
                    (analytic.upsilon - reference.upsilon).abs(),
                ];
                for (w, d) in worst.iter_mut().zip(diffs) {
                    *w = w.max(d);
                }
                println!(
                    "{f:>3} {rho_target:>6.2} {mu:>6.1} {cap:>5} {:>11.2e} {:>11.2e} {:>11.2e} {:>11.2e}",
                    diffs[0], diffs[1], diffs[2], diffs[3]
                );
            }
        }
    }
    println!(
        "\nworst absolute disagreement: E[K] {:.2e}, E[M] {:.2e}, gamma {:.2e}, Upsilon {:.2e}",
        worst[0], worst[1], worst[2], worst[3]
    );
}
