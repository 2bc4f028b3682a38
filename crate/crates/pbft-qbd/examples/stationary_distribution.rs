//! Computes the matrix-geometric stationary distribution for one instance
//! and shows the geometric tail at work: level masses decay by the
//! spectral radius of R.
//!
//! ```bash
//! cargo run -p pbft-qbd --example stationary_distribution
//! ```

use pbft_qbd::model::{GeneratorBlocks, ModelParams};
use pbft_qbd::solver;

fn main() {
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let blocks = GeneratorBlocks::new(params);

    let rate = solver::compute_rate_matrix(&blocks, 1e-12, solver::DEFAULT_MAX_ITER).unwrap();
    println!(
        "R converged after {} iterations (residual {:.2e}, last step {:.2e})",
        rate.iterations, rate.residual, rate.last_step
    );
    println!("R =\n{:.6}", rate.matrix());
    let sp = rate.spectral_radius_estimate();
    println!("spectral radius estimate: {sp:.9}");

    let solution = solver::solve_boundary(&blocks, rate).unwrap();
    println!("pi0 = {:.9}", solution.pi0());
    println!("pi1 = {:.9}", solution.pi1().transpose());

    println!("{:>6} {:>14} {:>12}", "level", "mass", "ratio");
    let mut previous = solution.pi0();
    for k in 0..=10usize {
        let mass = solution.level_mass(k);
        if k == 0 {
            println!("{k:>6} {mass:>14.9} {:>12}", "-");
        } else {
            println!("{k:>6} {mass:>14.9} {:>12.6}", mass / previous);
        }
        previous = mass;
    }
    println!("(the ratio settles at the spectral radius {sp:.6})");
}
