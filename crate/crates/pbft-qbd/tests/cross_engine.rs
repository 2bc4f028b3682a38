//! Matrix-geometric engine vs truncated-chain oracle, beyond the
//! per-module unit tests: level-by-level agreement, geometric tail decay,
//! and the analytic distribution pushed through an independently assembled
//! truncated generator.

use nalgebra::{DMatrix, DVector};

use pbft_qbd::metrics;
use pbft_qbd::model::{GeneratorBlocks, ModelParams};
use pbft_qbd::oracle;
use pbft_qbd::solver;

fn analytic_solution(params: &ModelParams) -> (GeneratorBlocks, solver::StationarySolution) {
    let blocks = GeneratorBlocks::new(*params);
    let rate = solver::compute_rate_matrix(&blocks, 1e-12, solver::DEFAULT_MAX_ITER).unwrap();
    let solution = solver::solve_boundary(&blocks, rate).unwrap();
    (blocks, solution)
}

#[test]
fn boundary_vector_matches_oracle() {
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let (_, solution) = analytic_solution(&params);
    let truncated = oracle::truncated_stationary(&params, 200, 1e-10).unwrap();
    assert!((solution.pi0() - truncated.pi0()).abs() < 1e-8);
    for m in 0..params.phase_count() {
        assert!(
            (solution.pi1()[m] - truncated.pi(1, m)).abs() < 1e-8,
            "pi1[{m}] disagrees"
        );
    }
}

#[test]
fn level_three_matches_oracle() {
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let (_, solution) = analytic_solution(&params);
    let truncated = oracle::truncated_stationary(&params, 200, 1e-10).unwrap();
    let level3 = solution.level(3);
    for m in 0..params.phase_count() {
        assert!(
            (level3[m] - truncated.pi(3, m)).abs() < 1e-8,
            "pi3[{m}] disagrees"
        );
    }
}

#[test]
fn rate_matrix_action_recovered_from_oracle_levels() {
    // pi_{k+1} = pi_k R: the oracle's consecutive level vectors must
    // reproduce the action of the converged R.
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let (_, solution) = analytic_solution(&params);
    let r = solution.rate_matrix().matrix();
    let truncated = oracle::truncated_stationary(&params, 200, 1e-10).unwrap();
    let p = params.phase_count();
    for k in 5..=30usize {
        let pi_k = DVector::from_fn(p, |m, _| truncated.pi(k, m));
        let pi_next = DVector::from_fn(p, |m, _| truncated.pi(k + 1, m));
        let predicted = r.transpose() * &pi_k;
        let mass = truncated.level_mass(k);
        for m in 0..p {
            let err = (predicted[m] - pi_next[m]).abs() / mass;
            assert!(err < 1e-6, "level {k}, phase {m}: relative error {err}");
        }
    }
}

#[test]
fn oracle_tail_decays_at_spectral_radius_of_r() {
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let (_, solution) = analytic_solution(&params);
    let sp = solution.rate_matrix().spectral_radius_estimate();
    let truncated = oracle::truncated_stationary(&params, 200, 1e-10).unwrap();

    // Ratios of consecutive level masses settle to a constant equal to
    // the dominant eigenvalue of R.
    let ratios: Vec<f64> = (40..60)
        .map(|k| truncated.level_mass(k + 1) / truncated.level_mass(k))
        .collect();
    for pair in ratios.windows(2) {
        assert!(
            (pair[1] - pair[0]).abs() < 1e-4,
            "ratio drift {} vs {}",
            pair[0],
            pair[1]
        );
    }
    assert!(
        (ratios[ratios.len() - 1] - sp).abs() < 1e-4,
        "tail ratio {} vs spectral radius estimate {sp}",
        ratios[ratios.len() - 1]
    );
    // Frozen from the independent high-precision solve.
    assert!((ratios[ratios.len() - 1] - 0.423_856_647_684_612).abs() < 1e-9);
}

/// Dense truncated generator assembled from the public dense block
/// expansions; an assembly route independent of the oracle's.
fn dense_truncated_q(blocks: &GeneratorBlocks, levels: usize) -> DMatrix<f64> {
    let p = blocks.phase_count();
    let dim = 1 + levels * p;
    let mut q = DMatrix::zeros(dim, dim);
    q[(0, 0)] = blocks.b1();
    let base = |k: usize| 1 + (k - 1) * p;
    q.view_mut((0, base(1)), (1, p))
        .copy_from(&blocks.b0_dense());
    q.view_mut((base(1), 0), (p, 1))
        .copy_from(&blocks.b2_dense());
    for k in 1..=levels {
        q.view_mut((base(k), base(k)), (p, p))
            .copy_from(&blocks.a1_dense());
        if k >= 2 {
            q.view_mut((base(k), base(k - 1)), (p, p))
                .copy_from(&blocks.a2_dense());
        }
        if k < levels {
            q.view_mut((base(k), base(k + 1)), (p, p))
                .copy_from(&blocks.a0_dense());
        }
    }
    q
}

#[test]
fn analytic_distribution_annihilates_truncated_generator() {
    // pi Q_truncated = 0 within 1e-9 in every coordinate except the final
    // level, with L deep enough that the tail mass is below 1e-12.
    let params = ModelParams::new(1.0, 2.0, 1, 0.0).unwrap();
    let (blocks, solution) = analytic_solution(&params);
    let sp = solution.rate_matrix().spectral_radius_estimate();
    let levels = ((1e-12 * (1.0 - sp)).ln() / sp.ln()).ceil() as usize;
    assert!(solution.level_mass(levels) < 1e-12);

    let p = params.phase_count();
    let dim = 1 + levels * p;
    let mut pi = DVector::zeros(dim);
    pi[0] = solution.pi0();
    for k in 1..=levels {
        let level = solution.level(k);
        for m in 0..p {
            pi[1 + (k - 1) * p + m] = level[m];
        }
    }
    let q = dense_truncated_q(&blocks, levels);
    let residual = q.transpose() * &pi;
    let last_level_start = 1 + (levels - 1) * p;
    for j in 0..last_level_start {
        assert!(
            residual[j].abs() < 1e-9,
            "balance residual {} at state {j}",
            residual[j]
        );
    }
}

#[test]
fn oracle_agreement_on_second_fixture() {
    // f = 3 exercises multi-phase levels end to end.
    let params = ModelParams::new(1.0, 3.0, 3, 12.5).unwrap();
    let analytic = metrics::evaluate_all(&params, 1e-12).unwrap();
    let cap = oracle::adaptive_level_cap(&params, 1e-10);
    let truncated = oracle::truncated_stationary(&params, cap, 1e-10).unwrap();
    let reference = oracle::oracle_metrics(&truncated, &params);
    assert!((analytic.e_k - reference.e_k).abs() < 1e-6);
    assert!((analytic.e_m - reference.e_m).abs() < 1e-6);
    assert!((analytic.gamma - reference.gamma).abs() < 1e-6);
    assert!((analytic.upsilon - reference.upsilon).abs() < 1e-6);
}
