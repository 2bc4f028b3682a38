//! The four stationary performance measures.
//!
//! All `(I - R)^{-1}` and `(I - R)^{-2}` applications are linear solves
//! against a single LU factorization of `I - R`; the inverse is never
//! formed. With `phi = (0, 1, ..., 2f)^T`:
//!
//! * `E[K] = pi1 (I-R)^{-2} e` — mean packages waiting at the client,
//! * `E[M] = pi1 (I-R)^{-1} phi` — mean nodes done verifying,
//! * `gamma = pi1 B2 e + pi1 R (I-R)^{-1} A2 e` — block-pegged rate (the
//!   departure rate of the block-pegging point process),
//! * `Upsilon = gamma c / N` — major-node reward rate.
//!
//! In a stable loss-free queue the pegged rate must equal the arrival
//! rate, so `gamma - lambda` is carried as a numerical diagnostic rather
//! than asserted away.

use nalgebra::{DMatrix, DVector};

use crate::model::{GeneratorBlocks, ModelParams};
use crate::solver::{self, StationarySolution};
use crate::{Error, Result};

/// The four measures for one parameter point, plus the flow-conservation
/// diagnostic `gamma - lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceMetrics {
    /// Mean number of transaction packages waiting at the client.
    pub e_k: f64,
    /// Mean number of nodes that have verified the in-progress package.
    pub e_m: f64,
    /// Stationary block-pegged rate.
    pub gamma: f64,
    /// Major-node reward rate, `gamma c / N` exactly.
    pub upsilon: f64,
    /// `gamma - lambda`; should vanish for every stable instance.
    pub gamma_minus_lambda: f64,
}

struct Factorized {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    spectral_radius_bound: f64,
}

impl Factorized {
    fn new(solution: &StationarySolution) -> Self {
        let r = solution.rate_matrix().matrix();
        let p = r.nrows();
        Factorized {
            lu: (DMatrix::identity(p, p) - r).lu(),
            spectral_radius_bound: solution.rate_matrix().spectral_radius_bound,
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(rhs).ok_or(Error::IminusRSingular {
            spectral_radius_bound: self.spectral_radius_bound,
        })
    }
}

fn e_k_inner(solution: &StationarySolution, fact: &Factorized) -> Result<f64> {
    let p = solution.pi1().len();
    let y = fact.solve(&DVector::from_element(p, 1.0))?;
    let z = fact.solve(&y)?;
    Ok(solution.pi1().dot(&z))
}

fn e_m_inner(solution: &StationarySolution, fact: &Factorized) -> Result<f64> {
    let p = solution.pi1().len();
    let phi = DVector::from_fn(p, |m, _| m as f64);
    let y = fact.solve(&phi)?;
    Ok(solution.pi1().dot(&y))
}

fn gamma_inner(
    solution: &StationarySolution,
    blocks: &GeneratorBlocks,
    fact: &Factorized,
) -> Result<f64> {
    let p = solution.pi1().len();
    let peg = blocks.a2_entry().1;
    // A2 e = peg * e_{2f}
    let mut a2e = DVector::zeros(p);
    a2e[p - 1] = peg;
    let y = fact.solve(&a2e)?;
    let ry = solution.rate_matrix().matrix() * y;
    let (b2_row, b2_val) = blocks.b2_entry();
    Ok(solution.pi1()[b2_row] * b2_val + solution.pi1().dot(&ry))
}

/// `E[K] = pi1 (I-R)^{-2} e` via two linear solves.
pub fn expected_packages(solution: &StationarySolution) -> Result<f64> {
    e_k_inner(solution, &Factorized::new(solution))
}

/// `E[M] = pi1 (I-R)^{-1} phi` via one linear solve; lies in `[0, 2f]`.
pub fn expected_verified_nodes(solution: &StationarySolution) -> Result<f64> {
    e_m_inner(solution, &Factorized::new(solution))
}

/// `gamma = pi1 B2 e + pi1 R (I-R)^{-1} A2 e`, the block-pegged rate.
pub fn block_pegged_rate(solution: &StationarySolution, blocks: &GeneratorBlocks) -> Result<f64> {
    gamma_inner(solution, blocks, &Factorized::new(solution))
}

/// `Upsilon = gamma c / N`: each node is major with probability `1/N`.
pub fn major_node_reward(gamma: f64, params: &ModelParams) -> f64 {
    gamma * params.c() / f64::from(params.n())
}

/// Runs the full pipeline: stability check, generator blocks, rate-matrix
/// iteration, boundary solve, then all four measures off one factorization
/// of `I - R`. Unstable instances fail outright rather than yielding
/// partial metrics.
pub fn evaluate_all(params: &ModelParams, tol: f64) -> Result<PerformanceMetrics> {
    evaluate_all_with(params, tol, solver::DEFAULT_MAX_ITER)
}

/// [`evaluate_all`] with an explicit iteration budget.
pub fn evaluate_all_with(
    params: &ModelParams,
    tol: f64,
    max_iter: usize,
) -> Result<PerformanceMetrics> {
    let report = solver::check_stability(params);
    if !report.stable {
        return Err(Error::Unstable { rho: report.rho });
    }
    let blocks = GeneratorBlocks::new(*params);
    let rate = solver::compute_rate_matrix(&blocks, tol, max_iter)?;
    let solution = solver::solve_boundary(&blocks, rate)?;
    metrics_from_solution(&solution, &blocks)
}

/// All four measures from an existing stationary solution, reusing one
/// `I - R` factorization.
pub fn metrics_from_solution(
    solution: &StationarySolution,
    blocks: &GeneratorBlocks,
) -> Result<PerformanceMetrics> {
    let fact = Factorized::new(solution);
    let e_k = e_k_inner(solution, &fact)?;
    let e_m = e_m_inner(solution, &fact)?;
    let gamma = gamma_inner(solution, blocks, &fact)?;
    let upsilon = major_node_reward(gamma, blocks.params());
    Ok(PerformanceMetrics {
        e_k,
        e_m,
        gamma,
        upsilon,
        gamma_minus_lambda: gamma - blocks.params().lambda(),
    })
}
