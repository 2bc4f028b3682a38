//! Independent ground truth: direct stationary solve of the truncated chain.
//!
//! The generator is assembled explicitly over levels `0..=L` straight from
//! the model parameters — no generator blocks, no rate matrix — with the
//! last level made reflecting (its arrival outflow dropped) so the
//! truncation stays a proper generator. The global balance equations are
//! then attacked head-on with a banded direct solve. Everything the
//! matrix-geometric engine produces can be checked against this path.

use crate::banded::BandedMatrix;
use crate::metrics::PerformanceMetrics;
use crate::model::ModelParams;
use crate::solver::check_stability;
use crate::{Error, Result};

/// Default ceiling on the probability mass allowed at the truncation level.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-10;

/// Truncation level from the geometric-decay heuristic
/// `ceil(log(tail_threshold) / log(rho)) + 50`, verified a posteriori by
/// [`truncated_stationary`]'s tail check. Only meaningful for stable
/// instances.
pub fn adaptive_level_cap(params: &ModelParams, tail_threshold: f64) -> usize {
    let rho = params.utilization();
    if rho >= 1.0 || rho <= 0.0 || !(tail_threshold > 0.0) {
        return 50;
    }
    let levels = (tail_threshold.ln() / rho.ln()).ceil();
    levels as usize + 50
}

/// Stationary distribution of the truncated chain.
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    level_cap: usize,
    phase_count: usize,
    /// Probabilities indexed `[level 0, (1,0)..(1,2f), (2,0)..]`.
    probabilities: Vec<f64>,
    /// Mass sitting at the truncation level.
    pub tail_mass_estimate: f64,
    /// Max-abs global balance residual `|pi Q|` of the solve.
    pub balance_residual: f64,
}

impl TruncatedSolution {
    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    pub fn phase_count(&self) -> usize {
        self.phase_count
    }

    /// Probability of the empty system.
    pub fn pi0(&self) -> f64 {
        self.probabilities[0]
    }

    /// Probability of state `(k, m)`, `1 <= k <= level_cap`.
    pub fn pi(&self, k: usize, m: usize) -> f64 {
        assert!(k >= 1 && k <= self.level_cap && m < self.phase_count);
        self.probabilities[1 + (k - 1) * self.phase_count + m]
    }

    /// Total mass of level `k`.
    pub fn level_mass(&self, k: usize) -> f64 {
        if k == 0 {
            self.pi0()
        } else {
            (0..self.phase_count).map(|m| self.pi(k, m)).sum()
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Sparse triplet assembly of the truncated generator, reflecting at the
/// last level.
fn assemble_triplets(params: &ModelParams, level_cap: usize) -> Vec<(usize, usize, f64)> {
    let p = params.phase_count();
    let lambda = params.lambda();
    let idx = |k: usize, m: usize| 1 + (k - 1) * p + m;
    let mut t = Vec::with_capacity(3 * (1 + level_cap * p));
    t.push((0, 0, -lambda));
    t.push((0, idx(1, 0), lambda));
    for k in 1..=level_cap {
        for m in 0..p {
            let i = idx(k, m);
            let rate = params.phase_rate(m);
            let diag = if k < level_cap { -rate - lambda } else { -rate };
            t.push((i, i, diag));
            if m + 1 < p {
                t.push((i, idx(k, m + 1), rate));
            } else if k == 1 {
                t.push((i, 0, rate));
            } else {
                t.push((i, idx(k - 1, 0), rate));
            }
            if k < level_cap {
                t.push((i, idx(k + 1, m), lambda));
            }
        }
    }
    t
}

/// Solves the truncated global balance system `pi Q = 0`, `sum pi = 1`.
///
/// The reference state (empty system) is pinned to 1, the remaining
/// unknowns are solved from the transposed generator minor with a banded
/// LU, and the result is normalized. Fails if the mass left at the
/// truncation level exceeds `tail_threshold`.
pub fn truncated_stationary(
    params: &ModelParams,
    level_cap: usize,
    tail_threshold: f64,
) -> Result<TruncatedSolution> {
    let report = check_stability(params);
    if !report.stable {
        return Err(Error::Unstable { rho: report.rho });
    }
    if level_cap < 10 {
        return Err(Error::InvalidParameter {
            name: "level_cap",
            value: level_cap as f64,
            reason: "truncation level must be at least 10",
        });
    }
    if !(tail_threshold > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tail_threshold",
            value: tail_threshold,
            reason: "tail threshold must be positive",
        });
    }

    let p = params.phase_count();
    let dim = 1 + level_cap * p;
    let triplets = assemble_triplets(params, level_cap);

    // pi Q = 0 with pi_0 := 1 becomes A z = b over the remaining states,
    // where A is the transposed generator minor: A[r, c] = Q[c+1, r+1],
    // b[r] = -Q[0, r+1]. Q's bandwidth (kl = 2p-1, ku = p) transposes to
    // (kl = p, ku = 2p-1).
    let mut a = BandedMatrix::zeros(dim - 1, p, 2 * p - 1);
    let mut b = vec![0.0; dim - 1];
    for &(i, j, v) in &triplets {
        if j == 0 {
            continue; // dropped balance column (reference state)
        }
        if i == 0 {
            b[j - 1] -= v;
        } else {
            a.add(j - 1, i - 1, v);
        }
    }
    let z = a.solve(b)?;

    let mut probabilities = Vec::with_capacity(dim);
    probabilities.push(1.0);
    probabilities.extend_from_slice(&z);
    let min = probabilities.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-9 {
        return Err(Error::SingularSystem(format!(
            "truncated solve produced negative probability {min:e}"
        )));
    }
    for v in &mut probabilities {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = probabilities.iter().sum();
    for v in &mut probabilities {
        *v /= total;
    }

    // Global balance residual of the normalized solution.
    let mut residual = vec![0.0; dim];
    for &(i, j, v) in &triplets {
        residual[j] += probabilities[i] * v;
    }
    let balance_residual = residual.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let solution = TruncatedSolution {
        level_cap,
        phase_count: p,
        probabilities,
        tail_mass_estimate: 0.0,
        balance_residual,
    };
    let tail_mass_estimate = solution.level_mass(level_cap);
    if tail_mass_estimate > tail_threshold {
        return Err(Error::TruncationTooSmall {
            level_cap,
            tail_mass: tail_mass_estimate,
            threshold: tail_threshold,
        });
    }
    Ok(TruncatedSolution {
        tail_mass_estimate,
        ..solution
    })
}

/// The four performance measures by direct summation over the truncated
/// distribution.
pub fn oracle_metrics(solution: &TruncatedSolution, params: &ModelParams) -> PerformanceMetrics {
    let p = solution.phase_count();
    let mut e_k = 0.0;
    let mut e_m = 0.0;
    let mut top_phase_mass = 0.0;
    for k in 1..=solution.level_cap() {
        let mass = solution.level_mass(k);
        e_k += k as f64 * mass;
        for m in 0..p {
            e_m += m as f64 * solution.pi(k, m);
        }
        top_phase_mass += solution.pi(k, p - 1);
    }
    let gamma = top_phase_mass * params.peg_rate();
    let upsilon = crate::metrics::major_node_reward(gamma, params);
    PerformanceMetrics {
        e_k,
        e_m,
        gamma,
        upsilon,
        gamma_minus_lambda: gamma - params.lambda(),
    }
}
