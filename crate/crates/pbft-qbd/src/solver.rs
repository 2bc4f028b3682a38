//! Stability analysis, the rate-matrix iteration and the boundary solve.
//!
//! Stability is decided by the mean-drift criterion on the phase process
//! `A = A0 + A1 + A2`, which reduces to the closed-form utilization test
//! `rho < 1`. For stable instances the rate matrix `R` is the minimal
//! nonnegative solution of
//!
//! ```text
//! R^2 A2 + R A1 + A0 = 0
//! ```
//!
//! computed by the fixed-point iteration `R_{n+1} = (R_n^2 A2 + A0)(-A1)^{-1}`
//! from `R_0 = 0`, which increases entrywise to `R`. The iteration exploits
//! the block structure throughout: `R^2 A2` has a single nonzero column and
//! `(-A1)^{-1}` is applied by a bidiagonal column sweep, so each step costs
//! `O(p^2)` for `p = 2f + 1` phases. The boundary pair `(pi0, pi1)` then
//! solves the level-0/level-1 balance equations closed with the
//! normalization `pi0 + pi1 (I-R)^{-1} e = 1`, and every higher level is
//! `pi_k = pi_1 R^{k-1}`.

use nalgebra::{DMatrix, DVector};

use crate::model::{GeneratorBlocks, ModelParams};
use crate::{Error, Result};

/// Default stopping tolerance for the rate-matrix iteration (max absolute
/// row sum of successive differences).
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Residual ceiling enforced at return: the max-abs entry of
/// `R^2 A2 + R A1 + A0` must not exceed this, even after the step-size
/// criterion is met.
pub const RESIDUAL_CEILING: f64 = 1e-10;

/// Outcome of the mean-drift stability analysis.
///
/// `rho`, the drift comparison and `stable` are computed through separate
/// routes and must agree; tests enforce this on grids straddling the
/// boundary.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Utilization from direct summation.
    pub rho: f64,
    /// `rho < 1`.
    pub stable: bool,
    /// Stationary vector of the phase process `A`, from the closed forms
    /// `theta_0 = 1 / sum_k N/(N-k)`, `theta_k = theta_0 N/(N-k)`.
    pub theta: DVector<f64>,
    /// Upward drift `theta A0 e = lambda`.
    pub drift_in: f64,
    /// Downward drift `theta A2 e = theta_{2f} (N-2f) mu`.
    pub drift_out: f64,
}

impl StabilityReport {
    /// The mean-drift predicate `drift_in < drift_out`, evaluated
    /// independently of `rho`.
    pub fn drift_stable(&self) -> bool {
        self.drift_in < self.drift_out
    }
}

/// Decides stability via the mean-drift argument.
pub fn check_stability(params: &ModelParams) -> StabilityReport {
    let p = params.phase_count();
    let n = f64::from(params.n());
    let denom: f64 = (0..p).map(|k| n / (n - k as f64)).sum();
    let theta0 = 1.0 / denom;
    let theta = DVector::from_fn(p, |k, _| n / (n - k as f64) * theta0);
    let drift_in = params.lambda();
    let drift_out = theta[p - 1] * params.peg_rate();
    let rho = params.utilization();
    StabilityReport {
        rho,
        stable: rho < 1.0,
        theta,
        drift_in,
        drift_out,
    }
}

/// Converged rate matrix together with iteration diagnostics.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    r: DMatrix<f64>,
    /// Number of fixed-point steps taken.
    pub iterations: usize,
    /// Max-abs entry of `R^2 A2 + R A1 + A0` at return.
    pub residual: f64,
    /// Step norm of the final iteration, `max_i sum_j |R_n - R_{n-1}|`.
    pub last_step: f64,
    /// Max row sum of `R`; an upper bound on its spectral radius.
    pub spectral_radius_bound: f64,
}

impl RateMatrix {
    /// The rate matrix itself.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Block dimension `2f + 1`.
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// Power-iteration estimate of the spectral radius of `R` (the
    /// geometric decay rate of the level masses).
    pub fn spectral_radius_estimate(&self) -> f64 {
        let p = self.dim();
        let mut v = DVector::from_element(p, 1.0 / p as f64);
        let mut estimate = 0.0;
        for _ in 0..200 {
            let w = &self.r * &v;
            let norm = w.amax();
            if norm == 0.0 {
                return 0.0;
            }
            v = w / norm;
            estimate = norm;
        }
        estimate
    }
}

/// The fixed-point iteration in raw form: no stability gate, one step at a
/// time. [`compute_rate_matrix`] drives it to convergence; tests drive it
/// directly to watch iterates diverge on unstable instances.
#[derive(Debug, Clone)]
pub struct RateIteration {
    r: DMatrix<f64>,
    scratch: DMatrix<f64>,
    /// `(N - m) mu + lambda`, the diagonal of `-A1`.
    neg_a1_diag: Vec<f64>,
    /// `(N - m) mu`, the superdiagonal magnitude of `A1`.
    a1_super: Vec<f64>,
    lambda: f64,
    peg_rate: f64,
    iterations: usize,
}

impl RateIteration {
    pub fn new(blocks: &GeneratorBlocks) -> Self {
        let p = blocks.phase_count();
        RateIteration {
            r: DMatrix::zeros(p, p),
            scratch: DMatrix::zeros(p, p),
            neg_a1_diag: blocks.a1_diag().iter().map(|d| -d).collect(),
            a1_super: blocks.a1_super().to_vec(),
            lambda: blocks.a0_scalar(),
            peg_rate: blocks.a2_entry().1,
            iterations: 0,
        }
    }

    /// Current iterate.
    pub fn rate(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Max row sum of the current iterate.
    pub fn max_row_sum(&self) -> f64 {
        max_row_sum(&self.r)
    }

    /// Advances one step and returns the step norm
    /// `max_i sum_j |R_{n+1}(i,j) - R_n(i,j)|`.
    pub fn step(&mut self) -> f64 {
        let p = self.r.nrows();
        // Column 0 of R^2 A2 + A0: peg_rate * R (R e_last) + lambda e_0.
        let last_col = self.r.column(p - 1).clone_owned();
        let mut col0 = &self.r * last_col;
        col0 *= self.peg_rate;
        col0[0] += self.lambda;

        // Right-multiply by (-A1)^{-1} via the bidiagonal column sweep:
        // Y[:,0] = X[:,0] / d_0;  Y[:,j] = (X[:,j] + s_{j-1} Y[:,j-1]) / d_j
        // where X[:,j] = lambda e_j for j >= 1.
        let next = &mut self.scratch;
        let d0 = self.neg_a1_diag[0];
        for i in 0..p {
            next[(i, 0)] = col0[i] / d0;
        }
        for j in 1..p {
            let s = self.a1_super[j - 1];
            let d = self.neg_a1_diag[j];
            for i in 0..p {
                let carry = s * next[(i, j - 1)];
                let x = if i == j { self.lambda } else { 0.0 };
                next[(i, j)] = (x + carry) / d;
            }
        }

        let mut step_norm: f64 = 0.0;
        for i in 0..p {
            let mut row_diff = 0.0;
            for j in 0..p {
                let delta = next[(i, j)] - self.r[(i, j)];
                // The sequence increases entrywise from R_0 = 0.
                debug_assert!(delta >= -1e-13, "iterate lost monotonicity at ({i},{j})");
                row_diff += delta.abs();
            }
            step_norm = step_norm.max(row_diff);
        }

        std::mem::swap(&mut self.r, &mut self.scratch);
        self.iterations += 1;
        step_norm
    }

    /// Max-abs entry of `R^2 A2 + R A1 + A0` for the current iterate,
    /// evaluated directly from the block structure.
    pub fn residual(&self) -> f64 {
        let p = self.r.nrows();
        let last_col = self.r.column(p - 1).clone_owned();
        let mut col0 = &self.r * last_col;
        col0 *= self.peg_rate;
        col0[0] += self.lambda;

        let mut worst: f64 = 0.0;
        for j in 0..p {
            let d = self.neg_a1_diag[j];
            for i in 0..p {
                // (R A1)[i,j] = -d_j R[i,j] + s_{j-1} R[i,j-1]
                let mut v = -d * self.r[(i, j)];
                if j > 0 {
                    v += self.a1_super[j - 1] * self.r[(i, j - 1)];
                }
                if j == 0 {
                    v += col0[i];
                } else if i == j {
                    v += self.lambda;
                }
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    fn into_rate_matrix(self, residual: f64, last_step: f64) -> RateMatrix {
        let spectral_radius_bound = max_row_sum(&self.r);
        RateMatrix {
            r: self.r,
            iterations: self.iterations,
            residual,
            last_step,
            spectral_radius_bound,
        }
    }
}

fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes the minimal nonnegative solution of `R^2 A2 + R A1 + A0 = 0`.
///
/// Rejects unstable instances up front. Iterates until the step norm drops
/// below `tol` *and* the equation residual is below [`RESIDUAL_CEILING`];
/// if the step criterion fires first, iteration simply continues.
pub fn compute_rate_matrix(
    blocks: &GeneratorBlocks,
    tol: f64,
    max_iter: usize,
) -> Result<RateMatrix> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "tolerance must be positive and finite",
        });
    }
    if max_iter < 1 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            value: max_iter as f64,
            reason: "iteration budget must be at least 1",
        });
    }
    let report = check_stability(blocks.params());
    if !report.stable {
        return Err(Error::Unstable { rho: report.rho });
    }

    let mut it = RateIteration::new(blocks);
    let mut last_step = f64::INFINITY;
    while it.iterations() < max_iter {
        last_step = it.step();
        if last_step < tol {
            let residual = it.residual();
            if residual <= RESIDUAL_CEILING {
                return Ok(it.into_rate_matrix(residual, last_step));
            }
        }
    }
    Err(Error::IterationLimit {
        max_iter,
        last_step,
        residual: it.residual(),
    })
}

/// The matrix-geometric stationary solution: boundary pair plus rate
/// matrix. Level vectors for `k >= 2` are generated on demand.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pi0: f64,
    pi1: DVector<f64>,
    rate_matrix: RateMatrix,
}

impl StationarySolution {
    /// Probability of the empty system.
    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    /// Stationary vector of level 1.
    pub fn pi1(&self) -> &DVector<f64> {
        &self.pi1
    }

    pub fn rate_matrix(&self) -> &RateMatrix {
        &self.rate_matrix
    }

    /// Stationary vector of level `k >= 1`, computed as `pi_1 R^{k-1}` by
    /// repeated vector-matrix products.
    ///
    /// # Panics
    /// Panics if `k == 0`; level 0 is the scalar [`pi0`](Self::pi0).
    pub fn level(&self, k: usize) -> DVector<f64> {
        assert!(k >= 1, "level index must be >= 1; level 0 is pi0");
        let r = self.rate_matrix.matrix();
        let mut v = self.pi1.transpose();
        for _ in 1..k {
            v = &v * r;
        }
        v.transpose()
    }

    /// Total probability mass of level `k` (`pi0` for `k = 0`).
    pub fn level_mass(&self, k: usize) -> f64 {
        if k == 0 {
            self.pi0
        } else {
            self.level(k).sum()
        }
    }
}

/// Solves the boundary system of the stationary distribution.
///
/// The two balance equations over levels 0 and 1 overdetermine the pair
/// `(pi0, pi1)` together with the normalization by exactly one equation;
/// the level-0 balance column is dropped and replaced by the normalization
/// row `pi0 + pi1 (I-R)^{-1} e = 1`.
pub fn solve_boundary(blocks: &GeneratorBlocks, rate: RateMatrix) -> Result<StationarySolution> {
    let p = blocks.phase_count();
    let r = rate.matrix();

    // (I - R)^{-1} e by linear solve.
    let i_minus_r = DMatrix::identity(p, p) - r;
    let lu = i_minus_r.lu();
    let ones = DVector::from_element(p, 1.0);
    let weights = lu.solve(&ones).ok_or(Error::IminusRSingular {
        spectral_radius_bound: rate.spectral_radius_bound,
    })?;

    // Unknown row vector x = [pi0 | pi1] solves x M = e_0 with
    //   M[:,0]   = [1 | (I-R)^{-1} e]          (normalization)
    //   M[:,j]   = [B0_j | (A1 + R A2)[:,j]]   (level-1 balance, j >= 1)
    let mut m = DMatrix::zeros(p + 1, p + 1);
    m[(0, 0)] = 1.0;
    for i in 0..p {
        m[(1 + i, 0)] = weights[i];
    }
    let (b0_col, b0_val) = blocks.b0_entry();
    let a1_diag = blocks.a1_diag();
    let a1_super = blocks.a1_super();
    let peg = blocks.a2_entry().1;
    for j in 1..=p {
        let col = j - 1;
        if col == b0_col {
            m[(0, j)] = b0_val;
        }
        for i in 0..p {
            let mut v = 0.0;
            if i == col {
                v += a1_diag[col];
            }
            if col > 0 && i == col - 1 {
                v += a1_super[col - 1];
            }
            if col == 0 {
                // (R A2)[:,0] = peg_rate * R[:, 2f]
                v += peg * r[(i, p - 1)];
            }
            m[(1 + i, j)] = v;
        }
    }

    let mut rhs = DVector::zeros(p + 1);
    rhs[0] = 1.0;
    let mt = m.transpose();
    let solved = mt.lu().solve(&rhs).ok_or_else(|| Error::BoundarySolve {
        diagnostic: format!("boundary matrix of dimension {} is singular", p + 1),
    })?;

    let pi0 = solved[0];
    let pi1 = DVector::from_fn(p, |i, _| solved[1 + i]);
    if !pi0.is_finite() || pi0 <= 0.0 || pi1.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return Err(Error::BoundarySolve {
            diagnostic: format!(
                "boundary solution is not a probability vector (pi0 = {pi0:e}, min pi1 = {:e})",
                pi1.min()
            ),
        });
    }

    Ok(StationarySolution {
        pi0,
        pi1,
        rate_matrix: rate,
    })
}
