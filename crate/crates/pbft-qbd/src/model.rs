//! Model parameters and the block structure of the QBD generator.
//!
//! The consensus queue is a two-dimensional continuous-time Markov process
//! `(K(t), M(t))`: `K` counts transaction packages waiting at the client
//! (the *level*), `M` counts nodes that have verified the in-progress
//! package (the *phase*, `0..=2f`). Ordered by level, the generator is
//! block tridiagonal:
//!
//! ```text
//!     | B1 B0          |
//!     | B2 A1 A0       |
//! Q = |    A2 A1 A0    |
//!     |       ..  ..   |
//! ```
//!
//! with a scalar level 0 (empty system) and `2f+1` phases per level above
//! it. All blocks are sparse: `A0` is diagonal, `A1` upper bidiagonal, and
//! `A2`, `B0`, `B2` each carry a single nonzero. This module stores them in
//! that structured form; dense expansions exist for tests and for callers
//! that want the raw matrices.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::{Error, Result};

/// The five scalars defining one instance of the consensus queue.
///
/// `n` is always derived as `3f + 1` and cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    lambda: f64,
    mu: f64,
    f: u32,
    n: u32,
    c: f64,
}

impl ModelParams {
    /// Validates and builds a parameter set; `n` is derived as `3f + 1`.
    pub fn new(lambda: f64, mu: f64, f: u32, c: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "arrival rate must be positive and finite",
            });
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "service rate must be positive and finite",
            });
        }
        if f < 1 {
            return Err(Error::InvalidParameter {
                name: "f",
                value: f64::from(f),
                reason: "Byzantine node count must be at least 1",
            });
        }
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                reason: "block reward must be nonnegative and finite",
            });
        }
        Ok(ModelParams {
            lambda,
            mu,
            f,
            n: 3 * f + 1,
            c,
        })
    }

    /// Arrival rate of transaction packages.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Per-node rate of completing the three consensus stages.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Maximum number of Byzantine nodes.
    pub fn f(&self) -> u32 {
        self.f
    }

    /// Total node count, always `3f + 1`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Block reward paid to the major node per pegged block.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Number of phases per level, `2f + 1`.
    pub fn phase_count(&self) -> usize {
        2 * self.f as usize + 1
    }

    /// Rate at which the phase advances out of phase `m`: `(N - m) mu`.
    ///
    /// For `m = 2f` this is the block-pegging rate.
    pub fn phase_rate(&self, m: usize) -> f64 {
        debug_assert!(m < self.phase_count());
        (self.n as f64 - m as f64) * self.mu
    }

    /// Block-pegging rate `(N - 2f) mu`, the phase-`2f` exit rate.
    pub fn peg_rate(&self) -> f64 {
        self.phase_rate(self.phase_count() - 1)
    }

    /// Utilization `rho = (lambda / mu) * sum_{k=0}^{2f} 1 / (N - k)`,
    /// computed by direct summation. The instance is stable iff `rho < 1`.
    pub fn utilization(&self) -> f64 {
        let n = self.n as f64;
        let sum: f64 = (0..self.phase_count()).map(|k| 1.0 / (n - k as f64)).sum();
        self.lambda / self.mu * sum
    }
}

/// The six generator blocks in structured storage.
///
/// `a1` is kept as its diagonal and superdiagonal; `a2`, `b0` and `b2` are
/// single nonzero entries recoverable from the parameters. Dense
/// expansions reproduce the full matrices entry for entry.
#[derive(Debug, Clone)]
pub struct GeneratorBlocks {
    params: ModelParams,
    a1_diag: Vec<f64>,
    a1_super: Vec<f64>,
}

impl GeneratorBlocks {
    /// Builds the blocks for a validated parameter set.
    pub fn new(params: ModelParams) -> Self {
        let p = params.phase_count();
        let a1_diag = (0..p)
            .map(|m| -params.phase_rate(m) - params.lambda())
            .collect();
        let a1_super = (0..p - 1).map(|m| params.phase_rate(m)).collect();
        GeneratorBlocks {
            params,
            a1_diag,
            a1_super,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of phases per level (the block dimension).
    pub fn phase_count(&self) -> usize {
        self.params.phase_count()
    }

    /// The scalar level-0 block, `-lambda`.
    pub fn b1(&self) -> f64 {
        -self.params.lambda()
    }

    /// The single nonzero of `B0` as (column, value): `(0, lambda)`.
    pub fn b0_entry(&self) -> (usize, f64) {
        (0, self.params.lambda())
    }

    /// The single nonzero of `B2` as (row, value): `(2f, (N-2f) mu)`.
    pub fn b2_entry(&self) -> (usize, f64) {
        (self.phase_count() - 1, self.params.peg_rate())
    }

    /// The diagonal value of `A0 = lambda I`.
    pub fn a0_scalar(&self) -> f64 {
        self.params.lambda()
    }

    /// Diagonal of `A1`: entry `m` is `-(N - m) mu - lambda`.
    pub fn a1_diag(&self) -> &[f64] {
        &self.a1_diag
    }

    /// Superdiagonal of `A1`: entry `m` is `(N - m) mu`, at `(m, m+1)`.
    pub fn a1_super(&self) -> &[f64] {
        &self.a1_super
    }

    /// The single nonzero of `A2` as ((row, column), value):
    /// `((2f, 0), (N-2f) mu)`.
    pub fn a2_entry(&self) -> ((usize, usize), f64) {
        ((self.phase_count() - 1, 0), self.params.peg_rate())
    }

    /// Dense `A0`.
    pub fn a0_dense(&self) -> DMatrix<f64> {
        DMatrix::identity(self.phase_count(), self.phase_count()) * self.a0_scalar()
    }

    /// Dense `A1`.
    pub fn a1_dense(&self) -> DMatrix<f64> {
        let p = self.phase_count();
        let mut a1 = DMatrix::zeros(p, p);
        for m in 0..p {
            a1[(m, m)] = self.a1_diag[m];
            if m + 1 < p {
                a1[(m, m + 1)] = self.a1_super[m];
            }
        }
        a1
    }

    /// Dense `A2`.
    pub fn a2_dense(&self) -> DMatrix<f64> {
        let p = self.phase_count();
        let mut a2 = DMatrix::zeros(p, p);
        let ((i, j), v) = self.a2_entry();
        a2[(i, j)] = v;
        a2
    }

    /// Dense `B0` row vector.
    pub fn b0_dense(&self) -> RowDVector<f64> {
        let mut b0 = RowDVector::zeros(self.phase_count());
        let (j, v) = self.b0_entry();
        b0[j] = v;
        b0
    }

    /// Dense `B2` column vector.
    pub fn b2_dense(&self) -> DVector<f64> {
        let mut b2 = DVector::zeros(self.phase_count());
        let (i, v) = self.b2_entry();
        b2[i] = v;
        b2
    }

    /// Dense `A = A0 + A1 + A2`, the phase process generator used by the
    /// mean-drift stability argument.
    pub fn a_dense(&self) -> DMatrix<f64> {
        self.a0_dense() + self.a1_dense() + self.a2_dense()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(lambda: f64, mu: f64, f: u32) -> ModelParams {
        ModelParams::new(lambda, mu, f, 0.0).unwrap()
    }

    #[test]
    fn n_is_derived_from_f() {
        let p = ModelParams::new(1.0, 3.0, 50, 12.5).unwrap();
        assert_eq!(p.n(), 151);
        assert_eq!(p.phase_count(), 101);

        let p = ModelParams::new(1.0, 1.0, 1, 0.0).unwrap();
        assert_eq!(p.n(), 4);
    }

    #[test]
    fn validation_rejects_each_parameter_distinctly() {
        let name = |r: Result<ModelParams>| match r.unwrap_err() {
            Error::InvalidParameter { name, .. } => name,
            other => panic!("expected InvalidParameter, got {other:?}"),
        };
        assert_eq!(name(ModelParams::new(0.0, 1.0, 1, 0.0)), "lambda");
        assert_eq!(name(ModelParams::new(-1.0, 1.0, 1, 0.0)), "lambda");
        assert_eq!(name(ModelParams::new(1.0, 0.0, 1, 0.0)), "mu");
        assert_eq!(name(ModelParams::new(1.0, 3.0, 0, 12.5)), "f");
        assert_eq!(name(ModelParams::new(1.0, 1.0, 1, -0.5)), "c");
        assert_eq!(name(ModelParams::new(f64::NAN, 1.0, 1, 0.0)), "lambda");
    }

    #[test]
    fn f1_blocks_match_hand_expansion() {
        // lambda=1, mu=1, f=1, N=4.
        let b = GeneratorBlocks::new(params(1.0, 1.0, 1));
        let a1 = b.a1_dense();
        let expect =
            DMatrix::from_row_slice(3, 3, &[-5.0, 4.0, 0.0, 0.0, -4.0, 3.0, 0.0, 0.0, -3.0]);
        assert_eq!(a1, expect);

        let a2 = b.a2_dense();
        assert_eq!(a2[(2, 0)], 2.0);
        assert_eq!(a2.iter().filter(|&&v| v != 0.0).count(), 1);

        assert_eq!(b.b2_dense().as_slice(), &[0.0, 0.0, 2.0]);
        assert_eq!(b.b0_dense().transpose().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(b.b1(), -1.0);
    }

    #[test]
    fn a0_is_lambda_identity() {
        for (lambda, f) in [(0.5, 1), (2.0, 3), (1.0, 5)] {
            let b = GeneratorBlocks::new(params(lambda, 1.0, f));
            let a0 = b.a0_dense();
            assert_eq!(
                a0,
                DMatrix::identity(b.phase_count(), b.phase_count()) * lambda
            );
        }
    }

    #[test]
    fn utilization_known_values() {
        // Direct evaluations of the stability formula.
        assert_abs_diff_eq!(
            params(1.0, 1.0, 1).utilization(),
            13.0 / 12.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            params(1.0, 2.0, 1).utilization(),
            13.0 / 24.0,
            epsilon = 1e-15
        );
        // f = 50: (1/3) * sum_{k=0}^{100} 1/(151-k); frozen from exact
        // rational evaluation.
        assert_abs_diff_eq!(
            params(1.0, 3.0, 50).utilization(),
            0.366_199_255_623_581_7,
            epsilon = 1e-14
        );
    }

    #[test]
    fn utilization_monotone_in_each_parameter() {
        let lambdas = [0.5, 1.0, 1.5, 2.0];
        let mus = [1.0, 2.0, 3.0];
        let fs = [1, 2, 3, 5];
        for &mu in &mus {
            for &f in &fs {
                for w in lambdas.windows(2) {
                    assert!(params(w[0], mu, f).utilization() < params(w[1], mu, f).utilization());
                }
            }
        }
        for &lambda in &lambdas {
            for &f in &fs {
                for w in mus.windows(2) {
                    assert!(
                        params(lambda, w[0], f).utilization()
                            > params(lambda, w[1], f).utilization()
                    );
                }
            }
        }
        for &lambda in &lambdas {
            for &mu in &mus {
                for w in fs.windows(2) {
                    assert!(
                        params(lambda, mu, w[0]).utilization()
                            < params(lambda, mu, w[1]).utilization()
                    );
                }
            }
        }
    }

    /// Assembles the dense truncated generator over levels `0..=levels`
    /// from the dense block expansions (test-side route, independent of
    /// the oracle's assembly).
    pub(crate) fn dense_truncated_q(blocks: &GeneratorBlocks, levels: usize) -> DMatrix<f64> {
        let p = blocks.phase_count();
        let dim = 1 + levels * p;
        let mut q = DMatrix::zeros(dim, dim);
        q[(0, 0)] = blocks.b1();
        let b0 = blocks.b0_dense();
        let b2 = blocks.b2_dense();
        let a0 = blocks.a0_dense();
        let a1 = blocks.a1_dense();
        let a2 = blocks.a2_dense();
        let base = |k: usize| 1 + (k - 1) * p;
        if levels >= 1 {
            q.view_mut((0, base(1)), (1, p)).copy_from(&b0);
            q.view_mut((base(1), 0), (p, 1)).copy_from(&b2);
        }
        for k in 1..=levels {
            q.view_mut((base(k), base(k)), (p, p)).copy_from(&a1);
            if k >= 2 {
                q.view_mut((base(k), base(k - 1)), (p, p)).copy_from(&a2);
            }
            if k < levels {
                q.view_mut((base(k), base(k + 1)), (p, p)).copy_from(&a0);
            }
        }
        q
    }

    #[test]
    fn truncated_generator_rows_sum_to_zero_except_last_level() {
        for f in [1, 2, 3] {
            for levels in [2usize, 5, 10] {
                let blocks = GeneratorBlocks::new(params(2.0, 1.0, f));
                let q = dense_truncated_q(&blocks, levels);
                let p = blocks.phase_count();
                let last_level_start = 1 + (levels - 1) * p;
                for i in 0..q.nrows() {
                    let row_sum: f64 = q.row(i).iter().sum();
                    if i < last_level_start {
                        assert_abs_diff_eq!(row_sum, 0.0, epsilon = 1e-12);
                    } else {
                        // Last level misses its A0 outflow of lambda.
                        assert_abs_diff_eq!(row_sum, -blocks.a0_scalar(), epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_q_signs() {
        let blocks = GeneratorBlocks::new(params(1.5, 0.7, 2));
        let q = dense_truncated_q(&blocks, 4);
        for i in 0..q.nrows() {
            for j in 0..q.ncols() {
                if i == j {
                    assert!(q[(i, j)] < 0.0, "diagonal must be negative at {i}");
                } else {
                    assert!(
                        q[(i, j)] >= 0.0,
                        "off-diagonal must be nonnegative at ({i},{j})"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn block_structure_holds_for_all_f(
            lambda in 0.1f64..10.0,
            mu in 0.1f64..10.0,
            f in 1u32..8,
        ) {
            let blocks = GeneratorBlocks::new(params(lambda, mu, f));
            let p = blocks.phase_count();
            prop_assert_eq!(p, 2 * f as usize + 1);

            // a1 upper bidiagonal, a2/b0/b2 singletons.
            let a1 = blocks.a1_dense();
            for i in 0..p {
                for j in 0..p {
                    if j != i && j != i + 1 {
                        prop_assert_eq!(a1[(i, j)], 0.0);
                    }
                }
            }
            prop_assert_eq!(blocks.a2_dense().iter().filter(|&&v| v != 0.0).count(), 1);
            prop_assert_eq!(blocks.b0_dense().iter().filter(|&&v| v != 0.0).count(), 1);
            prop_assert_eq!(blocks.b2_dense().iter().filter(|&&v| v != 0.0).count(), 1);

            // Interior row sums vanish: a2 + a1 + a0 rows.
            let row_sums = blocks.a2_dense() + blocks.a1_dense() + blocks.a0_dense();
            for i in 0..p {
                let s: f64 = row_sums.row(i).iter().sum();
                prop_assert!(s.abs() < 1e-10 * (lambda + blocks.params().n() as f64 * mu));
            }

            // Level-0 row: b1 + sum(b0) = 0.
            prop_assert!((blocks.b1() + blocks.b0_dense().iter().sum::<f64>()).abs() < 1e-12);
        }
    }
}
