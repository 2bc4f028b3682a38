//! Banded LU solve with partial pivoting, LAPACK `gbsv`-style.
//!
//! The truncated-chain generator is block tridiagonal, so its transpose
//! fits in a band of `kl` subdiagonals and `ku` superdiagonals. Partial
//! pivoting widens the upper band by `kl` during factorization; storage
//! reserves that room up front.

use crate::{Error, Result};

pub(crate) struct BandedMatrix {
    n: usize,
    kl: usize,
    /// Working upper bandwidth `ku + kl` (room for pivot fill).
    kuw: usize,
    /// Column-major band storage, `ldab = kl + kuw + 1` rows per column;
    /// entry (i, j) sits at `ab[j * ldab + kuw + i - j]`.
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0);
        let kuw = ku + kl;
        BandedMatrix {
            n,
            kl,
            kuw,
            ab: vec![0.0; n * (kl + kuw + 1)],
        }
    }

    #[inline]
    fn ldab(&self) -> usize {
        self.kl + self.kuw + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(
            j + self.kl >= i && i + self.kuw >= j,
            "({i},{j}) outside band"
        );
        j * self.ldab() + (self.kuw + i - j)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.ab[self.slot(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    /// Solves `A x = b` in place, destroying the factorization. Partial
    /// pivoting keeps the elimination stable on the near-singular systems
    /// that generator minors produce.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        for j in 0..n {
            // Pivot search within the lower band of column j.
            let rmax = (j + self.kl).min(n - 1);
            let mut piv = j;
            let mut best = self.get(j, j).abs();
            for r in j + 1..=rmax {
                let v = self.get(r, j).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem(format!(
                    "zero pivot in banded LU at column {j} of {n}"
                )));
            }
            if piv != j {
                let cmax = (j + self.kuw).min(n - 1);
                for c in j..=cmax {
                    let a = self.get(j, c);
                    let bb = self.get(piv, c);
                    self.set(j, c, bb);
                    self.set(piv, c, a);
                }
                b.swap(j, piv);
            }
            let pivot = self.get(j, j);
            let cmax = (j + self.kuw).min(n - 1);
            for r in j + 1..=rmax {
                let factor = self.get(r, j) / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.set(r, j, 0.0);
                for c in j + 1..=cmax {
                    let upd = self.get(r, c) - factor * self.get(j, c);
                    self.set(r, c, upd);
                }
                b[r] -= factor * b[j];
            }
        }
        // Back substitution.
        for j in (0..n).rev() {
            let cmax = (j + self.kuw).min(n - 1);
            let mut acc = b[j];
            for c in j + 1..=cmax {
                acc -= self.get(j, c) * b[c];
            }
            b[j] = acc / self.get(j, j);
        }
        Ok(b)
    }
}
