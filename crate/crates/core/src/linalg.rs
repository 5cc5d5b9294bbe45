//! Dense LU factorization with partial pivoting for the small kernel systems
//! solved during interpolant fitting.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct Lu<T> {
    n: usize,
    // Row-major; L below the diagonal (unit diagonal implied), U on and above.
    lu: Vec<T>,
    perm: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ZeroPivot {
    pub column: usize,
}

impl<T: Scalar> Lu<T> {
    /// Factorizes a row-major `n x n` matrix.
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self, ZeroPivot> {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == T::zero() || !pivot_abs.is_finite() {
                return Err(ZeroPivot { column: k });
            }
            if pivot_row != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = a[k * n + k];
            for r in (k + 1)..n {
                let factor = a[r * n + k] / pivot;
                a[r * n + k] = factor;
                if factor != T::zero() {
                    for c in (k + 1)..n {
                        let u = a[k * n + c];
                        a[r * n + c] -= factor * u;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in (r + 1)..n {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }

    /// 1-norm condition number `||A||_1 * ||A^-1||_1`, with the inverse formed
    /// column by column.
    pub fn condition_1(&self, a: &[T]) -> T {
        let n = self.n;
        let norm_a = one_norm(n, a);
        let mut norm_inv = T::zero();
        let mut e = vec![T::zero(); n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[c] = T::one();
            let col = self.solve(&e);
            let s = col.iter().fold(T::zero(), |acc, v| acc + v.abs());
            if s > norm_inv || s.is_nan() {
                norm_inv = s;
            }
        }
        norm_a * norm_inv
    }
}

fn one_norm<T: Scalar>(n: usize, a: &[T]) -> T {
    (0..n)
        .map(|c| (0..n).fold(T::zero(), |acc, r| acc + a[r * n + c].abs()))
        .fold(T::zero(), T::max)
}
