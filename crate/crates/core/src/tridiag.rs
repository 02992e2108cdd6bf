//! Tridiagonal systems and the Thomas algorithm.

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// The three diagonals of a tridiagonal matrix of order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
}

impl<T: Scalar> TridiagonalMatrix<T> {
    pub fn new(sub: Vec<T>, diag: Vec<T>, sup: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Degenerate("tridiagonal matrix of order 0".into()));
        }
        let n = diag.len();
        check_len("sub-diagonal", n - 1, sub.len())?;
        check_len("super-diagonal", n - 1, sup.len())?;
        Ok(Self { sub, diag, sup })
    }

    /// Constant-coefficient (Toeplitz) matrix.
    pub fn toeplitz(n: usize, sub: T, diag: T, sup: T) -> Result<Self> {
        Self::new(
            vec![sub; n.saturating_sub(1)],
            vec![diag; n],
            vec![sup; n.saturating_sub(1)],
        )
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// `A x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        let n = self.order();
        check_len("operand", n, x.len())?;
        Ok((0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc = acc + self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect())
    }

    /// Strict row diagonal dominance.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| {
            let left = if i > 0 { self.sub[i - 1].abs() } else { T::zero() };
            let right = if i + 1 < n { self.sup[i].abs() } else { T::zero() };
            self.diag[i].abs() > left + right
        })
    }

    /// Forward elimination, kept for repeated solves with the same matrix.
    pub fn factor(&self) -> Result<TridiagonalFactor<T>> {
        let n = self.order();
        let mut upper = Vec::with_capacity(n - 1);
        let mut pivots = Vec::with_capacity(n);
        let mut prev_upper = T::zero();
        for i in 0..n {
            let coupling = if i > 0 { self.sub[i - 1] * prev_upper } else { T::zero() };
            let pivot = self.diag[i] - coupling;
            let scale = self.diag[i].abs() + coupling.abs();
            if !pivot.is_finite() || pivot.abs() <= T::epsilon() * scale || pivot == T::zero() {
                return Err(Error::ZeroPivot { row: i });
            }
            pivots.push(pivot);
            if i + 1 < n {
                prev_upper = self.sup[i] / pivot;
                upper.push(prev_upper);
            }
        }
        Ok(TridiagonalFactor {
            sub: self.sub.clone(),
            upper,
            pivots,
        })
    }
}

/// `A = L U` with unit-upper `U`; `upper` holds its super-diagonal.
#[derive(Debug, Clone)]
pub struct TridiagonalFactor<T> {
    sub: Vec<T>,
    upper: Vec<T>,
    pivots: Vec<T>,
}

impl<T: Scalar> TridiagonalFactor<T> {
    pub fn order(&self) -> usize {
        self.pivots.len()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.order();
        check_len("right-hand side", n, rhs.len())?;
        let mut x = Vec::with_capacity(n);
        let mut prev = T::zero();
        for i in 0..n {
            let carry = if i > 0 { self.sub[i - 1] * prev } else { T::zero() };
            prev = (rhs[i] - carry) / self.pivots[i];
            x.push(prev);
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - self.upper[i] * x[i + 1];
        }
        Ok(x)
    }
}

/// A tridiagonal matrix with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem<T> {
    pub matrix: TridiagonalMatrix<T>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> TridiagonalSystem<T> {
    pub fn new(sub: Vec<T>, diag: Vec<T>, sup: Vec<T>, rhs: Vec<T>) -> Result<Self> {
        let matrix = TridiagonalMatrix::new(sub, diag, sup)?;
        check_len("right-hand side", matrix.order(), rhs.len())?;
        Ok(Self { matrix, rhs })
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn sub(&self) -> &[T] {
        &self.matrix.sub
    }

    pub fn diag(&self) -> &[T] {
        &self.matrix.diag
    }

    pub fn sup(&self) -> &[T] {
        &self.matrix.sup
    }
}

/// Solves the system by the Thomas algorithm (no pivoting, `O(n)`).
pub fn thomas_solve<T: Scalar>(sys: &TridiagonalSystem<T>) -> Result<Vec<T>> {
    sys.matrix.factor()?.solve(&sys.rhs)
}
