//! Crank–Nicolson time stepping for `u_t = u_xx - p(t) u + f` with
//! homogeneous Dirichlet conditions.
//!
//! One step from level `k` to `k+1` solves, for interior nodes,
//!
//! ```text
//! (1 + r + tau p) u_i^{k+1} - r/2 (u_{i+1}^{k+1} + u_{i-1}^{k+1})
//!     = (1 - r) u_i^k + r/2 (u_{i+1}^k + u_{i-1}^k) + tau/2 (f_i^{k+1} + f_i^k)
//! ```
//!
//! with `r = tau / h^2`. The coefficient enters at the new level only.

use crate::error::{check_len, Error, Result};
use crate::model::{CoefficientTrace, Field, Grid, ProblemData};
use crate::scalar::Scalar;
use crate::tridiag::{TridiagonalMatrix, TridiagonalSystem};

/// Step sizes of the scheme; the grid extent is irrelevant to a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrankNicolson<T> {
    h: T,
    tau: T,
}

impl<T: Scalar> CrankNicolson<T> {
    pub fn new(h: T, tau: T) -> Self {
        Self { h, tau }
    }

    pub fn from_grid(grid: &Grid<T>) -> Self {
        Self::new(grid.h(), grid.tau())
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Mesh ratio `tau / h^2`.
    pub fn ratio(&self) -> T {
        self.tau / (self.h * self.h)
    }

    /// Implicit-side matrix for `interior` unknowns. The Newton sensitivity
    /// system is solved with this same matrix.
    pub fn matrix(&self, p_next: T, interior: usize) -> Result<TridiagonalMatrix<T>> {
        let r = self.ratio();
        let off = -r / T::lit(2.0);
        TridiagonalMatrix::toeplitz(interior, off, T::one() + r + self.tau * p_next, off)
    }

    /// Explicit side of the step for interior nodes `1..N`.
    pub fn rhs(&self, u_prev: &[T], f_prev: &[T], f_next: &[T]) -> Result<Vec<T>> {
        let nodes = u_prev.len();
        if nodes < 3 {
            return Err(Error::Degenerate(format!(
                "a step needs at least one interior node, got {nodes} nodes"
            )));
        }
        check_len("f at previous level", nodes, f_prev.len())?;
        check_len("f at next level", nodes, f_next.len())?;
        let r = self.ratio();
        let half = T::lit(0.5);
        Ok((1..nodes - 1)
            .map(|i| {
                (T::one() - r) * u_prev[i]
                    + r * half * (u_prev[i + 1] + u_prev[i - 1])
                    + self.tau * half * (f_next[i] + f_prev[i])
            })
            .collect())
    }

    pub fn assemble(&self, p_next: T, u_prev: &[T], f_prev: &[T], f_next: &[T]) -> Result<TridiagonalSystem<T>> {
        let rhs = self.rhs(u_prev, f_prev, f_next)?;
        let matrix = self.matrix(p_next, rhs.len())?;
        Ok(TridiagonalSystem { matrix, rhs })
    }

    /// Advances one level; boundary entries of the result are zero.
    pub fn step(&self, p_next: T, u_prev: &[T], f_prev: &[T], f_next: &[T]) -> Result<Vec<T>> {
        let sys = self.assemble(p_next, u_prev, f_prev, f_next)?;
        let interior = sys.matrix.factor()?.solve(&sys.rhs)?;
        Ok(with_zero_boundary(&interior))
    }
}

/// Pads interior values with the Dirichlet zeros.
pub(crate) fn with_zero_boundary<T: Scalar>(interior: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(interior.len() + 2);
    out.push(T::zero());
    out.extend_from_slice(interior);
    out.push(T::zero());
    out
}

fn check_grid_rows<T: Scalar>(grid: &Grid<T>, u_prev: &[T], f_prev: &[T], f_next: &[T]) -> Result<()> {
    let nodes = grid.n() + 1;
    check_len("u at previous level", nodes, u_prev.len())?;
    check_len("f at previous level", nodes, f_prev.len())?;
    check_len("f at next level", nodes, f_next.len())
}

/// Tridiagonal system of one step on `grid`.
pub fn assemble_step<T: Scalar>(
    grid: &Grid<T>,
    p_next: T,
    u_prev: &[T],
    f_prev: &[T],
    f_next: &[T],
) -> Result<TridiagonalSystem<T>> {
    check_grid_rows(grid, u_prev, f_prev, f_next)?;
    CrankNicolson::from_grid(grid).assemble(p_next, u_prev, f_prev, f_next)
}

/// One step on `grid`, returning the full row including boundary zeros.
pub fn step<T: Scalar>(grid: &Grid<T>, p_next: T, u_prev: &[T], f_prev: &[T], f_next: &[T]) -> Result<Vec<T>> {
    check_grid_rows(grid, u_prev, f_prev, f_next)?;
    CrankNicolson::from_grid(grid).step(p_next, u_prev, f_prev, f_next)
}

/// Solves the direct problem for a known coefficient trace.
///
/// Row `k+1` is produced with `p[k+1]` in the implicit matrix.
pub fn solve_forward<T: Scalar>(data: &ProblemData<T>, p: &CoefficientTrace<T>) -> Result<Field<T>> {
    let grid = data.grid();
    check_len("coefficient trace", grid.m() + 1, p.len())?;
    let scheme = CrankNicolson::from_grid(grid);
    let f = data.f();
    let mut u = Field::with_first_row(data.phi(), grid.m() + 1);
    for k in 0..grid.m() {
        let next = scheme
            .step(p[k + 1], u.row(k), f.row(k), f.row(k + 1))
            .map_err(|e| Error::at_step(k + 1, e))?;
        u.row_mut(k + 1).copy_from_slice(&next);
    }
    Ok(u)
}
