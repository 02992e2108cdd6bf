//! Per-level Newton–Raphson solve of the discrete measurement residual
//!
//! ```text
//! F(p^{k+1}) = h * sum_{i=1}^{N-1} u_i^{k+1}(p^{k+1}) ω_i - g^{k+1}
//! ```
//!
//! with the exact derivative obtained from the sensitivity `s = du/dp`,
//! which solves the step matrix against `-tau * u^{k+1}`.

use crate::error::{check_len, Error, Result};
use crate::forward::{with_zero_boundary, CrankNicolson};
use crate::integration::reconstruct_p;
use crate::model::{CoefficientTrace, Field, Grid, ProblemData};
use crate::quadrature::weighted_integral;
use crate::scalar::Scalar;

/// Derivatives smaller than this abort the iteration.
pub const DERIVATIVE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig<T> {
    /// Stop once `|F| < tol`.
    pub tol: T,
    pub max_iter: usize,
    /// Value used for `p^0`; `None` reconstructs it from the initial row.
    pub p_init: Option<T>,
}

impl<T: Scalar> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 50,
            p_init: None,
        }
    }
}

impl<T: Scalar> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let Some(p) = self.p_init {
            if !p.is_finite() {
                return Err(Error::InvalidConfig("p_init must be finite".into()));
            }
        }
        Ok(())
    }
}

/// `F` at level `k` for the given solution row.
pub fn residual<T: Scalar>(u_row: &[T], data: &ProblemData<T>, k: usize) -> Result<T> {
    check_len("u row", data.grid().n() + 1, u_row.len())?;
    Ok(weighted_integral(u_row, data.omega(), data.grid().h())? - data.g()[k])
}

/// `du^{k+1}/dp^{k+1}` with zero boundary values.
pub fn sensitivity_step<T: Scalar>(grid: &Grid<T>, p_next: T, u_next: &[T]) -> Result<Vec<T>> {
    check_len("u row", grid.n() + 1, u_next.len())?;
    let scheme = CrankNicolson::from_grid(grid);
    let lu = scheme.matrix(p_next, grid.n() - 1)?.factor()?;
    sensitivity_from(&lu, grid.tau(), u_next)
}

fn sensitivity_from<T: Scalar>(lu: &crate::tridiag::TridiagonalFactor<T>, tau: T, u_next: &[T]) -> Result<Vec<T>> {
    let rhs: Vec<T> = u_next[1..u_next.len() - 1].iter().map(|&u| -tau * u).collect();
    Ok(with_zero_boundary(&lu.solve(&rhs)?))
}

/// `F'(p) = h * sum s_i ω_i`.
pub fn residual_derivative<T: Scalar>(s: &[T], data: &ProblemData<T>) -> Result<T> {
    check_len("sensitivity", data.grid().n() + 1, s.len())?;
    weighted_integral(s, data.omega(), data.grid().h())
}

/// Converged result of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep<T> {
    pub p: T,
    pub row: Vec<T>,
    /// Number of Newton updates applied.
    pub iterations: usize,
    pub residual: T,
}

/// Solves for level `k+1` given row `k`, starting from `p_guess`.
pub fn newton_step_solve<T: Scalar>(
    data: &ProblemData<T>,
    k: usize,
    u_prev: &[T],
    p_guess: T,
    cfg: &NewtonConfig<T>,
) -> Result<NewtonStep<T>> {
    cfg.validate()?;
    let grid = data.grid();
    if k >= grid.m() {
        return Err(Error::Degenerate(format!(
            "no time level after k = {k} on a grid with M = {}",
            grid.m()
        )));
    }
    check_len("u row", grid.n() + 1, u_prev.len())?;
    let index = k + 1;
    let scheme = CrankNicolson::from_grid(grid);
    let f = data.f();
    // The explicit side does not depend on the trial coefficient.
    let rhs = scheme.rhs(u_prev, f.row(k), f.row(index))?;
    let mut p = p_guess;
    for j in 0..=cfg.max_iter {
        let lu = scheme.matrix(p, rhs.len())?.factor()?;
        let row = with_zero_boundary(&lu.solve(&rhs)?);
        let r = residual(&row, data, index)?;
        if r.abs() < cfg.tol {
            return Ok(NewtonStep {
                p,
                row,
                iterations: j,
                residual: r,
            });
        }
        if j == cfg.max_iter || !r.is_finite() {
            return Err(Error::NoConvergence {
                index,
                iterations: j,
                p: p.as_f64(),
                residual: r.as_f64(),
            });
        }
        let s = sensitivity_from(&lu, grid.tau(), &row)?;
        let dr = residual_derivative(&s, data)?;
        if dr.is_nan() || dr.abs() < T::lit(DERIVATIVE_FLOOR) {
            return Err(Error::DerivativeUnderflow {
                index,
                iteration: j,
                p: p.as_f64(),
                residual: r.as_f64(),
                derivative: dr.as_f64(),
            });
        }
        p = p - r / dr;
    }
    unreachable!("loop returns on its last iteration")
}

/// Full Newton identification, possibly cut short.
#[derive(Debug, Clone)]
pub struct NewtonRun<T> {
    /// Rows `0..=last`, where `last` is the final completed level.
    pub field: Field<T>,
    pub trace: CoefficientTrace<T>,
    /// Updates per level; entry `k` belongs to level `k+1`.
    pub iterations: Vec<usize>,
    /// Final residual per level, same indexing as `iterations`.
    pub residuals: Vec<T>,
}

impl<T: Scalar> NewtonRun<T> {
    pub fn completed_levels(&self) -> usize {
        self.trace.len()
    }
}

/// Runs all levels, warm-starting each from the previous coefficient.
pub fn run_newton<T: Scalar>(data: &ProblemData<T>, cfg: &NewtonConfig<T>) -> Result<NewtonRun<T>> {
    match run_newton_partial(data, cfg) {
        (run, None) => Ok(run),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`run_newton`] but keeps the levels computed before a failure.
pub fn run_newton_partial<T: Scalar>(data: &ProblemData<T>, cfg: &NewtonConfig<T>) -> (NewtonRun<T>, Option<Error>) {
    let grid = data.grid();
    let mut field = Field::with_first_row(data.phi(), grid.m() + 1);
    let mut p = Vec::with_capacity(grid.m() + 1);
    let mut iterations = Vec::with_capacity(grid.m());
    let mut residuals = Vec::with_capacity(grid.m());

    let finish = |mut field: Field<T>, p: Vec<T>, iterations, residuals, err| {
        field.truncate_rows(p.len().max(1));
        let run = NewtonRun {
            field,
            trace: CoefficientTrace::new(p).expect("accepted iterates are finite"),
            iterations,
            residuals,
        };
        (run, err)
    };

    if let Err(e) = cfg.validate() {
        return finish(field, p, iterations, residuals, Some(e));
    }
    let p0 = match cfg.p_init {
        Some(v) => Ok(v),
        None => reconstruct_p(data.phi(), data.f().row(0), data, 0),
    };
    match p0 {
        Ok(v) => p.push(v),
        Err(e) => return finish(field, p, iterations, residuals, Some(e)),
    }

    for k in 0..grid.m() {
        match newton_step_solve(data, k, field.row(k), p[k], cfg) {
            Ok(step) => {
                field.row_mut(k + 1).copy_from_slice(&step.row);
                p.push(step.p);
                iterations.push(step.iterations);
                residuals.push(step.residual);
            }
            Err(e) => {
                let e = Error::at_step(k + 1, e);
                return finish(field, p, iterations, residuals, Some(e));
            }
        }
    }
    finish(field, p, iterations, residuals, None)
}
