//! Error norms against a known solution and observed convergence orders.

use crate::error::{check_len, Error, Result};
use crate::model::{CoefficientTrace, Field, Grid};
use crate::scalar::Scalar;

/// Final-time errors in `u` and whole-trace errors in `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    /// `max_i |u_i^M - U_i^M|`
    pub er_u: T,
    /// `max_k |p^k - P^k|`
    pub er_p: T,
    /// `sqrt(h * sum_{i=0}^{N} (u_i^M - U_i^M)^2)`
    pub l2_u: T,
    /// `sqrt(tau * sum_{k=0}^{M} (p^k - P^k)^2)`
    pub l2_p: T,
}

pub fn error_report<T: Scalar>(
    u: &Field<T>,
    p: &CoefficientTrace<T>,
    exact_u: &Field<T>,
    exact_p: &CoefficientTrace<T>,
    grid: &Grid<T>,
) -> Result<ErrorReport<T>> {
    let (levels, nodes) = (grid.m() + 1, grid.n() + 1);
    check_len("u rows", levels, u.n_rows())?;
    check_len("u columns", nodes, u.n_cols())?;
    check_len("exact u rows", levels, exact_u.n_rows())?;
    check_len("exact u columns", nodes, exact_u.n_cols())?;
    check_len("p", levels, p.len())?;
    check_len("exact p", levels, exact_p.len())?;

    let (er_u, ss_u) = max_and_sum_sq(u.last_row(), exact_u.last_row());
    let (er_p, ss_p) = max_and_sum_sq(p.as_slice(), exact_p.as_slice());
    Ok(ErrorReport {
        er_u,
        er_p,
        l2_u: (grid.h() * ss_u).sqrt(),
        l2_p: (grid.tau() * ss_p).sqrt(),
    })
}

fn max_and_sum_sq<T: Scalar>(a: &[T], b: &[T]) -> (T, T) {
    a.iter().zip(b).fold((T::zero(), T::zero()), |(mx, ss), (&x, &y)| {
        let d = (x - y).abs();
        (mx.max(d), ss + d * d)
    })
}

/// Least-squares slope of `log(error)` against `log(step)`.
pub fn measured_order<T: Scalar>(errors: &[T], steps: &[T]) -> Result<T> {
    check_len("steps", errors.len(), steps.len())?;
    if errors.len() < 2 {
        return Err(Error::Degenerate("need at least two points to fit an order".into()));
    }
    if steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Degenerate("steps must be strictly decreasing".into()));
    }
    if errors.iter().chain(steps).any(|v| !v.is_finite() || *v <= T::zero()) {
        return Err(Error::Degenerate("errors and steps must be positive and finite".into()));
    }
    let n = T::from_count(errors.len());
    let xs: Vec<T> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<T> = errors.iter().map(|e| e.ln()).collect();
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mx, my) = (mean(&xs), mean(&ys));
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}
