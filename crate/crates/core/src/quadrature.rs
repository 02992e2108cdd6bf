//! Spatial quadrature for the weighted integrals of the measurement.

use crate::error::{check_len, Result};
use crate::scalar::Scalar;

/// `h * sum_{i=1}^{N-1} values_i * weights_i`.
///
/// The boundary nodes are skipped; for weights vanishing at both ends this is
/// the composite trapezoidal rule.
pub fn weighted_integral<T: Scalar>(values: &[T], weights: &[T], h: T) -> Result<T> {
    check_len("quadrature weights", values.len(), weights.len())?;
    Ok(interior_dot(values, weights) * h)
}

pub(crate) fn interior_dot<T: Scalar>(values: &[T], weights: &[T]) -> T {
    let n = values.len();
    if n < 3 {
        return T::zero();
    }
    values[1..n - 1]
        .iter()
        .zip(&weights[1..n - 1])
        .fold(T::zero(), |acc, (&v, &w)| acc + v * w)
}
