//! Synthetic measurement noise and Savitzky–Golay smoothing.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::ProblemData;
use crate::scalar::Scalar;

/// Perturbation law applied to `g` and `g'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NoiseKind {
    /// `v (1 + delta z)` with `z ~ N(0, 1)`.
    #[default]
    GaussianRelative,
    /// `v (1 + delta z)` with `z` uniform on `[-sqrt 3, sqrt 3]` (unit variance).
    UniformRelative,
    /// `v + delta z` with `z ~ N(0, 1)`.
    GaussianAbsolute,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [
        NoiseKind::GaussianRelative,
        NoiseKind::UniformRelative,
        NoiseKind::GaussianAbsolute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::GaussianRelative => "gaussian-relative",
            NoiseKind::UniformRelative => "uniform-relative",
            NoiseKind::GaussianAbsolute => "gaussian-absolute",
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            NoiseKind::GaussianRelative | NoiseKind::GaussianAbsolute => rng.sample(StandardNormal),
            NoiseKind::UniformRelative => {
                let s3 = 3f64.sqrt();
                rng.random_range(-s3..=s3)
            }
        }
    }

    fn apply<T: Scalar>(self, value: T, delta: T, z: f64) -> T {
        let z = T::lit(z);
        match self {
            NoiseKind::GaussianRelative | NoiseKind::UniformRelative => value * (T::one() + delta * z),
            NoiseKind::GaussianAbsolute => value + delta * z,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = NoiseKind::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidNoise(format!(
                "unknown noise kind {s:?}; expected one of {}",
                names.join(", ")
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    pub delta: T,
    pub seed: u64,
    pub kind: NoiseKind,
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn new(delta: T, seed: u64, kind: NoiseKind) -> Result<Self> {
        if !delta.is_finite() || delta < T::zero() {
            return Err(Error::InvalidNoise(format!(
                "delta must be finite and >= 0, got {delta}"
            )));
        }
        Ok(Self { delta, seed, kind })
    }

    pub fn clean() -> Self {
        Self {
            delta: T::zero(),
            seed: 0,
            kind: NoiseKind::default(),
        }
    }
}

/// Copy of `data` with noisy `g` and `g'`; all other samples are untouched.
///
/// The generator is seeded from `spec.seed`; the draws for `g` come first,
/// then the independent draws for `g'`.
pub fn perturb<T: Scalar>(data: &ProblemData<T>, spec: &NoiseSpec<T>) -> ProblemData<T> {
    if spec.delta == T::zero() {
        return data.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noisy = |values: &[T]| -> Vec<T> {
        values
            .iter()
            .map(|&v| spec.kind.apply(v, spec.delta, spec.kind.draw(&mut rng)))
            .collect()
    };
    let g = noisy(data.g());
    let gprime = noisy(data.gprime());
    data.with_measurements(g, gprime)
}

/// Savitzky–Golay smoothing: each sample is replaced by the value at that
/// point of the least-squares polynomial of degree `poly_order` fitted over
/// `window` consecutive samples. Near the ends the window is shifted inward
/// so the fit becomes one-sided.
pub fn smooth<T: Scalar>(signal: &[T], window: usize, poly_order: usize) -> Result<Vec<T>> {
    if window.is_multiple_of(2) {
        return Err(Error::InvalidSmoothing(format!("window must be odd, got {window}")));
    }
    if poly_order >= window {
        return Err(Error::InvalidSmoothing(format!(
            "polynomial order {poly_order} must be below the window {window}"
        )));
    }
    if window > signal.len() {
        return Err(Error::InvalidSmoothing(format!(
            "window {window} exceeds the signal length {}",
            signal.len()
        )));
    }
    let half = window / 2;
    // One weight vector per position of the target inside the window.
    let weights: Vec<Vec<T>> = (0..window)
        .map(|pos| fit_weights(window, poly_order, pos))
        .collect::<Result<_>>()?;
    let len = signal.len();
    Ok((0..len)
        .map(|i| {
            let start = i.saturating_sub(half).min(len - window);
            let w = &weights[i - start];
            signal[start..start + window]
                .iter()
                .zip(w)
                .fold(T::zero(), |acc, (&s, &c)| acc + s * c)
        })
        .collect())
}

/// Row of the least-squares projector that evaluates the fitted polynomial
/// at window position `pos`.
fn fit_weights<T: Scalar>(window: usize, order: usize, pos: usize) -> Result<Vec<T>> {
    let terms = order + 1;
    let scale = T::from_count(window.max(2) - 1);
    // Abscissae relative to the target, scaled into [-1, 1].
    let z: Vec<T> = (0..window)
        .map(|j| (T::from_count(j) - T::from_count(pos)) / scale)
        .collect();
    let powers = |x: T| -> Vec<T> {
        let mut out = Vec::with_capacity(terms);
        let mut acc = T::one();
        for _ in 0..terms {
            out.push(acc);
            acc = acc * x;
        }
        out
    };
    let rows: Vec<Vec<T>> = z.iter().map(|&x| powers(x)).collect();
    let mut normal = vec![vec![T::zero(); terms]; terms];
    for row in &rows {
        for a in 0..terms {
            for b in 0..terms {
                normal[a][b] = normal[a][b] + row[a] * row[b];
            }
        }
    }
    // Evaluation at z = 0 picks the constant coefficient: solve N y = e_0,
    // then weight_j = rows_j · y.
    let mut e0 = vec![T::zero(); terms];
    e0[0] = T::one();
    let y = dense_solve(normal, e0)?;
    Ok(rows
        .iter()
        .map(|row| row.iter().zip(&y).fold(T::zero(), |acc, (&r, &c)| acc + r * c))
        .collect())
}

/// Gaussian elimination with partial pivoting for the small normal systems.
#[allow(clippy::needless_range_loop)]
fn dense_solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot][col] == T::zero() {
            return Err(Error::InvalidSmoothing("singular least-squares system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail = (row + 1..n).fold(T::zero(), |acc, k| acc + a[row][k] * x[k]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}
