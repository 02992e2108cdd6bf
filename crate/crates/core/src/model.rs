//! Discretization, problem instances and the manufactured benchmark.

use crate::error::{check_len, Error, Result};
use crate::scalar::{max_abs, Scalar};

/// Uniform space-time grid on `[0, l] x [0, T]`.
///
/// Spatial nodes are `x_i = i*h` for `i = 0..=N`, time levels `t_k = k*tau`
/// for `k = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    length: T,
    final_time: T,
    n: usize,
    m: usize,
    h: T,
    tau: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(length: T, final_time: T, n: usize, m: usize) -> Result<Self> {
        if !length.is_finite() || length <= T::zero() {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if !final_time.is_finite() || final_time <= T::zero() {
            return Err(Error::InvalidGrid(format!(
                "final time must be positive and finite, got {final_time}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 spatial intervals, got N = {n}"
            )));
        }
        if m < 1 {
            return Err(Error::InvalidGrid("need at least one time step".into()));
        }
        Ok(Self {
            length,
            final_time,
            n,
            m,
            h: length / T::from_count(n),
            tau: final_time / T::from_count(m),
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn final_time(&self) -> T {
        self.final_time
    }

    /// Number of spatial intervals `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of time steps `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn x(&self, i: usize) -> T {
        T::from_count(i) * self.h
    }

    pub fn t(&self, k: usize) -> T {
        T::from_count(k) * self.tau
    }

    pub fn space_nodes(&self) -> Vec<T> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }

    pub fn time_nodes(&self) -> Vec<T> {
        (0..=self.m).map(|k| self.t(k)).collect()
    }

    /// Samples a function of `x` on the spatial nodes.
    pub fn sample_space(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..=self.n).map(|i| f(self.x(i))).collect()
    }

    /// Samples a function of `t` on the time levels.
    pub fn sample_time(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..=self.m).map(|k| f(self.t(k))).collect()
    }
}

/// Builds a [`Grid`]; see [`Grid::new`].
pub fn make_grid<T: Scalar>(length: T, final_time: T, n: usize, m: usize) -> Result<Grid<T>> {
    Grid::new(length, final_time, n, m)
}

/// Space-time array stored row-major, one row per time level.
///
/// Entry `(k, i)` is the value at `(x_i, t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            check_len("field row", cols, row.len())?;
            values.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            values,
        })
    }

    /// Samples `f(x, t)` on every node of the grid.
    pub fn sample(grid: &Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut field = Self::zeros(grid.m() + 1, grid.n() + 1);
        for k in 0..=grid.m() {
            let t = grid.t(k);
            for (i, v) in field.row_mut(k).iter_mut().enumerate() {
                *v = f(grid.x(i), t);
            }
        }
        field
    }

    pub(crate) fn with_first_row(first: &[T], rows: usize) -> Self {
        let mut field = Self::zeros(rows, first.len());
        field.row_mut(0).copy_from_slice(first);
        field
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn last_row(&self) -> &[T] {
        self.row(self.rows - 1)
    }

    pub fn get(&self, k: usize, i: usize) -> T {
        self.values[k * self.cols + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// Keeps only the first `rows` time levels.
    pub fn truncate_rows(&mut self, rows: usize) {
        if rows < self.rows {
            self.rows = rows;
            self.values.truncate(rows * self.cols);
        }
    }
}

/// Values `p^k` of the potential coefficient on the time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrace<T>(Vec<T>);

impl<T: Scalar> CoefficientTrace<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "coefficient trace has non-finite entry at index {k}"
            )));
        }
        Ok(Self(values))
    }

    pub fn sample(grid: &Grid<T>, p: impl Fn(T) -> T) -> Self {
        Self(grid.sample_time(p))
    }

    pub fn constant(grid: &Grid<T>, value: T) -> Self {
        Self(vec![value; grid.m() + 1])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> std::ops::Index<usize> for CoefficientTrace<T> {
    type Output = T;

    fn index(&self, k: usize) -> &T {
        &self.0[k]
    }
}

/// Smallest `|g(t_k)|` accepted before dividing by the measurement.
pub const MEASUREMENT_FLOOR: f64 = 1e-14;

/// Grid samples of everything that defines one inverse-problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData<T> {
    grid: Grid<T>,
    f: Field<T>,
    phi: Vec<T>,
    omega: Vec<T>,
    omega_xx: Vec<T>,
    g: Vec<T>,
    gprime: Vec<T>,
    gprime_estimated: bool,
}

impl<T: Scalar> ProblemData<T> {
    /// Validates and assembles a problem instance.
    ///
    /// When `gprime` is `None` it is estimated from `g` with
    /// [`time_derivative`]; [`ProblemData::gprime_estimated`] then reports
    /// `true`.
    pub fn new(
        grid: Grid<T>,
        f: Field<T>,
        phi: Vec<T>,
        omega: Vec<T>,
        omega_xx: Vec<T>,
        g: Vec<T>,
        gprime: Option<Vec<T>>,
    ) -> Result<Self> {
        let (nodes, levels) = (grid.n() + 1, grid.m() + 1);
        check_len("f rows", levels, f.n_rows())?;
        check_len("f columns", nodes, f.n_cols())?;
        check_len("phi", nodes, phi.len())?;
        check_len("omega", nodes, omega.len())?;
        check_len("omega_xx", nodes, omega_xx.len())?;
        check_len("g", levels, g.len())?;
        let gprime_estimated = gprime.is_none();
        let gprime = match gprime {
            Some(v) => v,
            None => time_derivative(&g, grid.tau())?,
        };
        check_len("gprime", levels, gprime.len())?;

        let all_finite = f.as_slice().iter().chain(&phi).chain(&omega).chain(&omega_xx);
        if all_finite.chain(&g).chain(&gprime).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite sample".into()));
        }
        ensure_boundary_zero("phi", &phi)?;
        ensure_boundary_zero("omega", &omega)?;
        for (k, row) in f.rows().enumerate() {
            ensure_boundary_zero("f", row).map_err(|e| Error::at_step(k, e))?;
        }
        let floor = T::lit(MEASUREMENT_FLOOR);
        if let Some(k) = g.iter().position(|v| v.abs() < floor) {
            return Err(Error::VanishingMeasurement {
                index: k,
                value: g[k].as_f64(),
            });
        }

        Ok(Self {
            grid,
            f,
            phi,
            omega,
            omega_xx,
            g,
            gprime,
            gprime_estimated,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn f(&self) -> &Field<T> {
        &self.f
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn omega_xx(&self) -> &[T] {
        &self.omega_xx
    }

    pub fn g(&self) -> &[T] {
        &self.g
    }

    pub fn gprime(&self) -> &[T] {
        &self.gprime
    }

    /// Whether `g'` was estimated by finite differences at construction.
    pub fn gprime_estimated(&self) -> bool {
        self.gprime_estimated
    }

    /// Replaces the measurement pair without re-validating it; noisy data is
    /// allowed to be arbitrarily rough.
    pub(crate) fn with_measurements(&self, g: Vec<T>, gprime: Vec<T>) -> Self {
        debug_assert_eq!(g.len(), self.g.len());
        debug_assert_eq!(gprime.len(), self.gprime.len());
        Self {
            g,
            gprime,
            ..self.clone()
        }
    }
}

fn ensure_boundary_zero<T: Scalar>(what: &str, v: &[T]) -> Result<()> {
    let tol = T::epsilon() * T::lit(64.0) * max_abs(v).max(T::one());
    let (first, last) = (v[0], v[v.len() - 1]);
    if first.abs() > tol || last.abs() > tol {
        return Err(Error::InvalidProblem(format!(
            "{what} must vanish at both ends, got {first:e} and {last:e}"
        )));
    }
    Ok(())
}

/// Second-order finite-difference derivative of uniformly spaced samples.
///
/// Central differences inside, one-sided three-point formulas at both ends.
/// With only two samples both ends get the forward difference.
pub fn time_derivative<T: Scalar>(values: &[T], step: T) -> Result<Vec<T>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least two samples to differentiate".into()));
    }
    if n == 2 {
        let d = (values[1] - values[0]) / step;
        return Ok(vec![d, d]);
    }
    let two = T::lit(2.0);
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    let mut out = Vec::with_capacity(n);
    out.push((-three * values[0] + four * values[1] - values[2]) / (two * step));
    for k in 1..n - 1 {
        out.push((values[k + 1] - values[k - 1]) / (two * step));
    }
    out.push((three * values[n - 1] - four * values[n - 2] + values[n - 3]) / (two * step));
    Ok(out)
}

/// Problem data together with its known solution.
#[derive(Debug, Clone)]
pub struct Manufactured<T> {
    pub data: ProblemData<T>,
    pub exact_u: Field<T>,
    pub exact_p: CoefficientTrace<T>,
}

/// Closed forms of the benchmark with `u = e^t sin(pi x)` and `p = e^{-t}`.
pub mod benchmark {
    use crate::scalar::Scalar;

    pub fn u<T: Scalar>(x: T, t: T) -> T {
        t.exp() * (T::PI() * x).sin()
    }

    pub fn u_t<T: Scalar>(x: T, t: T) -> T {
        u(x, t)
    }

    pub fn u_xx<T: Scalar>(x: T, t: T) -> T {
        -T::PI() * T::PI() * u(x, t)
    }

    pub fn p<T: Scalar>(t: T) -> T {
        (-t).exp()
    }

    pub fn f<T: Scalar>(x: T, t: T) -> T {
        let e = t.exp();
        (T::PI() * x).sin() * (T::one() + T::PI() * T::PI() * e + e)
    }

    pub fn omega<T: Scalar>(x: T) -> T {
        (T::PI() * x).sin()
    }

    pub fn omega_xx<T: Scalar>(x: T) -> T {
        -T::PI() * T::PI() * omega(x)
    }

    pub fn g<T: Scalar>(t: T) -> T {
        t.exp() / T::lit(2.0)
    }

    pub fn gprime<T: Scalar>(t: T) -> T {
        g(t)
    }
}

/// Samples the manufactured benchmark on `grid`, which must have `l = 1`.
///
/// Spatial boundary samples are set to exact zeros; `sin(pi)` would otherwise
/// leave a rounding residue there.
pub fn manufactured_problem<T: Scalar>(grid: &Grid<T>) -> Result<Manufactured<T>> {
    if (grid.length() - T::one()).abs() > T::epsilon() * T::lit(4.0) {
        return Err(Error::InvalidGrid(format!(
            "manufactured benchmark lives on [0, 1], got l = {}",
            grid.length()
        )));
    }
    let n = grid.n();
    let pin = |mut v: Vec<T>| {
        v[0] = T::zero();
        v[n] = T::zero();
        v
    };
    let mut f = Field::sample(grid, benchmark::f);
    let mut exact_u = Field::sample(grid, benchmark::u);
    for k in 0..=grid.m() {
        for field in [&mut f, &mut exact_u] {
            let row = field.row_mut(k);
            row[0] = T::zero();
            row[n] = T::zero();
        }
    }
    let data = ProblemData::new(
        *grid,
        f,
        pin(grid.sample_space(|x| benchmark::u(x, T::zero()))),
        pin(grid.sample_space(benchmark::omega)),
        pin(grid.sample_space(benchmark::omega_xx)),
        grid.sample_time(benchmark::g),
        Some(grid.sample_time(benchmark::gprime)),
    )?;
    Ok(Manufactured {
        data,
        exact_u,
        exact_p: CoefficientTrace::sample(grid, benchmark::p),
    })
}
