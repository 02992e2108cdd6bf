//! Pointwise reconstruction of the coefficient from the time-differentiated
//! measurement:
//!
//! ```text
//! p(t) = ( ∫ u ω'' dx + ∫ f ω dx - g'(t) ) / g(t)
//! ```

use crate::error::{check_len, Error, Result};
use crate::forward::CrankNicolson;
use crate::model::{CoefficientTrace, Field, ProblemData, MEASUREMENT_FLOOR};
use crate::quadrature::weighted_integral;
use crate::scalar::Scalar;

/// Coefficient at time level `k` from one solution row and one source row.
pub fn reconstruct_p<T: Scalar>(u_row: &[T], f_row: &[T], data: &ProblemData<T>, k: usize) -> Result<T> {
    let nodes = data.grid().n() + 1;
    check_len("u row", nodes, u_row.len())?;
    check_len("f row", nodes, f_row.len())?;
    let g = data.g()[k];
    if g.abs() < T::lit(MEASUREMENT_FLOOR) {
        return Err(Error::VanishingMeasurement {
            index: k,
            value: g.as_f64(),
        });
    }
    let h = data.grid().h();
    let diffusion = weighted_integral(u_row, data.omega_xx(), h)?;
    let source = weighted_integral(f_row, data.omega(), h)?;
    Ok((diffusion + source - data.gprime()[k]) / g)
}

/// Marches the scheme forward and recovers `p^{k+1}` after each step.
///
/// `p^0` comes from the initial row. The step `k -> k+1` uses the latest
/// known value `p^k` in its matrix; `p^{k+1}` is then read off the new row
/// without re-solving.
pub fn run_integration<T: Scalar>(data: &ProblemData<T>) -> Result<(Field<T>, CoefficientTrace<T>)> {
    let grid = data.grid();
    let scheme = CrankNicolson::from_grid(grid);
    let f = data.f();
    let mut u = Field::with_first_row(data.phi(), grid.m() + 1);
    let mut p = Vec::with_capacity(grid.m() + 1);
    p.push(reconstruct_p(data.phi(), f.row(0), data, 0)?);
    for k in 0..grid.m() {
        let next = scheme
            .step(p[k], u.row(k), f.row(k), f.row(k + 1))
            .map_err(|e| Error::at_step(k + 1, e))?;
        p.push(reconstruct_p(&next, f.row(k + 1), data, k + 1)?);
        u.row_mut(k + 1).copy_from_slice(&next);
    }
    Ok((u, CoefficientTrace::new(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::error_report;
    use crate::model::{make_grid, manufactured_problem, Grid};

    fn manufactured(n: usize, m: usize) -> crate::model::Manufactured<f64> {
        manufactured_problem(&make_grid(1.0f64, 1.0, n, m).unwrap()).unwrap()
    }

    #[test]
    fn exact_rows_recover_exact_coefficient() {
        let man = manufactured(100, 200);
        let d = &man.data;
        let p0 = reconstruct_p(man.exact_u.row(0), d.f().row(0), d, 0).unwrap();
        assert!((p0 - 1.0).abs() < 5e-3, "{p0}");
        let p1 = reconstruct_p(man.exact_u.row(200), d.f().row(200), d, 200).unwrap();
        assert!((p1 - (-1.0f64).exp()).abs() < 5e-3, "{p1}");
    }

    fn zero_problem(grid: Grid<f64>) -> ProblemData<f64> {
        let nodes = grid.n() + 1;
        let levels = grid.m() + 1;
        let omega = grid.sample_space(|x| (std::f64::consts::PI * x).sin());
        let mut omega = omega;
        omega[0] = 0.0;
        omega[grid.n()] = 0.0;
        let omega_xx = omega.iter().map(|w| -std::f64::consts::PI.powi(2) * w).collect();
        ProblemData::new(
            grid,
            Field::zeros(levels, nodes),
            vec![0.0; nodes],
            omega,
            omega_xx,
            vec![1.0; levels],
            Some(vec![0.0; levels]),
        )
        .unwrap()
    }

    #[test]
    fn all_terms_vanish() {
        let data = zero_problem(make_grid(1.0f64, 1.0, 10, 5).unwrap());
        let z = vec![0.0; 11];
        assert_eq!(reconstruct_p(&z, &z, &data, 3).unwrap(), 0.0);
    }

    #[test]
    fn zero_problem_stays_zero() {
        let data = zero_problem(make_grid(1.0f64, 1.0, 10, 5).unwrap());
        let (u, p) = run_integration(&data).unwrap();
        assert!(u.as_slice().iter().all(|&v| v == 0.0));
        assert!(p.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_rows_of_both_sweeps() {
        let man = manufactured(100, 200);
        let (u, p) = run_integration(&man.data).unwrap();
        let r = error_report(&u, &p, &man.exact_u, &man.exact_p, man.data.grid()).unwrap();
        assert!((r.er_u / 2.76e-3 - 1.0).abs() < 0.1, "{r:?}");
        assert!((r.er_p / 1.05e-2 - 1.0).abs() < 0.1, "{r:?}");

        let man = manufactured(100, 100);
        let (u, p) = run_integration(&man.data).unwrap();
        let r = error_report(&u, &p, &man.exact_u, &man.exact_p, man.data.grid()).unwrap();
        assert!((r.er_u / 6.65e-3 - 1.0).abs() < 0.1, "{r:?}");
        assert!((r.er_p / 2.44e-2 - 1.0).abs() < 0.1, "{r:?}");
    }

    #[test]
    fn integration_by_parts_identity() {
        // u = x(1-x)e^x vanishes at both ends; compare ∫u''ω with ∫uω''.
        let u = |x: f64| x * (1.0 - x) * x.exp();
        let u_xx = |x: f64| (-x * x - 3.0 * x) * x.exp();
        let pi = std::f64::consts::PI;
        let mut errs = Vec::new();
        let mut steps = Vec::new();
        for n in [25, 50, 100, 200] {
            let grid = make_grid(1.0f64, 1.0, n, 1).unwrap();
            let w = grid.sample_space(|x| (pi * x).sin());
            let w_xx: Vec<f64> = w.iter().map(|v| -pi * pi * v).collect();
            let lhs = weighted_integral(&grid.sample_space(u_xx), &w, grid.h()).unwrap();
            let rhs = weighted_integral(&grid.sample_space(u), &w_xx, grid.h()).unwrap();
            errs.push((lhs - rhs).abs());
            steps.push(grid.h());
        }
        assert!(errs[3] < 1e-4, "{errs:?}");
        let order = crate::metrics::measured_order(&errs, &steps).unwrap();
        assert!(order >= 1.9, "{order}");
    }

    #[test]
    fn vanishing_measurement_is_guarded() {
        let man = manufactured(10, 10);
        let noisy = man.data.with_measurements(vec![0.0; 11], man.data.gprime().to_vec());
        let z = vec![0.0; 11];
        assert!(matches!(
            reconstruct_p(&z, &z, &noisy, 4),
            Err(Error::VanishingMeasurement { index: 4, .. })
        ));
    }
}
