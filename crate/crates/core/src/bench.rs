//! Experiment drivers: grid sweeps on the manufactured benchmark, noisy-data
//! sweeps and the CSV tables they produce.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integration::run_integration;
use crate::metrics::{error_report, ErrorReport};
use crate::model::{make_grid, manufactured_problem, CoefficientTrace, Field, Grid, Manufactured, ProblemData};
use crate::newton::{run_newton_partial, NewtonConfig};
use crate::noise::{perturb, smooth, NoiseSpec};
use crate::report::{CsvTable, Metadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Integration,
    Newton,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Integration, Method::Newton];

    pub fn name(self) -> &'static str {
        match self {
            Method::Integration => "integration",
            Method::Newton => "newton",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}; expected integration or newton")))
    }
}

/// Result of one identification run.
///
/// On a Newton failure `field` and `trace` hold the levels completed before
/// it and `failure` carries the diagnostic.
#[derive(Debug)]
pub struct Outcome {
    pub method: Method,
    pub field: Field<f64>,
    pub trace: CoefficientTrace<f64>,
    /// Newton updates per level (empty for the integration method).
    pub iterations: Vec<usize>,
    pub failure: Option<Error>,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `method` on `data`. Errors that are not Newton failures (bad input,
/// singular systems in the integration method) are returned as `Err`.
pub fn identify(data: &ProblemData<f64>, method: Method, cfg: &NewtonConfig<f64>) -> Result<Outcome> {
    match method {
        Method::Integration => {
            let (field, trace) = run_integration(data)?;
            Ok(Outcome {
                method,
                field,
                trace,
                iterations: Vec::new(),
                failure: None,
            })
        }
        Method::Newton => {
            let (run, failure) = run_newton_partial(data, cfg);
            match failure {
                Some(e) if !e.is_newton_failure() => Err(e),
                failure => Ok(Outcome {
                    method,
                    field: run.field,
                    trace: run.trace,
                    iterations: run.iterations,
                    failure,
                }),
            }
        }
    }
}

/// Errors of a converged outcome against the known solution.
pub fn score(outcome: &Outcome, truth: &Manufactured<f64>) -> Result<ErrorReport<f64>> {
    if let Some(e) = &outcome.failure {
        return Err(Error::Degenerate(format!("cannot score an unconverged run: {e}")));
    }
    error_report(
        &outcome.field,
        &outcome.trace,
        &truth.exact_u,
        &truth.exact_p,
        truth.data.grid(),
    )
}

/// Replaces `g` and `g'` by their Savitzky–Golay smoothed versions.
pub fn smooth_measurements(data: &ProblemData<f64>, window: usize, poly_order: usize) -> Result<ProblemData<f64>> {
    let g = smooth(data.g(), window, poly_order)?;
    let gprime = smooth(data.gprime(), window, poly_order)?;
    Ok(data.with_measurements(g, gprime))
}

/// One grid of a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
}

/// A named sweep over grids with one method.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub name: &'static str,
    pub method: Method,
    pub cells: Vec<Cell>,
}

/// The four standard sweeps on the unit benchmark: fixed `h = 1/100` with
/// `tau` halved from `1/200` to `1/1600`, and `tau = h` from `1/100` to
/// `1/800`, each for both methods.
pub fn standard_tables() -> Vec<TableSpec> {
    let fixed_h: Vec<Cell> = [200, 400, 800, 1600].map(|m| Cell { n: 100, m }).to_vec();
    let diagonal: Vec<Cell> = [100, 200, 400, 800].map(|n| Cell { n, m: n }).to_vec();
    vec![
        TableSpec {
            name: "table1",
            method: Method::Integration,
            cells: fixed_h.clone(),
        },
        TableSpec {
            name: "table2",
            method: Method::Integration,
            cells: diagonal.clone(),
        },
        TableSpec {
            name: "table3",
            method: Method::Newton,
            cells: fixed_h,
        },
        TableSpec {
            name: "table4",
            method: Method::Newton,
            cells: diagonal,
        },
    ]
}

/// Both methods on `h = tau = 0.01`.
pub fn comparison_table() -> Vec<TableSpec> {
    Method::ALL
        .into_iter()
        .map(|method| TableSpec {
            name: match method {
                Method::Integration => "comparison_integration",
                Method::Newton => "comparison_newton",
            },
            method,
            cells: vec![Cell { n: 100, m: 100 }],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub method: Method,
    pub h: f64,
    pub tau: f64,
    pub report: ErrorReport<f64>,
}

/// Manufactured benchmark on `[0, 1] x [0, 1]`.
pub fn benchmark(n: usize, m: usize) -> Result<Manufactured<f64>> {
    manufactured_problem(&make_grid(1.0f64, 1.0, n, m)?)
}

/// Runs every cell in parallel; rows come back in cell order.
pub fn run_table(spec: &TableSpec, cfg: &NewtonConfig<f64>) -> Result<Vec<TableRow>> {
    spec.cells
        .par_iter()
        .map(|cell| {
            let truth = benchmark(cell.n, cell.m)?;
            let outcome = identify(&truth.data, spec.method, cfg)?;
            let grid = truth.data.grid();
            Ok(TableRow {
                method: spec.method,
                h: grid.h(),
                tau: grid.tau(),
                report: score(&outcome, &truth)?,
            })
        })
        .collect()
}

pub const TABLE_HEADER: [&str; 6] = ["h", "tau", "er_u", "er_p", "l2_u", "l2_p"];

pub fn table_csv(rows: &[TableRow], meta: Metadata) -> CsvTable {
    let mut t = CsvTable::new(meta, &TABLE_HEADER);
    for r in rows {
        t.push(vec![
            r.h,
            r.tau,
            r.report.er_u,
            r.report.er_p,
            r.report.l2_u,
            r.report.l2_p,
        ]);
    }
    t
}

/// Metadata describing a run on `grid`.
pub fn run_metadata(grid: &Grid<f64>, method: Method, cfg: &NewtonConfig<f64>) -> Metadata {
    let mut meta = Metadata::new()
        .with("l", grid.length())
        .with("T", grid.final_time())
        .with("N", grid.n())
        .with("M", grid.m())
        .with("method", method);
    if method == Method::Newton {
        meta.set("tol", format!("{:e}", cfg.tol));
        meta.set("max_iter", cfg.max_iter);
        if let Some(p) = cfg.p_init {
            meta.set("p_init", p);
        }
    }
    meta
}

pub fn noise_metadata(mut meta: Metadata, spec: &NoiseSpec<f64>, smoothing: Option<(usize, usize)>) -> Metadata {
    meta.set("noise_delta", spec.delta);
    meta.set("seed", spec.seed);
    meta.set("noise_kind", spec.kind);
    if let Some((w, o)) = smoothing {
        meta.set("smooth_window", w);
        meta.set("smooth_order", o);
    }
    meta
}

/// `t, p_exact, p_numeric`; levels after a failure are omitted.
pub fn trace_csv(
    grid: &Grid<f64>,
    p: &CoefficientTrace<f64>,
    exact: Option<&CoefficientTrace<f64>>,
    meta: Metadata,
) -> CsvTable {
    let mut t = CsvTable::new(meta, &["t", "p_exact", "p_numeric"]);
    for (k, &v) in p.as_slice().iter().enumerate() {
        let e = exact.map_or(f64::NAN, |e| e[k]);
        t.push(vec![grid.t(k), e, v]);
    }
    t
}

/// One row per time level: `t, u_0, ..., u_N`.
pub fn surface_csv(grid: &Grid<f64>, u: &Field<f64>, meta: Metadata) -> CsvTable {
    let mut header = vec!["t".to_string()];
    header.extend((0..u.n_cols()).map(|i| format!("u_{i}")));
    let mut t = CsvTable::new(meta, &header);
    for (k, row) in u.rows().enumerate() {
        let mut r = Vec::with_capacity(row.len() + 1);
        r.push(grid.t(k));
        r.extend_from_slice(row);
        t.push(r);
    }
    t
}

pub fn report_csv(report: &ErrorReport<f64>, grid: &Grid<f64>, meta: Metadata) -> CsvTable {
    table_csv(
        &[TableRow {
            method: Method::Integration,
            h: grid.h(),
            tau: grid.tau(),
            report: *report,
        }],
        meta,
    )
}

/// Noisy-data experiment on one grid.
#[derive(Debug)]
pub struct NoiseCell {
    pub delta: f64,
    pub g_clean: Vec<f64>,
    pub g_noisy: Vec<f64>,
    pub outcome: Outcome,
    /// Present when the run converged.
    pub report: Option<ErrorReport<f64>>,
}

/// Runs `method` on the benchmark with each relative noise level in
/// `deltas`, all with the same seed. Cells are computed in parallel and
/// returned in the order of `deltas`.
pub fn noise_sweep(
    truth: &Manufactured<f64>,
    method: Method,
    cfg: &NewtonConfig<f64>,
    deltas: &[f64],
    seed: u64,
    kind: crate::noise::NoiseKind,
    smoothing: Option<(usize, usize)>,
) -> Result<Vec<NoiseCell>> {
    deltas
        .par_iter()
        .map(|&delta| {
            let spec = NoiseSpec::new(delta, seed, kind)?;
            let mut noisy = perturb(&truth.data, &spec);
            if let Some((w, o)) = smoothing {
                noisy = smooth_measurements(&noisy, w, o)?;
            }
            let outcome = identify(&noisy, method, cfg)?;
            let report = if outcome.converged() {
                Some(score(&outcome, truth)?)
            } else {
                None
            };
            Ok(NoiseCell {
                delta,
                g_clean: truth.data.g().to_vec(),
                g_noisy: noisy.g().to_vec(),
                outcome,
                report,
            })
        })
        .collect()
}

/// `t, g_clean, g_noisy, p_exact, p_numeric`; `p_numeric` is NaN past a
/// Newton failure.
pub fn noise_csv(cell: &NoiseCell, truth: &Manufactured<f64>, meta: Metadata) -> CsvTable {
    let grid = truth.data.grid();
    let mut t = CsvTable::new(meta, &["t", "g_clean", "g_noisy", "p_exact", "p_numeric"]);
    let p = cell.outcome.trace.as_slice();
    for k in 0..=grid.m() {
        let pn = p.get(k).copied().unwrap_or(f64::NAN);
        t.push(vec![grid.t(k), cell.g_clean[k], cell.g_noisy[k], truth.exact_p[k], pn]);
    }
    t
}
