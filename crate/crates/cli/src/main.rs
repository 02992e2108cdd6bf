use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use diffinv::bench::{self, Method, Outcome};
use diffinv::bundle::{read_bundle, write_bundle};
use diffinv::report::Metadata;
use diffinv::{
    make_grid, manufactured_problem, perturb, solve_forward, CoefficientTrace, Field, NewtonConfig, NoiseKind,
    NoiseSpec, ProblemData,
};

/// Exit status when an identification run stopped before the final level.
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "diffinv",
    version,
    about = "Identify the potential p(t) in a 1-D heat equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem with a given coefficient.
    Forward(ForwardArgs),
    /// Recover p(t) from the integral measurement.
    Invert(InvertArgs),
    /// Run the standard convergence sweeps on the benchmark.
    Tables(TablesArgs),
    /// Recover p(t) from noisy measurements for several noise levels.
    NoiseSweep(SweepArgs),
    /// Write a problem bundle (optionally with noisy measurements).
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// `manufactured` or the path of a problem bundle directory.
    #[arg(long, default_value = "manufactured")]
    problem: String,
    /// Number of spatial intervals (manufactured problem only).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Number of time steps (manufactured problem only).
    #[arg(long = "M")]
    m: Option<usize>,
    /// Final time (manufactured problem only).
    #[arg(long)]
    final_time: Option<f64>,
}

#[derive(Args, Clone)]
struct NewtonArgs {
    /// Stop when |F(p)| falls below this value.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Initial guess for p at t = 0 (default: reconstructed from the data).
    #[arg(long)]
    p_init: Option<f64>,
}

impl NewtonArgs {
    fn config(&self) -> Result<NewtonConfig<f64>> {
        let cfg = NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            p_init: self.p_init,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Clone)]
struct NoiseArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = NoiseKind::GaussianRelative)]
    noise_kind: NoiseKind,
    /// Savitzky–Golay window applied to the noisy g and g'.
    #[arg(long)]
    smooth_window: Option<usize>,
    #[arg(long, default_value_t = 2, requires = "smooth_window")]
    smooth_order: usize,
}

impl NoiseArgs {
    fn smoothing(&self) -> Option<(usize, usize)> {
        self.smooth_window.map(|w| (w, self.smooth_order))
    }
}

#[derive(Args)]
struct ForwardArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Constant coefficient (default: the known p of the problem).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = Method::Integration, value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    newton: NewtonArgs,
    /// Relative noise level added to g and g'.
    #[arg(long, default_value_t = 0.0)]
    noise_delta: f64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    /// Sweeps to run (table1..table4, comparison); all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[command(flatten)]
    newton: NewtonArgs,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long = "M", default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = Method::Integration, value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    newton: NewtonArgs,
    /// Comma-separated relative noise levels.
    #[arg(long, value_delimiter = ',', default_value = "0,0.0001,0.001,0.01")]
    deltas: Vec<f64>,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Required for the Newton method, which is not robust to noise.
    #[arg(long)]
    allow_unstable: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0.0)]
    noise_delta: f64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: diffinv::Error| e.to_string())
}

struct Loaded {
    data: ProblemData<f64>,
    exact: Option<(Field<f64>, CoefficientTrace<f64>)>,
}

fn load(args: &ProblemArgs) -> Result<Loaded> {
    if args.problem == "manufactured" {
        let grid = make_grid(
            1.0,
            args.final_time.unwrap_or(1.0),
            args.n.unwrap_or(100),
            args.m.unwrap_or(100),
        )?;
        let man = manufactured_problem(&grid)?;
        return Ok(Loaded {
            data: man.data,
            exact: Some((man.exact_u, man.exact_p)),
        });
    }
    if args.n.is_some() || args.m.is_some() || args.final_time.is_some() {
        bail!("--N, --M and --final-time only apply to the manufactured problem; bundles carry their own grid");
    }
    let bundle = read_bundle(&args.problem)?;
    for w in &bundle.warnings {
        eprintln!("{w}");
    }
    let exact = bundle.exact_u.zip(bundle.exact_p);
    Ok(Loaded {
        data: bundle.data,
        exact,
    })
}

fn problem_metadata(meta: Metadata, args: &ProblemArgs) -> Metadata {
    meta.with("problem", &args.problem)
}

fn forward(args: ForwardArgs) -> Result<ExitCode> {
    let loaded = load(&args.problem)?;
    let grid = *loaded.data.grid();
    let p = match (args.p, &loaded.exact) {
        (Some(v), _) => CoefficientTrace::constant(&grid, v),
        (None, Some((_, p))) => p.clone(),
        (None, None) => bail!("the problem has no known coefficient; pass --p"),
    };
    let u = solve_forward(&loaded.data, &p)?;
    let mut meta = problem_metadata(Metadata::new(), &args.problem)
        .with("l", grid.length())
        .with("T", grid.final_time())
        .with("N", grid.n())
        .with("M", grid.m());
    if let Some(v) = args.p {
        meta.set("p", v);
    }
    bench::surface_csv(&grid, &u, meta.clone()).write(args.out_dir.join("u_surface.csv"))?;
    if let Some((exact_u, _)) = &loaded.exact {
        if args.p.is_none() {
            let er = u
                .last_row()
                .iter()
                .zip(exact_u.last_row())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            println!("max error at t = T: {er:.6e}");
        }
    }
    println!("wrote {}", args.out_dir.join("u_surface.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn write_outcome(out_dir: &Path, outcome: &Outcome, loaded: &Loaded, meta: Metadata) -> Result<()> {
    let grid = loaded.data.grid();
    let exact_p = loaded.exact.as_ref().map(|(_, p)| p);
    bench::trace_csv(grid, &outcome.trace, exact_p, meta.clone()).write(out_dir.join("p_trace.csv"))?;
    bench::surface_csv(grid, &outcome.field, meta.clone()).write(out_dir.join("u_surface.csv"))?;
    if let (Some((u, p)), true) = (&loaded.exact, outcome.converged()) {
        let report = diffinv::error_report(&outcome.field, &outcome.trace, u, p, grid)?;
        bench::report_csv(&report, grid, meta).write(out_dir.join("report.csv"))?;
        println!(
            "er_u = {:.6e}  er_p = {:.6e}  l2_u = {:.6e}  l2_p = {:.6e}",
            report.er_u, report.er_p, report.l2_u, report.l2_p
        );
    }
    Ok(())
}

fn invert(args: InvertArgs) -> Result<ExitCode> {
    let cfg = args.newton.config()?;
    let loaded = load(&args.problem)?;
    let spec = NoiseSpec::new(args.noise_delta, args.noise.seed, args.noise.noise_kind)?;
    let mut data = perturb(&loaded.data, &spec);
    if let Some((w, o)) = args.noise.smoothing() {
        data = bench::smooth_measurements(&data, w, o)?;
    }
    let outcome = bench::identify(&data, args.method, &cfg)?;
    let meta = bench::noise_metadata(
        problem_metadata(bench::run_metadata(data.grid(), args.method, &cfg), &args.problem),
        &spec,
        args.noise.smoothing(),
    );
    write_outcome(&args.out_dir, &outcome, &loaded, meta)?;
    println!("wrote results to {}", args.out_dir.display());
    match &outcome.failure {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => {
            eprintln!(
                "error: identification stopped after {} of {} levels: {e}",
                outcome.trace.len(),
                data.grid().m() + 1
            );
            Ok(ExitCode::from(EXIT_NOT_CONVERGED))
        }
    }
}

fn tables(args: TablesArgs) -> Result<ExitCode> {
    let cfg = args.newton.config()?;
    let mut specs = bench::standard_tables();
    specs.extend(bench::comparison_table());
    let selected = |name: &str| {
        args.only.is_empty()
            || args
                .only
                .iter()
                .any(|o| name == o || name.starts_with(&format!("{o}_")))
    };
    for o in &args.only {
        if !specs
            .iter()
            .any(|s| s.name == o || s.name.starts_with(&format!("{o}_")))
        {
            bail!("unknown table {o:?}; expected table1, table2, table3, table4 or comparison");
        }
    }
    specs.retain(|s| selected(s.name));

    for spec in &specs {
        let rows = bench::run_table(spec, &cfg)?;
        let mut meta = Metadata::new()
            .with("table", spec.name)
            .with("problem", "manufactured")
            .with("method", spec.method);
        if spec.method == Method::Newton {
            meta.set("tol", format!("{:e}", cfg.tol));
            meta.set("max_iter", cfg.max_iter);
        }
        let name = spec.name;
        let path = args.out_dir.join(format!("{name}.csv"));
        bench::table_csv(&rows, meta).write(&path)?;
        println!("{name} ({})", path.display());
        println!("  method: {}", spec.method);
        println!(
            "  {:>10} {:>10} {:>12} {:>12} {:>12} {:>12}",
            "h", "tau", "er_u", "er_p", "l2_u", "l2_p"
        );
        for r in &rows {
            println!(
                "  {:>10.6} {:>10.6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                r.h, r.tau, r.report.er_u, r.report.er_p, r.report.l2_u, r.report.l2_p
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn noise_sweep(args: SweepArgs) -> Result<ExitCode> {
    if args.method == Method::Newton && !args.allow_unstable {
        bail!("the Newton method is unstable under measurement noise; pass --allow-unstable to run it anyway");
    }
    let cfg = args.newton.config()?;
    let truth = bench::benchmark(args.n, args.m)?;
    let cells = bench::noise_sweep(
        &truth,
        args.method,
        &cfg,
        &args.deltas,
        args.noise.seed,
        args.noise.noise_kind,
        args.noise.smoothing(),
    )?;
    let base = bench::run_metadata(truth.data.grid(), args.method, &cfg).with("problem", "manufactured");
    let mut summary = diffinv::report::CsvTable::new(
        base.clone()
            .with("seed", args.noise.seed)
            .with("noise_kind", args.noise.noise_kind),
        &["delta", "converged", "levels", "er_u", "er_p", "l2_u", "l2_p"],
    );
    let mut all_converged = true;
    for (i, cell) in cells.iter().enumerate() {
        let spec = NoiseSpec::new(cell.delta, args.noise.seed, args.noise.noise_kind)?;
        let meta = bench::noise_metadata(base.clone(), &spec, args.noise.smoothing());
        bench::noise_csv(cell, &truth, meta).write(args.out_dir.join(format!("noise_{i}.csv")))?;
        let r = cell.report;
        summary.push(vec![
            cell.delta,
            if cell.outcome.converged() { 1.0 } else { 0.0 },
            cell.outcome.trace.len() as f64,
            r.map_or(f64::NAN, |r| r.er_u),
            r.map_or(f64::NAN, |r| r.er_p),
            r.map_or(f64::NAN, |r| r.l2_u),
            r.map_or(f64::NAN, |r| r.l2_p),
        ]);
        match (&cell.outcome.failure, r) {
            (None, Some(r)) => println!("delta = {:<8} er_u = {:.4e}  er_p = {:.4e}", cell.delta, r.er_u, r.er_p),
            (Some(e), _) => {
                all_converged = false;
                println!("delta = {:<8} failed: {e}", cell.delta);
            }
            (None, None) => unreachable!("converged cells are scored"),
        }
    }
    summary.write(args.out_dir.join("noise_summary.csv"))?;
    println!("wrote results to {}", args.out_dir.display());
    Ok(if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    })
}

fn export(args: ExportArgs) -> Result<ExitCode> {
    let loaded = load(&args.problem)?;
    let spec = NoiseSpec::new(args.noise_delta, args.noise.seed, args.noise.noise_kind)?;
    let mut data = perturb(&loaded.data, &spec);
    if let Some((w, o)) = args.noise.smoothing() {
        data = bench::smooth_measurements(&data, w, o)?;
    }
    let meta = bench::noise_metadata(
        problem_metadata(Metadata::new(), &args.problem),
        &spec,
        args.noise.smoothing(),
    );
    let exact = loaded.exact.as_ref().map(|(u, p)| (u, p));
    write_bundle(&args.out_dir, &data, exact, &meta)?;
    println!("wrote bundle to {}", args.out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Forward(a) => forward(a),
        Command::Invert(a) => invert(a),
        Command::Tables(a) => tables(a),
        Command::NoiseSweep(a) => noise_sweep(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
