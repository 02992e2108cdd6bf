//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p diffinv-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use diffinv::bench::{self, Cell, Method, TableRow, TableSpec};
use diffinv::scalar::max_abs;
use diffinv::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.details
            .push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    ((value - target) / target).abs() <= rel
}

fn rel_str(value: f64, target: f64) -> String {
    format!(
        "{value:.3e} vs {target:.2e} ({:+.1}%)",
        100.0 * (value - target) / target
    )
}

fn sweep(method: Method, cells: &[(usize, usize)]) -> Vec<TableRow> {
    let spec = TableSpec {
        name: "acceptance",
        method,
        cells: cells.iter().map(|&(n, m)| Cell { n, m }).collect(),
    };
    bench::run_table(&spec, &NewtonConfig::default()).expect("benchmark sweep runs")
}

const FIXED_H: [(usize, usize); 4] = [(100, 200), (100, 400), (100, 800), (100, 1600)];
const DIAGONAL: [(usize, usize); 4] = [(100, 100), (200, 200), (400, 400), (800, 800)];

fn table1() -> Verdict {
    let er_u = [2.76e-3, 6.90e-4, 1.73e-4, 4.32e-5];
    let er_p = [1.05e-2, 2.63e-3, 6.57e-4, 1.64e-4];
    let mut v = Verdict::new();
    let start = Instant::now();
    let rows = sweep(Method::Integration, &FIXED_H);
    let elapsed = start.elapsed();
    for (i, r) in rows.iter().enumerate() {
        v.check(
            within(r.report.er_u, er_u[i], 0.10),
            format!("tau={:.3e} Er(u) {}", r.tau, rel_str(r.report.er_u, er_u[i])),
        );
        v.check(
            within(r.report.er_p, er_p[i], 0.10),
            format!("tau={:.3e} Er(p) {}", r.tau, rel_str(r.report.er_p, er_p[i])),
        );
    }
    v.check(
        elapsed < Duration::from_secs(30),
        format!("runtime {:.2} s (limit 30 s)", elapsed.as_secs_f64()),
    );
    v
}

fn table2() -> Verdict {
    let expected = [
        [6.65e-3, 2.44e-2, 4.70e-3, 2.01e-2],
        [1.66e-3, 1.32e-2, 1.18e-3, 1.08e-2],
        [4.15e-4, 9.03e-3, 2.95e-4, 7.35e-3],
        [1.04e-4, 5.53e-3, 7.38e-5, 4.49e-3],
    ];
    let mut v = Verdict::new();
    for (r, e) in sweep(Method::Integration, &DIAGONAL).iter().zip(expected) {
        let got = [r.report.er_u, r.report.er_p, r.report.l2_u, r.report.l2_p];
        for (name, (g, t)) in ["Er(u)", "Er(p)", "E2(u)", "E2(p)"].iter().zip(got.iter().zip(e)) {
            v.check(within(*g, t, 0.15), format!("h={:.3e} {name} {}", r.h, rel_str(*g, t)));
        }
    }
    v
}

fn tables34() -> Verdict {
    let mut v = Verdict::new();
    let cases = [
        ("table3", FIXED_H, [3.31e-3, 2.48e-3, 1.81e-3, 8.11e-4]),
        ("table4", DIAGONAL, [5.80e-3, 2.70e-3, 1.76e-3, 1.03e-3]),
    ];
    for (name, cells, er_p) in cases {
        for (r, target) in sweep(Method::Newton, &cells).iter().zip(er_p) {
            v.check(
                r.report.er_u <= 1e-8,
                format!(
                    "{name} h={:.3e} tau={:.3e} Er(u) {:.3e} <= 1e-8",
                    r.h, r.tau, r.report.er_u
                ),
            );
            v.check(
                within(r.report.er_p, target, 0.25),
                format!(
                    "{name} h={:.3e} tau={:.3e} Er(p) {}",
                    r.h,
                    r.tau,
                    rel_str(r.report.er_p, target)
                ),
            );
        }
    }
    let gap = |h: f64| std::f64::consts::PI.powi(2) - 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    v.note(format!(
        "discrete eigenvalue gap pi^2 - lambda_h: h=1/100 {:.3e}, 1/200 {:.3e}, 1/400 {:.3e}, 1/800 {:.3e}",
        gap(0.01),
        gap(0.005),
        gap(0.0025),
        gap(0.00125)
    ));
    v
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn convergence_order() -> Verdict {
    let mut v = Verdict::new();
    let rows = sweep(Method::Integration, &FIXED_H);
    let errs: Vec<f64> = rows.iter().map(|r| r.report.er_u).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let order = measured_order(&errs, &taus).unwrap();
    v.check(
        (1.9..=2.1).contains(&order),
        format!("order in tau at h=1/100: {order:.3} (errors {})", sci(&errs)),
    );
    let rows = sweep(Method::Integration, &DIAGONAL);
    let errs: Vec<f64> = rows.iter().map(|r| r.report.er_u).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let order = measured_order(&errs, &hs).unwrap();
    v.check(
        order >= 1.9,
        format!("order in h with tau=h: {order:.3} (errors {})", sci(&errs)),
    );
    v
}

fn random_interior(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
    v[0] = 0.0;
    v[n] = 0.0;
    v
}

fn stability() -> Verdict {
    let mut v = Verdict::new();
    let (mut steps, mut violations, mut zero_f_violations, mut small_ratio_violations) = (0, 0, 0, 0);
    let mut worst: Option<(f64, String)> = None;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=64);
        let m = rng.random_range(1..=64);
        let t_end = rng.random_range(0.05..=1.0);
        let (h, tau) = (1.0 / n as f64, t_end / m as f64);
        let cn = CrankNicolson::new(h, tau);
        let p: Vec<f64> = (0..=m).map(|_| rng.random_range(0.0..10.0)).collect();
        let f: Vec<Vec<f64>> = (0..=m).map(|_| random_interior(&mut rng, n)).collect();
        let (mut u, mut u0) = (random_interior(&mut rng, n), Vec::new());
        u0.clone_from(&u);
        let zero = vec![0.0; n + 1];
        for k in 0..m {
            let next = cn.step(p[k + 1], &u, &f[k], &f[k + 1]).unwrap();
            let fmid: Vec<f64> = f[k].iter().zip(&f[k + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let excess = max_abs(&next) - (max_abs(&u) + tau * max_abs(&fmid));
            steps += 1;
            if excess > 1e-12 {
                violations += 1;
                if cn.ratio() <= 1.0 {
                    small_ratio_violations += 1;
                }
                if worst.as_ref().is_none_or(|(w, _)| excess > *w) {
                    worst = Some((
                        excess,
                        format!(
                            "seed {seed}: N={n} M={m} tau/h^2={:.2} step {k} excess {excess:.3e}",
                            cn.ratio()
                        ),
                    ));
                }
            }
            let homog = cn.step(p[k + 1], &u0, &zero, &zero).unwrap();
            if max_abs(&homog) > max_abs(&u0) + 1e-12 {
                zero_f_violations += 1;
            }
            u0 = homog;
            u = next;
        }
    }
    v.check(
        violations == 0,
        format!("{violations} of {steps} steps exceed |u^k| + tau |f^(k+1/2)|"),
    );
    v.check(
        zero_f_violations == 0,
        format!("{zero_f_violations} of {steps} source-free steps increase the max norm"),
    );
    if let Some((_, w)) = worst {
        v.note(format!("worst counterexample: {w}"));
    }
    v.note(format!("violations with tau/h^2 <= 1: {small_ratio_violations}"));
    v
}

fn jacobian() -> Verdict {
    let mut v = Verdict::new();
    let mut worst = (0.0f64, String::new());
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(10..=200);
        let m = rng.random_range(10..=200);
        let p = rng.random_range(0.1..5.0);
        let k = rng.random_range(0..m);
        let man = manufactured_problem(&make_grid(1.0, 1.0, n, m).unwrap()).unwrap();
        let d = &man.data;
        let grid = d.grid();
        let advance = |q: f64| step(grid, q, man.exact_u.row(k), d.f().row(k), d.f().row(k + 1)).unwrap();
        let s = sensitivity_step(grid, p, &advance(p)).unwrap();
        let analytic = residual_derivative(&s, d).unwrap();
        let eps = 1e-4 * p.max(1.0);
        let fd = (residual(&advance(p + eps), d, k + 1).unwrap() - residual(&advance(p - eps), d, k + 1).unwrap())
            / (2.0 * eps);
        let rel = ((analytic - fd) / analytic).abs();
        if rel >= worst.0 {
            worst = (
                rel,
                format!("N={n} M={m} p={p:.3} k={k}: F'={analytic:.6e} fd={fd:.6e}"),
            );
        }
    }
    v.check(
        worst.0 < 1e-6,
        format!("max relative error over 50 triples {:.2e} (limit 1e-6)", worst.0),
    );
    v.note(format!("worst triple {}", worst.1));
    v
}

fn noise() -> Verdict {
    let mut v = Verdict::new();
    let truth = bench::benchmark(100, 100).unwrap();
    let cfg = NewtonConfig::default();
    let seeds = 0..20u64;

    let (mut finite, mut ratios) = (true, Vec::new());
    for seed in seeds.clone() {
        let cells = bench::noise_sweep(
            &truth,
            Method::Integration,
            &cfg,
            &[0.01, 0.03, 0.05],
            seed,
            NoiseKind::GaussianRelative,
            None,
        )
        .unwrap();
        finite &= cells
            .iter()
            .all(|c| c.outcome.converged() && c.outcome.trace.as_slice().iter().all(|p| p.is_finite()));
        let er = |i: usize| cells[i].report.map_or(f64::INFINITY, |r| r.er_p);
        ratios.push(er(2) / er(0));
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    v.check(
        finite,
        "integration completes with finite p-traces at delta 0.01, 0.03, 0.05 for 20 seeds".into(),
    );
    v.check(
        max_ratio <= 8.0,
        format!("max er_p(0.05)/er_p(0.01) over 20 seeds {max_ratio:.2} (limit 8)"),
    );

    let clean = bench::score(&bench::identify(&truth.data, Method::Newton, &cfg).unwrap(), &truth)
        .unwrap()
        .er_p;
    let mut broken = 0;
    for seed in seeds {
        let cells = bench::noise_sweep(
            &truth,
            Method::Newton,
            &cfg,
            &[0.01],
            seed,
            NoiseKind::GaussianRelative,
            None,
        )
        .unwrap();
        match cells[0].report {
            None => broken += 1,
            Some(r) if r.er_p > 10.0 * clean => broken += 1,
            Some(_) => {}
        }
    }
    v.check(
        broken >= 16,
        format!("Newton at delta=0.01 fails or has er_p > 10x clean ({clean:.2e}) on {broken}/20 seeds (need 16)"),
    );
    v
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let tmp = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &[
            "invert",
            "--method",
            "integration",
            "--noise-delta",
            "0.02",
            "--seed",
            "7",
            "--N",
            "60",
            "--M",
            "60",
        ],
        &[
            "noise-sweep",
            "--method",
            "newton",
            "--allow-unstable",
            "--deltas",
            "0,0.001,0.01",
            "--seed",
            "3",
            "--N",
            "50",
            "--M",
            "50",
        ],
        &[
            "export",
            "--noise-delta",
            "0.01",
            "--seed",
            "11",
            "--N",
            "20",
            "--M",
            "20",
        ],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{}-{rep}", args[0]));
            let out = Command::new(env!("CARGO_BIN_EXE_diffinv"))
                .args(args)
                .arg("--out-dir")
                .arg(&dir)
                .output()
                .unwrap();
            v.note(format!("{} run {rep}: exit code {:?}", args[0], out.status.code()));
            outputs.push(read_dir(&dir));
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
        v.check(
            same,
            format!("{}: {} files byte-identical across two runs", args[0], outputs[0].len()),
        );
    }
    v
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 8] = [
        ("table1-integration-fixed-h", table1),
        ("table2-integration-tau-eq-h", table2),
        ("table3-4-newton", tables34),
        ("convergence-order", convergence_order),
        ("stability", stability),
        ("jacobian", jacobian),
        ("noise-behaviour", noise),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let verdict = run();
        println!("{} {name}", if verdict.pass { "PASS" } else { "FAIL" });
        for d in &verdict.details {
            println!("    {d}");
        }
        failed += usize::from(!verdict.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
