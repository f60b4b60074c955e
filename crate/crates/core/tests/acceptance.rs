//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.
//!
//! Run with `cargo test --release --test acceptance`.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use elliptic_certs::cli::{cmd_verify, init_threads};
use elliptic_certs::constants::{gamma_fn, hls_sharp, sobolev_best, sobolev_limit_s1, trace_best, unit_ball_volume, Dimension};
use elliptic_certs::fem::{
    assemble, build_disk, build_structured_square, solve, sup_norm, BoundaryTag, Coefficient, Mesh, ProblemData, SquareTags,
};
use elliptic_certs::green::{representation_reconstruct, KernelKind, KernelSolver, KERNEL_TOL};
use elliptic_certs::harness::{run_scenario, CheckKind, MarginReport, Scenario};

/// `S_2` for `n = 3`, from the mpmath oracle at 50 digits (`tests/oracles/formula_oracle.py`).
const S2_N3_ORACLE: f64 = 0.427_260_542_862_526_7;

/// Figure quoted for `S_2(n=3)` in the acceptance list; see [`c2_talenti`].
const S2_N3_QUOTED: f64 = 0.427273;

type Outcome = Result<(bool, String), String>;

/// Name, check and time budget.
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(name: &str) -> Result<MarginReport, String> {
    let s = ok(Scenario::load(scenario_dir().join(format!("{name}.toml"))))?;
    ok(run_scenario(&s))
}

fn ok<T>(r: elliptic_certs::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_constants() -> Outcome {
    let dim = |n| ok(Dimension::new(n));
    let mut worst = rel(ok(gamma_fn(0.5))?, PI.sqrt());
    // ω_n by the recursion ω_n = 2π ω_{n-2} / n
    let mut omega = [1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    for n in 2..=10 {
        omega[n] = 2.0 * PI * omega[n - 2] / n as f64;
    }
    for (n, w) in omega.iter().enumerate().skip(1) {
        worst = worst.max(rel(ok(unit_ball_volume(n as u32))?, *w));
    }
    worst = worst.max(rel(sobolev_limit_s1(dim(2)?), 1.0 / (2.0 * PI.sqrt())));
    worst = worst.max(rel(ok(trace_best(dim(3)?, 2.0))?, 1.0 / PI.sqrt()));
    worst = worst.max(rel(ok(hls_sharp(dim(2)?, 1.0))?, 2.0 * PI.sqrt()));
    Ok((worst <= 1e-9, format!("worst relative error {worst:.2e} (need <= 1e-9)")))
}

/// The quoted figure disagrees with its own closed form `4^{1/3}/(√3 π^{2/3})`
/// in the sixth digit; the tolerance is applied against the oracle.
fn c2_talenti() -> Outcome {
    let s = ok(sobolev_best(ok(Dimension::new(3))?, 2.0))?;
    let closed = 4f64.cbrt() / (3f64.sqrt() * PI.powf(2.0 / 3.0));
    let d_oracle = (s - S2_N3_ORACLE).abs();
    let d_closed = (s - closed).abs();
    Ok((
        d_oracle <= 1e-6 && d_closed <= 1e-6,
        format!(
            "S_2(3) = {s:.9}, |oracle diff| {d_oracle:.1e}, |closed-form diff| {d_closed:.1e} (need <= 1e-6); quoted {S2_N3_QUOTED} differs by {:.2e}",
            (s - S2_N3_QUOTED).abs()
        ),
    ))
}

fn c3_convergence() -> Outcome {
    let r = run("manufactured-sine")?;
    let rates: Vec<_> = r.checks.iter().filter(|c| c.id.starts_with("convergence/")).collect();
    let pass = r.level == 128 && rates.len() == 6 && rates.iter().all(|c| c.pass && c.kind == CheckKind::Empirical);
    let text: Vec<String> = rates.iter().map(|c| format!("{} {:.3}", c.id.trim_start_matches("convergence/"), c.value)).collect();
    Ok((pass, format!("finest m = {}; {}", r.level, text.join(", "))))
}

fn c4_inheritance() -> Outcome {
    let mut pass = true;
    let mut text = Vec::new();
    for name in
        ["poisson-dirichlet-square", "dirichlet-checkerboard", "checkerboard-mixed", "neumann-constant", "neumann-checkerboard"]
    {
        let r = run(name)?;
        let c = r.check("energy").ok_or(format!("{name}: no energy check"))?;
        pass &= c.pass && c.kind == CheckKind::Certified;
        text.push(format!("{name} ratio {:.4}", c.ratio.unwrap_or(f64::INFINITY)));
    }
    Ok((pass, text.join(", ")))
}

fn c5_sola() -> Outcome {
    let r = run("sola-singular")?;
    let bounds: Vec<_> = r.checks.iter().filter(|c| c.id.starts_with("sola/m=")).collect();
    let cauchy: Vec<_> = r.checks.iter().filter(|c| c.id.starts_with("sola/cauchy/")).collect();
    let pass = bounds.len() == 3 && cauchy.len() == 2 && r.checks.iter().all(|c| c.pass);
    let text: Vec<String> = cauchy.iter().map(|c| format!("{:.4} < {:.4}", c.value, c.bound)).collect();
    let worst = bounds.iter().filter_map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    Ok((pass, format!("min bound ratio {worst:.1}; Cauchy {}", text.join(", "))))
}

/// `u(1/2, 1/2)` for `-Δu = 1` on the unit square, zero boundary values,
/// by the double sine series over odd `m, n`.
fn center_value_series() -> f64 {
    let sign = |k: u64| if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut sum = 0.0;
    for m in (1..6000u64).step_by(2) {
        let mut row = 0.0;
        for n in (1..6000u64).step_by(2) {
            let (mf, nf) = (m as f64, n as f64);
            row += sign(n) / (nf * (mf * mf + nf * nf));
        }
        sum += sign(m) * row / m as f64;
    }
    16.0 / PI.powi(4) * sum
}

fn c6_linf() -> Outcome {
    let oracle = center_value_series();
    let r = run("poisson-dirichlet-square")?;
    let c = r.check("linf/p=4").ok_or("no linf/p=4 check")?;
    let diff = (c.value - oracle).abs();
    Ok((
        diff <= 1e-4 && (oracle - 0.0736714).abs() <= 1e-6 && c.pass,
        format!(
            "extrapolated sup {:.7}, series {oracle:.7}, diff {diff:.1e}; bound {:.4}, ratio {:.2}",
            c.value,
            c.bound,
            c.ratio.unwrap_or(0.0)
        ),
    ))
}

fn disk_oracle(x: [f64; 2], y: [f64; 2]) -> f64 {
    let r2 = y[0] * y[0] + y[1] * y[1];
    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
    let (sx, sy) = (y[0] / r2, y[1] / r2);
    let image = r2.sqrt() * (x[0] - sx).hypot(x[1] - sy);
    -(d / if r2 == 0.0 { 1.0 } else { image }).ln() / (2.0 * PI)
}

fn c7_kernels() -> Outcome {
    let disk = Arc::new(ok(build_disk(111))?);
    let square = Arc::new(ok(build_structured_square(128, &SquareTags::dirichlet_left()))?);
    if disk.h_max() > 1.0 / 64.0 || square.h_max() > 1.0 / 64.0 {
        return Ok((false, "mesh too coarse".into()));
    }
    let unit = ok(Coefficient::constant(&disk, 1.0))?;
    let board = ok(Coefficient::from_fn(&square, |p| if (p[0] < 0.5) == (p[1] < 0.5) { 1.0 } else { 100.0 }))?;
    let solvers = [
        (Arc::clone(&disk), ok(KernelSolver::new(Arc::clone(&disk), &unit, KernelKind::GreenDirichlet))?),
        (Arc::clone(&square), ok(KernelSolver::new(Arc::clone(&square), &board, KernelKind::GreenMixed))?),
    ];
    let (mut asym, mut neg) = (0f64, 0f64);
    for (mesh, s) in &solvers {
        let picks: Vec<usize> = [[0.1, 0.2], [0.4, 0.6], [0.7, 0.3], [-0.3, -0.4]]
            .iter()
            .filter(|p| mesh.contains(**p))
            .map(|p| mesh.nearest_vertex(*p))
            .collect();
        let cols: Vec<_> = ok(picks.iter().map(|&v| s.nodal_column(v)).collect())?;
        for (a, ca) in picks.iter().zip(&cols) {
            let max = ca.field.values.iter().fold(0f64, |m, v| m.max(v.abs()));
            neg = neg.min(ca.field.values.iter().fold(0f64, |m, v| m.min(*v)) / max);
            for (b, cb) in picks.iter().zip(&cols) {
                asym = asym.max((ca.field.values[*b] - cb.field.values[*a]).abs() / max);
            }
        }
    }
    let mut oracle = 0f64;
    for x in [[0.0, 0.0], [0.3, 0.1], [-0.2, 0.45]] {
        let col = ok(solvers[0].1.column(x, 0.0))?;
        for (i, &y) in disk.vertices().iter().enumerate() {
            let dist = (col.source[0] - y[0]).hypot(col.source[1] - y[1]);
            if dist < 0.2 || y[0].hypot(y[1]) > 1.0 - 1e-9 {
                continue;
            }
            let g = disk_oracle(col.source, y);
            oracle = oracle.max((col.field.values[i] - g).abs() / g);
        }
    }
    let mut decay = Vec::new();
    let mut decay_pass = true;
    for name in ["green-disk", "green-mixed-square"] {
        let r = run(name)?;
        for c in r.checks.iter().filter(|c| c.id.ends_with("/sup") || c.id.ends_with("/grad")) {
            decay_pass &= c.pass;
            decay.push(format!("{name} {} max ratio {:.1e}", c.id, 1.0 / c.ratio.unwrap_or(f64::INFINITY)));
        }
        decay_pass &= r.checks.iter().any(|c| c.id.ends_with("/sup"));
        decay_pass &= name != "green-disk" || r.checks.iter().any(|c| c.id.ends_with("/grad"));
    }
    Ok((
        asym <= 1e-9 && neg >= -1e-10 && oracle <= 0.05 && decay_pass,
        format!("symmetry {asym:.1e}, min/max {neg:.1e}, disk oracle {:.2}%; {}", 100.0 * oracle, decay.join(", ")),
    ))
}

fn representation_gap(mesh: &Mesh, a: &Coefficient, data: &ProblemData) -> Result<f64, String> {
    let direct = ok(solve(&ok(assemble(mesh, a, data))?, KERNEL_TOL))?;
    let rec = ok(representation_reconstruct(mesh, a, data))?;
    let mass = mesh.lumped_mass();
    let shift = if mesh.has_dirichlet() { 0.0 } else { rec.weighted_mean(&mass) - direct.weighted_mean(&mass) };
    let diff = rec.values.iter().zip(&direct.values).fold(0f64, |m, (r, d)| m.max((r - shift - d).abs()));
    Ok(diff / sup_norm(&direct))
}

fn c8_representation() -> Outcome {
    let mut worst = Vec::new();
    for tag in [BoundaryTag::Dirichlet, BoundaryTag::Neumann] {
        let mesh = ok(build_structured_square(40, &SquareTags::uniform(tag)))?;
        if mesh.n_vertices() > 2500 {
            return Ok((false, format!("{} vertices", mesh.n_vertices())));
        }
        let a = ok(Coefficient::from_fn(&mesh, |p| 1.0 + p[0] * p[1]))?;
        // zero mean, so also compatible with the pure Neumann problem
        let data = ProblemData::from_fns(&mesh, |p| (PI * p[0]).cos() * (1.0 + p[1]), |_| [0.0, 0.0], |_| 0.0, |_| 0.0);
        worst.push(representation_gap(&mesh, &a, &data)?);
    }
    Ok((
        worst.iter().all(|g| *g <= 1e-9),
        format!("relative gap dirichlet {:.1e}, neumann {:.1e} (need <= 1e-9)", worst[0], worst[1]),
    ))
}

fn c9_caccioppoli() -> Outcome {
    let r = run("caccioppoli-checkerboard")?;
    let balls: Vec<_> = r.checks.iter().filter(|c| c.id.starts_with("caccioppoli/")).collect();
    let ratios: Vec<f64> = balls.iter().map(|c| c.value / c.bound).collect();
    let pass = balls.len() == 3 && balls.iter().all(|c| c.pass) && ratios.iter().all(|q| *q <= 1.1);
    let text: Vec<String> = ratios.iter().map(|q| format!("{q:.2e}")).collect();
    Ok((pass, format!("lhs/rhs {} on m = {} (need <= 1.1)", text.join(", "), r.level)))
}

fn c10_level_decay() -> Outcome {
    let r = run("poisson-dirichlet-square")?;
    let c = r.check("level-decay").ok_or("no level-decay check")?;
    Ok((c.pass && c.value >= 1.0, format!("beta = {:.3} (need >= 1)", c.value)))
}

fn c11_determinism() -> Outcome {
    let first = ok(cmd_verify(&scenario_dir()))?;
    let second = ok(cmd_verify(&scenario_dir()))?;
    let same = first.0 == second.0 && first.1 == second.1;
    Ok((same, format!("two verify runs at threads = 1, {} JSON bytes, identical: {same}", first.1.len())))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("constants vs closed forms", c1_constants, Some(Duration::from_secs(1))),
        ("sharp Sobolev constant S_2(3)", c2_talenti, None),
        ("FEM convergence rates", c3_convergence, Some(Duration::from_secs(60))),
        ("discrete energy bound inheritance", c4_inheritance, Some(Duration::from_secs(120))),
        ("W^{1,q} SOLA sequence", c5_sola, Some(Duration::from_secs(120))),
        ("extrapolated L^inf", c6_linf, Some(Duration::from_secs(60))),
        ("kernel suite", c7_kernels, Some(Duration::from_secs(180))),
        ("representation identity", c8_representation, Some(Duration::from_secs(60))),
        ("Caccioppoli inequality", c9_caccioppoli, None),
        ("level-set decay", c10_level_decay, None),
        ("determinism", c11_determinism, None),
    ];
    // one worker, so `determinism` runs at threads = 1
    if let Err(e) = init_threads(1) {
        eprintln!("{e}");
        return ExitCode::FAILURE;
    }
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let elapsed = t.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = limit.map_or(String::new(), |l| format!(" of {} s", l.as_secs()));
        println!("{} {:>2} {name}: {detail} [{:.2} s{budget}]", if pass { "PASS" } else { "FAIL" }, i + 1, elapsed.as_secs_f64());
        failed += usize::from(!pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
