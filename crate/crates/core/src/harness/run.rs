use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{
    dini_grad_bound, dirac_w1q_bound, green_sup_bound, h1_mixed_bound, h1_neumann_bound, linf_global_bound, w1q_bound,
    CoefficientBounds, DataNorms, DomainGeometry, Quantity,
};
use crate::error::{Error, Result};
use crate::fem::{
    caccioppoli_ratio, dirichlet_extension_energy, grad_norm, sup_norm, Coefficient, DiscreteField, Mesh, ProblemData,
};
use crate::green::{decay_check, gradient_decay_check, sample_points, DecayReport, KernelKind, KernelSolver};

use super::report::{CheckKind, CheckRecord, MarginReport, Relation, SuiteReport, CACCIOPPOLI_SLACK};
use super::scenario::{parse_xy, DataFns, MeshKind, Scenario};
use super::studies::{
    convergence_study, level_decay_study, richardson, sola_study, solve_data, uniform_levels, Manufactured, NormCalculator,
};

/// One refinement level with everything the checks need.
struct Level {
    label: usize,
    mesh: Arc<Mesh>,
    coeff: Coefficient,
    data: ProblemData,
}

struct Context<'a> {
    scenario: &'a Scenario,
    fns: DataFns,
    levels: Vec<Level>,
    bounds: CoefficientBounds,
    geom: DomainGeometry,
    finest: DiscreteField,
}

impl Context<'_> {
    fn fine(&self) -> &Level {
        self.levels.last().expect("at least one level")
    }

    fn norms(&self) -> NormCalculator<'_> {
        let l = self.fine();
        NormCalculator { mesh: &l.mesh, fns: &self.fns, data: &l.data }
    }

    fn require_zero_g(&self, check: &str) -> Result<()> {
        if self.fine().data.g.iter().any(|v| *v != 0.0) {
            return Err(Error::Configuration(format!("{check} needs g = 0")));
        }
        Ok(())
    }
}

fn in_check<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::InCheck { check: id.to_string(), source: Box::new(e) })
}

fn fmt_exp(v: f64) -> String {
    format!("{v}")
}

fn energy_check(cx: &Context) -> Result<Vec<CheckRecord>> {
    let l = cx.fine();
    let nc = cx.norms();
    let mut norms = DataNorms::new().with(Quantity::Fvec, 2.0, nc.fvec(2.0)?).with(Quantity::F, 2.0, nc.f(2.0)?);
    let mixed = l.mesh.has_dirichlet();
    if cx.geom.gamma_measure > 0.0 {
        norms = norms.with(Quantity::H, 2.0, nc.h(2.0)?);
    }
    let report = if mixed {
        let ext = dirichlet_extension_energy(&l.mesh, &l.coeff, &l.data.g)?;
        h1_mixed_bound(&cx.geom, &cx.bounds, &norms.with(Quantity::GradGExt, 2.0, ext))?
    } else {
        h1_neumann_bound(&cx.geom, &cx.bounds, &norms)?
    };
    let value = grad_norm(&cx.finest, &l.mesh, 2.0)?;
    Ok(vec![CheckRecord::certified("energy", &report.formula_id, value, report.bound)])
}

fn w1q_check(cx: &Context, q: f64) -> Result<Vec<CheckRecord>> {
    cx.require_zero_g("the W^{1,q} check")?;
    let l = cx.fine();
    let nc = cx.norms();
    let report = w1q_bound(&cx.geom, &cx.bounds, nc.fvec(2.0)?, nc.f(1.0)?, nc.h(1.0)?, q, l.mesh.has_dirichlet())?;
    let value = grad_norm(&cx.finest, &l.mesh, q)?;
    Ok(vec![CheckRecord::certified(format!("w1q/q={}", fmt_exp(q)), &report.formula_id, value, report.bound)])
}

fn linf_check(cx: &Context, p: f64) -> Result<Vec<CheckRecord>> {
    let n = cx.geom.n.as_f64();
    let nc = cx.norms();
    let norms = DataNorms::new()
        .with(Quantity::G, f64::INFINITY, nc.g_inf())
        .with(Quantity::Fvec, p, nc.fvec(p)?)
        .with(Quantity::F, n * p / (p + n), nc.f(n * p / (p + n))?)
        .with(Quantity::H, (n - 1.0) * p / n, nc.h((n - 1.0) * p / n)?);
    let report = linf_global_bound(p, &cx.geom, &cx.bounds, &norms)?;
    let k = cx.levels.len();
    let coarse = &cx.levels[k - 2];
    let s_coarse = sup_norm(&solve_data(&coarse.mesh, &coarse.coeff, &coarse.data)?);
    let s_fine = sup_norm(&cx.finest);
    let value = richardson(s_coarse, s_fine);
    let mut rec =
        CheckRecord::new(format!("linf/p={}", fmt_exp(p)), CheckKind::Asymptotic, Relation::AtMost, value, report.bound, 1.0)
            .with_formula(&report.formula_id)
            .with_detail(format!(
                "sup |u_h| = {s_coarse:e} (level {}), {s_fine:e} (level {}); extrapolated",
                coarse.label,
                cx.fine().label
            ));
    rec.formula_id = Some(report.formula_id);
    Ok(vec![rec])
}

fn level_decay_check(cx: &Context) -> Result<Vec<CheckRecord>> {
    let spec = cx.scenario.checks.level_decay.as_ref().expect("requested");
    let l = cx.fine();
    let table = level_decay_study(&cx.finest, &l.mesh, &uniform_levels(&cx.finest, spec.levels), spec.alpha)?;
    Ok(vec![CheckRecord::new("level-decay", CheckKind::Empirical, Relation::AtLeast, table.beta, 1.0, 1.0)
        .with_detail(format!("fitted beta over {} levels", table.rows.iter().filter(|r| r.1 > 0.0).count()))])
}

fn caccioppoli_checks(cx: &Context) -> Result<Vec<CheckRecord>> {
    let l = cx.fine();
    cx.scenario
        .checks
        .caccioppoli
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if l.mesh.distance_to_boundary(b.center) < b.big_r || !l.mesh.contains(b.center) {
                return Err(Error::domain(
                    "caccioppoli",
                    "ball B_R(x) inside the domain",
                    format!("{:?}, R = {}", b.center, b.big_r),
                ));
            }
            let (lhs, rhs) = caccioppoli_ratio(&cx.finest, &l.mesh, &cx.bounds, b.center, b.r, b.big_r)?;
            Ok(CheckRecord::new(
                format!("caccioppoli/{i}"),
                CheckKind::Empirical,
                Relation::AtMost,
                lhs,
                rhs,
                1.0 / CACCIOPPOLI_SLACK,
            )
            .with_detail(format!("x = ({}, {}), r = {}, R = {}", b.center[0], b.center[1], b.r, b.big_r)))
        })
        .collect()
}

fn convergence_checks(cx: &Context) -> Result<Vec<CheckRecord>> {
    let spec = cx.scenario.checks.convergence.as_ref().expect("requested");
    let exact = match (&spec.u, &spec.grad) {
        (Some(u), Some(g)) => Some(Manufactured {
            u: parse_xy(u, "checks.convergence.u")?,
            grad: [parse_xy(&g[0], "checks.convergence.grad[0]")?, parse_xy(&g[1], "checks.convergence.grad[1]")?],
        }),
        _ => None,
    };
    let levels: Vec<_> = cx.levels.iter().map(|l| (l.label, &*l.mesh, &l.coeff, &l.data)).collect();
    let table = convergence_study(&levels, exact.as_ref())?;
    let mut out = Vec::new();
    for w in table.rows.windows(2) {
        let span = format!("{}-{}", w[0].level, w[1].level);
        for (name, rate, want) in [("l2", w[1].l2_rate, spec.l2_rate), ("energy", w[1].energy_rate, spec.energy_rate)] {
            let Some(rate) = rate else { continue };
            let rec = match want {
                Some(want) => CheckRecord::new(
                    format!("convergence/{name}/{span}"),
                    CheckKind::Empirical,
                    Relation::Near { tol: spec.tolerance },
                    rate,
                    want,
                    0.0,
                ),
                None => {
                    CheckRecord::new(format!("convergence/{name}/{span}"), CheckKind::Report, Relation::AtLeast, rate, 0.0, 0.0)
                }
            };
            out.push(rec.with_detail(if table.against_finest {
                "observed order against the finest level"
            } else {
                "observed order"
            }));
        }
    }
    Ok(out)
}

fn sola_checks(cx: &Context) -> Result<Vec<CheckRecord>> {
    let spec = cx.scenario.checks.sola.as_ref().expect("requested");
    let l = cx.fine();
    let r = sola_study(&l.mesh, &cx.geom, &l.coeff, &cx.bounds, &cx.fns, &l.data, spec.q, &spec.m)?;
    let mut out: Vec<CheckRecord> = r
        .rows
        .iter()
        .map(|row| {
            CheckRecord::certified(format!("sola/m={}", row.m), &r.bound.formula_id, row.grad_q, row.bound)
                .with_detail(format!("q = {}, ||f||_1 = {:e}", r.q, r.f_l1))
        })
        .collect();
    for w in r.rows.windows(2) {
        out.push(
            CheckRecord::new(
                format!("sola/cauchy/m={}", w[1].m),
                CheckKind::Empirical,
                Relation::Less,
                w[1].cauchy,
                w[0].cauchy,
                1.0,
            )
            .with_detail(format!("||grad(u_2m - u_m)||_q against m = {}", w[0].m)),
        );
    }
    Ok(out)
}

fn decay_record(id: String, r: &DecayReport) -> CheckRecord {
    let worst = r.samples.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).expect("at least one sample");
    CheckRecord::new(id, CheckKind::Asymptotic, Relation::AtMost, worst.value, worst.bound, 1.0)
        .with_formula(&r.formula_id)
        .with_detail(format!("{} samples, worst at distance {:e}", r.samples.len(), worst.dist))
}

fn kernel_checks(cx: &Context) -> Result<Vec<CheckRecord>> {
    let spec = cx.scenario.checks.kernel.as_ref().expect("requested");
    let l = cx.fine();
    let kind = KernelKind::for_mesh(&l.mesh);
    let mixed = kind != KernelKind::Neumann;
    let solver = KernelSolver::new(Arc::clone(&l.mesh), &l.coeff, kind)?;
    let sup = green_sup_bound(&cx.geom, &cx.bounds, spec.q, mixed)?;
    let w1q = dirac_w1q_bound(&cx.geom, &cx.bounds, spec.q, mixed)?;
    let grad = if spec.gradient { Some(dini_grad_bound(&cx.geom, &cx.bounds, spec.q, mixed)?) } else { None };
    let mut out = Vec::new();
    for (i, &x) in spec.sources.iter().enumerate() {
        let col = solver.column(x, 0.0)?;
        let samples = sample_points(&col, &l.mesh, spec.stride);
        if samples.is_empty() {
            return Err(Error::Sampling(format!("no vertex lies at least 4h from source {x:?}")));
        }
        out.push(decay_record(format!("kernel/{i}/sup"), &decay_check(&col, &l.mesh, &sup, &samples)?));
        out.push(CheckRecord::certified(
            format!("kernel/{i}/w1q"),
            &w1q.formula_id,
            grad_norm(&col.field, &l.mesh, spec.q)?,
            w1q.bound,
        ));
        if let Some(g) = &grad {
            out.push(decay_record(format!("kernel/{i}/grad"), &gradient_decay_check(&col, &l.mesh, g, &samples)?));
        }
    }
    Ok(out)
}

/// Solves the scenario on every configured level and runs its checks on
/// the finest one (extrapolated checks use the last two levels).
pub fn run_scenario(scenario: &Scenario) -> Result<MarginReport> {
    scenario.validate()?;
    let fns = scenario.data.parse()?;
    let levels = scenario
        .meshes()?
        .into_iter()
        .zip(scenario.mesh.levels.iter().copied().chain(std::iter::repeat(0)))
        .map(|(mesh, label)| {
            let (coeff, bounds) = scenario.coefficient.build(&mesh)?;
            coeff.check_bounds(&bounds)?;
            let data = fns.discretize(&mesh)?;
            Ok((Level { label, mesh, coeff, data }, bounds))
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = levels.last().expect("validated").1;
    let levels: Vec<Level> = levels.into_iter().map(|(l, _)| l).collect();
    let fine = levels.last().expect("validated");
    let geom = scenario.geometry(&fine.mesh)?;
    let start = Instant::now();
    let finest = in_check("solve", solve_data(&fine.mesh, &fine.coeff, &fine.data))?;
    let mut runtimes = vec![("solve".to_string(), start.elapsed().as_secs_f64())];
    let cx = Context { scenario, fns, levels, bounds, geom, finest };
    let c = &scenario.checks;
    let mut checks = Vec::new();
    let mut run = |id: &str, f: &dyn Fn() -> Result<Vec<CheckRecord>>| -> Result<()> {
        let t = Instant::now();
        checks.extend(in_check(id, f())?);
        runtimes.push((id.to_string(), t.elapsed().as_secs_f64()));
        Ok(())
    };
    if c.energy {
        run("energy", &|| energy_check(&cx))?;
    }
    for &q in &c.w1q {
        run(&format!("w1q/q={}", fmt_exp(q)), &|| w1q_check(&cx, q))?;
    }
    for &p in &c.linf {
        run(&format!("linf/p={}", fmt_exp(p)), &|| linf_check(&cx, p))?;
    }
    if c.level_decay.is_some() {
        run("level-decay", &|| level_decay_check(&cx))?;
    }
    if !c.caccioppoli.is_empty() {
        run("caccioppoli", &|| caccioppoli_checks(&cx))?;
    }
    if c.convergence.is_some() {
        run("convergence", &|| convergence_checks(&cx))?;
    }
    if c.sola.is_some() {
        run("sola", &|| sola_checks(&cx))?;
    }
    if c.kernel.is_some() {
        run("kernel", &|| kernel_checks(&cx))?;
    }
    let fine = cx.fine();
    Ok(MarginReport {
        scenario: scenario.name.clone(),
        level: if scenario.mesh.kind == MeshKind::File { 0 } else { fine.label },
        n_vertices: fine.mesh.n_vertices(),
        h_max: fine.mesh.h_max(),
        checks,
        runtimes,
    })
}

/// Every `*.toml` scenario in `dir`, sorted by file name.
pub fn load_suite(dir: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|x| x == "toml") {
            paths.push(p);
        }
    }
    if paths.is_empty() {
        return Err(Error::Configuration(format!("no *.toml scenarios in {}", dir.display())));
    }
    paths.sort();
    let scenarios = paths.iter().map(Scenario::load).collect::<Result<Vec<_>>>()?;
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Configuration(format!("scenario name `{}` used twice", w[0])));
    }
    Ok(scenarios)
}

/// Runs scenarios concurrently; the report is ordered by scenario name and
/// the first error in that order is returned.
pub fn run_suite(scenarios: &[Scenario]) -> Result<SuiteReport> {
    let mut results: Vec<(String, Result<MarginReport>)> =
        scenarios.par_iter().map(|s| (s.name.clone(), run_scenario(s))).collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let reports = results
        .into_iter()
        .map(|(name, r)| r.map_err(|e| Error::InCheck { check: name, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new(reports))
}

/// `run_suite` over every scenario in `dir`.
pub fn verify_dir(dir: impl AsRef<Path>) -> Result<SuiteReport> {
    run_suite(&load_suite(dir)?)
}
