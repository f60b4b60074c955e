//! Command-line interface: `constants`, `bound`, `solve`, `green`, `verify`.
//!
//! Exit codes: 0 when everything passes, 1 when a check fails, 2 for
//! configuration, domain and input errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    degiorgi_local_bound, dini_grad_bound, dirac_w1q_bound, green_sup_bound, h1_mixed_bound, h1_neumann_bound,
    linf_boundary_bound, linf_global_bound, w1p_dini_bound, w1p_measurable_bound, w1q_bound, CoefficientBounds, DataNorms,
    DomainGeometry, Quantity,
};
use crate::constants::{
    hls_sharp, poincare_default, sobolev_best, sobolev_limit_s1, trace_best, unit_ball_volume, unit_sphere_area, Dimension,
};
use crate::error::{Error, Result};
use crate::fem::{field_csv, grad_norm, lq_norm, sup_norm};
use crate::green::{decay_check, sample_points, KernelKind, KernelSolver};
use crate::harness::{load_suite, richardson, run_suite, solve_data, Scenario};

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "ELLIPTIC_CERTS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "elliptic-certs",
    version,
    about = "Explicit a-priori constants for mixed elliptic problems and a P1 verification harness"
)]
pub struct Cli {
    /// Worker threads (default 1, for reproducible output).
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the sharp constants for a dimension.
    Constants(ConstantsArgs),
    /// Evaluate one a-priori bound from a parameter file.
    Bound(BoundArgs),
    /// Solve a scenario on its finest mesh; write the field and its norms.
    Solve(SolveArgs),
    /// Compute a kernel column and check it against the pointwise decay bound.
    Green(GreenArgs),
    /// Run every scenario in a directory and report the margins.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// dircota, neumcota, cota1qv, cotad, supess, supesscor, cota0, gmax, g2, nupf or ppv.
    pub formula: String,
    /// TOML or JSON table of named parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "a-lower")]
    pub a_lower: Option<f64>,
    #[arg(long = "a-upper")]
    pub a_upper: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub scenario: PathBuf,
    /// Output directory for `field.csv` and `norms.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    pub scenario: PathBuf,
    /// Source point `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub source: [f64; 2],
    /// Mollifier radius; 0 puts a unit load on the nearest vertex.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.2)]
    pub q: f64,
    /// Every `stride`-th admissible vertex is sampled.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Output directory for `kernel.csv`, `decay.csv` and `decay.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub dir: PathBuf,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            Ok([a.parse().map_err(|_| format!("bad coordinate {a:?}"))?, b.parse().map_err(|_| format!("bad coordinate {b:?}"))?])
        }
        _ => Err(format!("expected `x,y`, got {s:?}")),
    }
}

/// Whether every check of a command passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Configuration(format!("cannot serialize: {e}")))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

// ----------------------------------------------------------------- constants

/// The constants table for dimension `n`.
pub fn cmd_constants(args: &ConstantsArgs) -> Result<String> {
    let n = Dimension::new(args.n)?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    if let Some(q) = args.q {
        rows.push((format!("S_q (n={}, q={q})", n.get()), sobolev_best(n, q)?));
        rows.push((format!("K_q (n={}, q={q})", n.get()), trace_best(n, q)?));
    }
    rows.push((format!("S_1 (n={})", n.get()), sobolev_limit_s1(n)));
    rows.push((format!("omega_n (n={})", n.get()), unit_ball_volume(n.get())?));
    rows.push((format!("sigma_(n-1) (n={})", n.get()), unit_sphere_area(n.get())?));
    if let Some(l) = args.lambda {
        rows.push((format!("HLS (n={}, lambda={l})", n.get()), hls_sharp(n, l)?));
    }
    let w = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (name, v) in rows {
        let _ = writeln!(s, "{name:<w$}  {v}");
    }
    Ok(s)
}

// --------------------------------------------------------------------- bound

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum ParamValue {
    Num(f64),
    Bool(bool),
}

/// Named parameters of `bound`, from a file and flags.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, ParamValue>,
}

/// Every parameter name `bound` understands.
const KNOWN: &[&str] = &[
    "n", "volume", "diameter", "gamma_d", "gamma", "poincare", "convex", "a_lower", "a_upper", "dini", "q", "p", "t", "s",
    "alpha", "fvec", "f", "h", "g", "grad_g", "radius", "k0", "energy", "neumann",
];

impl Params {
    pub fn parse(text: &str, location: &str) -> Result<Params> {
        let trimmed = text.trim_start();
        let values: BTreeMap<String, ParamValue> = if trimmed.starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| Error::Parse { location: format!("{location}:line {}", e.line()), message: e.to_string() })?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse { location: location.to_string(), message: e.message().to_string() })?
        };
        if let Some(k) = values.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::Parse {
                location: location.to_string(),
                message: format!("unknown parameter `{k}` (known: {})", KNOWN.join(", ")),
            });
        }
        Ok(Params { values })
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.values.insert(name.to_string(), ParamValue::Num(v));
    }

    fn num(&self, name: &str) -> Result<Option<f64>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(ParamValue::Num(v)) => Ok(Some(*v)),
            Some(ParamValue::Bool(_)) => Err(Error::Configuration(format!("parameter `{name}` must be a number"))),
        }
    }

    fn flag(&self, name: &str) -> Result<bool> {
        match self.values.get(name) {
            None => Ok(false),
            Some(ParamValue::Bool(b)) => Ok(*b),
            Some(ParamValue::Num(_)) => Err(Error::Configuration(format!("parameter `{name}` must be true or false"))),
        }
    }

    /// Fails listing every missing name at once.
    fn require(&self, names: &[&str]) -> Result<()> {
        let missing: Vec<String> = names.iter().filter(|n| !self.values.contains_key(**n)).map(|n| n.to_string()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingParameters(missing))
        }
    }

    fn get(&self, name: &str) -> Result<f64> {
        self.num(name)?.ok_or_else(|| Error::MissingParameters(vec![name.to_string()]))
    }

    fn or_zero(&self, name: &str) -> Result<f64> {
        Ok(self.num(name)?.unwrap_or(0.0))
    }

    fn dim(&self) -> Result<Dimension> {
        let n = self.get("n")?;
        if n.fract() != 0.0 || n < 0.0 || n > f64::from(u32::MAX) {
            return Err(Error::domain("bound", "integer n >= 2", n));
        }
        Dimension::new(n as u32)
    }

    fn geometry(&self) -> Result<DomainGeometry> {
        let diameter = self.get("diameter")?;
        let convex = self.flag("convex")?;
        Ok(DomainGeometry {
            n: self.dim()?,
            volume: self.get("volume")?,
            diameter,
            gamma_d_measure: self.get("gamma_d")?,
            gamma_measure: self.get("gamma")?,
            poincare: poincare_default(diameter, convex, self.num("poincare")?)?,
            convex,
        })
    }

    fn coefficient(&self) -> Result<CoefficientBounds> {
        let c = CoefficientBounds::new(self.get("a_lower")?, self.get("a_upper")?)?;
        match self.num("dini")? {
            Some(d) => c.with_dini(d),
            None => Ok(c),
        }
    }
}

const GEOMETRY: &[&str] = &["n", "volume", "diameter", "gamma_d", "gamma"];
const COEFFICIENT: &[&str] = &["a_lower", "a_upper"];

/// Canonical names of the `bound` formulas.
pub const FORMULAS: &[(&str, &str)] = &[
    ("dircota", "energy bound, mixed problem"),
    ("neumcota", "energy bound, pure Neumann problem"),
    ("cota1qv", "W^{1,q} bound for L^1 data"),
    ("cotad", "W^{1,q} bound for a Dirac mass"),
    ("supess", "global L^inf bound"),
    ("supesscor", "L^inf bound up to the Neumann boundary"),
    ("cota0", "local L^inf bound"),
    ("gmax", "pointwise Green kernel decay"),
    ("g2", "pointwise kernel gradient decay (Dini coefficient)"),
    ("nupf", "W^{1,p} bound, Dini coefficient"),
    ("ppv", "W^{1,p} bound, measurable coefficient, p > n"),
];

fn required(formula: &str) -> Result<Vec<&'static str>> {
    let mut r: Vec<&str> = Vec::new();
    let with_domain = |extra: &[&'static str]| [GEOMETRY, COEFFICIENT, extra].concat();
    r.extend(match formula {
        "dircota" | "neumcota" => with_domain(&[]),
        "cota1qv" | "cotad" | "gmax" => with_domain(&["q"]),
        "g2" => with_domain(&["q", "dini"]),
        "supess" | "supesscor" | "ppv" => with_domain(&["p"]),
        "nupf" => with_domain(&["p", "t", "f", "dini"]),
        "cota0" => vec!["n", "a_lower", "a_upper", "radius", "k0", "energy"],
        other => {
            let names: Vec<&str> = FORMULAS.iter().map(|f| f.0).collect();
            return Err(Error::Configuration(format!("unknown formula `{other}` (use one of {})", names.join(", "))));
        }
    });
    Ok(r)
}

/// Evaluates `formula` and returns its JSON report.
pub fn cmd_bound(formula: &str, params: &Params) -> Result<String> {
    params.require(&required(formula)?)?;
    let json = match formula {
        "dircota" | "neumcota" => {
            let geom = params.geometry()?;
            let coeff = params.coefficient()?;
            let n = geom.n.as_f64();
            let (t0, s0) = if n > 2.0 { (2.0 * n / (n + 2.0), 2.0 * (n - 1.0) / n) } else { (2.0, 2.0) };
            let mut norms = DataNorms::new();
            if let Some(v) = params.num("fvec")? {
                norms = norms.with(Quantity::Fvec, 2.0, v);
            }
            if let Some(v) = params.num("f")? {
                norms = norms.with(Quantity::F, params.num("t")?.unwrap_or(t0), v);
            }
            if let Some(v) = params.num("h")? {
                norms = norms.with(Quantity::H, params.num("s")?.unwrap_or(s0), v);
            }
            if formula == "dircota" {
                if let Some(v) = params.num("grad_g")? {
                    norms = norms.with(Quantity::GradGExt, 2.0, v);
                }
                to_json(&h1_mixed_bound(&geom, &coeff, &norms)?)?
            } else {
                if params.num("grad_g")?.is_some() {
                    return Err(Error::Configuration("neumcota takes no grad_g (there is no Dirichlet part)".into()));
                }
                to_json(&h1_neumann_bound(&geom, &coeff, &norms)?)?
            }
        }
        "cota1qv" => {
            let geom = params.geometry()?;
            let mixed = geom.is_mixed();
            to_json(&w1q_bound(
                &geom,
                &params.coefficient()?,
                params.or_zero("fvec")?,
                params.or_zero("f")?,
                params.or_zero("h")?,
                params.get("q")?,
                mixed,
            )?)?
        }
        "cotad" => {
            let geom = params.geometry()?;
            let mixed = geom.is_mixed();
            to_json(&dirac_w1q_bound(&geom, &params.coefficient()?, params.get("q")?, mixed)?)?
        }
        "supess" | "supesscor" => {
            let geom = params.geometry()?;
            let p = params.get("p")?;
            let n = geom.n.as_f64();
            let norms = DataNorms::new()
                .with(Quantity::G, f64::INFINITY, params.or_zero("g")?)
                .with(Quantity::Fvec, p, params.or_zero("fvec")?)
                .with(Quantity::F, n * p / (p + n), params.or_zero("f")?)
                .with(Quantity::H, (n - 1.0) * p / n, params.or_zero("h")?);
            let coeff = params.coefficient()?;
            if formula == "supess" {
                to_json(&linf_global_bound(p, &geom, &coeff, &norms)?)?
            } else {
                to_json(&linf_boundary_bound(p, &geom, &coeff, &norms, params.num("alpha")?)?)?
            }
        }
        "cota0" => to_json(&degiorgi_local_bound(
            params.get("radius")?,
            params.get("k0")?,
            params.get("energy")?,
            &params.coefficient()?,
            params.dim()?,
            params.flag("neumann")?,
        )?)?,
        "gmax" | "g2" => {
            let geom = params.geometry()?;
            let mixed = geom.is_mixed();
            let coeff = params.coefficient()?;
            let q = params.get("q")?;
            let decay = if formula == "gmax" {
                green_sup_bound(&geom, &coeff, q, mixed)?
            } else {
                dini_grad_bound(&geom, &coeff, q, mixed)?
            };
            to_json(&decay)?
        }
        "nupf" => {
            let geom = params.geometry()?;
            to_json(&w1p_dini_bound(
                geom.n,
                params.get("p")?,
                params.get("t")?,
                &geom,
                &params.coefficient()?,
                params.get("f")?,
            )?)?
        }
        "ppv" => {
            let geom = params.geometry()?;
            to_json(&w1p_measurable_bound(
                params.get("p")?,
                &geom,
                &params.coefficient()?,
                params.or_zero("fvec")?,
                params.or_zero("f")?,
                params.or_zero("h")?,
            )?)?
        }
        _ => unreachable!("rejected by `required`"),
    };
    Ok(json)
}

fn bound_params(args: &BoundArgs) -> Result<Params> {
    let mut params = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            Params::parse(&text, &path.display().to_string())?
        }
        None => Params::default(),
    };
    for (name, v) in [("a_lower", args.a_lower), ("a_upper", args.a_upper), ("q", args.q), ("p", args.p)] {
        if let Some(v) = v {
            params.set(name, v);
        }
    }
    if let Some(n) = args.n {
        params.set("n", f64::from(n));
    }
    Ok(params)
}

// --------------------------------------------------------------------- solve

#[derive(Debug, Serialize)]
struct LevelSup {
    level: usize,
    h_max: f64,
    sup: f64,
}

#[derive(Debug, Serialize)]
struct SolveNorms {
    scenario: String,
    n_vertices: usize,
    h_max: f64,
    sup: f64,
    l2: f64,
    grad_l2: f64,
    /// `‖∇u_h‖_q` for each `q` of the scenario's `w1q` checks.
    grad_q: BTreeMap<String, f64>,
    levels: Vec<LevelSup>,
    /// Richardson value from the last two levels, when they differ by a factor 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_extrapolated: Option<f64>,
}

/// Solves every level; returns `(field.csv, norms.json)` for the finest.
pub fn cmd_solve(scenario: &Scenario) -> Result<(String, String)> {
    let fns = scenario.data.parse()?;
    let meshes = scenario.meshes()?;
    let mut levels = Vec::new();
    let mut last = None;
    for (i, mesh) in meshes.iter().enumerate() {
        let (coeff, bounds) = scenario.coefficient.build(mesh)?;
        coeff.check_bounds(&bounds)?;
        let u = solve_data(mesh, &coeff, &fns.discretize(mesh)?)?;
        levels.push(LevelSup {
            level: scenario.mesh.levels.get(i).copied().unwrap_or(0),
            h_max: mesh.h_max(),
            sup: sup_norm(&u),
        });
        last = Some(u);
    }
    let u = last.expect("at least one mesh");
    let mesh = meshes.last().expect("at least one mesh");
    let mut grad_q = BTreeMap::new();
    for &q in &scenario.checks.w1q {
        grad_q.insert(format!("{q}"), grad_norm(&u, mesh, q)?);
    }
    let k = scenario.mesh.levels.len();
    let sup_extrapolated = (k >= 2 && scenario.mesh.levels[k - 1] == 2 * scenario.mesh.levels[k - 2])
        .then(|| richardson(levels[k - 2].sup, levels[k - 1].sup));
    let norms = SolveNorms {
        scenario: scenario.name.clone(),
        n_vertices: mesh.n_vertices(),
        h_max: mesh.h_max(),
        sup: sup_norm(&u),
        l2: lq_norm(&u, mesh, 2.0)?,
        grad_l2: grad_norm(&u, mesh, 2.0)?,
        grad_q,
        levels,
        sup_extrapolated,
    };
    Ok((field_csv(mesh, &u), to_json(&norms)?))
}

// --------------------------------------------------------------------- green

#[derive(Debug, Serialize)]
struct GreenSummary<'a> {
    scenario: &'a str,
    kind: KernelKind,
    source: [f64; 2],
    /// Source actually used: the nearest vertex for a nodal load.
    effective_source: [f64; 2],
    rho: f64,
    q: f64,
    formula_id: &'a str,
    constant: f64,
    exponent: f64,
    samples: usize,
    max_ratio: f64,
    pass: bool,
}

/// Kernel column on the finest mesh of `scenario` against the pointwise
/// decay bound; returns `(kernel.csv, decay.csv, decay.json, pass)`.
pub fn cmd_green(scenario: &Scenario, args: &GreenArgs) -> Result<(String, String, String, bool)> {
    let mesh = Arc::clone(scenario.meshes()?.last().expect("at least one mesh"));
    let (coeff, bounds) = scenario.coefficient.build(&mesh)?;
    coeff.check_bounds(&bounds)?;
    let kind = KernelKind::for_mesh(&mesh);
    let geom = scenario.geometry(&mesh)?;
    let decay = green_sup_bound(&geom, &bounds, args.q, kind != KernelKind::Neumann)?;
    let solver = KernelSolver::new(Arc::clone(&mesh), &coeff, kind)?;
    let col = solver.column(args.source, args.rho)?;
    let samples = sample_points(&col, &mesh, args.stride);
    if samples.is_empty() {
        return Err(Error::Sampling("no vertex lies far enough from the source".into()));
    }
    let report = decay_check(&col, &mesh, &decay, &samples)?;
    let summary = GreenSummary {
        scenario: &scenario.name,
        kind,
        source: args.source,
        effective_source: col.source,
        rho: col.rho,
        q: args.q,
        formula_id: &decay.report.formula_id,
        constant: decay.constant,
        exponent: decay.exponent,
        samples: report.samples.len(),
        max_ratio: report.max_ratio,
        pass: report.pass,
    };
    Ok((field_csv(&mesh, &col.field), report.to_csv(), to_json(&summary)?, report.pass))
}

// -------------------------------------------------------------------- verify

/// Runs the suite in `dir`; returns `(text, json, pass)`.
pub fn cmd_verify(dir: &Path) -> Result<(String, String, bool)> {
    let suite = run_suite(&load_suite(dir)?)?;
    Ok((suite.to_text(), suite.to_json()? + "\n", suite.pass))
}

// ----------------------------------------------------------------------- run

/// Installs the global thread pool. Only the first call takes effect.
pub fn init_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::Configuration("--threads must be at least 1".into()));
    }
    // a second initialization (e.g. from tests) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Executes a parsed command line, printing to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    init_threads(cli.threads)?;
    match &cli.command {
        Command::Constants(a) => {
            emit(out, &cmd_constants(a)?)?;
            Ok(Outcome::Pass)
        }
        Command::Bound(a) => {
            let json = cmd_bound(a.formula.as_str(), &bound_params(a)?)?;
            match &a.out {
                Some(p) => write_file(p, &json)?,
                None => emit(out, &json)?,
            }
            Ok(Outcome::Pass)
        }
        Command::Solve(a) => {
            let scenario = Scenario::load(&a.scenario)?;
            let (csv, norms) = cmd_solve(&scenario)?;
            create_dir(&a.out)?;
            write_file(&a.out.join("field.csv"), &csv)?;
            write_file(&a.out.join("norms.json"), &norms)?;
            emit(out, &norms)?;
            Ok(Outcome::Pass)
        }
        Command::Green(a) => {
            let scenario = Scenario::load(&a.scenario)?;
            let (kernel, decay_csv, summary, pass) = cmd_green(&scenario, a)?;
            create_dir(&a.out)?;
            write_file(&a.out.join("kernel.csv"), &kernel)?;
            write_file(&a.out.join("decay.csv"), &decay_csv)?;
            write_file(&a.out.join("decay.json"), &summary)?;
            emit(out, &summary)?;
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Verify(a) => {
            let (text, json, pass) = cmd_verify(&a.dir)?;
            if let Some(p) = &a.out {
                write_file(p, &json)?;
            }
            emit(out, if a.format == Format::Json { &json } else { &text })?;
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_params(extra: &str) -> Params {
        let text = format!(
            "n = 2\nvolume = 1.0\ndiameter = 1.4142135623730951\ngamma_d = 1.0\ngamma = 3.0\nconvex = true\na_lower = 1.0\na_upper = 1.0\n{extra}"
        );
        Params::parse(&text, "p.toml").unwrap()
    }

    fn bound_of(json: &str) -> f64 {
        serde_json::from_str::<serde_json::Value>(json).unwrap()["bound"].as_f64().unwrap()
    }

    #[test]
    fn constants_table() {
        let t = cmd_constants(&ConstantsArgs { n: 3, q: Some(2.0), lambda: None }).unwrap();
        assert!(t.contains("0.4272605"), "{t}");
        let t = cmd_constants(&ConstantsArgs { n: 2, q: None, lambda: None }).unwrap();
        assert!(t.contains(&format!("{}", std::f64::consts::PI)), "{t}");
        let e = cmd_constants(&ConstantsArgs { n: 3, q: Some(3.0), lambda: None }).unwrap_err().to_string();
        assert!(e.contains("q < n") || e.contains("< n"), "{e}");
    }

    #[test]
    fn zero_data_energy_bound_is_zero() {
        assert_eq!(bound_of(&cmd_bound("dircota", &square_params("")).unwrap()), 0.0);
    }

    #[test]
    fn supess_needs_p_above_n() {
        let e = cmd_bound("supess", &square_params("p = 2.0")).unwrap_err();
        assert!(e.to_string().contains("requires p > n"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn missing_parameters_are_listed() {
        let p = Params::parse("n = 2\nvolume = 1.0", "p").unwrap();
        match cmd_bound("cota1qv", &p).unwrap_err() {
            Error::MissingParameters(m) => assert_eq!(m, ["diameter", "gamma_d", "gamma", "a_lower", "a_upper", "q"]),
            e => panic!("{e}"),
        }
        assert!(Params::parse("bogus = 1", "p").is_err());
        assert!(cmd_bound("nope", &p).is_err());
    }

    #[test]
    fn json_params_are_accepted() {
        let p = Params::parse(r#"{"n": 2, "volume": 1, "diameter": 1.5, "gamma_d": 1, "gamma": 3, "convex": true, "a_lower": 2, "a_upper": 2, "f": 1}"#, "p.json").unwrap();
        assert!(bound_of(&cmd_bound("dircota", &p).unwrap()) > 0.0);
    }

    #[test]
    fn point_parser() {
        assert_eq!(parse_point("0.5, -0.25").unwrap(), [0.5, -0.25]);
        assert!(parse_point("1").is_err());
    }
}
