//! Scenario files: TOML with the sections `mesh`, `boundary`, `coefficient`,
//! `data` and `checks`.
//!
//! ```toml
//! name = "checkerboard-mixed"
//!
//! [mesh]
//! kind = "square"        # square | disk | file
//! levels = [16, 32, 64]  # divisions (square) or rings (disk); last is finest
//!
//! [boundary]
//! left = "D"             # per side for squares, or `uniform = "N"`
//!
//! [coefficient]
//! kind = "checkerboard"  # constant | checkerboard | radial-dini
//! contrast = 100.0
//!
//! [data]
//! f = "1"
//! fvec = ["0", "0"]
//! h = "0"
//! g = "0"
//!
//! [checks]
//! energy = true
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::{CoefficientBounds, DomainGeometry};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fem::{
    build_disk, build_structured_square, read_mesh, BoundaryTag, Coefficient, Mesh, Point, ProblemData, SideTags, SquareTags,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub boundary: BoundarySpec,
    pub coefficient: CoefficientSpec,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub checks: ChecksSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    Square,
    Disk,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub kind: MeshKind,
    /// Refinement levels, coarse to fine. Unused for `file`.
    #[serde(default)]
    pub levels: Vec<usize>,
    /// Mesh file for `file`, relative to the scenario file.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Poincaré constant; required for non-convex meshes.
    #[serde(default)]
    pub poincare: Option<f64>,
}

/// Boundary tags. Squares take per-side tags (missing sides are
/// Dirichlet); `uniform` overrides everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(default)]
    pub uniform: Option<BoundaryTag>,
    #[serde(default)]
    pub left: Option<SideTags>,
    #[serde(default)]
    pub right: Option<SideTags>,
    #[serde(default)]
    pub bottom: Option<SideTags>,
    #[serde(default)]
    pub top: Option<SideTags>,
}

impl BoundarySpec {
    fn has_sides(&self) -> bool {
        self.left.is_some() || self.right.is_some() || self.bottom.is_some() || self.top.is_some()
    }

    pub fn square_tags(&self) -> Result<SquareTags> {
        if let Some(tag) = self.uniform {
            if self.has_sides() {
                return Err(Error::Configuration("boundary: give either `uniform` or per-side tags, not both".into()));
            }
            return Ok(SquareTags::uniform(tag));
        }
        let side = |s: &Option<SideTags>| s.clone().unwrap_or(SideTags::Uniform(BoundaryTag::Dirichlet));
        let tags =
            SquareTags { left: side(&self.left), right: side(&self.right), bottom: side(&self.bottom), top: side(&self.top) };
        tags.validate()?;
        Ok(tags)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    Constant,
    Checkerboard,
    RadialDini,
}

/// `constant`: `a ≡ value`.
/// `checkerboard`: `1` and `contrast` on a `cells × cells` board over `[0,1]²`.
/// `radial-dini`: `a0 + l |x - center|^gamma`, `0 < gamma ≤ 1`, whose
/// modulus `l t^gamma` has Dini integral `l/gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub kind: CoefficientKind,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub contrast: Option<f64>,
    #[serde(default)]
    pub cells: Option<usize>,
    #[serde(default)]
    pub a0: Option<f64>,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub center: Option<Point>,
    /// Dini integral `C_a` to declare for a constant coefficient (any
    /// positive value is admissible there).
    #[serde(default)]
    pub dini: Option<f64>,
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingParameters(vec![format!("coefficient.{what}")]))
}

impl CoefficientSpec {
    pub fn constant(value: f64) -> Self {
        CoefficientSpec {
            kind: CoefficientKind::Constant,
            value: Some(value),
            contrast: None,
            cells: None,
            a0: None,
            l: None,
            gamma: None,
            center: None,
            dini: None,
        }
    }

    fn check_fields(&self) -> Result<()> {
        let allowed: &[&str] = match self.kind {
            CoefficientKind::Constant => &["value", "dini"],
            CoefficientKind::Checkerboard => &["contrast", "cells"],
            CoefficientKind::RadialDini => &["a0", "l", "gamma", "center"],
        };
        let given = [
            ("value", self.value.is_some()),
            ("contrast", self.contrast.is_some()),
            ("cells", self.cells.is_some()),
            ("a0", self.a0.is_some()),
            ("l", self.l.is_some()),
            ("gamma", self.gamma.is_some()),
            ("center", self.center.is_some()),
            ("dini", self.dini.is_some()),
        ];
        for (name, set) in given {
            if set && !allowed.contains(&name) {
                return Err(Error::Configuration(format!("coefficient: `{name}` does not apply to kind {:?}", self.kind)));
            }
        }
        Ok(())
    }

    /// Cellwise coefficient and its declared bounds.
    pub fn build(&self, mesh: &Mesh) -> Result<(Coefficient, CoefficientBounds)> {
        self.check_fields()?;
        match self.kind {
            CoefficientKind::Constant => {
                let a = need(self.value, "value")?;
                let mut b = CoefficientBounds::constant(a)?;
                if let Some(c) = self.dini {
                    b = b.with_dini(c)?;
                }
                Ok((Coefficient::constant(mesh, a)?, b))
            }
            CoefficientKind::Checkerboard => {
                let contrast = need(self.contrast, "contrast")?;
                if !(contrast >= 1.0) {
                    return Err(Error::Configuration(format!("coefficient: contrast must be >= 1 (got {contrast})")));
                }
                let k = self.cells.unwrap_or(2);
                if k == 0 {
                    return Err(Error::Configuration("coefficient: cells must be positive".into()));
                }
                let kf = k as f64;
                let a = Coefficient::from_fn(mesh, |p| {
                    let (i, j) = ((p[0] * kf).floor() as i64, (p[1] * kf).floor() as i64);
                    if (i + j) % 2 == 0 {
                        1.0
                    } else {
                        contrast
                    }
                })?;
                Ok((a, CoefficientBounds::new(1.0, contrast)?))
            }
            CoefficientKind::RadialDini => {
                let a0 = need(self.a0, "a0")?;
                let l = need(self.l, "l")?;
                let gamma = need(self.gamma, "gamma")?;
                if !(gamma > 0.0 && gamma <= 1.0) || !(l > 0.0) {
                    return Err(Error::Configuration(format!(
                        "coefficient: radial-dini needs l > 0 and 0 < gamma <= 1 (got l = {l}, gamma = {gamma})"
                    )));
                }
                let c = self.center.unwrap_or([0.5, 0.5]);
                let dist = |p: Point| (p[0] - c[0]).hypot(p[1] - c[1]);
                let reach = mesh.vertices().iter().map(|&p| dist(p)).fold(0.0, f64::max);
                let a = Coefficient::from_fn(mesh, |p| a0 + l * dist(p).powf(gamma))?;
                let b = CoefficientBounds::new(a0, a0 + l * reach.powf(gamma))?.with_dini(l / gamma)?;
                Ok((a, b))
            }
        }
    }
}

/// Closed-form data in the expression language, over `x` and `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default = "zero")]
    pub f: String,
    #[serde(default = "zero2")]
    pub fvec: [String; 2],
    #[serde(default = "zero")]
    pub h: String,
    #[serde(default = "zero")]
    pub g: String,
}

fn zero() -> String {
    "0".into()
}

fn zero2() -> [String; 2] {
    [zero(), zero()]
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec { f: zero(), fvec: zero2(), h: zero(), g: zero() }
    }
}

/// Parsed data expressions, callable at points.
#[derive(Debug, Clone)]
pub struct DataFns {
    pub f: Expr,
    pub fvec: [Expr; 2],
    pub h: Expr,
    pub g: Expr,
}

pub(crate) fn parse_xy(src: &str, what: &str) -> Result<Expr> {
    let e = Expr::parse(src).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse { location: format!("{what}, {location}"), message },
        other => other,
    })?;
    if let Some(v) = e.variables().into_iter().find(|v| v != "x" && v != "y") {
        return Err(Error::Parse {
            location: what.to_string(),
            message: format!("unknown variable `{v}` (only x and y are bound)"),
        });
    }
    Ok(e)
}

/// Evaluates an expression that only uses `x` and `y`.
pub(crate) fn at(e: &Expr, p: Point) -> f64 {
    e.eval_xy(p[0], p[1]).unwrap_or(f64::NAN)
}

impl DataFns {
    pub fn f(&self, p: Point) -> f64 {
        at(&self.f, p)
    }

    pub fn fvec(&self, p: Point) -> Point {
        [at(&self.fvec[0], p), at(&self.fvec[1], p)]
    }

    pub fn h(&self, p: Point) -> f64 {
        at(&self.h, p)
    }

    pub fn g(&self, p: Point) -> f64 {
        at(&self.g, p)
    }

    /// `g ≡ 0` as written.
    pub fn g_is_zero(&self) -> bool {
        self.g == Expr::Num(0.0)
    }

    /// Discrete data on `mesh`; non-finite values are configuration errors.
    pub fn discretize(&self, mesh: &Mesh) -> Result<ProblemData> {
        let d = ProblemData::from_fns(mesh, |p| self.f(p), |p| self.fvec(p), |p| self.h(p), |p| self.g(p));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&d.f) || !d.fvec.iter().all(|v| finite(v)) || !finite(&d.h) || !finite(&d.g) {
            return Err(Error::Configuration("data: expressions are not finite at some quadrature point".into()));
        }
        d.validate(mesh)?;
        Ok(d)
    }
}

impl DataSpec {
    pub fn parse(&self) -> Result<DataFns> {
        Ok(DataFns {
            f: parse_xy(&self.f, "data.f")?,
            fvec: [parse_xy(&self.fvec[0], "data.fvec[0]")?, parse_xy(&self.fvec[1], "data.fvec[1]")?],
            h: parse_xy(&self.h, "data.h")?,
            g: parse_xy(&self.g, "data.g")?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    /// `‖∇u_h‖₂` against the energy bound.
    #[serde(default)]
    pub energy: bool,
    /// `q`-list for `‖∇u_h‖_q` against the `W^{1,q}` bound (`g = 0`).
    #[serde(default)]
    pub w1q: Vec<f64>,
    /// `p`-list for the extrapolated sup against the global `L^∞` bound.
    #[serde(default)]
    pub linf: Vec<f64>,
    #[serde(default)]
    pub level_decay: Option<LevelDecaySpec>,
    #[serde(default)]
    pub caccioppoli: Vec<BallSpec>,
    #[serde(default)]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default)]
    pub sola: Option<SolaSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDecaySpec {
    /// Number of equally spaced levels in `[0, sup|u_h|)`.
    #[serde(default = "default_decay_levels")]
    pub levels: usize,
    /// Exponent `α` of the decay law; irrelevant on an equally spaced grid.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_decay_levels() -> usize {
    20
}

fn default_alpha() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Point,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

/// A manufactured solution; without `u`, the finest level is the
/// reference (nested square meshes only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    #[serde(default)]
    pub u: Option<String>,
    #[serde(default)]
    pub grad: Option<[String; 2]>,
    /// Expected rates; without them the rates are report-only.
    #[serde(default)]
    pub l2_rate: Option<f64>,
    #[serde(default)]
    pub energy_rate: Option<f64>,
    #[serde(default = "default_rate_tol")]
    pub tolerance: f64,
}

fn default_rate_tol() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolaSpec {
    pub q: f64,
    pub m: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub sources: Vec<Point>,
    #[serde(default = "default_kernel_q")]
    pub q: f64,
    /// Every `stride`-th admissible vertex is sampled.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Also check `|∇_y E|` against the Dini gradient bound.
    #[serde(default)]
    pub gradient: bool,
}

fn default_kernel_q() -> f64 {
    1.2
}

fn default_stride() -> usize {
    1
}

fn toml_error(location: &str, text: &str, e: toml::de::Error) -> Error {
    let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
    Error::Parse {
        location: match line {
            Some(l) => format!("{location}:line {l}"),
            None => location.to_string(),
        },
        message: e.message().to_string(),
    }
}

impl Scenario {
    pub fn from_toml(text: &str, location: &str) -> Result<Scenario> {
        let s: Scenario = toml::from_str(text).map_err(|e| toml_error(location, text, e))?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario file; a relative mesh path is resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Scenario::from_toml(&text, &path.display().to_string())?;
        if let (Some(p), Some(dir)) = (&s.mesh.path, path.parent()) {
            if p.is_relative() {
                s.mesh.path = Some(dir.join(p));
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(format!("scenario `{}`: {m}", self.name)));
        if self.name.trim().is_empty() {
            return Err(Error::Configuration("scenario name must not be empty".into()));
        }
        match self.mesh.kind {
            MeshKind::File => {
                if self.mesh.path.is_none() {
                    return Err(Error::MissingParameters(vec!["mesh.path".into()]));
                }
                if !self.mesh.levels.is_empty() {
                    return bad("mesh.levels does not apply to file meshes".into());
                }
            }
            kind => {
                if self.mesh.path.is_some() {
                    return bad("mesh.path only applies to kind = \"file\"".into());
                }
                if self.mesh.levels.is_empty() {
                    return Err(Error::MissingParameters(vec!["mesh.levels".into()]));
                }
                let min = if kind == MeshKind::Square { 2 } else { 1 };
                if self.mesh.levels.iter().any(|&m| m < min) || self.mesh.levels.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("mesh.levels must increase strictly and be >= {min}"));
                }
            }
        }
        if self.mesh.kind != MeshKind::Square && self.boundary.has_sides() {
            return bad("per-side boundary tags only apply to square meshes".into());
        }
        if self.mesh.kind == MeshKind::Square {
            self.boundary.square_tags()?;
        }
        if self.coefficient.kind == CoefficientKind::Checkerboard {
            if self.mesh.kind != MeshKind::Square {
                return bad("checkerboard coefficients need a square mesh".into());
            }
            let k = self.coefficient.cells.unwrap_or(2);
            if self.mesh.levels.iter().any(|m| m % k.max(1) != 0) {
                return bad(format!("every level must be a multiple of the {k} checkerboard cells"));
            }
        }
        self.coefficient.check_fields()?;
        self.data.parse()?;
        let c = &self.checks;
        let needs_two = !c.linf.is_empty() || c.convergence.is_some();
        if needs_two && self.mesh.levels.len() < 2 {
            return bad("linf and convergence checks need at least two mesh levels".into());
        }
        if !c.linf.is_empty() {
            let l = &self.mesh.levels;
            if l[l.len() - 1] != 2 * l[l.len() - 2] {
                return bad("extrapolation needs the last two levels to differ by a factor 2".into());
            }
        }
        if let Some(cv) = &c.convergence {
            if cv.u.is_some() != cv.grad.is_some() {
                return bad("checks.convergence needs both `u` and `grad`, or neither".into());
            }
            if let (Some(u), Some(g)) = (&cv.u, &cv.grad) {
                parse_xy(u, "checks.convergence.u")?;
                parse_xy(&g[0], "checks.convergence.grad[0]")?;
                parse_xy(&g[1], "checks.convergence.grad[1]")?;
            } else if self.mesh.kind != MeshKind::Square {
                return bad("convergence against the finest level needs nested square meshes".into());
            } else if self.mesh.levels.windows(2).any(|w| w[1] % w[0] != 0) {
                return bad("convergence against the finest level needs each level to divide the next".into());
            }
        }
        if let Some(s) = &c.sola {
            if s.m.is_empty() || s.m.contains(&0) {
                return bad("checks.sola.m must list positive integers".into());
            }
        }
        if let Some(k) = &c.kernel {
            if k.sources.is_empty() {
                return bad("checks.kernel.sources must not be empty".into());
            }
        }
        for b in &c.caccioppoli {
            if !(b.r > 0.0 && b.r < b.big_r) {
                return Err(Error::domain("caccioppoli", "0 < r < R", format!("r = {}, R = {}", b.r, b.big_r)));
            }
        }
        Ok(())
    }

    /// Meshes for every level, coarse to fine.
    pub fn meshes(&self) -> Result<Vec<Arc<Mesh>>> {
        match self.mesh.kind {
            MeshKind::Square => {
                let tags = self.boundary.square_tags()?;
                self.mesh.levels.iter().map(|&m| Ok(Arc::new(build_structured_square(m, &tags)?))).collect()
            }
            MeshKind::Disk => self
                .mesh
                .levels
                .iter()
                .map(|&m| {
                    let disk = build_disk(m)?;
                    Ok(Arc::new(match self.boundary.uniform {
                        Some(tag) => disk.retag(|_| tag),
                        None => disk,
                    }))
                })
                .collect(),
            MeshKind::File => {
                let mesh = read_mesh(self.mesh.path.as_ref().expect("validated"))?;
                Ok(vec![Arc::new(match self.boundary.uniform {
                    Some(tag) => mesh.retag(|_| tag),
                    None => mesh,
                })])
            }
        }
    }

    pub fn geometry(&self, mesh: &Mesh) -> Result<DomainGeometry> {
        mesh.geometry(self.mesh.poincare)
    }
}
