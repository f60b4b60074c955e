//! Discrete Green and Neumann kernels.
//!
//! Sign convention: a kernel column `E(x,·)` satisfies
//! `∫ a ∇E·∇v = v(x)`, i.e. `-∇·(a∇E) = δ_x`, which makes the Green kernel
//! nonnegative.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::KernelDecay;
use crate::error::{Error, Result};
use crate::fem::{
    load_vector, mollified_dirac, solve, BoundaryTag, Coefficient, DiscreteField, MeanKind, Mesh, Point, ProblemData,
    SystemOperator,
};

/// Solver tolerance for kernel columns.
pub const KERNEL_TOL: f64 = 1e-12;

/// Vertex limit for full kernel matrices.
pub const REPRESENTATION_MAX_VERTICES: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Dirichlet on `Γ_D`, conormal on `Γ`, both nonempty.
    GreenMixed,
    /// Dirichlet on the whole boundary.
    GreenDirichlet,
    /// Zero domain mean, conormal on the whole boundary.
    Neumann,
}

impl KernelKind {
    fn check(self, mesh: &Mesh) -> Result<()> {
        let d = mesh.boundary_measure(BoundaryTag::Dirichlet) > 0.0;
        let n = mesh.boundary_measure(BoundaryTag::Neumann) > 0.0;
        let ok = match self {
            KernelKind::GreenMixed => d && n,
            KernelKind::GreenDirichlet => d && !n,
            KernelKind::Neumann => !d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::WrongRegime {
                op: "kernel_column",
                detail: format!("kind {self:?} does not match the boundary tags of the mesh"),
            })
        }
    }

    /// The kind the tags of `mesh` call for.
    pub fn for_mesh(mesh: &Mesh) -> KernelKind {
        match (mesh.has_dirichlet(), mesh.boundary_measure(BoundaryTag::Neumann) > 0.0) {
            (true, true) => KernelKind::GreenMixed,
            (true, false) => KernelKind::GreenDirichlet,
            _ => KernelKind::Neumann,
        }
    }
}

/// `E(x,·)` on the mesh. `rho = 0` marks the nodal delta at `vertex`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelColumn {
    pub source: Point,
    pub field: DiscreteField,
    pub kind: KernelKind,
    pub rho: f64,
    pub vertex: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CacheKey {
    Nodal(u64, usize),
    Mollified(u64, [u64; 2], u64),
}

/// Kernel columns on one mesh and coefficient, sharing the operator and
/// caching columns by source.
pub struct KernelSolver {
    mesh: Arc<Mesh>,
    op: Arc<SystemOperator>,
    kind: KernelKind,
    hash: u64,
    tol: f64,
    cache: Mutex<HashMap<CacheKey, Arc<KernelColumn>>>,
}

impl KernelSolver {
    pub fn new(mesh: Arc<Mesh>, coeff: &Coefficient, kind: KernelKind) -> Result<Self> {
        kind.check(&mesh)?;
        let op = SystemOperator::new(&mesh, coeff, MeanKind::Domain)?;
        Ok(KernelSolver { hash: mesh.content_hash(), mesh, op, kind, tol: KERNEL_TOL, cache: Mutex::new(HashMap::new()) })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn operator(&self) -> &Arc<SystemOperator> {
        &self.op
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    fn cached(&self, key: CacheKey, make: impl FnOnce() -> Result<KernelColumn>) -> Result<Arc<KernelColumn>> {
        if let Some(c) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(c));
        }
        let col = Arc::new(make()?);
        // a concurrent insert of the same key carries the same column
        Ok(Arc::clone(self.cache.lock().expect("cache lock").entry(key).or_insert(col)))
    }

    fn solve_load(&self, load: Vec<f64>) -> Result<DiscreteField> {
        solve(&self.op.system(load, None), self.tol)
    }

    /// Column for a unit load at `vertex`.
    pub fn nodal_column(&self, vertex: usize) -> Result<Arc<KernelColumn>> {
        if vertex >= self.mesh.n_vertices() {
            return Err(Error::domain("nodal_column", "vertex index in range", vertex));
        }
        self.cached(CacheKey::Nodal(self.hash, vertex), || {
            let mut load = vec![0.0; self.mesh.n_vertices()];
            load[vertex] = 1.0;
            Ok(KernelColumn {
                source: self.mesh.vertices()[vertex],
                field: self.solve_load(load)?,
                kind: self.kind,
                rho: 0.0,
                vertex: Some(vertex),
            })
        })
    }

    /// Column for `x`: nodal delta at the nearest vertex when `rho = 0`,
    /// otherwise the mollified Dirac with radius `max(2 h_max, rho)`.
    pub fn column(&self, x: Point, rho: f64) -> Result<Arc<KernelColumn>> {
        if !self.mesh.contains(x) {
            return Err(Error::domain("kernel_column", "source point inside the domain", format!("{x:?}")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain("kernel_column", "rho >= 0", rho));
        }
        if rho == 0.0 {
            return self.nodal_column(self.mesh.nearest_vertex(x));
        }
        let rho = rho.max(2.0 * self.mesh.h_max());
        let key = CacheKey::Mollified(self.hash, [x[0].to_bits(), x[1].to_bits()], rho.to_bits());
        self.cached(key, || {
            let mut data = ProblemData::zero(&self.mesh);
            data.f = mollified_dirac(&self.mesh, x, rho)?;
            Ok(KernelColumn {
                source: x,
                field: self.solve_load(load_vector(&self.mesh, &data))?,
                kind: self.kind,
                rho,
                vertex: None,
            })
        })
    }

    /// `∂_{x_axis} E(x,·)` by the central quotient of mollified columns at
    /// `x ± h e_axis` (step `2h`, `h = h_max`).
    pub fn source_derivative(&self, x: Point, rho: f64, axis: usize) -> Result<DiscreteField> {
        if axis > 1 {
            return Err(Error::domain("source_derivative", "axis 0 or 1", axis));
        }
        let h = self.mesh.h_max();
        let shift = |s: f64| {
            let mut p = x;
            p[axis] += s * h;
            p
        };
        let rho = rho.max(2.0 * h);
        let plus = self.column(shift(1.0), rho)?;
        let minus = self.column(shift(-1.0), rho)?;
        Ok(DiscreteField {
            values: plus.field.values.iter().zip(&minus.field.values).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
        })
    }
}

/// One-shot column; see [`KernelSolver::column`].
pub fn kernel_column(mesh: &Mesh, coeff: &Coefficient, x: Point, rho: f64, kind: KernelKind) -> Result<KernelColumn> {
    let solver = KernelSolver::new(Arc::new(mesh.clone()), coeff, kind)?;
    Ok((*solver.column(x, rho)?).clone())
}

/// Green function of `-Δ` on the unit disk:
/// `(1/2π) ln(|x| |y - x/|x|²| / |x-y|)`, and `(1/2π) ln(1/|y|)` at `x = 0`.
pub fn disk_green_oracle(x: Point, y: Point) -> Result<f64> {
    let nx = x[0].hypot(x[1]);
    let ny = y[0].hypot(y[1]);
    if nx >= 1.0 || ny > 1.0 {
        return Err(Error::domain("disk_green_oracle", "|x| < 1 and |y| <= 1", format!("|x| = {nx}, |y| = {ny}")));
    }
    let dxy = (x[0] - y[0]).hypot(x[1] - y[1]);
    if dxy == 0.0 {
        return Err(Error::domain("disk_green_oracle", "x != y", format!("{x:?}")));
    }
    if nx == 0.0 {
        return Ok((1.0 / ny).ln() / (2.0 * PI));
    }
    let s = 1.0 / (nx * nx);
    let image = (y[0] - x[0] * s).hypot(y[1] - x[1] * s);
    Ok((nx * image / dxy).ln().max(0.0) / (2.0 * PI))
}

/// `∇_y E` on each cell.
pub fn gradient_column(column: &KernelColumn, mesh: &Mesh) -> Vec<Point> {
    column.field.cell_gradients(mesh)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySample {
    pub src: Point,
    pub y: Point,
    pub dist: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Kernel values against a power-law bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub formula_id: String,
    pub samples: Vec<DecaySample>,
    pub max_ratio: f64,
    pub pass: bool,
}

impl DecayReport {
    fn from_samples(formula_id: String, samples: Vec<DecaySample>) -> Self {
        let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        DecayReport { formula_id, pass: max_ratio <= 1.0, samples, max_ratio }
    }

    /// `src_x,src_y,y_x,y_y,dist,value,bound,ratio`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("src_x,src_y,y_x,y_y,dist,value,bound,ratio\n");
        for r in &self.samples {
            let _ = writeln!(s, "{},{},{},{},{},{},{},{}", r.src[0], r.src[1], r.y[0], r.y[1], r.dist, r.value, r.bound, r.ratio);
        }
        s
    }
}

fn min_distance(column: &KernelColumn, mesh: &Mesh) -> f64 {
    4.0 * column.rho.max(mesh.h_max())
}

fn check_sample(column: &KernelColumn, mesh: &Mesh, y: Point) -> Result<f64> {
    let d = (y[0] - column.source[0]).hypot(y[1] - column.source[1]);
    let need = min_distance(column, mesh);
    if d < need {
        return Err(Error::Sampling(format!("sample {y:?} is {d} from the source; at least 4 max(rho, h) = {need} is required")));
    }
    Ok(d)
}

/// `|E(x,y)| / bound(|x-y|)` at each sample point `y`.
pub fn decay_check(column: &KernelColumn, mesh: &Mesh, bound: &KernelDecay, samples: &[Point]) -> Result<DecayReport> {
    let rows = samples
        .iter()
        .map(|&y| {
            let dist = check_sample(column, mesh, y)?;
            let value =
                column.field.eval(mesh, y).ok_or_else(|| Error::Sampling(format!("sample {y:?} lies outside the mesh")))?.abs();
            let b = bound.at(dist);
            Ok(DecaySample { src: column.source, y, dist, value, bound: b, ratio: value / b })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayReport::from_samples(bound.report.formula_id.clone(), rows))
}

/// `|∇_y E| / bound(|x-y|)` on the cell holding each sample point; the
/// distance is taken to the nearest point of that cell.
pub fn gradient_decay_check(column: &KernelColumn, mesh: &Mesh, bound: &KernelDecay, samples: &[Point]) -> Result<DecayReport> {
    let grads = gradient_column(column, mesh);
    let rows = samples
        .iter()
        .map(|&y| {
            check_sample(column, mesh, y)?;
            let k = mesh.locate(y).ok_or_else(|| Error::Sampling(format!("sample {y:?} lies outside the mesh")))?;
            // conservative: the closest vertex of the cell (the cell lies within h of it)
            let dist = mesh
                .cell_points(k)
                .iter()
                .map(|p| (p[0] - column.source[0]).hypot(p[1] - column.source[1]))
                .fold(f64::INFINITY, f64::min);
            let value = grads[k][0].hypot(grads[k][1]);
            let b = bound.at(dist);
            Ok(DecaySample { src: column.source, y, dist, value, bound: b, ratio: value / b })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayReport::from_samples(bound.report.formula_id.clone(), rows))
}

/// Sample points: mesh vertices at distance at least `4 max(rho, h)` from
/// the source, every `stride`-th one.
pub fn sample_points(column: &KernelColumn, mesh: &Mesh, stride: usize) -> Vec<Point> {
    let need = min_distance(column, mesh);
    mesh.vertices()
        .iter()
        .filter(|p| (p[0] - column.source[0]).hypot(p[1] - column.source[1]) >= need)
        .step_by(stride.max(1))
        .copied()
        .collect()
}

/// Solution rebuilt from nodal kernel columns,
/// `u(x_i) = g_i + Σ_j K(i,j) b_j` over the free vertices `j`.
///
/// `b` is the eliminated (for Neumann, compatible) load. Only for meshes
/// with at most [`REPRESENTATION_MAX_VERTICES`] vertices.
pub fn representation_reconstruct(mesh: &Mesh, coeff: &Coefficient, data: &ProblemData) -> Result<DiscreteField> {
    representation_reconstruct_with(mesh, coeff, data, KERNEL_TOL)
}

pub fn representation_reconstruct_with(mesh: &Mesh, coeff: &Coefficient, data: &ProblemData, tol: f64) -> Result<DiscreteField> {
    if mesh.n_vertices() > REPRESENTATION_MAX_VERTICES {
        return Err(Error::ResourceGuard(format!(
            "full kernel matrix needs at most {REPRESENTATION_MAX_VERTICES} vertices (mesh has {})",
            mesh.n_vertices()
        )));
    }
    data.validate(mesh)?;
    let kind = KernelKind::for_mesh(mesh);
    let solver = KernelSolver::new(Arc::new(mesh.clone()), coeff, kind)?.with_tolerance(tol);
    let system = solver.op.system(load_vector(mesh, data), Some(&data.g));
    let free: Vec<usize> = (0..mesh.n_vertices()).filter(|&j| !solver.op.fixed[j]).collect();
    let columns: Vec<Arc<KernelColumn>> = free.par_iter().map(|&j| solver.nodal_column(j)).collect::<Result<_>>()?;
    let mut u = system.initial.clone();
    for (&j, col) in free.iter().zip(&columns) {
        let bj = system.rhs[j];
        if bj != 0.0 {
            for (ui, k) in u.iter_mut().zip(&col.field.values) {
                *ui += k * bj;
            }
        }
    }
    Ok(DiscreteField { values: u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_structured_square, SquareTags};

    #[test]
    fn oracle_examples() {
        assert!((disk_green_oracle([0.0, 0.0], [0.5, 0.0]).unwrap() - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
        assert!((disk_green_oracle([0.0, 0.0], [0.5, 0.0]).unwrap() - 0.110318).abs() < 1e-6);
        assert!(disk_green_oracle([0.3, 0.2], [0.6f64.cos(), 0.6f64.sin()]).unwrap().abs() < 1e-15);
        let (x, y) = ([0.3, -0.2], [-0.1, 0.55]);
        assert!((disk_green_oracle(x, y).unwrap() - disk_green_oracle(y, x).unwrap()).abs() < 1e-12);
        assert!(disk_green_oracle(x, x).is_err());
        assert!(disk_green_oracle([1.0, 0.0], y).is_err());
    }

    #[test]
    fn kind_must_match_tags() {
        let m = build_structured_square(4, &SquareTags::dirichlet_left()).unwrap();
        let a = Coefficient::constant(&m, 1.0).unwrap();
        assert!(kernel_column(&m, &a, [0.5, 0.5], 0.0, KernelKind::GreenDirichlet).is_err());
        assert!(kernel_column(&m, &a, [0.5, 0.5], 0.0, KernelKind::GreenMixed).is_ok());
        assert!(matches!(kernel_column(&m, &a, [1.5, 0.5], 0.0, KernelKind::GreenMixed), Err(Error::Domain { .. })));
    }

    #[test]
    fn nodal_kernel_is_symmetric_and_nonnegative() {
        let m = Arc::new(build_structured_square(12, &SquareTags::dirichlet_left()).unwrap());
        let a = Coefficient::from_fn(&m, |p| if (p[0] < 0.5) == (p[1] < 0.5) { 1.0 } else { 10.0 }).unwrap();
        let s = KernelSolver::new(Arc::clone(&m), &a, KernelKind::GreenMixed).unwrap();
        let verts = [20, 47, 80, 111, 150];
        let mut max = 0f64;
        let mut asym = 0f64;
        for &i in &verts {
            let ci = s.nodal_column(i).unwrap();
            assert!(ci.field.values.iter().all(|v| *v >= -1e-12));
            for &j in &verts {
                let cj = s.nodal_column(j).unwrap();
                max = max.max(ci.field.values[j].abs());
                asym = asym.max((ci.field.values[j] - cj.field.values[i]).abs());
            }
        }
        assert!(asym <= 1e-9 * max, "{asym} {max}");
        // cached columns are shared
        assert!(Arc::ptr_eq(&s.nodal_column(20).unwrap(), &s.nodal_column(20).unwrap()));
    }

    #[test]
    fn sampling_guard() {
        let m = build_structured_square(8, &SquareTags::dirichlet_left()).unwrap();
        let a = Coefficient::constant(&m, 1.0).unwrap();
        let col = kernel_column(&m, &a, [0.5, 0.5], 0.0, KernelKind::GreenMixed).unwrap();
        let geom = m.geometry(None).unwrap();
        let bound =
            crate::bounds::green_sup_bound(&geom, &crate::bounds::CoefficientBounds::constant(1.0).unwrap(), 1.2, true).unwrap();
        assert!(matches!(decay_check(&col, &m, &bound, &[[0.55, 0.5]]), Err(Error::Sampling(_))));
        let r = decay_check(&col, &m, &bound, &sample_points(&col, &m, 1)).unwrap();
        assert!(r.pass);
        assert!(r.to_csv().starts_with("src_x,src_y,y_x,y_y,dist,value,bound,ratio\n"));
    }

    #[test]
    fn representation_guard_and_zero_data() {
        let big = build_structured_square(50, &SquareTags::dirichlet_left()).unwrap();
        let a = Coefficient::constant(&big, 1.0).unwrap();
        assert!(matches!(representation_reconstruct(&big, &a, &ProblemData::zero(&big)), Err(Error::ResourceGuard(_))));
        let m = build_structured_square(6, &SquareTags::dirichlet_left()).unwrap();
        let a = Coefficient::constant(&m, 1.0).unwrap();
        let u = representation_reconstruct(&m, &a, &ProblemData::zero(&m)).unwrap();
        assert!(u.values.iter().all(|v| *v == 0.0));
    }
}
