use std::sync::Arc;

use rayon::prelude::*;

use super::mesh::{BoundaryTag, Mesh, Point};
use super::quad;
use crate::bounds::CoefficientBounds;
use crate::error::{Error, Result};

/// Cellwise-constant coefficient `a_K > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    values: Vec<f64>,
}

impl Coefficient {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Configuration(format!("coefficient on cell {k} must be positive and finite (got {})", values[k])));
        }
        Ok(Coefficient { values })
    }

    pub fn constant(mesh: &Mesh, a: f64) -> Result<Self> {
        Self::new(vec![a; mesh.n_cells()])
    }

    /// Sampled at cell centroids.
    pub fn from_fn(mesh: &Mesh, a: impl Fn(Point) -> f64) -> Result<Self> {
        Self::new((0..mesh.n_cells()).map(|k| a(mesh.centroid(k))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Checks `a_lower ≤ a_K ≤ a_upper` for every cell.
    pub fn check_bounds(&self, b: &CoefficientBounds) -> Result<()> {
        if self.min() < b.a_lower || self.max() > b.a_upper {
            return Err(Error::Configuration(format!(
                "coefficient range [{}, {}] exceeds the declared bounds [{}, {}]",
                self.min(),
                self.max(),
                b.a_lower,
                b.a_upper
            )));
        }
        Ok(())
    }

    /// The tightest bounds `[min a_K, max a_K]`.
    pub fn bounds(&self) -> Result<CoefficientBounds> {
        CoefficientBounds::new(self.min(), self.max())
    }
}

/// Data of the mixed problem: `f` and `**f**` per cell, `h` per boundary
/// edge (zero on Dirichlet edges), `g` per vertex (zero off `Γ_D`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub f: Vec<f64>,
    pub fvec: Vec<Point>,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl ProblemData {
    pub fn zero(mesh: &Mesh) -> Self {
        ProblemData {
            f: vec![0.0; mesh.n_cells()],
            fvec: vec![[0.0; 2]; mesh.n_cells()],
            h: vec![0.0; mesh.boundary_edges().len()],
            g: vec![0.0; mesh.n_vertices()],
        }
    }

    /// `f` and `**f**` as cell averages (degree-5 rule), `h` as edge
    /// averages (3-point Gauss), `g` interpolated on Dirichlet vertices.
    pub fn from_fns(
        mesh: &Mesh,
        f: impl Fn(Point) -> f64,
        fvec: impl Fn(Point) -> Point,
        h: impl Fn(Point) -> f64,
        g: impl Fn(Point) -> f64,
    ) -> Self {
        let mut d = ProblemData::zero(mesh);
        d.f = cell_averages(mesh, &f);
        d.fvec = (0..mesh.n_cells())
            .map(|k| {
                let tri = mesh.cell_points(k);
                let a = quad::integrate_triangle(&tri, 1.0, |p, _| fvec(p)[0]);
                let b = quad::integrate_triangle(&tri, 1.0, |p, _| fvec(p)[1]);
                [a, b]
            })
            .collect();
        for (e, slot) in mesh.boundary_edges().iter().zip(&mut d.h) {
            if e.tag == BoundaryTag::Neumann {
                let [a, b] = e.vertices.map(|v| mesh.vertices()[v]);
                *slot = gauss3(|t| h([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]));
            }
        }
        for ((slot, p), on) in d.g.iter_mut().zip(mesh.vertices()).zip(mesh.dirichlet_mask()) {
            if on {
                *slot = g(*p);
            }
        }
        d
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(format!("problem data: {m}")));
        if self.f.len() != mesh.n_cells() || self.fvec.len() != mesh.n_cells() {
            return bad("f and fvec need one value per cell".into());
        }
        if self.h.len() != mesh.boundary_edges().len() {
            return bad("h needs one value per boundary edge".into());
        }
        if self.g.len() != mesh.n_vertices() {
            return bad("g needs one value per vertex".into());
        }
        let finite = self.f.iter().chain(self.fvec.iter().flatten()).chain(&self.h).chain(&self.g).all(|v| v.is_finite());
        if !finite {
            return bad("non-finite value".into());
        }
        for (i, (e, h)) in mesh.boundary_edges().iter().zip(&self.h).enumerate() {
            if e.tag == BoundaryTag::Dirichlet && *h != 0.0 {
                return bad(format!("h is nonzero on Dirichlet edge {i}"));
            }
        }
        for (i, (on, g)) in mesh.dirichlet_mask().iter().zip(&self.g).enumerate() {
            if !on && *g != 0.0 {
                return bad(format!("g is nonzero at vertex {i}, which is not on the Dirichlet part"));
            }
        }
        Ok(())
    }
}

/// Cell averages of `f` by the degree-5 rule.
pub fn cell_averages(mesh: &Mesh, f: &(impl Fn(Point) -> f64 + ?Sized)) -> Vec<f64> {
    (0..mesh.n_cells()).map(|k| quad::integrate_triangle(&mesh.cell_points(k), 1.0, |p, _| f(p))).collect()
}

/// Mean of `f` over `[0,1]` by 3-point Gauss-Legendre.
fn gauss3(f: impl Fn(f64) -> f64) -> f64 {
    let s = (0.6f64).sqrt() / 2.0;
    (5.0 * f(0.5 - s) + 8.0 * f(0.5) + 5.0 * f(0.5 + s)) / 18.0
}

/// Square sparse matrix in compressed-row layout with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sparsity pattern of P1 on `mesh`, with zero values.
    pub fn pattern(mesh: &Mesh) -> CsrMatrix {
        let mut rows: Vec<Vec<usize>> = (0..mesh.n_vertices()).map(|i| vec![i]).collect();
        for c in mesh.cells() {
            for &i in c {
                rows[i].extend_from_slice(c);
            }
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix { row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry in the P1 pattern");
        self.values[k] += v;
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, rows summed in column order.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.mul_into(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0f64;
        for i in 0..self.n() {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `xᵀ A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Normalization of a pure-Neumann solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    None,
    ZeroMeanDomain,
    ZeroMeanBoundary,
}

/// Which mean vanishes when no Dirichlet part exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanKind {
    #[default]
    Domain,
    Boundary,
}

/// `∫ a ∇u·∇v` over `mesh`, assembled in parallel over cells and scattered
/// in cell order.
pub fn stiffness(mesh: &Mesh, coeff: &Coefficient) -> Result<CsrMatrix> {
    if coeff.values().len() != mesh.n_cells() {
        return Err(Error::Assembly(format!("coefficient has {} values for {} cells", coeff.values().len(), mesh.n_cells())));
    }
    let local: Vec<[[f64; 3]; 3]> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|k| {
            let g = mesh.basis_gradients(k);
            let s = coeff.values()[k] * mesh.area(k);
            let mut e = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    e[i][j] = s * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
            e
        })
        .collect();
    let mut a = CsrMatrix::pattern(mesh);
    for (c, e) in mesh.cells().iter().zip(&local) {
        for i in 0..3 {
            for j in 0..3 {
                a.add(c[i], c[j], e[i][j]);
            }
        }
    }
    Ok(a)
}

/// Load vector `∫ f φ_i + ∫ **f**·∇φ_i + ∫_Γ h φ_i`, exact for cellwise
/// constant data; `h` by the trapezoidal rule.
pub fn load_vector(mesh: &Mesh, data: &ProblemData) -> Vec<f64> {
    let mut b = vec![0.0; mesh.n_vertices()];
    for (k, c) in mesh.cells().iter().enumerate() {
        let area = mesh.area(k);
        let g = mesh.basis_gradients(k);
        let fv = data.fvec[k];
        for i in 0..3 {
            b[c[i]] += data.f[k] * area / 3.0 + area * (fv[0] * g[i][0] + fv[1] * g[i][1]);
        }
    }
    for (e, h) in mesh.boundary_edges().iter().zip(&data.h) {
        if e.tag == BoundaryTag::Neumann {
            let half = h * mesh.edge_length(e) / 2.0;
            b[e.vertices[0]] += half;
            b[e.vertices[1]] += half;
        }
    }
    b
}

/// Stiffness matrix with Dirichlet rows and columns eliminated, shared by
/// every right-hand side on the same mesh and coefficient.
#[derive(Debug)]
pub struct SystemOperator {
    pub matrix: CsrMatrix,
    pub fixed: Vec<bool>,
    pub constraint: Constraint,
    /// Weights whose weighted sum of the solution vanishes (constraint only).
    pub mean_weights: Vec<f64>,
    /// Lumped domain mass, used to make a Neumann right-hand side compatible.
    pub mass: Vec<f64>,
    raw: CsrMatrix,
}

impl SystemOperator {
    pub fn new(mesh: &Mesh, coeff: &Coefficient, mean: MeanKind) -> Result<Arc<SystemOperator>> {
        let raw = stiffness(mesh, coeff)?;
        let fixed = mesh.dirichlet_mask();
        let mut matrix = raw.clone();
        for i in 0..matrix.n() {
            for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
                let j = matrix.col_idx[k];
                if fixed[i] || fixed[j] {
                    matrix.values[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        let (constraint, mean_weights) = if mesh.has_dirichlet() {
            (Constraint::None, Vec::new())
        } else {
            match mean {
                MeanKind::Domain => (Constraint::ZeroMeanDomain, mesh.lumped_mass()),
                MeanKind::Boundary => (Constraint::ZeroMeanBoundary, mesh.boundary_lumped_mass()),
            }
        };
        Ok(Arc::new(SystemOperator { matrix, fixed, constraint, mean_weights, mass: mesh.lumped_mass(), raw }))
    }

    /// The stiffness matrix before elimination.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.raw
    }

    /// System for load `load` and Dirichlet values `g` (per vertex).
    pub fn system(self: &Arc<Self>, load: Vec<f64>, g: Option<&[f64]>) -> LinearSystem {
        let n = self.matrix.n();
        let mut rhs = load.clone();
        let mut initial = vec![0.0; n];
        if let Some(g) = g {
            for i in (0..n).filter(|&i| self.fixed[i] && g[i] != 0.0) {
                for (j, a) in self.raw.row(i) {
                    if !self.fixed[j] {
                        rhs[j] -= a * g[i];
                    }
                }
            }
            for i in (0..n).filter(|&i| self.fixed[i]) {
                initial[i] = g[i];
            }
        }
        for i in (0..n).filter(|&i| self.fixed[i]) {
            rhs[i] = initial[i];
        }
        let mut defect = 0.0;
        if self.constraint != Constraint::None {
            defect = rhs.iter().sum::<f64>();
            let vol: f64 = self.mass.iter().sum();
            for (r, m) in rhs.iter_mut().zip(&self.mass) {
                *r -= defect * m / vol;
            }
        }
        LinearSystem { op: Arc::clone(self), rhs, load, initial, compatibility_defect: defect }
    }
}

/// A right-hand side paired with its operator.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub op: Arc<SystemOperator>,
    /// Right-hand side after elimination (and, for Neumann, projection).
    pub rhs: Vec<f64>,
    /// The raw load functional `b_i`.
    pub load: Vec<f64>,
    /// Start vector: Dirichlet values on fixed vertices.
    pub initial: Vec<f64>,
    /// `Σ b_i` removed to make a pure-Neumann problem solvable (0 otherwise).
    pub compatibility_defect: f64,
}

impl LinearSystem {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.op.matrix
    }

    pub fn constraint(&self) -> Constraint {
        self.op.constraint
    }
}

/// Assembles the weak form with Dirichlet values imposed by symmetric
/// elimination; pure-Neumann meshes get the zero domain-mean constraint.
pub fn assemble(mesh: &Mesh, coeff: &Coefficient, data: &ProblemData) -> Result<LinearSystem> {
    assemble_with(mesh, coeff, data, MeanKind::Domain)
}

pub fn assemble_with(mesh: &Mesh, coeff: &Coefficient, data: &ProblemData, mean: MeanKind) -> Result<LinearSystem> {
    data.validate(mesh)?;
    let op = SystemOperator::new(mesh, coeff, mean)?;
    Ok(op.system(load_vector(mesh, data), Some(&data.g)))
}
