//! Refinement, truncation and level-set studies on discrete solutions.

use serde::Serialize;

use crate::bounds::{w1q_bound, BoundReport, CoefficientBounds, DomainGeometry};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fem::{
    assemble, cellwise_norm, function_norm, grad_error, grad_norm, l2_error, level_measure, lq_norm, neumann_edge_norm,
    sola_truncate, solve, sup_norm, BoundaryTag, Coefficient, DiscreteField, Mesh, Point, ProblemData, DEFAULT_TOL,
};

use super::scenario::{at, DataFns};

/// Inflation applied to quadrature estimates of data norms.
pub const NORM_INFLATION: f64 = 1.01;

/// Richardson extrapolation of a second-order quantity from meshes of size
/// `2h` and `h`: `s_h + (s_h - s_2h)/3`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

/// Solves on `mesh` with the default tolerance.
pub fn solve_data(mesh: &Mesh, coeff: &Coefficient, data: &ProblemData) -> Result<DiscreteField> {
    solve(&assemble(mesh, coeff, data)?, DEFAULT_TOL)
}

/// Cell lookup through a uniform bucket grid.
struct Locator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    fn new(mesh: &'a Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let cell = mesh.h_max().max(1e-300);
        let nx = ((hi[0] - lo[0]) / cell).ceil() as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for k in 0..mesh.n_cells() {
            let tri = mesh.cell_points(k);
            let (mut a, mut b) = ([usize::MAX; 2], [0usize; 2]);
            for p in tri {
                let ij = [((p[0] - lo[0]) / cell) as usize, ((p[1] - lo[1]) / cell) as usize];
                for d in 0..2 {
                    a[d] = a[d].min(ij[d]);
                    b[d] = b[d].max(ij[d]);
                }
            }
            for i in a[0]..=b[0].min(nx - 1) {
                for j in a[1]..=b[1].min(ny - 1) {
                    buckets[j * nx + i].push(k);
                }
            }
        }
        Locator { mesh, origin: lo, cell, nx, ny, buckets }
    }

    fn eval(&self, field: &DiscreteField, p: Point) -> Option<f64> {
        let i = ((p[0] - self.origin[0]) / self.cell).floor();
        let j = ((p[1] - self.origin[1]) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let k = *self.buckets[j as usize * self.nx + i as usize]
            .iter()
            .find(|&&k| self.mesh.barycentric(k, p).iter().all(|&l| l >= -1e-12))?;
        let l = self.mesh.barycentric(k, p);
        Some(self.mesh.cells()[k].iter().zip(l).map(|(&v, l)| l * field.values[v]).sum())
    }
}

/// Interpolates a P1 field onto the vertices of another mesh covering the
/// same domain (exact when the meshes are nested).
pub fn transfer(field: &DiscreteField, from: &Mesh, to: &Mesh) -> Result<DiscreteField> {
    let loc = Locator::new(from);
    let values = to
        .vertices()
        .iter()
        .map(|&p| loc.eval(field, p).ok_or_else(|| Error::Sampling(format!("vertex {p:?} lies outside the source mesh"))))
        .collect::<Result<_>>()?;
    Ok(DiscreteField { values })
}

// ---------------------------------------------------------------- data norms

fn edge_points(a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> {
    // 8 sub-segments with 3-point Gauss rules; weights sum to 1
    const X: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
    const W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    (0..8).flat_map(move |s| {
        (0..3).map(move |i| {
            let t = (s as f64 + X[i]) / 8.0;
            ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], W[i] / 8.0)
        })
    })
}

fn sample_points(mesh: &Mesh) -> impl Iterator<Item = Point> + '_ {
    (0..mesh.n_cells()).flat_map(move |k| {
        let [a, b, c] = mesh.cell_points(k);
        let mid = |p: Point, q: Point| [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        [a, b, c, mesh.centroid(k), mid(a, b), mid(b, c), mid(c, a)]
    })
}

/// Norms of closed-form data: quadrature estimates inflated by
/// [`NORM_INFLATION`], never below the exact norm of the discrete data
/// the solver sees.
pub struct NormCalculator<'a> {
    pub mesh: &'a Mesh,
    pub fns: &'a DataFns,
    pub data: &'a ProblemData,
}

impl NormCalculator<'_> {
    fn domain_norm(&self, e: &dyn Fn(Point) -> f64, discrete: impl Iterator<Item = f64>, q: f64) -> Result<f64> {
        let d = cellwise_norm(self.mesh, discrete, q)?;
        let c = if q.is_infinite() {
            sample_points(self.mesh).map(|p| e(p).abs()).fold(0.0, f64::max)
        } else {
            function_norm(self.mesh, &|p| e(p), q, 2)?
        };
        Ok((NORM_INFLATION * c).max(d))
    }

    pub fn f(&self, q: f64) -> Result<f64> {
        self.domain_norm(&|p| self.fns.f(p), self.data.f.iter().map(|v| v.abs()), q)
    }

    /// Norm of the scalar data after replacing the cell values.
    pub fn f_with(&self, cells: &[f64], q: f64) -> Result<f64> {
        self.domain_norm(&|p| self.fns.f(p), cells.iter().map(|v| v.abs()), q)
    }

    pub fn fvec(&self, q: f64) -> Result<f64> {
        self.domain_norm(
            &|p| {
                let v = self.fns.fvec(p);
                v[0].hypot(v[1])
            },
            self.data.fvec.iter().map(|v| v[0].hypot(v[1])),
            q,
        )
    }

    pub fn h(&self, q: f64) -> Result<f64> {
        let d = neumann_edge_norm(self.mesh, &self.data.h, q)?;
        let edges = self.mesh.boundary_edges().iter().filter(|e| e.tag == BoundaryTag::Neumann);
        let c = if q.is_infinite() {
            edges
                .flat_map(|e| {
                    let [a, b] = e.vertices.map(|v| self.mesh.vertices()[v]);
                    edge_points(a, b).map(|(p, _)| self.fns.h(p).abs()).collect::<Vec<_>>()
                })
                .fold(0.0, f64::max)
        } else {
            edges
                .map(|e| {
                    let [a, b] = e.vertices.map(|v| self.mesh.vertices()[v]);
                    let len = self.mesh.edge_length(e);
                    edge_points(a, b).map(|(p, w)| w * len * self.fns.h(p).abs().powf(q)).sum::<f64>()
                })
                .sum::<f64>()
                .powf(1.0 / q)
        };
        Ok((NORM_INFLATION * c).max(d))
    }

    /// `sup |g|` over the Dirichlet boundary.
    pub fn g_inf(&self) -> f64 {
        let d = self.data.g.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let c = self
            .mesh
            .boundary_edges()
            .iter()
            .filter(|e| e.tag == BoundaryTag::Dirichlet)
            .flat_map(|e| {
                let [a, b] = e.vertices.map(|v| self.mesh.vertices()[v]);
                edge_points(a, b).map(|(p, _)| self.fns.g(p).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        (NORM_INFLATION * c).max(d)
    }
}

// ---------------------------------------------------------- convergence study

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub level: usize,
    pub h: f64,
    pub l2_error: f64,
    pub energy_error: f64,
    /// Observed orders against the previous row.
    pub l2_rate: Option<f64>,
    pub energy_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Errors are measured against the finest level instead of a closed form.
    pub against_finest: bool,
}

/// The exact solution of a convergence study.
pub struct Manufactured {
    pub u: Expr,
    pub grad: [Expr; 2],
}

fn with_rates(mut rows: Vec<RateRow>) -> Vec<RateRow> {
    for i in 1..rows.len() {
        let (p, c) = (&rows[i - 1], &rows[i]);
        let order = |a: f64, b: f64| (a > 0.0 && b > 0.0).then(|| (a / b).ln() / (p.h / c.h).ln());
        let (l2, en) = (order(p.l2_error, c.l2_error), order(p.energy_error, c.energy_error));
        rows[i].l2_rate = l2;
        rows[i].energy_rate = en;
    }
    rows
}

/// `L²` and `H¹`-seminorm errors across `levels` (meshes coarse to fine)
/// and the observed orders between consecutive levels.
///
/// Without a manufactured solution the finest solution is the reference
/// and the table covers the other levels (the meshes must be nested).
pub fn convergence_study(
    levels: &[(usize, &Mesh, &Coefficient, &ProblemData)],
    exact: Option<&Manufactured>,
) -> Result<RateTable> {
    let fields = levels.iter().map(|(_, m, a, d)| solve_data(m, a, d)).collect::<Result<Vec<_>>>()?;
    let rows = match exact {
        Some(ex) => levels
            .iter()
            .zip(&fields)
            .map(|((lvl, m, _, _), uh)| RateRow {
                level: *lvl,
                h: m.h_max(),
                l2_error: l2_error(uh, m, &|p| at(&ex.u, p)),
                energy_error: grad_error(uh, m, &|p| [at(&ex.grad[0], p), at(&ex.grad[1], p)]),
                l2_rate: None,
                energy_rate: None,
            })
            .collect(),
        None => {
            let (_, fine, _, _) = levels.last().ok_or_else(|| Error::InsufficientData("no levels".into()))?;
            let reference = fields.last().expect("nonempty");
            levels[..levels.len() - 1]
                .iter()
                .zip(&fields)
                .map(|((lvl, m, _, _), uh)| {
                    let diff = transfer(uh, m, fine)?.sub(reference);
                    Ok(RateRow {
                        level: *lvl,
                        h: m.h_max(),
                        l2_error: lq_norm(&diff, fine, 2.0)?,
                        energy_error: grad_norm(&diff, fine, 2.0)?,
                        l2_rate: None,
                        energy_rate: None,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(RateTable { rows: with_rates(rows), against_finest: exact.is_none() })
}

// ----------------------------------------------------------------- SOLA study

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolaRow {
    pub m: u32,
    pub grad_q: f64,
    pub bound: f64,
    /// `‖∇(u_{2m} - u_m)‖_q`
    pub cauchy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolaReport {
    pub q: f64,
    /// `‖f‖₁` fed into the bound.
    pub f_l1: f64,
    pub rows: Vec<SolaRow>,
    pub bound: BoundReport,
}

/// Solutions `u_m` for the truncated sources `f_m = m f/(m + |f|)` on one
/// mesh, their `W^{1,q}` norms against the bound evaluated with
/// `‖f_m‖₁ ≤ ‖f‖₁`, and the Cauchy differences `‖∇(u_{2m} - u_m)‖_q`.
#[allow(clippy::too_many_arguments)]
pub fn sola_study(
    mesh: &Mesh,
    geom: &DomainGeometry,
    coeff: &Coefficient,
    bounds: &CoefficientBounds,
    fns: &DataFns,
    data: &ProblemData,
    q: f64,
    m_list: &[u32],
) -> Result<SolaReport> {
    if data.g.iter().any(|v| *v != 0.0) {
        return Err(Error::Configuration("the SOLA study needs g = 0".into()));
    }
    let norms = NormCalculator { mesh, fns, data };
    let f_l1 = norms.f(1.0)?;
    let bound = w1q_bound(geom, bounds, norms.fvec(2.0)?, f_l1, norms.h(1.0)?, q, mesh.has_dirichlet())?;
    let solve_m = |m: u32| -> Result<DiscreteField> {
        let mut d = data.clone();
        d.f = sola_truncate(&data.f, m)?;
        solve_data(mesh, coeff, &d)
    };
    let rows = m_list
        .iter()
        .map(|&m| {
            let um = solve_m(m)?;
            let u2m = solve_m(m.checked_mul(2).ok_or_else(|| Error::domain("sola_study", "2m fits in u32", m))?)?;
            Ok(SolaRow { m, grad_q: grad_norm(&um, mesh, q)?, bound: bound.bound, cauchy: grad_norm(&u2m.sub(&um), mesh, q)? })
        })
        .collect::<Result<_>>()?;
    Ok(SolaReport { q, f_l1, rows, bound })
}

// ---------------------------------------------------------- level-set decay

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    /// `(k, |A(k)|)`
    pub rows: Vec<(f64, f64)>,
    pub alpha: f64,
    pub beta: f64,
    pub pass: bool,
}

/// `|A(k)|` on the grid `ks` and the least-squares exponent `β` in
/// `log|A(k_{i+1})| + α log(k_{i+1} - k_i) ≈ c + β log|A(k_i)|` over
/// consecutive nonempty levels. Passes iff `β ≥ 1`.
pub fn level_decay_study(field: &DiscreteField, mesh: &Mesh, ks: &[f64], alpha: f64) -> Result<DecayTable> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Configuration("level grid must increase strictly".into()));
    }
    let rows = ks.iter().map(|&k| Ok((k, level_measure(field, mesh, k)?))).collect::<Result<Vec<_>>>()?;
    let nonempty: Vec<(f64, f64)> = rows.iter().copied().filter(|r| r.1 > 0.0).collect();
    if nonempty.len() < 3 {
        return Err(Error::InsufficientData(format!("level decay needs at least 3 nonempty levels (found {})", nonempty.len())));
    }
    let pts: Vec<(f64, f64)> = nonempty.windows(2).map(|w| (w[0].1.ln(), w[1].1.ln() + alpha * (w[1].0 - w[0].0).ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("level measures do not vary".into()));
    }
    let beta = sxy / sxx;
    Ok(DecayTable { rows, alpha, beta, pass: beta >= 1.0 })
}

/// `levels` equally spaced values in `[0, sup|u_h|)`.
pub fn uniform_levels(field: &DiscreteField, levels: usize) -> Vec<f64> {
    let s = sup_norm(field);
    (0..levels).map(|i| s * i as f64 / levels as f64).collect()
}
