use serde::Serialize;

use super::assembly::{Constraint, LinearSystem};
use super::mesh::{Mesh, Point};
use crate::error::{Error, Result};

/// Default relative residual.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteField {
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(n: usize) -> Self {
        DiscreteField { values: vec![0.0; n] }
    }

    pub fn interpolate(mesh: &Mesh, u: impl Fn(Point) -> f64) -> Self {
        DiscreteField { values: mesh.vertices().iter().map(|p| u(*p)).collect() }
    }

    /// Value at `p`, or `None` outside the mesh.
    pub fn eval(&self, mesh: &Mesh, p: Point) -> Option<f64> {
        let k = mesh.locate(p)?;
        let l = mesh.barycentric(k, p);
        Some(mesh.cells()[k].iter().zip(l).map(|(&v, l)| l * self.values[v]).sum())
    }

    /// Gradient on each cell.
    pub fn cell_gradients(&self, mesh: &Mesh) -> Vec<Point> {
        (0..mesh.n_cells())
            .map(|k| {
                let g = mesh.basis_gradients(k);
                let c = mesh.cells()[k];
                let mut d = [0.0; 2];
                for i in 0..3 {
                    d[0] += self.values[c[i]] * g[i][0];
                    d[1] += self.values[c[i]] * g[i][1];
                }
                d
            })
            .collect()
    }

    pub fn sub(&self, other: &DiscreteField) -> DiscreteField {
        DiscreteField { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn weighted_mean(&self, weights: &[f64]) -> f64 {
        let w: f64 = weights.iter().sum();
        self.values.iter().zip(weights).map(|(u, w)| u * w).sum::<f64>() / w
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn shift_to_zero_mean(x: &mut [f64], w: &[f64]) {
    let m = dot(x, w) / w.iter().sum::<f64>();
    x.iter_mut().for_each(|v| *v -= m);
}

/// Jacobi-preconditioned conjugate gradients to relative residual `tol`,
/// with at most `20·n` iterations.
///
/// Under a zero-mean constraint the preconditioned residual is kept
/// orthogonal to constants and the iterate is shifted to zero mean after
/// every step. The arithmetic order is fixed, so results are reproducible.
pub fn solve(system: &LinearSystem, tol: f64) -> Result<DiscreteField> {
    if !(tol > 0.0) {
        return Err(Error::Configuration(format!("solver tolerance must be positive (got {tol})")));
    }
    let a = system.matrix();
    let n = a.n();
    let constrained = system.constraint() != Constraint::None;
    let w = &system.op.mean_weights;
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 0.0 }).collect();
    let b = &system.rhs;
    let mut x = system.initial.clone();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        let mut x = vec![0.0; n];
        if constrained {
            shift_to_zero_mean(&mut x, w);
        }
        return Ok(DiscreteField { values: x });
    }
    let residual = |x: &[f64]| -> Vec<f64> { a.mul(x).iter().zip(b).map(|(ax, b)| b - ax).collect() };
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        if constrained {
            remove_mean(&mut z);
        }
        z
    };
    let max_iter = 20 * n.max(1);
    let mut history = Vec::new();
    let mut r = residual(&x);
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            let res = norm(&r) / bnorm;
            if res <= tol {
                return Ok(DiscreteField { values: x });
            }
            return Err(Error::Solver { iterations: it, residual: res, history });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if constrained {
            shift_to_zero_mean(&mut x, w);
        }
        let mut res = norm(&r) / bnorm;
        history.push(res);
        if res <= tol {
            // guard against drift of the recursive residual
            r = residual(&x);
            res = norm(&r) / bnorm;
            if res <= tol {
                return Ok(DiscreteField { values: x });
            }
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver { iterations: max_iter, residual: *history.last().unwrap_or(&f64::NAN), history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::{assemble, Coefficient, ProblemData};
    use crate::fem::mesh::{build_structured_square, BoundaryEdge, BoundaryTag, SquareTags};

    #[test]
    fn zero_rhs_gives_zero() {
        let m = build_structured_square(4, &SquareTags::uniform(BoundaryTag::Dirichlet)).unwrap();
        let s = assemble(&m, &Coefficient::constant(&m, 1.0).unwrap(), &ProblemData::zero(&m)).unwrap();
        assert!(solve(&s, 1e-10).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_free_vertex() {
        // four triangles around a centre vertex, outer boundary Dirichlet
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let cells = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let e = |a, b| BoundaryEdge { vertices: [a, b], tag: BoundaryTag::Dirichlet };
        let m = Mesh::new(v, cells, vec![e(0, 1), e(1, 2), e(2, 3), e(3, 0)]).unwrap();
        let mut d = ProblemData::zero(&m);
        d.f.iter_mut().for_each(|f| *f = 1.0);
        let s = assemble(&m, &Coefficient::constant(&m, 1.0).unwrap(), &d).unwrap();
        let u = solve(&s, 1e-14).unwrap();
        // stiffness at the centre is 4, load is 1/3
        assert!((u.values[4] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let m = build_structured_square(16, &SquareTags::uniform(BoundaryTag::Dirichlet)).unwrap();
        let mut d = ProblemData::zero(&m);
        d.f.iter_mut().for_each(|f| *f = 1.0);
        let s = assemble(&m, &Coefficient::constant(&m, 1.0).unwrap(), &d).unwrap();
        assert!(matches!(solve(&s, 0.0), Err(Error::Configuration(_))));
        let u = solve(&s, 1e-12).unwrap();
        let r: Vec<f64> = s.matrix().mul(&u.values).iter().zip(&s.rhs).map(|(a, b)| a - b).collect();
        assert!(norm(&r) <= 1e-12 * norm(&s.rhs));
    }

    #[test]
    fn neumann_solution_has_zero_mean() {
        let m = build_structured_square(8, &SquareTags::uniform(BoundaryTag::Neumann)).unwrap();
        let d = ProblemData::from_fns(&m, |p| (std::f64::consts::PI * p[0]).cos(), |_| [0.0; 2], |_| 0.0, |_| 0.0);
        let s = assemble(&m, &Coefficient::constant(&m, 1.0).unwrap(), &d).unwrap();
        let u = solve(&s, 1e-12).unwrap();
        assert!(u.weighted_mean(&m.lumped_mass()).abs() < 1e-14);
        assert!(s.compatibility_defect.abs() < 1e-14);
    }
}
