//! Measurements the verification harness takes on discrete solutions.

use std::f64::consts::PI;

use super::assembly::{assemble, Coefficient, ProblemData};
use super::mesh::{Mesh, Point};
use super::norms::grad_norm;
use super::quad;
use super::solver::{solve, DiscreteField};
use crate::bounds::CoefficientBounds;
use crate::error::{Error, Result};

/// `f_m = m f / (m + |f|)`, so `|f_m| ≤ min(|f|, m)` with the sign kept.
pub fn sola_truncate(f: &[f64], m: u32) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::domain("sola_truncate", "m >= 1", m));
    }
    let m = f64::from(m);
    Ok(f.iter().map(|&v| m * v / (m + v.abs())).collect())
}

/// Cellwise density of `χ_{B_ρ(x)}/|B_ρ(x)|`: cell `K` gets
/// `|K ∩ B_ρ(x)| / (πρ² |K|)`, from the exact disk-triangle overlap.
pub fn mollified_dirac(mesh: &Mesh, x: Point, rho: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain("mollified_dirac", "rho > 0", rho));
    }
    if !mesh.contains(x) {
        return Err(Error::domain("mollified_dirac", "source point inside the domain", format!("{x:?}")));
    }
    let clearance = mesh.distance_to_boundary(x);
    if clearance < rho * (1.0 - 1e-12) {
        return Err(Error::domain(
            "mollified_dirac",
            format!("ball B_rho(x) inside the domain (distance to boundary {clearance})"),
            rho,
        ));
    }
    let mass = PI * rho * rho;
    Ok((0..mesh.n_cells())
        .map(|k| {
            let tri = mesh.cell_points(k);
            let near = tri.iter().any(|p| (p[0] - x[0]).hypot(p[1] - x[1]) < rho + mesh.h_max());
            if !near {
                return 0.0;
            }
            quad::disk_triangle_overlap(x, rho, &tri) / (mass * mesh.area(k))
        })
        .collect())
}

/// Fraction of a triangle where a linear function exceeds `k`, from sorted
/// vertex values.
fn fraction_above(mut u: [f64; 3], k: f64) -> f64 {
    u.sort_by(f64::total_cmp);
    let [a, b, c] = u;
    if k >= c {
        0.0
    } else if k <= a {
        1.0
    } else if k >= b {
        (c - k).powi(2) / ((c - a) * (c - b))
    } else {
        1.0 - (k - a).powi(2) / ((c - a) * (b - a))
    }
}

/// `|A(k)| = |{|u_h| > k}|`, exact per cell.
pub fn level_measure(field: &DiscreteField, mesh: &Mesh, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::domain("level_measure", "k >= 0", k));
    }
    Ok(mesh
        .cells()
        .iter()
        .zip(mesh.areas())
        .map(|(c, area)| {
            let u = c.map(|v| field.values[v]);
            area * (fraction_above(u, k) + fraction_above(u.map(|v| -v), k))
        })
        .sum())
}

/// Both sides of `∫ η²|∇u|² ≤ 4 (a^#/a_#) ∫ u² |∇η|²` with the radial cutoff
/// `η = (R - |y-x|)/(R - r)` clamped to `[0, 1]`.
pub fn caccioppoli_ratio(
    field: &DiscreteField,
    mesh: &Mesh,
    coeff: &CoefficientBounds,
    x: Point,
    r: f64,
    big_r: f64,
) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::domain("caccioppoli_ratio", "0 < r < R", format!("r = {r}, R = {big_r}")));
    }
    coeff.validate()?;
    let eta = |p: Point| ((big_r - (p[0] - x[0]).hypot(p[1] - x[1])) / (big_r - r)).clamp(0.0, 1.0);
    let in_annulus = |p: Point| {
        let d = (p[0] - x[0]).hypot(p[1] - x[1]);
        if d > r && d < big_r {
            1.0
        } else {
            0.0
        }
    };
    let grads = field.cell_gradients(mesh);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (k, grad) in grads.iter().enumerate() {
        let tri = mesh.cell_points(k);
        let dists = tri.map(|p| (p[0] - x[0]).hypot(p[1] - x[1]));
        let (dmin, dmax) = (dists.iter().copied().fold(f64::INFINITY, f64::min), dists.iter().copied().fold(0.0, f64::max));
        if dmin - mesh.h_max() >= big_r {
            continue;
        }
        // the cutoff kinks on the two circles; refine cells they cross
        let crosses = |rad: f64| dmin - mesh.h_max() < rad && dmax + mesh.h_max() > rad;
        let depth = if crosses(r) || crosses(big_r) { 5 } else { 0 };
        let area = mesh.area(k);
        let c = mesh.cells()[k];
        let g2 = grad[0].powi(2) + grad[1].powi(2);
        let uh = |p: Point| {
            let l = mesh.barycentric(k, p);
            (0..3).map(|i| l[i] * field.values[c[i]]).sum::<f64>()
        };
        lhs += g2 * quad::integrate_refined(&tri, area, depth, &|p| eta(p).powi(2));
        rhs += quad::integrate_refined(&tri, area, depth, &|p| uh(p).powi(2) * in_annulus(p));
    }
    Ok((lhs, 4.0 * coeff.contrast() * rhs / (big_r - r).powi(2)))
}

/// `‖∇g̃_h‖_2` for the discrete `a`-harmonic extension of the Dirichlet
/// values `g` (zero source, homogeneous conormal data elsewhere).
pub fn dirichlet_extension_energy(mesh: &Mesh, coeff: &Coefficient, g: &[f64]) -> Result<f64> {
    if !mesh.has_dirichlet() {
        return Ok(0.0);
    }
    let mut data = ProblemData::zero(mesh);
    for ((slot, on), v) in data.g.iter_mut().zip(mesh.dirichlet_mask()).zip(g) {
        if on {
            *slot = *v;
        }
    }
    let ext = solve(&assemble(mesh, coeff, &data)?, 1e-12)?;
    grad_norm(&ext, mesh, 2.0)
}
