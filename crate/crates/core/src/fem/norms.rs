use super::assembly::Coefficient;
use super::mesh::{BoundaryTag, Mesh, Point};
use super::quad;
use super::solver::DiscreteField;
use crate::error::{Error, Result};

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("norm", "q >= 1", q))
    }
}

/// `(Σ_K |K| |v_K|^q)^{1/q}` for cellwise values; `q = ∞` gives the max.
pub fn cellwise_norm(mesh: &Mesh, abs_values: impl Iterator<Item = f64>, q: f64) -> Result<f64> {
    check_q(q)?;
    if q.is_infinite() {
        return Ok(abs_values.fold(0.0, f64::max));
    }
    let s: f64 = abs_values.zip(mesh.areas()).map(|(v, a)| a * v.powf(q)).sum();
    Ok(s.powf(1.0 / q))
}

/// `‖∇u_h‖_q` from the exact cellwise gradients.
pub fn grad_norm(field: &DiscreteField, mesh: &Mesh, q: f64) -> Result<f64> {
    cellwise_norm(mesh, field.cell_gradients(mesh).into_iter().map(|g| g[0].hypot(g[1])), q)
}

/// `‖a^{1/2}∇u_h‖_2`
pub fn energy_norm(field: &DiscreteField, mesh: &Mesh, coeff: &Coefficient) -> f64 {
    field
        .cell_gradients(mesh)
        .iter()
        .zip(coeff.values())
        .zip(mesh.areas())
        .map(|((g, a), k)| a * k * (g[0] * g[0] + g[1] * g[1]))
        .sum::<f64>()
        .sqrt()
}

/// `sup |u_h|`, attained at a vertex.
pub fn sup_norm(field: &DiscreteField) -> f64 {
    field.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Mean of `|u|^q` over a triangle on which `u` is linear with the given
/// vertex values.
///
/// Equals `2 Φ[u_1,u_2,u_3]` with `Φ'' = |t|^q` (Hermite-Genocchi). When
/// the spread of the values is small against their size the divided
/// difference cancels, and the degree-5 rule is used instead (then `|u|^q`
/// is smooth on the cell and the rule is accurate to ~1e-13).
fn mean_abs_pow(mut u: [f64; 3], q: f64) -> f64 {
    u.sort_by(f64::total_cmp);
    let [a, b, c] = u;
    let size = a.abs().max(c.abs());
    if size == 0.0 {
        return 0.0;
    }
    let spread = c - a;
    if spread < 0.05 * size {
        return quad::radon7().iter().map(|(l, w)| w * (l[0] * a + l[1] * b + l[2] * c).abs().powf(q)).sum();
    }
    let s = q + 2.0;
    let norm = (q + 1.0) * (q + 2.0);
    let first = |x: f64, y: f64| {
        if x == y {
            return x.signum() * x.abs().powf(q + 1.0) / (q + 1.0);
        }
        if x * y > 0.0 {
            // |y|^s - |x|^s without cancellation when x ≈ y
            let (ax, ay) = (x.abs(), y.abs());
            let diff = -ay.powf(s) * (s * ((ax - ay) / ay).ln_1p()).exp_m1();
            return diff / (ay - ax) * y.signum() / norm;
        }
        (y.abs().powf(s) - x.abs().powf(s)) / (y - x) / norm
    };
    2.0 * (first(b, c) - first(a, b)) / spread
}

/// `‖u_h‖_q`, exact per cell; `q = ∞` gives the sup norm.
pub fn lq_norm(field: &DiscreteField, mesh: &Mesh, q: f64) -> Result<f64> {
    check_q(q)?;
    if q.is_infinite() {
        return Ok(sup_norm(field));
    }
    let s: f64 = mesh.cells().iter().zip(mesh.areas()).map(|(c, a)| a * mean_abs_pow(c.map(|v| field.values[v]), q)).sum();
    Ok(s.powf(1.0 / q))
}

/// `‖h‖_{L^q(Γ)}` for per-edge values, over Neumann edges.
pub fn neumann_edge_norm(mesh: &Mesh, h: &[f64], q: f64) -> Result<f64> {
    check_q(q)?;
    let it = mesh.boundary_edges().iter().zip(h).filter(|(e, _)| e.tag == BoundaryTag::Neumann);
    if q.is_infinite() {
        return Ok(it.fold(0.0, |m, (_, h)| m.max(h.abs())));
    }
    Ok(it.map(|(e, h)| mesh.edge_length(e) * h.abs().powf(q)).sum::<f64>().powf(1.0 / q))
}

/// `(∫ |g|^q)^{1/q}` of a closed-form function, on each cell by the degree-5
/// rule over `4^depth` sub-triangles.
pub fn function_norm(mesh: &Mesh, g: &impl Fn(Point) -> f64, q: f64, depth: u32) -> Result<f64> {
    check_q(q)?;
    let s: f64 = (0..mesh.n_cells())
        .map(|k| quad::integrate_refined(&mesh.cell_points(k), mesh.area(k), depth, &|p| g(p).abs().powf(q)))
        .sum();
    Ok(s.powf(1.0 / q))
}

/// `‖u_h - u‖_2` against a closed-form `u`.
pub fn l2_error(field: &DiscreteField, mesh: &Mesh, u: &impl Fn(Point) -> f64) -> f64 {
    (0..mesh.n_cells())
        .map(|k| {
            let c = mesh.cells()[k];
            quad::integrate_triangle(&mesh.cell_points(k), mesh.area(k), |p, l| {
                let uh: f64 = (0..3).map(|i| l[i] * field.values[c[i]]).sum();
                (uh - u(p)).powi(2)
            })
        })
        .sum::<f64>()
        .sqrt()
}

/// `‖∇u_h - ∇u‖_2` against a closed-form gradient.
pub fn grad_error(field: &DiscreteField, mesh: &Mesh, grad: &impl Fn(Point) -> Point) -> f64 {
    let gh = field.cell_gradients(mesh);
    (0..mesh.n_cells())
        .map(|k| {
            quad::integrate_triangle(&mesh.cell_points(k), mesh.area(k), |p, _| {
                let g = grad(p);
                (gh[k][0] - g[0]).powi(2) + (gh[k][1] - g[1]).powi(2)
            })
        })
        .sum::<f64>()
        .sqrt()
}
