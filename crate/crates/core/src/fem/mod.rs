//! P1 finite elements on triangulated polygons for
//! `-∇·(a∇u - **f**) = f` with `u = g` on `Γ_D` and
//! `(a∇u - **f**)·n = h` on `Γ`, plus the measurements the harness takes.

mod assembly;
mod instrument;
mod io;
mod mesh;
mod norms;
pub mod quad;
mod solver;

pub use assembly::{
    assemble, assemble_with, cell_averages, load_vector, stiffness, Coefficient, Constraint, CsrMatrix, LinearSystem, MeanKind,
    ProblemData, SystemOperator,
};
pub use instrument::{caccioppoli_ratio, dirichlet_extension_energy, level_measure, mollified_dirac, sola_truncate};
pub use io::{field_csv, format_mesh, parse_mesh, read_mesh, write_mesh};
pub use mesh::{build_disk, build_structured_square, BoundaryEdge, BoundaryTag, Mesh, Point, Segment, SideTags, SquareTags};
pub use norms::{
    cellwise_norm, energy_norm, function_norm, grad_error, grad_norm, l2_error, lq_norm, neumann_edge_norm, sup_norm,
};
pub use solver::{solve, DiscreteField, DEFAULT_TOL};
