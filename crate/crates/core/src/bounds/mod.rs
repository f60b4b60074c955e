//! Closed-form a-priori estimates, each returned as a [`BoundReport`] with a
//! complete constant trace.
//!
//! Every precondition failure is an error; nothing is clamped. Branches
//! (dimension, exponent regime, boundary regime) are spelled out in the
//! report's `formula_id`.

mod h1;
mod kernel;
mod linf;
mod report;
mod types;
mod w1p;
mod w1q;

pub use h1::{cn_pair, h1_mixed_bound, h1_neumann_bound};
pub use kernel::{dini_grad_bound, green_sup_bound, KernelDecay};
pub use linf::{degiorgi_local_bound, linf_boundary_bound, linf_global_bound, stampacchia_level};
pub use report::{BoundReport, TraceEntry, AUDIT_TOLERANCE};
pub use types::{CoefficientBounds, DataNorms, DomainGeometry, NormEntry, Quantity};
pub use w1p::{w1p_dini_bound, w1p_measurable_bound};
pub use w1q::{dirac_w1q_bound, ell, w1q_bound, w1q_c1, w1q_c2};

use crate::constants::{sobolev_or_limit, trace_or_limit, Dimension};
use crate::error::Result;
use report::Trace;

/// Hölder conjugate `p' = p/(p-1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `S_q`, traced under `symbol`, with the `q = 1` limit noted when used.
fn sobolev_traced(tr: &mut Trace, n: Dimension, q: f64, symbol: &str) -> Result<f64> {
    let c = sobolev_or_limit(n, q)?;
    if c.limit_substituted {
        tr.note(format!("{symbol}: exponent 1, limit constant S_1 used"));
    }
    tr.put(symbol, c.value)
}

/// `K_q`, traced under `symbol`; always flagged as the verbatim displayed formula.
fn trace_const_traced(tr: &mut Trace, n: Dimension, q: f64, symbol: &str) -> Result<f64> {
    let c = trace_or_limit(n, q)?;
    if c.limit_substituted {
        tr.note(format!("{symbol}: exponent 1, limit value K_1 = 1 used"));
    } else {
        tr.note(format!("{symbol}: trace constant evaluated from the verbatim formula"));
    }
    tr.put(symbol, c.value)
}
