//! Energy bounds for `H¹` solutions, mixed and pure Neumann.

use super::report::Trace;
use super::types::{exponents_match, CoefficientBounds, DataNorms, DomainGeometry, Quantity};
use super::{conjugate, sobolev_traced, trace_const_traced, BoundReport};
use crate::constants::Dimension;
use crate::error::{Error, Result};

struct CnTerm {
    value: f64,
    branch: &'static str,
    expr: String,
}

/// Default Lebesgue exponents `(t, s)` for `f` and `h`.
fn default_exponents(n: Dimension) -> (f64, f64) {
    let nf = n.as_f64();
    if n.get() > 2 {
        (2.0 * nf / (nf + 2.0), 2.0 * (nf - 1.0) / nf)
    } else {
        (2.0, 2.0)
    }
}

fn cn_traced(tr: &mut Trace, n: Dimension, t: f64, s: f64, volume: f64, a: f64, b: f64) -> Result<CnTerm> {
    const OP: &str = "cn_pair";
    let nf = n.as_f64();
    tr.put("n", nf)?;
    if n.get() > 2 {
        let (t0, s0) = default_exponents(n);
        if !exponents_match(t, t0) {
            return Err(Error::precondition(OP, format!("n > 2 requires t = 2n/(n+2) = {t0} (got {t})")));
        }
        if !exponents_match(s, s0) {
            return Err(Error::precondition(OP, format!("n > 2 requires s = 2(n-1)/n = {s0} (got {s})")));
        }
        tr.checked("t = 2n/(n+2), s = 2(n-1)/n");
        let s2 = sobolev_traced(tr, n, 2.0, "S_2")?;
        let k2 = trace_const_traced(tr, n, 2.0, "K_2")?;
        return Ok(CnTerm { value: s2 * a + k2 * b, branch: "n>2", expr: "S_2 * f_t + K_2 * h_s".into() });
    }
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::precondition(OP, format!("n = 2 requires t > 1 (got {t})")));
    }
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::precondition(OP, format!("n = 2 requires s > 1 (got {s})")));
    }
    tr.checked("t > 1, s > 1");
    tr.put("t", t)?;
    tr.put("s", s)?;
    tr.put("vol", volume)?;
    let t_conj = tr.put("t_conj", conjugate(t))?;
    let s_conj = tr.put("s_conj", conjugate(s))?;
    let k_s = trace_const_traced(tr, n, 2.0 * s / (2.0 * s - 1.0), "K_s")?;
    let h_term = volume.powf(1.0 / (2.0 * s_conj)) * k_s * b;
    let h_expr = "vol ^ (1 / (2 * s_conj)) * K_s * h_s";
    if t < 2.0 {
        let s_t = sobolev_traced(tr, n, 2.0 * t / (3.0 * t - 2.0), "S_t")?;
        Ok(CnTerm {
            value: volume.powf(1.0 / t_conj) * s_t * a + h_term,
            branch: "n=2,t<2",
            expr: format!("vol ^ (1 / t_conj) * S_t * f_t + {h_expr}"),
        })
    } else {
        Ok(CnTerm {
            value: volume.powf(1.0 / t_conj) * a / 2f64.sqrt() + h_term,
            branch: "n=2,t>=2",
            expr: format!("vol ^ (1 / t_conj) * f_t / sqrt(2) + {h_expr}"),
        })
    }
}

/// `C_n(A, B)`: the source/boundary coupling constant of the energy bound.
pub fn cn_pair(n: Dimension, t: f64, s: f64, volume: f64, a: f64, b: f64) -> Result<f64> {
    let mut tr = Trace::new();
    Ok(cn_traced(&mut tr, n, t, s, volume, a, b)?.value)
}

fn h1_common(
    id: &str,
    geom: &DomainGeometry,
    coeff: &CoefficientBounds,
    norms: &DataNorms,
    with_extension: bool,
) -> Result<BoundReport> {
    let op: &'static str = if with_extension { "h1_mixed_bound" } else { "h1_neumann_bound" };
    geom.validate()?;
    coeff.validate()?;
    norms.validate()?;
    let mut tr = Trace::new();
    let n = geom.n;
    let (t_default, s_default) = default_exponents(n);
    let f = norms.entry(Quantity::F);
    let h = norms.entry(Quantity::H);
    let t = f.map_or(t_default, |e| e.exponent);
    let s = h.map_or(s_default, |e| e.exponent);
    let fvec = match norms.at(op, Quantity::Fvec, 2.0)? {
        Some(v) => v,
        None => {
            tr.note("fvec absent, taken as 0");
            0.0
        }
    };
    if f.is_none() {
        tr.note("f absent, taken as 0");
    }
    if h.is_none() {
        tr.note("h absent, taken as 0");
    }
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let a_upper = tr.put("a_upper", coeff.a_upper)?;
    tr.checked("0 < a_lower <= a_upper");
    tr.put("fvec", fvec)?;
    let f_t = tr.put("f_t", f.map_or(0.0, |e| e.value))?;
    let h_s = tr.put("h_s", h.map_or(0.0, |e| e.value))?;
    let cn = cn_traced(&mut tr, n, t, s, geom.volume, f_t, h_s).map_err(|e| match e {
        Error::Precondition { detail, .. } => Error::precondition(op, detail),
        other => other,
    })?;
    tr.put("C_n", cn.value)?;
    let rest = (fvec + cn.value) / a_lower;
    if with_extension {
        tr.checked("|Gamma_D| > 0");
        let grad_g = match norms.at(op, Quantity::GradGExt, 2.0)? {
            Some(v) => v,
            None => {
                tr.note("grad_g_ext absent, taken as 0");
                0.0
            }
        };
        tr.put("grad_g", grad_g)?;
        let bound = (a_upper / a_lower + 1.0) * grad_g + rest;
        let expr = format!("(a_upper / a_lower + 1) * grad_g + (fvec + {}) / a_lower", cn.expr);
        tr.finish(format!("{id}/{}", cn.branch), expr, bound, true)
    } else {
        tr.checked("|Gamma_D| = 0");
        let expr = format!("(fvec + {}) / a_lower", cn.expr);
        tr.finish(format!("{id}/{}", cn.branch), expr, rest, true)
    }
}

/// Energy bound `‖∇u‖₂` for the mixed problem (`|Γ_D| > 0`).
pub fn h1_mixed_bound(geom: &DomainGeometry, coeff: &CoefficientBounds, norms: &DataNorms) -> Result<BoundReport> {
    if !geom.is_mixed() {
        return Err(Error::WrongRegime { op: "h1_mixed_bound", detail: "|Gamma_D| = 0: use the Neumann energy bound".into() });
    }
    h1_common("h1-mixed", geom, coeff, norms, true)
}

/// Energy bound `‖∇u‖₂` for the pure Neumann problem (`|Γ_D| = 0`).
pub fn h1_neumann_bound(geom: &DomainGeometry, coeff: &CoefficientBounds, norms: &DataNorms) -> Result<BoundReport> {
    if geom.is_mixed() {
        return Err(Error::WrongRegime { op: "h1_neumann_bound", detail: "|Gamma_D| > 0: use the mixed energy bound".into() });
    }
    h1_common("h1-neumann", geom, coeff, norms, false)
}
