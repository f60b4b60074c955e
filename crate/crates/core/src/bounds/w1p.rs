//! `W^{1,p}` estimates beyond the energy space.

use super::kernel::dini_grad_traced;
use super::report::Trace;
use super::types::{exponents_match, CoefficientBounds, DomainGeometry};
use super::w1q::c1c2_traced;
use super::{conjugate, trace_const_traced, BoundReport};
use crate::constants::{hls_general, hls_sharp, Dimension};
use crate::error::{Error, Result};

fn check_norm(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Configuration(format!("norm of {name} must be finite and nonnegative (got {v})")))
    }
}

/// `‖∇u‖_p ≤ C(n,p',n/q) C(Ω,n,q,a) ‖f‖_t` with `1/q = 1 + 1/p - 1/t`, for a
/// Dini continuous coefficient.
///
/// The Hardy-Littlewood-Sobolev constant is sharp on the diagonal `t = p'`
/// (then `q = p/2`, `p ∈ (2, 2n/(n-1))`); elsewhere a conservative constant is
/// used and the report is marked uncertified.
pub fn w1p_dini_bound(
    n: Dimension,
    p: f64,
    t: f64,
    geom: &DomainGeometry,
    coeff: &CoefficientBounds,
    f_norm_t: f64,
) -> Result<BoundReport> {
    const OP: &str = "w1p_dini_bound";
    geom.validate()?;
    coeff.validate()?;
    check_norm("f", f_norm_t)?;
    if n != geom.n {
        return Err(Error::Configuration(format!("dimension {n} does not match the geometry ({})", geom.n)));
    }
    let nf = n.as_f64();
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain(OP, "p > 1", p));
    }
    let t_lo = p * nf / (p + nf);
    if !(t > t_lo && t < p && t > 1.0) {
        return Err(Error::domain(OP, format!("t in ({t_lo}, {p}) and t > 1"), t));
    }
    let q = 1.0 / (1.0 + 1.0 / p - 1.0 / t);
    let q_hi = nf / (nf - 1.0);
    if !(q > 1.0 && q < q_hi) {
        return Err(Error::domain(OP, format!("1/q = 1 + 1/p - 1/t with q in (1, {q_hi})"), q));
    }
    let pc = conjugate(p);
    let lambda = nf / q;
    let diagonal = exponents_match(t, pc);

    let mut tr = Trace::new();
    tr.checked(format!("t in ({t_lo}, {p})"));
    tr.checked(format!("q = {q} in (1, n/(n-1))"));
    tr.put("p", p)?;
    tr.put("t", t)?;
    tr.put("lambda", lambda)?;
    let (hls, label) = if diagonal {
        tr.note("diagonal case t = p': sharp HLS constant");
        (hls_sharp(n, lambda)?, "diagonal")
    } else {
        tr.note("off-diagonal HLS constant is a conservative Lieb-Loss bound, not sharp; report uncertified");
        (hls_general(n, pc, lambda)?, "off-diagonal")
    };
    let hls = tr.put("C_HLS", hls)?;
    let f = tr.put("f_t", f_norm_t)?;
    let (g2, g2_expr) = dini_grad_traced(&mut tr, geom, coeff, q)?;
    let bound = hls * g2 * f;
    let expr = format!("C_HLS * ({g2_expr}) * f_t");
    tr.finish(format!("w1p-dini/{label}"), expr, bound, diagonal)
}

/// `W^{1,p}` bound for a measurable coefficient and `p > n`:
/// `|Ω|^{1/p} (C_1(p')/a_# + C_2(p', 1/a_#)) (‖f‖_p + ‖f‖_p + |Γ|^{1/(p(n-1))} K_{p'} ‖h‖_p)`.
pub fn w1p_measurable_bound(
    p: f64,
    geom: &DomainGeometry,
    coeff: &CoefficientBounds,
    fvec_p: f64,
    f_p: f64,
    h_p: f64,
) -> Result<BoundReport> {
    const OP: &str = "w1p_measurable_bound";
    geom.validate()?;
    coeff.validate()?;
    for (name, v) in [("fvec", fvec_p), ("f", f_p), ("h", h_p)] {
        check_norm(name, v)?;
    }
    let n = geom.n;
    let nf = n.as_f64();
    if !(p > nf) || !p.is_finite() {
        return Err(Error::domain(OP, "p > n", p));
    }
    let pc = conjugate(p);
    let mut tr = Trace::new();
    tr.checked(format!("p > n ({p} > {nf})"));
    tr.put("p", p)?;
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let gamma = tr.put("gamma", geom.gamma_measure)?;
    let fvec = tr.put("fvec", fvec_p)?;
    let f = tr.put("f_p", f_p)?;
    let h = tr.put("h_p", h_p)?;
    let k_pc = trace_const_traced(&mut tr, n, pc, "K_pc")?;
    let c = c1c2_traced(&mut tr, n, pc, geom.volume, 1.0 / a_lower, "1 / a_lower")?;
    tr.note("boundary-measure exponent 1/(p(n-1)) follows the proof; the statement prints 1/(p/n-1)");
    let bound = geom.volume.powf(1.0 / p) * (c.c1 / a_lower + c.c2) * (fvec + f + gamma.powf(1.0 / (p * (nf - 1.0))) * k_pc * h);
    let expr = format!(
        "vol ^ (1 / p) * ({} / a_lower + {}) * (fvec + f_p + gamma ^ (1 / (p * (n - 1))) * K_pc * h_p)",
        c.c1_expr, c.c2_expr
    );
    let dim = if n.get() > 2 { "n>2" } else { "n=2" };
    tr.finish(format!("w1p-measurable/{dim}"), expr, bound, true)
}
