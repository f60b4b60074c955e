//! `W^{1,q}` bounds (`1 ≤ q < n/(n-1)`) for `L¹` data and for a Dirac mass.

use super::report::Trace;
use super::types::{CoefficientBounds, DomainGeometry};
use super::{sobolev_traced, BoundReport};
use crate::constants::{sobolev_or_limit, Dimension, EXPONENT_GUARD};
use crate::error::{Error, Result};

/// The exponent `ℓ(q) = (-5q² + 19q - 10)/(2q(q-1))`, defined for `1 < q < 2`.
pub fn ell(q: f64) -> Result<f64> {
    if !(q > 1.0 + EXPONENT_GUARD && q < 2.0) {
        return Err(Error::domain("ell", "1 < q < 2", q));
    }
    Ok((-5.0 * q * q + 19.0 * q - 10.0) / (2.0 * q * (q - 1.0)))
}

pub(crate) fn check_q(op: &'static str, n: Dimension, q: f64) -> Result<()> {
    let nf = n.as_f64();
    let upper = nf / (nf - 1.0);
    if !(q >= 1.0 && q < upper - EXPONENT_GUARD) {
        return Err(Error::domain(op, format!("1 <= q < n/(n-1) = {upper}"), q));
    }
    if n.get() == 2 && q <= 1.0 + EXPONENT_GUARD {
        return Err(Error::domain(op, "q > 1 when n = 2 (the constant carries A^(2/(q-1)))", q));
    }
    Ok(())
}

fn c1_value(n: Dimension, q: f64, volume: f64) -> f64 {
    let nf = n.as_f64();
    let pre = volume.powf(1.0 / q - 0.5);
    if n.get() > 2 {
        pre * (nf - q).powf(1.5) / (q * (nf - 2.0) * (nf + q - nf * q).sqrt())
            * 2f64.powf(1.0 / q + (3.0 * nf - q * (nf + 1.0)) / (2.0 * (nf - q)))
    } else {
        pre * (2.0 - q).powf(-0.5) * 2f64.powf(((6.0 - q) * q - 2.0) / (2.0 * q))
    }
}

fn c1_expr(n: Dimension) -> &'static str {
    if n.get() > 2 {
        "(vol ^ (1 / q - 1 / 2) * (n - q) ^ 1.5 / (q * (n - 2) * (n + q - n * q) ^ 0.5) \
         * 2 ^ (1 / q + (3 * n - q * (n + 1)) / (2 * (n - q))))"
    } else {
        "(vol ^ (1 / q - 1 / 2) * (2 - q) ^ (-0.5) * 2 ^ (((6 - q) * q - 2) / (2 * q)))"
    }
}

fn c2_value(n: Dimension, q: f64, a: f64, volume: f64, s_q: f64) -> Result<f64> {
    let nf = n.as_f64();
    if n.get() > 2 {
        let e = (nf - q) / (q * (nf - 2.0));
        Ok(a.powf(2.0 * e)
            * ((nf - q) / (nf + q - nf * q)).powf(e)
            * 2f64.powf((2.0 - q) * (nf * q - nf + q) / (q * q * (nf - 2.0)))
            * s_q.powf(nf * (2.0 - q) / (q * (nf - 2.0))))
    } else {
        Ok(a.powf(2.0 / (q - 1.0))
            * volume.powf(1.0 / q - 0.5)
            * ((q - 1.0) * (3.0 - q).powf((3.0 - q) / (q - 1.0))).powf((2.0 - q) / (2.0 * q))
            / (2.0 - q).powf(1.0 / (q - 1.0))
            * 2f64.powf(ell(q)?)
            * s_q.powf((3.0 - q) / (q - 1.0)))
    }
}

fn c2_expr(n: Dimension, a: &str) -> String {
    if n.get() > 2 {
        format!(
            "(({a}) ^ (2 * (n - q) / (q * (n - 2))) * ((n - q) / (n + q - n * q)) ^ ((n - q) / (q * (n - 2))) \
             * 2 ^ ((2 - q) * (n * q - n + q) / (q ^ 2 * (n - 2))) * S_q ^ (n * (2 - q) / (q * (n - 2))))"
        )
    } else {
        format!(
            "(({a}) ^ (2 / (q - 1)) * vol ^ (1 / q - 1 / 2) * ((q - 1) * (3 - q) ^ ((3 - q) / (q - 1))) ^ ((2 - q) / (2 * q)) \
             / (2 - q) ^ (1 / (q - 1)) * 2 ^ ((-5 * q ^ 2 + 19 * q - 10) / (2 * q * (q - 1))) * S_q ^ ((3 - q) / (q - 1)))"
        )
    }
}

/// `C_1(Ω, n, q)`.
pub fn w1q_c1(geom: &DomainGeometry, q: f64) -> Result<f64> {
    geom.validate()?;
    check_q("w1q_c1", geom.n, q)?;
    Ok(c1_value(geom.n, q, geom.volume))
}

/// `C_2(n, q, A)`. The two-dimensional branch also carries `|Ω|^{1/q-1/2}`,
/// hence the `volume` argument (ignored for `n > 2`).
pub fn w1q_c2(n: Dimension, q: f64, a: f64, volume: f64) -> Result<f64> {
    check_q("w1q_c2", n, q)?;
    if !(a >= 0.0) {
        return Err(Error::domain("w1q_c2", "A >= 0", a));
    }
    c2_value(n, q, a, volume, sobolev_or_limit(n, q)?.value)
}

/// The traced pair `(C_1, C_2(A))` together with the expressions that
/// rebuild them. `a_expr` rebuilds `A` from symbols already in the trace.
pub(crate) struct C1C2 {
    pub c1: f64,
    pub c2: f64,
    pub c1_expr: &'static str,
    pub c2_expr: String,
}

pub(crate) fn c1c2_traced(tr: &mut Trace, n: Dimension, q: f64, volume: f64, a: f64, a_expr: &str) -> Result<C1C2> {
    tr.put("n", n.as_f64())?;
    tr.put("q", q)?;
    tr.put("vol", volume)?;
    let s_q = sobolev_traced(tr, n, q, "S_q")?;
    let c1 = tr.put("C_1", c1_value(n, q, volume))?;
    let c2 = tr.put("C_2", c2_value(n, q, a, volume, s_q)?)?;
    if n.get() == 2 {
        tr.put("ell", ell(q)?)?;
    }
    Ok(C1C2 { c1, c2, c1_expr: c1_expr(n), c2_expr: c2_expr(n, a_expr) })
}

fn regime_label(geom: &DomainGeometry, mixed: bool, op: &'static str) -> Result<&'static str> {
    if mixed != geom.is_mixed() {
        return Err(Error::WrongRegime {
            op,
            detail: format!(
                "flag mixed = {mixed} but |Gamma_D| = {} (the Dirichlet part decides the regime)",
                geom.gamma_d_measure
            ),
        });
    }
    Ok(if mixed { "mixed" } else { "neumann" })
}

/// `W^{1,q}` bound for data `**f** ∈ L²`, `f ∈ L¹`, `h ∈ L¹`, `g = 0`.
pub fn w1q_bound(
    geom: &DomainGeometry,
    coeff: &CoefficientBounds,
    fvec_l2: f64,
    f_l1: f64,
    h_l1: f64,
    q: f64,
    mixed: bool,
) -> Result<BoundReport> {
    const OP: &str = "w1q_bound";
    geom.validate()?;
    coeff.validate()?;
    for (name, v) in [("fvec", fvec_l2), ("f", f_l1), ("h", h_l1)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Configuration(format!("norm of {name} must be finite and nonnegative (got {v})")));
        }
    }
    let label = regime_label(geom, mixed, OP)?;
    check_q(OP, geom.n, q)?;
    let mut tr = Trace::new();
    tr.checked(format!("1 <= q < n/(n-1) with q = {q}"));
    tr.checked("g = 0");
    let kappa = tr.put("kappa", geom.kappa())?;
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let fvec = tr.put("fvec", fvec_l2)?;
    let f1 = tr.put("f_1", f_l1)?;
    let h1 = tr.put("h_1", h_l1)?;
    let m = tr.put("M", fvec / a_lower + (kappa * (f1 + h1) / a_lower).sqrt())?;
    let m_expr = "fvec / a_lower + sqrt(kappa * (f_1 + h_1) / a_lower)";
    let c = c1c2_traced(&mut tr, geom.n, q, geom.volume, m, m_expr)?;
    let bound = c.c1 * m + c.c2;
    let expr = format!("{} * ({m_expr}) + {}", c.c1_expr, c.c2_expr);
    let dim = if geom.n.get() > 2 { "n>2" } else { "n=2" };
    tr.finish(format!("w1q/{dim},{label}"), expr, bound, true)
}

/// `W^{1,q}` bound for a unit Dirac mass (the data of a Green kernel).
pub fn dirac_w1q_bound(geom: &DomainGeometry, coeff: &CoefficientBounds, q: f64, mixed: bool) -> Result<BoundReport> {
    const OP: &str = "dirac_w1q_bound";
    geom.validate()?;
    coeff.validate()?;
    let label = regime_label(geom, mixed, OP)?;
    check_q(OP, geom.n, q)?;
    let mut tr = Trace::new();
    tr.checked(format!("1 <= q < n/(n-1) with q = {q}"));
    let kappa = tr.put("kappa", geom.kappa())?;
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let a = tr.put("A", (kappa / a_lower).sqrt())?;
    let c = c1c2_traced(&mut tr, geom.n, q, geom.volume, a, "sqrt(kappa / a_lower)")?;
    let bound = c.c1 * a + c.c2;
    let expr = format!("{} * sqrt(kappa / a_lower) + {}", c.c1_expr, c.c2_expr);
    let dim = if geom.n.get() > 2 { "n>2" } else { "n=2" };
    tr.finish(format!("w1q-dirac/{dim},{label}"), expr, bound, true)
}
