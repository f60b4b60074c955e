//! Pointwise decay of the Green kernel and of its gradient.

use std::f64::consts::PI;

use serde::Serialize;

use super::report::Trace;
use super::types::{CoefficientBounds, DomainGeometry};
use super::w1q::{c1c2_traced, check_q};
use super::{sobolev_traced, BoundReport};
use crate::constants::unit_ball_volume;
use crate::error::{Error, Result};

/// A power law `constant · r^exponent` with the report behind the constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDecay {
    pub constant: f64,
    pub exponent: f64,
    pub report: BoundReport,
}

impl KernelDecay {
    pub fn at(&self, r: f64) -> f64 {
        self.constant * r.powf(self.exponent)
    }
}

fn check_regime(geom: &DomainGeometry, mixed: bool, op: &'static str) -> Result<&'static str> {
    if mixed != geom.is_mixed() {
        return Err(Error::WrongRegime { op, detail: format!("flag mixed = {mixed} but |Gamma_D| = {}", geom.gamma_d_measure) });
    }
    Ok(if mixed { "mixed" } else { "neumann" })
}

/// Shared pieces: `S_{2n/(n+2)}`, `ω_n` and the factor `(δ/2 + 1 + 2√(a^#/a_#))`.
fn common(tr: &mut Trace, geom: &DomainGeometry, coeff: &CoefficientBounds) -> Result<()> {
    let n = geom.n;
    let nf = n.as_f64();
    tr.put("diam", geom.diameter)?;
    tr.put("a_lower", coeff.a_lower)?;
    tr.put("a_upper", coeff.a_upper)?;
    tr.put("kappa", geom.kappa())?;
    sobolev_traced(tr, n, 2.0 * nf / (nf + 2.0), "S_c")?;
    tr.put("omega_n", unit_ball_volume(n.get())?)?;
    tr.note("ball radius in the cutoff read as the diameter of the domain");
    Ok(())
}

const GEOM_FACTOR: &str = "(diam / 2 + 1 + 2 * sqrt(a_upper / a_lower)) ^ (3 * n / 2)";

fn geom_factor(geom: &DomainGeometry, coeff: &CoefficientBounds) -> f64 {
    (geom.diameter / 2.0 + 1.0 + 2.0 * coeff.contrast().sqrt()).powf(1.5 * geom.n.as_f64())
}

/// `|E(x,y)| ≤ C |x-y|^{1-n/q}`.
pub fn green_sup_bound(geom: &DomainGeometry, coeff: &CoefficientBounds, q: f64, mixed: bool) -> Result<KernelDecay> {
    const OP: &str = "green_sup_bound";
    geom.validate()?;
    coeff.validate()?;
    let label = check_regime(geom, mixed, OP)?;
    check_q(OP, geom.n, q)?;
    let n = geom.n;
    let nf = n.as_f64();
    let mut tr = Trace::new();
    tr.checked(format!("1 <= q < n/(n-1) with q = {q}"));
    common(&mut tr, geom, coeff)?;
    let a = tr.put("A", (geom.kappa() / coeff.a_lower).sqrt())?;
    let a_expr = "sqrt(kappa / a_lower)";
    let c = c1c2_traced(&mut tr, n, q, geom.volume, a, a_expr)?;
    let s_c = tr_value(&tr, "S_c");
    let omega = tr_value(&tr, "omega_n");
    let s_q = tr_value(&tr, "S_q");
    let constant = 2f64.powf(3.0 * nf + 1.0 + nf / q + (3.0 * nf).powi(2) / 4.0)
        * s_c.powf(1.5 * nf)
        * omega.powf(1.5 + 1.0 / nf - 1.0 / q)
        * s_q
        * (c.c1 * a + c.c2)
        * geom_factor(geom, coeff);
    let expr = format!(
        "2 ^ (3 * n + 1 + n / q + (3 * n) ^ 2 / 4) * S_c ^ (3 * n / 2) * omega_n ^ (3 / 2 + 1 / n - 1 / q) * S_q \
         * ({} * {a_expr} + {}) * {GEOM_FACTOR}",
        c.c1_expr, c.c2_expr
    );
    let report = tr.finish(format!("green-sup/{label}"), expr, constant, true)?;
    Ok(KernelDecay { constant, exponent: 1.0 - nf / q, report })
}

/// Traces the Dini gradient constant into `tr` and returns it with its expression.
pub(crate) fn dini_grad_traced(
    tr: &mut Trace,
    geom: &DomainGeometry,
    coeff: &CoefficientBounds,
    q: f64,
) -> Result<(f64, String)> {
    let Some(c_a) = coeff.dini_integral else {
        return Err(Error::Configuration("gradient kernel bound needs the Dini integral C_a of the coefficient".into()));
    };
    check_q("dini_grad_bound", geom.n, q)?;
    let n = geom.n;
    let nf = n.as_f64();
    tr.checked(format!("1 <= q < n/(n-1) with q = {q}"));
    tr.checked("coefficient is Dini continuous");
    common(tr, geom, coeff)?;
    tr.put("C_a", c_a)?;
    let a_lower = coeff.a_lower;
    let a = (geom.kappa() / a_lower).sqrt();
    let a_expr = "sqrt(kappa / a_lower)";
    let c = c1c2_traced(tr, n, q, geom.volume, a, a_expr)?;
    let s_c = tr_value(tr, "S_c");
    let omega = tr_value(tr, "omega_n");
    let s_q = tr_value(tr, "S_q");
    let value = geom.diameter / c_a
        * (4.0 * PI / 3.0 + nf)
        * 2f64.powf(3.0 * nf + 2.0 * nf / q + (3.0 * nf).powi(2) / 4.0)
        * s_c.powf(1.5 * nf)
        * omega.powf(1.0 / nf - 1.0 / q + 1.5)
        * s_q
        * (c.c1 * (geom.kappa() * a_lower).sqrt() + a_lower * c.c2)
        * geom_factor(geom, coeff);
    let expr = format!(
        "diam / C_a * (4 * pi / 3 + n) * 2 ^ (3 * n + 2 * n / q + (3 * n) ^ 2 / 4) * S_c ^ (3 * n / 2) \
         * omega_n ^ (1 / n - 1 / q + 3 / 2) * S_q * ({} * sqrt(kappa * a_lower) + a_lower * {}) * {GEOM_FACTOR}",
        c.c1_expr, c.c2_expr
    );
    Ok((value, expr))
}

/// `|∇_y E(x,y)| ≤ C |x-y|^{-n/q}` for a Dini continuous coefficient.
pub fn dini_grad_bound(geom: &DomainGeometry, coeff: &CoefficientBounds, q: f64, mixed: bool) -> Result<KernelDecay> {
    const OP: &str = "dini_grad_bound";
    geom.validate()?;
    coeff.validate()?;
    let label = check_regime(geom, mixed, OP)?;
    let mut tr = Trace::new();
    let (constant, expr) = dini_grad_traced(&mut tr, geom, coeff, q)?;
    let report = tr.finish(format!("green-grad-dini/{label}"), expr, constant, true)?;
    Ok(KernelDecay { constant, exponent: -geom.n.as_f64() / q, report })
}

fn tr_value(tr: &Trace, symbol: &str) -> f64 {
    tr.value(symbol).expect("symbol traced just above")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::Dimension;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gmax_matches_oracle() {
        let g = DomainGeometry::unit_square(1.0);
        let c = CoefficientBounds::constant(1.0).unwrap();
        let k = green_sup_bound(&g, &c, 1.2, true).unwrap();
        assert!(rel(k.constant, 4_078_315.597_384_069) < 1e-13, "{}", k.constant);
        assert_eq!(k.at(1.0), k.constant);
        assert!(rel(k.at(0.1) / k.at(0.2), 2f64.powf(2.0 / 1.2 - 1.0)) < 1e-14);
        k.report.audit().unwrap();
    }

    #[test]
    fn g2_matches_oracle() {
        let g = DomainGeometry::unit_square(1.0);
        let c = CoefficientBounds::constant(1.0).unwrap().with_dini(1.0).unwrap();
        let k = dini_grad_bound(&g, &c, 1.2, true).unwrap();
        assert!(rel(k.constant, 56661524.160240549) < 1e-13, "{}", k.constant);
        assert_eq!(k.exponent, -2.0 / 1.2);
        k.report.audit().unwrap();
        let c2 = CoefficientBounds::constant(1.0).unwrap().with_dini(0.5).unwrap();
        let k2 = dini_grad_bound(&g, &c2, 1.2, true).unwrap();
        assert!(rel(k2.constant / k.constant, 2.0) < 1e-14);
    }

    #[test]
    fn neumann_constants_are_larger() {
        let c = CoefficientBounds::constant(1.0).unwrap().with_dini(1.0).unwrap();
        let mixed = DomainGeometry::unit_square(1.0);
        let neu = DomainGeometry::unit_square(0.0);
        assert!(
            dini_grad_bound(&neu, &c, 1.2, false).unwrap().constant > dini_grad_bound(&mixed, &c, 1.2, true).unwrap().constant
        );
        assert!(
            green_sup_bound(&neu, &c, 1.2, false).unwrap().constant > green_sup_bound(&mixed, &c, 1.2, true).unwrap().constant
        );
        assert!(green_sup_bound(&neu, &c, 1.2, true).is_err());
    }

    #[test]
    fn errors() {
        let g = DomainGeometry::unit_square(1.0);
        let c = CoefficientBounds::constant(1.0).unwrap();
        assert!(matches!(dini_grad_bound(&g, &c, 1.2, true), Err(Error::Configuration(_))));
        assert!(matches!(green_sup_bound(&g, &c, 2.0, true), Err(Error::Domain { .. })));
        assert!(green_sup_bound(&g, &c, 1.0, true).is_err());
    }

    proptest! {
        #[test]
        fn kernel_reports_audit(q in 1.01f64..1.45, n in 2u32..5, lo in 0.3f64..2.0, contrast in 1.0f64..20.0) {
            let n = Dimension::new(n).unwrap();
            let q = q.min(n.as_f64() / (n.as_f64() - 1.0) - 0.01);
            let g = DomainGeometry { n, volume: 1.3, diameter: 1.7, gamma_d_measure: 0.4, gamma_measure: 2.0, poincare: 0.5, convex: true };
            let c = CoefficientBounds::new(lo, lo * contrast).unwrap().with_dini(0.7).unwrap();
            green_sup_bound(&g, &c, q, true).unwrap().report.audit().unwrap();
            dini_grad_bound(&g, &c, q, true).unwrap().report.audit().unwrap();
        }
    }
}
