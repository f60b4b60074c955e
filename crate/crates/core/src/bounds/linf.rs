//! Maximum principles: global, up to the Neumann boundary, and local.

use super::report::Trace;
use super::types::{fmt_exp, CoefficientBounds, DataNorms, DomainGeometry, Quantity};
use super::{conjugate, sobolev_traced, trace_const_traced, BoundReport};
use crate::constants::{unit_ball_volume, Dimension};
use crate::error::{Error, Result};

/// Level beyond which the superlevel sets vanish, for a decay
/// `|A(h)| ≤ (C/(h-k))^α |A(k)|^β` started at `k0`:
/// `k0 + C |Ω|^{(β-1)/α} 2^{β/(β-1)}`.
pub fn stampacchia_level(k0: f64, c: f64, alpha: f64, beta: f64, volume: f64) -> Result<f64> {
    if !(beta > 1.0) {
        return Err(Error::domain("stampacchia_level", "beta > 1 (otherwise the level iteration diverges)", beta));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain("stampacchia_level", "alpha > 0", alpha));
    }
    if !(c >= 0.0) {
        return Err(Error::domain("stampacchia_level", "C >= 0", c));
    }
    if !(volume > 0.0) {
        return Err(Error::domain("stampacchia_level", "volume > 0", volume));
    }
    Ok(k0 + c * volume.powf((beta - 1.0) / alpha) * 2f64.powf(beta / (beta - 1.0)))
}

/// Data norms at the exponents the maximum principles ask for.
struct LinfData {
    g_inf: f64,
    fvec: f64,
    f: f64,
    h: f64,
}

fn linf_data(op: &'static str, tr: &mut Trace, n: Dimension, p: f64, norms: &DataNorms) -> Result<LinfData> {
    let nf = n.as_f64();
    let wanted = [
        (Quantity::G, f64::INFINITY, "g_inf"),
        (Quantity::Fvec, p, "fvec"),
        (Quantity::F, nf * p / (p + nf), "f_r"),
        (Quantity::H, (nf - 1.0) * p / nf, "h_r"),
    ];
    let mut vals = [0.0; 4];
    for (slot, (q, exp, sym)) in vals.iter_mut().zip(wanted) {
        *slot = match norms.at(op, q, exp)? {
            Some(v) => v,
            None => {
                tr.note(format!("{} absent, taken as 0 (expected in L^{})", q.name(), fmt_exp(exp)));
                0.0
            }
        };
        tr.put(sym, *slot)?;
    }
    Ok(LinfData { g_inf: vals[0], fvec: vals[1], f: vals[2], h: vals[3] })
}

fn validate_all(geom: &DomainGeometry, coeff: &CoefficientBounds, norms: &DataNorms, op: &'static str) -> Result<()> {
    geom.validate()?;
    coeff.validate()?;
    norms.validate()?;
    if !geom.is_mixed() {
        return Err(Error::WrongRegime { op, detail: "requires |Gamma_D| > 0".into() });
    }
    Ok(())
}

/// Global bound on `ess sup_Ω |u|` for `p > n`.
pub fn linf_global_bound(p: f64, geom: &DomainGeometry, coeff: &CoefficientBounds, norms: &DataNorms) -> Result<BoundReport> {
    const OP: &str = "linf_global_bound";
    let n = geom.n;
    let nf = n.as_f64();
    if !(p > nf) || !p.is_finite() {
        return Err(Error::domain(OP, "p > n", p));
    }
    validate_all(geom, coeff, norms, OP)?;
    let mut tr = Trace::new();
    tr.checked(format!("p > n ({p} > {nf})"));
    tr.checked("|Gamma_D| > 0");
    tr.put("n", nf)?;
    tr.put("p", p)?;
    let vol = tr.put("vol", geom.volume)?;
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let data = linf_data(OP, &mut tr, n, p, norms)?;
    let pc = conjugate(p);
    let s_pc = sobolev_traced(&mut tr, n, pc, "S_pc")?;
    let k_pc = trace_const_traced(&mut tr, n, pc, "K_pc")?;
    let (cn, cn_expr, branch) = if n.get() > 2 {
        let s2 = sobolev_traced(&mut tr, n, 2.0, "S_2")?;
        (2f64.powf(nf * (p - 2.0) / (2.0 * (p - nf))) * s2, "2 ^ (n * (p - 2) / (2 * (p - n))) * S_2", "n>2")
    } else {
        (2f64.powf((3.0 * p - 2.0) / (2.0 * (p - 2.0))), "2 ^ ((3 * p - 2) / (2 * (p - 2)))", "n=2")
    };
    tr.put("C_n", cn)?;
    let bound = data.g_inf + cn / a_lower * vol.powf(1.0 / nf - 1.0 / p) * (data.fvec + s_pc * data.f + k_pc * data.h);
    let expr = format!("g_inf + {cn_expr} / a_lower * vol ^ (1 / n - 1 / p) * (fvec + S_pc * f_r + K_pc * h_r)");
    tr.finish(format!("linf-global/{branch}"), expr, bound, true)
}

/// Bound on `ess sup_{Ω ∪ Γ} |u|`, including the Neumann boundary.
///
/// `n > 2` needs `p > 2(n-1)`; `n = 2` needs an auxiliary `α ≥ 2` (so that
/// `2α/(α+2) ≥ 1`) and `p > 2α/(α-1)`.
pub fn linf_boundary_bound(
    p: f64,
    geom: &DomainGeometry,
    coeff: &CoefficientBounds,
    norms: &DataNorms,
    alpha: Option<f64>,
) -> Result<BoundReport> {
    const OP: &str = "linf_boundary_bound";
    let n = geom.n;
    let nf = n.as_f64();
    if n.get() > 2 {
        if !(p > 2.0 * (nf - 1.0)) || !p.is_finite() {
            return Err(Error::domain(OP, format!("p > 2(n-1) = {}", 2.0 * (nf - 1.0)), p));
        }
    } else {
        let Some(alpha) = alpha else {
            return Err(Error::Configuration("linf_boundary_bound: n = 2 requires alpha".into()));
        };
        if !(alpha > 1.0) {
            return Err(Error::domain(OP, "alpha > 1", alpha));
        }
        if !(alpha >= 2.0) {
            return Err(Error::domain(OP, "alpha >= 2 (so that 2 alpha/(alpha+2) >= 1)", alpha));
        }
        let pmin = 2.0 * alpha / (alpha - 1.0);
        if !(p > pmin) || !p.is_finite() {
            return Err(Error::domain(OP, format!("p > 2 alpha/(alpha-1) = {pmin}"), p));
        }
    }
    validate_all(geom, coeff, norms, OP)?;
    let mut tr = Trace::new();
    tr.checked("|Gamma_D| > 0");
    tr.put("n", nf)?;
    tr.put("p", p)?;
    let vol = tr.put("vol", geom.volume)?;
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let d = linf_data(OP, &mut tr, n, p, norms)?;
    let pc = conjugate(p);
    let s_pc = sobolev_traced(&mut tr, n, pc, "S_pc")?;
    let k_pc = trace_const_traced(&mut tr, n, pc, "K_pc")?;

    if n.get() > 2 {
        tr.checked(format!("p > 2(n-1) ({p} > {})", 2.0 * (nf - 1.0)));
        if alpha.is_some() {
            tr.note("alpha ignored for n > 2");
        }
        let inv_b = 1.0 / p + (nf - 2.0) / (2.0 * nf * (nf - 1.0));
        let b = tr.put("b", 1.0 / inv_b)?;
        let bc = conjugate(b);
        let s2 = sobolev_traced(&mut tr, n, 2.0, "S_2")?;
        let k2 = trace_const_traced(&mut tr, n, 2.0, "K_2")?;
        let s_bc = sobolev_traced(&mut tr, n, bc, "S_bc")?;
        let k_bc = trace_const_traced(&mut tr, n, bc, "K_bc")?;
        let v1 = vol.powf((nf - 2.0) / (2.0 * nf * (nf - 1.0)));
        let v2 = vol.powf((nf - 2.0) / (2.0 * (nf - 1.0) * (nf - 1.0)));
        let pre =
            2f64.powf((nf - 1.0) * (p - 2.0) / (p - 2.0 * (nf - 1.0))) / a_lower * vol.powf(1.0 / (2.0 * (nf - 1.0)) - 1.0 / p);
        let bound =
            d.g_inf + pre * ((v1 * s2 + k2) * d.fvec + (v1 * s2 * s_bc + k2 * s_pc) * d.f + (v2 * s2 * k_bc + k2 * k_pc) * d.h);
        let expr = "g_inf + 2 ^ ((n - 1) * (p - 2) / (p - 2 * (n - 1))) / a_lower * vol ^ (1 / (2 * (n - 1)) - 1 / p) \
             * ((vol ^ ((n - 2) / (2 * n * (n - 1))) * S_2 + K_2) * fvec \
             + (vol ^ ((n - 2) / (2 * n * (n - 1))) * S_2 * S_bc + K_2 * S_pc) * f_r \
             + (vol ^ ((n - 2) / (2 * (n - 1) ^ 2)) * S_2 * K_bc + K_2 * K_pc) * h_r)";
        tr.finish("linf-boundary/n>2", expr, bound, true)
    } else {
        let alpha = tr.put("alpha", alpha.expect("checked above"))?;
        tr.checked(format!("alpha >= 2, p > 2 alpha/(alpha-1) ({p} > {})", 2.0 * alpha / (alpha - 1.0)));
        let qa = 2.0 * alpha / (alpha + 2.0);
        let qb = 2.0 * alpha * p / (p * (2.0 * alpha - 1.0) - 2.0 * alpha);
        let s_a = sobolev_traced(&mut tr, n, qa, "S_a")?;
        let k_a = trace_const_traced(&mut tr, n, qa, "K_a")?;
        let s_b = sobolev_traced(&mut tr, n, qb, "S_b")?;
        let k_b = trace_const_traced(&mut tr, n, qb, "K_b")?;
        let pre = 2f64.powf((p * (alpha + 1.0) - 2.0 * alpha) / (p * (alpha - 1.0) - 2.0 * alpha)) / a_lower
            * vol.powf((alpha - 1.0) / (2.0 * alpha) - 1.0 / p);
        let bound = d.g_inf
            + pre
                * ((vol.powf(1.0 / (2.0 * alpha)) * s_a + k_a) * d.fvec
                    + (vol.powf(0.5 + 1.0 / alpha) * s_a * s_b + k_a * s_pc) * d.f
                    + (vol.powf(1.0 / alpha) * s_a * k_b + k_a * k_pc) * d.h);
        let expr = "g_inf + 2 ^ ((p * (alpha + 1) - 2 * alpha) / (p * (alpha - 1) - 2 * alpha)) / a_lower \
             * vol ^ ((alpha - 1) / (2 * alpha) - 1 / p) \
             * ((vol ^ (1 / (2 * alpha)) * S_a + K_a) * fvec \
             + (vol ^ (1 / 2 + 1 / alpha) * S_a * S_b + K_a * S_pc) * f_r \
             + (vol ^ (1 / alpha) * S_a * K_b + K_a * K_pc) * h_r)";
        tr.finish("linf-boundary/n=2", expr, bound, true)
    }
}

/// Local bound on `ess sup_{Ω(x,R/2)} |u|` for a homogeneous problem.
///
/// `energy` is `(R^{-n} ∫_{Ω(x,R)} (|u|-k0)²)^{1/2}`. The Neumann (and purely
/// local) version adds `R` inside the constant `c`.
pub fn degiorgi_local_bound(
    radius: f64,
    k0: f64,
    energy: f64,
    coeff: &CoefficientBounds,
    n: Dimension,
    neumann: bool,
) -> Result<BoundReport> {
    const OP: &str = "degiorgi_local_bound";
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::domain(OP, "R > 0", radius));
    }
    if !(k0 >= 0.0) || !k0.is_finite() {
        return Err(Error::domain(OP, "k0 >= 0", k0));
    }
    if !(energy >= 0.0) || !energy.is_finite() {
        return Err(Error::domain(OP, "energy >= 0", energy));
    }
    coeff.validate()?;
    let nf = n.as_f64();
    let mut tr = Trace::new();
    tr.checked("R > 0, k0 >= 0");
    tr.put("n", nf)?;
    tr.put("k0", k0)?;
    tr.put("energy", energy)?;
    let a_lower = tr.put("a_lower", coeff.a_lower)?;
    let a_upper = tr.put("a_upper", coeff.a_upper)?;
    let s = sobolev_traced(&mut tr, n, 2.0 * nf / (nf + 2.0), "S_c")?;
    let omega = tr.put("omega_n", unit_ball_volume(n.get())?)?;
    let (extra, extra_expr, label) = if neumann { (tr.put("R", radius)?, "R + ", "neumann") } else { (0.0, "", "mixed") };
    let c = tr.put("c", s * (extra + 1.0 + 2.0 * (a_upper / a_lower).sqrt()))?;
    let bound = k0 + 2f64.powf(3.0 * nf + 2.0 + (3.0 * nf).powi(2) / 4.0) * c.powf(1.5 * nf) * omega * energy;
    let expr = format!(
        "k0 + 2 ^ (3 * n + 2 + (3 * n) ^ 2 / 4) * (S_c * ({extra_expr}1 + 2 * sqrt(a_upper / a_lower))) ^ (3 * n / 2) * omega_n * energy"
    );
    tr.finish(format!("linf-local/{label}"), expr, bound, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::sobolev_best;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn d(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn geom(n: u32, vol: f64) -> DomainGeometry {
        DomainGeometry {
            n: d(n),
            volume: vol,
            diameter: 2.0,
            gamma_d_measure: 1.0,
            gamma_measure: 1.0,
            poincare: 1.0,
            convex: true,
        }
    }

    fn full_norms(n: u32, p: f64, g: f64, fv: f64, f: f64, h: f64) -> DataNorms {
        let nf = n as f64;
        DataNorms::new()
            .with(Quantity::G, f64::INFINITY, g)
            .with(Quantity::Fvec, p, fv)
            .with(Quantity::F, nf * p / (p + nf), f)
            .with(Quantity::H, (nf - 1.0) * p / nf, h)
    }

    #[test]
    fn stampacchia_examples() {
        assert_eq!(stampacchia_level(3.0, 0.0, 2.0, 2.0, 1.0).unwrap(), 3.0);
        assert_eq!(stampacchia_level(0.0, 1.0, 2.0, 2.0, 1.0).unwrap(), 4.0);
        assert!(stampacchia_level(0.0, 1.0, 2.0, 1.0 + 1e-6, 1.0).unwrap() > 1e100);
        assert!(stampacchia_level(0.0, 1.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn global_examples() {
        let c = CoefficientBounds::constant(1.0).unwrap();
        let r = linf_global_bound(4.0, &geom(2, 1.0), &c, &DataNorms::new().with(Quantity::G, f64::INFINITY, 7.0)).unwrap();
        assert_eq!(r.bound, 7.0);
        let r = linf_global_bound(4.0, &geom(2, 1.0), &c, &DataNorms::new().with(Quantity::F, 4.0 / 3.0, 1.0)).unwrap();
        let expected = 2f64.powf(2.5) * sobolev_best(d(2), 4.0 / 3.0).unwrap();
        assert!(rel(r.bound, expected) < 1e-14);
        assert!(rel(r.bound, 1.8006326323142121) < 1e-13);
        r.audit().unwrap();
        let r = linf_global_bound(
            4.0,
            &geom(3, 2.0),
            &CoefficientBounds::constant(1.5).unwrap(),
            &full_norms(3, 4.0, 1.0, 0.3, 0.2, 0.1),
        )
        .unwrap();
        assert!(rel(r.bound, 1.9736013604065221) < 1e-13);
        r.audit().unwrap();
    }

    #[test]
    fn global_blows_up_near_p_equals_n() {
        let c = CoefficientBounds::constant(1.0).unwrap();
        let norms = DataNorms::new().with(Quantity::Fvec, 3.0 + 1e-2, 1.0);
        let near = linf_global_bound(3.0 + 1e-2, &geom(3, 1.0), &c, &norms).unwrap().bound;
        assert!(near > 1e40);
        // closer still the constant overflows and is reported, not clamped
        let norms = DataNorms::new().with(Quantity::Fvec, 3.0 + 1e-3, 1.0);
        assert!(matches!(linf_global_bound(3.0 + 1e-3, &geom(3, 1.0), &c, &norms), Err(Error::Domain { .. })));
        let err = linf_global_bound(2.0, &geom(2, 1.0), &c, &DataNorms::new()).unwrap_err();
        assert!(err.to_string().contains("requires p > n"), "{err}");
    }

    #[test]
    fn boundary_examples() {
        let c = CoefficientBounds::constant(1.0).unwrap();
        let r = linf_boundary_bound(5.0, &geom(3, 1.0), &c, &full_norms(3, 5.0, 0.0, 1.0, 1.0, 1.0), None).unwrap();
        assert!(rel(r.bound, 115.56649019223255) < 1e-13, "{}", r.bound);
        assert!(rel(r.value_of("b").unwrap(), 60.0 / 17.0) < 1e-15);
        r.audit().unwrap();
        let r = linf_boundary_bound(5.0, &geom(2, 1.0), &c, &full_norms(2, 5.0, 0.0, 1.0, 1.0, 1.0), Some(2.0)).unwrap();
        assert!(rel(r.bound, 5996.9728411265307) < 1e-13, "{}", r.bound);
        r.audit().unwrap();
        let r = linf_boundary_bound(5.0, &geom(2, 1.0), &c, &DataNorms::new().with(Quantity::G, f64::INFINITY, 2.5), Some(3.0))
            .unwrap();
        assert_eq!(r.bound, 2.5);
    }

    #[test]
    fn boundary_admissibility() {
        let c = CoefficientBounds::constant(1.0).unwrap();
        let e = linf_boundary_bound(4.0, &geom(2, 1.0), &c, &DataNorms::new(), Some(2.0)).unwrap_err();
        assert!(e.to_string().contains("p > 2 alpha/(alpha-1)"), "{e}");
        assert!(linf_boundary_bound(4.0, &geom(3, 1.0), &c, &DataNorms::new(), None).is_err());
        assert!(linf_boundary_bound(9.0, &geom(2, 1.0), &c, &DataNorms::new(), None).is_err());
        assert!(linf_boundary_bound(9.0, &geom(2, 1.0), &c, &DataNorms::new(), Some(1.5)).is_err());
    }

    #[test]
    fn local_examples() {
        let c = CoefficientBounds::constant(1.0).unwrap();
        let r = degiorgi_local_bound(1.0, 0.7, 0.0, &c, d(2), false).unwrap();
        assert_eq!(r.bound, 0.7);
        let r = degiorgi_local_bound(1.0, 0.0, 1.0, &c, d(2), false).unwrap();
        assert!(rel(r.value_of("c").unwrap(), 0.846_284_375_321_634_5) < 1e-14);
        assert!(rel(r.bound, 249579.41769485385) < 1e-13);
        r.audit().unwrap();
        let c4 = CoefficientBounds::new(1.0, 4.0).unwrap();
        let r = degiorgi_local_bound(0.25, 0.5, 0.1, &c4, d(3), true).unwrap();
        assert!(rel(r.bound, 1502265248.3654136) < 1e-13);
        r.audit().unwrap();
        let mixed = degiorgi_local_bound(0.25, 0.5, 0.1, &c4, d(3), false).unwrap();
        assert!(r.value_of("c").unwrap() >= mixed.value_of("c").unwrap());
        assert!(degiorgi_local_bound(0.0, 0.0, 1.0, &c, d(2), false).is_err());
    }

    proptest! {
        #[test]
        fn global_is_homogeneous_and_monotone(fv in 0.0f64..3.0, f in 0.0f64..3.0, h in 0.0f64..3.0,
                                              k in 0.0f64..10.0, bump in 0.0f64..1.0, p in 2.2f64..9.0, n in 2u32..4) {
            let p = p.max(n as f64 + 0.2);
            let c = CoefficientBounds::new(0.6, 3.0).unwrap();
            let eval = |fv: f64, f: f64, h: f64| {
                let r = linf_global_bound(p, &geom(n, 0.9), &c, &full_norms(n, p, 0.0, fv, f, h)).unwrap();
                r.audit().unwrap();
                r.bound
            };
            let b0 = eval(fv, f, h);
            prop_assert!((eval(k * fv, k * f, k * h) - k * b0).abs() <= 1e-12 * (k * b0).max(1e-300));
            prop_assert!(eval(fv + bump, f, h) >= b0 - 1e-12 * b0);
            prop_assert!(eval(fv, f + bump, h) >= b0 - 1e-12 * b0);
            prop_assert!(eval(fv, f, h + bump) >= b0 - 1e-12 * b0);
        }

        #[test]
        fn global_bound_is_the_stampacchia_level(fv in 0.0f64..3.0, f in 0.0f64..3.0, p in 3.2f64..9.0, vol in 0.2f64..3.0) {
            // n = 3: α = 2* = 6, β = 2*(1/2 - 1/p), C = S_2 · C_{n,p}
            let c = CoefficientBounds::constant(1.0).unwrap();
            let g = geom(3, vol);
            let r = linf_global_bound(p, &g, &c, &full_norms(3, p, 0.0, fv, f, 0.0)).unwrap();
            let cnp = fv + r.value_of("S_pc").unwrap() * f;
            let beta = 6.0 * (0.5 - 1.0 / p);
            let level = stampacchia_level(0.0, r.value_of("S_2").unwrap() * cnp, 6.0, beta, vol).unwrap();
            prop_assert!((level - r.bound).abs() <= 1e-12 * r.bound.max(1e-300));
        }

        #[test]
        fn boundary_is_homogeneous(fv in 0.0f64..3.0, f in 0.0f64..3.0, h in 0.0f64..3.0, k in 0.0f64..10.0, alpha in 2.0f64..5.0) {
            let c = CoefficientBounds::new(0.6, 3.0).unwrap();
            let p = 2.0 * alpha / (alpha - 1.0) + 0.5;
            let eval = |fv: f64, f: f64, h: f64| {
                let r = linf_boundary_bound(p, &geom(2, 1.1), &c, &full_norms(2, p, 0.0, fv, f, h), Some(alpha)).unwrap();
                r.audit().unwrap();
                r.bound
            };
            let b0 = eval(fv, f, h);
            prop_assert!((eval(k * fv, k * f, k * h) - k * b0).abs() <= 1e-12 * (k * b0).max(1e-300));
        }
    }
}
