//! Special functions and best constants: the gamma function, unit-ball
//! volumes, Talenti's sharp Sobolev constants, the trace constants, the crude
//! `W^{1,1}` embedding constant and the sharp diagonal Hardy-Littlewood-Sobolev
//! constant.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents closer than this to a singular endpoint are rejected.
pub const EXPONENT_GUARD: f64 = 1e-9;

/// Exponents this close to 1 are treated as exactly 1 by the `*_or_limit`
/// helpers, which then fall back to the limit constants.
pub const UNIT_EXPONENT_SNAP: f64 = 1e-12;

/// Spatial dimension, `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("Dimension::new", "n >= 2", n));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Upper end `n/(n-1)` of the SOLA exponent window.
    pub fn sola_limit(self) -> f64 {
        let n = self.as_f64();
        n / (n - 1.0)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A Lebesgue exponent `q` together with its critical Sobolev exponent
/// `q* = qn/(n-q)` and critical trace exponent `q_* = q(n-1)/(n-q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevExponentPair {
    pub q: f64,
    pub q_star: f64,
    pub q_lower: f64,
}

impl SobolevExponentPair {
    pub fn new(n: Dimension, q: f64) -> Result<Self> {
        let nf = n.as_f64();
        if !(q >= 1.0 && q < nf) {
            return Err(Error::domain("SobolevExponentPair::new", format!("1 <= q < n = {nf}"), q));
        }
        Ok(SobolevExponentPair { q, q_star: q * nf / (nf - q), q_lower: q * (nf - 1.0) / (nf - q) })
    }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument handled by the exact integer / half-integer products.
const HALF_INTEGER_FAST_PATH_MAX: f64 = 60.0;

/// The gamma function for positive real arguments.
///
/// Integer and half-integer arguments up to 60 are evaluated as exact
/// factorial products (`Γ(k+1) = k!`, `Γ(k+1/2) = √π (2k-1)!!/2^k`); other
/// arguments go through the Lanczos series, shifted up by one for `x < 0.5`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("gamma_fn", "x > 0 and finite", x));
    }
    if let Some(v) = half_integer_gamma(x) {
        return Ok(v);
    }
    if x < 0.5 {
        return Ok(lanczos(x + 1.0) / x);
    }
    Ok(lanczos(x))
}

fn half_integer_gamma(x: f64) -> Option<f64> {
    if x > HALF_INTEGER_FAST_PATH_MAX {
        return None;
    }
    let twice = 2.0 * x;
    if twice.fract() != 0.0 {
        return None;
    }
    let twice = twice as u64;
    if twice.is_multiple_of(2) {
        // Γ(k) = (k-1)!
        let k = twice / 2;
        Some((1..k).fold(1.0, |acc, j| acc * j as f64))
    } else {
        // Γ(k + 1/2) = √π · Π_{j=1..k} (j - 1/2)
        let k = (twice - 1) / 2;
        Some((1..=k).fold(PI.sqrt(), |acc, j| acc * (j as f64 - 0.5)))
    }
}

/// Natural logarithm of `Γ(x)` for `x > 0`, used where `Γ` itself would
/// overflow (quotients of gammas at large arguments).
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("ln_gamma", "x > 0 and finite", x));
    }
    if x <= 100.0 {
        return Ok(gamma_fn(x)?.ln());
    }
    let y = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + series.ln())
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // t^(x+1/2) e^{-t} split in two halves so that large x cannot overflow early.
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * series
}

/// Volume `ω_n = π^{n/2}/Γ(n/2+1)` of the unit ball of `R^n`.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("unit_ball_volume", "n >= 1", n));
    }
    let nf = n as f64;
    Ok(PI.powf(nf / 2.0) / gamma_fn(nf / 2.0 + 1.0)?)
}

/// Area `σ_{n-1} = n ω_n` of the unit sphere of `R^n`.
pub fn unit_sphere_area(n: u32) -> Result<f64> {
    Ok(n as f64 * unit_ball_volume(n)?)
}

fn check_open_exponent(op: &'static str, n: Dimension, q: f64) -> Result<()> {
    let nf = n.as_f64();
    if !q.is_finite() || q <= 1.0 + EXPONENT_GUARD || q >= nf - EXPONENT_GUARD {
        return Err(Error::domain(op, format!("1 < q < n = {nf} (1e-9 away from both ends)"), q));
    }
    Ok(())
}

/// Talenti's sharp constant `S_q` in `‖v‖_{q*} ≤ S_q ‖∇v‖_q`, for `1 < q < n`.
pub fn sobolev_best(n: Dimension, q: f64) -> Result<f64> {
    check_open_exponent("sobolev_best", n, q)?;
    let nf = n.as_f64();
    let ratio = gamma_fn(1.0 + nf / 2.0)? * gamma_fn(nf)? / (gamma_fn(nf / q)? * gamma_fn(1.0 + nf - nf / q)?);
    Ok(PI.powf(-0.5) * nf.powf(-1.0 / q) * ((q - 1.0) / (nf - q)).powf(1.0 - 1.0 / q) * ratio.powf(1.0 / nf))
}

/// The limit constant `S_1 = π^{-1/2} n^{-1} Γ(1+n/2)^{1/n}`.
pub fn sobolev_limit_s1(n: Dimension) -> f64 {
    let nf = n.as_f64();
    // Γ(1 + n/2) is an integer or half-integer argument: always exact here.
    let g = gamma_fn(1.0 + nf / 2.0).expect("positive argument");
    PI.powf(-0.5) / nf * g.powf(1.0 / nf)
}

/// The trace constant `K_q`, evaluated exactly as displayed, for `1 < q < n`.
pub fn trace_best(n: Dimension, q: f64) -> Result<f64> {
    check_open_exponent("trace_best", n, q)?;
    let nf = n.as_f64();
    // The gamma arguments grow like 1/(q-1); the quotient is formed in log space.
    let ln_ratio = ln_gamma(q * (nf - 1.0) / (2.0 * (q - 1.0)))? - ln_gamma((nf - 1.0) / (2.0 * (q - 1.0)))?;
    Ok(PI.powf((1.0 - q) / 2.0) * ((q - 1.0) / (nf - q)).powf(q - 1.0) * (ln_ratio * (q - 1.0) / (nf - 1.0)).exp())
}

/// Limit of `K_q` as `q → 1⁺`.
///
/// Every factor of the displayed formula tends to one: the gamma quotient
/// behaves like `z^{(n-1)/2}` with `z → ∞` but is raised to a power
/// `(q-1)/(n-1) → 0` faster than it grows.
pub const TRACE_LIMIT_K1: f64 = 1.0;

/// A Sobolev or trace constant together with whether the `q = 1` limit was
/// substituted for the requested exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointConstant {
    pub value: f64,
    pub limit_substituted: bool,
}

/// `S_q`, falling back to `S_1` when `q` is (numerically) exactly 1.
pub fn sobolev_or_limit(n: Dimension, q: f64) -> Result<EndpointConstant> {
    if (q - 1.0).abs() <= UNIT_EXPONENT_SNAP {
        return Ok(EndpointConstant { value: sobolev_limit_s1(n), limit_substituted: true });
    }
    Ok(EndpointConstant { value: sobolev_best(n, q)?, limit_substituted: false })
}

/// `K_q`, falling back to the `q → 1⁺` limit when `q` is exactly 1.
pub fn trace_or_limit(n: Dimension, q: f64) -> Result<EndpointConstant> {
    if (q - 1.0).abs() <= UNIT_EXPONENT_SNAP {
        return Ok(EndpointConstant { value: TRACE_LIMIT_K1, limit_substituted: true });
    }
    Ok(EndpointConstant { value: trace_best(n, q)?, limit_substituted: false })
}

/// The non-sharp constant `n^{-1/2}` in `‖u‖_{n/(n-1)} ≤ n^{-1/2} ‖∇u‖_1`.
pub fn crude_sobolev(n: Dimension) -> f64 {
    n.as_f64().powf(-0.5)
}

/// Sharp Hardy-Littlewood-Sobolev constant on the diagonal `s = t = 2n/(2n-λ)`.
pub fn hls_sharp(n: Dimension, lambda: f64) -> Result<f64> {
    let nf = n.as_f64();
    if !(lambda > 0.0) || lambda >= nf - EXPONENT_GUARD {
        return Err(Error::domain("hls_sharp", format!("0 < lambda < n = {nf}"), lambda));
    }
    Ok(PI.powf(lambda / 2.0) * gamma_fn((nf - lambda) / 2.0)? / gamma_fn(nf - lambda / 2.0)?
        * (gamma_fn(nf)? / gamma_fn(nf / 2.0)?).powf(1.0 - lambda / nf))
}

/// A conservative (non-sharp) Hardy-Littlewood-Sobolev constant for the
/// off-diagonal case `1/s + 1/t + λ/n = 2`, following the Lieb-Loss bound
///
/// `C ≤ n/((n-λ) s t) (σ_{n-1}/n)^{λ/n} [ (λ/n / (1-1/s))^{λ/n} + (λ/n / (1-1/t))^{λ/n} ]`.
pub fn hls_general(n: Dimension, s: f64, lambda: f64) -> Result<f64> {
    let nf = n.as_f64();
    if !(lambda > 0.0) || lambda >= nf - EXPONENT_GUARD {
        return Err(Error::domain("hls_general", format!("0 < lambda < n = {nf}"), lambda));
    }
    let inv_t = 2.0 - lambda / nf - 1.0 / s;
    if !(s > 1.0) || !(inv_t > 0.0 && inv_t < 1.0) {
        return Err(Error::domain("hls_general", "s, t > 1 with 1/s + 1/t + lambda/n = 2", format!("s = {s}")));
    }
    let t = 1.0 / inv_t;
    let ln = lambda / nf;
    let sphere = unit_sphere_area(n.get())?;
    Ok(nf / ((nf - lambda) * s * t)
        * (sphere / nf).powf(ln)
        * ((ln / (1.0 - 1.0 / s)).powf(ln) + (ln / (1.0 - 1.0 / t)).powf(ln)))
}

/// Default Poincaré constant `C_*`.
///
/// Convex domains get the Payne-Weinberger value `δ(Ω)/π` for the mean-zero
/// inequality; a user-supplied value always takes precedence, and is
/// mandatory for non-convex domains.
pub fn poincare_default(diameter: f64, convex: bool, user: Option<f64>) -> Result<f64> {
    match user {
        Some(c) if c > 0.0 && c.is_finite() => Ok(c),
        Some(c) => Err(Error::Configuration(format!("Poincaré constant must be positive, got {c}"))),
        None if convex => {
            if !(diameter > 0.0) {
                return Err(Error::domain("poincare_default", "diameter > 0", diameter));
            }
            Ok(diameter / PI)
        }
        None => Err(Error::Configuration("non-convex domain: the Poincaré constant must be supplied".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // mpmath, 40 digits (tests/oracles/formula_oracle.py style)
    const GAMMA_TABLE: [(f64, f64); 20] = [
        (0.5, 1.772_453_850_905_516),
        (0.55, 1.616_124_268_733_575),
        (0.7, 1.298_055_332_647_557_7),
        (0.999, 1.000_578_205_629_358_6),
        (1.25, 0.906_402_477_055_477),
        (1.5, 0.886_226_925_452_758),
        (2.2, 1.101_802_490_879_712_8),
        (3.7, 4.170_651_783_796_603),
        (4.5, 11.631_728_396_567_448),
        (7.1, 868.956_858_800_640_4),
        (9.9, 289_867.703_840_109_4),
        (13.3, 1_025_640_025.169_629_2),
        (17.5, 85_634_974_475_162.06),
        (21.05, 2.829_703_400_024_274_4e18),
        (25.6, 4.259_787_883_649_394e24),
        (31.3, 7.406_183_638_337_378e32),
        (38.8, 2.5214587576943964e+44),
        (44.4, 2.737_426_260_570_862e53),
        (49.75, 2.294_702_302_517_863e62),
        (50.0, 6.082_818_640_342_675e62),
    ];

    #[test]
    fn gamma_matches_high_precision_table() {
        for (x, expected) in GAMMA_TABLE {
            let got = gamma_fn(x).unwrap();
            assert!(rel(got, expected) <= 1e-13, "Γ({x}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn gamma_spec_examples() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-15);
        assert!(rel(gamma_fn(4.5).unwrap(), 6.5625 * PI.sqrt()) < 1e-15);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain { .. })));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain { .. })));
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_agrees_with_gamma_and_stirling() {
        for x in [0.7, 4.5, 49.75, 100.0] {
            assert!((ln_gamma(x).unwrap() - gamma_fn(x).unwrap().ln()).abs() < 1e-12 * x.max(1.0));
        }
        // ln Γ(1000.5) from mpmath
        assert!((ln_gamma(1000.5).unwrap() - 5908.674175848677).abs() < 1e-9);
    }

    #[test]
    fn gamma_small_arguments_use_shift() {
        let x = 0.3;
        assert!(rel(gamma_fn(x).unwrap() * x, gamma_fn(x + 1.0).unwrap()) < 1e-14);
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.5f64..40.0) {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            prop_assert!(rel(lhs, rhs) <= 1e-12);
        }
    }

    #[test]
    fn ball_volume_examples() {
        assert!(rel(unit_ball_volume(2).unwrap(), PI) < 1e-15);
        assert!(rel(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0) < 1e-15);
        assert!(rel(unit_ball_volume(5).unwrap(), 8.0 * PI * PI / 15.0) < 1e-14);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn sphere_area_examples() {
        assert!(rel(unit_sphere_area(2).unwrap(), 2.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_area(3).unwrap(), 4.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_area(4).unwrap(), 2.0 * PI * PI) < 1e-14);
    }

    #[test]
    fn sphere_is_n_times_ball_exactly() {
        for n in 1..=12 {
            assert_eq!(unit_sphere_area(n).unwrap(), n as f64 * unit_ball_volume(n).unwrap());
        }
    }

    #[test]
    fn ball_volume_peaks_at_five() {
        let v: Vec<f64> = (1..=12).map(|n| unit_ball_volume(n).unwrap()).collect();
        let argmax = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
        assert_eq!(argmax, 5);
        for n in 6..12 {
            assert!(v[n] < v[n - 1]);
        }
    }

    #[test]
    fn talenti_constants_match_oracle() {
        // closed form 4^{1/3} / (√3 π^{2/3})
        let closed = 4f64.powf(1.0 / 3.0) / (3f64.sqrt() * PI.powf(2.0 / 3.0));
        assert!(rel(sobolev_best(dim(3), 2.0).unwrap(), closed) < 1e-13);
        assert!(rel(sobolev_best(dim(3), 2.0).unwrap(), 0.427_260_542_862_526_7) < 1e-13);
        assert!(rel(sobolev_best(dim(4), 2.0).unwrap(), 0.31218920569777795) < 1e-13);
        assert!(rel(sobolev_best(dim(3), 1.5).unwrap(), 0.260_530_880_598_924) < 1e-13);
        assert!(rel(sobolev_best(dim(2), 4.0 / 3.0).unwrap(), std::f64::consts::FRAC_1_PI) < 1e-13);
    }

    #[test]
    fn talenti_approaches_limit_constant() {
        let near = sobolev_best(dim(3), 1.001).unwrap();
        assert!(rel(near, 0.20575219215508442) < 1e-12);
        let s1 = sobolev_limit_s1(dim(3));
        let gaps: Vec<f64> = [1e-3, 1e-4, 1e-5].iter().map(|d| (sobolev_best(dim(3), 1.0 + d).unwrap() - s1).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        assert!(gaps[1] < 1e-3);
    }

    #[test]
    fn talenti_rejects_endpoints() {
        for q in [1.0, 1.0 + 1e-10, 3.0, 3.0 - 1e-10, 3.5, 0.5] {
            assert!(sobolev_best(dim(3), q).is_err(), "q = {q}");
        }
    }

    #[test]
    fn limit_constant_values() {
        assert!(rel(sobolev_limit_s1(dim(2)), 1.0 / (2.0 * PI.sqrt())) < 1e-15);
        assert!(rel(sobolev_limit_s1(dim(3)), 0.20678349696646667) < 1e-14);
        for n in 2..=10 {
            assert!(sobolev_limit_s1(dim(n)) < crude_sobolev(dim(n)));
        }
    }

    #[test]
    fn trace_constants_match_oracle() {
        assert!(rel(trace_best(dim(3), 2.0).unwrap(), PI.powf(-0.5)) < 1e-14);
        assert!(rel(trace_best(dim(4), 2.0).unwrap(), 0.370_018_484_153_678_1) < 1e-13);
        assert!(rel(trace_best(dim(3), 1.5).unwrap(), 0.515_714_572_479_411_1) < 1e-13);
        assert!(rel(trace_best(dim(2), 4.0 / 3.0).unwrap(), 0.682_784_063_255_295_7) < 1e-13);
        assert!(trace_best(dim(3), 3.0).is_err());
    }

    #[test]
    fn trace_tends_to_one_at_unit_exponent() {
        let near = trace_best(dim(3), 1.0 + 1e-6).unwrap();
        assert!((near - TRACE_LIMIT_K1).abs() < 1e-4);
        let c = trace_or_limit(dim(2), 1.0).unwrap();
        assert!(c.limit_substituted);
        assert_eq!(c.value, 1.0);
    }

    #[test]
    fn endpoint_substitution_is_exact_only() {
        let c = sobolev_or_limit(dim(2), 1.0).unwrap();
        assert!(c.limit_substituted);
        assert_eq!(c.value, sobolev_limit_s1(dim(2)));
        assert!(sobolev_or_limit(dim(2), 1.0 + 1e-10).is_err());
        assert!(!sobolev_or_limit(dim(3), 2.0).unwrap().limit_substituted);
    }

    #[test]
    fn crude_constant() {
        assert!((crude_sobolev(dim(2)) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(crude_sobolev(dim(4)), 0.5);
        assert!((crude_sobolev(dim(9)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hls_examples() {
        assert!(rel(hls_sharp(dim(2), 1.0).unwrap(), 2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(hls_sharp(dim(3), 2.0).unwrap(), 7.303_872_119_375_109) < 1e-13);
        assert!(rel(hls_sharp(dim(2), 1.6).unwrap(), 12.493666315231819) < 1e-13);
        assert!((hls_sharp(dim(3), 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(hls_sharp(dim(2), 2.0).is_err());
        assert!(hls_sharp(dim(2), 0.0).is_err());
    }

    #[test]
    fn hls_increasing_in_lambda() {
        for n in [2u32, 3] {
            let nf = n as f64;
            let grid: Vec<f64> = (1..=400).map(|i| (nf - 0.1) * i as f64 / 400.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&l| hls_sharp(dim(n), l).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1] > w[0] - 1e-9, "n = {n}: {} then {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn general_hls_dominates_sharp_on_diagonal() {
        for (n, lambda) in [(2u32, 1.0), (2, 1.6), (3, 2.0)] {
            let nf = n as f64;
            let s = 2.0 * nf / (2.0 * nf - lambda);
            assert!(hls_general(dim(n), s, lambda).unwrap() >= hls_sharp(dim(n), lambda).unwrap());
        }
    }

    #[test]
    fn poincare_defaults() {
        assert!(rel(poincare_default(2f64.sqrt(), true, None).unwrap(), 0.450158158078553) < 1e-12);
        assert!(rel(poincare_default(2.0, true, None).unwrap(), 2.0 / PI) < 1e-15);
        assert_eq!(poincare_default(3.0, false, Some(1.7)).unwrap(), 1.7);
        assert!(matches!(poincare_default(3.0, false, None), Err(Error::Configuration(_))));
    }

    #[test]
    fn exponent_pair() {
        let p = SobolevExponentPair::new(dim(3), 2.0).unwrap();
        assert_eq!(p.q_star, 6.0);
        assert_eq!(p.q_lower, 4.0);
        assert!(SobolevExponentPair::new(dim(3), 3.0).is_err());
    }
}
