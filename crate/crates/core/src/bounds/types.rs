use serde::{Deserialize, Serialize};

use crate::constants::Dimension;
use crate::error::{Error, Result};

/// Measurable descriptors of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGeometry {
    pub n: Dimension,
    /// `|Ω|`
    pub volume: f64,
    /// `δ(Ω)`
    pub diameter: f64,
    /// `(n-1)`-measure of the Dirichlet part `Γ_D`.
    pub gamma_d_measure: f64,
    /// `(n-1)`-measure of the Neumann part `Γ`.
    pub gamma_measure: f64,
    /// Poincaré constant `C_*`.
    pub poincare: f64,
    #[serde(default)]
    pub convex: bool,
}

impl DomainGeometry {
    /// The unit square `[0,1]²` with the given Dirichlet length (out of 4).
    pub fn unit_square(dirichlet_length: f64) -> DomainGeometry {
        DomainGeometry {
            n: Dimension::new(2).expect("2 >= 2"),
            volume: 1.0,
            diameter: 2f64.sqrt(),
            gamma_d_measure: dirichlet_length,
            gamma_measure: 4.0 - dirichlet_length,
            poincare: 2f64.sqrt() / std::f64::consts::PI,
            convex: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Configuration(format!("geometry: {what} (got {v})")));
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return bad("volume must be positive", self.volume);
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return bad("diameter must be positive", self.diameter);
        }
        if !(self.gamma_d_measure >= 0.0) {
            return bad("Dirichlet measure must be nonnegative", self.gamma_d_measure);
        }
        if !(self.gamma_measure >= 0.0) {
            return bad("Neumann measure must be nonnegative", self.gamma_measure);
        }
        if !(self.gamma_d_measure + self.gamma_measure > 0.0) {
            return bad("boundary measure must be positive", 0.0);
        }
        if !(self.poincare > 0.0) {
            return bad("Poincaré constant must be positive", self.poincare);
        }
        Ok(())
    }

    pub fn is_mixed(&self) -> bool {
        self.gamma_d_measure > 0.0
    }

    /// `ϰ = 2` with a Dirichlet part, `ϰ = 4` without.
    pub fn kappa(&self) -> f64 {
        if self.is_mixed() {
            2.0
        } else {
            4.0
        }
    }
}

/// Ellipticity bounds `0 < a_# ≤ a ≤ a^#` and the optional Dini integral `C_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    pub a_lower: f64,
    pub a_upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dini_integral: Option<f64>,
}

impl CoefficientBounds {
    pub fn new(a_lower: f64, a_upper: f64) -> Result<Self> {
        let c = CoefficientBounds { a_lower, a_upper, dini_integral: None };
        c.validate()?;
        Ok(c)
    }

    pub fn constant(a: f64) -> Result<Self> {
        Self::new(a, a)
    }

    pub fn with_dini(mut self, c_a: f64) -> Result<Self> {
        self.dini_integral = Some(c_a);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_lower > 0.0 && self.a_lower <= self.a_upper && self.a_upper.is_finite()) {
            return Err(Error::Configuration(format!(
                "coefficient bounds need 0 < a_lower <= a_upper (got {}, {})",
                self.a_lower, self.a_upper
            )));
        }
        if let Some(c) = self.dini_integral {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Configuration(format!("Dini integral must be positive (got {c})")));
            }
        }
        Ok(())
    }

    /// `a^#/a_#`
    pub fn contrast(&self) -> f64 {
        self.a_upper / self.a_lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Scalar source `f`.
    F,
    /// Vector source `**f**`.
    Fvec,
    /// Neumann datum `h`.
    H,
    /// Dirichlet datum `g`.
    G,
    /// `‖∇g̃‖₂` of an extension of `g`.
    GradGExt,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::F => "f",
            Quantity::Fvec => "fvec",
            Quantity::H => "h",
            Quantity::G => "g",
            Quantity::GradGExt => "grad_g_ext",
        }
    }
}

/// One data norm `‖quantity‖_exponent = value`; `exponent` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub quantity: Quantity,
    #[serde(with = "exponent_serde")]
    pub exponent: f64,
    pub value: f64,
}

mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Inf") => Ok(f64::INFINITY),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Exponents closer than this (relatively) count as the same exponent.
const EXPONENT_MATCH: f64 = 1e-9;

/// The data norms fed into a bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DataNorms {
    pub entries: Vec<NormEntry>,
}

impl DataNorms {
    pub fn new() -> Self {
        DataNorms::default()
    }

    pub fn with(mut self, quantity: Quantity, exponent: f64, value: f64) -> Self {
        self.entries.push(NormEntry { quantity, exponent, value });
        self
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(e.value >= 0.0 && e.value.is_finite()) {
                return Err(Error::Configuration(format!(
                    "norm of {} must be finite and nonnegative (got {})",
                    e.quantity.name(),
                    e.value
                )));
            }
            if !(e.exponent >= 1.0) {
                return Err(Error::Configuration(format!("exponent of {} must be >= 1 (got {})", e.quantity.name(), e.exponent)));
            }
        }
        for (i, a) in self.entries.iter().enumerate() {
            if self.entries[..i].iter().any(|b| b.quantity == a.quantity) {
                return Err(Error::Configuration(format!("norm of {} given twice", a.quantity.name())));
            }
        }
        Ok(())
    }

    pub fn entry(&self, quantity: Quantity) -> Option<NormEntry> {
        self.entries.iter().find(|e| e.quantity == quantity).copied()
    }

    /// Multiplies every norm value by `factor`.
    pub fn scaled(&self, factor: f64) -> DataNorms {
        DataNorms { entries: self.entries.iter().map(|e| NormEntry { value: e.value * factor, ..*e }).collect() }
    }

    /// The norm of `quantity` in `L^exponent`, or zero if absent.
    ///
    /// A norm supplied at a different exponent is a precondition failure:
    /// bounds never convert between exponents behind the caller's back.
    pub(crate) fn at(&self, op: &'static str, quantity: Quantity, exponent: f64) -> Result<Option<f64>> {
        match self.entry(quantity) {
            None => Ok(None),
            Some(e) if exponents_match(e.exponent, exponent) => Ok(Some(e.value)),
            Some(e) => Err(Error::precondition(
                op,
                format!("requires the norm of {} in L^{} (got L^{})", quantity.name(), fmt_exp(exponent), fmt_exp(e.exponent)),
            )),
        }
    }
}

pub(crate) fn exponents_match(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= EXPONENT_MATCH * a.abs().max(b.abs())
}

pub(crate) fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}
