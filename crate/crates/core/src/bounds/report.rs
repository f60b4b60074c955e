use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub symbol: String,
    pub value: f64,
}

/// A certified bound together with every constant that went into it.
///
/// `expression` writes the bound in terms of the traced symbols; [`audit`]
/// re-evaluates it with the independent expression evaluator.
///
/// [`audit`]: BoundReport::audit
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula_id: String,
    pub bound: f64,
    pub trace: Vec<TraceEntry>,
    pub certified: bool,
    pub preconditions_checked: Vec<String>,
    pub notes: Vec<String>,
    pub expression: String,
}

/// Relative tolerance of the trace audit.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

impl BoundReport {
    pub fn value_of(&self, symbol: &str) -> Option<f64> {
        self.trace.iter().find(|e| e.symbol == symbol).map(|e| e.value)
    }

    /// Recombines the trace through `expression` and returns the result.
    pub fn recombine(&self) -> Result<f64> {
        let vars: HashMap<String, f64> = self.trace.iter().map(|e| (e.symbol.clone(), e.value)).collect();
        Expr::parse(&self.expression)?.eval_map(&vars)
    }

    /// Checks that the trace recombines to `bound` within [`AUDIT_TOLERANCE`].
    pub fn audit(&self) -> Result<()> {
        let again = self.recombine()?;
        let scale = self.bound.abs().max(again.abs());
        if (again - self.bound).abs() <= AUDIT_TOLERANCE * scale || again == self.bound {
            Ok(())
        } else {
            Err(Error::precondition(
                "BoundReport::audit",
                format!("{}: trace recombines to {again:e}, report says {:e}", self.formula_id, self.bound),
            ))
        }
    }
}

/// Accumulates trace entries while a bound is evaluated.
#[derive(Debug, Default)]
pub(crate) struct Trace {
    entries: Vec<TraceEntry>,
    checked: Vec<String>,
    notes: Vec<String>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    /// Records `symbol = value` and hands the value back.
    pub fn put(&mut self, symbol: &str, value: f64) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::Domain {
                op: "bound trace",
                requirement: format!("finite value for {symbol}"),
                got: value.to_string(),
            });
        }
        if let Some(e) = self.entries.iter_mut().find(|e| e.symbol == symbol) {
            debug_assert!(e.value == value, "{symbol} traced twice with different values");
            e.value = value;
        } else {
            self.entries.push(TraceEntry { symbol: symbol.to_string(), value });
        }
        Ok(value)
    }

    pub fn value(&self, symbol: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.symbol == symbol).map(|e| e.value)
    }

    pub fn checked(&mut self, what: impl Into<String>) {
        self.checked.push(what.into());
    }

    pub fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    pub fn finish(
        self,
        formula_id: impl Into<String>,
        expression: impl Into<String>,
        bound: f64,
        certified: bool,
    ) -> Result<BoundReport> {
        let formula_id = formula_id.into();
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(Error::Domain {
                op: "bound",
                requirement: format!("finite nonnegative value for {formula_id}"),
                got: bound.to_string(),
            });
        }
        let report = BoundReport {
            formula_id,
            bound,
            trace: self.entries,
            certified,
            preconditions_checked: self.checked,
            notes: self.notes,
            expression: expression.into(),
        };
        debug_assert!(report.audit().is_ok(), "{:?}", report.audit());
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_detects_tampering() {
        let mut t = Trace::new();
        t.put("A", 2.0).unwrap();
        t.put("B", 3.0).unwrap();
        let mut r = t.finish("demo", "A * B + 1", 7.0, true).unwrap();
        r.audit().unwrap();
        r.trace[0].value = 2.5;
        assert!(r.audit().is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut t = Trace::new();
        assert!(t.put("X", f64::INFINITY).is_err());
        assert!(Trace::new().finish("demo", "0", f64::NAN, true).is_err());
    }

    #[test]
    fn json_key_order_is_stable() {
        let mut t = Trace::new();
        t.put("A", 1.0).unwrap();
        let r = t.finish("demo", "A", 1.0, false).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let keys = ["formula_id", "bound", "trace", "certified", "preconditions_checked", "notes", "expression"];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
