use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack granted to certified checks for the solver tolerance.
pub const CERTIFIED_SLACK: f64 = 1e-9;

/// Discretization slack of the Caccioppoli check (`lhs ≤ 1.1 rhs`).
pub const CACCIOPPOLI_SLACK: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// A proven inequality that the discrete solution inherits.
    Certified,
    /// A continuous-space inequality checked on extrapolated or sampled values.
    Asymptotic,
    /// An expected numerical behavior.
    Empirical,
    /// Recorded only; never fails a run.
    Report,
}

/// How `value` is compared with `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "relation")]
pub enum Relation {
    /// `value ≤ bound`; ratio `bound/value`.
    AtMost,
    /// `value < bound`; ratio `bound/value`.
    Less,
    /// `value ≥ bound`; ratio `value/bound`.
    AtLeast,
    /// `|value - bound| ≤ tol`; ratio `value/bound`.
    Near { tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub kind: CheckKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_id: Option<String>,
    pub value: f64,
    pub bound: f64,
    #[serde(flatten)]
    pub relation: Relation,
    /// `None` when the ratio divides by zero.
    pub ratio: Option<f64>,
    /// The ratio a passing check must reach.
    pub required_ratio: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, kind: CheckKind, relation: Relation, value: f64, bound: f64, required_ratio: f64) -> Self {
        let ratio = match relation {
            Relation::AtMost | Relation::Less => (value != 0.0).then(|| bound / value),
            Relation::AtLeast | Relation::Near { .. } => (bound != 0.0).then(|| value / bound),
        };
        let pass = match relation {
            Relation::AtMost => ratio.map_or(bound >= 0.0, |r| r >= required_ratio),
            Relation::Less => value < bound,
            Relation::AtLeast => ratio.map_or(value >= 0.0, |r| r >= required_ratio),
            Relation::Near { tol } => (value - bound).abs() <= tol,
        };
        CheckRecord {
            id: id.into(),
            kind,
            formula_id: None,
            value,
            bound,
            relation,
            ratio,
            required_ratio,
            pass: pass && value.is_finite() && bound.is_finite(),
            detail: None,
        }
    }

    /// `value ≤ bound` for a certified bound, with [`CERTIFIED_SLACK`].
    pub fn certified(id: impl Into<String>, formula_id: &str, value: f64, bound: f64) -> Self {
        let mut r = CheckRecord::new(id, CheckKind::Certified, Relation::AtMost, value, bound, 1.0 - CERTIFIED_SLACK);
        r.formula_id = Some(formula_id.to_string());
        r
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn with_formula(mut self, formula_id: &str) -> Self {
        self.formula_id = Some(formula_id.to_string());
        self
    }

    /// Counts towards the verdict of a run.
    pub fn gating(&self) -> bool {
        self.kind != CheckKind::Report
    }
}

/// Outcome of one scenario.
///
/// Wall-clock times are kept in `runtimes` for display only; they are not
/// serialized, so reports stay byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub scenario: String,
    /// Finest refinement level (divisions or rings; 0 for file meshes).
    pub level: usize,
    pub n_vertices: usize,
    pub h_max: f64,
    pub checks: Vec<CheckRecord>,
    #[serde(skip)]
    pub runtimes: Vec<(String, f64)>,
}

impl MarginReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.gating() && !c.pass).count()
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Reports of a suite, ordered by scenario name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scenarios: Vec<MarginReport>,
    pub total_checks: usize,
    pub failed_checks: usize,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(mut scenarios: Vec<MarginReport>) -> Self {
        scenarios.sort_by(|a, b| a.scenario.cmp(&b.scenario));
        let failed_checks = scenarios.iter().map(MarginReport::failures).sum();
        SuiteReport {
            total_checks: scenarios.iter().map(|s| s.checks.len()).sum(),
            failed_checks,
            pass: failed_checks == 0,
            scenarios,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Configuration(format!("cannot serialize report: {e}")))
    }

    /// Aligned columns, one row per check.
    pub fn to_text(&self) -> String {
        let header = ["scenario", "check", "kind", "value", "bound", "ratio", "need", "result"];
        let mut rows: Vec<[String; 8]> = Vec::new();
        for s in &self.scenarios {
            for c in &s.checks {
                let kind = match c.kind {
                    CheckKind::Certified => "certified",
                    CheckKind::Asymptotic => "asymptotic",
                    CheckKind::Empirical => "empirical",
                    CheckKind::Report => "report",
                };
                let need = match c.relation {
                    Relation::Near { tol } => format!("±{tol}"),
                    Relation::Less => ">1".into(),
                    _ => format!("{:.6}", c.required_ratio),
                };
                let result = match (c.kind, c.pass) {
                    (CheckKind::Report, _) => "info",
                    (_, true) => "PASS",
                    (_, false) => "FAIL",
                };
                rows.push([
                    s.scenario.clone(),
                    c.id.clone(),
                    kind.into(),
                    format!("{:.6e}", c.value),
                    format!("{:.6e}", c.bound),
                    c.ratio.map_or("inf".into(), |r| format!("{r:.6e}")),
                    need,
                    result.into(),
                ]);
            }
        }
        let mut widths = header.map(|h| h.chars().count());
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let parts: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header.map(String::from));
        for r in &rows {
            line(&mut out, r);
        }
        let _ = writeln!(
            out,
            "{} scenario(s), {} check(s), {} failed: {}",
            self.scenarios.len(),
            self.total_checks,
            self.failed_checks,
            if self.pass { "PASS" } else { "FAIL" }
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rules() {
        assert!(CheckRecord::certified("a", "x", 1.0, 1.0).pass);
        assert!(CheckRecord::certified("a", "x", 1.0 + 5e-10, 1.0).pass);
        assert!(!CheckRecord::certified("a", "x", 1.0 + 1e-8, 1.0).pass);
        let zero = CheckRecord::certified("a", "x", 0.0, 0.0);
        assert!(zero.pass && zero.ratio.is_none());
        assert!(!CheckRecord::new("l", CheckKind::Empirical, Relation::Less, 1.0, 1.0, 1.0).pass);
        assert!(CheckRecord::new("b", CheckKind::Empirical, Relation::AtLeast, 1.3, 1.0, 1.0).pass);
        assert!(CheckRecord::new("r", CheckKind::Empirical, Relation::Near { tol: 0.2 }, 1.85, 2.0, 0.0).pass);
        assert!(!CheckRecord::certified("n", "x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn suite_is_sorted_and_renders() {
        let mk = |name: &str, pass: bool| MarginReport {
            scenario: name.into(),
            level: 4,
            n_vertices: 25,
            h_max: 0.35,
            checks: vec![CheckRecord::certified("energy", "h1", if pass { 1.0 } else { 3.0 }, 2.0)],
            runtimes: vec![("energy".into(), 0.1)],
        };
        let s = SuiteReport::new(vec![mk("b", true), mk("a", false)]);
        assert_eq!(s.scenarios[0].scenario, "a");
        assert_eq!(s.failed_checks, 1);
        let text = s.to_text();
        assert!(text.lines().nth(1).unwrap().starts_with("a "));
        assert!(text.contains("FAIL"));
        let json = s.to_json().unwrap();
        assert!(!json.contains("runtimes"));
        let back: SuiteReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.scenarios[0].checks, s.scenarios[0].checks);
    }
}
