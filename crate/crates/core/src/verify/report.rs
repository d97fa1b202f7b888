use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{DomainSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The check does not apply at these inputs (e.g. a 0/0 ratio).
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Degenerate => "degenerate",
        })
    }
}

/// Inputs a report was produced from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    /// Check-specific scalars (separation scale, Möbius parameter, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl Params {
    pub fn new(p: f64) -> Self {
        Params {
            p: Some(p),
            ..Params::default()
        }
    }

    pub fn points(mut self, pts: impl IntoIterator<Item = Point>) -> Self {
        self.points.extend(pts);
        self
    }

    pub fn domain(mut self, d: &DomainSpec) -> Self {
        self.domain = Some(d.clone());
        self
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

/// One checked inequality `lhs ≤ rhs`, with `margin = rhs − lhs`.
/// Equalities are reported as `|difference| ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: Params,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Set when the values come from a re-run at doubled resolution.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub refined: bool,
}

impl VerificationReport {
    /// Pass iff `rhs − lhs ≥ −tolerance`.
    pub fn new(check: &str, params: Params, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        let verdict = if margin >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        VerificationReport {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            margin,
            tolerance,
            verdict,
            refined: false,
        }
    }

    /// Strict `lhs < rhs`: pass iff the margin is positive.
    pub fn strict(check: &str, params: Params, lhs: f64, rhs: f64) -> Self {
        let mut r = Self::new(check, params, lhs, rhs, 0.0);
        if !(r.margin > 0.0) {
            r.verdict = Verdict::Fail;
        }
        r
    }

    /// `|value − target| ≤ tolerance`, recorded as `lhs = |value − target|`, `rhs = 0`.
    pub fn close(check: &str, params: Params, value: f64, target: f64, tolerance: f64) -> Self {
        let p = params.with("value", value).with("target", target);
        Self::new(check, p, (value - target).abs(), 0.0, tolerance)
    }

    pub fn degenerate(check: &str, params: Params) -> Self {
        VerificationReport {
            check: check.to_string(),
            params,
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            tolerance: 0.0,
            verdict: Verdict::Degenerate,
            refined: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Counts per verdict plus the worst relative margin, per check name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub rows: BTreeMap<String, SummaryRow>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryRow {
    pub pass: usize,
    pub fail: usize,
    pub degenerate: usize,
    pub worst_margin: f64,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let mut rows: BTreeMap<String, SummaryRow> = BTreeMap::new();
        for r in reports {
            let row = rows.entry(r.check.clone()).or_insert(SummaryRow {
                worst_margin: f64::INFINITY,
                ..SummaryRow::default()
            });
            match r.verdict {
                Verdict::Pass => row.pass += 1,
                Verdict::Fail => row.fail += 1,
                Verdict::Degenerate => row.degenerate += 1,
            }
            if r.verdict != Verdict::Degenerate {
                row.worst_margin = row.worst_margin.min(r.margin);
            }
        }
        Summary { rows }
    }

    pub fn all_passed(&self) -> bool {
        self.rows.values().all(|r| r.fail == 0)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<32} {:>7} {:>7} {:>10} {:>24}", "check", "pass", "fail", "degenerate", "worst margin")?;
        for (name, r) in &self.rows {
            let worst = if r.worst_margin.is_finite() {
                format!("{:.6e}", r.worst_margin)
            } else {
                "-".to_string()
            };
            writeln!(f, "{name:<32} {:>7} {:>7} {:>10} {worst:>24}", r.pass, r.fail, r.degenerate)?;
        }
        let verdict = if self.all_passed() { "PASS" } else { "FAIL" };
        write!(f, "overall: {verdict}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_margin() {
        let r = VerificationReport::new("x", Params::new(2.0), 1.0, 1.0 - 1e-9, 1e-8);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = VerificationReport::new("x", Params::new(2.0), 1.0, 0.9, 1e-8);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = VerificationReport::new("x", Params::new(2.0), f64::NAN, 0.9, 1e-8);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(VerificationReport::strict("x", Params::default(), 1.0, 1.0).verdict, Verdict::Fail);
        assert_eq!(VerificationReport::strict("x", Params::default(), 0.5, 1.0).verdict, Verdict::Pass);
    }

    #[test]
    fn json_round_trip() {
        let r = VerificationReport::close(
            "y",
            Params::new(3.0).points([Point::scalar(num_complex::Complex64::new(0.1, 0.2))]),
            1.0,
            1.0,
            1e-9,
        );
        let s = r.to_json_line();
        assert!(!s.contains("refined"));
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn summary_counts() {
        let rs = vec![
            VerificationReport::new("a", Params::default(), 0.0, 1.0, 0.0),
            VerificationReport::new("a", Params::default(), 2.0, 1.0, 0.0),
            VerificationReport::degenerate("b", Params::default()),
        ];
        let s = Summary::of(&rs);
        assert!(!s.all_passed());
        assert_eq!(s.rows["a"].fail, 1);
        assert_eq!(s.rows["a"].worst_margin, -1.0);
        assert!(s.to_string().ends_with("overall: FAIL"));
    }
}
