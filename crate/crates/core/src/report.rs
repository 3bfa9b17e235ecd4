//! Pass/fail records shared by every verifier.
//!
//! Each [`Check`] carries the residual it measured together with the tolerance it was
//! compared against, so serialized reports are self-describing.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Coordinates of a failing input, as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<[f64; 2]>>,
}

impl Check {
    /// Passes iff `residual <= tolerance` (NaN fails).
    pub fn within(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            pass: residual <= tolerance,
            worst_residual: residual,
            tolerance,
            note: None,
            witness: None,
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, note: impl Into<String>) -> Self {
        Check { name: name.into(), pass, worst_residual: 0.0, tolerance: 0.0, note: Some(note.into()), witness: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Attach a witness, kept only when the check failed.
    pub fn with_witness(mut self, witness: Option<Vec<[f64; 2]>>) -> Self {
        if !self.pass {
            self.witness = witness;
        }
        self
    }
}

/// One point of a reported sequence; `value_over_qn` is `|value| / q^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePoint {
    pub n: usize,
    pub value_re: f64,
    pub value_im: f64,
    pub value_over_qn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub name: String,
    pub points: Vec<SequencePoint>,
    pub max_over_qn: f64,
    pub bounded: bool,
}

impl Sequence {
    /// CSV with columns `n,value_re,value_im,value_over_qn`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value_re,value_im,value_over_qn\n");
        for p in &self.points {
            out.push_str(&format!("{},{:e},{:e},{:e}\n", p.n, p.value_re, p.value_im, p.value_over_qn));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub subject: String,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequences: Vec<Sequence>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report { subject: subject.into(), checks: Vec::new(), sequences: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Margin test for "O(q^n)" claims over a finite range.
///
/// The sequence counts as bounded when its overall maximum stays within `4x` the maximum over
/// the first quarter of the range (floored at 1, the scale of a normalized `q^n`).
pub fn bounded_by_prefix(values: &[f64]) -> bool {
    if values.is_empty() {
        return true;
    }
    let prefix_len = (values.len() / 4).max(1);
    let prefix_max = values[..prefix_len].iter().copied().fold(0.0_f64, f64::max);
    let overall = values.iter().copied().fold(0.0_f64, f64::max);
    overall.is_finite() && overall <= 4.0 * prefix_max.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn within_rejects_nan() {
        assert!(!Check::within("x", f64::NAN, 1.0).pass);
        assert!(Check::within("x", 1.0, 1.0).pass);
    }

    #[test]
    fn witness_kept_only_on_failure() {
        let ok = Check::within("ok", 0.0, 1.0).with_witness(Some(vec![[1.0, 0.0]]));
        assert!(ok.witness.is_none());
        let bad = Check::within("bad", 2.0, 1.0).with_witness(Some(vec![[1.0, 0.0]]));
        assert_eq!(bad.witness, Some(vec![[1.0, 0.0]]));
    }

    #[test]
    fn prefix_margin_separates_bounded_from_quadratic_growth() {
        let bounded: Vec<f64> = (0..=512).map(|n| 2.0 + (n as f64 * 0.7).sin()).collect();
        assert!(bounded_by_prefix(&bounded));
        let quadratic: Vec<f64> = (0..=512).map(|n| 1.0 + (n * n) as f64 * 1e-3).collect();
        assert!(!bounded_by_prefix(&quadratic));
        let exponential: Vec<f64> = (0..=64).map(|n| (0.07 * n as f64).exp()).collect();
        assert!(!bounded_by_prefix(&exponential));
    }
}
