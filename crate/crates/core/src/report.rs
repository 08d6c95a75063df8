use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Normalizers below this count as zero: the check falls back to the
/// absolute residual.
pub const NORMALIZER_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    Vector(Vec<f64>),
}

impl From<bool> for MetaValue {
    fn from(v: bool) -> Self {
        MetaValue::Bool(v)
    }
}

impl From<usize> for MetaValue {
    fn from(v: usize) -> Self {
        MetaValue::Int(v as i64)
    }
}

impl From<i64> for MetaValue {
    fn from(v: i64) -> Self {
        MetaValue::Int(v)
    }
}

impl From<f64> for MetaValue {
    fn from(v: f64) -> Self {
        MetaValue::Real(v)
    }
}

impl From<&str> for MetaValue {
    fn from(v: &str) -> Self {
        MetaValue::Text(v.to_string())
    }
}

impl From<String> for MetaValue {
    fn from(v: String) -> Self {
        MetaValue::Text(v)
    }
}

impl From<Vec<f64>> for MetaValue {
    fn from(v: Vec<f64>) -> Self {
        MetaValue::Vector(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A precondition (e.g. the self-shrinker gate) does not hold, so the
    /// residual carries no pass/fail meaning.
    HypothesisViolated,
}

/// Result of one identity or classification check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub residual_abs: f64,
    pub residual_rel: f64,
    /// Largest pointwise residual, for checks with a pointwise integrand.
    pub residual_linf: Option<f64>,
    /// Denominator of `residual_rel`.
    pub normalizer: f64,
    pub samples: usize,
    pub flagged_samples: usize,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub passed: Option<bool>,
    pub metadata: BTreeMap<String, MetaValue>,
}

impl CheckReport {
    /// Builds a report and decides pass/fail: the relative residual is
    /// compared with `tolerance`, or the absolute one when the normalizer
    /// is below [`NORMALIZER_FLOOR`]. `0/0` counts as zero.
    pub fn evaluate(
        name: impl Into<String>,
        residual_abs: f64,
        normalizer: f64,
        tolerance: f64,
        samples: usize,
        flagged_samples: usize,
    ) -> Self {
        let residual_rel = relative(residual_abs, normalizer);
        let ok = if normalizer < NORMALIZER_FLOOR {
            residual_abs <= tolerance
        } else {
            residual_rel <= tolerance
        };
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self {
            name: name.into(),
            residual_abs,
            residual_rel,
            residual_linf: None,
            normalizer,
            samples,
            flagged_samples,
            tolerance,
            status,
            passed: Some(ok),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_linf(mut self, linf: f64) -> Self {
        self.residual_linf = Some(linf);
        self
    }

    pub fn with(mut self, key: &str, value: impl Into<MetaValue>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Marks the precondition as failed; the residual is kept for
    /// inspection but no verdict is given.
    pub fn hypothesis_violated(mut self, reason: impl Into<String>) -> Self {
        self.status = CheckStatus::HypothesisViolated;
        self.passed = None;
        self.metadata.insert("hypothesis".into(), MetaValue::Text(reason.into()));
        self
    }

    pub fn is_pass(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

pub(crate) fn relative(abs: f64, normalizer: f64) -> f64 {
    if abs == 0.0 {
        0.0
    } else if normalizer == 0.0 {
        // nonzero residual over a vanishing integrand: report the absolute
        // value rather than infinity
        abs
    } else {
        abs / normalizer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        let r = CheckReport::evaluate("x", 0.0, 0.0, 1e-8, 10, 0);
        assert_eq!(r.residual_rel, 0.0);
        assert!(r.is_pass());
    }

    #[test]
    fn tiny_normalizer_uses_absolute_residual() {
        let r = CheckReport::evaluate("x", 1e-9, 1e-20, 1e-8, 10, 0);
        assert!(r.is_pass());
        let r = CheckReport::evaluate("x", 1e-3, 1.0, 1e-8, 10, 0);
        assert!(r.is_fail());
        assert_eq!(r.passed, Some(false));
        let r = r.hypothesis_violated("gate");
        assert_eq!(r.passed, None);
    }
}
