use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::surface::SourceKind;

/// Pass thresholds for every check, chosen per source kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Tolerances {
    /// Relative residual of integrated identities.
    pub integral: f64,
    /// Pointwise (L∞) residuals of identities that hold sample by sample.
    pub pointwise: f64,
    /// Relative residual of the integrated `L_r(ρ)` identity.
    pub lr_identity: f64,
    /// Relative L² mismatch of mesh operator values against a closed form.
    pub fem: f64,
    /// L∞ residual of `H + ρ/2 - λ` for the self-shrinker and λ gates.
    pub self_shrinker: f64,
    /// Relative radius and umbilicity deviation for the sphere verdict.
    pub sphere: f64,
    /// Relative standard deviation below which `H_r` counts as constant.
    pub constancy: f64,
    /// Largest `|K_ij - K_ji|` of a weak operator, relative to `max |K|`.
    pub symmetry: f64,
    /// Largest row sum of a weak operator, relative to `max |K|`.
    pub row_sum: f64,
}

impl Tolerances {
    pub fn analytic() -> Self {
        Self {
            integral: 1e-8,
            pointwise: 1e-8,
            lr_identity: 1e-6,
            fem: 5e-2,
            self_shrinker: 1e-8,
            sphere: 1e-8,
            constancy: 1e-6,
            symmetry: 1e-12,
            row_sum: 1e-10,
        }
    }

    pub fn mesh() -> Self {
        Self {
            integral: 5e-2,
            pointwise: 5e-2,
            lr_identity: 8e-2,
            fem: 5e-2,
            self_shrinker: 1e-2,
            sphere: 1e-2,
            constancy: 1e-2,
            symmetry: 1e-12,
            row_sum: 1e-10,
        }
    }

    pub fn for_kind(kind: SourceKind) -> Self {
        if kind.is_smooth() {
            Self::analytic()
        } else {
            Self::mesh()
        }
    }

    pub const KEYS: [&'static str; 9] = [
        "integral",
        "pointwise",
        "lr-identity",
        "fem",
        "self-shrinker",
        "sphere",
        "constancy",
        "symmetry",
        "row-sum",
    ];

    /// Overrides one tolerance by its kebab-case key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(domain(format!("tolerance '{key}' must be positive, got {value}")));
        }
        let slot = match key {
            "integral" => &mut self.integral,
            "pointwise" => &mut self.pointwise,
            "lr-identity" => &mut self.lr_identity,
            "fem" => &mut self.fem,
            "self-shrinker" => &mut self.self_shrinker,
            "sphere" => &mut self.sphere,
            "constancy" => &mut self.constancy,
            "symmetry" => &mut self.symmetry,
            "row-sum" => &mut self.row_sum,
            _ => {
                return Err(domain(format!(
                    "unknown tolerance '{key}' (expected one of {})",
                    Self::KEYS.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_by_key() {
        let mut t = Tolerances::analytic();
        t.set("lr-identity", 1e-4).unwrap();
        assert_eq!(t.lr_identity, 1e-4);
        assert!(t.set("bogus", 1.0).is_err());
        assert!(t.set("fem", -1.0).is_err());
        assert_eq!(Tolerances::for_kind(SourceKind::Mesh), Tolerances::mesh());
    }
}
