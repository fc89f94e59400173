use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every truncated test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative eigenvalue slack for PSD tests.
    pub psd_tol: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tol: f64,
    /// Absolute distance below which recovered atoms are merged.
    pub atom_merge_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            psd_tol: 1e-9,
            rank_tol: 1e-8,
            atom_merge_tol: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("psd_tol", self.psd_tol),
            ("rank_tol", self.rank_tol),
            ("atom_merge_tol", self.atom_merge_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ToleranceConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.psd_tol, 1e-9);
        assert_eq!(cfg.rank_tol, 1e-8);
        assert_eq!(cfg.atom_merge_tol, 1e-6);
    }

    #[test]
    fn rejects_non_positive() {
        let cfg = ToleranceConfig {
            psd_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ToleranceConfig {
            rank_tol: f64::NAN,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
