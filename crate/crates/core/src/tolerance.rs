use serde::{Deserialize, Serialize};

use crate::error::{RelError, Result};

/// Tolerances controlling rank decisions and property checks.
///
/// `rank` multiplies `d * sigma_max` to give the singular-value cutoff,
/// `orth` bounds orthonormality defects, `eq` bounds projector distances for
/// subspace equality, `num` bounds generic residuals and `var` bounds the
/// nested variational solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rank: f64,
    pub orth: f64,
    pub eq: f64,
    pub num: f64,
    pub var: f64,
}

pub const DEFAULT_RANK: f64 = 1e-10;
pub const DEFAULT_ORTH: f64 = 1e-10;
pub const DEFAULT_EQ: f64 = 1e-9;
pub const DEFAULT_NUM: f64 = 1e-9;
pub const DEFAULT_VAR: f64 = 1e-6;

/// Singular values within this factor of the rank cutoff make a rank
/// decision ambiguous.
pub const RANK_AMBIGUITY_FACTOR: f64 = 1e3;

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank: DEFAULT_RANK,
            orth: DEFAULT_ORTH,
            eq: DEFAULT_EQ,
            num: DEFAULT_NUM,
            var: DEFAULT_VAR,
        }
    }
}

impl ToleranceConfig {
    /// Sets `eq` to `tol` and scales every other tolerance by the same factor.
    pub fn scaled_to_eq(tol: f64) -> Result<Self> {
        let factor = tol / DEFAULT_EQ;
        let d = Self::default();
        let cfg = Self {
            rank: d.rank * factor,
            orth: d.orth * factor,
            eq: tol,
            num: d.num * factor,
            var: d.var * factor,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rank, self.orth, self.eq, self.num, self.var];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(RelError::Precondition(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.eq < self.orth {
            return Err(RelError::Precondition(
                "equality tolerance must not be smaller than the orthonormality tolerance".into(),
            ));
        }
        Ok(())
    }

    /// True when `distance` is below `eq` but close enough that the verdict
    /// should be treated as low-confidence.
    pub fn near_threshold(&self, distance: f64) -> bool {
        distance >= self.eq / 10.0 && distance <= self.eq
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ToleranceConfig::default().validate().unwrap();
    }

    #[test]
    fn scaling_keeps_ratios() {
        let cfg = ToleranceConfig::scaled_to_eq(1e-6).unwrap();
        assert!((cfg.var - 1e-3).abs() < 1e-15);
        assert!((cfg.rank - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn rejects_non_positive() {
        let cfg = ToleranceConfig {
            num: 0.0,
            ..ToleranceConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = ToleranceConfig::default();
        cfg.eq = cfg.orth / 2.0;
        assert!(cfg.validate().is_err());
        assert!(ToleranceConfig::scaled_to_eq(-1.0).is_err());
    }
}
