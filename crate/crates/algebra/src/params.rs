//! Global parameters of the truncated structure.

use core::fmt;

/// Comparison slack for homogeneity arithmetic.
pub const HOM_TOL: f64 = 1e-12;

/// Parameters fixing the homogeneity grading and the truncation cutoffs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureParams {
    /// Regularity deficit of the noise; the noise symbols sit at `-1 - kappa`.
    pub kappa: f64,
    /// Truncation level for the function-like sector.
    pub gamma: f64,
    /// Weight exponent for initial data, consumed by the solver layer.
    pub eta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamError {
    KappaRange,
    GammaRange,
    EtaRange,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::KappaRange => write!(f, "kappa must lie in (0, 1/3)"),
            ParamError::GammaRange => write!(f, "gamma must lie in (1 + kappa, 4/3)"),
            ParamError::EtaRange => write!(f, "eta must lie in [0, 1 - kappa)"),
        }
    }
}

impl StructureParams {
    pub fn new(kappa: f64, gamma: f64, eta: f64) -> Result<Self, ParamError> {
        if !(kappa > 0.0 && kappa < 1.0 / 3.0) {
            return Err(ParamError::KappaRange);
        }
        if !(gamma > 1.0 + kappa && gamma < 4.0 / 3.0) {
            return Err(ParamError::GammaRange);
        }
        if !(eta >= 0.0 && eta < 1.0 - kappa) {
            return Err(ParamError::EtaRange);
        }
        Ok(Self { kappa, gamma, eta })
    }

    /// Homogeneity of the noise symbols.
    pub fn alpha_min(&self) -> f64 {
        -1.0 - self.kappa
    }

    /// Upper homogeneity cutoff for the function-like sector.
    pub fn cutoff_u(&self) -> f64 {
        self.gamma
    }

    /// Upper homogeneity cutoff for the noise sector.
    pub fn cutoff_w(&self) -> f64 {
        self.gamma + self.alpha_min()
    }
}

impl Default for StructureParams {
    fn default() -> Self {
        Self::new(0.05, 1.1, 0.0).expect("default parameters are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = StructureParams::default();
        assert_eq!(p.kappa, 0.05);
        assert_eq!(p.gamma, 1.1);
        assert_eq!(p.eta, 0.0);
        assert!((p.alpha_min() + 1.05).abs() < HOM_TOL);
        assert!((p.cutoff_w() - 0.05).abs() < HOM_TOL);
    }

    #[test]
    fn validation() {
        assert!(StructureParams::new(0.0, 1.1, 0.0).is_err());
        assert!(StructureParams::new(0.4, 1.1, 0.0).is_err());
        assert!(StructureParams::new(0.05, 1.0, 0.0).is_err());
        assert!(StructureParams::new(0.05, 1.4, 0.0).is_err());
        assert!(StructureParams::new(0.05, 1.1, -0.1).is_err());
        assert!(StructureParams::new(0.05, 1.1, 0.96).is_err());
        assert!(StructureParams::new(0.3, 1.31, 0.0).is_ok());
    }
}
