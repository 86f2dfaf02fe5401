//! Run configuration document: a JSON file describing grid, structure
//! parameters, noise scales, seeds, the reaction term, initial and shift
//! data, and solver settings. Command line flags override file values.

use std::path::{Path, PathBuf};

use gpam_algebra::StructureParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::plateau_bump;
use crate::fields::{Fft2, Field, FieldError, Grid2D};
use crate::formats::{read_field, FormatError};
use crate::models::{renorm_constant_grid, ModelError};
use crate::solver::Nonlinearity;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Constant specification: the literal string "auto" resolves to the
/// grid expectation of the kernel-noise product at the given scale.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CSpec {
    Value(f64),
    Named(String),
}

impl Default for CSpec {
    fn default() -> CSpec {
        CSpec::Named("auto".into())
    }
}

/// Initial or shift data: a constant level, a smooth plateau bump, or a
/// field file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: f64,
    },
    Bump {
        #[serde(default)]
        center: Option<[usize; 2]>,
        inner: f64,
        outer: f64,
        #[serde(default = "default_height")]
        height: f64,
    },
    File {
        path: PathBuf,
    },
}

fn default_height() -> f64 {
    1.0
}

fn default_kappa() -> f64 {
    0.05
}

fn default_gamma() -> f64 {
    1.1
}

fn default_eta() -> f64 {
    0.5
}

fn default_g() -> String {
    "sin".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid_n: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_g")]
    pub g: String,
    #[serde(default)]
    pub u0: Option<FieldSpec>,
    #[serde(default)]
    pub h: Option<FieldSpec>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub c: CSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            grid_n: 256,
            kappa: default_kappa(),
            gamma: default_gamma(),
            eta: default_eta(),
            epsilon: None,
            eps_list: None,
            seed: None,
            seeds: None,
            g: default_g(),
            u0: None,
            h: None,
            dt: None,
            t_end: None,
            c: CSpec::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.grid_n.is_power_of_two() || self.grid_n < 2 {
            return Err(ConfigError::Invalid(format!(
                "grid_n must be a power of two >= 2, got {}",
                self.grid_n
            )));
        }
        self.structure_params()?;
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(ConfigError::Invalid(format!("epsilon must be positive, got {eps}")));
            }
        }
        if let Some(list) = &self.eps_list {
            if list.is_empty() || list.iter().any(|e| !(*e > 0.0)) {
                return Err(ConfigError::Invalid("eps_list must hold positive scales".into()));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(ConfigError::Invalid(format!("dt must be positive, got {dt}")));
            }
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return Err(ConfigError::Invalid(format!("t_end must be positive, got {t}")));
            }
        }
        if let CSpec::Named(name) = &self.c {
            if name != "auto" {
                return Err(ConfigError::Invalid(format!(
                    "c must be a number or \"auto\", got \"{name}\""
                )));
            }
        }
        self.nonlinearity()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D, ConfigError> {
        Ok(Grid2D::new(self.grid_n)?)
    }

    pub fn structure_params(&self) -> Result<StructureParams, ConfigError> {
        StructureParams::new(self.kappa, self.gamma, self.eta)
            .map_err(|e| ConfigError::Invalid(format!("structure parameters: {e}")))
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, ConfigError> {
        self.g
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("unknown reaction term \"{}\"", self.g)))
    }

    /// Resolves the renormalization constant at scale `eps`.
    pub fn resolve_c(&self, fft: &Fft2, eps: f64) -> Result<f64, ConfigError> {
        match &self.c {
            CSpec::Value(v) => Ok(*v),
            CSpec::Named(_) => Ok(renorm_constant_grid(fft, eps)?),
        }
    }

    /// Materializes a field specification on the configured grid.
    pub fn build_field(&self, spec: &FieldSpec) -> Result<Field, ConfigError> {
        let grid = self.grid()?;
        match spec {
            FieldSpec::Constant { value } => Ok(Field::constant(grid, *value)),
            FieldSpec::Bump {
                center,
                inner,
                outer,
                height,
            } => {
                if !(*inner > 0.0 && outer > inner) {
                    return Err(ConfigError::Invalid(
                        "bump needs 0 < inner < outer".into(),
                    ));
                }
                let c = center
                    .map(|c| (c[0], c[1]))
                    .unwrap_or((self.grid_n / 2, self.grid_n / 2));
                if c.0 >= self.grid_n || c.1 >= self.grid_n {
                    return Err(ConfigError::Invalid(format!(
                        "bump center ({}, {}) outside the {} grid",
                        c.0, c.1, self.grid_n
                    )));
                }
                let mut b = plateau_bump(grid, c, *inner, *outer);
                b.scale(*height);
                Ok(b)
            }
            FieldSpec::File { path } => {
                let f = read_field(path)?;
                if f.n() != self.grid_n {
                    return Err(ConfigError::Invalid(format!(
                        "field file {} is on a {} grid, config wants {}",
                        path.display(),
                        f.n(),
                        self.grid_n
                    )));
                }
                Ok(f)
            }
        }
    }

    /// Echo of the effective settings for output manifests.
    pub fn manifest_params(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("grid_n".into(), self.grid_n.to_string()),
            ("kappa".into(), self.kappa.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("eta".into(), self.eta.to_string()),
            ("g".into(), self.g.clone()),
        ];
        if let Some(eps) = self.epsilon {
            out.push(("epsilon".into(), eps.to_string()));
        }
        if let Some(seed) = self.seed {
            out.push(("seed".into(), seed.to_string()));
        }
        if let Some(dt) = self.dt {
            out.push(("dt".into(), dt.to_string()));
        }
        if let Some(t) = self.t_end {
            out.push(("t_end".into(), t.to_string()));
        }
        match &self.c {
            CSpec::Value(v) => out.push(("c".into(), v.to_string())),
            CSpec::Named(n) => out.push(("c".into(), n.clone())),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_document() {
        let text = r#"{
            "grid_n": 128,
            "epsilon": 0.0625,
            "seed": 7,
            "g": "sin",
            "u0": {"kind": "constant", "value": 0.5},
            "h": {"kind": "bump", "inner": 0.3, "outer": 0.8},
            "dt": 0.001,
            "t_end": 0.5,
            "c": "auto",
            "output_dir": "/tmp/run"
        }"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid_n, 128);
        assert_eq!(cfg.kappa, 0.05);
        assert_eq!(cfg.c, CSpec::Named("auto".into()));
        let u0 = cfg.build_field(cfg.u0.as_ref().unwrap()).unwrap();
        assert_eq!(u0.get(3, 5), 0.5);
        let h = cfg.build_field(cfg.h.as_ref().unwrap()).unwrap();
        assert_eq!(h.get(64, 64), 1.0);
    }

    #[test]
    fn rejects_bad_documents() {
        let bad_n: RunConfig = serde_json::from_str(r#"{"grid_n": 100}"#).unwrap();
        assert!(bad_n.validate().is_err());
        let bad_c: RunConfig =
            serde_json::from_str(r#"{"grid_n": 64, "c": "wild"}"#).unwrap();
        assert!(bad_c.validate().is_err());
        let bad_g: RunConfig =
            serde_json::from_str(r#"{"grid_n": 64, "g": "tanh"}"#).unwrap();
        assert!(bad_g.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid_n": 64, "bogus": 1}"#).is_err());
    }

    #[test]
    fn numeric_constant_bypasses_resolution() {
        let cfg: RunConfig = serde_json::from_str(r#"{"grid_n": 32, "c": 1.5}"#).unwrap();
        cfg.validate().unwrap();
        let fft = Fft2::new(cfg.grid().unwrap());
        assert_eq!(cfg.resolve_c(&fft, 0.5).unwrap(), 1.5);
    }
}
