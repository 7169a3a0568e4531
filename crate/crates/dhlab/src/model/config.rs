//! Structured text configuration: `key = value` entries grouped in
//! `[drift]`, `[diffusion]`, `[initial]` and `[grid]` sections.

use super::{DiffusionParams, DriftParams, State, ValidatedModel, ValidationError};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct DriftSection {
    pub a1: f64,
    pub b11: f64,
    pub a2: f64,
    pub b21: f64,
    pub b22: f64,
    pub m: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct DiffusionSection {
    pub sigma11: f64,
    pub sigma12: f64,
    pub sigma21: f64,
    pub sigma22: f64,
    pub rho11: f64,
    pub rho22: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct InitialSection {
    pub y1_0: f64,
    pub y2_0: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct GridSection {
    pub t_max: f64,
    pub dt: f64,
    pub seed: u64,
    pub replications: usize,
}

/// The four model sections of a run configuration.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ModelFileConfig {
    pub drift: DriftSection,
    pub diffusion: DiffusionSection,
    pub initial: InitialSection,
    pub grid: GridSection,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("grid must have t_max > 0 and dt > 0, got t_max = {t_max}, dt = {dt}")]
    BadGrid { t_max: f64, dt: f64 },
}

impl ModelFileConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn drift_params(&self) -> DriftParams {
        DriftParams {
            a1: self.drift.a1,
            b11: self.drift.b11,
            a2: self.drift.a2,
            b21: self.drift.b21,
            b22: self.drift.b22,
            m: self.drift.m,
            kappa1: self.drift.kappa1,
            kappa2: self.drift.kappa2,
            theta: self.drift.theta,
        }
    }

    pub fn diffusion_params(&self) -> DiffusionParams {
        DiffusionParams {
            sigma11: self.diffusion.sigma11,
            sigma12: self.diffusion.sigma12,
            sigma21: self.diffusion.sigma21,
            sigma22: self.diffusion.sigma22,
            rho11: self.diffusion.rho11,
            rho22: self.diffusion.rho22,
        }
    }

    pub fn initial_state(&self) -> State {
        State::new(self.initial.y1_0, self.initial.y2_0, self.initial.x0)
    }

    pub fn validate_model(&self) -> Result<ValidatedModel, ConfigError> {
        if self.initial.y1_0 < 0.0 || self.initial.y2_0 < 0.0 {
            return Err(ValidationError::NegativeInitialVariance {
                y1: self.initial.y1_0,
                y2: self.initial.y2_0,
            }
            .into());
        }
        if !(self.grid.t_max > 0.0) || !(self.grid.dt > 0.0) {
            return Err(ConfigError::BadGrid {
                t_max: self.grid.t_max,
                dt: self.grid.dt,
            });
        }
        Ok(super::validate(
            self.drift_params(),
            self.diffusion_params(),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
[drift]
a1 = 1.0
b11 = 1.0
a2 = 1.0
b21 = -0.5
b22 = 3.0
m = 1.0
kappa1 = 0.5
kappa2 = 0.5
theta = 2.0

[diffusion]
sigma11 = 0.1
sigma12 = 0.1
sigma21 = 0.1
sigma22 = 0.1
rho11 = 0.8
rho22 = 0.8

[initial]
y1_0 = 0.5
y2_0 = 0.5
x0 = 0.0

[grid]
t_max = 50.0
dt = 0.1
seed = 42
replications = 1000
"#;

    #[test]
    fn parses_all_sections() {
        let cfg = ModelFileConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.drift.b21, -0.5);
        assert_eq!(cfg.grid.seed, 42);
        assert_eq!(cfg.grid.replications, 1000);
        let model = cfg.validate_model().unwrap();
        assert!(model.feller_y1);
        assert_eq!(cfg.initial_state(), State::new(0.5, 0.5, 0.0));
    }

    #[test]
    fn rejects_invalid_parameters() {
        let bad = SAMPLE.replace("b21 = -0.5", "b21 = 0.5");
        let cfg = ModelFileConfig::from_toml_str(&bad).unwrap();
        assert!(matches!(
            cfg.validate_model(),
            Err(ConfigError::Validation(_))
        ));
    }
}
