//! Model parameterization, validation, exact first moments and regime
//! classification.

mod classify;
pub mod config;
mod mean;

pub use classify::{classify, CoordGrowth, GrowthDescriptor, RegimeLabel, RegimeTag};
pub use mean::{mean_trajectory, stationary_mean};

use thiserror::Error;

/// Canonical drift parameter order: τ = (a1, b11, a2, b21, b22, m, κ1, κ2, θ).
/// Every 9-vector in the crate uses this order.
pub const TAU_NAMES: [&str; 9] = [
    "a1", "b11", "a2", "b21", "b22", "m", "kappa1", "kappa2", "theta",
];

/// The nine drift parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParams {
    /// Mean-reversion level of the first variance factor, `a1 ≥ 0`.
    pub a1: f64,
    /// Mean-reversion speed of the first variance factor.
    pub b11: f64,
    /// Mean-reversion level of the second variance factor, `a2 ≥ 0`.
    pub a2: f64,
    /// Cross-feed of factor 1 into factor 2, `b21 ≤ 0`.
    pub b21: f64,
    /// Mean-reversion speed of the second variance factor.
    pub b22: f64,
    /// Drift level of the price component.
    pub m: f64,
    /// Leverage of factor 1 on the price drift.
    pub kappa1: f64,
    /// Leverage of factor 2 on the price drift.
    pub kappa2: f64,
    /// Mean-reversion speed of the price component.
    pub theta: f64,
}

impl DriftParams {
    /// Canonical 9-vector (a1, b11, a2, b21, b22, m, κ1, κ2, θ).
    pub fn to_vec(&self) -> [f64; 9] {
        [
            self.a1,
            self.b11,
            self.a2,
            self.b21,
            self.b22,
            self.m,
            self.kappa1,
            self.kappa2,
            self.theta,
        ]
    }

    /// Rebuild from the canonical 9-vector.
    pub fn from_vec(tau: &[f64; 9]) -> Self {
        Self {
            a1: tau[0],
            b11: tau[1],
            a2: tau[2],
            b21: tau[3],
            b22: tau[4],
            m: tau[5],
            kappa1: tau[6],
            kappa2: tau[7],
            theta: tau[8],
        }
    }
}

/// Diffusion parameters, assumed known by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    /// Vol-of-vol of the first variance factor, `> 0`.
    pub sigma11: f64,
    /// Vol-of-vol of the second variance factor, `> 0`.
    pub sigma12: f64,
    /// Price loading on `√Y1`, `> 0`.
    pub sigma21: f64,
    /// Price loading on `√Y2`, `> 0`.
    pub sigma22: f64,
    /// Correlation between `B1` and the factor-1 price noise, in `[-1, 1]`.
    pub rho11: f64,
    /// Correlation between `B2` and the factor-2 price noise, in `[-1, 1]`.
    pub rho22: f64,
}

impl DiffusionParams {
    /// `√(1 − ρ11²)`, the orthogonal correlation weight for factor 1.
    pub fn rhobar11(&self) -> f64 {
        (1.0 - self.rho11 * self.rho11).max(0.0).sqrt()
    }

    /// `√(1 − ρ22²)`, the orthogonal correlation weight for factor 2.
    pub fn rhobar22(&self) -> f64 {
        (1.0 - self.rho22 * self.rho22).max(0.0).sqrt()
    }
}

/// One point z = (y1, y2, x) of the process; y1, y2 ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub y1: f64,
    pub y2: f64,
    pub x: f64,
}

impl State {
    pub fn new(y1: f64, y2: f64, x: f64) -> Self {
        Self { y1, y2, x }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.y1, self.y2, self.x]
    }
}

/// Rejections raised by [`validate`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ValidationError {
    #[error("mean-reversion level {name} = {value} must be non-negative")]
    NegativeLevel { name: &'static str, value: f64 },
    #[error("cross-feed coefficient b21 = {value} must be non-positive")]
    CrossFeedPositive { value: f64 },
    #[error("diffusion loading {name} = {value} must be strictly positive")]
    DegenerateDiffusion { name: &'static str, value: f64 },
    #[error("correlation {name} = {value} must lie in [-1, 1]")]
    CorrelationOutOfRange { name: &'static str, value: f64 },
    #[error("initial state must satisfy y1 ≥ 0 and y2 ≥ 0, got ({y1}, {y2})")]
    NegativeInitialVariance { y1: f64, y2: f64 },
    #[error("parameter {name} = {value} must be finite")]
    NonFinite { name: &'static str, value: f64 },
}

/// Raised by operations that require the subcritical regime.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("operation requires the subcritical regime (b11, b22, theta > 0); got b11 = {b11}, b22 = {b22}, theta = {theta}")]
pub struct NotSubcritical {
    pub b11: f64,
    pub b22: f64,
    pub theta: f64,
}

/// Validated parameter bundle. Immutable after construction; safe to share
/// across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedModel {
    pub drift: DriftParams,
    pub diffusion: DiffusionParams,
    /// `a1 ≥ σ11²/2`: factor 1 stays strictly positive.
    pub feller_y1: bool,
    /// `a2 ≥ σ12²/2`: factor 2 stays strictly positive (with b21 ≤ 0 the
    /// cross-feed only pushes the factor up).
    pub feller_y2: bool,
    /// Both inequalities strict.
    pub feller_strict: bool,
}

impl ValidatedModel {
    /// Regime classification of the drift.
    pub fn regime(&self) -> RegimeLabel {
        classify(&self.drift)
    }

    pub fn is_subcritical(&self) -> bool {
        let d = &self.drift;
        d.b11 > 0.0 && d.b22 > 0.0 && d.theta > 0.0
    }

    pub(crate) fn require_subcritical(&self) -> Result<(), NotSubcritical> {
        if self.is_subcritical() {
            Ok(())
        } else {
            Err(NotSubcritical {
                b11: self.drift.b11,
                b22: self.drift.b22,
                theta: self.drift.theta,
            })
        }
    }

    /// Drift vector at a state: D(z)·τ.
    pub fn drift_at(&self, z: &State) -> [f64; 3] {
        let d = &self.drift;
        [
            d.a1 - d.b11 * z.y1,
            d.a2 - d.b21 * z.y1 - d.b22 * z.y2,
            d.m - d.kappa1 * z.y1 - d.kappa2 * z.y2 - d.theta * z.x,
        ]
    }
}

/// Validate raw drift and diffusion parameters into a model bundle, computing
/// the Feller feature flags used to gate MLE applicability warnings.
pub fn validate(
    drift: DriftParams,
    diff: DiffusionParams,
) -> Result<ValidatedModel, ValidationError> {
    for (name, value) in [
        ("a1", drift.a1),
        ("b11", drift.b11),
        ("a2", drift.a2),
        ("b21", drift.b21),
        ("b22", drift.b22),
        ("m", drift.m),
        ("kappa1", drift.kappa1),
        ("kappa2", drift.kappa2),
        ("theta", drift.theta),
        ("sigma11", diff.sigma11),
        ("sigma12", diff.sigma12),
        ("sigma21", diff.sigma21),
        ("sigma22", diff.sigma22),
        ("rho11", diff.rho11),
        ("rho22", diff.rho22),
    ] {
        if !value.is_finite() {
            return Err(ValidationError::NonFinite { name, value });
        }
    }
    if drift.a1 < 0.0 {
        return Err(ValidationError::NegativeLevel {
            name: "a1",
            value: drift.a1,
        });
    }
    if drift.a2 < 0.0 {
        return Err(ValidationError::NegativeLevel {
            name: "a2",
            value: drift.a2,
        });
    }
    if drift.b21 > 0.0 {
        return Err(ValidationError::CrossFeedPositive { value: drift.b21 });
    }
    for (name, value) in [
        ("sigma11", diff.sigma11),
        ("sigma12", diff.sigma12),
        ("sigma21", diff.sigma21),
        ("sigma22", diff.sigma22),
    ] {
        if value <= 0.0 {
            return Err(ValidationError::DegenerateDiffusion { name, value });
        }
    }
    for (name, value) in [("rho11", diff.rho11), ("rho22", diff.rho22)] {
        if value.abs() > 1.0 {
            return Err(ValidationError::CorrelationOutOfRange { name, value });
        }
    }

    let feller_y1 = drift.a1 >= 0.5 * diff.sigma11 * diff.sigma11;
    let feller_y2 = drift.a2 >= 0.5 * diff.sigma12 * diff.sigma12;
    let feller_strict = drift.a1 > 0.5 * diff.sigma11 * diff.sigma11
        && drift.a2 > 0.5 * diff.sigma12 * diff.sigma12;
    Ok(ValidatedModel {
        drift,
        diffusion: diff,
        feller_y1,
        feller_y2,
        feller_strict,
    })
}

/// The parameter set used throughout the test suite: all nine drift values
/// plus a uniform σ = 0.1, ρ = 0.8 diffusion block.
pub fn reference_model() -> ValidatedModel {
    validate(
        DriftParams {
            a1: 1.0,
            b11: 1.0,
            a2: 1.0,
            b21: -0.5,
            b22: 3.0,
            m: 1.0,
            kappa1: 0.5,
            kappa2: 0.5,
            theta: 2.0,
        },
        DiffusionParams {
            sigma11: 0.1,
            sigma12: 0.1,
            sigma21: 0.1,
            sigma22: 0.1,
            rho11: 0.8,
            rho22: 0.8,
        },
    )
    .expect("reference parameters are admissible")
}
