//! Numerical laboratory for a three-dimensional affine stochastic volatility
//! diffusion with two square-root variance factors feeding one mean-reverting
//! log-price component:
//!
//! ```text
//! dY1 = (a1 − b11 Y1) dt                    + σ11 √Y1 dB1
//! dY2 = (a2 − b21 Y1 − b22 Y2) dt           + σ12 √Y2 dB2
//! dX  = (m − κ1 Y1 − κ2 Y2 − θ X) dt
//!       + σ21 √Y1 (ρ11 dB1 + ρ̄11 dW1) + σ22 √Y2 (ρ22 dB2 + ρ̄22 dW2)
//! ```
//!
//! on the state space `[0,∞)² × ℝ`, with `b21 ≤ 0`. The crate provides:
//!
//! * [`model`] — parameter validation, exact first-moment dynamics and the
//!   subcritical/critical/supercritical regime classification;
//! * [`sim`] — the modified Euler-Maruyama scheme with counter-based,
//!   replication-reproducible Gaussian increments, plus the trapezoid and
//!   left-point Itô quadrature primitives;
//! * [`riccati`] — the stationary Fourier-Laplace transform via the Riccati
//!   system, with certified truncation error, and ergodic-average helpers;
//! * [`estimate`] — maximum likelihood and conditional least squares drift
//!   estimators for the nine drift parameters, with asymptotic covariances;
//! * [`bench`] — the experiment harness behind the `dhlab` CLI
//!   (classification figures, error tables, scaled-error distributions).

// Indexed loops are the clearest notation for the fixed-size matrix kernels
// throughout this crate, and `!(x > 0)` comparisons deliberately catch NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod estimate;
pub mod model;
pub mod numerics;
pub mod riccati;
pub mod sim;

pub use model::{
    classify, mean_trajectory, stationary_mean, validate, DiffusionParams, DriftParams,
    RegimeLabel, State, ValidatedModel,
};
pub use sim::{simulate_ensemble, simulate_path, Path, TimeGrid};
