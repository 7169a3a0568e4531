//! Drift-parameter estimators: continuous-observation maximum likelihood and
//! the two conditional least squares variants, with asymptotic covariance
//! estimates. All estimators are pure functions of (path, diffusion
//! parameters) in the canonical order τ = (a1, b11, a2, b21, b22, m, κ1, κ2, θ).

pub mod linalg;

mod clse;
mod link;
mod mle;

pub use clse::{clse_continuous, clse_discrete, clse_sandwich_covariance, DiscreteClse};
pub use link::clse_invert_link;
pub use mle::{mle, mle_information};

use crate::model::{DiffusionParams, State};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EstimateError {
    #[error("diffusion matrix singular after flooring (det = {det:e})")]
    SingularR { det: f64 },
    #[error("information matrix singular (pivot condition estimate {condition:e})")]
    SingularInformation { condition: f64 },
    #[error("normal-equation matrix Γ({block}) is singular")]
    SingularGamma { block: u8 },
    #[error("least-squares matrix G({block}) is singular")]
    SingularG { block: u8 },
    #[error("link inversion out of domain: {name} = {value} requires 1 − {name} > 0")]
    LinkOutOfDomain { name: &'static str, value: f64 },
    #[error("grid with dt = {dt} does not refine 1/{n_per_unit} sampling")]
    SubsampleMismatch { n_per_unit: f64, dt: f64 },
}

/// Which estimator produced an [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mle,
    ClseDiscrete,
    ClseContinuous,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Mle => write!(f, "mle"),
            Method::ClseDiscrete => write!(f, "clse-discrete"),
            Method::ClseContinuous => write!(f, "clse"),
        }
    }
}

/// Estimator health indicators reported alongside τ̂.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    /// Pivot-ratio condition estimate of the solved system.
    pub condition: f64,
    /// Grid points where a variance coordinate was lifted to the floor
    /// inside R⁻¹.
    pub floor_clamp_count: u64,
    /// Whether the *fitted* levels satisfy the Feller inequalities
    /// â1 ≥ σ11²/2, â2 ≥ σ12²/2 (the likelihood theory assumes them).
    pub feller_ok: bool,
}

/// A fitted 9-vector with its estimated asymptotic covariance.
///
/// `covariance` is the covariance of the *scaled* error √T(τ̂ − τ):
/// (information/T)⁻¹ for the MLE, Ĝ⁻¹ĤĜ⁻¹ for the CLSE. Divide by T for the
/// covariance of τ̂ itself.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub tau_hat: [f64; 9],
    pub covariance: [[f64; 9]; 9],
    pub method: Method,
    pub t: f64,
    pub diagnostics: Diagnostics,
}

/// The 3×9 drift design matrix
///
/// ```text
/// D(z) = [ 1 −y1  .   .   .   .   .   .   . ]
///        [ .   .  1  −y1 −y2  .   .   .   . ]
///        [ .   .  .   .   .   1  −y1 −y2 −x ]
/// ```
///
/// so that D(z)·τ is the SDE drift at z. The block row patterns are exposed
/// directly since every estimator works block-wise.
pub fn design_rows(z: &State) -> ([f64; 2], [f64; 3], [f64; 4]) {
    ([1.0, -z.y1], [1.0, -z.y1, -z.y2], [1.0, -z.y1, -z.y2, -z.x])
}

/// Dense 3×9 design matrix (block-diagonal sparsity as displayed above).
pub fn design_matrix(z: &State) -> [[f64; 9]; 3] {
    let (v1, v2, v3) = design_rows(z);
    let mut d = [[0.0; 9]; 3];
    d[0][..2].copy_from_slice(&v1);
    d[1][2..5].copy_from_slice(&v2);
    d[2][5..9].copy_from_slice(&v3);
    d
}

/// The symmetric diffusion matrix R(z) = ρ̃(z)ρ̃(z)ᵀ and its closed-form
/// inverse, with the variance coordinates floored before inversion.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionMatrixR {
    pub r: [[f64; 3]; 3],
    pub inv: [[f64; 3]; 3],
    /// Whether flooring was applied to y1 or y2.
    pub floored: bool,
}

/// R(z) with y-values replaced by max(y, floor); the floor keeps the 1/y
/// singularities of R⁻¹ integrable when an Euler path grazes zero. The floor
/// is never applied to the design matrix.
pub fn diffusion_matrix(
    z: &State,
    diff: &DiffusionParams,
    floor: f64,
) -> Result<DiffusionMatrixR, EstimateError> {
    assert!(floor > 0.0, "floor must be positive");
    let floored = z.y1 < floor || z.y2 < floor;
    let y1 = z.y1.max(floor);
    let y2 = z.y2.max(floor);
    let r = r_matrix_raw(y1, y2, diff);
    let det = det3(&r);
    // Absolute cutoff: a floored R is legitimately close to singular
    // (entries scale with the 1e-12 floor) but still invertible.
    let inv = linalg::inv3_with_cutoff(&r, 1e-300).ok_or(EstimateError::SingularR { det })?;
    Ok(DiffusionMatrixR { r, inv, floored })
}

pub(crate) fn r_matrix_raw(y1: f64, y2: f64, diff: &DiffusionParams) -> [[f64; 3]; 3] {
    let r11 = diff.sigma11 * diff.sigma11 * y1;
    let r22 = diff.sigma12 * diff.sigma12 * y2;
    let r13 = diff.rho11 * diff.sigma11 * diff.sigma21 * y1;
    let r23 = diff.rho22 * diff.sigma12 * diff.sigma22 * y2;
    let r33 = diff.sigma21 * diff.sigma21 * y1 + diff.sigma22 * diff.sigma22 * y2;
    [[r11, 0.0, r13], [0.0, r22, r23], [r13, r23, r33]]
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// The 3×4 loading matrix ρ̃(z) mapping the four Brownian increments to the
/// state increments; R(z) = ρ̃(z)ρ̃(z)ᵀ.
pub fn loading_matrix(z: &State, diff: &DiffusionParams) -> [[f64; 4]; 3] {
    let s1 = z.y1.max(0.0).sqrt();
    let s2 = z.y2.max(0.0).sqrt();
    [
        [diff.sigma11 * s1, 0.0, 0.0, 0.0],
        [0.0, diff.sigma12 * s2, 0.0, 0.0],
        [
            diff.rho11 * diff.sigma21 * s1,
            diff.rho22 * diff.sigma22 * s2,
            diff.rhobar11() * diff.sigma21 * s1,
            diff.rhobar22() * diff.sigma22 * s2,
        ],
    ]
}

/// Accumulate Σ w(z)·(block outer products) over a path, producing the 9×9
/// block matrix with (i,j)-block w_ij(z)·v_i v_jᵀ for the design subvectors
/// v1, v2, v3. `left_point` selects the non-anticipating rule; otherwise the
/// trapezoid rule is applied.
pub(crate) fn accumulate_block_outer<F>(
    path: &crate::sim::Path,
    weights: F,
    left_point: bool,
) -> [[f64; 9]; 9]
where
    F: Fn(&State) -> [[f64; 3]; 3],
{
    let n = path.grid.n_steps;
    let dt = path.grid.dt;
    let mut acc = [[0.0; 9]; 9];
    let mut add = |z: &State, scale: f64| {
        let w = weights(z);
        let (v1, v2, v3) = design_rows(z);
        let blocks: [(&[f64], usize); 3] = [(&v1, 0), (&v2, 2), (&v3, 5)];
        for (bi, &(vi, oi)) in blocks.iter().enumerate() {
            for (bj, &(vj, oj)) in blocks.iter().enumerate() {
                let wij = w[bi][bj];
                if wij == 0.0 {
                    continue;
                }
                let s = wij * scale;
                for (p, vip) in vi.iter().enumerate() {
                    for (q, vjq) in vj.iter().enumerate() {
                        acc[oi + p][oj + q] += s * vip * vjq;
                    }
                }
            }
        }
    };
    if left_point {
        for i in 0..n {
            add(&path.states[i], dt);
        }
    } else {
        add(&path.states[0], 0.5 * dt);
        for i in 1..n {
            add(&path.states[i], dt);
        }
        add(&path.states[n], 0.5 * dt);
    }
    acc
}
