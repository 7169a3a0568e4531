//! Exact first-moment dynamics: the mean trajectory solves the triangular
//! linear ODE system obtained by taking expectations in the SDE, and the
//! stationary mean is its fixed point in the subcritical regime.

use super::{NotSubcritical, State, ValidatedModel};
use crate::numerics::expm;
use crate::sim::TimeGrid;

/// Absolute tolerance for deciding that two decay constants coincide, at
/// which point the distinct-root closed form degenerates and the trajectory
/// is propagated numerically instead.
const ROOT_TOL: f64 = 1e-10;

/// Exact solution of
///
/// ```text
/// dE[Y1]/dt = a1 − b11·E[Y1]
/// dE[Y2]/dt = a2 − b21·E[Y1] − b22·E[Y2]
/// dE[X]/dt  = m − κ1·E[Y1] − κ2·E[Y2] − θ·E[X]
/// ```
///
/// evaluated on the grid. When the decay constants {b11, b22, θ, 0} are
/// pairwise separated by more than `1e-10` the explicit exponential cascade
/// is used; otherwise each uniform step is propagated by the augmented-matrix
/// exponential, which is exact for the constant-coefficient linear system.
pub fn mean_trajectory(model: &ValidatedModel, z0_mean: State, grid: &TimeGrid) -> Vec<[f64; 3]> {
    let d = &model.drift;
    let roots_distinct = [
        d.b11,
        d.b22,
        d.theta,
        d.b11 - d.b22,
        d.b11 - d.theta,
        d.b22 - d.theta,
    ]
    .iter()
    .all(|gap| gap.abs() > ROOT_TOL);

    if roots_distinct {
        closed_form(model, z0_mean, grid)
    } else {
        step_exponential(model, z0_mean, grid)
    }
}

/// Distinct-root exponential cascade. Each coordinate is a combination of a
/// constant and the modes e^{−b11·t}, e^{−b22·t}, e^{−θ·t}.
fn closed_form(model: &ValidatedModel, z0: State, grid: &TimeGrid) -> Vec<[f64; 3]> {
    let d = &model.drift;

    // E[Y1] = α1 + β1·e^{−b11 t}
    let alpha1 = d.a1 / d.b11;
    let beta1 = z0.y1 - alpha1;

    // E[Y2] = α2 + c21·e^{−b11 t} + γ2·e^{−b22 t}
    let alpha2 = (d.a2 - d.b21 * alpha1) / d.b22;
    let c21 = -d.b21 * beta1 / (d.b22 - d.b11);
    let gamma2 = z0.y2 - alpha2 - c21;

    // E[X] = α3 + e1·e^{−b11 t} + e2·e^{−b22 t} + γ3·e^{−θ t}
    let alpha3 = (d.m - d.kappa1 * alpha1 - d.kappa2 * alpha2) / d.theta;
    let e1 = (-d.kappa1 * beta1 - d.kappa2 * c21) / (d.theta - d.b11);
    let e2 = -d.kappa2 * gamma2 / (d.theta - d.b22);
    let gamma3 = z0.x - alpha3 - e1 - e2;

    (0..=grid.n_steps)
        .map(|i| {
            let t = grid.time(i);
            let m1 = (-d.b11 * t).exp();
            let m2 = (-d.b22 * t).exp();
            let m3 = (-d.theta * t).exp();
            [
                alpha1 + beta1 * m1,
                alpha2 + c21 * m1 + gamma2 * m2,
                alpha3 + e1 * m1 + e2 * m2 + gamma3 * m3,
            ]
        })
        .collect()
}

/// Stepwise propagation by the exponential of the augmented system matrix
/// [[−A, c], [0, 0]]: exact for the linear ODE regardless of root
/// coincidences, with only rounding accumulating over steps.
fn step_exponential(model: &ValidatedModel, z0: State, grid: &TimeGrid) -> Vec<[f64; 3]> {
    let d = &model.drift;
    let dt = grid.dt;
    let m = [
        [-d.b11 * dt, 0.0, 0.0, d.a1 * dt],
        [-d.b21 * dt, -d.b22 * dt, 0.0, d.a2 * dt],
        [-d.kappa1 * dt, -d.kappa2 * dt, -d.theta * dt, d.m * dt],
        [0.0, 0.0, 0.0, 0.0],
    ];
    let p = expm(&m);

    let mut out = Vec::with_capacity(grid.n_steps + 1);
    let mut v = [z0.y1, z0.y2, z0.x, 1.0];
    out.push([v[0], v[1], v[2]]);
    for _ in 0..grid.n_steps {
        let mut next = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                next[i] += p[i][j] * v[j];
            }
        }
        v = next;
        out.push([v[0], v[1], v[2]]);
    }
    out
}

/// Fixed point of the mean ODE:
/// (a1/b11, (a2 − b21·ȳ1)/b22, (m − κ1·ȳ1 − κ2·ȳ2)/θ).
pub fn stationary_mean(model: &ValidatedModel) -> Result<[f64; 3], NotSubcritical> {
    model.require_subcritical()?;
    let d = &model.drift;
    let y1 = d.a1 / d.b11;
    let y2 = (d.a2 - d.b21 * y1) / d.b22;
    let x = (d.m - d.kappa1 * y1 - d.kappa2 * y2) / d.theta;
    Ok([y1, y2, x])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_model, validate, DriftParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(t_max: f64, dt: f64) -> TimeGrid {
        TimeGrid::new(t_max, dt).unwrap()
    }

    #[test]
    fn scalar_cir_mean_with_positive_reversion() {
        // E[Y1](t) = a1/b11 + (E[Y1]_0 − a1/b11)·e^{−b11 t}
        let model = reference_model();
        let z0 = State::new(0.5, 0.5, 0.0);
        let g = grid(10.0, 0.5);
        let traj = mean_trajectory(&model, z0, &g);
        for (i, point) in traj.iter().enumerate() {
            let t = g.time(i);
            assert_abs_diff_eq!(point[0], 1.0 - 0.5 * (-t).exp(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(traj.last().unwrap()[0], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn zero_reversion_grows_linearly() {
        let mut drift = reference_model().drift;
        drift.b11 = 0.0;
        let model = validate(drift, reference_model().diffusion).unwrap();
        let z0 = State::new(0.5, 0.5, 0.0);
        let g = grid(4.0, 0.25);
        let traj = mean_trajectory(&model, z0, &g);
        for (i, point) in traj.iter().enumerate() {
            let t = g.time(i);
            assert_abs_diff_eq!(point[0], 0.5 + t, epsilon = 1e-10);
        }
    }

    #[test]
    fn stationary_mean_of_reference_set() {
        let model = reference_model();
        let sm = stationary_mean(&model).unwrap();
        assert_abs_diff_eq!(sm[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sm[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sm[2], 0.125, epsilon = 1e-14);
    }

    #[test]
    fn stationary_mean_edge_cases() {
        let mut drift = reference_model().drift;
        drift.a1 = 0.0;
        let model = validate(drift, reference_model().diffusion).unwrap();
        assert_abs_diff_eq!(stationary_mean(&model).unwrap()[0], 0.0, epsilon = 1e-15);

        // Symmetric decoupled factors share their stationary level.
        let mut drift = reference_model().drift;
        drift.b21 = 0.0;
        drift.b11 = 2.0;
        drift.b22 = 2.0;
        drift.a1 = 1.3;
        drift.a2 = 1.3;
        let model = validate(drift, reference_model().diffusion).unwrap();
        let sm = stationary_mean(&model).unwrap();
        assert_abs_diff_eq!(sm[0], sm[1], epsilon = 1e-14);

        let mut drift = reference_model().drift;
        drift.theta = 0.0;
        let model = validate(drift, reference_model().diffusion).unwrap();
        assert!(stationary_mean(&model).is_err());
    }

    #[test]
    fn decoupled_first_coordinate_is_exact_cir_mean() {
        let mut drift = reference_model().drift;
        drift.b21 = 0.0;
        drift.kappa1 = 0.0;
        drift.kappa2 = 0.0;
        let model = validate(drift, reference_model().diffusion).unwrap();
        let z0 = State::new(0.7, 0.9, 0.3);
        let g = grid(6.0, 0.1);
        let traj = mean_trajectory(&model, z0, &g);
        for (i, point) in traj.iter().enumerate() {
            let t = g.time(i);
            let exact =
                drift.a1 / drift.b11 + (0.7 - drift.a1 / drift.b11) * (-drift.b11 * t).exp();
            assert_abs_diff_eq!(point[0], exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn subcritical_converges_to_stationary_mean_at_declared_rate() {
        let model = reference_model();
        let sm = stationary_mean(&model).unwrap();
        let g = grid(12.0, 0.05);
        let traj = mean_trajectory(&model, State::new(0.5, 0.5, 0.0), &g);
        let last = traj.last().unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(last[k], sm[k], epsilon = 1e-4);
        }
        // log-residual slope of the slowest coordinate ≈ −min(b11, b22, θ).
        let rate = model.drift.b11.min(model.drift.b22).min(model.drift.theta);
        let mut ts = Vec::new();
        let mut logs = Vec::new();
        for i in 0..=g.n_steps {
            let t = g.time(i);
            if !(2.0..=8.0).contains(&t) {
                continue;
            }
            let r = (traj[i][0] - sm[0]).abs();
            ts.push(t);
            logs.push(r.ln());
        }
        let (slope, _) = crate::numerics::linear_fit(&ts, &logs);
        assert!(
            (slope + rate).abs() < 0.1 * rate,
            "log-residual slope {slope} should be ≈ −{rate}"
        );
    }

    #[test]
    fn repeated_roots_fall_back_to_exact_propagation() {
        // b22 = θ triggers the coincident branch; cross-check against a
        // nearby distinct-root configuration.
        let mut drift = reference_model().drift;
        drift.b22 = 2.0;
        drift.theta = 2.0;
        let model = validate(drift, reference_model().diffusion).unwrap();
        let g = grid(5.0, 0.1);
        let z0 = State::new(0.5, 0.5, 0.0);
        let confluent = mean_trajectory(&model, z0, &g);

        let mut drift_near = drift;
        drift_near.theta = 2.0 + 1e-7;
        let model_near = validate(drift_near, reference_model().diffusion).unwrap();
        let near = mean_trajectory(&model_near, z0, &g);
        for (a, b) in confluent.iter().zip(&near) {
            for k in 0..3 {
                assert_abs_diff_eq!(a[k], b[k], epsilon = 1e-5);
            }
        }
    }

    proptest! {
        /// Closed form and exponential stepping agree on generic parameters.
        #[test]
        fn closed_form_matches_exponential_stepping(
            b11 in 0.3..1.5f64,
            b22 in 1.8..3.5f64,
            theta in 4.0..6.0f64,
            a1 in 0.0..2.0f64,
            a2 in 0.0..2.0f64,
            b21 in -1.0..0.0f64,
            k1 in -1.0..1.0f64,
            k2 in -1.0..1.0f64,
            m in -1.0..1.0f64,
        ) {
            let drift = DriftParams { a1, b11, a2, b21, b22, m, kappa1: k1, kappa2: k2, theta };
            let model = validate(drift, reference_model().diffusion).unwrap();
            let g = grid(3.0, 0.25);
            let z0 = State::new(0.4, 0.8, -0.1);
            let cf = closed_form(&model, z0, &g);
            let se = step_exponential(&model, z0, &g);
            for (a, b) in cf.iter().zip(&se) {
                for k in 0..3 {
                    prop_assert!((a[k] - b[k]).abs() < 1e-9 * (1.0 + a[k].abs()));
                }
            }
        }
    }
}
