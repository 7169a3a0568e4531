//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`)
//! and asserting the stated tolerance.

#![allow(clippy::needless_range_loop)]

use dhlab::bench::{normality_diagnostics, run_classification, run_estimation, ExperimentConfig};
use dhlab::estimate::linalg::{inv2, inv3, inv4, invert_pivoted, mat_vec};
use dhlab::estimate::{
    clse_continuous, clse_invert_link, design_rows, diffusion_matrix, loading_matrix, mle,
    mle_information, Method,
};
use dhlab::model::{mean_trajectory, reference_model, stationary_mean, State};
use dhlab::numerics::simpson_uniform;
use dhlab::riccati::{cir_stationary_laplace, stationary_transform, TransformArg};
use dhlab::sim::{simulate_ensemble, simulate_path, TimeGrid};
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn config_text(
    bs: (f64, f64, f64),
    t_max: f64,
    dt: f64,
    seed: u64,
    replications: usize,
    experiment: &str,
) -> String {
    format!(
        r#"
[drift]
a1 = 1.0
b11 = {}
a2 = 1.0
b21 = -0.5
b22 = {}
m = 1.0
kappa1 = 0.5
kappa2 = 0.5
theta = {}

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
t_max = {t_max}
dt = {dt}
seed = {seed}
replications = {replications}
{experiment}
"#,
        bs.0, bs.1, bs.2
    )
}

fn experiment(dir: &tempfile::TempDir, text: &str) -> ExperimentConfig {
    ExperimentConfig::from_text(text, dir.path().to_path_buf(), None, false).unwrap()
}

/// Criterion 1: MLE error-table reproduction — mean |â1 − 1| at T = 500 in
/// [0.0024, 0.0096] and mean |θ̂ − 2| at T = 50 in [0.0045, 0.018], with
/// 1000 replications at dt = 0.1, in under 10 minutes.
///
/// KNOWN RED. The target bands encode externally supplied reference errors
/// that sit roughly 10× below what the maximum likelihood estimator of this
/// model can attain: the Fisher information E[DᵀR⁻¹D]/T of the reference
/// parameter set gives an asymptotic standard deviation of â1 of
/// √(1.83/T) ≈ 0.060 at T = 500 (mean absolute error ≈ 0.048), and the
/// Monte Carlo spread of the estimator matches its own information-based
/// covariance to within sampling noise (see
/// `scaled_error_covariance_matches_information_inverse`), so the band
/// [0.0024, 0.0096] would require an error variance ~100× below the
/// information bound. The conditional-least-squares table (criterion 2),
/// which has nearly identical asymptotic precision on this parameter set,
/// reproduces cleanly. The assertion is kept faithful to the stated band
/// rather than widened to force a pass.
#[test]
fn criterion_01_mle_table_reproduction() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment(
        &dir,
        &config_text(
            (1.0, 3.0, 2.0),
            500.0,
            0.1,
            42,
            1000,
            "\n[experiment]\nt_list = [50.0, 100.0, 500.0]\n",
        ),
    );
    let run = run_estimation(&cfg, Method::Mle).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mae_theta_t50 = run.table.mae[0][8];
    let mae_a1_t500 = run.table.mae[2][0];
    let improved = (0..9)
        .filter(|&k| run.table.mae[2][k] < run.table.mae[0][k])
        .count();
    let pass = (0.0024..=0.0096).contains(&mae_a1_t500)
        && (0.0045..=0.018).contains(&mae_theta_t50)
        && improved >= 8
        && elapsed < 600.0;
    report(
        "1 (MLE table)",
        pass,
        &format!(
            "mae(a1, T=500) = {mae_a1_t500:.4} in [0.0024, 0.0096]; \
             mae(theta, T=50) = {mae_theta_t50:.4} in [0.0045, 0.018]; \
             {improved}/9 coordinates improve from T=50 to T=500; {elapsed:.0}s"
        ),
    );
}

/// Criterion 2: CLSE error-table reproduction — mean |ǎ1 − 1| at T = 10³ in
/// [0.032, 0.127] and mean |θ̌ − 2| in [0.018, 0.074], 1000 replications,
/// dt = 0.1, in under 20 minutes.
#[test]
fn criterion_02_clse_table_reproduction() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment(
        &dir,
        &config_text(
            (1.0, 3.0, 2.0),
            1000.0,
            0.1,
            42,
            1000,
            "\n[experiment]\nt_list = [100.0, 1000.0]\n",
        ),
    );
    let run = run_estimation(&cfg, Method::ClseContinuous).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mae_a1 = run.table.mae[1][0];
    let mae_theta = run.table.mae[1][8];
    let pass = (0.032..=0.127).contains(&mae_a1)
        && (0.018..=0.074).contains(&mae_theta)
        && elapsed < 1200.0;
    report(
        "2 (CLSE table)",
        pass,
        &format!(
            "mae(a1, T=1000) = {mae_a1:.4} in [0.032, 0.127]; \
             mae(theta, T=1000) = {mae_theta:.4} in [0.018, 0.074]; {elapsed:.0}s"
        ),
    );
}

/// Criterion 3: decoupled stationary transform matches the closed-form
/// square-root-diffusion (Gamma) Laplace transform to 1e-8 relative across
/// λ ∈ {0.1, 1, 10}, in under a second.
#[test]
fn criterion_03_riccati_cir_oracle() {
    let start = Instant::now();
    let mut drift = reference_model().drift;
    drift.b21 = 0.0;
    let model = dhlab::model::validate(drift, reference_model().diffusion).unwrap();
    let mut worst = 0.0f64;
    for lambda in [0.1, 1.0, 10.0] {
        let arg = TransformArg::new(lambda, 0.0, 0.0);
        let value = stationary_transform(&arg, &model, 1e-10).unwrap();
        let exact = cir_stationary_laplace(lambda, drift.a1, drift.b11, model.diffusion.sigma11);
        worst = worst.max((value.value.re - exact).abs() / exact);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < 1e-8 && elapsed < 1.0;
    report(
        "3 (Riccati oracle)",
        pass,
        &format!(
            "max relative error {worst:.2e} < 1e-8 over lambda in {{0.1, 1, 10}}; {elapsed:.2}s"
        ),
    );
}

/// Criterion 4: Φ(0,0,0) = 1 exactly and the finite-difference gradient at 0
/// equals −stationary_mean within 1e-5 (one-sided second-order differences
/// in the λ directions to respect λ ≥ 0, central in μ with ∂Φ/∂μ = i·E[X]).
#[test]
fn criterion_04_transform_normalization_and_gradient() {
    let model = reference_model();
    let at_zero = stationary_transform(&TransformArg::new(0.0, 0.0, 0.0), &model, 1e-10).unwrap();
    let exactly_one = at_zero.value.re == 1.0 && at_zero.value.im == 0.0;

    let sm = stationary_mean(&model).unwrap();
    let h = 1e-4;
    let phi = |l1: f64, l2: f64, mu: f64| {
        stationary_transform(&TransformArg::new(l1, l2, mu), &model, 1e-10)
            .unwrap()
            .value
    };
    let d_l1 =
        (-3.0 * phi(0.0, 0.0, 0.0) + 4.0 * phi(h, 0.0, 0.0) - phi(2.0 * h, 0.0, 0.0)) / (2.0 * h);
    let d_l2 =
        (-3.0 * phi(0.0, 0.0, 0.0) + 4.0 * phi(0.0, h, 0.0) - phi(0.0, 2.0 * h, 0.0)) / (2.0 * h);
    let d_mu = (phi(0.0, 0.0, h) - phi(0.0, 0.0, -h)) / (2.0 * h);
    let defects = [
        (d_l1.re + sm[0]).abs(),
        (d_l2.re + sm[1]).abs(),
        (d_mu.im - sm[2]).abs(),
        d_mu.re.abs(),
    ];
    let worst = defects.iter().fold(0.0f64, |a, &b| a.max(b));
    let pass = exactly_one && worst < 1e-5;
    report(
        "4 (transform normalization/gradient)",
        pass,
        &format!("Phi(0) == 1 exactly: {exactly_one}; max gradient defect {worst:.2e} < 1e-5"),
    );
}

/// Criterion 5: ensemble mean vs analytic mean trajectory within 4 standard
/// errors at every grid point and coordinate (T = 50, 1000 replications; dt
/// fine enough that the O(dt) Euler transient bias stays inside the band).
#[test]
fn criterion_05_mean_trajectory_vs_monte_carlo() {
    let model = reference_model();
    let z0 = State::new(0.5, 0.5, 0.0);
    let grid = TimeGrid::new(50.0, 0.01).unwrap();
    let stats = simulate_ensemble(&model, z0, &grid, 1000, 42).unwrap();
    let analytic = mean_trajectory(&model, z0, &grid);
    let mut max_z = [0.0f64; 3];
    for i in 0..=grid.n_steps {
        for k in 0..3 {
            if stats.se[i][k] > 0.0 {
                max_z[k] = max_z[k].max((stats.mean[i][k] - analytic[i][k]).abs() / stats.se[i][k]);
            }
        }
    }
    let worst = max_z.iter().fold(0.0f64, |a, &b| a.max(b));

    // At dt = 0.1 the Euler transient bias breaks the max-over-grid bound,
    // but at the horizon both the scheme mean and the exact mean share the
    // same fixed point: the end point agrees within 4 SE, and the ensemble
    // mean of Y1 lands within 4 SE of its stationary value 1.
    let grid_coarse = TimeGrid::new(50.0, 0.1).unwrap();
    let stats_coarse = simulate_ensemble(&model, z0, &grid_coarse, 1000, 42).unwrap();
    let analytic_coarse = mean_trajectory(&model, z0, &grid_coarse);
    let n = grid_coarse.n_steps;
    let sm = stationary_mean(&model).unwrap();
    let mut end_ok = true;
    for k in 0..3 {
        end_ok &=
            (stats_coarse.mean[n][k] - analytic_coarse[n][k]).abs() <= 4.0 * stats_coarse.se[n][k];
    }
    let y1_dev = (stats_coarse.mean[n][0] - sm[0]).abs() / stats_coarse.se[n][0];
    end_ok &= y1_dev <= 4.0;

    report(
        "5 (mean vs Monte Carlo)",
        worst <= 4.0 && end_ok,
        &format!(
            "max |MC − analytic|/SE per coordinate = ({:.2}, {:.2}, {:.2}) ≤ 4 at dt=0.01; \
             dt=0.1 endpoint within 4 SE: {end_ok} (Y1 vs stationary: {y1_dev:.2} SE)",
            max_z[0], max_z[1], max_z[2]
        ),
    );
}

/// Criterion 6: fitted growth exponents — critical sets (0,3,2), (0,0,2),
/// (0,0,0) give log-log slopes 1, 2, 3 (± 0.1) on the dominant coordinate;
/// supercritical (−1,3,2) gives an exponential rate 1.0 ± 0.1.
#[test]
fn criterion_06_classification_growth_rates() {
    // Critical fits use a horizon long enough for the leading power to
    // dominate its subleading terms inside the [T/2, T] window (the slope of
    // 0.5t − 0.5625t² − 0.0417t³ is still ≈ 2.74 at t = 50); the
    // supercritical rate uses a finer step since Euler growth per step is
    // ln(1 + r·dt)/dt.
    let cases = [
        ((0.0, 3.0, 2.0), 1.0, 400.0, 0.1),
        ((0.0, 0.0, 2.0), 2.0, 400.0, 0.1),
        ((0.0, 0.0, 0.0), 3.0, 400.0, 0.1),
        ((-1.0, 3.0, 2.0), 1.0, 50.0, 0.05),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (bs, expected, t_max, dt) in cases {
        let dir = tempfile::tempdir().unwrap();
        let cfg = experiment(&dir, &config_text(bs, t_max, dt, 42, 400, ""));
        let run = run_classification(&cfg).unwrap();
        let dominant = run.label.growth.dominant_coordinate();
        let fitted = run.report.fitted_exponent[dominant].unwrap_or(f64::NAN);
        let ok = (fitted - expected).abs() <= 0.1;
        pass &= ok;
        detail.push_str(&format!(
            "({},{},{}) → {} fitted {:.3} (target {expected}); ",
            bs.0,
            bs.1,
            bs.2,
            ["y1", "y2", "x"][dominant],
            fitted
        ));
    }

    // In the (0, 3, 2) case the linear-scale slope of the ensemble E[Y1]
    // equals the growth coefficient a1 = 1 within 10%.
    let model = {
        let mut drift = reference_model().drift;
        drift.b11 = 0.0;
        dhlab::model::validate(drift, reference_model().diffusion).unwrap()
    };
    let grid = TimeGrid::new(50.0, 0.1).unwrap();
    let stats = simulate_ensemble(&model, State::new(0.5, 0.5, 0.0), &grid, 400, 42).unwrap();
    let mut ts = Vec::new();
    let mut means = Vec::new();
    for i in 0..=grid.n_steps {
        let t = grid.time(i);
        if t >= 25.0 {
            ts.push(t);
            means.push(stats.mean[i][0]);
        }
    }
    let (slope, _) = dhlab::numerics::linear_fit(&ts, &means);
    let slope_ok = (slope - 1.0).abs() < 0.1;
    pass &= slope_ok;
    detail.push_str(&format!(
        "(0,3,2) linear slope of E[Y1] on [25,50] = {slope:.3} (target a1 = 1)"
    ));

    report("6 (growth rates)", pass, detail.trim_end());
}

/// Criterion 7: single-path time averages over T = 2000 within 0.05 of the
/// stationary mean (1, 0.5, 0.125).
#[test]
fn criterion_07_ergodic_averages() {
    let model = reference_model();
    let grid = TimeGrid::new(2000.0, 0.1).unwrap();
    let path = simulate_path(&model, State::new(0.5, 0.5, 0.0), &grid, 42).unwrap();
    let sm = stationary_mean(&model).unwrap();
    let avg = [
        dhlab::riccati::ergodic_average(&path, |z| z.y1),
        dhlab::riccati::ergodic_average(&path, |z| z.y2),
        dhlab::riccati::ergodic_average(&path, |z| z.x),
    ];
    let devs = [
        (avg[0] - sm[0]).abs(),
        (avg[1] - sm[1]).abs(),
        (avg[2] - sm[2]).abs(),
    ];
    let worst = devs.iter().fold(0.0f64, |a, &b| a.max(b));
    report(
        "7 (ergodic averages)",
        worst < 0.05,
        &format!(
            "time averages ({:.4}, {:.4}, {:.4}) vs (1, 0.5, 0.125), max deviation {worst:.4} < 0.05",
            avg[0], avg[1], avg[2]
        ),
    );
}

/// Criterion 8: per-path deterministic error identities — the MLE error
/// equals ⟨M⟩⁻¹M and the CLSE error equals G⁻¹h, both rebuilt independently
/// from the stored Brownian increments, to relative error < 1e-6.
#[test]
fn criterion_08_estimator_error_identities() {
    let model = reference_model();
    let grid = TimeGrid::new(50.0, 0.1).unwrap();
    let path = simulate_path(&model, State::new(0.5, 0.5, 0.0), &grid, 1001).unwrap();
    assert_eq!(path.neg_y1_steps + path.neg_y2_steps, 0, "clamp-free path");
    let tau = model.drift.to_vec();
    let diff = model.diffusion;
    let floor = 1e-12;

    // MLE side.
    let est = mle(&path, &diff, floor).unwrap();
    let mut m = [0.0f64; 9];
    for i in 0..grid.n_steps {
        let z = &path.states[i];
        let rinv = diffusion_matrix(z, &diff, floor).unwrap().inv;
        let rho = loading_matrix(z, &diff);
        let db = [path.db1[i], path.db2[i], path.dw1[i], path.dw2[i]];
        let mut noise = [0.0f64; 3];
        for r in 0..3 {
            for c in 0..4 {
                noise[r] += rho[r][c] * db[c];
            }
        }
        let (v1, v2, v3) = design_rows(z);
        let blocks: [(&[f64], usize); 3] = [(&v1, 0), (&v2, 2), (&v3, 5)];
        for (bi, &(vi, oi)) in blocks.iter().enumerate() {
            let w: f64 = (0..3).map(|c| rinv[bi][c] * noise[c]).sum();
            for (p, vip) in vi.iter().enumerate() {
                m[oi + p] += w * vip;
            }
        }
    }
    let (info, _) = mle_information(&path, &diff, floor).unwrap();
    let (info_inv, _) = invert_pivoted(&info).unwrap();
    let predicted = mat_vec(&info_inv, &m);
    let (mut err_norm, mut defect) = (0.0f64, 0.0f64);
    for k in 0..9 {
        let actual = est.tau_hat[k] - tau[k];
        err_norm += actual * actual;
        defect += (actual - predicted[k]) * (actual - predicted[k]);
    }
    let mle_rel = defect.sqrt() / err_norm.sqrt();

    // CLSE side.
    let est = clse_continuous(&path, &diff).unwrap();
    let mut gamma1 = [[0.0f64; 2]; 2];
    let mut gamma2 = [[0.0f64; 3]; 3];
    let mut gamma3 = [[0.0f64; 4]; 4];
    let mut h1 = [0.0f64; 2];
    let mut h2 = [0.0f64; 3];
    let mut h3 = [0.0f64; 4];
    for i in 0..grid.n_steps {
        let z = &path.states[i];
        let (v1, v2, v3) = design_rows(z);
        let n1 = diff.sigma11 * z.y1.abs().sqrt() * path.db1[i];
        let n2 = diff.sigma12 * z.y2.abs().sqrt() * path.db2[i];
        let n3 = diff.sigma21
            * z.y1.max(0.0).sqrt()
            * (diff.rho11 * path.db1[i] + diff.rhobar11() * path.dw1[i])
            + diff.sigma22
                * z.y2.max(0.0).sqrt()
                * (diff.rho22 * path.db2[i] + diff.rhobar22() * path.dw2[i]);
        for p in 0..2 {
            for q in 0..2 {
                gamma1[p][q] += v1[p] * v1[q];
            }
            h1[p] += v1[p] * n1;
        }
        for p in 0..3 {
            for q in 0..3 {
                gamma2[p][q] += v2[p] * v2[q];
            }
            h2[p] += v2[p] * n2;
        }
        for p in 0..4 {
            for q in 0..4 {
                gamma3[p][q] += v3[p] * v3[q];
            }
            h3[p] += v3[p] * n3;
        }
    }
    let p1 = {
        let inv = inv2(&gamma1).unwrap();
        [
            (inv[0][0] * h1[0] + inv[0][1] * h1[1]) / grid.dt,
            (inv[1][0] * h1[0] + inv[1][1] * h1[1]) / grid.dt,
        ]
    };
    let p2 = {
        let inv = inv3(&gamma2).unwrap();
        let mut out = [0.0; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r] += inv[r][c] * h2[c];
            }
            out[r] /= grid.dt;
        }
        out
    };
    let p3 = {
        let inv = inv4(&gamma3).unwrap();
        let mut out = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r] += inv[r][c] * h3[c];
            }
            out[r] /= grid.dt;
        }
        out
    };
    let predicted = [
        p1[0], p1[1], p2[0], p2[1], p2[2], p3[0], p3[1], p3[2], p3[3],
    ];
    let (mut err_norm, mut defect) = (0.0f64, 0.0f64);
    for k in 0..9 {
        let actual = est.tau_hat[k] - tau[k];
        err_norm += actual * actual;
        defect += (actual - predicted[k]) * (actual - predicted[k]);
    }
    let clse_rel = defect.sqrt() / err_norm.sqrt();

    let pass = mle_rel < 1e-6 && clse_rel < 1e-6;
    report(
        "8 (error identities)",
        pass,
        &format!("relative defects: MLE {mle_rel:.2e}, CLSE {clse_rel:.2e}; both < 1e-6"),
    );
}

/// Criterion 9: forward link g_N then clse_invert_link recovers τ to 1e-10
/// for N ∈ {1, 10, 100}. The forward map is evaluated by independent Simpson
/// quadrature of its defining integrals.
#[test]
fn criterion_09_link_round_trip() {
    let tau = reference_model().drift.to_vec();
    let [a1, b11, a2, b21, b22, m, k1, k2, theta] = tau;
    let mut worst = 0.0f64;
    for n in [1.0, 10.0, 100.0] {
        let h = 1.0 / n;
        let quad = |f: &dyn Fn(f64) -> f64| -> f64 {
            let steps = 4000;
            let values: Vec<f64> = (0..=steps)
                .map(|i| f(h * i as f64 / steps as f64))
                .collect();
            simpson_uniform(&values, h / steps as f64)
        };
        let exp_b_21 = |u: f64| -b21 * ((-b11 * u).exp() - (-b22 * u).exp()) / (b22 - b11);
        let int_eb_col = |u: f64| -> [f64; 2] {
            let i11 = (1.0 - (-b11 * u).exp()) / b11;
            let i22 = (1.0 - (-b22 * u).exp()) / b22;
            let i21 = -b21 / (b22 - b11) * (i11 - i22);
            [i11 * a1, i21 * a1 + i22 * a2]
        };
        let tilde = [
            a1 * quad(&|u| (-b11 * u).exp()),
            1.0 - (-b11 * h).exp(),
            a2 * quad(&|u| (-b22 * u).exp())
                - b21 * a1 * quad(&|u| (b22 * (u - h)).exp() * (1.0 - (-b11 * u).exp()) / b11),
            b21 * quad(&|u| (b22 * (u - h)).exp() * (-b11 * u).exp()),
            1.0 - (-b22 * h).exp(),
            m * quad(&|u| (-theta * u).exp())
                - k1 * quad(&|u| (theta * (u - h)).exp() * int_eb_col(u)[0])
                - k2 * quad(&|u| (theta * (u - h)).exp() * int_eb_col(u)[1]),
            k1 * quad(&|u| (theta * (u - h)).exp() * (-b11 * u).exp())
                + k2 * quad(&|u| (theta * (u - h)).exp() * exp_b_21(u)),
            k2 * quad(&|u| (theta * (u - h)).exp() * (-b22 * u).exp()),
            1.0 - (-theta * h).exp(),
        ];
        let recovered = clse_invert_link(&tilde, n).unwrap();
        for k in 0..9 {
            worst = worst.max((recovered[k] - tau[k]).abs());
        }
    }
    report(
        "9 (link round trip)",
        worst < 1e-10,
        &format!("max recovery defect {worst:.2e} < 1e-10 over N in {{1, 10, 100}}"),
    );
}

/// Criterion 10: studentized scaled errors at T = 10³ over 500 replications
/// satisfy |skewness| < 0.3, |excess kurtosis| < 0.6 and KS < 0.08 per
/// coordinate, for both estimators.
#[test]
fn criterion_10_normality_of_studentized_errors() {
    let mut detail = String::new();
    let mut pass = true;
    for method in [Method::Mle, Method::ClseContinuous] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = experiment(
            &dir,
            &config_text((1.0, 3.0, 2.0), 1000.0, 0.1, 424242, 500, ""),
        );
        let run = run_estimation(&cfg, method).unwrap();
        let scaled = &run.scaled[0];
        let mut max_skew = 0.0f64;
        let mut max_kurt = 0.0f64;
        let mut max_ks = 0.0f64;
        for k in 0..9 {
            let rep = normality_diagnostics(&scaled.studentized[k]).unwrap();
            max_skew = max_skew.max(rep.skewness.abs());
            max_kurt = max_kurt.max(rep.excess_kurtosis.abs());
            max_ks = max_ks.max(rep.ks_statistic);
        }
        let ok = max_skew < 0.3 && max_kurt < 0.6 && max_ks < 0.08;
        pass &= ok;
        detail.push_str(&format!(
            "{method}: max |skew| {max_skew:.3} < 0.3, max |ex.kurt| {max_kurt:.3} < 0.6, max KS {max_ks:.3} < 0.08; "
        ));
    }
    report("10 (normality)", pass, detail.trim_end());
}

/// Criterion 11: re-running any suite with the same seed produces
/// byte-identical CSV outputs.
#[test]
fn criterion_11_byte_identical_reruns() {
    let mut detail = String::new();
    let mut pass = true;

    // Classification.
    let text = config_text((1.0, 3.0, 2.0), 5.0, 0.1, 7, 32, "");
    let (dir_a, dir_b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_classification(&experiment(&dir_a, &text)).unwrap();
    run_classification(&experiment(&dir_b, &text)).unwrap();
    for file in ["classification.csv", "report.json", "y1.svg"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        pass &= a == b;
    }
    detail.push_str("classification outputs identical; ");

    // Estimation (both methods on a small grid).
    for method in [Method::Mle, Method::ClseContinuous] {
        let text = config_text((1.0, 3.0, 2.0), 20.0, 0.1, 11, 24, "");
        let (dir_a, dir_b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_estimation(&experiment(&dir_a, &text), method).unwrap();
        run_estimation(&experiment(&dir_b, &text), method).unwrap();
        for file in ["error_table.csv", "scaled_errors.csv", "report.json"] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            pass &= a == b;
        }
        detail.push_str(&format!("{method} outputs identical; "));
    }

    // Transform and ergodic check.
    let text = config_text((1.0, 3.0, 2.0), 100.0, 0.1, 3, 1, "");
    let (dir_a, dir_b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let arg = TransformArg::new(0.3, 0.2, 0.7);
    dhlab::bench::run_transform(&experiment(&dir_a, &text), &arg).unwrap();
    dhlab::bench::run_transform(&experiment(&dir_b, &text), &arg).unwrap();
    dhlab::bench::run_ergodic(&experiment(&dir_a, &text)).unwrap();
    dhlab::bench::run_ergodic(&experiment(&dir_b, &text)).unwrap();
    for file in ["transform.csv", "ergodic.csv"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        pass &= a == b;
    }
    detail.push_str("transform/ergodic outputs identical");

    report("11 (determinism)", pass, &detail);
}
