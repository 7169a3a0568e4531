//! Conditional least squares: the discrete normal-equation systems on a 1/N
//! lattice and their continuous-observation limit G_T⁻¹f_T, plus the sandwich
//! covariance Ĝ⁻¹ĤĜ⁻¹.

use super::linalg::{inv2, inv3, inv4, sym_eigenvalues, symmetrize};
use super::{
    accumulate_block_outer, design_rows, r_matrix_raw, Diagnostics, Estimate, EstimateError, Method,
};
use crate::model::DiffusionParams;
use crate::sim::Path;

/// Output of the discrete CLSE: the tilde parameter vector (the solution of
/// the three normal-equation systems, still on the one-step scale) together
/// with the Γ matrices and φ vectors that produced it.
#[derive(Debug, Clone)]
pub struct DiscreteClse {
    /// (ã1, b̃11, ã2, b̃21, b̃22, m̃, κ̃1, κ̃2, θ̃) — canonical order.
    pub tilde: [f64; 9],
    pub gamma1: [[f64; 2]; 2],
    pub gamma2: [[f64; 3]; 3],
    pub gamma3: [[f64; 4]; 4],
    pub phi1: [f64; 2],
    pub phi2: [f64; 3],
    pub phi3: [f64; 4],
    /// ⌊NT⌋, the number of one-step prediction errors.
    pub n_increments: usize,
    /// Samples per unit time.
    pub n_per_unit: f64,
}

/// Normal-equation accumulators over the lattice `states[0], states[stride],
/// …`: Γ(k) = Σ v_k v_kᵀ at the lagged point, φ(k) = Σ v_k·Δ(coordinate k).
struct LatticeSums {
    gamma1: [[f64; 2]; 2],
    gamma2: [[f64; 3]; 3],
    gamma3: [[f64; 4]; 4],
    phi1: [f64; 2],
    phi2: [f64; 3],
    phi3: [f64; 4],
    n: usize,
}

fn lattice_sums(path: &Path, stride: usize) -> LatticeSums {
    let n = path.grid.n_steps / stride;
    let mut s = LatticeSums {
        gamma1: [[0.0; 2]; 2],
        gamma2: [[0.0; 3]; 3],
        gamma3: [[0.0; 4]; 4],
        phi1: [0.0; 2],
        phi2: [0.0; 3],
        phi3: [0.0; 4],
        n,
    };
    for i in 0..n {
        let lag = &path.states[i * stride];
        let next = &path.states[(i + 1) * stride];
        let (v1, v2, v3) = design_rows(lag);
        let d1 = next.y1 - lag.y1;
        let d2 = next.y2 - lag.y2;
        let d3 = next.x - lag.x;
        for p in 0..2 {
            for q in 0..2 {
                s.gamma1[p][q] += v1[p] * v1[q];
            }
            s.phi1[p] += v1[p] * d1;
        }
        for p in 0..3 {
            for q in 0..3 {
                s.gamma2[p][q] += v2[p] * v2[q];
            }
            s.phi2[p] += v2[p] * d2;
        }
        for p in 0..4 {
            for q in 0..4 {
                s.gamma3[p][q] += v3[p] * v3[q];
            }
            s.phi3[p] += v3[p] * d3;
        }
    }
    s
}

fn mat_vec2(a: &[[f64; 2]; 2], v: &[f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

fn mat_vec3(a: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

fn mat_vec4(a: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

/// Discrete CLSE over the observations sampled `n_per_unit` times per unit
/// time. The path grid must refine the 1/N lattice.
pub fn clse_discrete(path: &Path, n_per_unit: f64) -> Result<DiscreteClse, EstimateError> {
    let dt = path.grid.dt;
    let stride_f = 1.0 / (n_per_unit * dt);
    let stride = stride_f.round();
    if stride < 1.0 || (stride_f - stride).abs() > 1e-9 * stride {
        return Err(EstimateError::SubsampleMismatch { n_per_unit, dt });
    }
    let sums = lattice_sums(path, stride as usize);

    let g1_inv = inv2(&sums.gamma1).ok_or(EstimateError::SingularGamma { block: 1 })?;
    let g2_inv = inv3(&sums.gamma2).ok_or(EstimateError::SingularGamma { block: 2 })?;
    let g3_inv = inv4(&sums.gamma3).ok_or(EstimateError::SingularGamma { block: 3 })?;
    let t1 = mat_vec2(&g1_inv, &sums.phi1);
    let t2 = mat_vec3(&g2_inv, &sums.phi2);
    let t3 = mat_vec4(&g3_inv, &sums.phi3);

    Ok(DiscreteClse {
        tilde: [
            t1[0], t1[1], t2[0], t2[1], t2[2], t3[0], t3[1], t3[2], t3[3],
        ],
        gamma1: sums.gamma1,
        gamma2: sums.gamma2,
        gamma3: sums.gamma3,
        phi1: sums.phi1,
        phi2: sums.phi2,
        phi3: sums.phi3,
        n_increments: sums.n,
        n_per_unit,
    })
}

/// The continuous-observation CLSE τ̌ = G_T⁻¹ f_T, with
/// G_T = diag(G⁽¹⁾, G⁽²⁾, G⁽³⁾) built from left-point sums of the design
/// outer products and f_T from the endpoint differences and left-point Itô
/// sums — the full-grid normal equations scaled by dt. The covariance is the
/// sandwich estimate.
pub fn clse_continuous(path: &Path, diff: &DiffusionParams) -> Result<Estimate, EstimateError> {
    let sums = lattice_sums(path, 1);
    let dt = path.grid.dt;
    let t = path.grid.t_max;

    // G = Γ·dt, f = φ; τ̌ = G⁻¹f = (1/dt)·Γ⁻¹φ.
    let g1_inv = inv2(&sums.gamma1).ok_or(EstimateError::SingularG { block: 1 })?;
    let g2_inv = inv3(&sums.gamma2).ok_or(EstimateError::SingularG { block: 2 })?;
    let g3_inv = inv4(&sums.gamma3).ok_or(EstimateError::SingularG { block: 3 })?;
    let t1 = mat_vec2(&g1_inv, &sums.phi1);
    let t2 = mat_vec3(&g2_inv, &sums.phi2);
    let t3 = mat_vec4(&g3_inv, &sums.phi3);
    let tau_hat = [
        t1[0] / dt,
        t1[1] / dt,
        t2[0] / dt,
        t2[1] / dt,
        t2[2] / dt,
        t3[0] / dt,
        t3[1] / dt,
        t3[2] / dt,
        t3[3] / dt,
    ];

    let covariance = clse_sandwich_covariance(path, diff)?;
    let condition = gamma_condition(&sums);
    let feller_ok = tau_hat[0] >= 0.5 * diff.sigma11 * diff.sigma11
        && tau_hat[2] >= 0.5 * diff.sigma12 * diff.sigma12;
    Ok(Estimate {
        tau_hat,
        covariance,
        method: Method::ClseContinuous,
        t,
        diagnostics: Diagnostics {
            condition,
            floor_clamp_count: 0,
            feller_ok,
        },
    })
}

fn gamma_condition(sums: &LatticeSums) -> f64 {
    // Cheap block condition indicator: max/min diagonal across blocks.
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for v in sums
        .gamma1
        .iter()
        .enumerate()
        .map(|(i, r)| r[i])
        .chain(sums.gamma2.iter().enumerate().map(|(i, r)| r[i]))
        .chain(sums.gamma3.iter().enumerate().map(|(i, r)| r[i]))
    {
        lo = lo.min(v.abs());
        hi = hi.max(v.abs());
    }
    hi / lo.max(f64::MIN_POSITIVE)
}

/// Sandwich covariance Ĝ⁻¹ĤĜ⁻¹ of the scaled CLSE error √T(τ̌−τ), where
/// Ĝ = G_T/T and Ĥ = H_T/T accumulates the quadratic variation of the
/// martingale part h_T. Block-wise, H has the same design-outer-product
/// structure as the information matrix with R(z) in place of R(z)⁻¹; in
/// particular the (1,2) block vanishes identically because R₁₂ ≡ 0.
pub fn clse_sandwich_covariance(
    path: &Path,
    diff: &DiffusionParams,
) -> Result<[[f64; 9]; 9], EstimateError> {
    let t = path.grid.t_max;
    let sums = lattice_sums(path, 1);
    let dt = path.grid.dt;

    // Ĝ⁻¹ block-diagonal, Ĝ = Γ·dt/T.
    let scale = t / dt;
    let g1_inv = inv2(&sums.gamma1).ok_or(EstimateError::SingularG { block: 1 })?;
    let g2_inv = inv3(&sums.gamma2).ok_or(EstimateError::SingularG { block: 2 })?;
    let g3_inv = inv4(&sums.gamma3).ok_or(EstimateError::SingularG { block: 3 })?;
    let mut g_inv = [[0.0f64; 9]; 9];
    for p in 0..2 {
        for q in 0..2 {
            g_inv[p][q] = g1_inv[p][q] * scale;
        }
    }
    for p in 0..3 {
        for q in 0..3 {
            g_inv[2 + p][2 + q] = g2_inv[p][q] * scale;
        }
    }
    for p in 0..4 {
        for q in 0..4 {
            g_inv[5 + p][5 + q] = g3_inv[p][q] * scale;
        }
    }

    // Ĥ = (1/T)·∫ R-weighted design outer products, by the trapezoid rule.
    let mut h = accumulate_block_outer(path, |z| r_matrix_raw(z.y1, z.y2, diff), false);
    for row in h.iter_mut() {
        for v in row.iter_mut() {
            *v /= t;
        }
    }
    symmetrize(&mut h);
    let h_scale = h
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let h_min_eig = sym_eigenvalues(&h)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    assert!(
        h_min_eig >= -1e-10 * h_scale.max(1.0),
        "quadratic variation must be PSD, min eigenvalue {h_min_eig}"
    );

    // Ĝ⁻¹ Ĥ Ĝ⁻¹, symmetrized once.
    let mut hg = [[0.0f64; 9]; 9];
    for i in 0..9 {
        for k in 0..9 {
            if h[i][k] == 0.0 {
                continue;
            }
            for j in 0..9 {
                hg[i][j] += h[i][k] * g_inv[k][j];
            }
        }
    }
    let mut cov = [[0.0f64; 9]; 9];
    for i in 0..9 {
        for k in 0..9 {
            if g_inv[i][k] == 0.0 {
                continue;
            }
            for j in 0..9 {
                cov[i][j] += g_inv[i][k] * hg[k][j];
            }
        }
    }
    symmetrize(&mut cov);
    Ok(cov)
}
