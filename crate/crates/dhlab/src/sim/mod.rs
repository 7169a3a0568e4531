//! Sample-path generation with the modified Euler-Maruyama scheme, ensemble
//! statistics, and the quadrature primitives used by the estimators.

pub mod rng;

pub use rng::{standard_normal, Stream};

use crate::model::{State, ValidatedModel};
use rayon::prelude::*;
use thiserror::Error;

/// Replications are folded in chunks of this fixed size so the reduction
/// grouping (and therefore the floating-point result) does not depend on the
/// number of worker threads.
const REDUCTION_CHUNK: usize = 16;

/// Uniform time grid on [0, t_max] with spacing dt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs t_max > 0 and dt > 0, got t_max = {t_max}, dt = {dt}")]
    NonPositive { t_max: f64, dt: f64 },
    #[error(
        "t_max = {t_max} is not an integer multiple of dt = {dt} (relative defect {defect:e})"
    )]
    NotCommensurate { t_max: f64, dt: f64, defect: f64 },
}

impl TimeGrid {
    /// Build a grid with `n_steps = round(t_max/dt)`; `n_steps·dt` must
    /// reproduce `t_max` to 1e-12 relative.
    pub fn new(t_max: f64, dt: f64) -> Result<Self, GridError> {
        if !(t_max > 0.0) || !(dt > 0.0) {
            return Err(GridError::NonPositive { t_max, dt });
        }
        let n_steps = (t_max / dt).round() as usize;
        let defect = (n_steps as f64 * dt - t_max).abs() / t_max;
        if n_steps == 0 || defect > 1e-12 {
            return Err(GridError::NotCommensurate { t_max, dt, defect });
        }
        Ok(Self { t_max, dt, n_steps })
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|i| self.time(i))
    }
}

/// Square-root convention for the X-row of the scheme. The Y-rows always use
/// |·| under the square root; for the X-row negative variance values are
/// clamped to zero by default, with an `all` switch that extends |·| there
/// too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbsUnderSqrt {
    #[default]
    YOnly,
    All,
}

impl AbsUnderSqrt {
    #[inline]
    fn x_sqrt(&self, y: f64) -> f64 {
        match self {
            AbsUnderSqrt::YOnly => y.max(0.0).sqrt(),
            AbsUnderSqrt::All => y.abs().sqrt(),
        }
    }
}

/// One simulated trajectory: states on the grid, the four Gaussian increment
/// streams that produced it, and the clamp diagnostics.
#[derive(Debug, Clone)]
pub struct Path {
    pub grid: TimeGrid,
    pub states: Vec<State>,
    pub db1: Vec<f64>,
    pub db2: Vec<f64>,
    pub dw1: Vec<f64>,
    pub dw2: Vec<f64>,
    pub seed: u64,
    pub replication: u64,
    /// Steps entered with Ŷ1 < 0.
    pub neg_y1_steps: u64,
    /// Steps entered with Ŷ2 < 0.
    pub neg_y2_steps: u64,
}

impl Path {
    /// Largest per-coordinate fraction of steps that saw a negative variance
    /// value under the square root.
    pub fn clamp_fraction(&self) -> f64 {
        let n = self.grid.n_steps.max(1) as f64;
        (self.neg_y1_steps.max(self.neg_y2_steps)) as f64 / n
    }

    pub fn coord(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.to_array()[k]).collect()
    }

    /// CSV dump with header `t,y1,y2,x,dB1,dB2,dW1,dW2`; increment columns
    /// are empty on the last row.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity((self.grid.n_steps + 2) * 64);
        out.push_str("t,y1,y2,x,dB1,dB2,dW1,dW2\n");
        for (i, s) in self.states.iter().enumerate() {
            if i < self.grid.n_steps {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    self.grid.time(i),
                    s.y1,
                    s.y2,
                    s.x,
                    self.db1[i],
                    self.db2[i],
                    self.dw1[i],
                    self.dw2[i]
                ));
            } else {
                out.push_str(&format!(
                    "{},{},{},{},,,,\n",
                    self.grid.time(i),
                    s.y1,
                    s.y2,
                    s.x
                ));
            }
        }
        out
    }

    /// Parse a path from its CSV dump.
    pub fn from_csv(text: &str, seed: u64) -> Result<Self, SimError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(SimError::BadPathFile {
            reason: "empty file".into(),
        })?;
        if header.trim() != "t,y1,y2,x,dB1,dB2,dW1,dW2" {
            return Err(SimError::BadPathFile {
                reason: format!("unexpected header {header:?}"),
            });
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut incs: [Vec<f64>; 4] = Default::default();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(SimError::BadPathFile {
                    reason: format!("expected 8 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64, SimError> {
                s.trim().parse().map_err(|_| SimError::BadPathFile {
                    reason: format!("bad number {s:?}"),
                })
            };
            times.push(parse(fields[0])?);
            states.push(State::new(
                parse(fields[1])?,
                parse(fields[2])?,
                parse(fields[3])?,
            ));
            if !fields[4].trim().is_empty() {
                for (k, inc) in incs.iter_mut().enumerate() {
                    inc.push(parse(fields[4 + k])?);
                }
            }
        }
        if states.len() < 2 || incs[0].len() + 1 != states.len() {
            return Err(SimError::BadPathFile {
                reason: "need n+1 states and n increment rows".into(),
            });
        }
        let dt = times[1] - times[0];
        let grid =
            TimeGrid::new(*times.last().unwrap(), dt).map_err(|e| SimError::BadPathFile {
                reason: e.to_string(),
            })?;
        let [db1, db2, dw1, dw2] = incs;
        Ok(Path {
            grid,
            states,
            db1,
            db2,
            dw1,
            dw2,
            seed,
            replication: 0,
            neg_y1_steps: 0,
            neg_y2_steps: 0,
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("state became non-finite at step {step} (t = {t}) in replication {replication}; dt is likely too large for this regime")]
    NonFiniteState {
        replication: u64,
        step: usize,
        t: f64,
    },
    #[error("cannot parse path file: {reason}")]
    BadPathFile { reason: String },
}

/// Per-time-point ensemble mean and standard error.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub grid: TimeGrid,
    /// mean[i] = 3-vector of ensemble means at time t_i.
    pub mean: Vec<[f64; 3]>,
    /// Standard error = sample std / √replications; zero (flagged) for a
    /// single replication.
    pub se: Vec<[f64; 3]>,
    pub replications: usize,
    /// True when replications == 1 and the SE convention of zero applies.
    pub se_degenerate: bool,
}

/// Generate one path of the modified Euler-Maruyama scheme:
///
/// ```text
/// Ŷ1_{i+1} = Ŷ1_i + (a1 − b11 Ŷ1_i) Δt + σ11 √|Ŷ1_i| ΔB1_i
/// Ŷ2_{i+1} = Ŷ2_i + (a2 − b21 Ŷ1_i − b22 Ŷ2_i) Δt + σ12 √|Ŷ2_i| ΔB2_i
/// X̂_{i+1}  = X̂_i + (m − κ1 Ŷ1_i − κ2 Ŷ2_i − θ X̂_i) Δt
///            + σ21 √(Ŷ1_i ∨ 0) (ρ11 ΔB1_i + ρ̄11 ΔW1_i)
///            + σ22 √(Ŷ2_i ∨ 0) (ρ22 ΔB2_i + ρ̄22 ΔW2_i)
/// ```
///
/// with increments drawn from the counter-based generator keyed by
/// (seed, replication, step, stream).
pub fn simulate_path(
    model: &ValidatedModel,
    z0: State,
    grid: &TimeGrid,
    seed: u64,
) -> Result<Path, SimError> {
    simulate_path_with(model, z0, grid, seed, 0, AbsUnderSqrt::default())
}

/// [`simulate_path`] with an explicit replication index and square-root
/// convention.
pub fn simulate_path_with(
    model: &ValidatedModel,
    z0: State,
    grid: &TimeGrid,
    seed: u64,
    replication: u64,
    abs_mode: AbsUnderSqrt,
) -> Result<Path, SimError> {
    let d = &model.drift;
    let q = &model.diffusion;
    let rhobar11 = q.rhobar11();
    let rhobar22 = q.rhobar22();
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let n = grid.n_steps;

    let mut states = Vec::with_capacity(n + 1);
    let mut db1 = Vec::with_capacity(n);
    let mut db2 = Vec::with_capacity(n);
    let mut dw1 = Vec::with_capacity(n);
    let mut dw2 = Vec::with_capacity(n);
    let mut neg_y1 = 0u64;
    let mut neg_y2 = 0u64;

    let mut y1 = z0.y1;
    let mut y2 = z0.y2;
    let mut x = z0.x;
    states.push(State::new(y1, y2, x));

    for i in 0..n {
        let step = i as u64;
        let b1 = sqrt_dt * standard_normal(seed, replication, step, Stream::B1);
        let b2 = sqrt_dt * standard_normal(seed, replication, step, Stream::B2);
        let w1 = sqrt_dt * standard_normal(seed, replication, step, Stream::W1);
        let w2 = sqrt_dt * standard_normal(seed, replication, step, Stream::W2);
        db1.push(b1);
        db2.push(b2);
        dw1.push(w1);
        dw2.push(w2);

        if y1 < 0.0 {
            neg_y1 += 1;
        }
        if y2 < 0.0 {
            neg_y2 += 1;
        }

        let y1_next = y1 + (d.a1 - d.b11 * y1) * dt + q.sigma11 * y1.abs().sqrt() * b1;
        let y2_next = y2 + (d.a2 - d.b21 * y1 - d.b22 * y2) * dt + q.sigma12 * y2.abs().sqrt() * b2;
        let x_next = x
            + (d.m - d.kappa1 * y1 - d.kappa2 * y2 - d.theta * x) * dt
            + q.sigma21 * abs_mode.x_sqrt(y1) * (q.rho11 * b1 + rhobar11 * w1)
            + q.sigma22 * abs_mode.x_sqrt(y2) * (q.rho22 * b2 + rhobar22 * w2);

        y1 = y1_next;
        y2 = y2_next;
        x = x_next;
        if !(y1.is_finite() && y2.is_finite() && x.is_finite()) {
            return Err(SimError::NonFiniteState {
                replication,
                step: i + 1,
                t: grid.time(i + 1),
            });
        }
        states.push(State::new(y1, y2, x));
    }

    Ok(Path {
        grid: *grid,
        states,
        db1,
        db2,
        dw1,
        dw2,
        seed,
        replication,
        neg_y1_steps: neg_y1,
        neg_y2_steps: neg_y2,
    })
}

/// Per-time-point mean and standard error over independent replications.
///
/// Replications are simulated in parallel but accumulated in fixed
/// index-order chunks, so the result is bit-identical for any thread count.
/// Paths are not retained.
pub fn simulate_ensemble(
    model: &ValidatedModel,
    z0: State,
    grid: &TimeGrid,
    replications: usize,
    seed: u64,
) -> Result<EnsembleStats, SimError> {
    assert!(replications >= 1, "need at least one replication");
    let n = grid.n_steps;

    struct Partial {
        sum: Vec<[f64; 3]>,
        sumsq: Vec<[f64; 3]>,
    }

    let chunk_results: Vec<Result<Partial, SimError>> = (0..replications)
        .collect::<Vec<_>>()
        .par_chunks(REDUCTION_CHUNK)
        .map(|chunk| {
            let mut partial = Partial {
                sum: vec![[0.0; 3]; n + 1],
                sumsq: vec![[0.0; 3]; n + 1],
            };
            for &rep in chunk {
                let path =
                    simulate_path_with(model, z0, grid, seed, rep as u64, AbsUnderSqrt::default())?;
                for (i, s) in path.states.iter().enumerate() {
                    let v = s.to_array();
                    for k in 0..3 {
                        partial.sum[i][k] += v[k];
                        partial.sumsq[i][k] += v[k] * v[k];
                    }
                }
            }
            Ok(partial)
        })
        .collect();

    let mut sum = vec![[0.0; 3]; n + 1];
    let mut sumsq = vec![[0.0; 3]; n + 1];
    for partial in chunk_results {
        let partial = partial?;
        for i in 0..=n {
            for k in 0..3 {
                sum[i][k] += partial.sum[i][k];
                sumsq[i][k] += partial.sumsq[i][k];
            }
        }
    }

    let r = replications as f64;
    let mut mean = vec![[0.0; 3]; n + 1];
    let mut se = vec![[0.0; 3]; n + 1];
    for i in 0..=n {
        for k in 0..3 {
            let m = sum[i][k] / r;
            mean[i][k] = m;
            if replications > 1 {
                let var = (sumsq[i][k] - r * m * m).max(0.0) / (r - 1.0);
                se[i][k] = (var / r).sqrt();
            }
        }
    }

    Ok(EnsembleStats {
        grid: *grid,
        mean,
        se,
        replications,
        se_degenerate: replications == 1,
    })
}

/// Trapezoid rule on the grid: Σ dt/2 (v_i + v_{i+1}). `values` holds one
/// sample per grid point (n_steps + 1 in total).
pub fn trapezoid_integral(values: &[f64], grid: &TimeGrid) -> f64 {
    assert_eq!(values.len(), grid.n_steps + 1, "one value per grid point");
    let mut acc = 0.0;
    for i in 0..grid.n_steps {
        acc += values[i] + values[i + 1];
    }
    0.5 * grid.dt * acc
}

/// Strictly left-point (non-anticipating) Itô sum:
/// Σ ξ(t_i)·(η(t_{i+1}) − η(t_i)).
pub fn ito_sum(integrand: &[f64], integrator: &[f64], grid: &TimeGrid) -> f64 {
    assert_eq!(integrand.len(), grid.n_steps + 1);
    assert_eq!(integrator.len(), grid.n_steps + 1);
    let mut acc = 0.0;
    for i in 0..grid.n_steps {
        acc += integrand[i] * (integrator[i + 1] - integrator[i]);
    }
    acc
}
