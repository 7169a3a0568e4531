//! Experiment harness: wires simulation, classification, transforms and
//! estimation into reproducible runs that emit CSV/JSON reports and simple
//! SVG figures. Identical (config, seed) pairs produce byte-identical
//! outputs; every file carries the config hash and seed.

pub mod normality;
pub mod svg;

pub use normality::{normality_diagnostics, DiagnosticsError, NormalityReport};

use crate::estimate::{
    clse_continuous, clse_discrete, clse_invert_link, clse_sandwich_covariance, mle, Diagnostics,
    Estimate, EstimateError, Method,
};
use crate::model::config::{ConfigError, ModelFileConfig};
use crate::model::{
    classify, mean_trajectory, stationary_mean, CoordGrowth, NotSubcritical, RegimeLabel, State,
    ValidatedModel, TAU_NAMES,
};
use crate::numerics::{fnv1a64, linear_fit};
use crate::riccati::{stationary_transform, RiccatiError, TransformArg};
use crate::sim::{
    simulate_ensemble, simulate_path_with, AbsUnderSqrt, GridError, SimError, TimeGrid,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path as FsPath, PathBuf};
use thiserror::Error;

/// Fixed chunk size for index-ordered replication reductions.
const CHUNK: usize = 16;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    NotSubcritical(#[from] NotSubcritical),
    #[error("estimator failure rate {failures}/{total} exceeds 5%")]
    TooManyFailures { failures: usize, total: usize },
}

impl BenchError {
    /// CLI exit code: 2 for configuration/validation problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Io(_) | BenchError::Grid(_) => 2,
            _ => 3,
        }
    }
}

/// Optional `[experiment]` section of a run configuration.
#[derive(Debug, Clone, Deserialize, Default)]
pub struct ExperimentSection {
    /// classify | estimate-mle | estimate-clse | estimate-clse-discrete |
    /// transform | ergodic-check
    pub kind: Option<String>,
    /// Estimation horizons; defaults to [t_max].
    pub t_list: Option<Vec<f64>>,
    /// Extra horizons appended when the long suite is requested.
    pub t_list_long: Option<Vec<f64>>,
    /// Variance floor inside R⁻¹.
    pub floor: Option<f64>,
    /// Transform tolerance.
    pub tol: Option<f64>,
    /// Samples per unit time for the discrete CLSE.
    pub n_subsample: Option<f64>,
    /// Include the long optional horizon rows.
    pub long: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
struct FullFileConfig {
    drift: crate::model::config::DriftSection,
    diffusion: crate::model::config::DiffusionSection,
    initial: crate::model::config::InitialSection,
    grid: crate::model::config::GridSection,
    #[serde(default)]
    experiment: ExperimentSection,
}

/// A fully resolved experiment: validated model, grid, knobs, output
/// location and provenance hash.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ValidatedModel,
    pub z0: State,
    pub grid: TimeGrid,
    pub replications: usize,
    pub seed: u64,
    pub kind: Option<String>,
    pub t_list: Vec<f64>,
    pub floor: f64,
    pub tol: f64,
    pub n_subsample: f64,
    pub long: bool,
    pub out_dir: PathBuf,
    pub config_hash: u64,
}

impl ExperimentConfig {
    pub fn from_text(
        text: &str,
        out_dir: PathBuf,
        seed_override: Option<u64>,
        long_flag: bool,
    ) -> Result<Self, BenchError> {
        let full: FullFileConfig = toml::from_str(text).map_err(ConfigError::Parse)?;
        let model_cfg = ModelFileConfig {
            drift: full.drift,
            diffusion: full.diffusion,
            initial: full.initial,
            grid: full.grid,
        };
        let model = model_cfg.validate_model()?;
        let grid = TimeGrid::new(full.grid.t_max, full.grid.dt)?;
        let seed = seed_override.unwrap_or(full.grid.seed);
        let exp = full.experiment;
        let mut hash_input = text.as_bytes().to_vec();
        hash_input.extend_from_slice(&seed.to_le_bytes());
        let long = long_flag || exp.long.unwrap_or(false);
        let mut t_list = exp.t_list.unwrap_or_else(|| vec![full.grid.t_max]);
        if long {
            t_list.extend(exp.t_list_long.unwrap_or_default());
        }
        Ok(ExperimentConfig {
            model,
            z0: model_cfg.initial_state(),
            grid,
            replications: full.grid.replications.max(1),
            seed,
            kind: exp.kind,
            t_list,
            floor: exp.floor.unwrap_or(1e-12),
            tol: exp.tol.unwrap_or(1e-8),
            n_subsample: exp.n_subsample.unwrap_or(10.0),
            long,
            out_dir,
            config_hash: fnv1a64(&hash_input),
        })
    }

    pub fn from_file(
        path: &FsPath,
        out_dir: PathBuf,
        seed_override: Option<u64>,
        long_flag: bool,
    ) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_text(&text, out_dir, seed_override, long_flag)
    }

    fn provenance(&self) -> String {
        format!("config_hash={:016x} seed={}", self.config_hash, self.seed)
    }

    fn write(&self, name: &str, content: &str) -> Result<PathBuf, BenchError> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, content)?;
        Ok(path)
    }
}

fn growth_name(g: &CoordGrowth) -> String {
    match g {
        CoordGrowth::Bounded => "bounded".to_string(),
        CoordGrowth::Polynomial(k) => format!("polynomial({k})"),
        CoordGrowth::Exponential(r) => format!("exponential({r})"),
    }
}

// ---------------------------------------------------------------------------
// Classification experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct ClassificationReport {
    pub config_hash: String,
    pub seed: u64,
    pub regime: String,
    pub growth: [String; 3],
    /// Fitted growth exponents on [T/2, T]: log-log slope for polynomial
    /// coordinates, semi-log slope for exponential ones, absent for bounded.
    pub fitted_exponent: [Option<f64>; 3],
    pub max_abs_z_score: f64,
    pub replications: usize,
}

pub struct ClassificationRun {
    pub label: RegimeLabel,
    pub report: ClassificationReport,
}

/// Ensemble mean of each coordinate with SE bands and the analytic overlay;
/// emits `classification.csv`, one SVG per coordinate and `report.json`, and
/// returns the regime label.
pub fn run_classification(cfg: &ExperimentConfig) -> Result<ClassificationRun, BenchError> {
    let label = classify(&cfg.model.drift);
    let stats = simulate_ensemble(&cfg.model, cfg.z0, &cfg.grid, cfg.replications, cfg.seed)?;
    let analytic = mean_trajectory(&cfg.model, cfg.z0, &cfg.grid);

    let mut csv = format!("# {}\n", cfg.provenance());
    csv.push_str("t,mean_y1,se_y1,mean_y2,se_y2,mean_x,se_x,analytic_y1,analytic_y2,analytic_x\n");
    for i in 0..=cfg.grid.n_steps {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            cfg.grid.time(i),
            stats.mean[i][0],
            stats.se[i][0],
            stats.mean[i][1],
            stats.se[i][1],
            stats.mean[i][2],
            stats.se[i][2],
            analytic[i][0],
            analytic[i][1],
            analytic[i][2],
        ));
    }
    cfg.write("classification.csv", &csv)?;

    let times: Vec<f64> = cfg.grid.times().collect();
    let coords = ["y1", "y2", "x"];
    for (k, name) in coords.iter().enumerate() {
        let mc: Vec<f64> = stats.mean.iter().map(|m| m[k]).collect();
        let lower: Vec<f64> = stats
            .mean
            .iter()
            .zip(&stats.se)
            .map(|(m, s)| m[k] - 2.0 * s[k])
            .collect();
        let upper: Vec<f64> = stats
            .mean
            .iter()
            .zip(&stats.se)
            .map(|(m, s)| m[k] + 2.0 * s[k])
            .collect();
        let exact: Vec<f64> = analytic.iter().map(|m| m[k]).collect();
        let chart = svg::line_chart(
            &format!("ensemble mean of {name} ({})", label.tag),
            "t",
            name,
            &cfg.provenance(),
            &[
                svg::Series {
                    label: "monte carlo mean",
                    xs: &times,
                    ys: &mc,
                    color: "steelblue",
                    dashed: false,
                },
                svg::Series {
                    label: "analytic mean",
                    xs: &times,
                    ys: &exact,
                    color: "firebrick",
                    dashed: true,
                },
            ],
            Some(&svg::Band {
                xs: &times,
                lower: &lower,
                upper: &upper,
                color: "steelblue",
            }),
        );
        cfg.write(&format!("{name}.svg"), &chart)?;
    }

    // Growth-exponent fits on the late window [T/2, T] of the MC mean.
    let growth = label.growth.coords();
    let mut fitted = [None, None, None];
    for k in 0..3 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, &t) in times.iter().enumerate() {
            if t < cfg.grid.t_max / 2.0 {
                continue;
            }
            let v = stats.mean[i][k].abs();
            if v <= 1e-12 {
                continue;
            }
            match growth[k] {
                CoordGrowth::Polynomial(_) => {
                    xs.push(t.ln());
                    ys.push(v.ln());
                }
                CoordGrowth::Exponential(_) => {
                    xs.push(t);
                    ys.push(v.ln());
                }
                CoordGrowth::Bounded => {}
            }
        }
        if xs.len() >= 8 {
            fitted[k] = Some(linear_fit(&xs, &ys).0);
        }
    }

    // Largest |MC − analytic| / SE over the grid (degenerate SEs skipped).
    let mut max_z = 0.0f64;
    for i in 0..=cfg.grid.n_steps {
        for k in 0..3 {
            if stats.se[i][k] > 0.0 {
                max_z = max_z.max((stats.mean[i][k] - analytic[i][k]).abs() / stats.se[i][k]);
            }
        }
    }

    let report = ClassificationReport {
        config_hash: format!("{:016x}", cfg.config_hash),
        seed: cfg.seed,
        regime: label.tag.to_string(),
        growth: [
            growth_name(&label.growth.y1),
            growth_name(&label.growth.y2),
            growth_name(&label.growth.x),
        ],
        fitted_exponent: fitted,
        max_abs_z_score: max_z,
        replications: cfg.replications,
    };
    cfg.write(
        "report.json",
        &serde_json::to_string_pretty(&report).expect("serializable"),
    )?;
    Ok(ClassificationRun { label, report })
}

// ---------------------------------------------------------------------------
// Estimation experiment
// ---------------------------------------------------------------------------

/// Mean absolute error per horizon and coordinate, with Monte Carlo standard
/// errors per cell.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorTable {
    pub t_values: Vec<f64>,
    /// mae[row][k] = mean over replications of |τ̂_k − τ_k|.
    pub mae: Vec<[f64; 9]>,
    /// Monte Carlo standard error of each cell.
    pub se: Vec<[f64; 9]>,
    pub replications: usize,
    pub failures: Vec<usize>,
}

/// Scaled errors √T(τ̂ − τ) for one horizon, raw and studentized by the
/// per-replication covariance estimate.
#[derive(Debug, Clone)]
pub struct ScaledErrors {
    pub t: f64,
    pub raw: [Vec<f64>; 9],
    pub studentized: [Vec<f64>; 9],
}

#[derive(Debug, Serialize)]
pub struct EstimationReport {
    pub config_hash: String,
    pub seed: u64,
    pub method: String,
    pub regime: String,
    pub tau_true: [f64; 9],
    pub coordinates: [&'static str; 9],
    pub table: ErrorTable,
    /// Normality diagnostics of the studentized scaled errors at the largest
    /// horizon.
    pub normality: Vec<NormalityReport>,
    pub feller_warning: bool,
    pub excluded_replications: usize,
    /// Distinct error messages of excluded replications (up to five).
    pub failure_reasons: Vec<String>,
}

pub struct EstimationRun {
    pub table: ErrorTable,
    pub scaled: Vec<ScaledErrors>,
    pub report: EstimationReport,
}

fn estimate_one(
    method: Method,
    path: &crate::sim::Path,
    model: &ValidatedModel,
    floor: f64,
    n_subsample: f64,
) -> Result<Estimate, EstimateError> {
    match method {
        Method::Mle => mle(path, &model.diffusion, floor),
        Method::ClseContinuous => clse_continuous(path, &model.diffusion),
        Method::ClseDiscrete => {
            let fit = clse_discrete(path, n_subsample)?;
            let tau_hat = clse_invert_link(&fit.tilde, n_subsample)?;
            let covariance = clse_sandwich_covariance(path, &model.diffusion)?;
            let feller_ok = tau_hat[0] >= 0.5 * model.diffusion.sigma11 * model.diffusion.sigma11
                && tau_hat[2] >= 0.5 * model.diffusion.sigma12 * model.diffusion.sigma12;
            Ok(Estimate {
                tau_hat,
                covariance,
                method: Method::ClseDiscrete,
                t: path.grid.t_max,
                diagnostics: Diagnostics {
                    condition: f64::NAN,
                    floor_clamp_count: 0,
                    feller_ok,
                },
            })
        }
    }
}

/// Monte Carlo error-table experiment: for every horizon in `t_list`, run
/// `replications` independent paths, estimate, and accumulate the
/// mean absolute error per coordinate plus all scaled errors √T(τ̂−τ).
/// Failed replications are excluded and counted; a failure rate above 5%
/// aborts the run. Deterministic under (config, seed) for any thread count.
pub fn run_estimation(cfg: &ExperimentConfig, method: Method) -> Result<EstimationRun, BenchError> {
    let tau_true = cfg.model.drift.to_vec();
    let mut table = ErrorTable {
        t_values: Vec::new(),
        mae: Vec::new(),
        se: Vec::new(),
        replications: cfg.replications,
        failures: Vec::new(),
    };
    let mut scaled_all = Vec::new();
    let mut excluded_total = 0usize;
    let mut failure_reasons: Vec<String> = Vec::new();
    let mut feller_warning = method == Method::Mle && !(cfg.model.feller_y1 && cfg.model.feller_y2);

    for (t_idx, &t) in cfg.t_list.iter().enumerate() {
        let grid = TimeGrid::new(t, cfg.grid.dt)?;
        let base_rep = (t_idx * cfg.replications) as u64;
        let results: Vec<Result<Estimate, String>> = (0..cfg.replications)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .flat_map_iter(|chunk| {
                chunk
                    .iter()
                    .map(|&rep| {
                        let path = simulate_path_with(
                            &cfg.model,
                            cfg.z0,
                            &grid,
                            cfg.seed,
                            base_rep + rep as u64,
                            AbsUnderSqrt::default(),
                        )
                        .map_err(|e| e.to_string())?;
                        estimate_one(method, &path, &cfg.model, cfg.floor, cfg.n_subsample)
                            .map_err(|e| e.to_string())
                    })
                    .collect::<Vec<_>>()
            })
            .collect();

        let mut abs_err_sum = [0.0f64; 9];
        let mut abs_err_sumsq = [0.0f64; 9];
        let mut raw: [Vec<f64>; 9] = Default::default();
        let mut studentized: [Vec<f64>; 9] = Default::default();
        let mut ok = 0usize;
        for est in results.iter().flatten() {
            ok += 1;
            if !est.diagnostics.feller_ok {
                feller_warning = true;
            }
            for k in 0..9 {
                let err = est.tau_hat[k] - tau_true[k];
                abs_err_sum[k] += err.abs();
                abs_err_sumsq[k] += err * err;
                let scaled_err = t.sqrt() * err;
                raw[k].push(scaled_err);
                let sd = est.covariance[k][k].max(1e-300).sqrt();
                studentized[k].push(scaled_err / sd);
            }
        }
        for err in results.iter().filter_map(|r| r.as_ref().err()) {
            if failure_reasons.len() < 5 && !failure_reasons.contains(err) {
                failure_reasons.push(err.clone());
            }
        }
        let failures = cfg.replications - ok;
        excluded_total += failures;
        if failures * 20 > cfg.replications {
            return Err(BenchError::TooManyFailures {
                failures,
                total: cfg.replications,
            });
        }
        let n = ok as f64;
        let mut mae = [0.0f64; 9];
        let mut se = [0.0f64; 9];
        for k in 0..9 {
            mae[k] = abs_err_sum[k] / n;
            let var = (abs_err_sumsq[k] / n - mae[k] * mae[k]).max(0.0);
            se[k] = (var / n).sqrt();
        }
        table.t_values.push(t);
        table.mae.push(mae);
        table.se.push(se);
        table.failures.push(failures);
        scaled_all.push(ScaledErrors {
            t,
            raw,
            studentized,
        });
    }

    // error_table.csv: one row per horizon, MAE then SE per coordinate.
    let mut csv = format!("# {}\n", cfg.provenance());
    csv.push('T');
    for name in TAU_NAMES {
        csv.push_str(&format!(",mae_{name}"));
    }
    for name in TAU_NAMES {
        csv.push_str(&format!(",se_{name}"));
    }
    csv.push_str(",replications,failures\n");
    for (row, &t) in table.t_values.iter().enumerate() {
        csv.push_str(&format!("{t}"));
        for k in 0..9 {
            csv.push_str(&format!(",{}", table.mae[row][k]));
        }
        for k in 0..9 {
            csv.push_str(&format!(",{}", table.se[row][k]));
        }
        csv.push_str(&format!(",{},{}\n", cfg.replications, table.failures[row]));
    }
    cfg.write("error_table.csv", &csv)?;

    // Raw scaled errors for histogramming: one file per horizon, with the
    // canonical scaled_errors.csv holding the largest horizon.
    let largest_idx = scaled_all
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.t.total_cmp(&b.1.t))
        .map(|(i, _)| i)
        .unwrap();
    for (idx, scaled) in scaled_all.iter().enumerate() {
        let mut csv = format!("# {}\n", cfg.provenance());
        csv.push_str("rep,coord,value\n");
        for k in 0..9 {
            for (rep, v) in scaled.raw[k].iter().enumerate() {
                csv.push_str(&format!("{rep},{},{v}\n", TAU_NAMES[k]));
            }
        }
        if idx == largest_idx {
            cfg.write("scaled_errors.csv", &csv)?;
        }
        if scaled_all.len() > 1 {
            cfg.write(&format!("scaled_errors_T{}.csv", scaled.t), &csv)?;
        }
    }

    // Histograms of the scaled errors at the largest horizon.
    for k in 0..9 {
        let samples = &scaled_all[largest_idx].raw[k];
        if samples.len() >= 10 {
            let chart = svg::histogram(
                &format!(
                    "scaled error sqrt(T)(estimate - true), {} at T={}",
                    TAU_NAMES[k], scaled_all[largest_idx].t
                ),
                TAU_NAMES[k],
                &cfg.provenance(),
                samples,
            );
            cfg.write(&format!("scaled_error_{}.svg", TAU_NAMES[k]), &chart)?;
        }
    }

    let normality: Vec<NormalityReport> = if scaled_all[largest_idx].studentized[0].len() >= 100 {
        (0..9)
            .map(|k| normality_diagnostics(&scaled_all[largest_idx].studentized[k]))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    let report = EstimationReport {
        config_hash: format!("{:016x}", cfg.config_hash),
        seed: cfg.seed,
        method: method.to_string(),
        regime: classify(&cfg.model.drift).tag.to_string(),
        tau_true,
        coordinates: TAU_NAMES,
        table: table.clone(),
        normality,
        feller_warning,
        excluded_replications: excluded_total,
        failure_reasons,
    };
    cfg.write(
        "report.json",
        &serde_json::to_string_pretty(&report).expect("serializable"),
    )?;

    Ok(EstimationRun {
        table,
        scaled: scaled_all,
        report,
    })
}

// ---------------------------------------------------------------------------
// Transform and ergodic experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct TransformRow {
    pub re: f64,
    pub im: f64,
    pub error_bound: f64,
    pub t_trunc: f64,
}

/// Evaluate the stationary transform at one argument; emits `transform.csv`
/// with a single `re,im,error_bound,t_trunc` row and returns it.
pub fn run_transform(
    cfg: &ExperimentConfig,
    arg: &TransformArg,
) -> Result<TransformRow, BenchError> {
    let value = stationary_transform(arg, &cfg.model, cfg.tol)?;
    let row = TransformRow {
        re: value.value.re,
        im: value.value.im,
        error_bound: value.error_bound,
        t_trunc: value.t_trunc,
    };
    let csv = format!(
        "# {}\nre,im,error_bound,t_trunc\n{},{},{},{}\n",
        cfg.provenance(),
        row.re,
        row.im,
        row.error_bound,
        row.t_trunc
    );
    cfg.write("transform.csv", &csv)?;
    Ok(row)
}

#[derive(Debug, Serialize)]
pub struct ErgodicReport {
    pub config_hash: String,
    pub seed: u64,
    pub t_max: f64,
    pub time_average: [f64; 3],
    pub stationary_mean: [f64; 3],
    pub abs_deviation: [f64; 3],
    /// The ergodic theory needs a2 > σ12²/2; outside that range the check is
    /// still run but flagged.
    pub hypothesis_warning: bool,
}

/// Single-path time averages of (y1, y2, x) against the stationary mean;
/// emits `ergodic.csv` and `report.json`.
pub fn run_ergodic(cfg: &ExperimentConfig) -> Result<ErgodicReport, BenchError> {
    let sm = stationary_mean(&cfg.model)?;
    let path = simulate_path_with(
        &cfg.model,
        cfg.z0,
        &cfg.grid,
        cfg.seed,
        0,
        AbsUnderSqrt::default(),
    )?;
    let avg = [
        crate::riccati::ergodic_average(&path, |z| z.y1),
        crate::riccati::ergodic_average(&path, |z| z.y2),
        crate::riccati::ergodic_average(&path, |z| z.x),
    ];
    let dev = [
        (avg[0] - sm[0]).abs(),
        (avg[1] - sm[1]).abs(),
        (avg[2] - sm[2]).abs(),
    ];
    let q = cfg.model.diffusion;
    let hypothesis_warning =
        !(cfg.model.drift.a2 > 0.5 * q.sigma12 * q.sigma12 && cfg.model.drift.a1 > 0.0);

    let mut csv = format!("# {}\n", cfg.provenance());
    csv.push_str("quantity,time_average,stationary_mean,abs_deviation\n");
    for (k, name) in ["y1", "y2", "x"].iter().enumerate() {
        csv.push_str(&format!("{name},{},{},{}\n", avg[k], sm[k], dev[k]));
    }
    cfg.write("ergodic.csv", &csv)?;

    let report = ErgodicReport {
        config_hash: format!("{:016x}", cfg.config_hash),
        seed: cfg.seed,
        t_max: cfg.grid.t_max,
        time_average: avg,
        stationary_mean: sm,
        abs_deviation: dev,
        hypothesis_warning,
    };
    cfg.write(
        "report.json",
        &serde_json::to_string_pretty(&report).expect("serializable"),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_text(t_max: f64, dt: f64, reps: usize, seed: u64, extra: &str) -> String {
        format!(
            r#"
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
t_max = {t_max}
dt = {dt}
seed = {seed}
replications = {reps}
{extra}
"#
        )
    }

    #[test]
    fn classification_run_produces_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_text(
            &config_text(5.0, 0.1, 32, 7, ""),
            dir.path().to_path_buf(),
            None,
            false,
        )
        .unwrap();
        let run = run_classification(&cfg).unwrap();
        assert_eq!(run.report.regime, "subcritical");
        for file in [
            "classification.csv",
            "y1.svg",
            "y2.svg",
            "x.svg",
            "report.json",
        ] {
            assert!(dir.path().join(file).exists(), "{file} missing");
        }
        let csv = std::fs::read_to_string(dir.path().join("classification.csv")).unwrap();
        assert!(csv.starts_with("# config_hash="));
        assert!(csv.lines().nth(1).unwrap().starts_with("t,mean_y1,se_y1"));
    }

    #[test]
    fn estimation_run_is_deterministic_and_writes_tables() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let text = config_text(20.0, 0.1, 24, 11, "\n[experiment]\nt_list = [10.0, 20.0]\n");
        let cfg_a =
            ExperimentConfig::from_text(&text, dir_a.path().to_path_buf(), None, false).unwrap();
        let cfg_b =
            ExperimentConfig::from_text(&text, dir_b.path().to_path_buf(), None, false).unwrap();
        let run_a = run_estimation(&cfg_a, Method::Mle).unwrap();
        let run_b = run_estimation(&cfg_b, Method::Mle).unwrap();
        assert_eq!(run_a.table.failures, vec![0, 0]);
        assert!(run_a.table.mae[1][0] > 0.0);
        for file in ["error_table.csv", "scaled_errors.csv", "report.json"] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
        assert!(dir_a.path().join("scaled_errors_T10.csv").exists());
        assert!(dir_a.path().join("scaled_errors_T20.csv").exists());
        // Errors at the longer horizon are mostly smaller.
        let better = (0..9)
            .filter(|&k| run_a.table.mae[1][k] <= run_a.table.mae[0][k])
            .count();
        assert!(better >= 5, "only {better} coordinates improved");
        let _ = run_b;
    }

    #[test]
    fn transform_and_ergodic_runs_write_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_text(
            &config_text(100.0, 0.1, 1, 3, ""),
            dir.path().to_path_buf(),
            None,
            false,
        )
        .unwrap();
        let row = run_transform(&cfg, &TransformArg::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(row.re, 1.0);
        assert_eq!(row.im, 0.0);
        let report = run_ergodic(&cfg).unwrap();
        assert!(!report.hypothesis_warning);
        assert!(dir.path().join("transform.csv").exists());
        assert!(dir.path().join("ergodic.csv").exists());
    }

    #[test]
    fn seed_override_changes_hash_and_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let text = config_text(5.0, 0.1, 4, 7, "");
        let a = ExperimentConfig::from_text(&text, dir.path().to_path_buf(), None, false).unwrap();
        let b =
            ExperimentConfig::from_text(&text, dir.path().to_path_buf(), Some(8), false).unwrap();
        assert_ne!(a.config_hash, b.config_hash);
        assert_eq!(b.seed, 8);
    }
}
