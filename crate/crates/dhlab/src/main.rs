//! `dhlab` — reproducible experiments on the two-factor stochastic
//! volatility diffusion: regime classification figures, drift-estimator
//! error tables, stationary transform evaluation and ergodic-average checks.

use clap::{Args, Parser, Subcommand};
use dhlab::bench::{
    run_classification, run_ergodic, run_estimation, run_transform, BenchError, ExperimentConfig,
};
use dhlab::estimate::{
    clse_continuous, clse_discrete, clse_invert_link, clse_sandwich_covariance, mle, Estimate,
    Method,
};
use dhlab::model::config::ModelFileConfig;
use dhlab::model::TAU_NAMES;
use dhlab::riccati::TransformArg;
use dhlab::sim::{simulate_path_with, AbsUnderSqrt, Path as SimPath};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dhlab",
    version,
    about = "double-factor volatility model laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Run configuration (key = value sections [drift], [diffusion],
    /// [initial], [grid], optional [experiment]).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble-mean classification figures with the analytic overlay.
    Classify {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Drift estimation: Monte Carlo error tables from a config, or a single
    /// path file via --input.
    Estimate {
        #[command(flatten)]
        common: CommonOpts,
        /// mle | clse | clse-discrete
        #[arg(long, default_value = "mle")]
        method: String,
        /// Estimate from one path CSV (written by `simulate`) instead of
        /// running the Monte Carlo table experiment.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Config providing the diffusion parameters for --input mode
        /// (defaults to --config).
        #[arg(long)]
        diffusion: Option<PathBuf>,
        /// Samples per unit time for the discrete CLSE in --input mode.
        #[arg(long, default_value_t = 10.0)]
        n_subsample: f64,
        /// Include the optional long horizons.
        #[arg(long)]
        long: bool,
    },
    /// Stationary Fourier-Laplace transform at one argument.
    Transform {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 0.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda2: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Single-path time averages against the stationary mean.
    Ergodic {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Simulate one path and dump it as CSV (`t,y1,y2,x,dB1,dB2,dW1,dW2`).
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Output file; defaults to <out>/path.csv.
        #[arg(long)]
        path_out: Option<PathBuf>,
        /// Square-root convention for the price row: y-only | all.
        #[arg(long, default_value = "y-only")]
        abs_under_sqrt: String,
    },
}

fn install_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "mle" => Ok(Method::Mle),
        "clse" => Ok(Method::ClseContinuous),
        "clse-discrete" => Ok(Method::ClseDiscrete),
        other => Err(format!(
            "unknown method {other:?}; expected mle | clse | clse-discrete"
        )),
    }
}

fn print_estimate(est: &Estimate, sidecar: &std::path::Path) -> std::io::Result<()> {
    let mut diag = String::new();
    diag.push_str(&format!("method={}\n", est.method));
    diag.push_str(&format!("t={}\n", est.t));
    for (k, name) in TAU_NAMES.iter().enumerate() {
        diag.push_str(&format!("tau_{name}={}\n", est.tau_hat[k]));
    }
    diag.push_str(&format!("condition={}\n", est.diagnostics.condition));
    diag.push_str(&format!(
        "floor_clamp_count={}\n",
        est.diagnostics.floor_clamp_count
    ));
    diag.push_str(&format!("feller_ok={}\n", est.diagnostics.feller_ok));
    std::fs::write(sidecar, diag)?;

    // τ̂ as one CSV row, then the covariance row-major. Written after the
    // sidecar so a truncated stdout pipe cannot lose the diagnostics.
    let tau: Vec<String> = est.tau_hat.iter().map(|v| v.to_string()).collect();
    println!("{}", tau.join(","));
    for row in &est.covariance {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        println!("{}", fields.join(","));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Classify { common } => {
            install_threads(common.threads);
            let cfg = ExperimentConfig::from_file(&common.config, common.out, common.seed, false)?;
            let run = run_classification(&cfg)?;
            println!(
                "regime: {} (growth: y1 {}, y2 {}, x {})",
                run.report.regime, run.report.growth[0], run.report.growth[1], run.report.growth[2]
            );
            Ok(())
        }
        Command::Estimate {
            common,
            method,
            input,
            diffusion,
            n_subsample,
            long,
        } => {
            install_threads(common.threads);
            let method = parse_method(&method).map_err(|e| {
                BenchError::Io(std::io::Error::new(std::io::ErrorKind::InvalidInput, e))
            })?;
            if let Some(input) = input {
                // Single-path mode: τ̂ and covariance to stdout, diagnostics
                // to a sidecar file.
                let diff_path = diffusion.as_ref().unwrap_or(&common.config);
                let text = std::fs::read_to_string(diff_path)
                    .map_err(dhlab::model::config::ConfigError::Io)?;
                let model_cfg = ModelFileConfig::from_toml_str(&text)?;
                let model = model_cfg.validate_model()?;
                let csv = std::fs::read_to_string(&input)?;
                let path = SimPath::from_csv(&csv, model_cfg.grid.seed)?;
                let est = match method {
                    Method::Mle => mle(&path, &model.diffusion, 1e-12)?,
                    Method::ClseContinuous => clse_continuous(&path, &model.diffusion)?,
                    Method::ClseDiscrete => {
                        let fit = clse_discrete(&path, n_subsample)?;
                        let tau_hat = clse_invert_link(&fit.tilde, n_subsample)?;
                        Estimate {
                            tau_hat,
                            covariance: clse_sandwich_covariance(&path, &model.diffusion)?,
                            method: Method::ClseDiscrete,
                            t: path.grid.t_max,
                            diagnostics: dhlab::estimate::Diagnostics {
                                condition: f64::NAN,
                                floor_clamp_count: 0,
                                feller_ok: true,
                            },
                        }
                    }
                };
                if !est.diagnostics.feller_ok {
                    eprintln!(
                        "warning: fitted levels violate the Feller conditions; \
                         likelihood theory may not apply"
                    );
                }
                std::fs::create_dir_all(&common.out)?;
                let sidecar = common.out.join("diagnostics.txt");
                print_estimate(&est, &sidecar)?;
                Ok(())
            } else {
                let cfg =
                    ExperimentConfig::from_file(&common.config, common.out, common.seed, long)?;
                let run = run_estimation(&cfg, method)?;
                if run.report.feller_warning {
                    eprintln!("warning: Feller conditions violated; MLE theory may not apply");
                }
                for (row, t) in run.table.t_values.iter().enumerate() {
                    let mae: Vec<String> = run.table.mae[row]
                        .iter()
                        .map(|v| format!("{v:.4}"))
                        .collect();
                    println!("T={t}: mae = [{}]", mae.join(", "));
                }
                Ok(())
            }
        }
        Command::Transform {
            common,
            lambda1,
            lambda2,
            mu,
            tol,
        } => {
            install_threads(common.threads);
            let mut cfg =
                ExperimentConfig::from_file(&common.config, common.out, common.seed, false)?;
            if let Some(tol) = tol {
                cfg.tol = tol;
            }
            let row = run_transform(&cfg, &TransformArg::new(lambda1, lambda2, mu))?;
            println!("{},{},{},{}", row.re, row.im, row.error_bound, row.t_trunc);
            Ok(())
        }
        Command::Ergodic { common } => {
            install_threads(common.threads);
            let cfg = ExperimentConfig::from_file(&common.config, common.out, common.seed, false)?;
            let report = run_ergodic(&cfg)?;
            if report.hypothesis_warning {
                eprintln!("warning: a2 ≤ σ12²/2 or a1 = 0; ergodic theory may not apply");
            }
            for (k, name) in ["y1", "y2", "x"].iter().enumerate() {
                println!(
                    "{name}: time average {} vs stationary {} (|diff| {})",
                    report.time_average[k], report.stationary_mean[k], report.abs_deviation[k]
                );
            }
            Ok(())
        }
        Command::Simulate {
            common,
            path_out,
            abs_under_sqrt,
        } => {
            install_threads(common.threads);
            let cfg = ExperimentConfig::from_file(&common.config, common.out, common.seed, false)?;
            let mode = match abs_under_sqrt.as_str() {
                "y-only" => AbsUnderSqrt::YOnly,
                "all" => AbsUnderSqrt::All,
                other => {
                    return Err(BenchError::Io(std::io::Error::new(
                        std::io::ErrorKind::InvalidInput,
                        format!("unknown abs-under-sqrt mode {other:?}"),
                    )))
                }
            };
            let path = simulate_path_with(&cfg.model, cfg.z0, &cfg.grid, cfg.seed, 0, mode)?;
            let out = path_out.unwrap_or_else(|| cfg.out_dir.join("path.csv"));
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&out, path.to_csv())?;
            println!(
                "wrote {} ({} steps, clamp fraction {:.2e})",
                out.display(),
                path.grid.n_steps,
                path.clamp_fraction()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
