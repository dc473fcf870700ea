//! Thin CLI over the rssloc library: each subcommand is one pipeline
//! stage, reading and writing the same JSON/CSV artifacts the library
//! functions use directly.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rssloc::{
    evaluate, fit_ls, generate_synthetic, pool_fit_input, run_preset, split, Dataset,
    Estimator, MleConfig, MlpArch, MlpModel, PlmParams, Preset, Scenario, SplitSpec,
    SuSelection, TrackSpec, TrainConfig,
};

#[derive(Parser)]
#[command(name = "rssloc", version, about = "RSS-based indoor localization pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate RSS observations along a transmitter track.
    Generate {
        /// Scenario JSON (area bounds, sensing units, heights).
        #[arg(long)]
        scenario: PathBuf,
        /// Path-loss parameters JSON (p0, beta, sigma2_db, d_cor).
        #[arg(long)]
        params: PathBuf,
        /// Track recipe JSON (x_start, x_end, step, y_lanes).
        #[arg(long)]
        track: PathBuf,
        /// Shadowing seed; a fixed seed reproduces the dataset byte for byte.
        #[arg(long)]
        seed: u64,
        /// Output dataset CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit path-loss parameters to a labeled dataset by least squares.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Output fit JSON (estimates and residuals).
        #[arg(long)]
        out: PathBuf,
        /// Fit a single sensing unit by index.
        #[arg(long, conflicts_with = "pooled")]
        su: Option<usize>,
        /// Pool every sensing unit into one fit (the default).
        #[arg(long)]
        pooled: bool,
    },
    /// Train the neural localizer on a labeled dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Training JSON: optimizer settings plus optional hidden_layers,
        /// hidden_units, elu_alpha. Missing fields use the built-in defaults.
        #[arg(long)]
        config: PathBuf,
        /// Training seed (initialization, validation split, batch order).
        #[arg(long)]
        seed: u64,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an estimator over a labeled test set and report error statistics.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        /// Trained model file (required for dnn).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Grid-search configuration JSON (required for mle).
        #[arg(long = "mle-config")]
        mle_config: Option<PathBuf>,
        /// Output report JSON.
        #[arg(long)]
        out: PathBuf,
        /// Also write the error CDF as a two-column CSV.
        #[arg(long = "cdf-csv")]
        cdf_csv: Option<PathBuf>,
        /// Score in-plane (x, y) error instead of 3D error.
        #[arg(long)]
        planar: bool,
    },
    /// Shuffle a dataset and split it into train and test CSVs.
    Split {
        #[arg(long)]
        data: PathBuf,
        /// Fraction of samples assigned to the training set, in (0, 1).
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long = "out-train")]
        out_train: PathBuf,
        #[arg(long = "out-test")]
        out_test: PathBuf,
    },
    /// Run a full generate/fit/train/evaluate pipeline preset.
    Reproduce {
        /// Preset name: paper-synthetic or smoke.
        #[arg(long)]
        preset: String,
        #[arg(long)]
        seed: u64,
        /// Directory for all artifacts (created if absent).
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Proximity,
    Mle,
    Dnn,
}

/// On-disk training file: optimizer settings plus optional architecture
/// overrides. Unlisted fields fall back to the built-in defaults.
#[derive(Deserialize, Default)]
#[serde(default)]
struct TrainFile {
    hidden_layers: Option<usize>,
    hidden_units: Option<usize>,
    elu_alpha: Option<f64>,
    #[serde(flatten)]
    config: TrainConfig,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate { scenario, params, track, seed, out } => {
            let scenario = Scenario::load(&scenario)?;
            let params = PlmParams::load(&params)?;
            let track = TrackSpec::load(&track)?.build(&scenario)?;
            let data = generate_synthetic(
                &scenario,
                &params,
                &track,
                &mut rssloc::rng::from_seed(seed),
            )?;
            data.save_csv(&out)?;
            println!(
                "wrote {} samples x {} sensing units to {}",
                data.len(),
                data.n_sensors(),
                out.display()
            );
        }
        Command::Fit { data, scenario, out, su, pooled: _ } => {
            let scenario = Scenario::load(&scenario)?;
            let data = Dataset::load_csv(&data, Some(scenario.n_sensing_units()))?;
            let selection = match su {
                Some(k) => SuSelection::One(k),
                None => SuSelection::All,
            };
            let fit = fit_ls(&pool_fit_input(&data, &scenario, selection)?)?;
            let text = serde_json::to_string_pretty(&fit).expect("fit serializes");
            std::fs::write(&out, text)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "p0_hat = {:.4} dBm, beta_hat = {:.4}, sigma2_hat = {:.4} dB^2 ({} rows) -> {}",
                fit.p0_hat,
                fit.beta_hat,
                fit.sigma2_hat,
                fit.residuals.len(),
                out.display()
            );
        }
        Command::Train { data, scenario, config, seed, out } => {
            let scenario = Scenario::load(&scenario)?;
            let data = Dataset::load_csv(&data, Some(scenario.n_sensing_units()))?;
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let file: TrainFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            let arch = MlpArch {
                input_dim: scenario.n_sensing_units(),
                hidden_layers: file.hidden_layers.unwrap_or(3),
                hidden_units: file.hidden_units.unwrap_or(128),
                output_dim: 2,
                elu_alpha: file.elu_alpha.unwrap_or(1.0),
            };
            let mut train_config = file.config;
            train_config.seed = seed;
            let (model, log) = rssloc::train(&data, &arch, &train_config)?;
            model.save(&out)?;
            match (log.best_epoch, log.best_val_loss) {
                (Some(epoch), Some(loss)) => println!(
                    "trained {} epochs, best validation loss {loss:.6} at epoch {epoch} -> {}",
                    log.epochs_run,
                    out.display()
                ),
                _ => println!(
                    "trained {} epochs (no validation split) -> {}",
                    log.epochs_run,
                    out.display()
                ),
            }
        }
        Command::Evaluate {
            data,
            scenario,
            estimator,
            model,
            mle_config,
            out,
            cdf_csv,
            planar,
        } => {
            // Flag validation precedes any file access: a missing flag is
            // a usage error even when the inputs are also bad.
            match estimator {
                EstimatorArg::Mle if mle_config.is_none() => {
                    bail!("--estimator mle needs --mle-config");
                }
                EstimatorArg::Dnn if model.is_none() => {
                    bail!("--estimator dnn needs --model");
                }
                _ => {}
            }
            let scenario = Scenario::load(&scenario)?;
            let data = Dataset::load_csv(&data, Some(scenario.n_sensing_units()))?;
            let loaded_model;
            let loaded_config;
            let estimator = match estimator {
                EstimatorArg::Proximity => Estimator::Proximity,
                EstimatorArg::Mle => {
                    loaded_config = MleConfig::load(&mle_config.unwrap())?;
                    Estimator::Mle(&loaded_config)
                }
                EstimatorArg::Dnn => {
                    loaded_model = MlpModel::load(&model.unwrap())?;
                    Estimator::Dnn(&loaded_model)
                }
            };
            let report = evaluate(estimator, &scenario, &data, planar)?;
            report.save(&out)?;
            if let Some(path) = &cdf_csv {
                report.save_cdf_csv(path)?;
            }
            println!(
                "{}: mean {:.3} m, std {:.3} m, min {:.3} m, max {:.3} m over {} samples ({} failures) -> {}",
                report.estimator,
                report.mean,
                report.std,
                report.min,
                report.max,
                report.n_samples,
                report.n_failures,
                out.display()
            );
        }
        Command::Split { data, fraction, seed, out_train, out_test } => {
            let data = Dataset::load_csv(&data, None)?;
            let spec = SplitSpec { train_fraction: fraction, shuffle_seed: seed };
            let (train_set, test_set) = split(&data, &spec)?;
            train_set.save_csv(&out_train)?;
            test_set.save_csv(&out_test)?;
            println!(
                "split {} samples into {} train ({}) and {} test ({})",
                data.len(),
                train_set.len(),
                out_train.display(),
                test_set.len(),
                out_test.display()
            );
        }
        Command::Reproduce { preset, seed, out_dir } => {
            let preset = Preset::from_name(&preset)?;
            println!("running preset {} with seed {seed}...", preset.name());
            let out = run_preset(preset, seed, &out_dir)?;
            let s = &out.summary;
            println!(
                "generated {} samples, split {} train / {} test",
                s.n_samples, s.n_train, s.n_test
            );
            println!(
                "pooled fit: p0_hat = {:.4} dBm, beta_hat = {:.4}, sigma2_hat = {:.4} dB^2",
                s.fitted_p0, s.fitted_beta, s.fitted_sigma2
            );
            println!("training ran {} epochs", s.train_epochs_run);
            println!("mean localization error (m):");
            println!("  proximity  {:.3}", s.mean_error_proximity_m);
            println!("  mle        {:.3}", s.mean_error_mle_m);
            println!("  dnn        {:.3}", s.mean_error_dnn_m);
            println!("artifacts written to {}", out_dir.display());
        }
    }
    Ok(())
}
