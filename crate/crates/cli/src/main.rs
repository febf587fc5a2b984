//! `boostcal`: train boosted ensembles, calibrate their scores, and emit
//! reproducible metric tables and diagram data.
//!
//! Every command is deterministic in its flags: rerunning with the same
//! arguments and seed produces byte-identical output files. Failures print
//! a machine-readable JSON object on stderr and exit nonzero.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use boostcal_core::boost::{boost_train, BaseSpec, BoostConfig, Loss};
use boostcal_core::bundle::{CalibrationMethod, CalibratorKind, ModelBundle};
use boostcal_core::calib::{
    cv_calibration_scores, pav_fit, platt_fit, train_set_scores, SigmoidCalibrator,
};
use boostcal_core::dataset::{
    load_dataset, DataFormat, Dataset, LabelColumn, LabelPolicy, LoadOptions,
};
use boostcal_core::error::Error;
use boostcal_core::harness::{
    run_calibration_experiment, run_learning_curve, ExperimentConfig, ExperimentReport,
    MetricsRow, SelectionMetric,
};
use boostcal_core::metrics::{
    brier_score, cross_entropy, prediction_histogram, reliability_diagram, roc_auc,
};

#[derive(Parser)]
#[command(
    name = "boostcal",
    about = "Boosted ensembles with calibrated probabilities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Libsvm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    Stump,
    Tree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LossArg {
    Exp,
    Log,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    None,
    Logistic,
    Platt,
    Isotonic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    CrossEntropy,
    Brier,
}

/// Flags shared by every data-loading command.
#[derive(Args)]
struct DataArgs {
    /// Input data file
    #[arg(long)]
    data: PathBuf,
    /// Input format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Label column: header name or 0-based index (CSV only)
    #[arg(long, default_value = "label")]
    label: String,
    /// Raw label(s) mapped to the positive class, comma separated
    #[arg(long)]
    positive: Option<String>,
    /// Map the most frequent class to positive (multiclass collapse)
    #[arg(long, default_value_t = false)]
    largest_positive: bool,
    /// Feature count override (LIBSVM only)
    #[arg(long)]
    n_features: Option<usize>,
}

/// Flags describing the boosting configuration.
#[derive(Args)]
struct BoostArgs {
    /// Base learner
    #[arg(long, value_enum, default_value = "stump")]
    base: BaseArg,
    /// Tree depth (used when --base tree)
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Training loss
    #[arg(long, value_enum, default_value = "exp")]
    loss: LossArg,
    /// Boosting-round grid, comma separated, strictly increasing
    #[arg(long, default_value = "2,4,8,16,32,64,128,256,512,1024")]
    rounds: String,
}

#[derive(Subcommand)]
enum Command {
    /// Train a boosted ensemble on the full input file
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        boost: BoostArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit a calibrator for an existing model
    Calibrate {
        #[command(flatten)]
        data: DataArgs,
        /// Trained model file
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "platt")]
        method: MethodArg,
        /// Cross-validation folds for the calibration set
        #[arg(long, default_value_t = 3)]
        folds: usize,
        /// Score the data with the trained ensemble instead of
        /// cross-validated fold models (biased when the data is the
        /// training set)
        #[arg(long, default_value_t = false)]
        train_scores: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Emit per-row scores and probabilities for a model
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Score a model's probabilities against labeled data
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Probability clip for cross-entropy
        #[arg(long, default_value_t = 1e-6)]
        clip_eps: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Emit reliability-diagram and prediction-histogram tables
    Reliability {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Reliability bins
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Histogram bins
        #[arg(long, default_value_t = 20)]
        hist_bins: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the full train/calibrate/select/evaluate comparison
    Experiment {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        boost: BoostArgs,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of rows used for boosting and calibration
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        /// Validation rows for iteration selection (default: half the
        /// non-train remainder)
        #[arg(long)]
        val_size: Option<usize>,
        /// Metric minimized when selecting the iteration count
        #[arg(long, value_enum, default_value = "cross-entropy")]
        select_on: MetricArg,
        #[arg(long, default_value_t = 1e-6)]
        clip_eps: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sweep calibration-set sizes and report test Brier per method
    LearningCurve {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        boost: BoostArgs,
        /// Calibration-set sizes, comma separated
        #[arg(long, default_value = "32,64,128,256,512,1024,2048,4096,8192")]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        let payload = serde_json::json!({
            "error": { "kind": e.kind(), "message": e.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|tok| {
            tok.trim().parse::<usize>().map_err(|_| Error::Config {
                message: format!("cannot parse {what} entry {tok:?}"),
            })
        })
        .collect()
}

fn load(data: &DataArgs) -> Result<Dataset, Error> {
    let format = match data.format {
        FormatArg::Csv => DataFormat::Csv,
        FormatArg::Libsvm => DataFormat::Libsvm,
    };
    let label_column = match data.label.parse::<usize>() {
        Ok(idx) => LabelColumn::Index(idx),
        Err(_) => LabelColumn::Name(data.label.clone()),
    };
    let label_policy = if let Some(set) = &data.positive {
        LabelPolicy::Positive(set.split(',').map(|s| s.trim().to_string()).collect())
    } else if data.largest_positive {
        LabelPolicy::LargestClassPositive
    } else {
        LabelPolicy::Auto
    };
    let options = LoadOptions { label_column, label_policy, n_features: data.n_features };
    load_dataset(&data.data, format, &options)
}

fn boost_config(boost: &BoostArgs) -> Result<(BoostConfig, Vec<usize>), Error> {
    let grid = parse_usize_list(&boost.rounds, "rounds")?;
    if grid.is_empty() {
        return Err(Error::Config { message: "empty rounds list".into() });
    }
    let base = match boost.base {
        BaseArg::Stump => BaseSpec::Stump,
        BaseArg::Tree => BaseSpec::Tree { max_depth: boost.depth },
    };
    let loss = match boost.loss {
        LossArg::Exp => Loss::Exponential,
        LossArg::Log => Loss::LogLoss,
    };
    let t_max = *grid.iter().max().expect("non-empty grid");
    Ok((BoostConfig::new(t_max, loss, base), grid))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)?;
    write_file(dir, name, &(json + "\n"))?;
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Train { data, boost, seed, out } => {
            let d = load(&data)?;
            let (cfg, _grid) = boost_config(&boost)?;
            let ensemble = boost_train(&d, &cfg)?;
            println!(
                "trained {} rounds ({} requested){}",
                ensemble.rounds(),
                cfg.rounds,
                match ensemble.early_stop {
                    Some(_) => ", early stop",
                    None => "",
                }
            );
            let bundle = ModelBundle::new(ensemble, None, CalibrationMethod::None, cfg, seed)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("model.json");
            bundle.save(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Calibrate { data, model, method, folds, train_scores, seed, out } => {
            let d = load(&data)?;
            let bundle = ModelBundle::load(&model)?;
            let cfg = bundle.metadata.config;
            let (calibrator, method) = match method {
                MethodArg::None => (None, CalibrationMethod::None),
                MethodArg::Logistic => (
                    Some(CalibratorKind::Sigmoid(SigmoidCalibrator::logistic_correction())),
                    CalibrationMethod::Logistic,
                ),
                MethodArg::Platt | MethodArg::Isotonic => {
                    let set = if train_scores {
                        train_set_scores(&d, &bundle.ensemble)?
                    } else {
                        cv_calibration_scores(&d, &cfg, folds, seed)?
                    };
                    if method == MethodArg::Platt {
                        let fitres = platt_fit(&set)?;
                        if !fitres.converged {
                            eprintln!("warning: sigmoid fit hit the iteration cap");
                        }
                        println!(
                            "fitted sigmoid A={} B={} ({} points)",
                            fitres.calibrator.a,
                            fitres.calibrator.b,
                            set.len()
                        );
                        (
                            Some(CalibratorKind::Sigmoid(fitres.calibrator)),
                            CalibrationMethod::Platt,
                        )
                    } else {
                        let cal = pav_fit(&set)?;
                        println!("fitted isotonic step with {} blocks", cal.n_blocks());
                        (Some(CalibratorKind::Isotonic(cal)), CalibrationMethod::Isotonic)
                    }
                }
            };
            let new_bundle =
                ModelBundle::new(bundle.ensemble, calibrator, method, cfg, seed)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("model.json");
            new_bundle.save(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Predict { data, model, out } => {
            let d = load(&data)?;
            let bundle = ModelBundle::load(&model)?;
            let mut csv = String::from("row,raw_score,normalized_score,probability\n");
            for i in 0..d.n_rows() {
                let raw = bundle.ensemble.raw_score(d.row(i))?;
                let f = bundle.ensemble.normalized_score(d.row(i))?;
                let p = bundle.probability(d.row(i))?;
                let _ = writeln!(csv, "{i},{raw},{f},{p}");
            }
            write_file(&out, "predictions.csv", &csv)?;
            Ok(())
        }
        Command::Evaluate { data, model, clip_eps, out } => {
            let d = load(&data)?;
            let bundle = ModelBundle::load(&model)?;
            let probs = bundle.probabilities(&d)?;
            let row = MetricsRow {
                dataset: d.name().to_string(),
                base: bundle.ensemble.base.as_str(),
                loss: bundle.ensemble.loss.as_str().to_string(),
                method: bundle.metadata.method.as_str().to_string(),
                rounds: Some(bundle.ensemble.rounds()),
                brier: Some(brier_score(&probs, d.labels())?),
                cross_entropy: Some(cross_entropy(&probs, d.labels(), clip_eps)?),
                auc: Some(roc_auc(&probs, d.labels())?),
                status: "ok".to_string(),
            };
            let report = ExperimentReport { rows: vec![row] };
            write_file(&out, "metrics.csv", &report.to_csv())?;
            write_json(&out, "metrics.json", &report)?;
            Ok(())
        }
        Command::Reliability { data, model, bins, hist_bins, out } => {
            let d = load(&data)?;
            let bundle = ModelBundle::load(&model)?;
            let probs = bundle.probabilities(&d)?;
            let diagram = reliability_diagram(&probs, d.labels(), bins)?;
            let histogram = prediction_histogram(&probs, hist_bins)?;
            write_file(&out, "reliability.csv", &diagram.to_csv())?;
            write_json(&out, "reliability.json", &diagram)?;
            write_file(&out, "histogram.csv", &histogram.to_csv())?;
            write_json(&out, "histogram.json", &histogram)?;
            Ok(())
        }
        Command::Experiment {
            data,
            boost,
            folds,
            seed,
            train_fraction,
            val_size,
            select_on,
            clip_eps,
            out,
        } => {
            let d = load(&data)?;
            let (cfg, grid) = boost_config(&boost)?;
            let mut exp = ExperimentConfig::new(cfg.base, cfg.loss, grid, seed);
            exp.folds = folds;
            exp.train_fraction = train_fraction;
            exp.validation_size = val_size;
            exp.clip_eps = clip_eps;
            exp.selection_metric = match select_on {
                MetricArg::CrossEntropy => SelectionMetric::CrossEntropy,
                MetricArg::Brier => SelectionMetric::Brier,
            };
            let report = run_calibration_experiment(&d, &exp)?;
            write_file(&out, "metrics.csv", &report.to_csv())?;
            write_json(&out, "metrics.json", &report)?;
            Ok(())
        }
        Command::LearningCurve {
            data,
            boost,
            sizes,
            trials,
            train_fraction,
            seed,
            out,
        } => {
            let d = load(&data)?;
            let (cfg, grid) = boost_config(&boost)?;
            let mut exp = ExperimentConfig::new(cfg.base, cfg.loss, grid, seed);
            exp.trials = trials;
            exp.train_fraction = train_fraction;
            exp.calibration_sizes = parse_usize_list(&sizes, "sizes")?;
            let report = run_learning_curve(&d, &exp)?;
            write_file(&out, "curve.csv", &report.to_csv())?;
            write_json(&out, "curve.json", &report)?;
            Ok(())
        }
    }
}
