//! Command-line arguments and the validated run configuration.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recalib::WeightMode;

use crate::error::{CliError, CliResult};
use crate::model::{ModelKind, ModelParams};

/// Where the recalibration map is fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    /// On the rows the model was trained on.
    Train,
    /// On a held-back fraction of the training rows.
    Split(f64),
    /// K models, each recalibrated on the fold it did not see.
    KFold(usize),
}

impl FromStr for Calibration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "train" {
            return Ok(Calibration::Train);
        }
        let (name, value) = s
            .split_once(['=', ':'])
            .ok_or_else(|| format!("expected train, split=F or kfold=K, got {s:?}"))?;
        match name {
            "split" => value
                .parse()
                .map(Calibration::Split)
                .map_err(|_| format!("bad split fraction {value:?}")),
            "kfold" => value
                .parse()
                .map(Calibration::KFold)
                .map_err(|_| format!("bad fold count {value:?}")),
            _ => Err(format!("unknown calibration mode {name:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Data(PathBuf),
    Forecasts(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Fit {
        data: PathBuf,
    },
    Recalibrate {
        input: Input,
    },
    Diagnose {
        input: Input,
    },
    Simulate {
        config: Option<PathBuf>,
        demand: Option<PathBuf>,
        forecasts: Option<PathBuf>,
        map: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    pub test_fraction: f64,
    pub calibration: Calibration,
    /// Force the recalibration map through (0, 0) and (1, 1).
    pub anchored: bool,
    pub levels: usize,
    pub weights: WeightMode,
    pub model: ModelParams,
}

impl RunConfig {
    pub fn new(command: Command, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            seed: 0,
            out: out.into(),
            test_fraction: 0.25,
            calibration: Calibration::Train,
            anchored: true,
            levels: 10,
            weights: WeightMode::Uniform,
            model: ModelParams {
                kind: ModelKind::BayesRidge,
                prior_scale: 1.0,
                a0: 1.0,
                b0: 1.0,
                sigma_floor: recalib::forecasters::DEFAULT_SIGMA_FLOOR,
            },
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.test_fraction) {
            return Err(CliError::usage(format!(
                "--test-fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        match self.calibration {
            Calibration::Split(f) if !open_unit(f) => {
                return Err(CliError::usage(format!("split fraction must be in (0, 1), got {f}")))
            }
            Calibration::KFold(k) if k < 2 => return Err(CliError::usage(format!("kfold needs K >= 2, got {k}"))),
            _ => {}
        }
        if self.levels == 0 {
            return Err(CliError::usage("--levels must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "recalib",
    version,
    about = "Recalibrate regression forecasts, diagnose calibration and plan inventory"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every random choice (data splits).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::BayesRidge)]
    model: ModelKind,
    /// Prior precision of the ridge weights.
    #[arg(long, default_value_t = 1.0)]
    prior_scale: f64,
    /// Gamma prior shape on the noise precision.
    #[arg(long, default_value_t = 1.0)]
    a0: f64,
    /// Gamma prior rate on the noise precision.
    #[arg(long, default_value_t = 1.0)]
    b0: f64,
    /// Lower bound on fitted standard deviations.
    #[arg(long, default_value_t = recalib::forecasters::DEFAULT_SIGMA_FLOOR)]
    sigma_floor: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Dataset with x* feature columns and a y column.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Forecast rows `family,params...,y`.
    #[arg(long)]
    forecasts: Option<PathBuf>,
}

impl InputArgs {
    fn input(self) -> Input {
        match (self.data, self.forecasts) {
            (Some(d), _) => Input::Data(d),
            (None, Some(f)) => Input::Forecasts(f),
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Fraction of rows held out for testing.
    #[arg(long, default_value_t = 0.25)]
    test_fraction: f64,
    /// train | split=F | kfold=K
    #[arg(long, default_value = "train")]
    calibration: Calibration,
    /// Fit the map without the (0, 0) and (1, 1) anchors.
    #[arg(long)]
    no_anchor: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Weights {
    Uniform,
    Count,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Train a forecaster and write its model file and held-out forecasts.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        test_fraction: f64,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a recalibration map.
    Recalibrate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Calibration reports on held-out rows before and after recalibration.
    Diagnose {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Number of evenly spaced levels.
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Weights::Uniform)]
        weights: Weights,
        #[command(flatten)]
        common: Common,
    },
    /// Plan orders by dynamic programming and replay them against a demand trace.
    Simulate {
        /// Planner configuration (JSON); defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// One demand value per line.
        #[arg(long)]
        demand: Option<PathBuf>,
        /// Per-day demand forecasts; their y column is the trace when --demand is absent.
        #[arg(long)]
        forecasts: Option<PathBuf>,
        /// Recalibration map applied to the forecasts.
        #[arg(long, requires = "forecasts")]
        map: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

impl From<ModelArgs> for ModelParams {
    fn from(m: ModelArgs) -> Self {
        ModelParams {
            kind: m.model,
            prior_scale: m.prior_scale,
            a0: m.a0,
            b0: m.b0,
            sigma_floor: m.sigma_floor,
        }
    }
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let with_common = |command, common: Common| {
            let mut cfg = RunConfig::new(command, common.out);
            cfg.seed = common.seed;
            cfg
        };
        match self.command {
            Cmd::Fit {
                data,
                test_fraction,
                model,
                common,
            } => {
                let mut cfg = with_common(Command::Fit { data }, common);
                cfg.test_fraction = test_fraction;
                cfg.model = model.into();
                cfg
            }
            Cmd::Recalibrate {
                input,
                split,
                model,
                common,
            } => {
                let mut cfg = with_common(Command::Recalibrate { input: input.input() }, common);
                cfg.test_fraction = split.test_fraction;
                cfg.calibration = split.calibration;
                cfg.anchored = !split.no_anchor;
                cfg.model = model.into();
                cfg
            }
            Cmd::Diagnose {
                input,
                split,
                model,
                levels,
                weights,
                common,
            } => {
                let mut cfg = with_common(Command::Diagnose { input: input.input() }, common);
                cfg.test_fraction = split.test_fraction;
                cfg.calibration = split.calibration;
                cfg.anchored = !split.no_anchor;
                cfg.model = model.into();
                cfg.levels = levels;
                cfg.weights = match weights {
                    Weights::Uniform => WeightMode::Uniform,
                    Weights::Count => WeightMode::Count,
                };
                cfg
            }
            Cmd::Simulate {
                config,
                demand,
                forecasts,
                map,
                common,
            } => with_common(
                Command::Simulate {
                    config,
                    demand,
                    forecasts,
                    map,
                },
                common,
            ),
        }
    }
}
