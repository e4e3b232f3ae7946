//! Subcommand implementations. Every command is a pure function of its
//! configuration, its input files and the seed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recalib::diagnostics::{fingerprint, reliability_svg, uniform_levels};
use recalib::inventory::{demand_pmf, simulate_receding, DemandPmf, InventoryState, MdpConfig};
use recalib::recalibration::{kfold_recalibrate_with, KFoldCalibrated, MapDocument, RecalibrationOptions};
use recalib::{CalibrationReport64, Dataset64, Forecast64, Forecaster, Predictive, RecalibrationMap64, Recalibrator64};
use serde::{Deserialize, Serialize};

use crate::config::{Calibration, Command, Input, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_dataset, ingest_demand_trace, ingest_forecasts, write_forecasts};
use crate::model::{fit_model, Model, ModelDocument};

/// Runs one command, writing artifacts under `cfg.out`, and returns the
/// summary printed on standard output.
pub fn run(cfg: &RunConfig) -> CliResult<String> {
    cfg.validate()?;
    match &cfg.command {
        Command::Fit { data } => fit(cfg, data),
        Command::Recalibrate { input } => recalibrate(cfg, input),
        Command::Diagnose { input } => diagnose(cfg, input),
        Command::Simulate {
            config,
            demand,
            forecasts,
            map,
        } => simulate(
            cfg,
            config.as_deref(),
            demand.as_deref(),
            forecasts.as_deref(),
            map.as_deref(),
        ),
    }
}

fn write(cfg: &RunConfig, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let path = cfg.out.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn part(n: usize, fraction: f64, what: &str) -> CliResult<usize> {
    if n < 2 {
        return Err(CliError::usage(format!(
            "need at least 2 rows to take a {what}, have {n}"
        )));
    }
    Ok(((n as f64 * fraction).round() as usize).clamp(1, n - 1))
}

/// Seeded shuffle, then the first `test_fraction` of the shuffled rows are
/// the test set. Returns `(test, rest)` in shuffled order.
fn split_rows(n: usize, cfg: &RunConfig) -> CliResult<(Vec<usize>, Vec<usize>)> {
    let n_test = part(n, cfg.test_fraction, "test split")?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let rest = idx.split_off(n_test);
    Ok((idx, rest))
}

/// Splits the non-test rows into `(fit, calibrate)` for `split=F`: the last
/// `F` of them calibrate.
fn calibration_split(rest: &[usize], fraction: f64) -> CliResult<(Vec<usize>, Vec<usize>)> {
    let n_cal = part(rest.len(), fraction, "calibration split")?;
    let cut = rest.len() - n_cal;
    Ok((rest[..cut].to_vec(), rest[cut..].to_vec()))
}

fn pick<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

fn fit(cfg: &RunConfig, data: &Path) -> CliResult<String> {
    let data = ingest_dataset(data)?;
    let (test, train) = split_rows(data.len(), cfg)?;
    let (test, train) = (data.select(&test)?, data.select(&train)?);
    let model = fit_model(&train, &cfg.model)?;
    write(cfg, "model.json", &ModelDocument::new(&model, cfg.seed).to_json())?;
    let forecasts = model.forecast_all(&test)?;
    write(
        cfg,
        "test_forecasts.csv",
        &write_forecasts(&forecasts, test.targets(), cfg.seed),
    )?;
    Ok(format!("train_rows: {}\ntest_rows: {}\n", train.len(), test.len()))
}

fn options(cfg: &RunConfig) -> RecalibrationOptions<f64> {
    RecalibrationOptions {
        anchored: cfg.anchored,
        weights: None,
    }
}

enum Calibrated {
    Single {
        model: Model,
        recal: Recalibrator64,
    },
    KFold {
        base: Model,
        ensemble: KFoldCalibrated<f64, Model>,
    },
}

/// Trains on `train` and recalibrates per `cfg.calibration`. Also returns the
/// outcomes the map was fitted on.
fn calibrate_data(cfg: &RunConfig, train: &Dataset64) -> CliResult<(Calibrated, Vec<f64>)> {
    let all: Vec<usize> = (0..train.len()).collect();
    let (fit_idx, cal_idx) = match cfg.calibration {
        Calibration::Train => (all.clone(), all),
        Calibration::Split(f) => calibration_split(&all, f)?,
        Calibration::KFold(k) => {
            let ensemble = kfold_recalibrate_with(train, k, &options(cfg), |d| fit_model(d, &cfg.model))?;
            let base = fit_model(train, &cfg.model)?;
            return Ok((Calibrated::KFold { base, ensemble }, train.targets().to_vec()));
        }
    };
    let model = fit_model(&train.select(&fit_idx)?, &cfg.model)?;
    let cal = train.select(&cal_idx)?;
    let recal = Recalibrator64::fit_with(&model.forecast_all(&cal)?, cal.targets(), &options(cfg))?;
    Ok((Calibrated::Single { model, recal }, cal.targets().to_vec()))
}

/// Calibration subset of fixed forecasts.
fn calibrate_forecasts(
    cfg: &RunConfig,
    fs: &[Forecast64],
    ys: &[f64],
    rest: &[usize],
) -> CliResult<(Recalibrator64, Vec<f64>)> {
    let cal_idx = match cfg.calibration {
        Calibration::Train => rest.to_vec(),
        Calibration::Split(f) => calibration_split(rest, f)?.1,
        Calibration::KFold(_) => {
            return Err(CliError::usage(
                "k-fold calibration refits the model and needs --data, not fixed --forecasts",
            ))
        }
    };
    let (cal_fs, cal_ys) = (pick(fs, &cal_idx), pick(ys, &cal_idx));
    Ok((Recalibrator64::fit_with(&cal_fs, &cal_ys, &options(cfg))?, cal_ys))
}

fn recalibrate(cfg: &RunConfig, input: &Input) -> CliResult<String> {
    match input {
        Input::Forecasts(path) => {
            let (fs, ys) = ingest_forecasts(path)?;
            let (_, rest) = split_rows(fs.len(), cfg)?;
            let (recal, cal_ys) = calibrate_forecasts(cfg, &fs, &ys, &rest)?;
            write(cfg, "map.json", &recal.to_document(Some(cfg.seed)).to_json())?;
            Ok(format!(
                "calibration_rows: {}\nknots: {}\n",
                cal_ys.len(),
                recal.map().knots().len()
            ))
        }
        Input::Data(path) => {
            let data = ingest_dataset(path)?;
            let (_, rest) = split_rows(data.len(), cfg)?;
            let (calibrated, cal_ys) = calibrate_data(cfg, &data.select(&rest)?)?;
            let mut summary = format!("calibration_rows: {}\n", cal_ys.len());
            match calibrated {
                Calibrated::Single { model, recal } => {
                    write(cfg, "model.json", &ModelDocument::new(&model, cfg.seed).to_json())?;
                    write(cfg, "map.json", &recal.to_document(Some(cfg.seed)).to_json())?;
                    let _ = writeln!(summary, "knots: {}", recal.map().knots().len());
                }
                Calibrated::KFold { ensemble, .. } => {
                    for (i, m) in ensemble.members().iter().enumerate() {
                        write(
                            cfg,
                            &format!("model_fold{i}.json"),
                            &ModelDocument::new(m.base(), cfg.seed).to_json(),
                        )?;
                        let doc = m.recalibrator().to_document(Some(cfg.seed));
                        write(cfg, &format!("map_fold{i}.json"), &doc.to_json())?;
                    }
                    let _ = writeln!(summary, "folds: {}", ensemble.members().len());
                }
            }
            Ok(summary)
        }
    }
}

/// A calibration report tagged with the run seed and the stage it describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub seed: u64,
    pub stage: String,
    pub report: CalibrationReport64,
}

impl ReportDocument {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| CliError::ingest(format!("bad report file: {e}")))?;
        doc.report.validate()?;
        Ok(doc)
    }
}

struct Evaluated {
    before: Option<CalibrationReport64>,
    after: CalibrationReport64,
    calibration_ys: Vec<f64>,
    test_ys: Vec<f64>,
}

fn report<P: Predictive<f64>>(cfg: &RunConfig, fs: &[P], ys: &[f64]) -> CliResult<CalibrationReport64> {
    Ok(CalibrationReport64::build(
        fs,
        ys,
        &uniform_levels(cfg.levels)?,
        cfg.weights,
    )?)
}

fn report_before(cfg: &RunConfig, fs: &[Forecast64], ys: &[f64]) -> CliResult<Option<CalibrationReport64>> {
    if fs.iter().all(Forecast64::is_proper) {
        report(cfg, fs, ys).map(Some)
    } else {
        Ok(None)
    }
}

fn evaluate(cfg: &RunConfig, input: &Input) -> CliResult<Evaluated> {
    match input {
        Input::Forecasts(path) => {
            let (fs, ys) = ingest_forecasts(path)?;
            let (test, rest) = split_rows(fs.len(), cfg)?;
            let (recal, calibration_ys) = calibrate_forecasts(cfg, &fs, &ys, &rest)?;
            let (test_fs, test_ys) = (pick(&fs, &test), pick(&ys, &test));
            let attached: Vec<_> = test_fs.iter().map(|f| recal.attach(f)).collect();
            Ok(Evaluated {
                before: report_before(cfg, &test_fs, &test_ys)?,
                after: report(cfg, &attached, &test_ys)?,
                calibration_ys,
                test_ys,
            })
        }
        Input::Data(path) => {
            let data = ingest_dataset(path)?;
            let (test, rest) = split_rows(data.len(), cfg)?;
            let (test, train) = (data.select(&test)?, data.select(&rest)?);
            let (calibrated, calibration_ys) = calibrate_data(cfg, &train)?;
            let test_ys = test.targets().to_vec();
            let (before, after) = match &calibrated {
                Calibrated::Single { model, recal } => {
                    let fs = model.forecast_all(&test)?;
                    let attached: Vec<_> = fs.iter().map(|f| recal.attach(f)).collect();
                    (report_before(cfg, &fs, &test_ys)?, report(cfg, &attached, &test_ys)?)
                }
                Calibrated::KFold { base, ensemble } => {
                    let fs = base.forecast_all(&test)?;
                    let mixtures = test
                        .rows()
                        .map(|(x, _)| ensemble.predict(x))
                        .collect::<recalib::Result<Vec<_>>>()?;
                    (report_before(cfg, &fs, &test_ys)?, report(cfg, &mixtures, &test_ys)?)
                }
            };
            Ok(Evaluated {
                before,
                after,
                calibration_ys,
                test_ys,
            })
        }
    }
}

fn diagnose(cfg: &RunConfig, input: &Input) -> CliResult<String> {
    let ev = evaluate(cfg, input)?;
    let mut summary = String::new();
    if fingerprint(&ev.calibration_ys) == fingerprint(&ev.test_ys) {
        eprintln!("warning: the test outcomes duplicate the calibration outcomes; diagnostics are in-sample");
        summary.push_str("warning: test set duplicates calibration set\n");
    }
    let mut curves = Vec::new();
    for (stage, rep) in [("before", ev.before.as_ref()), ("after", Some(&ev.after))] {
        let Some(rep) = rep else {
            let _ = writeln!(
                summary,
                "calibration_error_{stage}: unavailable for point-distance scores"
            );
            continue;
        };
        let doc = ReportDocument {
            seed: cfg.seed,
            stage: stage.to_string(),
            report: rep.clone(),
        };
        let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
        json.push('\n');
        write(cfg, &format!("report_{stage}.json"), &json)?;
        write(
            cfg,
            &format!("plot_{stage}.csv"),
            &format!("# seed: {}\n{}", cfg.seed, rep.plot_data()),
        )?;
        let _ = writeln!(summary, "calibration_error_{stage}: {}", rep.calibration_error);
        let _ = writeln!(summary, "sharpness_{stage}: {}", rep.sharpness);
        curves.push((stage, rep));
    }
    let svg = reliability_svg(&curves);
    write(cfg, "reliability.svg", &format!("<!-- seed: {} -->\n{svg}", cfg.seed))?;
    let _ = writeln!(summary, "test_rows: {}", ev.test_ys.len());
    Ok(summary)
}

fn load_map(path: &Path) -> CliResult<RecalibrationMap64> {
    let doc = MapDocument::<f64>::from_json(&read(path)?)?;
    if doc.raw_scores.is_some() {
        return Err(CliError::usage(
            "demand planning needs a map fitted on distributions, not point-distance scores",
        ));
    }
    Ok(Recalibrator64::from_document(&doc)?.map().clone())
}

fn integral_demands(ys: &[f64]) -> CliResult<Vec<u32>> {
    ys.iter()
        .enumerate()
        .map(|(i, &y)| {
            if y >= 0.0 && y.fract() == 0.0 && y <= f64::from(u32::MAX) {
                Ok(y as u32)
            } else {
                Err(CliError::ingest(format!(
                    "row {}: demand {y} is not a non-negative integer",
                    i + 1
                )))
            }
        })
        .collect()
}

/// Empirical distribution of the trace, capped at `dmax`.
fn marginal_pmf(trace: &[u32], dmax: u32) -> CliResult<DemandPmf<f64>> {
    let mut counts = vec![0usize; dmax as usize + 1];
    for &d in trace {
        counts[d.min(dmax) as usize] += 1;
    }
    let n = trace.len() as f64;
    Ok(DemandPmf::new(counts.into_iter().map(|c| c as f64 / n).collect())?)
}

fn simulate(
    cfg: &RunConfig,
    config: Option<&Path>,
    demand: Option<&Path>,
    forecasts: Option<&Path>,
    map: Option<&Path>,
) -> CliResult<String> {
    let mdp: MdpConfig = match config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::ingest(format!("bad planner config: {e}")))?,
        None => MdpConfig::default(),
    };
    mdp.validate()?;
    let loaded = forecasts.map(ingest_forecasts).transpose()?;
    let trace = match (demand, &loaded) {
        (Some(p), _) => ingest_demand_trace(p)?,
        (None, Some((_, ys))) => integral_demands(ys)?,
        (None, None) => return Err(CliError::usage("simulate needs --demand or --forecasts")),
    };
    let pmfs = match &loaded {
        Some((fs, _)) => {
            if fs.len() < trace.len() {
                return Err(CliError::usage(format!(
                    "{} forecasts for a {}-day demand trace",
                    fs.len(),
                    trace.len()
                )));
            }
            let m = map
                .map(load_map)
                .transpose()?
                .unwrap_or_else(RecalibrationMap64::identity);
            fs.iter()
                .map(|f| demand_pmf(f, &m, mdp.demand_cap))
                .collect::<recalib::Result<Vec<_>>>()?
        }
        None => vec![marginal_pmf(&trace, mdp.demand_cap)?; trace.len()],
    };
    let episode = simulate_receding(&mdp, &pmfs, &trace, &InventoryState::empty())?;
    write(
        cfg,
        "trajectory.csv",
        &format!("# seed: {}\n{}", cfg.seed, episode.trajectory_csv()),
    )?;
    let summary = format!(
        "cumulative_reward: {:.2}\ndays: {}\nsold: {}\nspoiled: {}\n",
        episode.cumulative_reward,
        episode.days.len(),
        episode.total_sold(),
        episode.total_spoiled()
    );
    write(cfg, "summary.txt", &format!("# seed: {}\n{summary}", cfg.seed))?;
    Ok(summary)
}
