//! Experiment configuration and the four command entry points behind the
//! `fairreg` binary: `train`, `sweep`, `bounds`, and `gen-synth`.
//!
//! Experiments are driven by one JSON config file; command-line flags
//! override individual fields (flags win). Every command writes its
//! outputs into a single directory: `result.json` with the config echo and
//! all reported numbers, plus CSV files for the epoch log, sweep tables,
//! and feasible-region vertices. Identical inputs and seeds produce
//! byte-identical files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{feasible_region, FeasibleRegion};
use crate::data::{
    gen_synthetic, load_csv, preprocess, split_indices, Dataset, DatasetSchema, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::train::{
    evaluate, evaluate_predictions, lambda_sweep, train_run, write_epoch_log_csv, Evaluation,
    RunConfig,
};

/// Environment variable consulted when neither the config nor a flag names
/// the output directory.
pub const OUTPUT_DIR_ENV: &str = "FAIRREG_OUTPUT_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

/// Where the data comes from: a CSV file plus its schema, or the synthetic
/// generator. Exactly one, enforced by the enum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Csv { path: PathBuf, schema: DatasetSchema },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// One experiment: dataset, split, run settings, optional sweep grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub split: SplitConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Flag-level overrides; any set field wins over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub epochs: Option<usize>,
    /// Parallel sweep cells (sweep command only).
    pub jobs: Option<usize>,
}

/// Everything a command reports, echoed into `result.json`.
///
/// The `config` echo is sufficient to re-run the command exactly; paths of
/// the side-written CSVs are relative to the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct ResultBundle {
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<Evaluation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<FeasibleRegion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch_log: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_aggregates: Option<String>,
    pub warnings: Vec<String>,
    pub output_dir: PathBuf,
}

/// Parses an experiment config, reporting JSON syntax errors with their
/// line and column.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(config)
}

fn apply_overrides(config: &mut ExperimentConfig, overrides: &Overrides) {
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = Some(dir.clone());
    }
    if let Some(seed) = overrides.seed {
        config.run.seed = seed;
    }
    if let Some(lambda) = overrides.lambda {
        config.run.lambda = lambda;
    }
    if let Some(epochs) = overrides.epochs {
        config.run.epochs = epochs;
    }
}

fn resolve_output_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    if let Some(dir) = &config.output_dir {
        return Ok(dir.clone());
    }
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        return Ok(PathBuf::from(dir));
    }
    Err(Error::Config(format!(
        "no output directory: set output_dir in the config, pass --output-dir, or export {OUTPUT_DIR_ENV}"
    )))
}

/// Materializes the configured dataset into train/test splits.
fn prepare_data(config: &ExperimentConfig) -> Result<(Dataset, Dataset, Vec<String>)> {
    let mut warnings = Vec::new();
    let (train, test) = match &config.dataset {
        DatasetSource::Synthetic(spec) => {
            let ds = gen_synthetic(spec)?;
            let s = crate::data::split(&ds, config.split.test_fraction, config.split.seed)?;
            warnings.extend(s.warnings);
            (s.train, s.test)
        }
        DatasetSource::Csv { path, schema } => {
            let raw = load_csv(path, schema)?;
            if raw.dropped_rows > 0 {
                warnings.push(format!("dropped {} rows with missing values", raw.dropped_rows));
            }
            let (train_idx, test_idx) =
                split_indices(raw.len(), config.split.test_fraction, config.split.seed)?;
            let pre = preprocess(&raw, schema, &train_idx)?;
            warnings.extend(pre.warnings);
            let train = pre.dataset.select(&train_idx);
            let test = pre.dataset.select(&test_idx);
            for (name, side) in [("train", &train), ("test", &test)] {
                if !side.is_empty() && !side.has_both_groups() {
                    warnings.push(format!("{name} split does not contain both groups"));
                }
            }
            (train, test)
        }
    };
    Ok((train, test, warnings))
}

/// Feasible region implied by an evaluation: gap band from the upper
/// bound, joint-error line from the lower bound, cap comfortably above
/// both and above the observed errors.
fn region_for(eval: &Evaluation) -> Result<FeasibleRegion> {
    let a_gap = eval.upper_bound;
    let b_joint = eval.lower_bound;
    let observed = eval.metrics.err0 + eval.metrics.err1;
    let err_cap = 2.0 * a_gap.max(b_joint).max(observed).max(1e-6);
    feasible_region(a_gap, b_joint, err_cap)
}

fn write_result_json(dir: &Path, bundle: &ResultBundle) -> Result<()> {
    let json = serde_json::to_string_pretty(bundle)
        .map_err(|e| Error::Data(format!("serializing result: {e}")))?;
    std::fs::write(dir.join("result.json"), json + "\n")?;
    Ok(())
}

fn config_echo(config: &ExperimentConfig) -> Result<serde_json::Value> {
    serde_json::to_value(config).map_err(|e| Error::Config(format!("echoing config: {e}")))
}

/// Runs one training experiment: trains, evaluates on the test split, and
/// writes `result.json` plus `epoch_log.csv`.
pub fn cmd_train(config_path: &Path, overrides: &Overrides) -> Result<ResultBundle> {
    let mut config = load_config(config_path)?;
    apply_overrides(&mut config, overrides);
    config.run.validate()?;
    let out_dir = resolve_output_dir(&config)?;
    std::fs::create_dir_all(&out_dir)?;
    config.output_dir = Some(out_dir.clone());

    let (train, test, warnings) = prepare_data(&config)?;
    let (model, logs) = train_run(&config.run, &train, &test)?;
    let eval = evaluate(&model, &test, config.run.y_bins)?;
    let region = region_for(&eval)?;

    write_epoch_log_csv(&out_dir.join("epoch_log.csv"), &logs)?;
    let bundle = ResultBundle {
        config: config_echo(&config)?,
        evaluation: Some(eval),
        region: Some(region),
        epoch_log: Some("epoch_log.csv".into()),
        sweep_table: None,
        sweep_aggregates: None,
        warnings,
        output_dir: out_dir.clone(),
    };
    write_result_json(&out_dir, &bundle)?;
    Ok(bundle)
}

/// Runs the λ × seed grid of the config's `sweep` section and writes the
/// per-cell and per-λ aggregate CSVs.
pub fn cmd_sweep(config_path: &Path, overrides: &Overrides) -> Result<ResultBundle> {
    let mut config = load_config(config_path)?;
    apply_overrides(&mut config, overrides);
    config.run.validate()?;
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("sweep command requires a sweep section".into()))?;
    let out_dir = resolve_output_dir(&config)?;
    std::fs::create_dir_all(&out_dir)?;
    config.output_dir = Some(out_dir.clone());

    let (train, test, mut warnings) = prepare_data(&config)?;
    let jobs = overrides.jobs.unwrap_or(1);
    let table = lambda_sweep(&config.run, &sweep.lambdas, &sweep.seeds, &train, &test, jobs)?;
    for cell in &table.cells {
        if let Err(e) = &cell.outcome {
            warnings.push(format!("sweep cell failed: {e}"));
        }
    }
    table.write_cells_csv(&out_dir.join("sweep.csv"))?;
    table.write_aggregates_csv(&out_dir.join("sweep_aggregate.csv"))?;

    let bundle = ResultBundle {
        config: config_echo(&config)?,
        evaluation: None,
        region: None,
        epoch_log: None,
        sweep_table: Some("sweep.csv".into()),
        sweep_aggregates: Some("sweep_aggregate.csv".into()),
        warnings,
        output_dir: out_dir.clone(),
    };
    write_result_json(&out_dir, &bundle)?;
    Ok(bundle)
}

/// Audits a predictions file (columns `pred,target,group`): computes the
/// metrics report, both bounds, and the feasible-region vertices, writing
/// `result.json` and `region.csv`.
pub fn cmd_bounds(
    predictions_csv: &Path,
    y_bins: usize,
    output_dir: Option<&Path>,
) -> Result<ResultBundle> {
    let (pred, target, group) = read_predictions_csv(predictions_csv)?;
    let eval = evaluate_predictions(pred, target, group, y_bins)?;
    let region = region_for(&eval)?;

    let out_dir = match output_dir {
        Some(d) => d.to_path_buf(),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).ok_or_else(|| {
            Error::Config(format!("pass --output-dir or export {OUTPUT_DIR_ENV}"))
        })?,
    };
    std::fs::create_dir_all(&out_dir)?;

    let mut region_csv = String::from("err0,err1\n");
    for (x, y) in &region.vertices {
        region_csv.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(out_dir.join("region.csv"), region_csv)?;

    let bundle = ResultBundle {
        config: serde_json::json!({
            "command": "bounds",
            "input": predictions_csv,
            "y_bins": y_bins,
        }),
        evaluation: Some(eval),
        region: Some(region),
        epoch_log: None,
        sweep_table: None,
        sweep_aggregates: None,
        warnings: Vec::new(),
        output_dir: out_dir.clone(),
    };
    write_result_json(&out_dir, &bundle)?;
    Ok(bundle)
}

/// Generates a synthetic dataset CSV loadable by the train command.
pub fn cmd_gen_synth(spec: &SyntheticSpec, out_path: &Path) -> Result<()> {
    let ds = gen_synthetic(spec)?;
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    ds.to_csv(out_path)
}

/// Reads `pred,target,group` rows, reporting bad rows by line number.
fn read_predictions_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<u8>)> {
    if !path.exists() {
        return Err(Error::Data(format!("predictions file not found: {}", path.display())));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
    let headers = reader.headers().map_err(|e| Error::Data(e.to_string()))?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("column '{name}' not found in {}", path.display())))
    };
    let (pi, ti, gi) = (col("pred")?, col("target")?, col("group")?);
    let mut pred = Vec::new();
    let mut target = Vec::new();
    let mut group = Vec::new();
    for (line0, record) in reader.records().enumerate() {
        let line = line0 + 2;
        let record = record.map_err(|e| Error::Data(format!("row {line}: {e}")))?;
        let parse = |idx: usize, what: &str| -> Result<f64> {
            record
                .get(idx)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Data(format!("row {line}: bad {what} value")))
        };
        pred.push(parse(pi, "pred")?);
        target.push(parse(ti, "target")?);
        let g = record
            .get(gi)
            .map(str::trim)
            .ok_or_else(|| Error::Data(format!("row {line}: missing group")))?;
        group.push(match g {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Data(format!(
                    "row {line}: group column must be 0 or 1, got '{other}'"
                )))
            }
        });
    }
    if pred.is_empty() {
        return Err(Error::Data(format!("no rows in {}", path.display())));
    }
    Ok((pred, target, group))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::{Algorithm, Architecture};
    use crate::nn::{Activation, OptimizerConfig};

    fn synthetic_config(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            dataset: DatasetSource::Synthetic(SyntheticSpec {
                n_per_group: (80, 80),
                feature_dim: 3,
                label_mean_shift: 0.4,
                label_scale: (1.0, 0.8),
                conditional_noise_scale: (0.3, 0.4),
                seed: 3,
            }),
            split: SplitConfig { test_fraction: 0.3, seed: 11 },
            run: RunConfig {
                algorithm: Algorithm::Plain,
                lambda: 0.0,
                epochs: 3,
                batch_size: 32,
                optimizer: OptimizerConfig::adadelta(1.0),
                architecture: Architecture {
                    feature_hidden: vec![6],
                    head_hidden: vec![],
                    adversary_hidden: vec![6],
                    head_activation: Activation::Identity,
                },
                clip_c: 0.1,
                seed: 5,
                y_bins: 4,
            },
            sweep: Some(SweepConfig { lambdas: vec![0.0, 1.0], seeds: vec![1, 2] }),
            output_dir: None,
        }
    }

    fn write_config(dir: &Path, config: &ExperimentConfig) -> PathBuf {
        let path = dir.join("config.json");
        std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
        path
    }

    #[test]
    fn train_writes_result_and_epoch_log() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = synthetic_config(dir.path());
        config.output_dir = Some(dir.path().join("out"));
        let path = write_config(dir.path(), &config);
        let bundle = cmd_train(&path, &Overrides::default()).unwrap();
        assert!(bundle.evaluation.is_some());
        assert!(dir.path().join("out/result.json").exists());
        let log = std::fs::read_to_string(dir.path().join("out/epoch_log.csv")).unwrap();
        assert!(log.starts_with("epoch,train_mse,test_mse,err_gap,adversary_loss"));
        assert_eq!(log.lines().count(), 4);
    }

    #[test]
    fn train_outputs_are_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = synthetic_config(dir.path());
        config.output_dir = Some(dir.path().join("a"));
        let path_a = write_config(dir.path(), &config);
        cmd_train(&path_a, &Overrides::default()).unwrap();
        let over = Overrides { output_dir: Some(dir.path().join("b")), ..Default::default() };
        cmd_train(&path_a, &over).unwrap();

        let read = |p: PathBuf| std::fs::read(p).unwrap();
        let a_result = String::from_utf8(read(dir.path().join("a/result.json"))).unwrap();
        let b_result = String::from_utf8(read(dir.path().join("b/result.json"))).unwrap();
        // the echoed output_dir differs; everything else must match
        assert_eq!(
            a_result.replace(&dir.path().join("a").display().to_string(), "X"),
            b_result.replace(&dir.path().join("b").display().to_string(), "X"),
        );
        assert_eq!(
            read(dir.path().join("a/epoch_log.csv")),
            read(dir.path().join("b/epoch_log.csv"))
        );
    }

    #[test]
    fn config_errors_are_descriptive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{ \"dataset\": }").unwrap();
        let err = cmd_train(&path, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");

        // negative lambda rejected before training
        let mut config = synthetic_config(dir.path());
        config.run.lambda = -0.5;
        config.output_dir = Some(dir.path().join("out"));
        let path = write_config(dir.path(), &config);
        let err = cmd_train(&path, &Overrides::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));

        // missing dataset file named in the error
        let mut config = synthetic_config(dir.path());
        config.dataset = DatasetSource::Csv {
            path: dir.path().join("nope.csv"),
            schema: DatasetSchema::numeric(2),
        };
        config.output_dir = Some(dir.path().join("out"));
        let path = write_config(dir.path(), &config);
        let err = cmd_train(&path, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }

    #[test]
    fn sweep_writes_both_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = synthetic_config(dir.path());
        config.output_dir = Some(dir.path().join("out"));
        let path = write_config(dir.path(), &config);
        let bundle = cmd_sweep(&path, &Overrides::default()).unwrap();
        assert!(bundle.sweep_table.is_some());
        let cells = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
        // header + 2 lambdas x 2 seeds
        assert_eq!(cells.lines().count(), 5);
        let agg = std::fs::read_to_string(dir.path().join("out/sweep_aggregate.csv")).unwrap();
        assert_eq!(agg.lines().count(), 3);

        // hand-average one aggregate column
        let cell_rows: Vec<Vec<&str>> =
            cells.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let r2: Vec<f64> = cell_rows
            .iter()
            .filter(|r| r[1] == "0")
            .map(|r| r[3].parse::<f64>().unwrap())
            .collect();
        let agg_row: Vec<&str> = agg.lines().nth(1).unwrap().split(',').collect();
        let mean: f64 = agg_row[3].parse().unwrap();
        assert!((mean - (r2[0] + r2[1]) / 2.0).abs() < 1e-12);

        let mut no_sweep = synthetic_config(dir.path());
        no_sweep.sweep = None;
        no_sweep.output_dir = Some(dir.path().join("out2"));
        let path = write_config(dir.path(), &no_sweep);
        assert!(cmd_sweep(&path, &Overrides::default()).is_err());
    }

    #[test]
    fn bounds_command_on_a_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("preds.csv");
        std::fs::write(
            &csv,
            "pred,target,group\n0.5,0.0,0\n0.5,1.0,0\n0.5,0.0,1\n0.5,1.0,1\n",
        )
        .unwrap();
        let bundle = cmd_bounds(&csv, 4, Some(&dir.path().join("out"))).unwrap();
        let eval = bundle.evaluation.unwrap();
        assert!(eval.metrics.err_gap < 1e-12);
        assert!(bundle.region.is_some());
        assert!(dir.path().join("out/region.csv").exists());

        // single-group file errors mentioning the group column
        std::fs::write(&csv, "pred,target,group\n0.5,0.0,0\n0.4,1.0,0\n").unwrap();
        let err = cmd_bounds(&csv, 4, Some(&dir.path().join("out2"))).unwrap_err();
        assert!(err.to_string().contains("group"), "{err}");

        // malformed rows are reported with their line number
        std::fs::write(&csv, "pred,target,group\n0.5,0.0,0\nx,1.0,1\n").unwrap();
        let err = cmd_bounds(&csv, 4, Some(&dir.path().join("out3"))).unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
    }

    #[test]
    fn gen_synth_round_trips_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("synth.csv");
        let spec = SyntheticSpec {
            n_per_group: (20, 25),
            feature_dim: 3,
            label_mean_shift: 0.0,
            label_scale: (1.0, 1.0),
            conditional_noise_scale: (0.1, 0.1),
            seed: 8,
        };
        cmd_gen_synth(&spec, &out).unwrap();
        let ds = Dataset::from_csv(&out).unwrap();
        assert_eq!(ds.len(), 45);

        // same seed, same bytes
        let out2 = dir.path().join("synth2.csv");
        cmd_gen_synth(&spec, &out2).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());

        let bad = SyntheticSpec { n_per_group: (0, 5), ..spec };
        assert!(cmd_gen_synth(&bad, &out).is_err());
    }

    #[test]
    fn env_var_provides_default_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let config = synthetic_config(dir.path());
        let path = write_config(dir.path(), &config);
        // no output_dir in config or flags: the env var decides
        std::env::set_var(OUTPUT_DIR_ENV, dir.path().join("from_env"));
        let bundle = cmd_train(&path, &Overrides::default());
        std::env::remove_var(OUTPUT_DIR_ENV);
        let bundle = bundle.unwrap();
        assert!(bundle.output_dir.ends_with("from_env"));
        assert!(dir.path().join("from_env/result.json").exists());
    }
}
