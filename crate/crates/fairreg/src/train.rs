//! Training loops for the plain regressor (no debiasing), the
//! cross-entropy adversary (`CENet`), and the Wasserstein critic
//! (`WassersteinNet`), plus evaluation and the λ-sweep harness.
//!
//! All three loops share one regression path. The adversarial variants run
//! simultaneous gradient-descent-ascent through a gradient reversal layer:
//! per minibatch every gradient is computed against the current parameters,
//! then the feature map `g`, head `h`, and adversary `f` are stepped once
//! each. The adversary sees the feature batch `Z` with the label scaled to
//! `[0, 1]` (train-split min/max) appended as one extra input column.
//!
//! Reproducibility: a run draws from three independent RNG streams derived
//! from its seed — `(g, h)` initialization, adversary initialization, and
//! batch shuffling. The adversarial algorithms therefore reproduce the
//! plain run's `(g, h)` trajectory bit-for-bit when `λ = 0`, and identical
//! configs give identical models, logs, and reports.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    conditional_discrepancy, lower_bound_joint, lower_bound_weighted, upper_bound_gap,
    BoundContext,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::metrics::{
    binary_accuracy, error_gap, group_error, r2_score, tv_histogram, wasserstein1d_exact,
    GroupedPredictions, MetricsReport, DEFAULT_TV_BINS,
};
use crate::nn::{
    backward, bce_loss, clip_weights, forward, grl_backward, mse_loss, wasserstein_penalty,
    Activation, AdversaryKind, Layer, MlpModel, OptimizerConfig, OptimizerState, YScale,
};

const STREAM_REGRESSOR_INIT: u64 = 1;
const STREAM_ADVERSARY_INIT: u64 = 2;
const STREAM_BATCHES: u64 = 3;

/// Independent per-purpose RNG stream for one run seed (SplitMix64 mix).
fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Plain,
    CeNet,
    WassersteinNet,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Plain => "plain",
            Algorithm::CeNet => "ce_net",
            Algorithm::WassersteinNet => "wasserstein_net",
        }
    }
}

/// Layer widths for the three model parts. Hidden layers are ReLU; the
/// head ends in `head_activation` and the adversary's output activation is
/// fixed by the algorithm (Sigmoid for the discriminator, Identity for the
/// critic).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Architecture {
    pub feature_hidden: Vec<usize>,
    #[serde(default)]
    pub head_hidden: Vec<usize>,
    pub adversary_hidden: Vec<usize>,
    pub head_activation: Activation,
}

impl Default for Architecture {
    /// Three-layer regressor (two 60-unit ReLU feature layers, sigmoid
    /// output) with a 60-unit adversary.
    fn default() -> Self {
        Architecture {
            feature_hidden: vec![60, 60],
            head_hidden: vec![],
            adversary_hidden: vec![60],
            head_activation: Activation::Sigmoid,
        }
    }
}

fn default_y_bins() -> usize {
    10
}

fn default_clip() -> f64 {
    0.005
}

/// Everything one training run needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Trade-off between accuracy and alignment; 0 reduces both
    /// adversarial algorithms to plain training of `(g, h)`.
    #[serde(default)]
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub architecture: Architecture,
    /// Critic weight-clipping box, WassersteinNet only.
    #[serde(default = "default_clip")]
    pub clip_c: f64,
    pub seed: u64,
    /// Label bins for the conditional-discrepancy estimate in `evaluate`.
    #[serde(default = "default_y_bins")]
    pub y_bins: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config("lambda must be finite and >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.y_bins == 0 {
            return Err(Error::Config("y_bins must be >= 1".into()));
        }
        self.optimizer.validate()?;
        if self.architecture.feature_hidden.iter().any(|&w| w == 0)
            || self.architecture.head_hidden.iter().any(|&w| w == 0)
            || self.architecture.adversary_hidden.iter().any(|&w| w == 0)
        {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if self.algorithm == Algorithm::WassersteinNet && !(self.clip_c > 0.0) {
            return Err(Error::Config("clip_c must be > 0 for wasserstein_net".into()));
        }
        Ok(())
    }

    fn adversary_kind(&self) -> AdversaryKind {
        match self.algorithm {
            Algorithm::Plain => AdversaryKind::None,
            Algorithm::CeNet => AdversaryKind::CrossEntropy,
            Algorithm::WassersteinNet => AdversaryKind::WassersteinCritic,
        }
    }
}

/// One row of the per-epoch training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_mse: f64,
    pub test_mse: f64,
    /// Error gap on the test split.
    pub err_gap: f64,
    /// Batch-mean adversary objective: BCE for CENet, the group-mean
    /// difference for WassersteinNet, 0 for plain runs.
    pub adversary_loss: f64,
}

/// Builds the model for a config: Glorot-initialized from the run's
/// `(g, h)` stream, adversary (if any) from its own stream.
fn build_model(config: &RunConfig, input_dim: usize, y_scale: YScale) -> Result<MlpModel> {
    let arch = &config.architecture;
    let mut rng = StdRng::seed_from_u64(stream_seed(config.seed, STREAM_REGRESSOR_INIT));

    let mut feature_map = Vec::new();
    let mut dim = input_dim;
    for &width in &arch.feature_hidden {
        feature_map.push(Layer::glorot(dim, width, Activation::Relu, &mut rng));
        dim = width;
    }
    let feature_dim = dim;

    let mut head = Vec::new();
    for &width in &arch.head_hidden {
        head.push(Layer::glorot(dim, width, Activation::Relu, &mut rng));
        dim = width;
    }
    head.push(Layer::glorot(dim, 1, arch.head_activation, &mut rng));

    let kind = config.adversary_kind();
    let adversary = match kind {
        AdversaryKind::None => Vec::new(),
        _ => {
            let mut rng_adv =
                StdRng::seed_from_u64(stream_seed(config.seed, STREAM_ADVERSARY_INIT));
            let out_act = if kind == AdversaryKind::CrossEntropy {
                Activation::Sigmoid
            } else {
                Activation::Identity
            };
            let mut layers = Vec::new();
            let mut dim = feature_dim + 1;
            for &width in &arch.adversary_hidden {
                layers.push(Layer::glorot(dim, width, Activation::Relu, &mut rng_adv));
                dim = width;
            }
            layers.push(Layer::glorot(dim, 1, out_act, &mut rng_adv));
            layers
        }
    };

    let model = MlpModel { feature_map, head, adversary, adversary_kind: kind, y_scale };
    model.validate(input_dim)?;
    Ok(model)
}

/// Plain minibatch MSE training; no adversary.
pub fn train_plain(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    if config.algorithm != Algorithm::Plain {
        return Err(Error::Config("train_plain requires algorithm = plain".into()));
    }
    train_loop(config, train, test)
}

/// Cross-entropy adversary: the discriminator descends BCE on `(Z, Y)`
/// against the group label while `g` receives the reversed gradient.
pub fn train_cenet(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    if config.algorithm != Algorithm::CeNet {
        return Err(Error::Config("train_cenet requires algorithm = ce_net".into()));
    }
    train_loop(config, train, test)
}

/// Wasserstein critic: the critic ascends the group-mean output difference
/// (weights clipped after every step) while `g` descends it via the GRL.
pub fn train_wasserstein(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    if config.algorithm != Algorithm::WassersteinNet {
        return Err(Error::Config(
            "train_wasserstein requires algorithm = wasserstein_net".into(),
        ));
    }
    train_loop(config, train, test)
}

/// Dispatches on `config.algorithm`.
pub fn train_run(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    train_loop(config, train, test)
}

fn train_loop(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Domain("training split is empty".into()));
    }
    if !test.is_empty() && !test.has_both_groups() {
        return Err(Error::Domain(
            "test split must contain both groups for per-epoch gap logging".into(),
        ));
    }

    let y_scale = YScale::fit(&train.y);
    let mut model = build_model(config, train.feature_dim(), y_scale)?;
    let feature_dim = model.feature_dim();

    let mut opt_g = OptimizerState::new(config.optimizer);
    let mut opt_h = OptimizerState::new(config.optimizer);
    let mut opt_f = OptimizerState::new(config.optimizer);

    let mut batch_rng = StdRng::seed_from_u64(stream_seed(config.seed, STREAM_BATCHES));
    let n = train.len();
    let mut logs = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut batch_rng);

        let mut sse_sum = 0.0;
        let mut adv_sum = 0.0;
        let mut adv_count = 0usize;

        for chunk in order.chunks(config.batch_size) {
            let xb = train.x.select_rows(chunk);
            let yb: Vec<f64> = chunk.iter().map(|&i| train.y[i]).collect();
            let ab: Vec<u8> = chunk.iter().map(|&i| train.a[i]).collect();

            // shared regression path
            let (z, cache_g) = forward(&model.feature_map, &xb)?;
            let (pred, cache_h) = forward(&model.head, &z)?;
            let (mse, dpred) = mse_loss(pred.as_column_slice(), &yb)?;
            if !mse.is_finite() {
                return Err(Error::NonFinite(format!("train MSE at epoch {epoch}")));
            }
            let dpred = RealMatrix::from_vec(chunk.len(), 1, dpred)?;
            let (h_grads, dz_head) = backward(&model.head, &cache_h, &dpred)?;

            // adversary path; dz_total carries the reversed gradient into g
            let mut dz_total = dz_head;
            let mut f_grads = None;
            match model.adversary_kind {
                AdversaryKind::None => {}
                AdversaryKind::CrossEntropy => {
                    let y_scaled: Vec<f64> =
                        yb.iter().map(|&y| model.y_scale.apply(y)).collect();
                    let adv_in = z.append_column(&y_scaled)?;
                    let (p, cache_f) = forward(&model.adversary, &adv_in)?;
                    let a_f64: Vec<f64> = ab.iter().map(|&g| g as f64).collect();
                    let (bce, dp) = bce_loss(p.as_column_slice(), &a_f64)?;
                    if !bce.is_finite() {
                        return Err(Error::NonFinite(format!(
                            "adversary BCE at epoch {epoch}"
                        )));
                    }
                    let dp = RealMatrix::from_vec(chunk.len(), 1, dp)?;
                    let (grads, d_adv_in) = backward(&model.adversary, &cache_f, &dp)?;
                    let dz_adv = d_adv_in.columns(0..feature_dim);
                    dz_total = dz_total.add(&grl_backward(&dz_adv, config.lambda))?;
                    f_grads = Some(grads);
                    adv_sum += bce * chunk.len() as f64;
                    adv_count += chunk.len();
                }
                AdversaryKind::WassersteinCritic => {
                    let y_scaled: Vec<f64> =
                        yb.iter().map(|&y| model.y_scale.apply(y)).collect();
                    let adv_in = z.append_column(&y_scaled)?;
                    let (out, cache_f) = forward(&model.adversary, &adv_in)?;
                    if let Some((value, dout)) =
                        wasserstein_penalty(out.as_column_slice(), &ab)?
                    {
                        if !value.is_finite() {
                            return Err(Error::NonFinite(format!(
                                "critic objective at epoch {epoch}"
                            )));
                        }
                        // the critic ascends the penalty: descend its negative
                        let neg = RealMatrix::from_vec(
                            chunk.len(),
                            1,
                            dout.iter().map(|v| -v).collect(),
                        )?;
                        let (grads, d_adv_in) = backward(&model.adversary, &cache_f, &neg)?;
                        let dz_crit = d_adv_in.columns(0..feature_dim);
                        dz_total = dz_total.add(&grl_backward(&dz_crit, config.lambda))?;
                        f_grads = Some(grads);
                        adv_sum += value * chunk.len() as f64;
                        adv_count += chunk.len();
                    }
                    // single-group batch: skip the penalty and critic update
                }
            }

            let (g_grads, _) = backward(&model.feature_map, &cache_g, &dz_total)?;

            // simultaneous single-step updates
            opt_h.step(&mut model.head, &h_grads);
            opt_g.step(&mut model.feature_map, &g_grads);
            if let Some(grads) = f_grads {
                opt_f.step(&mut model.adversary, &grads);
                if model.adversary_kind == AdversaryKind::WassersteinCritic {
                    clip_weights(&mut model.adversary, config.clip_c);
                }
            }

            sse_sum += mse * chunk.len() as f64;
        }

        let train_mse = sse_sum / n as f64;
        let (test_mse, gap) = if test.is_empty() {
            (0.0, 0.0)
        } else {
            let pred = model.predict(&test.x)?;
            let (mse, _) = mse_loss(&pred, &test.y)?;
            let gp = GroupedPredictions::new(pred, test.y.clone(), test.a.clone())?;
            (mse, error_gap(&gp)?)
        };
        let adversary_loss = if adv_count > 0 { adv_sum / adv_count as f64 } else { 0.0 };
        if !train_mse.is_finite() || !test_mse.is_finite() || !adversary_loss.is_finite() {
            return Err(Error::NonFinite(format!("epoch {epoch} produced a non-finite log")));
        }
        logs.push(EpochLog { epoch, train_mse, test_mse, err_gap: gap, adversary_loss });
    }

    Ok((model, logs))
}

/// Metrics, bound inputs, and the evaluated bounds for one checkpoint.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    pub context: BoundContext,
    /// Lower bound on `err0 + err1`.
    pub lower_bound: f64,
    /// Lower bound on the α-weighted joint error.
    pub lower_bound_weighted: f64,
    /// Upper bound on the error gap.
    pub upper_bound: f64,
}

/// Runs the model over a dataset and reports group errors, the error gap,
/// R², accuracy (when the targets are binary), the distribution distances,
/// and both error bounds.
pub fn evaluate(model: &MlpModel, dataset: &Dataset, y_bins: usize) -> Result<Evaluation> {
    let pred = model.predict(&dataset.x)?;
    evaluate_predictions(pred, dataset.y.clone(), dataset.a.clone(), y_bins)
}

/// [`evaluate`] for precomputed predictions; the audit entry point.
pub fn evaluate_predictions(
    pred: Vec<f64>,
    target: Vec<f64>,
    group: Vec<u8>,
    y_bins: usize,
) -> Result<Evaluation> {
    let gp = GroupedPredictions::new(pred, target, group)?;
    let err0 = group_error(&gp, 0)?;
    let err1 = group_error(&gp, 1)?;
    let gap = (err0 - err1).abs();
    let r2 = r2_score(gp.pred(), gp.target())?;
    let binary = gp.target().iter().all(|&v| v == 0.0 || v == 1.0);
    let accuracy =
        if binary { Some(binary_accuracy(gp.pred(), gp.target())?) } else { None };

    let (y0, y1) = (gp.group_target(0), gp.group_target(1));
    let (p0, p1) = (gp.group_pred(0), gp.group_pred(1));
    let w1_labels = wasserstein1d_exact(&y0, &y1)?;
    let w1_preds = wasserstein1d_exact(&p0, &p1)?;
    let tv_labels = tv_histogram(&y0, &y1, DEFAULT_TV_BINS)?;
    let cond = conditional_discrepancy(&gp, y_bins)?;

    let m_bound = gp
        .target()
        .iter()
        .chain(gp.pred())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let context = BoundContext {
        m_bound,
        alpha: gp.alpha(),
        w1_labels,
        w1_preds,
        tv_labels,
        cond_discrepancy: cond,
    };
    let lower = lower_bound_joint(w1_labels, w1_preds);
    let lower_w = lower_bound_weighted(context.alpha, w1_labels, w1_preds);
    let upper = upper_bound_gap(&context);

    // the joint-error lower bound and the per-group W1 bound hold exactly
    // on empirical distributions
    debug_assert!(err0 + err1 >= lower - 1e-9, "joint-error lower bound violated");
    debug_assert!(
        wasserstein1d_exact(&y0, &p0)? <= err0.sqrt() + 1e-9
            && wasserstein1d_exact(&y1, &p1)? <= err1.sqrt() + 1e-9,
        "per-group W1 exceeded the root group error"
    );

    Ok(Evaluation {
        metrics: MetricsReport {
            err0,
            err1,
            err_gap: gap,
            r2,
            accuracy,
            w1_labels,
            w1_preds,
            tv_labels,
        },
        context,
        lower_bound: lower,
        lower_bound_weighted: lower_w,
        upper_bound: upper,
    })
}

/// Metric columns of one sweep cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellMetrics {
    pub r2: f64,
    pub err0: f64,
    pub err1: f64,
    pub err_gap: f64,
    pub w1_labels: f64,
    pub w1_preds: f64,
    pub tv_labels: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl From<&Evaluation> for CellMetrics {
    fn from(e: &Evaluation) -> Self {
        CellMetrics {
            r2: e.metrics.r2,
            err0: e.metrics.err0,
            err1: e.metrics.err1,
            err_gap: e.metrics.err_gap,
            w1_labels: e.metrics.w1_labels,
            w1_preds: e.metrics.w1_preds,
            tv_labels: e.metrics.tv_labels,
            lower_bound: e.lower_bound,
            upper_bound: e.upper_bound,
        }
    }
}

/// One `(λ, seed)` training run; failures are carried per cell so a sweep
/// survives individual bad cells.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub seed: u64,
    pub outcome: std::result::Result<CellMetrics, String>,
}

/// Per-λ mean and sample standard deviation over the successful seeds.
#[derive(Debug, Clone, Serialize)]
pub struct SweepAggregate {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub n_seeds: usize,
    pub r2_mean: f64,
    pub r2_std: f64,
    pub err_gap_mean: f64,
    pub err_gap_std: f64,
    pub err0_mean: f64,
    pub err0_std: f64,
    pub err1_mean: f64,
    pub err1_std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
    pub aggregates: Vec<SweepAggregate>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains and evaluates every `(λ, seed)` cell, then aggregates per λ.
///
/// Cells are independent; up to `jobs` of them run concurrently. Results
/// land in fixed slots keyed by `(λ index, seed index)`, so the output is
/// identical whatever the parallelism.
pub fn lambda_sweep(
    base_config: &RunConfig,
    lambdas: &[f64],
    seeds: &[u64],
    train: &Dataset,
    test: &Dataset,
    jobs: usize,
) -> Result<SweepTable> {
    if lambdas.is_empty() || seeds.is_empty() {
        return Err(Error::Config("sweep requires nonempty lambdas and seeds".into()));
    }
    let jobs = jobs.max(1);
    let grid: Vec<(f64, u64)> = lambdas
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();

    let run_cell = |&(lambda, seed): &(f64, u64)| -> SweepCell {
        let config = RunConfig { lambda, seed, ..base_config.clone() };
        let outcome = train_run(&config, train, test)
            .and_then(|(model, _)| evaluate(&model, test, config.y_bins))
            .map(|e| CellMetrics::from(&e))
            .map_err(|e| format!("lambda={lambda} seed={seed}: {e}"));
        SweepCell { algorithm: base_config.algorithm, lambda, seed, outcome }
    };

    let cells: Vec<SweepCell> = if jobs == 1 {
        grid.iter().map(run_cell).collect()
    } else {
        let slots: Mutex<Vec<Option<SweepCell>>> = Mutex::new(vec![None; grid.len()]);
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(grid.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= grid.len() {
                        break;
                    }
                    let cell = run_cell(&grid[i]);
                    slots.lock().expect("sweep slot lock")[i] = Some(cell);
                });
            }
        });
        slots
            .into_inner()
            .expect("sweep slot lock")
            .into_iter()
            .map(|c| c.expect("all sweep cells filled"))
            .collect()
    };

    let aggregates = lambdas
        .iter()
        .map(|&lambda| {
            let ok: Vec<&CellMetrics> = cells
                .iter()
                .filter(|c| c.lambda == lambda)
                .filter_map(|c| c.outcome.as_ref().ok())
                .collect();
            let collect =
                |f: fn(&CellMetrics) -> f64| -> Vec<f64> { ok.iter().map(|m| f(m)).collect() };
            let (r2_mean, r2_std) = mean_std(&collect(|m| m.r2));
            let (err_gap_mean, err_gap_std) = mean_std(&collect(|m| m.err_gap));
            let (err0_mean, err0_std) = mean_std(&collect(|m| m.err0));
            let (err1_mean, err1_std) = mean_std(&collect(|m| m.err1));
            SweepAggregate {
                algorithm: base_config.algorithm,
                lambda,
                n_seeds: ok.len(),
                r2_mean,
                r2_std,
                err_gap_mean,
                err_gap_std,
                err0_mean,
                err0_std,
                err1_mean,
                err1_std,
            }
        })
        .collect();

    Ok(SweepTable { cells, aggregates })
}

/// Writes the per-epoch log as CSV with the columns
/// `epoch,train_mse,test_mse,err_gap,adversary_loss`.
pub fn write_epoch_log_csv(path: &std::path::Path, logs: &[EpochLog]) -> Result<()> {
    let mut out = String::from("epoch,train_mse,test_mse,err_gap,adversary_loss\n");
    for l in logs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            l.epoch, l.train_mse, l.test_mse, l.err_gap, l.adversary_loss
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

impl SweepTable {
    /// Per-cell CSV; failed cells leave the metric columns empty and put
    /// the error in `status`.
    pub fn write_cells_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::from(
            "algorithm,lambda,seed,r2,err0,err1,err_gap,w1_labels,w1_preds,tv_labels,lower_bound,upper_bound,status\n",
        );
        for c in &self.cells {
            match &c.outcome {
                Ok(m) => out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},ok\n",
                    c.algorithm.name(),
                    c.lambda,
                    c.seed,
                    m.r2,
                    m.err0,
                    m.err1,
                    m.err_gap,
                    m.w1_labels,
                    m.w1_preds,
                    m.tv_labels,
                    m.lower_bound,
                    m.upper_bound,
                )),
                Err(e) => out.push_str(&format!(
                    "{},{},{},,,,,,,,,,error: {}\n",
                    c.algorithm.name(),
                    c.lambda,
                    c.seed,
                    e.replace(',', ";"),
                )),
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Per-λ aggregate CSV (means and sample standard deviations).
    pub fn write_aggregates_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::from(
            "algorithm,lambda,n_seeds,r2_mean,r2_std,err_gap_mean,err_gap_std,err0_mean,err0_std,err1_mean,err1_std\n",
        );
        for a in &self.aggregates {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                a.algorithm.name(),
                a.lambda,
                a.n_seeds,
                a.r2_mean,
                a.r2_std,
                a.err_gap_mean,
                a.err_gap_std,
                a.err0_mean,
                a.err0_std,
                a.err1_mean,
                a.err1_std,
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}
