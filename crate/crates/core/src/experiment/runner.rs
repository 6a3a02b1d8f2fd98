//! Multi-trial execution of the online protocol.

use std::time::Instant;

use crate::aos::{aos_initialize, aos_learn_chunk, CombineMode, EnsembleModel};
use crate::baselines::{adaboost_elm_batch, os_ensemble_initialize, os_ensemble_learn_chunk, VwosEnsemble};
use crate::data::{self, apply_pca, chunk_stream, fit_pca, CsvOptions, Dataset, PcaModel, StreamPlan};
use crate::elm::LabeledChunk;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, STREAM_MODEL};

use super::config::{DataPaths, ExperimentConfig, ModelKind};
use super::metrics::{compute_tail_std, CurvePoint, RunMetrics, TrialMetrics};

/// Train and test sets after optional PCA. The test set never enters training.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub pca: Option<PcaModel>,
}

fn require<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> Result<&'a std::path::PathBuf> {
    p.as_ref()
        .ok_or_else(|| Error::Parameter(format!("no {what} given")))
}

pub fn load_sets(paths: &DataPaths) -> Result<(Dataset, Dataset)> {
    let (train, test) = if paths.train_csv.is_some() || paths.test_csv.is_some() {
        let opts = CsvOptions {
            label_column: paths.label_column,
            ..CsvOptions::default()
        };
        (
            data::load_csv(require(&paths.train_csv, "training CSV")?, &opts)?,
            data::load_csv(require(&paths.test_csv, "test CSV")?, &opts)?,
        )
    } else {
        (
            data::load_idx(
                require(&paths.train_images, "training images")?,
                require(&paths.train_labels, "training labels")?,
            )?,
            data::load_idx(
                require(&paths.test_images, "test images")?,
                require(&paths.test_labels, "test labels")?,
            )?,
        )
    };
    if train.dim() != test.dim() {
        return Err(Error::Consistency(format!(
            "training data has {} features, test data {}",
            train.dim(),
            test.dim()
        )));
    }
    let m = train.class_count.max(test.class_count);
    Ok((
        Dataset::with_class_count(train.features, train.labels, m)?,
        Dataset::with_class_count(test.features, test.labels, m)?,
    ))
}

/// PCA is fitted on the training rows only, then applied to both sets.
pub fn project(train: Dataset, test: Dataset, target: Option<f64>) -> Result<PreparedData> {
    let Some(target) = target else {
        return Ok(PreparedData { train, test, pca: None });
    };
    let pca = fit_pca(&train.features, target)?;
    let train = Dataset::with_class_count(apply_pca(&pca, &train.features)?, train.labels, train.class_count)?;
    let test = Dataset::with_class_count(apply_pca(&pca, &test.features)?, test.labels, test.class_count)?;
    Ok(PreparedData {
        train,
        test,
        pca: Some(pca),
    })
}

pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let (train, test) = load_sets(&cfg.data)?;
    project(train, test, cfg.pca_variance_target)
}

enum Learner {
    Aos(EnsembleModel),
    Os(EnsembleModel),
    Vwos(VwosEnsemble),
}

impl Learner {
    fn init(kind: ModelKind, chunk0: &LabeledChunk, cfg: &crate::aos::AosConfig) -> Result<Self> {
        Ok(match kind {
            ModelKind::Aos | ModelKind::AosNoForget => Learner::Aos(aos_initialize(chunk0, cfg)?),
            ModelKind::Eos => Learner::Os(os_ensemble_initialize(chunk0, cfg, CombineMode::OutputSum)?),
            ModelKind::Vos => Learner::Os(os_ensemble_initialize(chunk0, cfg, CombineMode::MajorityVote)?),
            ModelKind::Vwos => Learner::Vwos(VwosEnsemble::initialize(chunk0, cfg)?),
            ModelKind::AdaboostBatch => unreachable!("batch model has no stream"),
        })
    }

    fn learn(&mut self, chunk: &LabeledChunk) -> Result<()> {
        match self {
            Learner::Aos(m) => aos_learn_chunk(m, chunk),
            Learner::Os(m) => os_ensemble_learn_chunk(m, chunk),
            Learner::Vwos(v) => v.learn_chunk(chunk),
        }
    }

    fn model(&self) -> &EnsembleModel {
        match self {
            Learner::Aos(m) | Learner::Os(m) => m,
            Learner::Vwos(v) => &v.model,
        }
    }

    fn into_model(self) -> EnsembleModel {
        match self {
            Learner::Aos(m) | Learner::Os(m) => m,
            Learner::Vwos(v) => v.model,
        }
    }
}

pub fn accuracy(model: &EnsembleModel, test: &Dataset) -> Result<f64> {
    let (pred, _) = model.predict(&test.features)?;
    let hits = pred.iter().zip(&test.labels).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / test.len() as f64)
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub metrics: TrialMetrics,
    pub model: EnsembleModel,
}

/// One trial. Its randomness depends only on `(master_seed, trial)`.
pub fn run_trial(cfg: &ExperimentConfig, data: &PreparedData, trial: usize) -> Result<TrialOutcome> {
    let start = Instant::now();
    let trial_seed = derive_seed(cfg.master_seed, trial as u64);
    let aos_cfg = cfg.aos_config(derive_seed(trial_seed, STREAM_MODEL));
    let train = &data.train;

    if cfg.model == ModelKind::AdaboostBatch {
        let all = LabeledChunk::new(train.features.clone(), train.labels.clone(), train.class_count)?;
        let model = adaboost_elm_batch(&all, &aos_cfg)?;
        let curve = vec![CurvePoint {
            chunk_index: 0,
            seen_samples: train.len(),
            test_accuracy: accuracy(&model, &data.test)?,
        }];
        return Ok(TrialOutcome {
            metrics: TrialMetrics {
                trial,
                trial_seed,
                curve,
                tail_std: None,
                wall_time: start.elapsed(),
            },
            model,
        });
    }

    let plan = StreamPlan::new(train.len(), cfg.initial_size, cfg.chunk_size, trial_seed)?;
    let last = plan.online_chunk_count();
    let mut stream = chunk_stream(train, &plan)?;
    let chunk0 = stream.next().expect("stream always yields the initial block")?;
    let mut seen = chunk0.len();
    let mut learner = Learner::init(cfg.model, &chunk0, &aos_cfg)?;
    drop(chunk0);
    let mut curve = vec![CurvePoint {
        chunk_index: 0,
        seen_samples: seen,
        test_accuracy: accuracy(learner.model(), &data.test)?,
    }];
    for (i, chunk) in stream.enumerate() {
        let chunk = chunk?;
        learner.learn(&chunk)?;
        seen += chunk.len();
        let idx = i + 1;
        if idx % cfg.eval_every == 0 || idx == last {
            curve.push(CurvePoint {
                chunk_index: idx,
                seen_samples: seen,
                test_accuracy: accuracy(learner.model(), &data.test)?,
            });
        }
    }
    let accs: Vec<f64> = curve.iter().map(|p| p.test_accuracy).collect();
    let tail_std = compute_tail_std(&accs).ok();
    Ok(TrialOutcome {
        metrics: TrialMetrics {
            trial,
            trial_seed,
            curve,
            tail_std,
            wall_time: start.elapsed(),
        },
        model: learner.into_model(),
    })
}

/// Runs every trial, `cfg.jobs` at a time, returning outcomes in trial order.
pub fn run_trials(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let wrap = |trial: usize, r: Result<TrialOutcome>| {
        r.map_err(|e| Error::Trial {
            trial,
            source: Box::new(e),
        })
    };
    let mut out = Vec::with_capacity(cfg.trials);
    let trials: Vec<usize> = (0..cfg.trials).collect();
    for batch in trials.chunks(cfg.jobs) {
        if batch.len() == 1 {
            out.push(wrap(batch[0], run_trial(cfg, data, batch[0]))?);
            continue;
        }
        let results: Vec<Result<TrialOutcome>> = std::thread::scope(|s| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&t| s.spawn(move || run_trial(cfg, data, t)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("trial thread panicked"))
                .collect()
        });
        for (&t, r) in batch.iter().zip(results) {
            out.push(wrap(t, r)?);
        }
    }
    Ok(out)
}

pub fn summarize(cfg: &ExperimentConfig, label: String, outcomes: &[TrialOutcome]) -> RunMetrics {
    let gamma = match cfg.model {
        ModelKind::Aos => Some(cfg.gamma),
        ModelKind::AosNoForget => Some(0.0),
        _ => None,
    };
    RunMetrics::aggregate(
        label,
        gamma,
        cfg.master_seed,
        outcomes.iter().map(|o| o.metrics.clone()).collect(),
    )
}

pub fn run_on(cfg: &ExperimentConfig, data: &PreparedData) -> Result<RunMetrics> {
    let outcomes = run_trials(cfg, data)?;
    Ok(summarize(cfg, cfg.label(), &outcomes))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunMetrics> {
    cfg.validate()?;
    let data = prepare_data(cfg)?;
    run_on(cfg, &data)
}

/// Rows of a forgetting-factor sweep plus the no-forget reference.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub runs: Vec<RunMetrics>,
    pub no_forget: RunMetrics,
    /// Gamma of the most accurate swept run.
    pub best_gamma: f64,
    /// `tail_std(no forget) / tail_std(best gamma)`.
    pub std_ratio: f64,
}

impl SweepTable {
    pub fn all_runs(&self) -> Vec<RunMetrics> {
        let mut v = self.runs.clone();
        v.push(self.no_forget.clone());
        v
    }
}

pub fn gamma_label(gamma: f64) -> String {
    format!("aos_g{gamma}")
}

pub fn sweep_gamma(cfg: &ExperimentConfig, data: &PreparedData, gammas: &[f64]) -> Result<SweepTable> {
    if gammas.is_empty() {
        return Err(Error::Parameter("gamma list is empty".into()));
    }
    let mut runs = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let c = ExperimentConfig {
            model: ModelKind::Aos,
            gamma: g,
            ..cfg.clone()
        };
        let outcomes = run_trials(&c, data)?;
        runs.push(summarize(&c, gamma_label(g), &outcomes));
    }
    let nf = ExperimentConfig {
        model: ModelKind::AosNoForget,
        ..cfg.clone()
    };
    let no_forget = summarize(&nf, nf.label(), &run_trials(&nf, data)?);
    let best = runs
        .iter()
        .max_by(|a, b| a.mean_final_accuracy.total_cmp(&b.mean_final_accuracy))
        .expect("nonempty");
    let std_ratio = match (no_forget.tail_std, best.tail_std) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    };
    Ok(SweepTable {
        best_gamma: best.gamma.unwrap_or(f64::NAN),
        std_ratio,
        runs,
        no_forget,
    })
}

/// The five comparison models under one master seed.
pub const COMPARE_MODELS: [ModelKind; 5] = [
    ModelKind::Eos,
    ModelKind::Vos,
    ModelKind::Vwos,
    ModelKind::Aos,
    ModelKind::AdaboostBatch,
];

pub fn compare(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Vec<RunMetrics>> {
    COMPARE_MODELS
        .iter()
        .map(|&model| {
            run_on(
                &ExperimentConfig {
                    model,
                    ..cfg.clone()
                },
                data,
            )
        })
        .collect()
}
