//! Boosted online sequential ELM ensemble.
//!
//! A chain of `C` ELMs is trained on every chunk in order. Each member sees
//! the chunk under the current per-sample cost vector; its weighted error sets
//! its SAMME weight, and misclassified samples are up-weighted before the
//! next member trains. In the online phase a member's weight is an
//! exponential blend of its previous weight and the fresh SAMME value,
//! controlled by the forgetting factor `γ`.

use std::fmt;
use std::str::FromStr;

use crate::elm::{
    argmax, fit_weighted, hidden_map, predict_label, random_projection_with, Activation, ElmState,
    LabeledChunk, ProjectionInit,
};
use crate::error::{Error, Result};
use crate::numerics::{matmul, Matrix};
use crate::seed::derive_seed;
use crate::sequential::rls_update;

/// Default clamp applied to the weighted error before taking logs.
pub const DEFAULT_ERROR_CLAMP: f64 = 1e-10;

/// Per-sample boosting costs for one chunk. Entries are positive and sum to one
/// after every update.
#[derive(Clone, Debug, PartialEq)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    /// Wraps raw weights without normalizing them.
    pub fn from_raw(w: Vec<f64>) -> Self {
        CostVector(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Kahan-compensated total.
    pub fn total(&self) -> f64 {
        kahan_sum(&self.0)
    }
}

fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Uniform costs `1/N`.
pub fn init_cost(n: usize) -> Result<CostVector> {
    if n == 0 {
        return Err(Error::Parameter("cost vector needs N ≥ 1".into()));
    }
    Ok(CostVector(vec![1.0 / n as f64; n]))
}

/// `Σ wₙ·[predₙ ≠ truthₙ] / Σ wₙ`
pub fn weighted_error(w: &CostVector, predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != w.len() || truth.len() != w.len() {
        return Err(Error::Shape {
            op: "weighted_error",
            lhs: (w.len(), 1),
            rhs: (predicted.len(), truth.len()),
        });
    }
    let wrong: Vec<f64> = w
        .0
        .iter()
        .zip(predicted.iter().zip(truth))
        .filter(|(_, (p, t))| p != t)
        .map(|(&wi, _)| wi)
        .collect();
    let total = w.total();
    if !(total > 0.0) {
        return Err(Error::Degenerate("cost vector sums to zero".into()));
    }
    Ok((kahan_sum(&wrong) / total).clamp(0.0, 1.0))
}

fn check_clamp(clamp: f64) -> Result<()> {
    if !(clamp > 0.0 && clamp < 0.5) {
        return Err(Error::Parameter(format!(
            "error clamp must lie in (0, 0.5), got {clamp}"
        )));
    }
    Ok(())
}

/// Multiclass AdaBoost (SAMME) member weight, natural log:
/// `ln((1 − e)/e) + ln(M − 1)` with `e` clamped to `[ε, 1 − ε]`.
pub fn samme_alpha(error: f64, class_count: usize, clamp: f64) -> Result<f64> {
    if class_count < 2 {
        return Err(Error::Parameter(format!(
            "SAMME weight needs M ≥ 2 classes, got {class_count}"
        )));
    }
    check_clamp(clamp)?;
    if error.is_nan() {
        return Err(Error::NonFinite("samme_alpha"));
    }
    let e = error.clamp(clamp, 1.0 - clamp);
    Ok((-e).ln_1p() - e.ln() + ((class_count - 1) as f64).ln())
}

/// `γ·α_prev + (1 − γ)·samme_alpha(e)`
pub fn forget_alpha(
    alpha_prev: f64,
    error: f64,
    class_count: usize,
    gamma: f64,
    clamp: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    let fresh = samme_alpha(error, class_count, clamp)?;
    let blended = gamma * alpha_prev + (1.0 - gamma) * fresh;
    // rounding can step a hair outside the convex hull
    Ok(blended.clamp(alpha_prev.min(fresh), alpha_prev.max(fresh)))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!(
            "forgetting factor must lie in [0, 1], got {gamma}"
        )));
    }
    Ok(())
}

/// Multiplies misclassified samples' costs by `e^α` and renormalizes.
///
/// Works in log space so large `α` cannot overflow; entries are floored at
/// the smallest normal `f64` so later `1/w` stays finite.
pub fn update_cost(
    w: &CostVector,
    alpha: f64,
    predicted: &[usize],
    truth: &[usize],
) -> Result<CostVector> {
    if predicted.len() != w.len() || truth.len() != w.len() {
        return Err(Error::Shape {
            op: "update_cost",
            lhs: (w.len(), 1),
            rhs: (predicted.len(), truth.len()),
        });
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("update_cost"));
    }
    if w.0.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Parameter("update_cost needs strictly positive costs".into()));
    }
    let logs: Vec<f64> = w
        .0
        .iter()
        .zip(predicted.iter().zip(truth))
        .map(|(&wi, (p, t))| wi.ln() + if p != t { alpha } else { 0.0 })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total = kahan_sum(&out);
    for v in &mut out {
        *v = (*v / total).max(f64::MIN_POSITIVE);
    }
    Ok(CostVector(out))
}

/// How member outputs are merged at inference time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineMode {
    /// `Σ αc·Oc`, then argmax.
    WeightedSum,
    /// `Σ Oc` with equal weights.
    OutputSum,
    /// One vote per member for its own argmax.
    MajorityVote,
}

impl fmt::Display for CombineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombineMode::WeightedSum => "weighted-sum",
            CombineMode::OutputSum => "output-sum",
            CombineMode::MajorityVote => "majority-vote",
        })
    }
}

impl FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "weighted-sum" => Ok(CombineMode::WeightedSum),
            "output-sum" => Ok(CombineMode::OutputSum),
            "majority-vote" => Ok(CombineMode::MajorityVote),
            other => Err(Error::Format(format!("unknown combine mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AosConfig {
    pub classifier_count: usize,
    pub hidden_count: usize,
    pub gamma: f64,
    pub ridge: f64,
    pub error_clamp: f64,
    pub activation: Activation,
    pub projection: ProjectionInit,
    pub rng_seed: u64,
}

impl Default for AosConfig {
    fn default() -> Self {
        AosConfig {
            classifier_count: 30,
            hidden_count: 150,
            gamma: 0.95,
            ridge: 0.0,
            error_clamp: DEFAULT_ERROR_CLAMP,
            activation: Activation::Sigmoid,
            projection: ProjectionInit::default(),
            rng_seed: 0,
        }
    }
}

impl AosConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classifier_count == 0 {
            return Err(Error::Parameter("classifier count must be ≥ 1".into()));
        }
        if self.hidden_count == 0 {
            return Err(Error::Parameter("hidden count must be ≥ 1".into()));
        }
        check_gamma(self.gamma)?;
        check_clamp(self.error_clamp)?;
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::Parameter(format!("ridge must be ≥ 0, got {}", self.ridge)));
        }
        Ok(())
    }

    /// Seed of member `c`'s hidden layer.
    pub fn member_seed(&self, c: usize) -> u64 {
        derive_seed(self.rng_seed, c as u64)
    }
}

/// An ordered chain of ELMs plus how to combine them.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleModel {
    pub classifiers: Vec<ElmState>,
    pub gamma: f64,
    pub error_clamp: f64,
    pub class_count: usize,
    /// Number of online chunks learned since initialization.
    pub chunk_index: usize,
    pub combine: CombineMode,
}

impl EnsembleModel {
    pub fn input_dim(&self) -> usize {
        self.classifiers.first().map_or(0, ElmState::input_dim)
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.classifiers.iter().map(|c| c.alpha).collect()
    }

    /// Checks the structural invariants shared by every mode.
    pub fn validate(&self) -> Result<()> {
        let first = self
            .classifiers
            .first()
            .ok_or_else(|| Error::Parameter("ensemble needs at least one classifier".into()))?;
        check_gamma(self.gamma)?;
        for (c, st) in self.classifiers.iter().enumerate() {
            if st.input_dim() != first.input_dim()
                || st.class_count != self.class_count
                || st.beta.shape() != (st.hidden_count(), self.class_count)
                || st.p.shape() != (st.hidden_count(), st.hidden_count())
            {
                return Err(Error::Consistency(format!(
                    "classifier {c} disagrees with the ensemble's dimensions"
                )));
            }
            if !st.alpha.is_finite() {
                return Err(Error::NonFinite("ensemble alpha"));
            }
        }
        Ok(())
    }

    pub fn predict(&self, x: &Matrix) -> Result<(Vec<usize>, Matrix)> {
        ensemble_predict(self, x)
    }
}

/// Runs one boosting pass over a single block, fitting each member from
/// scratch by weighted least squares. Shared by online initialization and
/// the batch benchmark.
pub(crate) fn boost_from_scratch(
    chunk: &LabeledChunk,
    cfg: &AosConfig,
    mut on_cost: impl FnMut(&CostVector),
) -> Result<Vec<ElmState>> {
    cfg.validate()?;
    let m = chunk.class_count();
    if cfg.ridge == 0.0 && chunk.len() < cfg.hidden_count {
        return Err(Error::Parameter(format!(
            "initial block has {} rows but {} hidden nodes; use N₀ ≥ L or a positive ridge",
            chunk.len(),
            cfg.hidden_count
        )));
    }
    let d = chunk.features.cols();
    let mut w = init_cost(chunk.len())?;
    let mut members = Vec::with_capacity(cfg.classifier_count);
    for c in 0..cfg.classifier_count {
        let proj = random_projection_with(
            d,
            cfg.hidden_count,
            cfg.activation,
            cfg.member_seed(c),
            &cfg.projection,
        )?;
        let h = hidden_map(&proj, &chunk.features)?;
        let (beta, p) = fit_weighted(&h, &chunk.targets, w.as_slice(), cfg.ridge)?;
        let pred = predict_label(&matmul(&h, &beta)?);
        let e = weighted_error(&w, &pred, &chunk.labels)?;
        let alpha = samme_alpha(e, m, cfg.error_clamp)?;
        w = update_cost(&w, alpha, &pred, &chunk.labels)?;
        on_cost(&w);
        members.push(ElmState {
            projection: proj,
            beta,
            p,
            alpha,
            class_count: m,
        });
    }
    Ok(members)
}

/// Builds the chain on the initial block: weighted batch fit per member,
/// plain SAMME weights, cost propagation along the chain.
pub fn aos_initialize(chunk0: &LabeledChunk, cfg: &AosConfig) -> Result<EnsembleModel> {
    let classifiers = boost_from_scratch(chunk0, cfg, |_| {})?;
    Ok(EnsembleModel {
        classifiers,
        gamma: cfg.gamma,
        error_clamp: cfg.error_clamp,
        class_count: chunk0.class_count(),
        chunk_index: 0,
        combine: CombineMode::WeightedSum,
    })
}

/// Learns one arriving chunk. Costs restart uniform; members update in
/// chain order and their weights are blended with the forgetting factor.
pub fn aos_learn_chunk(model: &mut EnsembleModel, chunk: &LabeledChunk) -> Result<()> {
    check_gamma(model.gamma)?;
    if chunk.class_count() != model.class_count {
        return Err(Error::Consistency(format!(
            "chunk has {} classes, model has {}",
            chunk.class_count(),
            model.class_count
        )));
    }
    let mut w = init_cost(chunk.len())?;
    // members are mutated in place; work on a copy so a failure leaves the model intact
    let mut next = model.classifiers.clone();
    for st in next.iter_mut() {
        let h = hidden_map(&st.projection, &chunk.features)?;
        rls_update(st, &h, &chunk.targets, w.as_slice())?;
        let pred = predict_label(&matmul(&h, &st.beta)?);
        let e = weighted_error(&w, &pred, &chunk.labels)?;
        st.alpha = forget_alpha(st.alpha, e, model.class_count, model.gamma, model.error_clamp)?;
        w = update_cost(&w, st.alpha, &pred, &chunk.labels)?;
    }
    model.classifiers = next;
    model.chunk_index += 1;
    Ok(())
}

/// Tallies one vote per member label; ties go to the lowest class index.
pub fn majority_vote(member_labels: &[Vec<usize>], class_count: usize) -> Result<(Vec<usize>, Matrix)> {
    let n = member_labels.first().map_or(0, Vec::len);
    let mut votes = Matrix::zeros(n, class_count);
    for labels in member_labels {
        if labels.len() != n {
            return Err(Error::Shape {
                op: "majority_vote",
                lhs: (n, class_count),
                rhs: (labels.len(), 1),
            });
        }
        for (i, &y) in labels.iter().enumerate() {
            if y >= class_count {
                return Err(Error::Parameter(format!("vote for class {y} ≥ M={class_count}")));
            }
            votes[(i, y)] += 1.0;
        }
    }
    Ok((predict_label(&votes), votes))
}

/// Predicts labels and per-class scores for the rows of `x`.
///
/// Members are evaluated in order and accumulated in that order, so the
/// result is reproducible bit for bit.
pub fn ensemble_predict(model: &EnsembleModel, x: &Matrix) -> Result<(Vec<usize>, Matrix)> {
    if model.classifiers.is_empty() {
        return Err(Error::Parameter("ensemble has no classifiers".into()));
    }
    match model.combine {
        CombineMode::MajorityVote => {
            let labels = model
                .classifiers
                .iter()
                .map(|st| Ok(predict_label(&st.predict_raw(x)?)))
                .collect::<Result<Vec<_>>>()?;
            majority_vote(&labels, model.class_count)
        }
        CombineMode::WeightedSum | CombineMode::OutputSum => {
            let mut scores = Matrix::zeros(x.rows(), model.class_count);
            for st in &model.classifiers {
                let o = st.predict_raw(x)?;
                let k = match model.combine {
                    CombineMode::WeightedSum => st.alpha,
                    _ => 1.0,
                };
                scores.add_scaled(k, &o)?;
            }
            let labels = scores.row_iter().map(argmax).collect();
            Ok((labels, scores))
        }
    }
}
