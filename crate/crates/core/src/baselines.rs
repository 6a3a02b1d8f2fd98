//! Comparison ensembles: output-sum (EOS-ELM), majority vote (VOS-ELM),
//! class-reciprocal weighted vote (VWOS-ELM), and batch SAMME over weighted
//! ELMs (AdaBoost-ELM).
//!
//! The online baselines train every member independently on the same
//! chunks; only the combine step and the per-sample costs differ.

use crate::aos::{boost_from_scratch, AosConfig, CombineMode, EnsembleModel};
use crate::elm::{random_projection_with, ElmState, LabeledChunk};
use crate::error::{Error, Result};
use crate::sequential::learn_chunk;

/// Running per-class sample counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCountTracker {
    counts: Vec<u64>,
}

impl ClassCountTracker {
    pub fn new(class_count: usize) -> Self {
        ClassCountTracker {
            counts: vec![0; class_count],
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        ClassCountTracker { counts }
    }

    pub fn observe(&mut self, labels: &[usize]) -> Result<()> {
        if let Some(&bad) = labels.iter().find(|&&y| y >= self.counts.len()) {
            return Err(Error::Parameter(format!(
                "label {bad} outside 0..{}",
                self.counts.len()
            )));
        }
        for &y in labels {
            self.counts[y] += 1;
        }
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `1 / count` for a seen class, 1 for a class not seen yet.
    pub fn cost(&self, class: usize) -> f64 {
        match self.counts[class] {
            0 => 1.0,
            n => 1.0 / n as f64,
        }
    }

    pub fn costs_for(&self, labels: &[usize]) -> Vec<f64> {
        labels.iter().map(|&y| self.cost(y)).collect()
    }
}

fn independent_members(
    chunk0: &LabeledChunk,
    cfg: &AosConfig,
    weights: &[f64],
) -> Result<Vec<ElmState>> {
    cfg.validate()?;
    let d = chunk0.features.cols();
    (0..cfg.classifier_count)
        .map(|c| {
            let proj = random_projection_with(
                d,
                cfg.hidden_count,
                cfg.activation,
                cfg.member_seed(c),
                &cfg.projection,
            )?;
            ElmState::fit(proj, &chunk0.features, &chunk0.targets, weights, cfg.ridge)
        })
        .collect()
}

fn unweighted_model(members: Vec<ElmState>, class_count: usize, combine: CombineMode) -> EnsembleModel {
    EnsembleModel {
        classifiers: members,
        gamma: 1.0,
        error_clamp: crate::aos::DEFAULT_ERROR_CLAMP,
        class_count,
        chunk_index: 0,
        combine,
    }
}

/// `C` independent OS-ELMs on the initial block. `combine` selects EOS
/// (`OutputSum`) or VOS (`MajorityVote`).
pub fn os_ensemble_initialize(
    chunk0: &LabeledChunk,
    cfg: &AosConfig,
    combine: CombineMode,
) -> Result<EnsembleModel> {
    let members = independent_members(chunk0, cfg, &vec![1.0; chunk0.len()])?;
    Ok(unweighted_model(members, chunk0.class_count(), combine))
}

/// Plain OS-ELM step for every member (unit costs).
pub fn os_ensemble_learn_chunk(model: &mut EnsembleModel, chunk: &LabeledChunk) -> Result<()> {
    let ones = vec![1.0; chunk.len()];
    let mut next = model.classifiers.clone();
    for st in next.iter_mut() {
        learn_chunk(st, chunk, &ones)?;
    }
    model.classifiers = next;
    model.chunk_index += 1;
    Ok(())
}

/// Weighted OS-ELM members with per-class reciprocal costs and a vote combine.
#[derive(Clone, Debug, PartialEq)]
pub struct VwosEnsemble {
    pub model: EnsembleModel,
    pub tracker: ClassCountTracker,
}

impl VwosEnsemble {
    pub fn initialize(chunk0: &LabeledChunk, cfg: &AosConfig) -> Result<Self> {
        let mut tracker = ClassCountTracker::new(chunk0.class_count());
        tracker.observe(&chunk0.labels)?;
        let costs = tracker.costs_for(&chunk0.labels);
        let members = independent_members(chunk0, cfg, &costs)?;
        Ok(VwosEnsemble {
            model: unweighted_model(members, chunk0.class_count(), CombineMode::MajorityVote),
            tracker,
        })
    }

    /// Counts the chunk's labels first, then updates members with the refreshed costs.
    pub fn learn_chunk(&mut self, chunk: &LabeledChunk) -> Result<()> {
        let mut tracker = self.tracker.clone();
        tracker.observe(&chunk.labels)?;
        let costs = tracker.costs_for(&chunk.labels);
        let mut next = self.model.classifiers.clone();
        for st in next.iter_mut() {
            learn_chunk(st, chunk, &costs)?;
        }
        self.model.classifiers = next;
        self.model.chunk_index += 1;
        self.tracker = tracker;
        Ok(())
    }
}

/// Batch SAMME over `C` weighted ELMs fitted on the whole training set.
pub fn adaboost_elm_batch(train: &LabeledChunk, cfg: &AosConfig) -> Result<EnsembleModel> {
    let classifiers = boost_from_scratch(train, cfg, |_| {})?;
    Ok(EnsembleModel {
        classifiers,
        gamma: cfg.gamma,
        error_clamp: cfg.error_clamp,
        class_count: train.class_count(),
        chunk_index: 0,
        combine: CombineMode::WeightedSum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aos::{aos_initialize, ensemble_predict, majority_vote};
    use crate::elm::{predict_label, Activation, HiddenProjection};
    use crate::numerics::Matrix;
    use crate::sequential::rls_update;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(per_class: &[usize], spread: f64, seed: u64) -> LabeledChunk {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = per_class.len();
        let mut labels: Vec<usize> = per_class
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        // interleave
        for i in (1..labels.len()).rev() {
            let j = rng.gen_range(0..=i);
            labels.swap(i, j);
        }
        let mut x = Matrix::zeros(labels.len(), 2);
        for (i, &c) in labels.iter().enumerate() {
            let angle = c as f64 / classes as f64 * std::f64::consts::TAU;
            x[(i, 0)] = 3.0 * angle.cos() + rng.gen_range(-spread..spread);
            x[(i, 1)] = 3.0 * angle.sin() + rng.gen_range(-spread..spread);
        }
        LabeledChunk::new(x, labels, classes).unwrap()
    }

    fn cfg(c: usize, l: usize) -> AosConfig {
        AosConfig {
            classifier_count: c,
            hidden_count: l,
            rng_seed: 5,
            ..AosConfig::default()
        }
    }

    fn constant_member(beta: [f64; 2]) -> ElmState {
        ElmState {
            projection: HiddenProjection::new(Matrix::zeros(1, 1), vec![1.0], Activation::Relu)
                .unwrap(),
            beta: Matrix::from_rows(&[beta]).unwrap(),
            p: Matrix::identity(1),
            alpha: 1.0,
            class_count: 2,
        }
    }

    #[test]
    fn single_member_eos_is_plain_os_elm() {
        let c0 = blobs(&[20, 20, 20], 1.0, 1);
        let c1 = blobs(&[10, 10, 10], 1.0, 2);
        let mut model = os_ensemble_initialize(&c0, &cfg(1, 12), CombineMode::OutputSum).unwrap();
        let mut lone = model.classifiers[0].clone();
        os_ensemble_learn_chunk(&mut model, &c1).unwrap();
        learn_chunk(&mut lone, &c1, &[1.0; 30]).unwrap();
        assert_eq!(model.classifiers[0], lone);
        let (labels, _) = ensemble_predict(&model, &c1.features).unwrap();
        assert_eq!(labels, predict_label(&lone.predict_raw(&c1.features).unwrap()));
    }

    #[test]
    fn output_sum_by_hand() {
        let model = unweighted_model(
            vec![constant_member([1.0, 0.0]), constant_member([0.0, 0.5])],
            2,
            CombineMode::OutputSum,
        );
        let (labels, scores) = ensemble_predict(&model, &Matrix::zeros(1, 1)).unwrap();
        assert_eq!(scores.as_slice(), &[1.0, 0.5]);
        assert_eq!(labels, vec![0]);
    }

    #[test]
    fn vote_cases() {
        let (l, _) = majority_vote(&[vec![2, 1], vec![2, 1], vec![2, 1]], 3).unwrap();
        assert_eq!(l, vec![2, 1]);
        let (l, _) = majority_vote(&[vec![0], vec![0], vec![1]], 2).unwrap();
        assert_eq!(l, vec![0]);
        let (l, _) = majority_vote(&[vec![1], vec![0]], 2).unwrap();
        assert_eq!(l, vec![0]);
        let (l, _) = majority_vote(&[vec![2], vec![1]], 3).unwrap();
        assert_eq!(l, vec![1]);
    }

    #[test]
    fn reciprocal_costs() {
        let t = ClassCountTracker::from_counts(vec![10, 40]);
        assert_eq!(t.costs_for(&[0, 1, 1]), vec![0.1, 0.025, 0.025]);
        let fresh = ClassCountTracker::new(3);
        assert_eq!(fresh.cost(2), 1.0);
    }

    #[test]
    fn tracker_counts_grow_with_stream() {
        let mut t = ClassCountTracker::new(3);
        t.observe(&[0, 0, 2]).unwrap();
        t.observe(&[1]).unwrap();
        assert_eq!(t.counts(), &[2, 1, 1]);
        assert_eq!(t.total(), 4);
        assert!(t.observe(&[3]).is_err());
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn balanced_stream_vwos_votes_like_vos() {
        let c0 = blobs(&[20, 20, 20], 1.4, 3);
        let mut vw = VwosEnsemble::initialize(&c0, &cfg(5, 12)).unwrap();
        let mut vos = os_ensemble_initialize(&c0, &cfg(5, 12), CombineMode::MajorityVote).unwrap();
        for k in 0..5 {
            let c = blobs(&[6, 6, 6], 1.4, 10 + k);
            vw.learn_chunk(&c).unwrap();
            os_ensemble_learn_chunk(&mut vos, &c).unwrap();
        }
        let test = blobs(&[100, 100, 100], 1.4, 99);
        let (a, _) = ensemble_predict(&vw.model, &test.features).unwrap();
        let (b, _) = ensemble_predict(&vos, &test.features).unwrap();
        // balanced counts keep costs uniform within a chunk, but their scale
        // shifts between chunks, so only near-identical votes are expected
        let agree = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        assert!(agree as f64 >= 0.95 * a.len() as f64, "{agree}");
    }

    #[test]
    fn balanced_initial_block_vwos_matches_vos_exactly() {
        let c0 = blobs(&[20, 20, 20], 1.4, 3);
        let vw = VwosEnsemble::initialize(&c0, &cfg(5, 12)).unwrap();
        let vos = os_ensemble_initialize(&c0, &cfg(5, 12), CombineMode::MajorityVote).unwrap();
        let test = blobs(&[50, 50, 50], 1.4, 98);
        let (a, _) = ensemble_predict(&vw.model, &test.features).unwrap();
        let (b, _) = ensemble_predict(&vos, &test.features).unwrap();
        assert_eq!(a, b);
        for (x, y) in vw.model.classifiers.iter().zip(&vos.classifiers) {
            assert!(x.beta.max_abs_diff(&y.beta) <= 1e-6 * y.beta.max_abs());
        }
    }

    #[test]
    fn scaled_counts_leave_updates_unchanged() {
        let c0 = blobs(&[15, 25], 1.0, 4);
        let c1 = blobs(&[5, 9], 1.0, 5);
        let base = VwosEnsemble::initialize(&c0, &cfg(1, 8)).unwrap();
        let st0 = base.model.classifiers[0].clone();

        let counts = [40u64, 70];
        let mut a = st0.clone();
        let mut b = st0.clone();
        let wa = ClassCountTracker::from_counts(counts.to_vec()).costs_for(&c1.labels);
        let wb = ClassCountTracker::from_counts(counts.iter().map(|c| c * 9).collect())
            .costs_for(&c1.labels);
        // scale the prior state's P consistently with the cost scale
        b.p.scale(9.0);
        let h = crate::elm::hidden_map(&a.projection, &c1.features).unwrap();
        rls_update(&mut a, &h, &c1.targets, &wa).unwrap();
        rls_update(&mut b, &h, &c1.targets, &wb).unwrap();
        assert!(a.beta.max_abs_diff(&b.beta) <= 1e-10 * a.beta.max_abs());
    }

    #[test]
    fn batch_boosting_matches_online_initialization_on_the_full_set() {
        let train = blobs(&[30, 30, 30], 1.2, 6);
        let c = cfg(6, 15);
        let batch = adaboost_elm_batch(&train, &c).unwrap();
        let online = aos_initialize(&train, &c).unwrap();
        assert_eq!(batch.classifiers, online.classifiers);
    }

    #[test]
    fn boosting_does_not_raise_training_error() {
        let train = blobs(&[40, 40, 40, 40], 1.8, 7);
        let model = adaboost_elm_batch(&train, &cfg(10, 10)).unwrap();
        let err = |labels: &[usize]| {
            labels.iter().zip(&train.labels).filter(|(a, b)| a != b).count()
        };
        let (ens, _) = ensemble_predict(&model, &train.features).unwrap();
        let first = predict_label(&model.classifiers[0].predict_raw(&train.features).unwrap());
        assert!(err(&ens) <= err(&first), "{} > {}", err(&ens), err(&first));
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert_eq, proptest};

        proptest! {
            #[test]
            fn vote_is_total_and_deterministic(
                votes in proptest::collection::vec(0usize..4, 1..12)
            ) {
                let members: Vec<Vec<usize>> = votes.iter().map(|&v| vec![v]).collect();
                let (a, tally) = majority_vote(&members, 4).unwrap();
                let (b, _) = majority_vote(&members, 4).unwrap();
                prop_assert_eq!(&a, &b);
                let best = tally.row(0).iter().cloned().fold(0.0, f64::max);
                let first = tally.row(0).iter().position(|&v| v == best).unwrap();
                prop_assert_eq!(a[0], first);
            }

            #[test]
            fn output_sum_labels_survive_shared_scaling(k in 0.01f64..100.0, seed in any::<u64>()) {
                let c0 = blobs(&[12, 12, 12], 1.5, seed);
                let model = os_ensemble_initialize(&c0, &cfg(3, 8), CombineMode::OutputSum).unwrap();
                let mut scaled = model.clone();
                scaled.classifiers.iter_mut().for_each(|m| m.beta.scale(k));
                let (a, _) = ensemble_predict(&model, &c0.features).unwrap();
                let (b, _) = ensemble_predict(&scaled, &c0.features).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
