//! Seeded shuffle of the training rows cut into an initial block followed by
//! fixed-size chunks.

use rand::seq::SliceRandom;

use crate::elm::LabeledChunk;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, STREAM_PERMUTATION};

use super::Dataset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamPlan {
    pub initial_size: usize,
    pub chunk_size: usize,
    pub permutation: Vec<usize>,
    pub trial_seed: u64,
}

impl StreamPlan {
    /// The permutation is drawn from the permutation stream under `trial_seed`.
    pub fn new(n: usize, initial_size: usize, chunk_size: usize, trial_seed: u64) -> Result<Self> {
        if initial_size == 0 || chunk_size == 0 {
            return Err(Error::Parameter(format!(
                "initial size and chunk size must be at least 1, got {initial_size} and {chunk_size}"
            )));
        }
        if initial_size > n {
            return Err(Error::Parameter(format!(
                "initial size {initial_size} exceeds the {n} available samples"
            )));
        }
        let mut permutation: Vec<usize> = (0..n).collect();
        permutation.shuffle(&mut rng_from(derive_seed(trial_seed, STREAM_PERMUTATION)));
        Ok(Self {
            initial_size,
            chunk_size,
            permutation,
            trial_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// Chunks after the initial block, counting a trailing partial chunk.
    pub fn online_chunk_count(&self) -> usize {
        (self.len() - self.initial_size).div_ceil(self.chunk_size)
    }

    /// Row indices of chunk `i`, where chunk 0 is the initial block.
    pub fn chunk_indices(&self, i: usize) -> &[usize] {
        if i == 0 {
            return &self.permutation[..self.initial_size];
        }
        let start = self.initial_size + (i - 1) * self.chunk_size;
        let end = (start + self.chunk_size).min(self.len());
        &self.permutation[start..end]
    }
}

pub struct ChunkStream<'a> {
    data: &'a Dataset,
    plan: &'a StreamPlan,
    next: usize,
}

impl Iterator for ChunkStream<'_> {
    type Item = Result<LabeledChunk>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next > self.plan.online_chunk_count() {
            return None;
        }
        let idx = self.plan.chunk_indices(self.next);
        self.next += 1;
        let sub = self.data.subset(idx);
        Some(LabeledChunk::new(sub.features, sub.labels, self.data.class_count))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.plan.online_chunk_count() + 1 - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for ChunkStream<'_> {}

/// Yields the initial block first, then each online chunk.
pub fn chunk_stream<'a>(data: &'a Dataset, plan: &'a StreamPlan) -> Result<ChunkStream<'a>> {
    if plan.len() != data.len() {
        return Err(Error::Consistency(format!(
            "stream plan covers {} rows but the dataset has {}",
            plan.len(),
            data.len()
        )));
    }
    Ok(ChunkStream { data, plan, next: 0 })
}
