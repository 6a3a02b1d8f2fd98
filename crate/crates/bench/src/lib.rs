//! Synthetic inputs for the kernel benchmarks, shaped like the MNIST
//! protocol (87 inputs, 150 hidden nodes, 10 classes, chunks of 100).

use aos_elm::elm::LabeledChunk;
use aos_elm::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INPUT_DIM: usize = 87;
pub const HIDDEN: usize = 150;
pub const CLASSES: usize = 10;
pub const CHUNK: usize = 100;
pub const INITIAL: usize = 200;

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Features near one of `CLASSES` random centers, labelled by center.
pub fn synthetic_chunk(n: usize, seed: u64) -> LabeledChunk {
    let centers = random_matrix(CLASSES, INPUT_DIM, 0xC3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..CLASSES)).collect();
    let x = Matrix::from_fn(n, INPUT_DIM, |i, j| centers[(labels[i], j)] + 0.5 * rng.gen_range(-1.0..1.0));
    LabeledChunk::new(x, labels, CLASSES).expect("valid synthetic chunk")
}
