//! Dataset loading, PCA and the chunked training stream.

pub mod csv;
pub mod eigen;
pub mod idx;
pub mod pca;
pub mod stream;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use self::csv::{load_csv, write_csv, CsvOptions};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use idx::load_idx;
pub use pca::{apply_pca, fit_pca, PcaModel};
pub use stream::{chunk_stream, ChunkStream, StreamPlan};

/// Feature rows with integer class labels in `0..class_count`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    /// `class_count` is taken as one past the largest label.
    pub fn new(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let class_count = labels.iter().max().map_or(0, |&m| m + 1);
        Self::with_class_count(features, labels, class_count)
    }

    pub fn with_class_count(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Consistency(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::Parameter(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self {
            features,
            labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }
}
