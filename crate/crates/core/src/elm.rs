//! A single extreme learning machine: a frozen random hidden layer followed
//! by a linear read-out fitted by (weighted) least squares.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{matmul, matmul_nt, matmul_tn, Cholesky, Matrix};
use crate::seed::rng_from;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Activation {
    #[default]
    Sigmoid,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Relu => z.max(0.0),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Parameter(format!("unknown activation `{other}`"))),
        }
    }
}

/// Sampling ranges for the hidden layer. Both are closed-open uniform ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionInit {
    pub weight_range: (f64, f64),
    pub bias_range: (f64, f64),
}

impl Default for ProjectionInit {
    fn default() -> Self {
        ProjectionInit {
            weight_range: (-1.0, 1.0),
            bias_range: (0.0, 1.0),
        }
    }
}

/// Frozen random input layer: `L` hidden nodes over `D` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenProjection {
    /// `L × D`, row `j` is the input weight vector of hidden node `j`.
    weights: Matrix,
    biases: Vec<f64>,
    activation: Activation,
}

impl HiddenProjection {
    pub fn new(weights: Matrix, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if biases.len() != weights.rows() {
            return Err(Error::Shape {
                op: "hidden_projection",
                lhs: weights.shape(),
                rhs: (biases.len(), 1),
            });
        }
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::Parameter("hidden projection needs D ≥ 1 and L ≥ 1".into()));
        }
        if biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("hidden_projection"));
        }
        Ok(HiddenProjection {
            weights,
            biases,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn hidden_count(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }
}

/// Draws a hidden layer with the conventional ranges: weights on `[-1, 1)`,
/// biases on `[0, 1)`.
pub fn random_projection(
    input_dim: usize,
    hidden_count: usize,
    activation: Activation,
    seed: u64,
) -> Result<HiddenProjection> {
    random_projection_with(input_dim, hidden_count, activation, seed, &ProjectionInit::default())
}

pub fn random_projection_with(
    input_dim: usize,
    hidden_count: usize,
    activation: Activation,
    seed: u64,
    init: &ProjectionInit,
) -> Result<HiddenProjection> {
    if input_dim == 0 || hidden_count == 0 {
        return Err(Error::Parameter(format!(
            "random projection needs D ≥ 1 and L ≥ 1, got D={input_dim}, L={hidden_count}"
        )));
    }
    let (wlo, whi) = init.weight_range;
    let (blo, bhi) = init.bias_range;
    if !(wlo < whi) || !(blo < bhi) {
        return Err(Error::Parameter("empty projection sampling range".into()));
    }
    let mut rng = rng_from(seed);
    let weights = Matrix::from_fn(hidden_count, input_dim, |_, _| rng.gen_range(wlo..whi));
    let biases = (0..hidden_count).map(|_| rng.gen_range(blo..bhi)).collect();
    HiddenProjection::new(weights, biases, activation)
}

/// `H[i, j] = g(x_i · a_j + b_j)`, an `N × L` matrix.
pub fn hidden_map(proj: &HiddenProjection, x: &Matrix) -> Result<Matrix> {
    if x.cols() != proj.input_dim() {
        return Err(Error::Shape {
            op: "hidden_map",
            lhs: x.shape(),
            rhs: proj.weights.shape(),
        });
    }
    let mut h = matmul_nt(x, &proj.weights)?;
    let act = proj.activation;
    let l = proj.hidden_count();
    if l > 0 {
        for row in h.as_mut_slice().chunks_exact_mut(l) {
            for (v, b) in row.iter_mut().zip(&proj.biases) {
                *v = act.apply(*v + b);
            }
        }
    }
    Ok(h)
}

/// One weak classifier together with its recursive least-squares state.
#[derive(Clone, Debug, PartialEq)]
pub struct ElmState {
    pub projection: HiddenProjection,
    /// Output weights, `L × M`.
    pub beta: Matrix,
    /// Running inverse of the weighted normal matrix, `L × L`.
    pub p: Matrix,
    /// Weight of this member in the ensemble combine.
    pub alpha: f64,
    pub class_count: usize,
}

impl ElmState {
    /// Fits the read-out on an initial block with per-sample costs.
    pub fn fit(
        projection: HiddenProjection,
        x: &Matrix,
        targets: &Matrix,
        weights: &[f64],
        ridge: f64,
    ) -> Result<Self> {
        let h = hidden_map(&projection, x)?;
        let (beta, p) = fit_weighted(&h, targets, weights, ridge)?;
        Ok(ElmState {
            projection,
            beta,
            p,
            alpha: 1.0,
            class_count: targets.cols(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.projection.input_dim()
    }

    pub fn hidden_count(&self) -> usize {
        self.projection.hidden_count()
    }

    pub fn predict_raw(&self, x: &Matrix) -> Result<Matrix> {
        predict_raw(self, x)
    }
}

/// Weighted least squares read-out:
/// `P = (HᵀWH + ridge·I)⁻¹`, `β = P·HᵀWT`.
///
/// Returns `(β, P)`.
pub fn fit_weighted(
    h: &Matrix,
    targets: &Matrix,
    weights: &[f64],
    ridge: f64,
) -> Result<(Matrix, Matrix)> {
    let (n, l) = h.shape();
    if targets.rows() != n {
        return Err(Error::Shape {
            op: "fit_weighted",
            lhs: h.shape(),
            rhs: targets.shape(),
        });
    }
    if weights.len() != n {
        return Err(Error::Shape {
            op: "fit_weighted",
            lhs: h.shape(),
            rhs: (weights.len(), 1),
        });
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::Parameter(format!("ridge must be ≥ 0, got {ridge}")));
    }
    if ridge == 0.0 && n < l {
        return Err(Error::Parameter(format!(
            "weighted fit needs at least as many rows as hidden nodes without a ridge \
             (N={n}, L={l})"
        )));
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
    {
        return Err(Error::WeightDomain { index, value });
    }

    let mut hw = h.clone();
    for (i, &w) in weights.iter().enumerate() {
        hw.row_mut(i).iter_mut().for_each(|v| *v *= w);
    }
    let mut gram = matmul_tn(&hw, h)?;
    gram.symmetrize();
    gram.add_diag(ridge);

    let chol = Cholesky::factor(&gram).map_err(|e| match e {
        Error::Singular { pivot, value, .. } => Error::Singular {
            pivot,
            value,
            hint: " (HᵀWH is singular; retry with a small ridge such as 1e-6)",
        },
        other => other,
    })?;
    let p = chol.inverse()?;
    let beta = chol.solve(&matmul_tn(&hw, targets)?)?;
    Ok((beta, p))
}

/// `O = H·β` for the rows of `x`.
pub fn predict_raw(state: &ElmState, x: &Matrix) -> Result<Matrix> {
    let h = hidden_map(&state.projection, x)?;
    matmul(&h, &state.beta)
}

/// Index of the largest entry; ties go to the lowest index.
#[inline]
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

/// Row-wise argmax over class scores.
pub fn predict_label(outputs: &Matrix) -> Vec<usize> {
    outputs.row_iter().map(argmax).collect()
}

/// A block of labelled rows with one-hot targets.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledChunk {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub targets: Matrix,
}

impl LabeledChunk {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape {
                op: "labeled_chunk",
                lhs: features.shape(),
                rhs: (labels.len(), 1),
            });
        }
        if labels.is_empty() {
            return Err(Error::Parameter("a chunk needs at least one row".into()));
        }
        let targets = one_hot(&labels, class_count)?;
        Ok(LabeledChunk {
            features,
            labels,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.targets.cols()
    }
}

pub fn one_hot(labels: &[usize], class_count: usize) -> Result<Matrix> {
    let mut t = Matrix::zeros(labels.len(), class_count);
    for (i, &y) in labels.iter().enumerate() {
        if y >= class_count {
            return Err(Error::Parameter(format!(
                "label {y} at row {i} is outside 0..{class_count}"
            )));
        }
        t[(i, y)] = 1.0;
    }
    Ok(t)
}
