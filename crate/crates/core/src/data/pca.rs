//! Principal component analysis to a cumulative variance target.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{matmul_nt, matmul_tn, Matrix};

use super::eigen::symmetric_eigen;

const FORMAT_TAG: &str = "aos-elm-pca v1";

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k × D`, orthonormal rows in descending eigenvalue order.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
    pub variance_target: f64,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.rows()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let (k, d) = self.components.shape();
        writeln!(s, "{FORMAT_TAG}").unwrap();
        writeln!(s, "dims {k} {d}").unwrap();
        writeln!(s, "variance_target {}", self.variance_target).unwrap();
        write_row(&mut s, "mean", &self.mean);
        write_row(&mut s, "explained_variance", &self.explained_variance);
        for row in self.components.row_iter() {
            write_row(&mut s, "component", row);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(FORMAT_TAG) {
            return Err(Error::Format(format!("PCA model must start with {FORMAT_TAG:?}")));
        }
        let dims = take_row(lines.next(), "dims")?;
        if dims.len() != 2 {
            return Err(Error::Format("dims line needs k and D".into()));
        }
        let (k, d) = (dims[0] as usize, dims[1] as usize);
        let target = take_row(lines.next(), "variance_target")?;
        let mean = take_row(lines.next(), "mean")?;
        let explained_variance = take_row(lines.next(), "explained_variance")?;
        let mut data = Vec::with_capacity(k * d);
        for _ in 0..k {
            data.extend(take_row(lines.next(), "component")?);
        }
        if target.len() != 1 || mean.len() != d || explained_variance.len() != k || data.len() != k * d {
            return Err(Error::Format("PCA model dimensions disagree".into()));
        }
        Ok(Self {
            mean,
            components: Matrix::from_vec(k, d, data)?,
            explained_variance,
            variance_target: target[0],
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn write_row(s: &mut String, key: &str, values: &[f64]) {
    s.push_str(key);
    for v in values {
        write!(s, " {v}").unwrap();
    }
    s.push('\n');
}

fn take_row(line: Option<&str>, key: &str) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| Error::Format(format!("PCA model truncated before {key}")))?;
    let mut parts = line.split(' ');
    if parts.next() != Some(key) {
        return Err(Error::Format(format!("expected {key} line, found {line:?}")));
    }
    parts
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Format(format!("bad number {p:?} in {key} line")))
        })
        .collect()
}

/// Fits on the centered covariance and keeps the fewest leading components
/// whose eigenvalue share reaches `variance_target`.
pub fn fit_pca(x: &Matrix, variance_target: f64) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::Parameter(format!("PCA needs at least 2 rows, got {n}")));
    }
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::Parameter(format!(
            "variance target must lie in (0, 1], got {variance_target}"
        )));
    }
    let mut mean = vec![0.0; d];
    for row in x.row_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = x.clone();
    for r in 0..n {
        for (v, m) in centered.row_mut(r).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let mut cov = matmul_tn(&centered, &centered)?;
    cov.scale(1.0 / (n - 1) as f64);
    cov.symmetrize();

    let eig = symmetric_eigen(&cov)?;
    let values: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("data has zero total variance".into()));
    }
    let mut k = values.len();
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        if acc / total >= variance_target {
            k = i + 1;
            break;
        }
    }

    let mut components = Matrix::from_fn(k, d, |r, c| eig.vectors[(r, c)]);
    for r in 0..k {
        let row = components.row_mut(r);
        let lead = row
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if lead < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: values[..k].to_vec(),
        variance_target,
    })
}

/// `(X − mean)·componentsᵀ`.
pub fn apply_pca(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.input_dim() {
        return Err(Error::Shape {
            op: "apply_pca",
            lhs: x.shape(),
            rhs: model.components.shape(),
        });
    }
    let mut centered = x.clone();
    for r in 0..x.rows() {
        for (v, m) in centered.row_mut(r).iter_mut().zip(&model.mean) {
            *v -= m;
        }
    }
    matmul_nt(&centered, &model.components)
}
