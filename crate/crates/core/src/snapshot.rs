//! Plain-text model snapshots. Reals are written with the shortest
//! representation that parses back to the same `f64`, so a save/load cycle
//! is exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::aos::{CombineMode, EnsembleModel};
use crate::elm::{Activation, ElmState, HiddenProjection};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const HEADER: &str = "aos-elm-snapshot v1";

pub fn to_text(model: &EnsembleModel) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "combine {}", model.combine).unwrap();
    writeln!(s, "class_count {}", model.class_count).unwrap();
    writeln!(s, "gamma {}", model.gamma).unwrap();
    writeln!(s, "error_clamp {}", model.error_clamp).unwrap();
    writeln!(s, "chunk_index {}", model.chunk_index).unwrap();
    writeln!(s, "classifiers {}", model.classifiers.len()).unwrap();
    for (c, st) in model.classifiers.iter().enumerate() {
        writeln!(s, "classifier {c}").unwrap();
        writeln!(s, "activation {}", st.projection.activation()).unwrap();
        writeln!(s, "alpha {}", st.alpha).unwrap();
        write_matrix(&mut s, "weights", st.projection.weights());
        write_values(&mut s, "biases", st.projection.biases());
        write_matrix(&mut s, "beta", &st.beta);
        write_matrix(&mut s, "p", &st.p);
    }
    s
}

fn write_values(s: &mut String, key: &str, v: &[f64]) {
    write!(s, "{key} {}", v.len()).unwrap();
    for x in v {
        write!(s, " {x}").unwrap();
    }
    s.push('\n');
}

fn write_matrix(s: &mut String, key: &str, m: &Matrix) {
    writeln!(s, "{key} {} {}", m.rows(), m.cols()).unwrap();
    for row in m.row_iter() {
        let mut first = true;
        for x in row {
            if !first {
                s.push(' ');
            }
            first = false;
            write!(s, "{x}").unwrap();
        }
        s.push('\n');
    }
}

struct Tokens<'a> {
    inner: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| Error::Format(format!("snapshot ends before {what}")))
    }

    fn key(&mut self, key: &str) -> Result<()> {
        let tok = self.next(key)?;
        if tok != key {
            return Err(Error::Format(format!("snapshot: expected `{key}`, found `{tok}`")));
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| Error::Format(format!("snapshot: bad {what} `{tok}`")))
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.key(key)?;
        self.parse(key)
    }

    fn reals(&mut self, what: &str, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.parse::<f64>(what)).collect()
    }

    fn matrix(&mut self, key: &str) -> Result<Matrix> {
        self.key(key)?;
        let rows: usize = self.parse(key)?;
        let cols: usize = self.parse(key)?;
        let data = self.reals(key, rows * cols)?;
        Matrix::from_vec(rows, cols, data)
    }
}

pub fn from_text(text: &str) -> Result<EnsembleModel> {
    let body = text
        .strip_prefix(HEADER)
        .ok_or_else(|| Error::Format(format!("snapshot must start with `{HEADER}`")))?;
    let mut t = Tokens {
        inner: body.split_ascii_whitespace(),
    };
    let combine: CombineMode = t.field::<String>("combine")?.parse()?;
    let class_count: usize = t.field("class_count")?;
    let gamma: f64 = t.field("gamma")?;
    let error_clamp: f64 = t.field("error_clamp")?;
    let chunk_index: usize = t.field("chunk_index")?;
    let count: usize = t.field("classifiers")?;
    let mut classifiers = Vec::with_capacity(count);
    for c in 0..count {
        let idx: usize = t.field("classifier")?;
        if idx != c {
            return Err(Error::Format(format!("snapshot: classifier {idx} out of order")));
        }
        let activation: Activation = t
            .field::<String>("activation")?
            .parse()
            .map_err(|_| Error::Format("snapshot: unknown activation".into()))?;
        let alpha: f64 = t.field("alpha")?;
        let weights = t.matrix("weights")?;
        t.key("biases")?;
        let nb: usize = t.parse("biases")?;
        let biases = t.reals("biases", nb)?;
        let beta = t.matrix("beta")?;
        let p = t.matrix("p")?;
        let projection = HiddenProjection::new(weights, biases, activation)
            .map_err(|e| Error::Format(format!("snapshot classifier {c}: {e}")))?;
        classifiers.push(ElmState {
            projection,
            beta,
            p,
            alpha,
            class_count,
        });
    }
    if let Ok(extra) = t.next("end") {
        return Err(Error::Format(format!("snapshot: trailing token `{extra}`")));
    }
    let model = EnsembleModel {
        classifiers,
        gamma,
        error_clamp,
        class_count,
        chunk_index,
        combine,
    };
    model.validate().map_err(|e| Error::Format(format!("snapshot: {e}")))?;
    Ok(model)
}

pub fn save(model: &EnsembleModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<EnsembleModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
