//! Chunk-wise weighted recursive least squares for one ELM read-out.
//!
//! With `S = W⁻¹ + H·P·Hᵀ` (an `Nₜ × Nₜ` SPD matrix), the update is
//!
//! ```text
//! P' = P − P·Hᵀ·S⁻¹·H·P
//! β' = β + P'·Hᵀ·W·(T − H·β)
//! ```
//!
//! and `P'·Hᵀ·W = P·Hᵀ·S⁻¹`, so the gain is formed from the same solve
//! that updates `P`. Unit weights give the plain OS-ELM recursion.

use crate::elm::{hidden_map, ElmState, LabeledChunk};
use crate::error::{Error, Result};
use crate::numerics::{matmul, matmul_nt, matmul_tn, Cholesky, Matrix};

/// Folds one chunk (hidden activations `h`, targets `t`, costs `w`) into `state`.
/// On error `state` is left untouched.
pub fn rls_update(state: &mut ElmState, h: &Matrix, t: &Matrix, w: &[f64]) -> Result<()> {
    let (n, l) = h.shape();
    if l != state.hidden_count() {
        return Err(Error::Shape {
            op: "rls_update",
            lhs: h.shape(),
            rhs: state.p.shape(),
        });
    }
    if t.rows() != n || t.cols() != state.beta.cols() {
        return Err(Error::Shape {
            op: "rls_update",
            lhs: h.shape(),
            rhs: t.shape(),
        });
    }
    if w.len() != n {
        return Err(Error::Shape {
            op: "rls_update",
            lhs: h.shape(),
            rhs: (w.len(), 1),
        });
    }
    if n == 0 {
        return Err(Error::Parameter("rls_update needs at least one row".into()));
    }
    if let Some((index, &value)) = w
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::WeightDomain { index, value });
    }

    // P is symmetric, so H·P = (P·Hᵀ)ᵀ.
    let pht = matmul_nt(&state.p, h)?; // L × N
    let mut s = matmul(h, &pht)?; // N × N
    for (i, &wi) in w.iter().enumerate() {
        s[(i, i)] += 1.0 / wi;
    }
    s.symmetrize();
    let chol = Cholesky::factor(&s)?;
    // Kᵀ = S⁻¹·H·P
    let gain_t = chol.solve(&pht.transpose())?; // N × L

    let mut p = state.p.clone();
    p.add_scaled(-1.0, &matmul(&pht, &gain_t)?)?;
    p.symmetrize();

    let mut residual = t.clone();
    residual.add_scaled(-1.0, &matmul(h, &state.beta)?)?;
    let mut beta = state.beta.clone();
    beta.add_scaled(1.0, &matmul_tn(&gain_t, &residual)?)?;

    if !p.is_finite() || !beta.is_finite() {
        return Err(Error::NonFinite("rls_update"));
    }
    state.p = p;
    state.beta = beta;
    Ok(())
}

/// Computes the chunk's hidden activations and applies [`rls_update`].
/// Returns the activations so callers can score the chunk without recomputing them.
pub fn learn_chunk(state: &mut ElmState, chunk: &LabeledChunk, w: &[f64]) -> Result<Matrix> {
    let h = hidden_map(&state.projection, &chunk.features)?;
    rls_update(state, &h, &chunk.targets, w)?;
    Ok(h)
}
