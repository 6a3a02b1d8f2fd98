//! Boosted online sequential extreme learning machines.
//!
//! The crate provides a single-hidden-layer ELM with weighted least-squares
//! read-out ([`elm`]), its recursive chunk update ([`sequential`]), the
//! boosted ensemble with forgetting-factor member weights ([`aos`]), the
//! comparison ensembles ([`baselines`]), dataset handling ([`data`]) and the
//! experiment harness ([`experiment`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aos;
pub mod baselines;
pub mod data;
pub mod elm;
pub mod error;
pub mod experiment;
pub mod numerics;
pub mod seed;
pub mod sequential;
pub mod snapshot;

pub use error::{Error, ErrorKind, Result};
pub use numerics::Matrix;
