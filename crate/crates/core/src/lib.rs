//! Exact-arithmetic bridge between ReLU polynomials over the rationals and
//! the fuzzy logics RPL, RPL(.) and LPi1/2.
//!
//! The crate has three layers:
//!
//! * term- and formula-level languages with exact rational semantics
//!   ([`term`], [`formula`], [`scaled`]),
//! * rational-weight feedforward ReLU networks and the surgeries needed to
//!   compile formulas into neurons and back ([`network`]),
//! * the scaling translations between the two worlds together with exact
//!   finite-sample equivalence oracles ([`translate`], [`equiv`]).
//!
//! Every value in sight is an arbitrary-precision rational; no check in this
//! crate carries a tolerance.

use thiserror::Error;

pub mod equiv;
pub mod formula;
pub mod network;
pub mod rational;
pub mod scaled;
pub mod term;
pub mod translate;

pub use rational::Rational;

/// Syntax error, pointing at the byte offset where parsing failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError {
            offset,
            message: message.into(),
        }
    }
}
