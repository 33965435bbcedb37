//! Transformation of discrete-time LPV models with functional-affine
//! scheduling dependence into LFT models whose uncertainty block is linear in
//! the scheduling variables.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the value types (FALPV models, block-structured LFTs,
//!   words and truncated series) and the pointwise operations on them.
//! * [`realization`] realizes series from Hankel data, minimizes LFTs with
//!   the block-structured Kalman decomposition and searches for structured
//!   Lyapunov certificates.
//! * [`transform`] lifts an FALPV model together with a realization of its
//!   scheduling nonlinearity and assembles the final LFT.
//! * [`analysis`] simulates both models and decides formal equivalence,
//!   FALPV equivalence and structured isomorphism.
//! * [`format`] defines the JSON model files and the closed-form expression
//!   language used by the command line tool.

pub mod analysis;
pub mod error;
pub mod format;
pub mod linalg;
pub mod model;
pub mod realization;
pub mod transform;

pub use error::{Error, ErrorCategory, Result};
