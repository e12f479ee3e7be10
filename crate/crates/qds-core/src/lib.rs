//! Structure theory of finite-dimensional quantum dynamical semigroups.
//!
//! The crate works with three kinds of dynamics on `d × d` complex matrices:
//! a Kraus channel `x ↦ Σ l_k† x l_k` (discrete time), a GKSL generator
//! `x ↦ Y†x + xY + Σ L_k† x L_k` (continuous time) and a row-stochastic
//! matrix embedded as a diagonal channel. On top of the superoperator
//! representations it provides
//!
//! * sub-harmonic and harmonic projection tests, range projections and
//!   reductions to sub-harmonic corners ([`projection`]),
//! * the limit `y = lim τ_t(p)` of a sub-harmonic projection ([`spectral`]),
//! * reachability closures, minimal sub-harmonic (recurrent) projections and
//!   the decomposition of the identity into recurrent projections plus a
//!   metastable remainder ([`resolution`]),
//! * invariant states and strong ergodicity ([`ergodicity`]),
//! * the iterated integral-equation construction of a semigroup ([`picard`]),
//! * the classical Markov chain oracle ([`classical`]).
//!
//! Operators are vectorized by stacking columns, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classical;
pub mod closure;
pub mod ergodicity;
mod error;
pub mod linalg;
mod math;
pub mod model;
pub mod picard;
pub mod projection;
pub mod random;
pub mod resolution;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use model::{
    effective_drift, validate_model, Dynamics, ModelKind, Picture, QuantumModel, Superoperator,
    TimeKind, Tolerances, ValidationReport,
};
pub use projection::Projection;

/// Seed used when the caller does not supply one: the ASCII bytes of "QDS1".
pub const DEFAULT_SEED: u64 = 0x5144_5331;
