//! Curvature tensors, heat invariants, and heat-trace expansion coefficients
//! for wedge-like singularities.
//!
//! The library models metrics of the form `dr^2 + dtheta^2 + r^2 g_V` on
//! `(0,1) x S^1 x F`, where the fiber `(F, g_V)` is a closed manifold of
//! dimension `m - 2`. It provides:
//!
//! - pointwise curvature computation from metric jets ([`chart`]),
//! - closed-form wedge curvature with a jet-based verification oracle
//!   ([`wedge`]),
//! - the local heat invariants `u_0, u_1, u_2` and the resolvent-trace
//!   coefficients `sigma_j(r)` ([`heat`]),
//! - assembly of the singular resolvent expansion and the logarithmic
//!   heat-trace coefficient `c` ([`expansion`]),
//! - an exact model-cone spectrum (Bessel zeros times circle modes), a
//!   compensated heat-trace summation, and a weighted least-squares
//!   extraction of the fitted log coefficient ([`spectrum`], [`trace`],
//!   [`fit`]).
//!
//! The crate is `no_std` compatible (with `alloc`); the default `std`
//! feature only switches the math shim to the platform intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod bessel;
pub mod chart;
pub mod error;
pub mod expansion;
pub mod fiber;
pub mod fit;
pub mod heat;
pub mod linalg;
pub mod num;
pub mod special;
pub mod spectrum;
pub mod trace;
pub mod wedge;

pub use error::CoreError;

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, CoreError>;
