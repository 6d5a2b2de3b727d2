//! Heat-trace evaluation with certified truncation error.
//!
//! The trace is the positive sum `sum mult * exp(-t lambda)` over the
//! enumerated spectrum; truncation at `lambda_max` therefore underestimates
//! the true trace by an amount inside `[0, tail_bound(t)]`.
//!
//! Summation runs over eigenvalues in descending order (ascending term
//! magnitude) with Neumaier compensation, partitioned into fixed blocks of
//! [`TRACE_CHUNK`] terms whose partial sums are combined in block order.
//! Because the block boundaries and the combination order are fixed by the
//! data alone, a parallel driver that evaluates blocks on any number of
//! threads and combines them in index order reproduces the serial result
//! bit for bit.

use alloc::vec::Vec;

use crate::num::{self, Neumaier};
use crate::spectrum::SpectrumSet;

/// Fixed block length of the trace reduction.
pub const TRACE_CHUNK: usize = 8192;

/// One evaluated trace point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvaluation {
    /// Compensated partial sum over the enumerated modes.
    pub value: f64,
    /// Certified bound on the neglected tail; the true trace lies in
    /// `[value, value + tail_bound]`.
    pub tail_bound: f64,
    /// Set when a requested tolerance was exceeded by the tail bound.
    pub flagged: bool,
}

/// Number of fixed-size blocks in the trace reduction for this spectrum.
pub fn trace_num_blocks(spec: &SpectrumSet) -> usize {
    spec.modes().len().div_ceil(TRACE_CHUNK)
}

/// Compensated partial sum of one block.
///
/// Blocks index the logical descending-eigenvalue order: block `b` covers
/// logical positions `[b * TRACE_CHUNK, (b + 1) * TRACE_CHUNK)`.
pub fn trace_block_sum(spec: &SpectrumSet, t: f64, block: usize) -> f64 {
    let modes = spec.modes();
    let len = modes.len();
    let start = block * TRACE_CHUNK;
    let end = (start + TRACE_CHUNK).min(len);
    let mut acc = Neumaier::new();
    for logical in start..end {
        let mode = &modes[len - 1 - logical];
        acc.add(mode.multiplicity as f64 * num::exp(-t * mode.lambda));
    }
    acc.value()
}

/// Combine per-block partial sums in block order (the fixed reduction).
pub fn trace_combine(block_sums: &[f64]) -> f64 {
    let mut acc = Neumaier::new();
    for &s in block_sums {
        acc.add(s);
    }
    acc.value()
}

/// Heat trace at time `t` with certified truncation error.
///
/// When `tail_tol` is given and the tail bound exceeds it, the result is
/// flagged (never silently degraded).
pub fn heat_trace(spec: &SpectrumSet, t: f64, tail_tol: Option<f64>) -> TraceEvaluation {
    assert!(t > 0.0, "heat time must be positive");
    let blocks: Vec<f64> = (0..trace_num_blocks(spec))
        .map(|b| trace_block_sum(spec, t, b))
        .collect();
    let value = trace_combine(&blocks);
    let tail_bound = spec.tail_bound(t);
    let flagged = match tail_tol {
        Some(tol) => tail_bound > tol,
        None => false,
    };
    TraceEvaluation {
        value,
        tail_bound,
        flagged,
    }
}

/// Heat trace on a grid of times.
pub fn heat_trace_grid(
    spec: &SpectrumSet,
    ts: &[f64],
    tail_tol: Option<f64>,
) -> Vec<TraceEvaluation> {
    ts.iter().map(|&t| heat_trace(spec, t, tail_tol)).collect()
}

/// Log-spaced grid of `points` times from `t_min` to `t_max` inclusive.
pub fn log_spaced_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && points >= 2);
    let l0 = num::ln(t_min);
    let l1 = num::ln(t_max);
    (0..points)
        .map(|i| num::exp(l0 + (l1 - l0) * i as f64 / (points - 1) as f64))
        .collect()
}
