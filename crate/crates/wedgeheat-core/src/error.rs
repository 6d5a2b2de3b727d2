//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Errors reported by the geometry, invariant, and spectral kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// The metric at a point is not positive definite.
    DegenerateMetric {
        /// Index of the pivot at which the factorization failed.
        pivot: usize,
    },
    /// A differentiation grid is too coarse for the requested stencil.
    Resolution {
        /// Minimum number of nodes required along the offending axis.
        required: usize,
        /// Number of nodes actually present.
        actual: usize,
    },
    /// A heat invariant beyond the implemented order was requested.
    InvariantOrder {
        /// The requested order.
        j: u32,
    },
    /// Mismatched dimensions between a model and an operation.
    DimensionMismatch {
        /// What was expected.
        expected: usize,
        /// What was supplied.
        actual: usize,
        /// Short description of the offending quantity.
        what: &'static str,
    },
    /// The trace-class condition `d > m/2` is violated.
    TraceClass {
        /// Resolvent power.
        d: u32,
        /// Total dimension.
        m: u32,
    },
    /// A closed-form spectrum was requested for a fiber without one.
    SpectrumUnavailable,
    /// A fiber spectrum cutoff is too small for the requested `lambda_max`.
    InconsistentCutoff {
        /// Fiber eigenvalue cutoff required to enumerate all modes.
        required: f64,
        /// Cutoff actually supplied.
        actual: f64,
    },
    /// A least-squares problem was rejected by the condition diagnostic.
    FitRefused {
        /// The offending condition estimate.
        condition: f64,
        /// The refusal threshold.
        threshold: f64,
    },
    /// A cross-check between two computation paths exceeded its tolerance.
    VerificationFailed {
        /// Path of the offending component, e.g. `riemann[1,2,1,2]`.
        component: String,
        /// The observed deviation.
        deviation: f64,
        /// The tolerance that was exceeded.
        tol: f64,
    },
    /// Catch-all for invalid arguments, with a human-readable path.
    InvalidArgument {
        /// Description of the offending argument.
        message: String,
    },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DegenerateMetric { pivot } => {
                write!(f, "degenerate metric: factorization failed at pivot {pivot}")
            }
            CoreError::Resolution { required, actual } => write!(
                f,
                "resolution: grid too coarse for second differences (need at least {required} nodes per axis, got {actual})"
            ),
            CoreError::InvariantOrder { j } => {
                write!(f, "invariant order not implemented: u_{j} (only u_0..u_2 available)")
            }
            CoreError::DimensionMismatch { expected, actual, what } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, got {actual}")
            }
            CoreError::TraceClass { d, m } => {
                write!(f, "trace-class condition violated: need d > m/2, got d = {d}, m = {m}")
            }
            CoreError::SpectrumUnavailable => {
                write!(f, "spectrum unavailable: custom charts carry no closed-form spectrum")
            }
            CoreError::InconsistentCutoff { required, actual } => write!(
                f,
                "inconsistent cutoffs: fiber cutoff {actual} too small for lambda_max (need at least {required})"
            ),
            CoreError::FitRefused { condition, threshold } => write!(
                f,
                "fit refused: condition diagnostic {condition:.3e} exceeds threshold {threshold:.3e}; shrink the basis or widen the t-range"
            ),
            CoreError::VerificationFailed { component, deviation, tol } => write!(
                f,
                "verification failed at {component}: deviation {deviation:.3e} exceeds tolerance {tol:.3e}"
            ),
            CoreError::InvalidArgument { message } => write!(f, "invalid argument: {message}"),
        }
    }
}

impl core::error::Error for CoreError {}

impl CoreError {
    /// Convenience constructor for [`CoreError::InvalidArgument`].
    pub fn invalid(message: impl Into<String>) -> Self {
        CoreError::InvalidArgument { message: message.into() }
    }
}
