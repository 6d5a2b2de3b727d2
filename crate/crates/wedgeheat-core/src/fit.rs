//! Weighted least-squares fitting of heat-trace expansions, and the
//! end-to-end extraction of the logarithmic coefficient.
//!
//! The fit basis consists of half-integer powers `t^(p/2)`, each optionally
//! multiplied by `log t`. Rows are scaled by the sample weights, columns are
//! equilibrated to unit norm, and the system is solved by Householder QR;
//! the condition diagnostic is the singular-value ratio of the equilibrated
//! triangular factor. Results are deterministic: samples are sorted before
//! assembly, so permuting the input order cannot change a single bit of the
//! output.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::expansion::heat_log_coefficient_c;
use crate::linalg::{householder_lstsq, jacobi_singular_values, Mat};
use crate::num;
use crate::spectrum::{cone_spectrum, weyl_constant, SpectrumSet};
use crate::trace::{heat_trace_grid, log_spaced_grid, TraceEvaluation};
use crate::wedge::WedgeModel;
use crate::Result;

/// Condition threshold beyond which a fit is refused.
pub const CONDITION_REFUSAL_THRESHOLD: f64 = 1e12;

/// One basis element `t^(power_num / 2) * (log t)^(0 or 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisElement {
    /// Twice the power of `t`, so half-integer exponents stay exact.
    pub power_num: i32,
    /// Multiply by `log t`.
    pub with_log: bool,
}

impl BasisElement {
    /// Evaluate at time `t > 0`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let p = num::pow_half(t, self.power_num);
        if self.with_log {
            p * num::ln(t)
        } else {
            p
        }
    }
}

/// Ordered collection of distinct basis elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitBasis {
    elements: Vec<BasisElement>,
}

impl FitBasis {
    /// Basis from explicit elements; duplicates are rejected.
    pub fn new(elements: Vec<BasisElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(CoreError::invalid("fit basis must not be empty"));
        }
        for (i, a) in elements.iter().enumerate() {
            if elements[i + 1..].contains(a) {
                return Err(CoreError::invalid("fit basis contains duplicate elements"));
            }
        }
        Ok(Self { elements })
    }

    /// The heat-expansion basis for total dimension `m`: half-integer
    /// powers from `t^{-m/2}` through `t^{1/2}` plus the `t^{-1/2} log t`
    /// element.
    pub fn heat_expansion(m: usize) -> Self {
        let mut elements: Vec<BasisElement> = (-(m as i32)..=1)
            .map(|power_num| BasisElement {
                power_num,
                with_log: false,
            })
            .collect();
        elements.push(BasisElement {
            power_num: -1,
            with_log: true,
        });
        Self { elements }
    }

    /// Basis elements in order.
    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Whether the basis is empty (never true for constructed bases).
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// One fit sample: a trace value at time `t` with its certified error and
/// fitting weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSample {
    /// Heat time.
    pub t: f64,
    /// Trace value.
    pub value: f64,
    /// Certified one-sided error (tail bound); informational.
    pub error: f64,
    /// Least-squares row weight.
    pub weight: f64,
}

/// Outcome of a weighted least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Basis the coefficients refer to, in order.
    pub basis: FitBasis,
    /// Fitted coefficients, one per basis element.
    pub coefficients: Vec<f64>,
    /// Euclidean norm of the weighted residual.
    pub residual_norm: f64,
    /// Singular-value ratio of the equilibrated system.
    pub condition: f64,
    /// Set when `condition` exceeds [`CONDITION_REFUSAL_THRESHOLD`]; the
    /// coefficients are still reported but must not be trusted.
    pub refused: bool,
}

impl FitResult {
    /// Coefficient of a specific basis element, if present.
    pub fn coefficient(&self, power_num: i32, with_log: bool) -> Option<f64> {
        self.basis
            .elements()
            .iter()
            .position(|e| e.power_num == power_num && e.with_log == with_log)
            .map(|i| self.coefficients[i])
    }

    /// Value of the fitted model at time `t`.
    pub fn reconstruct(&self, t: f64) -> f64 {
        self.basis
            .elements()
            .iter()
            .zip(&self.coefficients)
            .map(|(e, c)| c * e.evaluate(t))
            .sum()
    }
}

/// Weighted linear least squares over a fixed basis.
///
/// Requires at least twice as many samples as basis elements. The samples
/// are sorted internally, the rows scaled by their weights, and the columns
/// equilibrated; the condition diagnostic refers to the equilibrated system.
/// A condition above [`CONDITION_REFUSAL_THRESHOLD`] sets the refusal flag
/// on the result rather than erroring, so callers can inspect and react.
pub fn fit_expansion(samples: &[FitSample], basis: &FitBasis) -> Result<FitResult> {
    let n = basis.len();
    if samples.len() < 2 * n {
        return Err(CoreError::invalid(
            "need at least twice as many samples as basis elements",
        ));
    }
    for s in samples {
        if !(s.t > 0.0) || !s.value.is_finite() || !(s.weight > 0.0) {
            return Err(CoreError::invalid(
                "fit samples need positive t, finite value, positive weight",
            ));
        }
    }
    let mut sorted: Vec<FitSample> = samples.to_vec();
    sorted.sort_unstable_by(|a, b| {
        f64::total_cmp(&a.t, &b.t).then(f64::total_cmp(&a.value, &b.value))
    });

    let rows = sorted.len();
    let mut a = Mat::zeros(rows, n);
    let mut rhs = Vec::with_capacity(rows);
    for (i, s) in sorted.iter().enumerate() {
        for (j, e) in basis.elements().iter().enumerate() {
            a.set(i, j, s.weight * e.evaluate(s.t));
        }
        rhs.push(s.weight * s.value);
    }
    // Column equilibration: scale every column to unit Euclidean norm.
    let mut col_scale = Vec::with_capacity(n);
    for j in 0..n {
        let mut norm = 0.0;
        for i in 0..rows {
            norm += a.get(i, j) * a.get(i, j);
        }
        let norm = num::sqrt(norm);
        let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        for i in 0..rows {
            a.set(i, j, a.get(i, j) * s);
        }
        col_scale.push(s);
    }
    let (scaled_coeffs, residual_norm, r) = householder_lstsq(&a, &rhs);
    let sv = jacobi_singular_values(&r);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let coefficients: Vec<f64> = scaled_coeffs
        .iter()
        .zip(&col_scale)
        .map(|(c, s)| c * s)
        .collect();
    Ok(FitResult {
        basis: basis.clone(),
        coefficients,
        residual_norm,
        condition,
        refused: condition > CONDITION_REFUSAL_THRESHOLD,
    })
}

/// Protocol parameters for the log-coefficient extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractProtocol {
    /// Smallest heat time of the grid.
    pub t_min: f64,
    /// Largest heat time of the grid.
    pub t_max: f64,
    /// Number of log-spaced grid points.
    pub points: usize,
    /// Spectrum enumeration bound; `None` grows the bound until the tail
    /// at `t_min` drops below `tail_rel_tol` times the Weyl estimate of the
    /// trace.
    pub lambda_max: Option<f64>,
    /// Relative tail tolerance for the automatic `lambda_max` rule.
    pub tail_rel_tol: f64,
}

impl Default for ExtractProtocol {
    fn default() -> Self {
        Self {
            t_min: 5e-3,
            t_max: 5e-1,
            points: 60,
            lambda_max: None,
            tail_rel_tol: 1e-9,
        }
    }
}

/// Result of the end-to-end log-coefficient extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractReport {
    /// Fitted coefficient of `t^{-1/2} log t`.
    pub c_measured: f64,
    /// Closed-form prediction of the same coefficient.
    pub c_predicted: f64,
    /// `|c_measured - c_predicted|` over `|c_predicted|` (absolute when the
    /// prediction is exactly zero, as in the null configurations).
    pub rel_deviation: f64,
    /// Fitted coefficient of `t^{-1/2}` (cone-plus-boundary data; no
    /// closed-form partner).
    pub b_fitted: f64,
    /// Fitted coefficient of the leading power `t^{-m/2}`.
    pub leading_fitted: f64,
    /// Weyl prediction `vol / (4 pi)^{m/2}` for the leading coefficient.
    pub leading_predicted: f64,
    /// Full fit result.
    pub fit: FitResult,
    /// Number of stored `(nu, n, k)` triples in the enumeration.
    pub stored_modes: usize,
    /// Enumeration bound actually used.
    pub lambda_max: f64,
}

/// Extract the log coefficient from the exact spectrum: enumerate, sum the
/// trace over the protocol grid, fit the `m`-appropriate basis, and compare
/// the fitted `t^{-1/2} log t` coefficient against the closed form.
///
/// Fit refusal is propagated as [`CoreError::FitRefused`].
pub fn extract_c(model: &WedgeModel, protocol: &ExtractProtocol) -> Result<ExtractReport> {
    if !(protocol.t_min > 0.0) || !(protocol.t_max > protocol.t_min) {
        return Err(CoreError::invalid("protocol needs 0 < t_min < t_max"));
    }
    if protocol.points < 2 {
        return Err(CoreError::invalid("protocol needs at least two grid points"));
    }
    let lambda_max = match protocol.lambda_max {
        Some(l) => l,
        None => auto_lambda_max(model, protocol)?,
    };
    let spec = cone_spectrum(model, lambda_max)?;
    extract_c_from_spectrum(model, &spec, protocol)
}

/// Extraction step shared with callers that already hold a spectrum.
pub fn extract_c_from_spectrum(
    model: &WedgeModel,
    spec: &SpectrumSet,
    protocol: &ExtractProtocol,
) -> Result<ExtractReport> {
    let grid = log_spaced_grid(protocol.t_min, protocol.t_max, protocol.points);
    let traces = heat_trace_grid(spec, &grid, None);
    extract_c_from_traces(model, spec, protocol, &traces)
}

/// Assemble an extraction report from trace values computed elsewhere,
/// for callers that evaluate the grid themselves (a parallel driver, say).
///
/// `traces` must be aligned with the protocol's log-spaced grid, one
/// evaluation per grid point in ascending `t` order.
pub fn extract_c_from_traces(
    model: &WedgeModel,
    spec: &SpectrumSet,
    protocol: &ExtractProtocol,
    traces: &[TraceEvaluation],
) -> Result<ExtractReport> {
    if traces.len() != protocol.points {
        return Err(CoreError::invalid(
            "trace list does not match the protocol grid",
        ));
    }
    let grid = log_spaced_grid(protocol.t_min, protocol.t_max, protocol.points);
    let samples: Vec<FitSample> = grid
        .iter()
        .zip(traces)
        .map(|(&t, eval)| {
            FitSample {
                t,
                value: eval.value,
                error: eval.tail_bound,
                // Relative-error weighting.
                weight: 1.0 / eval.value,
            }
        })
        .collect();
    let m = model.total_dim();
    let basis = FitBasis::heat_expansion(m);
    let fit = fit_expansion(&samples, &basis)?;
    if fit.refused {
        return Err(CoreError::FitRefused {
            condition: fit.condition,
            threshold: CONDITION_REFUSAL_THRESHOLD,
        });
    }
    let c_measured = fit.coefficient(-1, true).expect("log element present");
    let c_predicted = heat_log_coefficient_c(model)?;
    let rel_deviation = if c_predicted != 0.0 {
        num::abs(c_measured - c_predicted) / num::abs(c_predicted)
    } else {
        num::abs(c_measured)
    };
    let b_fitted = fit.coefficient(-1, false).expect("b element present");
    let leading_fitted = fit
        .coefficient(-(m as i32), false)
        .expect("leading element present");
    let leading_predicted = weyl_constant(model) * crate::special::gamma(0.5 * m as f64 + 1.0);
    Ok(ExtractReport {
        c_measured,
        c_predicted,
        rel_deviation,
        b_fitted,
        leading_fitted,
        leading_predicted,
        fit,
        stored_modes: spec.modes().len(),
        lambda_max: spec.lambda_max(),
    })
}

/// Grow `lambda_max` until the certified tail at `t_min` is negligible
/// relative to the Weyl estimate of the trace.
///
/// This is the rule [`extract_c`] applies when the protocol leaves
/// `lambda_max` unset; callers that enumerate the spectrum themselves can
/// use it to reproduce the same bound.
pub fn auto_lambda_max(model: &WedgeModel, protocol: &ExtractProtocol) -> Result<f64> {
    let m = model.total_dim() as f64;
    let w = weyl_constant(model);
    let trace_estimate = w * crate::special::gamma(0.5 * m + 1.0) * num::powf(protocol.t_min, -0.5 * m);
    let target = protocol.tail_rel_tol * trace_estimate;
    let p = 0.5 * m;
    let mut lambda = 100.0;
    for _ in 0..400 {
        // Majorant tail with c_maj = 2 W (the enumerated ratio only lowers
        // it): 2 W t^{-p} Gamma(p + 1, t lambda).
        let tail = 2.0 * w
            * num::powf(protocol.t_min, -p)
            * crate::special::upper_incomplete_gamma(p + 1.0, protocol.t_min * lambda);
        if tail <= target {
            return Ok(lambda);
        }
        lambda *= 1.05;
    }
    Err(CoreError::invalid(
        "automatic lambda_max search did not converge; set it explicitly",
    ))
}
