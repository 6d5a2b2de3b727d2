//! Local heat invariants `u_0, u_1, u_2` and the resolvent-trace
//! coefficients `sigma_j(r)`.
//!
//! `u_1` carries a normalization switch. The default `Scal / 6` is the
//! standard second heat-kernel coefficient and is what every downstream
//! coefficient formula here assumes; the literal variant `Scal` is kept
//! available for comparison against sources that fold the `1/6` into
//! their expansion elsewhere.

use crate::chart::CurvatureData;
use crate::error::CoreError;
use crate::fiber::integrate_over_fiber;
use crate::num;
use crate::special::{factorial, gamma};
use crate::wedge::{
    wedge_curvature_norms, wedge_laplacian_of_scalar, wedge_scalar, WedgeModel, WedgePoint,
};
use crate::Result;

/// Normalization convention for `u_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalarConvention {
    /// `u_1 = Scal / 6` (standard heat-kernel normalization; default).
    #[default]
    ScaledBySixth,
    /// `u_1 = Scal` taken literally.
    Literal,
}

/// Pointwise inputs to the heat invariants.
///
/// The invariants only consume four scalars, so the inputs are stored
/// flattened rather than as full curvature tensors; see
/// [`InvariantInputs::from_curvature`] for the bridge from tensor data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantInputs {
    /// Scalar curvature at the point.
    pub scal: f64,
    /// Squared norm of the Ricci tensor.
    pub ricci_norm_sq: f64,
    /// Squared norm of the Riemann tensor.
    pub riem_norm_sq: f64,
    /// Laplacian of the scalar curvature at the point (positive Laplacian).
    pub lap_scal: f64,
}

impl InvariantInputs {
    /// Extract the invariant inputs from curvature data plus `Delta Scal`.
    pub fn from_curvature(curv: &CurvatureData, lap_scal: f64) -> Self {
        Self {
            scal: curv.scal,
            ricci_norm_sq: curv.ricci_norm_sq,
            riem_norm_sq: curv.riem_norm_sq,
            lap_scal,
        }
    }
}

/// Zeroth heat invariant, identically one.
pub fn u0() -> f64 {
    1.0
}

/// First heat invariant under the chosen normalization.
pub fn u1(inputs: &InvariantInputs, convention: ScalarConvention) -> f64 {
    match convention {
        ScalarConvention::ScaledBySixth => inputs.scal / 6.0,
        ScalarConvention::Literal => inputs.scal,
    }
}

/// Second heat invariant:
/// `(12 Delta Scal + 5 Scal^2 - 2 |Ric|^2 + 2 |Riem|^2) / 360`.
pub fn u2(inputs: &InvariantInputs) -> f64 {
    (12.0 * inputs.lap_scal + 5.0 * inputs.scal * inputs.scal - 2.0 * inputs.ricci_norm_sq
        + 2.0 * inputs.riem_norm_sq)
        / 360.0
}

/// Evaluate `u_j` for `j <= 2`.
pub fn u_j(j: u32, inputs: &InvariantInputs, convention: ScalarConvention) -> Result<f64> {
    match j {
        0 => Ok(u0()),
        1 => Ok(u1(inputs, convention)),
        2 => Ok(u2(inputs)),
        _ => Err(CoreError::InvariantOrder { j }),
    }
}

/// Invariant inputs of the wedge metric at a wedge point: scalar curvature,
/// curvature norms, and `Delta Scal`, all with their `r`-scalings in place.
pub fn wedge_invariant_inputs(model: &WedgeModel, p: &WedgePoint) -> Result<InvariantInputs> {
    let scal = wedge_scalar(model, p)?;
    let (ricci_norm_sq, riem_norm_sq) = wedge_curvature_norms(model, p)?;
    let lap_scal = wedge_laplacian_of_scalar(model, p)?;
    Ok(InvariantInputs { scal, ricci_norm_sq, riem_norm_sq, lap_scal })
}

/// Parameters of a resolvent-trace coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaParams {
    /// Resolvent power; must satisfy `d > m / 2` (trace class).
    pub d: u32,
    /// Total dimension of the wedge.
    pub m: u32,
    /// Coefficient index.
    pub j: u32,
}

impl SigmaParams {
    /// Validate the trace-class condition and the implemented orders.
    pub fn validate(&self) -> Result<()> {
        if 2 * self.d <= self.m {
            return Err(CoreError::TraceClass { d: self.d, m: self.m });
        }
        if self.j > 2 {
            return Err(CoreError::InvariantOrder { j: self.j });
        }
        Ok(())
    }
}

/// Integral of `u_j` of the wedge metric at radius `r` over the fiber,
/// `int_F u_j(wedge at r) dvol_F`.
///
/// For `j = 0` this is `Vol(F)` exactly. Homogeneous presets evaluate the
/// constant integrand at one representative point; custom charts integrate
/// by quadrature.
pub fn fiber_integral_of_wedge_uj(
    model: &WedgeModel,
    r: f64,
    j: u32,
    convention: ScalarConvention,
) -> Result<f64> {
    if j > 2 {
        return Err(CoreError::InvariantOrder { j });
    }
    if !(r > 0.0) {
        return Err(CoreError::invalid("fiber integral requires r > 0"));
    }
    if j == 0 {
        return Ok(model.fiber().volume());
    }
    if model.fiber().is_homogeneous() {
        let x = model.fiber().representative_point();
        let inputs = wedge_invariant_inputs(model, &WedgePoint::new(r, 0.0, x))?;
        let val = u_j(j, &inputs, convention)?;
        return Ok(val * model.fiber().volume());
    }
    let mut failure: Option<CoreError> = None;
    let integral = integrate_over_fiber(
        |x: &[f64]| {
            if failure.is_some() {
                return 0.0;
            }
            let p = WedgePoint::new(r, 0.0, x.to_vec());
            match wedge_invariant_inputs(model, &p)
                .and_then(|inputs| u_j(j, &inputs, convention))
            {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        model.fiber(),
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(integral),
    }
}

/// The resolvent-trace coefficient
/// `sigma_j(r) = (4 pi)^{-m/2} r^{2d-2+2j} [int_F u_j(wedge at r)]
///  Gamma(-m/2 + d + j) / (d-1)!`.
pub fn sigma_j(
    r: f64,
    params: &SigmaParams,
    model: &WedgeModel,
    convention: ScalarConvention,
) -> Result<f64> {
    params.validate()?;
    if params.m as usize != model.total_dim() {
        return Err(CoreError::DimensionMismatch {
            expected: model.total_dim(),
            actual: params.m as usize,
            what: "sigma parameters vs wedge model",
        });
    }
    if !(r > 0.0) {
        return Err(CoreError::invalid("sigma_j requires r > 0"));
    }
    let m = params.m as f64;
    let d = params.d;
    let j = params.j;
    let fiber_integral = fiber_integral_of_wedge_uj(model, r, j, convention)?;
    let gamma_arg = -m / 2.0 + d as f64 + j as f64;
    let prefactor = num::powf(4.0 * core::f64::consts::PI, -m / 2.0);
    let power = num::powi(r, (2 * d - 2 + 2 * j) as i32);
    Ok(prefactor * power * fiber_integral * gamma(gamma_arg) / factorial(d - 1))
}

/// Partial sum of the resolvent expansion,
/// `sum_{j <= j_max} zeta^{-2d + m - 2j} sigma_j(r)`.
///
/// This is an asymptotic partial sum as `zeta -> infinity`, not a
/// convergent series in `j`.
pub fn sigma_partial_sum(
    r: f64,
    zeta: f64,
    d: u32,
    j_max: u32,
    model: &WedgeModel,
    convention: ScalarConvention,
) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(CoreError::invalid("sigma_partial_sum requires zeta > 0"));
    }
    let m = model.total_dim() as u32;
    let mut acc = 0.0;
    for j in 0..=j_max {
        let params = SigmaParams { d, m, j };
        let sigma = sigma_j(r, &params, model, convention)?;
        let exponent = -(2 * d as i32) + m as i32 - 2 * j as i32;
        acc += num::powf(zeta, exponent as f64) * sigma;
    }
    Ok(acc)
}

/// `(4 pi)^{-m/2}`, shared by the coefficient formulas.
pub fn four_pi_power(m: u32) -> f64 {
    num::powf(4.0 * core::f64::consts::PI, -(m as f64) / 2.0)
}
