//! The wedge metric `g = dr^2 + dtheta^2 + r^2 g_V` and its curvature.
//!
//! Chart index layout on the wedge: index 0 is the radial coordinate `r`,
//! index 1 the circle coordinate `theta`, indices `2 .. m` the fiber chart.
//! Fiber-only tensors (the outputs of [`wedge_riemann`] and [`wedge_ricci`])
//! use bare fiber indices `0 .. m - 2`.
//!
//! The closed forms below state the fiber-block curvature relative to the
//! fiber metric itself: `Riem = r^{-2} (R - g wedge g)` and
//! `Ric = r^{-2} (Ric_F - (m - 3) g)`. In wedge chart coordinates the same
//! blocks carry factors `r^4` and `r^2` respectively (each lowered fiber
//! index contributes one factor of `r` against the `r^2 g_V` block), which
//! is exactly what [`verify_transformation`] checks against the generic
//! curvature-from-jet path.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chart::{curvature_from_jet, ricci_norm_sq, riemann_norm_sq, CurvatureData, MetricJet};
use crate::error::CoreError;
use crate::fiber::{laplacian_scalar_field, FiberModel};
use crate::linalg::{spd_inverse, Mat, Tensor3, Tensor4};
use crate::num;
use crate::Result;

/// The truncated wedge `(0, 1) x Sigma x F` with product metric
/// `dr^2 + dtheta^2 + r^2 g_V`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeModel {
    fiber: FiberModel,
    sigma_length: f64,
}

impl WedgeModel {
    /// Wedge over the given fiber with the default circle `Vol(Sigma) = 2 pi`.
    pub fn new(fiber: FiberModel) -> Self {
        Self { fiber, sigma_length: 2.0 * core::f64::consts::PI }
    }

    /// Wedge with an explicit circumference for the edge circle.
    pub fn with_sigma_length(fiber: FiberModel, sigma_length: f64) -> Result<Self> {
        if !(sigma_length > 0.0) {
            return Err(CoreError::invalid("sigma_length must be positive"));
        }
        Ok(Self { fiber, sigma_length })
    }

    /// Total dimension `m = dim F + 2`.
    pub fn total_dim(&self) -> usize {
        self.fiber.dim() + 2
    }

    /// The fiber model.
    pub fn fiber(&self) -> &FiberModel {
        &self.fiber
    }

    /// Circumference of the edge circle (equals its volume).
    pub fn sigma_length(&self) -> f64 {
        self.sigma_length
    }
}

/// A chart point `(r, theta, x)` on the wedge; `r > 0` always, the tip is
/// never a chart point, and the truncated domain is `r < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgePoint {
    /// Radial coordinate, strictly positive.
    pub r: f64,
    /// Circle coordinate.
    pub theta: f64,
    /// Fiber chart point.
    pub x: Vec<f64>,
}

impl WedgePoint {
    /// Construct a wedge point.
    pub fn new(r: f64, theta: f64, x: Vec<f64>) -> Self {
        Self { r, theta, x }
    }

    fn validate(&self, model: &WedgeModel) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(CoreError::invalid("wedge point requires r > 0"));
        }
        if self.x.len() != model.fiber().dim() {
            return Err(CoreError::DimensionMismatch {
                expected: model.fiber().dim(),
                actual: self.x.len(),
                what: "fiber chart point",
            });
        }
        Ok(())
    }
}

/// Full metric jet of the wedge metric at `p`, in wedge chart coordinates.
///
/// The `r` and `theta` rows are the identity with vanishing derivatives;
/// the fiber block is `r^2 g_ij(x)` with `d_r (r^2 g_ij) = 2 r g_ij` and
/// all `theta`-derivatives zero.
pub fn wedge_metric_jet(model: &WedgeModel, p: &WedgePoint) -> Result<MetricJet> {
    p.validate(model)?;
    let fj = model.fiber().jet_at(&p.x);
    let n = fj.dim;
    let m = n + 2;
    let r = p.r;
    let r2 = r * r;
    let mut g = Mat::zeros(m, m);
    let mut dg = Tensor3::zeros(m);
    let mut ddg = Tensor4::zeros(m);
    g.set(0, 0, 1.0);
    g.set(1, 1, 1.0);
    for i in 0..n {
        for j in 0..n {
            let gij = fj.g.get(i, j);
            g.set(i + 2, j + 2, r2 * gij);
            dg.set(i + 2, j + 2, 0, 2.0 * r * gij);
            ddg.set(i + 2, j + 2, 0, 0, 2.0 * gij);
            for k in 0..n {
                let dgk = fj.dg.get(i, j, k);
                dg.set(i + 2, j + 2, k + 2, r2 * dgk);
                ddg.set(i + 2, j + 2, 0, k + 2, 2.0 * r * dgk);
                ddg.set(i + 2, j + 2, k + 2, 0, 2.0 * r * dgk);
                for l in 0..n {
                    ddg.set(i + 2, j + 2, k + 2, l + 2, r2 * fj.ddg.get(i, j, k, l));
                }
            }
        }
    }
    Ok(MetricJet { dim: m, g, dg, ddg })
}

/// Christoffel symbols of the wedge metric from the closed-form case table:
/// `Gamma^r_{jk} = -r g_jk`, `Gamma^j_{rk} = r^{-1} delta^j_k`, fiber
/// symbols unchanged, every symbol carrying a `theta` index zero.
pub fn wedge_christoffel(model: &WedgeModel, p: &WedgePoint) -> Result<Tensor3> {
    p.validate(model)?;
    let fj = model.fiber().jet_at(&p.x);
    let fiber_gamma = crate::chart::christoffel(&fj)?;
    let n = fj.dim;
    let m = n + 2;
    let r = p.r;
    let mut gamma = Tensor3::zeros(m);
    for j in 0..n {
        for k in 0..n {
            gamma.set(0, j + 2, k + 2, -r * fj.g.get(j, k));
        }
    }
    for j in 0..n {
        gamma.set(j + 2, 0, j + 2, 1.0 / r);
        gamma.set(j + 2, j + 2, 0, 1.0 / r);
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = fiber_gamma.get(i, j, k);
                if v != 0.0 {
                    gamma.set(i + 2, j + 2, k + 2, v);
                }
            }
        }
    }
    Ok(gamma)
}

/// Scalar curvature of the wedge: `r^{-2} (Scal_F(x) - (m - 2)(m - 3))`.
pub fn wedge_scalar(model: &WedgeModel, p: &WedgePoint) -> Result<f64> {
    p.validate(model)?;
    let m = model.total_dim() as f64;
    let scal_f = match model.fiber().constant_scal() {
        Some(s) => s,
        None => model.fiber().curvature_at(&p.x)?.scal,
    };
    Ok((scal_f - (m - 2.0) * (m - 3.0)) / (p.r * p.r))
}

/// Fiber-block Riemann tensor of the wedge relative to the fiber metric:
/// `r^{-2} (R_ijkl - (g_ik g_jl - g_il g_jk))`, fiber indices only.
/// Components carrying an `r` or `theta` index vanish identically.
pub fn wedge_riemann(model: &WedgeModel, p: &WedgePoint) -> Result<Tensor4> {
    p.validate(model)?;
    let curv = model.fiber().curvature_at(&p.x)?;
    let g = model.fiber().jet_at(&p.x).g;
    let n = model.fiber().dim();
    let inv_r2 = 1.0 / (p.r * p.r);
    let mut out = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let wedge_gg = g.get(i, k) * g.get(j, l) - g.get(i, l) * g.get(j, k);
                    out.set(i, j, k, l, inv_r2 * (curv.riemann.get(i, j, k, l) - wedge_gg));
                }
            }
        }
    }
    Ok(out)
}

/// Fiber-block Ricci tensor of the wedge relative to the fiber metric:
/// `r^{-2} (Ric_ij - (m - 3) g_ij)`, fiber indices only.
pub fn wedge_ricci(model: &WedgeModel, p: &WedgePoint) -> Result<Mat> {
    p.validate(model)?;
    let curv = model.fiber().curvature_at(&p.x)?;
    let g = model.fiber().jet_at(&p.x).g;
    let n = model.fiber().dim();
    let m = model.total_dim() as f64;
    let inv_r2 = 1.0 / (p.r * p.r);
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, inv_r2 * (curv.ricci.get(i, j) - (m - 3.0) * g.get(i, j)));
        }
    }
    Ok(out)
}

/// Pointwise norms of the wedge curvature, taken in the wedge metric:
/// `(|Ric|^2, |Riem|^2)`.
///
/// Because only fiber-index components survive, the wedge norms reduce to
/// fiber-metric norms of the closed-form blocks scaled by `r^{-4}` relative
/// to the already `r^{-2}`-scaled tensors, i.e. the values returned by
/// [`wedge_ricci`] and [`wedge_riemann`] contracted with `g_V^{-1}`.
pub fn wedge_curvature_norms(model: &WedgeModel, p: &WedgePoint) -> Result<(f64, f64)> {
    let ricci = wedge_ricci(model, p)?;
    let riemann = wedge_riemann(model, p)?;
    let g = model.fiber().jet_at(&p.x).g;
    let g_inv = spd_inverse(&g)?;
    Ok((ricci_norm_sq(&ricci, &g_inv), riemann_norm_sq(&riemann, &g_inv)))
}

/// `Delta Scal` on the wedge for the positive Laplacian
/// `-d_r^2 - (m-2) r^{-1} d_r - d_theta^2 + r^{-2} Delta_F`:
/// the radial part is differentiated in closed form, giving
/// `r^{-4} [ (2m - 10)(Scal_F - (m-2)(m-3)) + Delta_F Scal_F ]`.
pub fn wedge_laplacian_of_scalar(model: &WedgeModel, p: &WedgePoint) -> Result<f64> {
    p.validate(model)?;
    let m = model.total_dim() as f64;
    let inv_r4 = 1.0 / num::powi(p.r, 4);
    let (scal_f, lap_scal_f) = match model.fiber().constant_scal() {
        Some(s) => (s, 0.0),
        None => {
            let fiber = model.fiber();
            let scal_field = move |x: &[f64]| {
                fiber
                    .curvature_at(x)
                    .expect("fiber curvature must exist at quadrature points")
                    .scal
            };
            let lap = laplacian_scalar_field(scal_field, fiber)?;
            (fiber.curvature_at(&p.x)?.scal, lap(&p.x))
        }
    };
    Ok(inv_r4 * ((2.0 * m - 10.0) * (scal_f - (m - 2.0) * (m - 3.0)) + lap_scal_f))
}

/// Per-tensor outcome of the transformation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorDeviation {
    /// Largest absolute deviation over the compared components.
    pub max_abs: f64,
    /// Largest deviation relative to the component scale
    /// (`max(1, |reference|)` per component).
    pub max_rel: f64,
}

/// Report produced by [`verify_transformation`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    /// Deviation of the fiber-block Riemann components (jet path vs
    /// `r^4` times the closed form).
    pub riemann: TensorDeviation,
    /// Deviation of the fiber-block Ricci components (jet path vs
    /// `r^2` times the closed form).
    pub ricci: TensorDeviation,
    /// Deviation of the scalar curvature (jet path vs closed form).
    pub scal: f64,
    /// Largest magnitude over directly computed Riemann components that
    /// carry an `r` or `theta` index (must vanish).
    pub max_mixed_component: f64,
    /// The tolerance the report was checked against.
    pub tol: f64,
}

fn check(component: String, deviation: f64, tol: f64) -> Result<f64> {
    if deviation > tol || !deviation.is_finite() {
        return Err(CoreError::VerificationFailed { component, deviation, tol });
    }
    Ok(deviation)
}

/// Cross-check the closed-form wedge curvature against a direct computation
/// from the assembled metric jet.
///
/// The generic path runs [`curvature_from_jet`] on [`wedge_metric_jet`];
/// its fiber-block coordinate components must equal `r^4` times
/// [`wedge_riemann`] and `r^2` times [`wedge_ricci`], its scalar must equal
/// [`wedge_scalar`], and every component carrying an `r` or `theta` index
/// must vanish. Fails on the first component whose deviation exceeds `tol`.
pub fn verify_transformation(
    model: &WedgeModel,
    p: &WedgePoint,
    tol: f64,
) -> Result<TransformReport> {
    if !(tol > 0.0) {
        return Err(CoreError::VerificationFailed {
            component: String::from("tol"),
            deviation: f64::INFINITY,
            tol,
        });
    }
    let jet = wedge_metric_jet(model, p)?;
    let direct: CurvatureData = curvature_from_jet(&jet)?;
    let closed_riemann = wedge_riemann(model, p)?;
    let closed_ricci = wedge_ricci(model, p)?;
    let closed_scal = wedge_scalar(model, p)?;
    let n = model.fiber().dim();
    let r4 = num::powi(p.r, 4);
    let r2 = p.r * p.r;

    let mut riemann_dev = TensorDeviation { max_abs: 0.0, max_rel: 0.0 };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let want = r4 * closed_riemann.get(i, j, k, l);
                    let got = direct.riemann.get(i + 2, j + 2, k + 2, l + 2);
                    let abs = (got - want).abs();
                    let rel = abs / want.abs().max(1.0);
                    riemann_dev.max_abs = riemann_dev.max_abs.max(abs);
                    riemann_dev.max_rel = riemann_dev.max_rel.max(rel);
                    check(format!("riemann[{i},{j},{k},{l}]"), rel, tol)?;
                }
            }
        }
    }

    let mut ricci_dev = TensorDeviation { max_abs: 0.0, max_rel: 0.0 };
    for i in 0..n {
        for j in 0..n {
            let want = r2 * closed_ricci.get(i, j);
            let got = direct.ricci.get(i + 2, j + 2);
            let abs = (got - want).abs();
            let rel = abs / want.abs().max(1.0);
            ricci_dev.max_abs = ricci_dev.max_abs.max(abs);
            ricci_dev.max_rel = ricci_dev.max_rel.max(rel);
            check(format!("ricci[{i},{j}]"), rel, tol)?;
        }
    }

    let scal_dev = (direct.scal - closed_scal).abs() / closed_scal.abs().max(1.0);
    check(String::from("scal"), scal_dev, tol)?;

    // Every directly computed component with an r or theta index must
    // vanish; the closed forms only ever state fiber-index components.
    let m = n + 2;
    let mut max_mixed: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    if i >= 2 && j >= 2 && k >= 2 && l >= 2 {
                        continue;
                    }
                    let v = direct.riemann.get(i, j, k, l).abs();
                    max_mixed = max_mixed.max(v);
                    check(format!("riemann[{i},{j},{k},{l}] (mixed)"), v, tol)?;
                }
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            if i >= 2 && j >= 2 {
                continue;
            }
            check(format!("ricci[{i},{j}] (mixed)"), direct.ricci.get(i, j).abs(), tol)?;
        }
    }

    Ok(TransformReport {
        riemann: riemann_dev,
        ricci: ricci_dev,
        scal: scal_dev,
        max_mixed_component: max_mixed,
        tol,
    })
}
