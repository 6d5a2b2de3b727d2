//! Fiber models `(F, g_V)`: presets with analytic jets, closed-form
//! curvature, and product quadrature.
//!
//! Presets use a single chart minus a measure-zero set: hyperspherical
//! coordinates on round spheres (polar angles in `(0, pi)`, one azimuthal
//! angle in `[0, 2 pi)`), flat coordinates on tori and circles. Quadrature
//! nodes avoid the coordinate singularities by construction: polar axes use
//! a composite two-point Gauss rule (order 4, no endpoint nodes), periodic
//! axes a midpoint rule.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::{christoffel, curvature_from_jet, fd_derivatives, CurvatureData, MetricJet};
use crate::error::CoreError;
use crate::linalg::{spd_inverse, Mat, Tensor3, Tensor4};
use crate::num::{self, Neumaier};
use crate::special::gamma;
use crate::Result;

/// Default number of panels for the composite Gauss rule on polar axes.
///
/// 96 panels put the round-sphere volume error near 3e-10 relative, safely
/// inside the 1e-8 budget, while keeping product grids around 2e6 nodes.
pub const DEFAULT_POLAR_PANELS: usize = 96;

/// Default node count on periodic axes (midpoint rule; a power of two so
/// that uniform weights sum without rounding).
pub const DEFAULT_PERIODIC_NODES: usize = 64;

/// Minimum nodes per axis for the finite-difference Laplacian.
pub const MIN_LAPLACIAN_NODES: usize = 8;

/// User-supplied chart: jet evaluator plus an explicit quadrature grid.
pub trait CustomChart: Send + Sync {
    /// Chart dimension.
    fn dim(&self) -> usize;
    /// Metric jet at a chart point.
    fn jet_at(&self, x: &[f64]) -> MetricJet;
    /// Quadrature nodes and weights; weights include `sqrt(det g)`.
    fn quadrature(&self) -> Vec<(Vec<f64>, f64)>;
    /// Step for finite-difference derivatives on this chart.
    fn fd_step(&self) -> f64 {
        1e-3
    }
}

/// The kind of fiber manifold.
#[derive(Clone)]
pub enum FiberKind {
    /// Round sphere `S^n` of radius `rho` in hyperspherical coordinates.
    RoundSphere {
        /// Sphere dimension `n >= 1`.
        dim: usize,
        /// Radius `rho > 0`.
        radius: f64,
    },
    /// Flat torus with the given side lengths.
    FlatTorus {
        /// Side lengths, one per dimension.
        sides: Vec<f64>,
    },
    /// Circle of the given circumference.
    Circle {
        /// Circumference.
        length: f64,
    },
    /// User-supplied chart.
    Custom(Arc<dyn CustomChart>),
}

impl fmt::Debug for FiberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberKind::RoundSphere { dim, radius } => {
                write!(f, "RoundSphere {{ dim: {dim}, radius: {radius} }}")
            }
            FiberKind::FlatTorus { sides } => write!(f, "FlatTorus {{ sides: {sides:?} }}"),
            FiberKind::Circle { length } => write!(f, "Circle {{ length: {length} }}"),
            FiberKind::Custom(c) => write!(f, "Custom {{ dim: {} }}", c.dim()),
        }
    }
}

/// One quadrature / differentiation axis of a preset chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    /// Lower end of the coordinate domain.
    pub lo: f64,
    /// Upper end of the coordinate domain.
    pub hi: f64,
    /// Number of quadrature nodes along this axis.
    pub nodes: usize,
    /// Whether the coordinate is periodic.
    pub periodic: bool,
}

/// A fiber manifold together with its quadrature resolution.
#[derive(Debug, Clone)]
pub struct FiberModel {
    kind: FiberKind,
    polar_panels: usize,
    periodic_nodes: usize,
}

impl PartialEq for FiberModel {
    fn eq(&self, other: &Self) -> bool {
        if self.polar_panels != other.polar_panels || self.periodic_nodes != other.periodic_nodes
        {
            return false;
        }
        match (&self.kind, &other.kind) {
            (
                FiberKind::RoundSphere { dim: d1, radius: r1 },
                FiberKind::RoundSphere { dim: d2, radius: r2 },
            ) => d1 == d2 && r1 == r2,
            (FiberKind::FlatTorus { sides: s1 }, FiberKind::FlatTorus { sides: s2 }) => s1 == s2,
            (FiberKind::Circle { length: l1 }, FiberKind::Circle { length: l2 }) => l1 == l2,
            (FiberKind::Custom(a), FiberKind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl FiberModel {
    /// Round sphere `S^n` of radius `rho` at default resolution.
    pub fn round_sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::invalid("sphere dimension must be at least 1"));
        }
        if !(radius > 0.0) {
            return Err(CoreError::invalid("sphere radius must be positive"));
        }
        Ok(Self {
            kind: FiberKind::RoundSphere { dim, radius },
            polar_panels: DEFAULT_POLAR_PANELS,
            periodic_nodes: DEFAULT_PERIODIC_NODES,
        })
    }

    /// Flat torus with the given side lengths.
    pub fn flat_torus(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|&s| !(s > 0.0)) {
            return Err(CoreError::invalid("torus sides must be positive and non-empty"));
        }
        Ok(Self {
            kind: FiberKind::FlatTorus { sides },
            polar_panels: DEFAULT_POLAR_PANELS,
            periodic_nodes: DEFAULT_PERIODIC_NODES,
        })
    }

    /// Circle of the given circumference.
    pub fn circle(length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(CoreError::invalid("circle length must be positive"));
        }
        Ok(Self {
            kind: FiberKind::Circle { length },
            polar_panels: DEFAULT_POLAR_PANELS,
            periodic_nodes: DEFAULT_PERIODIC_NODES,
        })
    }

    /// Fiber backed by a user-supplied chart.
    pub fn custom(chart: Arc<dyn CustomChart>) -> Self {
        Self {
            kind: FiberKind::Custom(chart),
            polar_panels: DEFAULT_POLAR_PANELS,
            periodic_nodes: DEFAULT_PERIODIC_NODES,
        }
    }

    /// Override the quadrature resolution (polar panels, periodic nodes).
    pub fn with_resolution(mut self, polar_panels: usize, periodic_nodes: usize) -> Self {
        self.polar_panels = polar_panels.max(1);
        self.periodic_nodes = periodic_nodes.max(1);
        self
    }

    /// The fiber kind.
    pub fn kind(&self) -> &FiberKind {
        &self.kind
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            FiberKind::RoundSphere { dim, .. } => *dim,
            FiberKind::FlatTorus { sides } => sides.len(),
            FiberKind::Circle { .. } => 1,
            FiberKind::Custom(c) => c.dim(),
        }
    }

    /// Closed-form volume.
    ///
    /// For a custom chart this falls back to the quadrature sum.
    pub fn volume(&self) -> f64 {
        match &self.kind {
            FiberKind::RoundSphere { dim, radius } => {
                let n = *dim as f64;
                2.0 * num::powf(core::f64::consts::PI, (n + 1.0) / 2.0)
                    / gamma((n + 1.0) / 2.0)
                    * num::powi(*radius, *dim as i32)
            }
            FiberKind::FlatTorus { sides } => sides.iter().product(),
            FiberKind::Circle { length } => *length,
            FiberKind::Custom(c) => c.quadrature().iter().map(|(_, w)| w).sum(),
        }
    }

    /// Closed-form constant scalar curvature, if the preset has one.
    pub fn constant_scal(&self) -> Option<f64> {
        match &self.kind {
            FiberKind::RoundSphere { dim, radius } => {
                let n = *dim as f64;
                Some(n * (n - 1.0) / (radius * radius))
            }
            FiberKind::FlatTorus { .. } | FiberKind::Circle { .. } => Some(0.0),
            FiberKind::Custom(_) => None,
        }
    }

    /// Coordinate axes of the preset chart (`None` for custom charts).
    pub fn axes(&self) -> Option<Vec<Axis>> {
        let two_pi = 2.0 * core::f64::consts::PI;
        match &self.kind {
            FiberKind::RoundSphere { dim, .. } => {
                let mut axes = Vec::with_capacity(*dim);
                for _ in 0..dim.saturating_sub(1) {
                    axes.push(Axis {
                        lo: 0.0,
                        hi: core::f64::consts::PI,
                        nodes: 2 * self.polar_panels,
                        periodic: false,
                    });
                }
                axes.push(Axis { lo: 0.0, hi: two_pi, nodes: self.periodic_nodes, periodic: true });
                Some(axes)
            }
            FiberKind::FlatTorus { sides } => Some(
                sides
                    .iter()
                    .map(|&s| Axis { lo: 0.0, hi: s, nodes: self.periodic_nodes, periodic: true })
                    .collect(),
            ),
            FiberKind::Circle { length } => {
                Some(vec![Axis { lo: 0.0, hi: *length, nodes: self.periodic_nodes, periodic: true }])
            }
            FiberKind::Custom(_) => None,
        }
    }

    /// Analytic metric jet at a chart point.
    pub fn jet_at(&self, x: &[f64]) -> MetricJet {
        match &self.kind {
            FiberKind::RoundSphere { dim, radius } => sphere_jet(*dim, *radius, x),
            FiberKind::FlatTorus { sides } => MetricJet::flat(sides.len()),
            FiberKind::Circle { .. } => MetricJet::flat(1),
            FiberKind::Custom(c) => c.jet_at(x),
        }
    }

    /// Curvature data at a chart point.
    ///
    /// Presets use their closed forms (`R = rho^{-2} g wedge g` on spheres,
    /// zero on flat models); custom charts go through the generic jet
    /// computation.
    pub fn curvature_at(&self, x: &[f64]) -> Result<CurvatureData> {
        match &self.kind {
            FiberKind::RoundSphere { dim, radius } => {
                let jet = sphere_jet(*dim, *radius, x);
                let gamma_t = christoffel(&jet)?;
                let n = *dim;
                let g = &jet.g;
                let kappa = 1.0 / (radius * radius);
                let mut riemann = Tensor4::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                riemann.set(
                                    i,
                                    j,
                                    k,
                                    l,
                                    kappa * (g.get(i, k) * g.get(j, l) - g.get(i, l) * g.get(j, k)),
                                );
                            }
                        }
                    }
                }
                let mut ricci = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        ricci.set(i, j, (n as f64 - 1.0) * kappa * g.get(i, j));
                    }
                }
                let nf = n as f64;
                Ok(CurvatureData {
                    gamma: gamma_t,
                    riemann,
                    ricci,
                    scal: nf * (nf - 1.0) * kappa,
                    ricci_norm_sq: nf * (nf - 1.0) * (nf - 1.0) * kappa * kappa,
                    riem_norm_sq: 2.0 * nf * (nf - 1.0) * kappa * kappa,
                })
            }
            FiberKind::FlatTorus { sides } => Ok(flat_curvature(sides.len())),
            FiberKind::Circle { .. } => Ok(flat_curvature(1)),
            FiberKind::Custom(c) => curvature_from_jet(&c.jet_at(x)),
        }
    }

    /// Whether the scalar curvature is known to be constant over the fiber.
    pub fn scal_is_constant(&self) -> bool {
        self.constant_scal().is_some()
    }

    /// Whether the fiber is a homogeneous preset, so that pointwise
    /// curvature invariants are constant and fiber integrals reduce to
    /// one evaluation times the volume.
    pub fn is_homogeneous(&self) -> bool {
        !matches!(self.kind, FiberKind::Custom(_))
    }

    /// A representative interior chart point (used where any point gives
    /// the same invariant, e.g. homogeneous presets).
    pub fn representative_point(&self) -> Vec<f64> {
        match &self.kind {
            FiberKind::RoundSphere { dim, .. } => {
                let mut x = vec![core::f64::consts::FRAC_PI_2; *dim];
                x[*dim - 1] = 0.5;
                x
            }
            FiberKind::FlatTorus { sides } => sides.iter().map(|&s| 0.25 * s).collect(),
            FiberKind::Circle { length } => vec![0.25 * length],
            FiberKind::Custom(c) => {
                c.quadrature().first().map(|(x, _)| x.clone()).unwrap_or_default()
            }
        }
    }

    /// Visit every quadrature node `(x, w)`; weights include `sqrt(det g)`.
    pub fn for_each_quadrature_node<F: FnMut(&[f64], f64)>(&self, mut f: F) {
        match &self.kind {
            FiberKind::Custom(c) => {
                for (x, w) in c.quadrature() {
                    f(&x, w);
                }
            }
            _ => {
                let axes = self.axes().expect("presets have axes");
                let n = axes.len();
                let mut idx = vec![0usize; n];
                let mut x = vec![0.0; n];
                let mut w_axis = vec![0.0; n];
                loop {
                    for i in 0..n {
                        let (xi, wi) = axis_node(&axes[i], self.polar_panels, idx[i]);
                        x[i] = xi;
                        w_axis[i] = wi;
                    }
                    let mut w: f64 = w_axis.iter().product();
                    w *= self.sqrt_det_g(&x);
                    f(&x, w);
                    // Odometer increment over the product grid.
                    let mut axis = 0;
                    loop {
                        if axis == n {
                            return;
                        }
                        idx[axis] += 1;
                        if idx[axis] < axes[axis].nodes {
                            break;
                        }
                        idx[axis] = 0;
                        axis += 1;
                    }
                }
            }
        }
    }

    /// Materialized quadrature nodes (convenience; prefer the streaming
    /// visitor for large grids).
    pub fn quadrature_nodes(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        self.for_each_quadrature_node(|x, w| out.push((x.to_vec(), w)));
        out
    }

    /// `sqrt(det g)` at a preset chart point.
    fn sqrt_det_g(&self, x: &[f64]) -> f64 {
        match &self.kind {
            FiberKind::RoundSphere { dim, radius } => {
                let n = *dim;
                let mut s = num::powi(*radius, n as i32);
                for k in 0..n.saturating_sub(1) {
                    s *= num::powi(num::sin(x[k]), (n - 1 - k) as i32);
                }
                s
            }
            FiberKind::FlatTorus { .. } | FiberKind::Circle { .. } => 1.0,
            FiberKind::Custom(_) => 1.0,
        }
    }
}

/// Node `idx` along an axis: composite two-point Gauss on polar axes,
/// midpoint rule on periodic axes. Returns `(coordinate, weight)`.
fn axis_node(axis: &Axis, polar_panels: usize, idx: usize) -> (f64, f64) {
    if axis.periodic {
        let h = (axis.hi - axis.lo) / axis.nodes as f64;
        (axis.lo + (idx as f64 + 0.5) * h, h)
    } else {
        // Two Gauss nodes per panel at center +- h / (2 sqrt(3)).
        let h = (axis.hi - axis.lo) / polar_panels as f64;
        let panel = idx / 2;
        let side = idx % 2;
        let center = axis.lo + (panel as f64 + 0.5) * h;
        let off = h * 0.5 / num::sqrt(3.0);
        let xi = if side == 0 { center - off } else { center + off };
        (xi, 0.5 * h)
    }
}

fn flat_curvature(n: usize) -> CurvatureData {
    CurvatureData {
        gamma: Tensor3::zeros(n),
        riemann: Tensor4::zeros(n),
        ricci: Mat::zeros(n, n),
        scal: 0.0,
        ricci_norm_sq: 0.0,
        riem_norm_sq: 0.0,
    }
}

/// Analytic jet of `S^n(rho)` in hyperspherical coordinates:
/// `g_ii = rho^2 prod_{k<i} sin^2(x_k)`, diagonal.
fn sphere_jet(n: usize, rho: f64, x: &[f64]) -> MetricJet {
    assert_eq!(x.len(), n, "chart point dimension");
    let mut g = Mat::zeros(n, n);
    let mut dg = Tensor3::zeros(n);
    let mut ddg = Tensor4::zeros(n);
    let mut gii = vec![0.0; n];
    for i in 0..n {
        let mut v = rho * rho;
        for k in 0..i {
            let s = num::sin(x[k]);
            v *= s * s;
        }
        gii[i] = v;
        g.set(i, i, v);
    }
    for i in 0..n {
        for k in 0..i {
            let cot = num::cos(x[k]) / num::sin(x[k]);
            dg.set(i, i, k, 2.0 * cot * gii[i]);
        }
    }
    for i in 0..n {
        for k in 0..i {
            let sk = num::sin(x[k]);
            let cot_k = num::cos(x[k]) / sk;
            for l in 0..i {
                let v = if l == k {
                    (4.0 * cot_k * cot_k - 2.0 / (sk * sk)) * gii[i]
                } else {
                    let cot_l = num::cos(x[l]) / num::sin(x[l]);
                    4.0 * cot_k * cot_l * gii[i]
                };
                ddg.set(i, i, k, l, v);
            }
        }
    }
    MetricJet { dim: n, g, dg, ddg }
}

/// Integral of a scalar field over the fiber using the model's quadrature.
pub fn integrate_over_fiber<F: FnMut(&[f64]) -> f64>(mut field: F, model: &FiberModel) -> f64 {
    let mut acc = Neumaier::new();
    model.for_each_quadrature_node(|x, w| acc.add(w * field(x)));
    acc.value()
}

/// The (positive) Laplace-Beltrami operator applied to a scalar field:
/// `-g^{ij} (d_i d_j - Gamma^k_{ij} d_k) field`, evaluated pointwise by
/// fourth-order finite differences.
///
/// Fails with a resolution error when any chart axis carries fewer than
/// [`MIN_LAPLACIAN_NODES`] nodes. The returned closure must be evaluated at
/// interior chart points (at least two steps from any polar axis end).
pub fn laplacian_scalar_field<'a, F>(
    field: F,
    model: &'a FiberModel,
) -> Result<impl Fn(&[f64]) -> f64 + 'a>
where
    F: Fn(&[f64]) -> f64 + 'a,
{
    let steps: Vec<f64> = match model.axes() {
        Some(axes) => {
            for axis in &axes {
                if axis.nodes < MIN_LAPLACIAN_NODES {
                    return Err(CoreError::Resolution {
                        required: MIN_LAPLACIAN_NODES,
                        actual: axis.nodes,
                    });
                }
            }
            // The step is tied to the domain, not the node spacing: 1/512 of
            // the axis keeps the h^4 truncation near 1e-11 of the field
            // scale while staying clear of roundoff amplification.
            axes.iter().map(|a| (a.hi - a.lo) / 512.0).collect()
        }
        None => {
            let h = match &model.kind {
                FiberKind::Custom(c) => c.fd_step(),
                _ => unreachable!("presets have axes"),
            };
            vec![h; model.dim()]
        }
    };
    Ok(move |x: &[f64]| -> f64 {
        let jet = model.jet_at(x);
        let g_inv = spd_inverse(&jet.g).expect("metric must be non-degenerate at interior points");
        let gamma = christoffel(&jet).expect("metric must be non-degenerate at interior points");
        let (grad, hess) = fd_derivatives(&field, x, &steps);
        let n = jet.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut covar = hess.get(i, j);
                for k in 0..n {
                    covar -= gamma.get(k, i, j) * grad[k];
                }
                acc += g_inv.get(i, j) * covar;
            }
        }
        -acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volume_quadrature_converges() {
        for (n, rho, want) in [
            (1usize, 1.0, 2.0 * core::f64::consts::PI),
            (2, 1.0, 4.0 * core::f64::consts::PI),
            (3, 1.0, 2.0 * core::f64::consts::PI * core::f64::consts::PI),
            (3, 1.25, 2.0 * core::f64::consts::PI * core::f64::consts::PI * 1.25f64.powi(3)),
        ] {
            let model = FiberModel::round_sphere(n, rho).unwrap();
            assert!((model.volume() - want).abs() / want < 1e-14, "closed form, n = {n}");
            let vol = integrate_over_fiber(|_| 1.0, &model);
            let rel = (vol - want).abs() / want;
            assert!(rel < 1e-8, "quadrature volume, n = {n}: rel = {rel:e}");
        }
    }

    #[test]
    fn torus_volume_is_exact_for_unit_sides() {
        let model = FiberModel::flat_torus(vec![1.0, 1.0, 1.0]).unwrap();
        let c = 2.75;
        assert_eq!(integrate_over_fiber(|_| c, &model), c);
    }

    #[test]
    fn circle_volume_matches_length() {
        let model = FiberModel::circle(5.0).unwrap();
        let vol = integrate_over_fiber(|_| 1.0, &model);
        assert!((vol - 5.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_error_drops_at_fourth_order() {
        // S^2 volume error is dominated by the polar integral of sin(phi);
        // doubling the panel count must shrink it by about 2^4.
        let want = 4.0 * core::f64::consts::PI;
        let coarse = FiberModel::round_sphere(2, 1.0).unwrap().with_resolution(16, 32);
        let fine = FiberModel::round_sphere(2, 1.0).unwrap().with_resolution(32, 32);
        let e0 = (integrate_over_fiber(|_| 1.0, &coarse) - want).abs();
        let e1 = (integrate_over_fiber(|_| 1.0, &fine) - want).abs();
        let ratio = e0 / e1;
        assert!((13.0..20.0).contains(&ratio), "order-4 ratio, got {ratio}");
    }

    #[test]
    fn sphere_jet_matches_finite_differences() {
        // dg and ddg of the analytic jet vs central differences of g.
        let n = 3;
        let rho = 1.3;
        let x = [0.9, 1.2, 0.4];
        let jet = sphere_jet(n, rho, &x);
        let h = 1e-4;
        for i in 0..n {
            for k in 0..n {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let gp = sphere_jet(n, rho, &xp).g.get(i, i);
                let gm = sphere_jet(n, rho, &xm).g.get(i, i);
                let fd = (gp - gm) / (2.0 * h);
                assert!(
                    (jet.dg.get(i, i, k) - fd).abs() < 1e-6,
                    "dg({i},{i},{k}): analytic {} vs fd {fd}",
                    jet.dg.get(i, i, k)
                );
                for l in 0..n {
                    let mut xpp = x;
                    xpp[k] += h;
                    xpp[l] += h;
                    let mut xpm = x;
                    xpm[k] += h;
                    xpm[l] -= h;
                    let mut xmp = x;
                    xmp[k] -= h;
                    xmp[l] += h;
                    let mut xmm = x;
                    xmm[k] -= h;
                    xmm[l] -= h;
                    let fd2 = (sphere_jet(n, rho, &xpp).g.get(i, i)
                        - sphere_jet(n, rho, &xpm).g.get(i, i)
                        - sphere_jet(n, rho, &xmp).g.get(i, i)
                        + sphere_jet(n, rho, &xmm).g.get(i, i))
                        / (4.0 * h * h);
                    assert!(
                        (jet.ddg.get(i, i, k, l) - fd2).abs() < 1e-5,
                        "ddg({i},{i},{k},{l})"
                    );
                }
            }
        }
    }

    #[test]
    fn sphere_curvature_from_jet_matches_closed_form() {
        for (n, rho) in [(2usize, 1.0), (3, 1.0), (3, 0.8), (4, 1.3)] {
            let model = FiberModel::round_sphere(n, rho).unwrap();
            let x = model.representative_point();
            let from_jet = curvature_from_jet(&model.jet_at(&x)).unwrap();
            let closed = model.curvature_at(&x).unwrap();
            let nf = n as f64;
            let want_scal = nf * (nf - 1.0) / (rho * rho);
            assert!((from_jet.scal - want_scal).abs() < 1e-8 * want_scal.abs().max(1.0));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let d = (from_jet.riemann.get(i, j, k, l)
                                - closed.riemann.get(i, j, k, l))
                            .abs();
                            assert!(d < 1e-8, "riemann ({i},{j},{k},{l}), n = {n}");
                        }
                    }
                }
            }
            assert!((from_jet.ricci_norm_sq - closed.ricci_norm_sq).abs() < 1e-8);
            assert!((from_jet.riem_norm_sq - closed.riem_norm_sq).abs() < 1e-8);
        }
    }

    #[test]
    fn unit_three_sphere_norms() {
        let model = FiberModel::round_sphere(3, 1.0).unwrap();
        let curv = model.curvature_at(&model.representative_point()).unwrap();
        assert!((curv.scal - 6.0).abs() < 1e-12);
        assert!((curv.ricci_norm_sq - 12.0).abs() < 1e-12);
        assert!((curv.riem_norm_sq - 12.0).abs() < 1e-12);
    }

    #[test]
    fn metric_scaling_property() {
        // Scaling g by rho^2 divides scal by rho^2 and |Ric|^2 by rho^4.
        let base = FiberModel::round_sphere(3, 1.0).unwrap();
        let scaled = FiberModel::round_sphere(3, 2.0).unwrap();
        let x = base.representative_point();
        let c0 = base.curvature_at(&x).unwrap();
        let c1 = scaled.curvature_at(&x).unwrap();
        assert!((c1.scal - c0.scal / 4.0).abs() < 1e-12);
        assert!((c1.ricci_norm_sq - c0.ricci_norm_sq / 16.0).abs() < 1e-12);
        assert!((c1.riem_norm_sq - c0.riem_norm_sq / 16.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let model = FiberModel::round_sphere(2, 1.0).unwrap();
        let lap = laplacian_scalar_field(|_| 3.5, &model).unwrap();
        assert_eq!(lap(&[1.0, 0.7]), 0.0);
    }

    #[test]
    fn laplacian_eigenfunction_on_circle() {
        // On Circle(2 pi), -d^2/dtheta^2 cos(theta) = cos(theta).
        let model = FiberModel::circle(2.0 * core::f64::consts::PI).unwrap();
        let lap = laplacian_scalar_field(|x| x[0].cos(), &model).unwrap();
        for &t in &[0.3, 1.4, 2.9] {
            let got = lap(&[t]);
            assert!((got - t.cos()).abs() < 1e-9, "theta = {t}: {got}");
        }
    }

    #[test]
    fn laplacian_eigenfunction_on_sphere() {
        // cos(phi) is a degree-1 harmonic on S^2(1): eigenvalue 2.
        let model = FiberModel::round_sphere(2, 1.0).unwrap();
        let lap = laplacian_scalar_field(|x| x[0].cos(), &model).unwrap();
        for &phi in &[0.8, 1.3, 2.2] {
            let got = lap(&[phi, 1.0]);
            let want = 2.0 * phi.cos();
            assert!((got - want).abs() < 1e-8, "phi = {phi}: {got} vs {want}");
        }
    }

    #[test]
    fn laplacian_rejects_coarse_grids() {
        let model = FiberModel::round_sphere(2, 1.0).unwrap().with_resolution(2, 4);
        let err = match laplacian_scalar_field(|_| 0.0, &model) {
            Err(e) => e,
            Ok(_) => panic!("expected resolution error, got a Laplacian"),
        };
        match err {
            CoreError::Resolution { required, actual } => {
                assert_eq!(required, MIN_LAPLACIAN_NODES);
                assert!(actual < MIN_LAPLACIAN_NODES);
            }
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn divergence_term_integrates_to_zero() {
        // The integral of a Laplacian over a closed manifold vanishes.
        let model = FiberModel::round_sphere(2, 1.0).unwrap();
        let lap = laplacian_scalar_field(|x| x[0].cos() * x[1].sin(), &model).unwrap();
        let integral = integrate_over_fiber(|x| lap(x), &model);
        assert!(integral.abs() < 1e-7, "got {integral:e}");
    }

    #[test]
    fn scal_field_of_preset_has_zero_laplacian() {
        let model = FiberModel::round_sphere(3, 1.3).unwrap();
        let scal_field = {
            let m = model.clone();
            move |x: &[f64]| m.curvature_at(x).unwrap().scal
        };
        let lap = laplacian_scalar_field(scal_field, &model).unwrap();
        let x = model.representative_point();
        assert!(lap(&x).abs() < 1e-9);
    }
}
