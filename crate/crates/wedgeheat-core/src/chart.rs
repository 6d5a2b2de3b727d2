//! Pointwise curvature computation from metric jets on a coordinate chart.
//!
//! A [`MetricJet`] carries the metric components together with their first
//! and second coordinate derivatives at one point; everything downstream
//! (Christoffel symbols, Riemann, Ricci, scalar curvature, invariant norms)
//! is exact tensor arithmetic on the jet. Curvature conventions:
//!
//! - `Gamma^i_{jk} = (1/2) g^{im} (g_{mj,k} + g_{mk,j} - g_{jk,m})`
//! - `R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
//!    + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}`
//! - `R_ijkl = g_ip R^p_{jkl}`, `Ric_jl = R^k_{jkl}`, `Scal = g^{jl} Ric_jl`
//!
//! so the unit two-sphere has `R_1212 = sin^2(phi) > 0` and `Scal = 2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::linalg::{cholesky, spd_inverse, Mat, Tensor3, Tensor4};
use crate::num;
use crate::Result;

/// Metric components with first and second derivatives at one chart point.
///
/// Index conventions: `g.get(i, j) = g_ij`, `dg.get(i, j, k) = d_k g_ij`,
/// `ddg.get(i, j, k, l) = d_l d_k g_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    /// Chart dimension.
    pub dim: usize,
    /// Metric components `g_ij`.
    pub g: Mat,
    /// First derivatives `d_k g_ij`.
    pub dg: Tensor3,
    /// Second derivatives `d_l d_k g_ij`.
    pub ddg: Tensor4,
}

impl MetricJet {
    /// Jet of a flat metric (identity `g`, vanishing derivatives).
    pub fn flat(dim: usize) -> Self {
        Self {
            dim,
            g: Mat::identity(dim),
            dg: Tensor3::zeros(dim),
            ddg: Tensor4::zeros(dim),
        }
    }

    /// Validate symmetries and positive definiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if self.g.rows() != n || self.dg.n() != n || self.ddg.n() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                actual: self.g.rows(),
                what: "metric jet storage",
            });
        }
        if self.g.symmetry_defect() != 0.0 {
            return Err(CoreError::invalid("metric components must be symmetric in (i, j)"));
        }
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    if self.dg.get(i, j, k) != self.dg.get(j, i, k) {
                        return Err(CoreError::invalid("dg must be symmetric in (i, j)"));
                    }
                    for l in 0..n {
                        if self.ddg.get(i, j, k, l) != self.ddg.get(j, i, k, l) {
                            return Err(CoreError::invalid("ddg must be symmetric in (i, j)"));
                        }
                    }
                }
                for l in (k + 1)..n {
                    for j in 0..n {
                        if self.ddg.get(i, j, k, l) != self.ddg.get(i, j, l, k) {
                            return Err(CoreError::invalid("ddg must be symmetric in (k, l)"));
                        }
                    }
                }
            }
        }
        cholesky(&self.g).map(|_| ())
    }
}

/// Christoffel symbols, curvature tensors, and invariant norms at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    /// `Gamma^i_{jk}`, symmetric in `(j, k)`.
    pub gamma: Tensor3,
    /// Fully lowered Riemann tensor `R_ijkl`.
    pub riemann: Tensor4,
    /// Ricci tensor `Ric_ij`.
    pub ricci: Mat,
    /// Scalar curvature.
    pub scal: f64,
    /// `|Ric|^2` with all indices raised by `g`.
    pub ricci_norm_sq: f64,
    /// `|R|^2` with all indices raised by `g`.
    pub riem_norm_sq: f64,
}

/// Christoffel symbols `Gamma^i_{jk}` of a metric jet.
pub fn christoffel(jet: &MetricJet) -> Result<Tensor3> {
    let g_inv = spd_inverse(&jet.g)?;
    Ok(christoffel_with_inverse(jet, &g_inv))
}

fn christoffel_with_inverse(jet: &MetricJet, g_inv: &Mat) -> Tensor3 {
    let n = jet.dim;
    let mut gamma = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += g_inv.get(i, m)
                        * (jet.dg.get(m, j, k) + jet.dg.get(m, k, j) - jet.dg.get(j, k, m));
                }
                gamma.set(i, j, k, 0.5 * s);
                gamma.set(i, k, j, 0.5 * s);
            }
        }
    }
    gamma
}

/// First derivatives `d_l Gamma^i_{jk}` from the second-order jet.
fn christoffel_derivative(jet: &MetricJet, g_inv: &Mat) -> Tensor4 {
    let n = jet.dim;
    // d_l g^{im} = -g^{ia} (d_l g_ab) g^{bm}
    let mut dginv = Tensor3::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for m in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s -= g_inv.get(i, a) * jet.dg.get(a, b, l) * g_inv.get(b, m);
                    }
                }
                dginv.set(i, m, l, s);
            }
        }
    }
    let mut dgamma = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        let sym =
                            jet.dg.get(m, j, k) + jet.dg.get(m, k, j) - jet.dg.get(j, k, m);
                        let dsym = jet.ddg.get(m, j, k, l) + jet.ddg.get(m, k, j, l)
                            - jet.ddg.get(j, k, m, l);
                        s += dginv.get(i, m, l) * sym + g_inv.get(i, m) * dsym;
                    }
                    dgamma.set(i, j, k, l, 0.5 * s);
                }
            }
        }
    }
    dgamma
}

/// Full curvature data (Riemann, Ricci, scalar, invariant norms) at a point.
pub fn curvature_from_jet(jet: &MetricJet) -> Result<CurvatureData> {
    let n = jet.dim;
    let g_inv = spd_inverse(&jet.g)?;
    let gamma = christoffel_with_inverse(jet, &g_inv);
    let dgamma = christoffel_derivative(jet, &g_inv);

    // R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
    //           + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}
    let mut riem_up = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = dgamma.get(i, l, j, k) - dgamma.get(i, k, j, l);
                    for m in 0..n {
                        s += gamma.get(i, k, m) * gamma.get(m, l, j)
                            - gamma.get(i, l, m) * gamma.get(m, k, j);
                    }
                    riem_up.set(i, j, k, l, s);
                }
            }
        }
    }

    let mut riemann = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += jet.g.get(i, p) * riem_up.get(p, j, k, l);
                    }
                    riemann.set(i, j, k, l, s);
                }
            }
        }
    }

    let mut ricci = Mat::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += riem_up.get(k, j, k, l);
            }
            ricci.set(j, l, s);
        }
    }

    let mut scal = 0.0;
    for j in 0..n {
        for l in 0..n {
            scal += g_inv.get(j, l) * ricci.get(j, l);
        }
    }

    let ricci_norm_sq = ricci_norm_sq(&ricci, &g_inv);
    let riem_norm_sq = riemann_norm_sq(&riemann, &g_inv);

    Ok(CurvatureData { gamma, riemann, ricci, scal, ricci_norm_sq, riem_norm_sq })
}

/// `|Ric|^2 = Ric_ij Ric_kl g^{ik} g^{jl}` for a symmetric 2-tensor.
pub fn ricci_norm_sq(ricci: &Mat, g_inv: &Mat) -> f64 {
    let n = ricci.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += ricci.get(i, j) * ricci.get(k, l) * g_inv.get(i, k) * g_inv.get(j, l);
                }
            }
        }
    }
    s
}

/// `|R|^2` with all four indices raised by `g`.
pub fn riemann_norm_sq(riemann: &Tensor4, g_inv: &Mat) -> f64 {
    let n = riemann.n();
    // Raise one index at a time; each pass is O(n^5).
    let raise = |t: &Tensor4, axis: usize| -> Tensor4 {
        let mut out = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for p in 0..n {
                            let v = match axis {
                                0 => t.get(p, j, k, l),
                                1 => t.get(i, p, k, l),
                                2 => t.get(i, j, p, l),
                                _ => t.get(i, j, k, p),
                            };
                            let gi = match axis {
                                0 => g_inv.get(i, p),
                                1 => g_inv.get(j, p),
                                2 => g_inv.get(k, p),
                                _ => g_inv.get(l, p),
                            };
                            s += gi * v;
                        }
                        out.set(i, j, k, l, s);
                    }
                }
            }
        }
        out
    };
    let mut up = riemann.clone();
    for axis in 0..4 {
        up = raise(&up, axis);
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += up.get(i, j, k, l) * riemann.get(i, j, k, l);
                }
            }
        }
    }
    s
}

/// Worst violation of the Riemann symmetries and the first Bianchi identity.
///
/// Returns the maximum over: antisymmetry in `(i, j)` and `(k, l)`, pair
/// symmetry `(ij) <-> (kl)`, and `R_ijkl + R_iklj + R_iljk`.
pub fn riemann_symmetry_defect(riemann: &Tensor4) -> f64 {
    let n = riemann.n();
    let mut worst = 0.0f64;
    let mut upd = |v: f64| {
        if num::abs(v) > worst {
            worst = num::abs(v);
        }
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = riemann.get(i, j, k, l);
                    upd(r + riemann.get(j, i, k, l));
                    upd(r + riemann.get(i, j, l, k));
                    upd(r - riemann.get(k, l, i, j));
                    upd(r + riemann.get(i, k, l, j) + riemann.get(i, l, j, k));
                }
            }
        }
    }
    worst
}

/// Central finite-difference stencils of fourth order, used both by the
/// fiber Laplacian and as a derivative oracle in tests.
pub(crate) mod stencil {
    /// Offsets (in steps of `h`) of the five-point stencil.
    pub const OFFSETS: [i32; 4] = [2, 1, -1, -2];
    /// Weights of the first-derivative stencil, divided by `12 h`.
    pub const D1: [f64; 4] = [-1.0, 8.0, -8.0, 1.0];

    /// Fourth-order first derivative from four offset samples
    /// `f(x + 2h), f(x + h), f(x - h), f(x - 2h)`.
    pub fn d1(samples: [f64; 4], h: f64) -> f64 {
        (D1[0] * samples[0] + D1[1] * samples[1] + D1[2] * samples[2] + D1[3] * samples[3])
            / (12.0 * h)
    }

    /// Fourth-order second derivative from the same four samples plus the
    /// center value.
    pub fn d2(samples: [f64; 4], center: f64, h: f64) -> f64 {
        (-samples[0] + 16.0 * samples[1] - 30.0 * center + 16.0 * samples[2] - samples[3])
            / (12.0 * h * h)
    }
}

/// Gradient and Hessian of a scalar field at `x` by fourth-order central
/// differences with per-axis steps `h`.
pub(crate) fn fd_derivatives<F: Fn(&[f64]) -> f64 + ?Sized>(
    field: &F,
    x: &[f64],
    h: &[f64],
) -> (Vec<f64>, Mat) {
    let n = x.len();
    let center = field(x);
    let mut grad = vec![0.0; n];
    let mut hess = Mat::zeros(n, n);
    let mut buf = x.to_vec();
    for i in 0..n {
        let mut samples = [0.0; 4];
        for (s, &off) in stencil::OFFSETS.iter().enumerate() {
            buf[i] = x[i] + off as f64 * h[i];
            samples[s] = field(&buf);
        }
        buf[i] = x[i];
        grad[i] = stencil::d1(samples, h[i]);
        hess.set(i, i, stencil::d2(samples, center, h[i]));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // Cross derivative: first-derivative stencil in each axis.
            let mut acc = 0.0;
            for (si, &oi) in stencil::OFFSETS.iter().enumerate() {
                for (sj, &oj) in stencil::OFFSETS.iter().enumerate() {
                    buf[i] = x[i] + oi as f64 * h[i];
                    buf[j] = x[j] + oj as f64 * h[j];
                    acc += stencil::D1[si] * stencil::D1[sj] * field(&buf);
                }
            }
            buf[i] = x[i];
            buf[j] = x[j];
            let v = acc / (144.0 * h[i] * h[j]);
            hess.set(i, j, v);
            hess.set(j, i, v);
        }
    }
    (grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Jet of the unit two-sphere `g = diag(1, sin^2 phi)` at polar angle
    /// `phi` (first coordinate), azimuth free.
    fn s2_jet(phi: f64) -> MetricJet {
        let (s, c) = (phi.sin(), phi.cos());
        let mut g = Mat::identity(2);
        g.set(1, 1, s * s);
        let mut dg = Tensor3::zeros(2);
        dg.set(1, 1, 0, 2.0 * s * c);
        let mut ddg = Tensor4::zeros(2);
        ddg.set(1, 1, 0, 0, 2.0 * (c * c - s * s));
        MetricJet { dim: 2, g, dg, ddg }
    }

    #[test]
    fn flat_jet_has_zero_christoffel_and_curvature() {
        let jet = MetricJet::flat(3);
        let gamma = christoffel(&jet).unwrap();
        assert_eq!(gamma.max_abs(), 0.0);
        let curv = curvature_from_jet(&jet).unwrap();
        assert_eq!(curv.riemann.max_abs(), 0.0);
        assert_eq!(curv.scal, 0.0);
    }

    #[test]
    fn sphere_christoffels_match_hand_values() {
        // At phi = pi/4: Gamma^1_22 = -sin cos = -1/2, Gamma^2_12 = cot = 1.
        let jet = s2_jet(core::f64::consts::FRAC_PI_4);
        let gamma = christoffel(&jet).unwrap();
        assert!((gamma.get(0, 1, 1) + 0.5).abs() < 1e-14);
        assert!((gamma.get(1, 0, 1) - 1.0).abs() < 1e-14);
        assert!((gamma.get(1, 1, 0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn christoffel_is_linear_in_dg() {
        let mut jet = s2_jet(1.1);
        let gamma = christoffel(&jet).unwrap();
        // Double dg with g fixed: all symbols double.
        let n = jet.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    jet.dg.set(i, j, k, 2.0 * jet.dg.get(i, j, k));
                }
            }
        }
        let doubled = christoffel(&jet).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!(
                        (doubled.get(i, j, k) - 2.0 * gamma.get(i, j, k)).abs() < 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn sphere_curvature_sign_convention() {
        // Unit S^2: R_1212 = sin^2 phi, Ric = g, Scal = 2.
        let phi = 0.9;
        let jet = s2_jet(phi);
        let curv = curvature_from_jet(&jet).unwrap();
        let s2 = phi.sin().powi(2);
        assert!((curv.riemann.get(0, 1, 0, 1) - s2).abs() < 1e-13);
        assert!((curv.ricci.get(0, 0) - 1.0).abs() < 1e-13);
        assert!((curv.ricci.get(1, 1) - s2).abs() < 1e-13);
        assert!((curv.scal - 2.0).abs() < 1e-13);
        // |Ric|^2 = 2, |R|^2 = 4 for the unit two-sphere.
        assert!((curv.ricci_norm_sq - 2.0).abs() < 1e-13);
        assert!((curv.riem_norm_sq - 4.0).abs() < 1e-13);
    }

    #[test]
    fn riemann_symmetries_hold_on_sphere() {
        let curv = curvature_from_jet(&s2_jet(0.7)).unwrap();
        assert!(riemann_symmetry_defect(&curv.riemann) < 1e-13);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let mut jet = MetricJet::flat(2);
        jet.g.set(0, 0, -1.0);
        assert!(matches!(christoffel(&jet), Err(CoreError::DegenerateMetric { .. })));
    }

    #[test]
    fn jet_validation_catches_asymmetry() {
        let mut jet = MetricJet::flat(2);
        jet.dg.set(0, 1, 0, 1.0);
        assert!(jet.validate().is_err());
        let mut jet = MetricJet::flat(2);
        jet.ddg.set(0, 0, 0, 1, 1.0);
        assert!(jet.validate().is_err());
    }

    #[test]
    fn fd_derivatives_match_analytic() {
        // f(x, y) = sin(x) cos(2 y)
        let f = |p: &[f64]| p[0].sin() * (2.0 * p[1]).cos();
        let x = [0.6, 0.3];
        let h = [1e-3, 1e-3];
        let (grad, hess) = fd_derivatives(&f, &x, &h);
        let (sx, cx) = (0.6f64.sin(), 0.6f64.cos());
        let (s2y, c2y) = ((0.6f64).sin(), (0.6f64).cos());
        assert!((grad[0] - cx * c2y).abs() < 1e-9);
        assert!((grad[1] + 2.0 * sx * s2y).abs() < 1e-9);
        assert!((hess.get(0, 0) + sx * c2y).abs() < 1e-7);
        assert!((hess.get(1, 1) + 4.0 * sx * c2y).abs() < 1e-7);
        assert!((hess.get(0, 1) + 2.0 * cx * s2y).abs() < 1e-7);
    }
}
