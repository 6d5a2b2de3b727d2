//! Exact Dirichlet spectrum of the model wedge.
//!
//! Separation of variables on `(0,1) x S^1_sigma x F` with the metric
//! `dr^2 + dtheta^2 + r^2 g_V` turns the eigenvalue problem into a fiber
//! part, a circle part, and a radial Bessel equation: for a fiber eigenvalue
//! `mu` the bounded radial solutions are `r^{-(m-3)/2} J_nu(sqrt(lambda') r)`
//! with order `nu = sqrt(mu + ((m-3)/2)^2)`, so the Dirichlet condition at
//! `r = 1` quantizes `lambda' = j_{nu,n}^2` and the full eigenvalues are
//!
//! `lambda = j_{nu,n}^2 + (2 pi k / sigma_len)^2`, `n >= 1`, `k` integer.
//!
//! (See `docs/model_cone.md` for the derivation and the choice of the
//! Friedrichs extension, which keeps exactly the `J_nu` branch.)
//!
//! Fiber spectra are available in closed form for the preset fibers: round
//! spheres, circles, and flat tori. Custom charts have no spectral
//! enumeration.

use alloc::vec::Vec;

use crate::bessel::bessel_zeros_below;
use crate::error::CoreError;
use crate::fiber::FiberKind;
use crate::num;
use crate::special::{gamma, upper_incomplete_gamma};
use crate::wedge::WedgeModel;
use crate::Result;

const PI: f64 = core::f64::consts::PI;

/// Eigenvalues of the fiber Laplacian with multiplicities, up to a cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSpectrum {
    /// `(mu, multiplicity)` pairs, strictly ascending in `mu`.
    entries: Vec<(f64, u64)>,
    /// Every fiber eigenvalue `<= cutoff` is present.
    cutoff: f64,
}

impl FiberSpectrum {
    /// `(mu, multiplicity)` pairs, strictly ascending in `mu`.
    pub fn entries(&self) -> &[(f64, u64)] {
        &self.entries
    }

    /// Enumeration cutoff: every eigenvalue `<= cutoff` is listed.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// One separated mode of the wedge Laplacian.
///
/// The circle index `k` is stored nonnegative; the exact `+-k` degeneracy is
/// folded into the multiplicity instead of listing both signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMode {
    /// Bessel order of the radial equation.
    pub nu: f64,
    /// Index of the Bessel zero (1-based).
    pub n: u32,
    /// Circle mode index, `>= 0`.
    pub k: u32,
    /// Eigenvalue `j_{nu,n}^2 + (2 pi k / sigma_len)^2`.
    pub lambda: f64,
    /// Fiber multiplicity times the circle degeneracy (2 for `k != 0`).
    pub multiplicity: u64,
}

/// Complete Dirichlet spectrum of the model wedge up to `lambda_max`,
/// together with a counting-function majorant for certified tail bounds.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    modes: Vec<ConeMode>,
    lambda_max: f64,
    /// Total dimension `m` of the wedge.
    m: usize,
    /// Majorant constant: `N(lambda) <= c_maj * lambda^(m/2)` for
    /// `lambda >= lambda_max`.
    c_maj: f64,
    /// Computed-over-Weyl ratio at `lambda_max` (diagnostic).
    weyl_ratio: f64,
}

impl SpectrumSet {
    /// Modes sorted ascending by eigenvalue.
    pub fn modes(&self) -> &[ConeMode] {
        &self.modes
    }

    /// Enumeration bound: every eigenvalue `<= lambda_max` is present.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Total dimension of the wedge.
    pub fn total_dim(&self) -> usize {
        self.m
    }

    /// Ratio of the computed counting function to the Weyl leading term at
    /// `lambda_max`.
    pub fn weyl_ratio(&self) -> f64 {
        self.weyl_ratio
    }

    /// Eigenvalue counting function `N(lambda)`, multiplicities included.
    pub fn counting_function(&self, lambda: f64) -> u64 {
        let mut count = 0;
        for mode in &self.modes {
            if mode.lambda > lambda {
                break;
            }
            count += mode.multiplicity;
        }
        count
    }

    /// Certified bound on the neglected tail `sum_{lambda > lambda_max}
    /// mult * exp(-t lambda)`.
    ///
    /// From `N(lambda) <= c_maj * lambda^p` with `p = m/2`, integration by
    /// parts gives
    ///
    /// `tail <= c_maj * t^{-p} * Gamma(p + 1, t * lambda_max)`,
    ///
    /// with the upper incomplete gamma function; the bound is strictly
    /// decreasing in `t`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        assert!(t > 0.0, "heat time must be positive");
        let p = 0.5 * self.m as f64;
        self.c_maj * num::powf(t, -p) * upper_incomplete_gamma(p + 1.0, t * self.lambda_max)
    }
}

/// Fiber Laplacian spectrum up to `cutoff` for the preset fibers.
///
/// Custom charts carry no spectral data and yield
/// [`CoreError::SpectrumUnavailable`].
pub fn fiber_spectrum(model: &WedgeModel, cutoff: f64) -> Result<FiberSpectrum> {
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return Err(CoreError::invalid(
            "fiber cutoff must be finite and nonnegative",
        ));
    }
    let entries = match model.fiber().kind() {
        FiberKind::RoundSphere { dim, radius } => sphere_entries(*dim, *radius, cutoff),
        FiberKind::Circle { length } => circle_entries(*length, cutoff),
        FiberKind::FlatTorus { sides } => torus_entries(sides, cutoff),
        FiberKind::Custom(_) => return Err(CoreError::SpectrumUnavailable),
    };
    Ok(FiberSpectrum { entries, cutoff })
}

/// Spherical harmonics on `S^n(rho)`: `mu_l = l (l + n - 1) / rho^2` with
/// multiplicity `C(l + n, n) - C(l + n - 2, n)`.
fn sphere_entries(n: usize, rho: f64, cutoff: f64) -> Vec<(f64, u64)> {
    let inv_rho2 = 1.0 / (rho * rho);
    let mut entries = Vec::new();
    let mut l: u64 = 0;
    loop {
        let lf = l as f64;
        let mu = lf * (lf + n as f64 - 1.0) * inv_rho2;
        if mu > cutoff {
            break;
        }
        entries.push((mu, sphere_multiplicity(l, n as u64)));
        l += 1;
    }
    entries
}

/// Dimension of the degree-`l` spherical harmonics on `S^n`.
fn sphere_multiplicity(l: u64, n: u64) -> u64 {
    if l == 0 {
        return 1;
    }
    binomial(l + n, n) - binomial(l + n - 2, n)
}

/// Exact binomial coefficient via 128-bit intermediates.
fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Circle of circumference `len`: `mu_k = (2 pi k / len)^2`, double for
/// `k >= 1`.
fn circle_entries(len: f64, cutoff: f64) -> Vec<(f64, u64)> {
    let mut entries = alloc::vec![(0.0, 1)];
    let base = 2.0 * PI / len;
    let mut k: u64 = 1;
    loop {
        let mu = (base * k as f64) * (base * k as f64);
        if mu > cutoff {
            break;
        }
        entries.push((mu, 2));
        k += 1;
    }
    entries
}

/// Flat torus: lattice sums `mu = sum_i (2 pi k_i / L_i)^2` over integer
/// vectors, grouped into multiplicities.
fn torus_entries(sides: &[f64], cutoff: f64) -> Vec<(f64, u64)> {
    let rates: Vec<f64> = sides.iter().map(|l| 2.0 * PI / l).collect();
    let mut values = Vec::new();
    // Odometer over the box |k_i| <= L_i sqrt(cutoff) / (2 pi); values above
    // the cutoff are filtered pointwise.
    let bounds: Vec<i64> = rates
        .iter()
        .map(|r| num::floor(num::sqrt(cutoff) / r) as i64)
        .collect();
    let mut k: Vec<i64> = bounds.iter().map(|b| -b).collect();
    'outer: loop {
        let mut mu = 0.0;
        for (ki, r) in k.iter().zip(&rates) {
            let term = *ki as f64 * r;
            mu += term * term;
        }
        if mu <= cutoff {
            values.push(mu);
        }
        for i in 0..k.len() {
            if k[i] < bounds[i] {
                k[i] += 1;
                continue 'outer;
            }
            k[i] = -bounds[i];
        }
        break;
    }
    values.sort_unstable_by(f64::total_cmp);
    // Group values that agree up to summation-order rounding.
    let mut entries: Vec<(f64, u64)> = Vec::new();
    for v in values {
        match entries.last_mut() {
            Some((mu, mult)) if v - *mu <= 1e-12 * v.max(1.0) => *mult += 1,
            _ => entries.push((v, 1)),
        }
    }
    entries
}

/// Bessel orders of the radial equations: `nu = sqrt(mu + ((m-3)/2)^2)` for
/// each fiber eigenvalue `mu`, multiplicities carried through.
pub fn bessel_orders(fiber: &FiberSpectrum, m: usize) -> Result<Vec<(f64, u64)>> {
    if m < 3 {
        return Err(CoreError::invalid("wedge dimension must be at least 3"));
    }
    let shift = 0.5 * (m as f64 - 3.0);
    Ok(fiber
        .entries
        .iter()
        .map(|&(mu, mult)| (num::sqrt(mu + shift * shift), mult))
        .collect())
}

/// Fiber cutoff needed to enumerate the cone spectrum up to `lambda_max`:
/// a fiber eigenvalue `mu` contributes only if its Bessel order is below
/// `sqrt(lambda_max)` (the first zero always exceeds the order).
pub fn required_fiber_cutoff(m: usize, lambda_max: f64) -> f64 {
    let shift = 0.5 * (m as f64 - 3.0);
    lambda_max - shift * shift
}

/// Complete Dirichlet spectrum of the model wedge up to `lambda_max`.
pub fn cone_spectrum(model: &WedgeModel, lambda_max: f64) -> Result<SpectrumSet> {
    let fiber = fiber_spectrum(
        model,
        required_fiber_cutoff(model.total_dim(), lambda_max).max(0.0),
    )?;
    cone_spectrum_with_fiber(model, &fiber, lambda_max)
}

/// Cone spectrum from a precomputed fiber spectrum.
///
/// Fails with [`CoreError::InconsistentCutoff`] when the fiber enumeration
/// does not reach every order contributing below `lambda_max`.
pub fn cone_spectrum_with_fiber(
    model: &WedgeModel,
    fiber: &FiberSpectrum,
    lambda_max: f64,
) -> Result<SpectrumSet> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(CoreError::invalid("lambda_max must be finite and positive"));
    }
    let m = model.total_dim();
    let required = required_fiber_cutoff(m, lambda_max);
    if fiber.cutoff < required {
        return Err(CoreError::InconsistentCutoff {
            required,
            actual: fiber.cutoff,
        });
    }
    let orders = bessel_orders(fiber, m)?;
    let sqrt_lambda = num::sqrt(lambda_max);
    let circle_rate = 2.0 * PI / model.sigma_length();
    let mut modes = Vec::new();
    for &(nu, fiber_mult) in &orders {
        if nu >= sqrt_lambda {
            continue;
        }
        for (idx, &j) in bessel_zeros_below(nu, sqrt_lambda)?.iter().enumerate() {
            let n = (idx + 1) as u32;
            let radial = j * j;
            // |k| <= sqrt(lambda_max - j^2) * sigma_len / (2 pi).
            let k_max = num::floor(num::sqrt(lambda_max - radial) / circle_rate) as u32;
            for k in 0..=k_max {
                let angular = circle_rate * k as f64;
                let lambda = radial + angular * angular;
                if lambda > lambda_max {
                    break;
                }
                let degeneracy = if k == 0 { 1 } else { 2 };
                modes.push(ConeMode {
                    nu,
                    n,
                    k,
                    lambda,
                    multiplicity: fiber_mult * degeneracy,
                });
            }
        }
    }
    modes.sort_unstable_by(|a, b| {
        f64::total_cmp(&a.lambda, &b.lambda)
            .then(f64::total_cmp(&a.nu, &b.nu))
            .then(a.n.cmp(&b.n))
            .then(a.k.cmp(&b.k))
    });

    // Counting-function majorant for the tail bound: twice the Weyl leading
    // constant, further raised if the computed count at lambda_max ever
    // exceeded it (it does not for these cones, but the bound must not
    // silently depend on that).
    let weyl = weyl_counting_estimate(model, lambda_max);
    let count: u64 = modes.iter().map(|mode| mode.multiplicity).sum();
    let weyl_ratio = count as f64 / weyl;
    let c_maj = 2.0 * weyl_constant(model) * weyl_ratio.max(1.0);
    Ok(SpectrumSet {
        modes,
        lambda_max,
        m,
        c_maj,
        weyl_ratio,
    })
}

/// Riemannian volume of the wedge: `sigma_len * vol(F) / (m - 1)` from
/// integrating `r^{m-2}` over `(0, 1)`.
pub fn wedge_volume(model: &WedgeModel) -> f64 {
    model.sigma_length() * model.fiber().volume() / (model.total_dim() as f64 - 1.0)
}

/// Weyl constant `W` in `N(lambda) ~ W lambda^{m/2}`:
/// `W = vol / ((4 pi)^{m/2} Gamma(m/2 + 1))`.
pub fn weyl_constant(model: &WedgeModel) -> f64 {
    let m = model.total_dim() as f64;
    wedge_volume(model) / (num::powf(4.0 * PI, 0.5 * m) * gamma(0.5 * m + 1.0))
}

/// Weyl leading-term prediction for the counting function.
pub fn weyl_counting_estimate(model: &WedgeModel, lambda: f64) -> f64 {
    weyl_constant(model) * num::powf(lambda, 0.5 * model.total_dim() as f64)
}
