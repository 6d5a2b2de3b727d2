//! Gamma-family special functions.
//!
//! The gamma function uses the Lanczos-class expansion with the tabulated
//! coefficients of Pugh's thesis (the same table used by `statrs`), giving
//! relative error below 1e-13 over the arguments needed here. Half-integer
//! values are cross-checked in tests against the closed form
//! `Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)`.

use crate::num;

/// Auxiliary variable of the Lanczos expansion.
const GAMMA_R: f64 = 10.900511;

/// Polynomial coefficients of the Lanczos expansion.
const GAMMA_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

const TWO_SQRT_E_OVER_PI: f64 = 1.8603827342052657173362492472666631120594218414085755;
const PI: f64 = core::f64::consts::PI;
const E: f64 = core::f64::consts::E;

/// Gamma function for real arguments (poles at non-positive integers).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let mut s = GAMMA_DK[0];
        for (k, dk) in GAMMA_DK.iter().enumerate().skip(1) {
            s += dk / (k as f64 - x);
        }
        PI / (num::sin(PI * x)
            * s
            * TWO_SQRT_E_OVER_PI
            * num::powf((0.5 - x + GAMMA_R) / E, 0.5 - x))
    } else {
        let mut s = GAMMA_DK[0];
        for (k, dk) in GAMMA_DK.iter().enumerate().skip(1) {
            s += dk / (x + k as f64 - 1.0);
        }
        s * TWO_SQRT_E_OVER_PI * num::powf((x - 0.5 + GAMMA_R) / E, x - 0.5)
    }
}

/// Exact factorial as `f64` (exact through `n = 22`, the largest needed).
pub fn factorial(n: u32) -> f64 {
    let mut acc = 1.0;
    for k in 2..=n {
        acc *= k as f64;
    }
    acc
}

/// `Gamma(n + 1/2)` by the closed form `(2n)! sqrt(pi) / (4^n n!)`.
///
/// Used as an independent oracle for the Lanczos path on half-integer
/// arguments.
pub fn gamma_half_integer(n: u32) -> f64 {
    factorial(2 * n) * num::sqrt(PI) / (num::powi(4.0, n as i32) * factorial(n))
}

/// Upper incomplete gamma function `Gamma(s, x)` for `s > 0`, `x >= 0`.
///
/// Uses the ascending series for the lower incomplete function when
/// `x <= s + 1` and the standard continued fraction (Lentz's algorithm)
/// otherwise, so both branches operate where they are well conditioned.
/// Underflows to `0` for very large `x`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && x >= 0.0, "requires s > 0 and x >= 0");
    if x == 0.0 {
        return gamma(s);
    }
    let scale = num::exp(-x + s * num::ln(x));
    if x <= s + 1.0 {
        // Gamma(s, x) = Gamma(s) - gamma(s, x) with the lower function from
        // its ascending series x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n)).
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut denom = s;
        for _ in 0..500 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if num::abs(term) < num::abs(sum) * 1e-16 {
                break;
            }
        }
        return gamma(s) - scale * sum;
    }
    if scale == 0.0 {
        return 0.0;
    }
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if num::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if num::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if num::abs(del - 1.0) < EPS {
            break;
        }
    }
    scale * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_integer_factorials() {
        for n in 1..15u32 {
            let rel = (gamma(n as f64 + 1.0) - factorial(n)).abs() / factorial(n);
            assert!(rel < 1e-13, "n = {n}: rel = {rel:e}");
        }
    }

    #[test]
    fn gamma_matches_half_integer_closed_form() {
        for n in 0..15u32 {
            let want = gamma_half_integer(n);
            let got = gamma(n as f64 + 0.5);
            let rel = (got - want).abs() / want;
            // The closed form itself loses a few ulps in the factorial
            // products at large n, hence the slightly relaxed bound.
            assert!(rel < 5e-13, "n = {n}: rel = {rel:e}");
        }
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gamma_reflection_on_negative_half_integers() {
        // Gamma(-1/2) = -2 sqrt(pi), Gamma(-3/2) = 4 sqrt(pi) / 3.
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-12);
        assert!((gamma(-1.5) - 4.0 * PI.sqrt() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn upper_incomplete_gamma_at_integer_s() {
        // Gamma(1, x) = e^{-x}; Gamma(2, x) = (x + 1) e^{-x}.
        for &x in &[5.0, 20.0, 100.0] {
            let rel = (upper_incomplete_gamma(1.0, x) - (-x).exp()).abs() / (-x).exp();
            assert!(rel < 1e-12, "x = {x}: rel = {rel:e}");
            let want = (x + 1.0) * (-x).exp();
            let rel = (upper_incomplete_gamma(2.0, x) - want).abs() / want;
            assert!(rel < 1e-12, "x = {x}: rel = {rel:e}");
        }
    }

    #[test]
    fn upper_incomplete_gamma_series_oracle() {
        // Gamma(7/2, x) by integrating by parts from Gamma(1/2, x) is messy;
        // instead compare against a high-resolution trapezoid integral of
        // the defining integrand on [x, x + 60].
        let s = 3.5;
        let x = 12.0;
        let n = 400_000;
        let h = 60.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let u = x + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * u.powf(s - 1.0) * (-u).exp();
        }
        let want = acc * h;
        let got = upper_incomplete_gamma(s, x);
        assert!((got - want).abs() / want < 1e-8, "got {got:e}, want {want:e}");
    }

    #[test]
    fn upper_incomplete_gamma_underflows_cleanly() {
        assert_eq!(upper_incomplete_gamma(3.5, 800.0), 0.0);
    }

    #[test]
    fn upper_incomplete_gamma_series_branch() {
        // Small-x arguments fall to the series branch; closed forms at
        // integer s stay available as oracles there.
        for &x in &[0.1, 0.5, 1.5] {
            let rel = (upper_incomplete_gamma(1.0, x) - (-x).exp()).abs() / (-x).exp();
            assert!(rel < 1e-13, "x = {x}: rel = {rel:e}");
            let want = (x + 1.0) * (-x).exp();
            let rel = (upper_incomplete_gamma(2.0, x) - want).abs() / want;
            assert!(rel < 1e-13, "x = {x}: rel = {rel:e}");
        }
        assert!((upper_incomplete_gamma(2.5, 0.0) - gamma(2.5)).abs() < 1e-14);
    }

    #[test]
    fn upper_incomplete_gamma_branches_agree_at_switch() {
        // The two evaluation regimes meet at x = s + 1; values just on
        // either side must line up to near machine precision.
        let s = 3.5;
        let below = upper_incomplete_gamma(s, s + 1.0 - 1e-9);
        let above = upper_incomplete_gamma(s, s + 1.0 + 1e-9);
        assert!((below - above).abs() / above < 1e-8);
    }
}
