//! Acceptance gate for the workspace: eight criteria covering the closed
//! forms, the expansion coefficients, and the spectral verification
//! pipeline. Each criterion prints one `PASS`/`FAIL` line (visible under
//! `cargo test -p wedgeheat-cli --test acceptance -- --nocapture`) and
//! fails its test when a bound is violated.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use wedgeheat_cli::parallel::heat_trace_grid_parallel;
use wedgeheat_cli::sample::random_wedge_point;
use wedgeheat_core::bessel::{bessel_j, bessel_zeros};
use wedgeheat_core::expansion::{c_dim5, finite_part_power_integral, heat_log_coefficient_c};
use wedgeheat_core::fiber::FiberModel;
use wedgeheat_core::fit::{
    extract_c_from_traces, fit_expansion, BasisElement, ExtractProtocol, ExtractReport,
    FitBasis, FitSample, CONDITION_REFUSAL_THRESHOLD,
};
use wedgeheat_core::num::SplitMix64;
use wedgeheat_core::spectrum::{bessel_orders, cone_spectrum, fiber_spectrum};
use wedgeheat_core::trace::log_spaced_grid;
use wedgeheat_core::wedge::{
    verify_transformation, wedge_curvature_norms, wedge_laplacian_of_scalar, wedge_scalar,
    WedgeModel, WedgePoint,
};

fn criterion(number: u32, label: &str, check: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(check)) {
        Ok(()) => println!("criterion {number} ({label}): PASS"),
        Err(cause) => {
            println!("criterion {number} ({label}): FAIL");
            resume_unwind(cause);
        }
    }
}

fn sphere(dim: usize, rho: f64) -> WedgeModel {
    WedgeModel::new(FiberModel::round_sphere(dim, rho).unwrap())
}

fn torus(sides: Vec<f64>) -> WedgeModel {
    WedgeModel::new(FiberModel::flat_torus(sides).unwrap())
}

/// Every preset family at fiber dimension `m - 2`.
fn preset_models(m: usize) -> Vec<WedgeModel> {
    let n = m - 2;
    let mut models = vec![
        torus((0..n).map(|i| 1.0 + 0.15 * i as f64).collect()),
        sphere(n, 0.8),
        sphere(n, 1.0),
        sphere(n, 1.3),
    ];
    if n == 1 {
        models.push(WedgeModel::new(FiberModel::circle(2.0).unwrap()));
    }
    models
}

#[test]
fn criterion_1_closed_forms_match_the_jet_path() {
    criterion(1, "closed-form curvature vs direct jets", || {
        let started = Instant::now();
        for m in 3..=6 {
            for model in preset_models(m) {
                let mut rng = SplitMix64::new(0xacce97 + m as u64);
                for _ in 0..50 {
                    let p = random_wedge_point(&model, &mut rng).expect("preset fiber");
                    let report = verify_transformation(&model, &p, 1e-8).unwrap();
                    assert!(report.riemann.max_rel <= 1e-8, "riemann at m = {m}");
                    assert!(report.ricci.max_rel <= 1e-8, "ricci at m = {m}");
                    assert!(report.scal <= 1e-8, "scalar at m = {m}");
                    assert!(
                        report.max_mixed_component <= 1e-9,
                        "mixed components at m = {m}"
                    );
                }
            }
        }
        let elapsed = started.elapsed().as_secs_f64();
        assert!(elapsed < 10.0, "runtime {elapsed:.2} s stays under ten seconds");
    });
}

#[test]
fn criterion_2_unit_sphere_cones_are_flat() {
    criterion(2, "flat-cone rigidity", || {
        for m in 3..=6 {
            let model = sphere(m - 2, 1.0);
            let mut rng = SplitMix64::new(0xf1a7c0 + m as u64);
            for _ in 0..10 {
                let p = random_wedge_point(&model, &mut rng).expect("preset fiber");
                let (riem, ric) = wedge_curvature_norms(&model, &p).unwrap();
                let scal = wedge_scalar(&model, &p).unwrap().abs();
                assert!(riem <= 1e-10, "|Riem| at m = {m}");
                assert!(ric <= 1e-10, "|Ric| at m = {m}");
                assert!(scal <= 1e-10, "|Scal| at m = {m}");
            }
        }
    });
}

#[test]
fn criterion_3_log_coefficient_paths_agree() {
    criterion(3, "log-coefficient consistency", || {
        let mut five_dim: Vec<WedgeModel> = [0.8, 1.25, 1.5].iter().map(|&r| sphere(3, r)).collect();
        five_dim.push(torus(vec![1.0, 1.0, 1.0]));
        for model in &five_dim {
            let general = heat_log_coefficient_c(model).unwrap();
            let closed = c_dim5(model).unwrap();
            assert!(
                (general - closed).abs() <= 1e-8 * closed.abs(),
                "general {general:e} vs closed {closed:e}"
            );
            // The scalar-Laplacian contribution drops out in dimension
            // five: its scaled fiber integral vanishes identically.
            let p = WedgePoint::new(0.5, 0.0, model.fiber().representative_point());
            let lap = wedge_laplacian_of_scalar(model, &p).unwrap();
            let scaled = lap * 0.5f64.powi(4) * model.fiber().volume();
            let contribution = 0.5
                * (4.0 * std::f64::consts::PI).powf(-2.5)
                * model.sigma_length()
                * (12.0 / 360.0)
                * scaled.abs();
            assert!(contribution <= 1e-10, "Laplacian contribution {contribution:e}");
        }
        // Sign: nonpositive everywhere, zero exactly at the unit sphere.
        for rho in [0.8, 1.25, 1.3, 1.5] {
            let c = heat_log_coefficient_c(&sphere(3, rho)).unwrap();
            assert!(c < -1e-6, "c strictly negative at rho = {rho}, got {c:e}");
        }
        assert!(heat_log_coefficient_c(&sphere(3, 1.0)).unwrap().abs() <= 1e-12);
        assert!(heat_log_coefficient_c(&torus(vec![1.0, 1.3, 0.7])).unwrap() < -1e-6);
    });
}

/// The tuned extraction protocol: a window early enough that the
/// logarithmic term is visible over the wall terms, with the enumeration
/// bound that keeps the certified tail negligible at `t_min`.
fn frozen_protocol() -> ExtractProtocol {
    ExtractProtocol {
        t_min: 2.5e-4,
        t_max: 5e-3,
        points: 60,
        lambda_max: Some(2e5),
        tail_rel_tol: 1e-9,
    }
}

fn run_extraction(model: &WedgeModel) -> ExtractReport {
    let protocol = frozen_protocol();
    let lambda_max = protocol.lambda_max.unwrap();
    let spec = cone_spectrum(model, lambda_max).unwrap();
    let grid = log_spaced_grid(protocol.t_min, protocol.t_max, protocol.points);
    let threads = std::thread::available_parallelism().map(usize::from).unwrap_or(1);
    let traces = heat_trace_grid_parallel(&spec, &grid, threads, None);
    extract_c_from_traces(model, &spec, &protocol, &traces).unwrap()
}

struct Extractions {
    rho125: ExtractReport,
    rho100: ExtractReport,
    m4: ExtractReport,
}

static EXTRACTIONS: OnceLock<Extractions> = OnceLock::new();

fn extractions() -> &'static Extractions {
    EXTRACTIONS.get_or_init(|| Extractions {
        rho125: run_extraction(&sphere(3, 1.25)),
        rho100: run_extraction(&sphere(3, 1.0)),
        m4: run_extraction(&sphere(2, 1.3)),
    })
}

#[test]
fn criterion_4_spectral_ground_truth() {
    criterion(4, "measured log coefficient", || {
        let ex = extractions();
        let reference = ex.rho125.c_predicted.abs();
        assert!(
            (reference - 1.402e-2).abs() <= 1e-3,
            "reference magnitude near 1.40e-2, got {reference:e}"
        );
        assert!(
            ex.rho125.rel_deviation <= 0.10,
            "rho = 1.25 deviation {:.4} within ten percent",
            ex.rho125.rel_deviation
        );
        assert!(ex.rho125.stored_modes <= 10_000_000, "mode budget");
        assert!(
            ex.rho100.c_measured.abs() <= 0.01 * reference,
            "rho = 1 null: {:e}",
            ex.rho100.c_measured
        );
        assert_eq!(ex.rho100.c_predicted, 0.0);
        assert!(
            ex.m4.c_measured.abs() <= 0.01 * reference,
            "m = 4 null: {:e}",
            ex.m4.c_measured
        );
        assert_eq!(ex.m4.c_predicted, 0.0);
        assert!(ex.m4.stored_modes <= 10_000_000, "mode budget");
    });
}

#[test]
fn criterion_5_weyl_leading_coefficient() {
    criterion(5, "fitted Weyl leading term", || {
        let ex = extractions();
        for (label, report) in
            [("m5 rho=1.25", &ex.rho125), ("m5 rho=1", &ex.rho100), ("m4", &ex.m4)]
        {
            let rel =
                (report.leading_fitted - report.leading_predicted).abs() / report.leading_predicted;
            assert!(rel <= 0.01, "{label}: leading deviation {rel:e}");
        }
        // Vol = pi^3 rho^3 for the five-dimensional sphere model.
        let pi = std::f64::consts::PI;
        let want = pi.powi(3) * 1.25f64.powi(3) / (4.0 * pi).powf(2.5);
        let got = ex.rho125.leading_predicted;
        assert!((got - want).abs() <= 1e-12 * want, "predicted leading {got} vs {want}");
    });
}

#[test]
fn criterion_6_fit_self_test() {
    criterion(6, "synthetic fit recovery and refusal", || {
        let basis = FitBasis::new(vec![
            BasisElement { power_num: -5, with_log: false },
            BasisElement { power_num: -4, with_log: false },
            BasisElement { power_num: -3, with_log: false },
            BasisElement { power_num: -2, with_log: false },
            BasisElement { power_num: -1, with_log: false },
            BasisElement { power_num: -1, with_log: true },
            BasisElement { power_num: 0, with_log: false },
        ])
        .unwrap();
        let truth = [3.2, -1.1, 0.7, 0.4, -2.5, 1.3, 0.9];
        let synthesize = |grid: Vec<f64>| -> Vec<FitSample> {
            grid.into_iter()
                .map(|t| {
                    let value: f64 = basis
                        .elements()
                        .iter()
                        .zip(&truth)
                        .map(|(e, c)| c * e.evaluate(t))
                        .sum();
                    FitSample { t, value, error: 0.0, weight: 1.0 / value.abs().max(1e-6) }
                })
                .collect()
        };
        let fit = fit_expansion(&synthesize(log_spaced_grid(1e-4, 10.0, 40)), &basis).unwrap();
        assert!(!fit.refused);
        for (got, want) in fit.coefficients.iter().zip(&truth) {
            assert!(((got - want) / want).abs() <= 1e-8, "got {got}, want {want}");
        }
        // A six-digit-wide window makes the columns collinear; the fit
        // must flag itself rather than report garbage quietly.
        let narrow = synthesize(log_spaced_grid(1.0, 1.0 + 1e-6, 40));
        let refused = fit_expansion(&narrow, &basis).unwrap();
        assert!(refused.refused, "condition {:e}", refused.condition);
        assert!(refused.condition > CONDITION_REFUSAL_THRESHOLD);
    });
}

#[test]
fn criterion_7_finite_part_rules() {
    criterion(7, "finite-part integral rules", || {
        assert_eq!(finite_part_power_integral(2.0, 1.0), 1.0 / 3.0);
        assert_eq!(finite_part_power_integral(0.0, 1.0), 1.0);
        assert_eq!(finite_part_power_integral(-3.0, 1.0), -0.5);
        assert_eq!(finite_part_power_integral(-1.0, 1.0), 0.0);
    });
}

fn bisect_zero(nu: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |x: f64| bessel_j(nu, x).0;
    assert!(f(lo) * f(hi) < 0.0, "bracket for nu = {nu}");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_8_bessel_kernel() {
    criterion(8, "Bessel zeros and interlacing", || {
        let j01 = bisect_zero(0.0, 2.0, 3.0);
        let j11 = bisect_zero(1.0, 3.0, 4.5);
        assert!((bessel_zeros(0.0, 1).unwrap()[0] - j01).abs() <= 1e-10);
        assert!((bessel_zeros(1.0, 1).unwrap()[0] - j11).abs() <= 1e-10);
        // Interlacing across the order table of the five-dimensional
        // unit-sphere model: j_{nu,n} < j_{nu+1,n} < j_{nu,n+1}.
        let model = sphere(3, 1.0);
        let fiber = fiber_spectrum(&model, 35.0).unwrap();
        let orders = bessel_orders(&fiber, model.total_dim()).unwrap();
        assert!(orders.len() >= 5, "order table has several entries");
        let tables: Vec<Vec<f64>> =
            orders.iter().map(|&(nu, _)| bessel_zeros(nu, 8).unwrap()).collect();
        for w in tables.windows(2) {
            for n in 0..7 {
                assert!(w[0][n] < w[1][n], "lower order leads");
                assert!(w[1][n] < w[0][n + 1], "next zero of the lower order trails");
            }
        }
    });
}
