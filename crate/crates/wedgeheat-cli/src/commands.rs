//! Subcommand implementations.
//!
//! [`execute`] is the single entry point: it loads and validates the
//! configuration, runs the requested computation, writes the artifacts and
//! the run manifest, and removes everything it wrote if any step fails.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use wedgeheat_core::expansion::{
    c_dim5, heat_coefficients, resolvent_to_heat, sal_expansion_report,
    spherical_space_form_test, ExpansionTerm, ExpansionVariable, TermOrigin,
};
use wedgeheat_core::fit::{
    auto_lambda_max, extract_c_from_traces, ExtractProtocol, ExtractReport,
};
use wedgeheat_core::heat::{sigma_j, u_j, wedge_invariant_inputs, SigmaParams};
use wedgeheat_core::num::SplitMix64;
use wedgeheat_core::spectrum::cone_spectrum;
use wedgeheat_core::trace::log_spaced_grid;
use wedgeheat_core::wedge::{verify_transformation, WedgeModel, WedgePoint};
use wedgeheat_core::CoreError;

use crate::config::{self, parse_convention, RunConfig};
use crate::output::{self, Manifest, RunWriter, MANIFEST_NAME};
use crate::parallel;
use crate::sample;
use crate::{CliError, Result};

/// The available subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Closed-form curvature versus the direct jet path.
    Curvature,
    /// Pointwise heat invariants and resolvent coefficients.
    Invariants,
    /// Logarithmic heat coefficient and space-form verdict.
    Coefficient,
    /// Resolvent-trace expansion term report.
    Expansion,
    /// Model-cone spectrum enumeration.
    Spectrum,
    /// Heat trace on a time grid.
    Trace,
    /// Full spectral extraction of the log coefficient.
    ExtractC,
}

impl CommandKind {
    /// The subcommand name as spelled on the command line.
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Curvature => "curvature",
            CommandKind::Invariants => "invariants",
            CommandKind::Coefficient => "coefficient",
            CommandKind::Expansion => "expansion",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Trace => "trace",
            CommandKind::ExtractC => "extract-c",
        }
    }
}

/// Settings resolved from the command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    /// Path of the TOML run configuration.
    pub config_path: PathBuf,
    /// Output directory override (`--out`).
    pub out_dir: Option<PathBuf>,
    /// Worker-thread override (`--threads`).
    pub threads: Option<usize>,
    /// Sampling-seed override (`--seed`).
    pub seed: Option<u64>,
}

/// Execute a subcommand end to end and return the written paths, manifest
/// included.
pub fn execute(kind: CommandKind, invocation: &Invocation) -> Result<Vec<PathBuf>> {
    let (config, config_text) = config::load(&invocation.config_path)?;
    let seed = invocation.seed.or(config.seed).unwrap_or(config::DEFAULT_SEED);
    let threads = parallel::resolve_threads(invocation.threads)?;
    let out_dir = resolve_out_dir(invocation, &config);
    let mut writer = RunWriter::new(&out_dir)?;
    let started = Instant::now();
    let run = dispatch(kind, &config, seed, threads, &mut writer);
    let finish = run.and_then(|()| {
        let outputs = writer.written().iter().map(file_name).collect();
        let manifest = Manifest {
            command: kind.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            threads,
            outputs,
            timing_seconds: started.elapsed().as_secs_f64(),
            config: config_text,
        };
        writer.write_json(MANIFEST_NAME, &manifest).map(|_| ())
    });
    match finish {
        Ok(()) => Ok(writer.into_written()),
        Err(e) => {
            writer.cleanup();
            Err(e)
        }
    }
}

fn dispatch(
    kind: CommandKind,
    config: &RunConfig,
    seed: u64,
    threads: usize,
    writer: &mut RunWriter,
) -> Result<()> {
    match kind {
        CommandKind::Curvature => run_curvature(config, seed, writer),
        CommandKind::Invariants => run_invariants(config, writer),
        CommandKind::Coefficient => run_coefficient(config, writer),
        CommandKind::Expansion => run_expansion(config, writer),
        CommandKind::Spectrum => run_spectrum(config, writer),
        CommandKind::Trace => run_trace(config, threads, writer),
        CommandKind::ExtractC => run_extract(config, threads, writer),
    }
}

fn resolve_out_dir(invocation: &Invocation, config: &RunConfig) -> PathBuf {
    invocation
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("WEDGEHEAT_OUT").map(PathBuf::from))
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wedgeheat-out"))
}

fn file_name(path: &PathBuf) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Smallest trace-class resolvent power for dimension `m`.
fn default_resolvent_power(m: usize) -> u32 {
    (m / 2 + 1) as u32
}

#[derive(Debug, Serialize)]
struct CurvatureReport {
    m: usize,
    points: usize,
    tol: f64,
    mixed_tol: f64,
    seed: u64,
    max_riemann_rel: f64,
    max_ricci_rel: f64,
    max_scal_deviation: f64,
    max_mixed_component: f64,
    pass: bool,
}

fn run_curvature(config: &RunConfig, seed: u64, writer: &mut RunWriter) -> Result<()> {
    let section = config.curvature.clone().unwrap_or_default();
    section.validate()?;
    let model = config.model.build()?;
    let mut rng = SplitMix64::new(seed);
    let mut report = CurvatureReport {
        m: model.total_dim(),
        points: section.points,
        tol: section.tol,
        mixed_tol: section.mixed_tol,
        seed,
        max_riemann_rel: 0.0,
        max_ricci_rel: 0.0,
        max_scal_deviation: 0.0,
        max_mixed_component: 0.0,
        pass: false,
    };
    for _ in 0..section.points {
        let p = sample_point(&model, &mut rng)?;
        let outcome = verify_transformation(&model, &p, section.tol)?;
        report.max_riemann_rel = report.max_riemann_rel.max(outcome.riemann.max_rel);
        report.max_ricci_rel = report.max_ricci_rel.max(outcome.ricci.max_rel);
        report.max_scal_deviation = report.max_scal_deviation.max(outcome.scal);
        report.max_mixed_component =
            report.max_mixed_component.max(outcome.max_mixed_component);
        if outcome.max_mixed_component > section.mixed_tol {
            return Err(CoreError::VerificationFailed {
                component: String::from("mixed wedge components"),
                deviation: outcome.max_mixed_component,
                tol: section.mixed_tol,
            }
            .into());
        }
    }
    report.pass = true;
    writer.write_json("curvature.json", &report)?;
    Ok(())
}

fn sample_point(model: &WedgeModel, rng: &mut SplitMix64) -> Result<WedgePoint> {
    sample::random_wedge_point(model, rng).ok_or_else(|| {
        CliError::Core(CoreError::invalid(
            "random sampling needs a preset fiber with published chart ranges",
        ))
    })
}

#[derive(Debug, Serialize)]
struct InvariantsReport {
    m: usize,
    r: f64,
    theta: f64,
    fiber_point: Vec<f64>,
    convention: String,
    scal: f64,
    ricci_norm_sq: f64,
    riemann_norm_sq: f64,
    lap_scal: f64,
    u: Vec<f64>,
    fiber_integrals: Vec<f64>,
    d: u32,
    sigma: Vec<f64>,
}

fn run_invariants(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let section = config.invariants.clone().unwrap_or_default();
    let model = config.model.build()?;
    let m = model.total_dim();
    section.validate(m, model.fiber().dim())?;
    let convention = parse_convention(&section.convention, "invariants.convention")?;
    let x = section
        .fiber_point
        .clone()
        .unwrap_or_else(|| model.fiber().representative_point());
    let point = WedgePoint::new(section.r, section.theta, x.clone());
    let inputs = wedge_invariant_inputs(&model, &point)?;
    let u: Vec<f64> = (0..=2)
        .map(|j| u_j(j, &inputs, convention))
        .collect::<wedgeheat_core::Result<_>>()?;
    let d = section.d.unwrap_or_else(|| default_resolvent_power(m));
    let mut fiber_integrals = Vec::new();
    let mut sigma = Vec::new();
    for j in 0..=2u32 {
        fiber_integrals.push(wedgeheat_core::heat::fiber_integral_of_wedge_uj(
            &model, section.r, j, convention,
        )?);
        let params = SigmaParams { d, m: m as u32, j };
        sigma.push(sigma_j(section.r, &params, &model, convention)?);
    }
    let report = InvariantsReport {
        m,
        r: section.r,
        theta: section.theta,
        fiber_point: x,
        convention: section.convention,
        scal: inputs.scal,
        ricci_norm_sq: inputs.ricci_norm_sq,
        riemann_norm_sq: inputs.riem_norm_sq,
        lap_scal: inputs.lap_scal,
        u,
        fiber_integrals,
        d,
        sigma,
    };
    writer.write_json("invariants.json", &report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpaceFormBlock {
    is_space_form: bool,
    residual: f64,
    tol: f64,
}

#[derive(Debug, Serialize)]
struct CoefficientReport {
    m: usize,
    c: f64,
    c_dim5: Option<f64>,
    consistency_rel_gap: Option<f64>,
    space_form: Option<SpaceFormBlock>,
}

fn run_coefficient(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let section = config.coefficient.clone().unwrap_or_default();
    section.validate()?;
    let model = config.model.build()?;
    let m = model.total_dim();
    let c = wedgeheat_core::expansion::heat_log_coefficient_c(&model)?;
    let (closed, gap, space_form) = if m == 5 {
        let closed = c_dim5(&model)?;
        let gap = if closed != 0.0 {
            (c - closed).abs() / closed.abs()
        } else {
            c.abs()
        };
        let verdict = spherical_space_form_test(&model, section.space_form_tol)?;
        let block = SpaceFormBlock {
            is_space_form: verdict.is_space_form,
            residual: verdict.residual,
            tol: section.space_form_tol,
        };
        (Some(closed), Some(gap), Some(block))
    } else {
        (None, None, None)
    };
    let report =
        CoefficientReport { m, c, c_dim5: closed, consistency_rel_gap: gap, space_form };
    writer.write_json("coefficient.json", &report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct TermJson {
    variable: String,
    power: f64,
    log: bool,
    coefficient: Option<f64>,
    origin: String,
    finite_part_collapsed: bool,
}

impl TermJson {
    fn from_term(term: &ExpansionTerm) -> Self {
        Self {
            variable: match term.variable {
                ExpansionVariable::ResolventZ => String::from("z"),
                ExpansionVariable::HeatTime => String::from("t"),
            },
            power: term.power(),
            log: term.has_log,
            coefficient: term.coefficient,
            origin: match term.origin {
                TermOrigin::Interior => String::from("interior"),
                TermOrigin::SalLog => String::from("log"),
                TermOrigin::SalScaling => String::from("scaling"),
            },
            finite_part_collapsed: term.finite_part_collapsed,
        }
    }
}

#[derive(Debug, Serialize)]
struct ExpansionReport {
    m: usize,
    d: u32,
    j_max: u32,
    convention: String,
    resolvent_terms: Vec<TermJson>,
    heat_terms: Vec<TermJson>,
    heat_log_coefficient: f64,
}

fn run_expansion(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let section = config.expansion.clone().unwrap_or_default();
    let model = config.model.build()?;
    let m = model.total_dim();
    section.validate(m)?;
    let convention = parse_convention(&section.convention, "expansion.convention")?;
    let d = section.d.unwrap_or_else(|| default_resolvent_power(m));
    let resolvent = sal_expansion_report(&model, d, section.j_max, convention)?;
    let heat: Vec<TermJson> = resolvent
        .iter()
        .filter_map(|term| resolvent_to_heat(term, d, m as u32))
        .map(|term| TermJson::from_term(&term))
        .collect();
    let coefficients = heat_coefficients(&model, section.j_max, convention)?;
    let report = ExpansionReport {
        m,
        d,
        j_max: section.j_max,
        convention: section.convention,
        resolvent_terms: resolvent.iter().map(TermJson::from_term).collect(),
        heat_terms: heat,
        heat_log_coefficient: coefficients.c,
    };
    writer.write_json("expansion.json", &report)?;
    Ok(())
}

fn run_spectrum(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let section = config
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::Config(String::from("spectrum: missing [spectrum] section")))?;
    section.validate()?;
    let model = config.model.build()?;
    let spec = cone_spectrum(&model, section.lambda_max)?;
    writer.write_text("spectrum.csv", &output::spectrum_csv(&spec))?;
    Ok(())
}

fn run_trace(config: &RunConfig, threads: usize, writer: &mut RunWriter) -> Result<()> {
    let section = config
        .trace
        .as_ref()
        .ok_or_else(|| CliError::Config(String::from("trace: missing [trace] section")))?;
    section.validate()?;
    let model = config.model.build()?;
    let spec = cone_spectrum(&model, section.lambda_max)?;
    let grid = log_spaced_grid(section.t_min, section.t_max, section.points);
    let traces = parallel::heat_trace_grid_parallel(&spec, &grid, threads, None);
    writer.write_text("trace.csv", &output::trace_csv(&grid, &traces))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct BasisJson {
    power: f64,
    log: bool,
}

#[derive(Debug, Serialize)]
struct FitJson {
    basis: Vec<BasisJson>,
    coefficients: Vec<f64>,
    residual: f64,
    condition: f64,
    refused: bool,
}

#[derive(Debug, Serialize)]
struct ExtractJson {
    m: usize,
    lambda_max: f64,
    stored_modes: usize,
    t_min: f64,
    t_max: f64,
    points: usize,
    c_measured: f64,
    c_predicted: f64,
    rel_deviation: f64,
    b_fitted: f64,
    leading_fitted: f64,
    leading_predicted: f64,
    fit: FitJson,
}

impl ExtractJson {
    fn assemble(report: &ExtractReport, protocol: &ExtractProtocol, m: usize) -> Self {
        Self {
            m,
            lambda_max: report.lambda_max,
            stored_modes: report.stored_modes,
            t_min: protocol.t_min,
            t_max: protocol.t_max,
            points: protocol.points,
            c_measured: report.c_measured,
            c_predicted: report.c_predicted,
            rel_deviation: report.rel_deviation,
            b_fitted: report.b_fitted,
            leading_fitted: report.leading_fitted,
            leading_predicted: report.leading_predicted,
            fit: FitJson {
                basis: report
                    .fit
                    .basis
                    .elements()
                    .iter()
                    .map(|e| BasisJson { power: e.power_num as f64 / 2.0, log: e.with_log })
                    .collect(),
                coefficients: report.fit.coefficients.clone(),
                residual: report.fit.residual_norm,
                condition: report.fit.condition,
                refused: report.fit.refused,
            },
        }
    }
}

fn run_extract(config: &RunConfig, threads: usize, writer: &mut RunWriter) -> Result<()> {
    let section = config.extract_c.clone().unwrap_or_default();
    let model = config.model.build()?;
    let m = model.total_dim();
    section.validate(m)?;
    let protocol = ExtractProtocol {
        t_min: section.t_min,
        t_max: section.t_max,
        points: section.points,
        lambda_max: section.lambda_max,
        tail_rel_tol: section.tail_rel_tol,
    };
    let lambda_max = match protocol.lambda_max {
        Some(l) => l,
        None => auto_lambda_max(&model, &protocol)?,
    };
    let spec = cone_spectrum(&model, lambda_max)?;
    let grid = log_spaced_grid(protocol.t_min, protocol.t_max, protocol.points);
    let traces = parallel::heat_trace_grid_parallel(&spec, &grid, threads, None);
    let report = extract_c_from_traces(&model, &spec, &protocol, &traces)?;
    writer.write_json("extract_c.json", &ExtractJson::assemble(&report, &protocol, m))?;
    Ok(())
}
