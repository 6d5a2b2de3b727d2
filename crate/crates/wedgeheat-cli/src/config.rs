//! Run configurations.
//!
//! One TOML file drives a run: a `[model]` section shared by every
//! subcommand plus one optional section per subcommand carrying its
//! parameters. Unknown keys are rejected, and validation failures name the
//! offending key path, so a typo never turns into a silent default.

use std::path::Path;

use serde::Deserialize;
use wedgeheat_core::fiber::FiberModel;
use wedgeheat_core::heat::ScalarConvention;
use wedgeheat_core::wedge::WedgeModel;

use crate::{CliError, Result};

/// Default seed for test-point sampling when neither the config nor the
/// command line provides one.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Top-level run configuration: the model, optional per-command sections,
/// and run-wide settings.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// The wedge model every subcommand operates on.
    pub model: ModelConfig,
    /// Seed for test-point sampling; overridden by `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output settings; overridden by `--out` and `WEDGEHEAT_OUT`.
    #[serde(default)]
    pub output: OutputConfig,
    /// Parameters of the `curvature` subcommand.
    #[serde(default)]
    pub curvature: Option<CurvatureConfig>,
    /// Parameters of the `invariants` subcommand.
    #[serde(default)]
    pub invariants: Option<InvariantsConfig>,
    /// Parameters of the `coefficient` subcommand.
    #[serde(default)]
    pub coefficient: Option<CoefficientConfig>,
    /// Parameters of the `expansion` subcommand.
    #[serde(default)]
    pub expansion: Option<ExpansionConfig>,
    /// Parameters of the `spectrum` subcommand.
    #[serde(default)]
    pub spectrum: Option<SpectrumConfig>,
    /// Parameters of the `trace` subcommand.
    #[serde(default)]
    pub trace: Option<TraceConfig>,
    /// Parameters of the `extract-c` subcommand.
    #[serde(default, rename = "extract-c")]
    pub extract_c: Option<ExtractConfig>,
}

/// The `[model]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Total dimension; optional, checked against the fiber dimension
    /// (`m = dim F + 2`) when present.
    #[serde(default)]
    pub m: Option<usize>,
    /// Circumference of the singular circle; defaults to `2 pi`.
    #[serde(default)]
    pub sigma_length: Option<f64>,
    /// The `[model.fiber]` subsection.
    pub fiber: FiberConfig,
}

/// The `[model.fiber]` subsection. `kind` selects the preset; each preset
/// reads its own parameter keys and rejects the others.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    /// One of `round-sphere`, `circle`, `flat-torus`.
    pub kind: String,
    /// Sphere dimension (`round-sphere` only).
    #[serde(default)]
    pub dim: Option<usize>,
    /// Sphere radius (`round-sphere` only).
    #[serde(default)]
    pub radius: Option<f64>,
    /// Circle circumference (`circle` only).
    #[serde(default)]
    pub length: Option<f64>,
    /// Torus side lengths (`flat-torus` only).
    #[serde(default)]
    pub sides: Option<Vec<f64>>,
}

/// The `[output]` section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; lowest-precedence source (below `--out` and
    /// `WEDGEHEAT_OUT`).
    #[serde(default)]
    pub dir: Option<String>,
}

/// The `[curvature]` section: closed forms versus the direct jet path at
/// seeded random points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvatureConfig {
    /// Number of random wedge points to check.
    pub points: usize,
    /// Relative tolerance for matching components.
    pub tol: f64,
    /// Absolute tolerance for components that must vanish.
    pub mixed_tol: f64,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self { points: 50, tol: 1e-8, mixed_tol: 1e-9 }
    }
}

/// The `[invariants]` section: where and how to evaluate the pointwise
/// heat invariants and the resolvent coefficients.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvariantsConfig {
    /// Radial coordinate of the evaluation point.
    pub r: f64,
    /// Circle coordinate of the evaluation point.
    pub theta: f64,
    /// Fiber coordinates; defaults to a chart-interior point.
    pub fiber_point: Option<Vec<f64>>,
    /// `scaled` (`u_1 = Scal/6`) or `literal` (`u_1 = Scal`).
    pub convention: String,
    /// Resolvent power for the coefficient table; defaults to the smallest
    /// trace-class value `floor(m/2) + 1`.
    pub d: Option<u32>,
}

impl Default for InvariantsConfig {
    fn default() -> Self {
        Self { r: 0.5, theta: 0.0, fiber_point: None, convention: String::from("scaled"), d: None }
    }
}

/// The `[coefficient]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientConfig {
    /// Tolerance of the spherical-space-form verdict.
    pub space_form_tol: f64,
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        Self { space_form_tol: 1e-10 }
    }
}

/// The `[expansion]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansionConfig {
    /// Resolvent power; defaults to the smallest trace-class value.
    pub d: Option<u32>,
    /// Highest invariant order to include.
    pub j_max: u32,
    /// `scaled` or `literal`.
    pub convention: String,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self { d: None, j_max: 2, convention: String::from("scaled") }
    }
}

/// The `[spectrum]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Enumerate all eigenvalues up to this bound.
    pub lambda_max: f64,
}

/// The `[trace]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    /// Enumerate all eigenvalues up to this bound.
    pub lambda_max: f64,
    /// Smallest heat time of the grid.
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    /// Largest heat time of the grid.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Number of log-spaced grid points.
    #[serde(default = "default_points")]
    pub points: usize,
}

/// The `[extract-c]` section; defaults mirror the library protocol.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    /// Smallest heat time of the grid.
    pub t_min: f64,
    /// Largest heat time of the grid.
    pub t_max: f64,
    /// Number of log-spaced grid points.
    pub points: usize,
    /// Enumeration bound; omitted, the automatic tail rule chooses one.
    pub lambda_max: Option<f64>,
    /// Relative tail tolerance for the automatic bound.
    pub tail_rel_tol: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { t_min: 5e-3, t_max: 5e-1, points: 60, lambda_max: None, tail_rel_tol: 1e-9 }
    }
}

fn default_t_min() -> f64 {
    5e-3
}

fn default_t_max() -> f64 {
    5e-1
}

fn default_points() -> usize {
    60
}

/// Read and parse a configuration file.
pub fn load(path: &Path) -> Result<(RunConfig, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config = parse(&text)?;
    Ok((config, text))
}

/// Parse configuration text. TOML and schema errors (unknown keys, wrong
/// types, missing required keys) are reported with the parser's context,
/// which quotes the offending line.
pub fn parse(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Config(flatten_toml_error(&e)))?;
    config.model.validate()?;
    Ok(config)
}

fn flatten_toml_error(e: &toml::de::Error) -> String {
    let rendered = e.to_string();
    let parts: Vec<&str> =
        rendered.lines().map(str::trim).filter(|line| !line.is_empty()).collect();
    parts.join(" | ")
}

fn bad(key: &str, problem: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {problem}"))
}

/// Require a strictly positive, finite value.
pub fn require_positive(value: f64, key: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(bad(key, "must be positive and finite"))
    }
}

impl ModelConfig {
    fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        if let Some(m) = self.m {
            let expected = self.fiber.dim()? + 2;
            if m != expected {
                return Err(bad(
                    "model.m",
                    format!("inconsistent with the fiber (its dimension gives m = {expected})"),
                ));
            }
        }
        if let Some(sigma) = self.sigma_length {
            require_positive(sigma, "model.sigma_length")?;
        }
        Ok(())
    }

    /// Construct the configured wedge model.
    pub fn build(&self) -> Result<WedgeModel> {
        self.validate()?;
        let fiber = self.fiber.build()?;
        match self.sigma_length {
            Some(sigma) => WedgeModel::with_sigma_length(fiber, sigma)
                .map_err(|e| bad("model.sigma_length", e)),
            None => Ok(WedgeModel::new(fiber)),
        }
    }
}

impl FiberConfig {
    fn validate(&self) -> Result<()> {
        match self.kind.as_str() {
            "round-sphere" => {
                self.forbid(self.length.is_some(), "model.fiber.length")?;
                self.forbid(self.sides.is_some(), "model.fiber.sides")?;
                let dim = self.require(self.dim, "model.fiber.dim")?;
                if dim == 0 {
                    return Err(bad("model.fiber.dim", "must be at least 1"));
                }
                let radius = self.require(self.radius, "model.fiber.radius")?;
                require_positive(radius, "model.fiber.radius")?;
            }
            "circle" => {
                self.forbid(self.dim.is_some(), "model.fiber.dim")?;
                self.forbid(self.radius.is_some(), "model.fiber.radius")?;
                self.forbid(self.sides.is_some(), "model.fiber.sides")?;
                let length = self.require(self.length, "model.fiber.length")?;
                require_positive(length, "model.fiber.length")?;
            }
            "flat-torus" => {
                self.forbid(self.dim.is_some(), "model.fiber.dim")?;
                self.forbid(self.radius.is_some(), "model.fiber.radius")?;
                self.forbid(self.length.is_some(), "model.fiber.length")?;
                let sides = self.require(self.sides.clone(), "model.fiber.sides")?;
                if sides.is_empty() {
                    return Err(bad("model.fiber.sides", "must not be empty"));
                }
                for (i, &s) in sides.iter().enumerate() {
                    require_positive(s, &format!("model.fiber.sides[{i}]"))?;
                }
            }
            other => {
                return Err(bad(
                    "model.fiber.kind",
                    format!(
                        "unknown kind `{other}` (expected round-sphere, circle, or flat-torus)"
                    ),
                ));
            }
        }
        Ok(())
    }

    fn require<T>(&self, value: Option<T>, key: &str) -> Result<T> {
        value.ok_or_else(|| bad(key, format!("required for kind `{}`", self.kind)))
    }

    fn forbid(&self, present: bool, key: &str) -> Result<()> {
        if present {
            Err(bad(key, format!("not a parameter of kind `{}`", self.kind)))
        } else {
            Ok(())
        }
    }

    fn dim(&self) -> Result<usize> {
        match self.kind.as_str() {
            "round-sphere" => self.require(self.dim, "model.fiber.dim"),
            "circle" => Ok(1),
            "flat-torus" => Ok(self.require(self.sides.clone(), "model.fiber.sides")?.len()),
            other => Err(bad("model.fiber.kind", format!("unknown kind `{other}`"))),
        }
    }

    fn build(&self) -> Result<FiberModel> {
        let lift = |e| bad("model.fiber", e);
        match self.kind.as_str() {
            "round-sphere" => {
                FiberModel::round_sphere(self.dim.unwrap_or(0), self.radius.unwrap_or(0.0))
                    .map_err(lift)
            }
            "circle" => FiberModel::circle(self.length.unwrap_or(0.0)).map_err(lift),
            "flat-torus" => {
                FiberModel::flat_torus(self.sides.clone().unwrap_or_default()).map_err(lift)
            }
            other => Err(bad("model.fiber.kind", format!("unknown kind `{other}`"))),
        }
    }
}

/// Parse a scalar-invariant convention name.
pub fn parse_convention(name: &str, key: &str) -> Result<ScalarConvention> {
    match name {
        "scaled" => Ok(ScalarConvention::ScaledBySixth),
        "literal" => Ok(ScalarConvention::Literal),
        other => Err(bad(key, format!("unknown convention `{other}` (expected scaled or literal)"))),
    }
}

impl CurvatureConfig {
    /// Validate against the schema, naming the failing key.
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(bad("curvature.points", "must be at least 1"));
        }
        require_positive(self.tol, "curvature.tol")?;
        require_positive(self.mixed_tol, "curvature.mixed_tol")?;
        Ok(())
    }
}

impl InvariantsConfig {
    /// Validate against the schema for a model of dimension `m`.
    pub fn validate(&self, m: usize, fiber_dim: usize) -> Result<()> {
        require_positive(self.r, "invariants.r")?;
        if !self.theta.is_finite() {
            return Err(bad("invariants.theta", "must be finite"));
        }
        if let Some(x) = &self.fiber_point {
            if x.len() != fiber_dim {
                return Err(bad(
                    "invariants.fiber_point",
                    format!("expected {fiber_dim} coordinates, got {}", x.len()),
                ));
            }
        }
        parse_convention(&self.convention, "invariants.convention")?;
        if let Some(d) = self.d {
            if 2 * d as usize <= m {
                return Err(bad(
                    "invariants.d",
                    format!("trace class requires d > m/2 (m = {m})"),
                ));
            }
        }
        Ok(())
    }
}

impl CoefficientConfig {
    /// Validate against the schema, naming the failing key.
    pub fn validate(&self) -> Result<()> {
        require_positive(self.space_form_tol, "coefficient.space_form_tol")?;
        Ok(())
    }
}

impl ExpansionConfig {
    /// Validate against the schema for a model of dimension `m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        if let Some(d) = self.d {
            if 2 * d as usize <= m {
                return Err(bad("expansion.d", format!("trace class requires d > m/2 (m = {m})")));
            }
        }
        if self.j_max > 2 {
            return Err(bad("expansion.j_max", "only orders up to 2 are implemented"));
        }
        parse_convention(&self.convention, "expansion.convention")?;
        Ok(())
    }
}

impl SpectrumConfig {
    /// Validate against the schema, naming the failing key.
    pub fn validate(&self) -> Result<()> {
        require_positive(self.lambda_max, "spectrum.lambda_max")?;
        Ok(())
    }
}

impl TraceConfig {
    /// Validate against the schema, naming the failing key.
    pub fn validate(&self) -> Result<()> {
        require_positive(self.lambda_max, "trace.lambda_max")?;
        require_positive(self.t_min, "trace.t_min")?;
        require_positive(self.t_max, "trace.t_max")?;
        if self.t_max <= self.t_min {
            return Err(bad("trace.t_max", "must exceed trace.t_min"));
        }
        if self.points < 2 {
            return Err(bad("trace.points", "must be at least 2"));
        }
        Ok(())
    }
}

impl ExtractConfig {
    /// Validate against the schema for a model of dimension `m` (the fit
    /// basis has `m + 3` elements and needs twice as many samples).
    pub fn validate(&self, m: usize) -> Result<()> {
        require_positive(self.t_min, "extract-c.t_min")?;
        require_positive(self.t_max, "extract-c.t_max")?;
        if self.t_max <= self.t_min {
            return Err(bad("extract-c.t_max", "must exceed extract-c.t_min"));
        }
        let needed = 2 * (m + 3);
        if self.points < needed {
            return Err(bad(
                "extract-c.points",
                format!("need at least {needed} points for the m = {m} basis"),
            ));
        }
        if let Some(l) = self.lambda_max {
            require_positive(l, "extract-c.lambda_max")?;
        }
        require_positive(self.tail_rel_tol, "extract-c.tail_rel_tol")?;
        Ok(())
    }
}
