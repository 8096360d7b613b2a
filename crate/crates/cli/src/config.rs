//! Experiment configuration: a TOML tree with closed-form function catalogs.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wave_lab_core::energy::GronwallTolerance;
use wave_lab_core::functions::{Profile, TimeFn};
use wave_lab_core::lifting::BoundaryData;
use wave_lab_core::singular::{default_eps_grid, geometric_eps_grid, DistributionSpec, FitThresholds, Mollifier, MollifierShape};
use wave_lab_core::spectral::{DEFAULT_ORDER, DEFAULT_PANELS};
use wave_lab_core::vws::{AltMollifiers, Datum, SourceSpec, VwsProblem};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    VerifyEnergy,
    LiftSolve,
    SweepExistence,
    SweepUniqueness,
    SweepConsistency,
    OracleCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::VerifyEnergy => "verify-energy",
            ExperimentKind::LiftSolve => "lift-solve",
            ExperimentKind::SweepExistence => "sweep-existence",
            ExperimentKind::SweepUniqueness => "sweep-uniqueness",
            ExperimentKind::SweepConsistency => "sweep-consistency",
            ExperimentKind::OracleCompare => "oracle-compare",
        }
    }
}

/// A config that parsed but does not describe a runnable experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub field: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field `{}`: {}", self.field, self.message)
    }
}

type Checked<T> = std::result::Result<T, SchemaError>;

fn finite(field: &str, v: f64) -> Checked<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SchemaError::new(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Checked<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(SchemaError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn one() -> f64 {
    1.0
}

/// Spatial profile catalog. `k` is a wavenumber in units of `pi / L`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    #[default]
    Zero,
    Const {
        value: f64,
    },
    /// `amplitude * sqrt(2/L) sin(k pi x / L)`, an orthonormal eigenfunction.
    Eigenmode {
        k: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude * sin(k pi x / L)`
    Sin {
        k: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude * cos(k pi x / L)`
    Cos {
        k: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Coefficients in increasing degree.
    Poly {
        coefficients: Vec<f64>,
    },
    /// `amplitude * x (L - x)`
    Bubble {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `left (1 - x/L) + right x/L`
    Ramp {
        left: f64,
        right: f64,
    },
    Dirac {
        location: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    Sum {
        terms: Vec<SpaceSpec>,
    },
}

impl SpaceSpec {
    pub fn to_distribution(&self, field: &str, length: f64) -> Checked<DistributionSpec> {
        let l = length;
        let smooth = |p: Profile| Ok(DistributionSpec::Smooth(p));
        match *self {
            SpaceSpec::Zero => smooth(Profile::zero()),
            SpaceSpec::Const { value } => smooth(Profile::constant(finite(&format!("{field}.value"), value)?)),
            SpaceSpec::Eigenmode { k, amplitude } => {
                if k == 0 {
                    return Err(SchemaError::new(format!("{field}.k"), "eigenmodes start at k = 1"));
                }
                let a = finite(&format!("{field}.amplitude"), amplitude)? * (2.0 / l).sqrt();
                smooth(Profile::new(move |x| a * (k as f64 * PI * x / l).sin()))
            }
            SpaceSpec::Sin { k, amplitude } => {
                let k = finite(&format!("{field}.k"), k)?;
                let a = finite(&format!("{field}.amplitude"), amplitude)?;
                smooth(Profile::new(move |x| a * (k * PI * x / l).sin()))
            }
            SpaceSpec::Cos { k, amplitude } => {
                let k = finite(&format!("{field}.k"), k)?;
                let a = finite(&format!("{field}.amplitude"), amplitude)?;
                smooth(Profile::new(move |x| a * (k * PI * x / l).cos()))
            }
            SpaceSpec::Poly { ref coefficients } => {
                for (i, &c) in coefficients.iter().enumerate() {
                    finite(&format!("{field}.coefficients[{i}]"), c)?;
                }
                let c = coefficients.clone();
                smooth(Profile::new(move |x| c.iter().rev().fold(0.0, |acc, &a| acc * x + a)))
            }
            SpaceSpec::Bubble { amplitude } => {
                let a = finite(&format!("{field}.amplitude"), amplitude)?;
                smooth(Profile::new(move |x| a * x * (l - x)))
            }
            SpaceSpec::Ramp { left, right } => {
                let a = finite(&format!("{field}.left"), left)?;
                let b = finite(&format!("{field}.right"), right)?;
                smooth(Profile::new(move |x| a * (1.0 - x / l) + b * x / l))
            }
            SpaceSpec::Dirac { location, weight } => {
                let x0 = finite(&format!("{field}.location"), location)?;
                let w = finite(&format!("{field}.weight"), weight)?;
                if !(x0 > 0.0 && x0 < l) {
                    return Err(SchemaError::new(
                        format!("{field}.location"),
                        format!("must lie strictly inside (0, {l}), got {x0}"),
                    ));
                }
                Ok(DistributionSpec::dirac(x0, w))
            }
            SpaceSpec::Sum { ref terms } => terms
                .iter()
                .enumerate()
                .map(|(i, t)| t.to_distribution(&format!("{field}.terms[{i}]"), length))
                .collect::<Checked<Vec<_>>>()
                .map(DistributionSpec::Sum),
        }
    }
}

/// Time function catalog.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeSpec {
    #[default]
    Zero,
    Const {
        value: f64,
    },
    /// `amplitude * sin(omega t + phase)`
    Sin {
        omega: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude * cos(omega t)`
    Cos {
        omega: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Poly {
        coefficients: Vec<f64>,
    },
}

impl TimeSpec {
    pub fn to_time_fn(&self, field: &str) -> Checked<TimeFn> {
        let f = |name: &str, v: f64| finite(&format!("{field}.{name}"), v);
        Ok(match *self {
            TimeSpec::Zero => TimeFn::Zero,
            TimeSpec::Const { value } => TimeFn::Const(f("value", value)?),
            TimeSpec::Sin { omega, amplitude, phase } => TimeFn::Sin {
                amplitude: f("amplitude", amplitude)?,
                omega: f("omega", omega)?,
                phase: f("phase", phase)?,
            },
            TimeSpec::Cos { omega, amplitude } => TimeFn::Sin {
                amplitude: f("amplitude", amplitude)?,
                omega: f("omega", omega)?,
                phase: std::f64::consts::FRAC_PI_2,
            },
            TimeSpec::Poly { ref coefficients } => {
                for (i, &c) in coefficients.iter().enumerate() {
                    f(&format!("coefficients[{i}]"), c)?;
                }
                TimeFn::Poly(coefficients.clone())
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub length: f64,
    pub final_time: f64,
    pub dt: f64,
    pub modes: usize,
    #[serde(default = "default_panels")]
    pub quad_panels: usize,
    #[serde(default = "default_order")]
    pub quad_order: usize,
}

fn default_panels() -> usize {
    DEFAULT_PANELS
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceTermConfig {
    pub time: TimeSpec,
    pub space: SpaceSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub g0: TimeSpec,
    #[serde(default)]
    pub g1: TimeSpec,
}

/// Datum names accepted by `mollify` lists.
pub const DATUM_NAMES: [&str; 4] = ["potential", "u0", "u1", "source"];

/// Per-datum mollifier choice; unset entries fall back to `mollifier`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierChoice {
    pub potential: Option<MollifierShape>,
    pub u0: Option<MollifierShape>,
    pub u1: Option<MollifierShape>,
    pub source: Option<MollifierShape>,
}

/// Regularization for single-parameter runs (solve, verify-energy,
/// lift-solve, oracle-compare).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationConfig {
    pub eps: f64,
    #[serde(default = "default_shape")]
    pub mollifier: MollifierShape,
    #[serde(default)]
    pub per_datum: MollifierChoice,
    /// Smooth data to mollify as well; point masses always are.
    #[serde(default)]
    pub mollify: Vec<String>,
}

fn default_shape() -> MollifierShape {
    MollifierShape::StandardBump
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceExpectation {
    /// Moderate growth in the sense of the fit (the default verdict).
    #[default]
    Moderate,
    /// Fitted exponent at most `bounded_exponent`.
    Bounded,
    /// Exponent in `(0, max_exponent]` with `R^2 >= min_r_squared`.
    Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit grid; overrides the exponent range.
    pub eps: Option<Vec<f64>>,
    #[serde(default = "first_exponent")]
    pub first_exponent: i32,
    #[serde(default = "last_exponent")]
    pub last_exponent: i32,
    #[serde(default = "default_shape")]
    pub mollifier: MollifierShape,
    #[serde(default)]
    pub per_datum: MollifierChoice,
    #[serde(default)]
    pub mollify: Vec<String>,
    /// Second regularization for the uniqueness experiment.
    #[serde(default)]
    pub alternative: MollifierChoice,
    #[serde(default = "min_r_squared")]
    pub min_r_squared: f64,
    #[serde(default = "bounded_exponent")]
    pub bounded_exponent: f64,
    #[serde(default)]
    pub expect: ExistenceExpectation,
    #[serde(default = "max_exponent")]
    pub max_exponent: f64,
    /// Uniqueness and consistency: required decay slope (default: positive).
    pub min_slope: Option<f64>,
    /// Consistency: bound on the difference at the smallest eps.
    pub max_terminal: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        toml::from_str("").expect("all sweep fields have defaults")
    }
}

fn first_exponent() -> i32 {
    3
}

fn last_exponent() -> i32 {
    10
}

fn min_r_squared() -> f64 {
    FitThresholds::default().min_r_squared
}

fn bounded_exponent() -> f64 {
    FitThresholds::default().bounded_exponent
}

fn max_exponent() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    #[serde(default = "gronwall_relative")]
    pub relative: f64,
    #[serde(default = "gronwall_absolute")]
    pub absolute: f64,
    #[serde(default = "gronwall_drift")]
    pub drift: f64,
    /// Regression bound on the estimate ratio.
    pub ratio_envelope: Option<f64>,
    #[serde(default = "v_tolerance")]
    pub v_tolerance: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        toml::from_str("").expect("all energy fields have defaults")
    }
}

impl EnergyConfig {
    pub fn tolerance(&self) -> GronwallTolerance {
        GronwallTolerance {
            relative: self.relative,
            absolute: self.absolute,
            drift: self.drift,
        }
    }
}

fn gronwall_relative() -> f64 {
    GronwallTolerance::default().relative
}

fn gronwall_absolute() -> f64 {
    GronwallTolerance::default().absolute
}

fn gronwall_drift() -> f64 {
    GronwallTolerance::default().drift
}

fn v_tolerance() -> f64 {
    5e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    #[serde(default = "trace_tolerance")]
    pub trace_tolerance: f64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self {
            trace_tolerance: trace_tolerance(),
        }
    }
}

fn trace_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub nx: usize,
    /// Defaults to the Galerkin step.
    pub dt: Option<f64>,
    /// Defaults to the final time only.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default = "oracle_tolerance")]
    pub tolerance: f64,
}

fn oracle_tolerance() -> f64 {
    1e-3
}

/// Replaces the problem data by seeded random smooth cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub constant_potential: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: Option<String>,
    pub experiment: Option<ExperimentKind>,
    pub domain: DomainConfig,
    #[serde(default)]
    pub potential: SpaceSpec,
    #[serde(default)]
    pub u0: SpaceSpec,
    #[serde(default)]
    pub u1: SpaceSpec,
    #[serde(default)]
    pub source: Vec<SourceTermConfig>,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    pub regularization: Option<RegularizationConfig>,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default)]
    pub lift: LiftConfig,
    pub oracle: Option<OracleConfig>,
    pub corpus: Option<CorpusConfig>,
}

/// Either a TOML syntax/type error (with line and column) or a semantic one.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(toml::de::Error),
    Schema(SchemaError),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "{e}"),
            ConfigError::Schema(e) => write!(f, "{e}"),
        }
    }
}

impl From<SchemaError> for ConfigError {
    fn from(e: SchemaError) -> Self {
        ConfigError::Schema(e)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(ConfigError::Parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Checked<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SchemaError::new(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(SchemaError::new("name", "must be a plain file stem"));
            }
        }
        let d = &self.domain;
        positive("domain.length", d.length)?;
        positive("domain.final_time", d.final_time)?;
        positive("domain.dt", d.dt)?;
        if d.modes == 0 {
            return Err(SchemaError::new("domain.modes", "need at least one mode"));
        }
        if d.quad_panels == 0 || d.quad_order == 0 {
            return Err(SchemaError::new("domain.quad_panels", "quadrature needs panels and points"));
        }
        let potential = self.potential.to_distribution("potential", d.length)?;
        if let Some((x, w)) = potential.diracs().into_iter().find(|&(_, w)| w < 0.0) {
            return Err(SchemaError::new(
                "potential.weight",
                format!("point mass at {x} has negative weight {w}"),
            ));
        }
        self.u0.to_distribution("u0", d.length)?;
        self.u1.to_distribution("u1", d.length)?;
        for (i, term) in self.source.iter().enumerate() {
            term.time.to_time_fn(&format!("source[{i}].time"))?;
            term.space.to_distribution(&format!("source[{i}].space"), d.length)?;
        }
        self.boundary.g0.to_time_fn("boundary.g0")?;
        self.boundary.g1.to_time_fn("boundary.g1")?;
        if let Some(r) = &self.regularization {
            positive("regularization.eps", r.eps)?;
            if r.eps > 1.0 {
                return Err(SchemaError::new("regularization.eps", "must lie in (0, 1]"));
            }
            check_names("regularization.mollify", &r.mollify)?;
        }
        if let Some(s) = &self.sweep {
            check_names("sweep.mollify", &s.mollify)?;
            if let Some(grid) = &s.eps {
                for (i, &e) in grid.iter().enumerate() {
                    positive(&format!("sweep.eps[{i}]"), e)?;
                }
            } else if s.first_exponent >= s.last_exponent {
                return Err(SchemaError::new("sweep.last_exponent", "must exceed first_exponent"));
            }
            finite("sweep.min_r_squared", s.min_r_squared)?;
            finite("sweep.bounded_exponent", s.bounded_exponent)?;
            finite("sweep.max_exponent", s.max_exponent)?;
        }
        let e = &self.energy;
        for (k, v) in [("relative", e.relative), ("absolute", e.absolute), ("drift", e.drift)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SchemaError::new(format!("energy.{k}"), "must be nonnegative and finite"));
            }
        }
        positive("energy.v_tolerance", e.v_tolerance)?;
        if let Some(r) = e.ratio_envelope {
            positive("energy.ratio_envelope", r)?;
        }
        positive("lift.trace_tolerance", self.lift.trace_tolerance)?;
        if let Some(o) = &self.oracle {
            if o.nx < 8 {
                return Err(SchemaError::new("oracle.nx", "need at least 8 interior nodes"));
            }
            if let Some(dt) = o.dt {
                positive("oracle.dt", dt)?;
            }
            for (i, &t) in o.checkpoints.iter().enumerate() {
                let t = finite(&format!("oracle.checkpoints[{i}]"), t)?;
                if !(0.0..=d.final_time).contains(&t) {
                    return Err(SchemaError::new(format!("oracle.checkpoints[{i}]"), "must lie in [0, final_time]"));
                }
            }
            positive("oracle.tolerance", o.tolerance)?;
        }
        if let Some(c) = &self.corpus {
            if c.count == 0 {
                return Err(SchemaError::new("corpus.count", "must be positive"));
            }
            if let Some(v) = c.constant_potential {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(SchemaError::new("corpus.constant_potential", "must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Checks that the config may run as `kind`.
    pub fn check_kind(&self, kind: ExperimentKind) -> Checked<()> {
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(SchemaError::new(
                    "experiment",
                    format!("config is for `{}`, not `{}`", k.name(), kind.name()),
                ));
            }
        }
        if self.corpus.is_some() && !matches!(kind, ExperimentKind::VerifyEnergy | ExperimentKind::OracleCompare) {
            return Err(SchemaError::new("corpus", "only verify-energy and oracle-compare run on a corpus"));
        }
        if kind == ExperimentKind::OracleCompare && self.oracle.is_none() {
            return Err(SchemaError::new("oracle", "oracle-compare needs an [oracle] table"));
        }
        Ok(())
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        match &self.sweep {
            Some(SweepConfig { eps: Some(grid), .. }) => grid.clone(),
            Some(s) => geometric_eps_grid(s.first_exponent, s.last_exponent),
            None => default_eps_grid(),
        }
    }

    pub fn boundary_data(&self) -> Checked<BoundaryData> {
        Ok(BoundaryData::new(
            self.boundary.g0.to_time_fn("boundary.g0")?,
            self.boundary.g1.to_time_fn("boundary.g1")?,
        ))
    }

    /// The problem with mollifiers attached per `sweep` or `regularization`.
    pub fn problem(&self) -> Checked<VwsProblem> {
        let d = &self.domain;
        let mut p = VwsProblem::new(d.length, d.final_time, d.dt, d.modes, self.eps_grid());
        p.quad_panels = d.quad_panels;
        p.quad_order = d.quad_order;
        let (default, per, mollify) = match (&self.sweep, &self.regularization) {
            (Some(s), _) => (s.mollifier, s.per_datum.clone(), s.mollify.clone()),
            (None, Some(r)) => (r.mollifier, r.per_datum.clone(), r.mollify.clone()),
            (None, None) => (default_shape(), MollifierChoice::default(), Vec::new()),
        };
        let pick = |name: &str, spec: &DistributionSpec, choice: Option<MollifierShape>| {
            let wanted = spec.is_singular() || mollify.iter().any(|m| m == name);
            wanted.then(|| Mollifier::new(choice.unwrap_or(default)))
        };
        let datum = |name: &str, spec: &SpaceSpec, choice| -> Checked<Datum> {
            let spec = spec.to_distribution(name, d.length)?;
            let mollifier = pick(name, &spec, choice);
            Ok(Datum { spec, mollifier })
        };
        p.potential = datum("potential", &self.potential, per.potential)?;
        p.u0 = datum("u0", &self.u0, per.u0)?;
        p.u1 = datum("u1", &self.u1, per.u1)?;
        let terms = self
            .source
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok((
                    t.time.to_time_fn(&format!("source[{i}].time"))?,
                    t.space.to_distribution(&format!("source[{i}].space"), d.length)?,
                ))
            })
            .collect::<Checked<Vec<_>>>()?;
        let singular_source = terms.iter().any(|(_, s)| s.is_singular());
        p.source = SourceSpec {
            terms,
            mollifier: (singular_source || mollify.iter().any(|m| m == "source"))
                .then(|| Mollifier::new(per.source.unwrap_or(default))),
        };
        p.boundary = self.boundary_data()?;
        if let Some(s) = &self.sweep {
            p.thresholds = FitThresholds {
                min_r_squared: s.min_r_squared,
                bounded_exponent: s.bounded_exponent,
            };
        }
        Ok(p)
    }

    pub fn alternative_mollifiers(&self) -> AltMollifiers {
        let alt = self.sweep.as_ref().map(|s| s.alternative.clone()).unwrap_or_default();
        AltMollifiers {
            potential: alt.potential.map(Mollifier::new),
            u0: alt.u0.map(Mollifier::new),
            u1: alt.u1.map(Mollifier::new),
            source: alt.source.map(Mollifier::new),
        }
    }

    /// The eps for single-parameter runs; `None` when nothing is regularized.
    pub fn single_eps(&self) -> Option<f64> {
        self.regularization.as_ref().map(|r| r.eps)
    }
}

fn check_names(field: &str, names: &[String]) -> Checked<()> {
    for (i, n) in names.iter().enumerate() {
        if !DATUM_NAMES.contains(&n.as_str()) {
            return Err(SchemaError::new(
                format!("{field}[{i}]"),
                format!("unknown datum `{n}`; expected one of {}", DATUM_NAMES.join(", ")),
            ));
        }
    }
    Ok(())
}
