//! Run description read from TOML.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fractional integrals and derivatives of an expression.
    Deriv,
    /// Boundary-modified jump generators applied to an expression.
    Apply,
    /// Exit statistics or occupation histograms by simulation.
    Simulate,
    /// Boundary value problems.
    Solve,
    /// Kernel hypotheses and boundary regularity probes.
    Check,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Deriv => "deriv",
            Command::Apply => "apply",
            Command::Simulate => "simulate",
            Command::Solve => "solve",
            Command::Check => "check",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the command given on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<String>,
    #[serde(default)]
    pub mollifier: MollifierName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apply: Option<ApplyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckConfig>,
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl RunConfig {
    /// Normalized TOML form; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn section<'a, S>(&'a self, s: &'a Option<S>, name: &str) -> Result<&'a S, CliError> {
        s.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MollifierName {
    #[default]
    Indicator,
    Cauchy,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpSide {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelClass {
    BoundedVariation,
    Compensated,
}

/// Named jump kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelConfig {
    StableOneSided {
        beta: f64,
        direction: JumpSide,
        #[serde(default = "one")]
        weight: f64,
    },
    StableSymmetric {
        beta: f64,
        #[serde(default = "one_usize")]
        dim: usize,
    },
    /// `a(x) / |y|^{d+1+β}`; `a` is an expression in `x` (or `x1, x2, x3`).
    StableLike {
        beta: f64,
        #[serde(default = "one_usize")]
        dim: usize,
        a: String,
        a_max: f64,
    },
    TemperedStable {
        beta: f64,
        theta: f64,
        c_neg: f64,
        c_pos: f64,
    },
    /// Mixed fractional derivative `-Σ ω D_{a+⋆} - Σ γ D_{b-⋆}`.
    Mixed { terms: Vec<MixedTermConfig> },
    /// Density `ν(x, y)` given as an expression in `x` and `y`, dominated by
    /// `majorant_coeff |y|^{-1-majorant_beta}`.
    Expression {
        density: String,
        class: KernelClass,
        majorant_beta: f64,
        majorant_coeff: f64,
        #[serde(default)]
        state_independent: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedTermConfig {
    pub weight: f64,
    pub beta: f64,
    pub side: SideName,
    /// Only used by `deriv`; the kernel ignores anchors.
    #[serde(default)]
    pub anchor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionConfig {
    Interval { a: f64, b: f64 },
    Checkpoints { points: Vec<f64> },
}

/// Either explicit points or `n` equally spaced points on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Points { points: Vec<f64> },
    Uniform { lo: f64, hi: f64, n: usize },
}

impl GridConfig {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridConfig::Points { points } if !points.is_empty() => Ok(points.clone()),
            GridConfig::Uniform { lo, hi, n } if *n >= 2 && lo < hi => {
                Ok((0..*n).map(|k| if k + 1 == *n { *hi } else { lo + (hi - lo) * k as f64 / (*n - 1) as f64 }).collect())
            }
            GridConfig::Uniform { n: 1, lo, .. } => Ok(vec![*lo]),
            _ => Err(CliError::Config("grid needs at least one point (or lo < hi)".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// Jump truncation radius `h`.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { paths: default_paths(), truncation: default_truncation(), t_max: default_t_max() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Integral,
    Derivative,
    Generator,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    Caputo,
    Rl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideName {
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    /// Expression in `x`.
    pub f: String,
    #[serde(default = "default_operation")]
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub anchor: f64,
    #[serde(default = "default_kind")]
    pub kind: KindName,
    #[serde(default = "default_side")]
    pub side: SideName,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<MixedTermConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorName {
    Interrupted,
    Checkpoint,
    Killed,
    /// Order-two interrupted operator with the boundary slopes subtracted.
    Regularized,
    Unregularized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyConfig {
    pub f: String,
    #[serde(default = "default_operator")]
    pub operator: OperatorName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Interrupted,
    Stopped,
    Killed,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Exit,
    Occupation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_quantity")]
    pub quantity: Quantity,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default)]
    pub lambda: f64,
    /// Occupation histograms only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Mc,
    Collocation,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    Interrupted,
    Killed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub f_a: f64,
    pub f_b: f64,
    /// Source term `g`, an expression in `x`.
    #[serde(default = "zero_expr")]
    pub source: String,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_boundary")]
    pub operator: BoundaryName,
    pub method: MethodName,
    /// Interior collocation nodes.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointName {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub states: States,
    pub radii: Vec<f64>,
    /// Also estimate mean exit times near this endpoint by simulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<EndpointName>,
}

/// Probe states: plain numbers on the line, or points in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum States {
    Line(Vec<f64>),
    Points(Vec<Vec<f64>>),
}

impl States {
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            States::Line(v) => v.iter().map(|&x| vec![x]).collect(),
            States::Points(p) => p.clone(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_paths() -> usize {
    10_000
}
fn default_truncation() -> f64 {
    1e-3
}
fn default_t_max() -> f64 {
    1e3
}
fn default_operation() -> Operation {
    Operation::Derivative
}
fn default_kind() -> KindName {
    KindName::Caputo
}
fn default_side() -> SideName {
    SideName::Right
}
fn default_operator() -> OperatorName {
    OperatorName::Interrupted
}
fn default_quantity() -> Quantity {
    Quantity::Exit
}
fn default_mode() -> ModeName {
    ModeName::Stopped
}
fn default_bins() -> usize {
    50
}
fn zero_expr() -> String {
    "0".into()
}
fn default_boundary() -> BoundaryName {
    BoundaryName::Interrupted
}
fn default_nodes() -> usize {
    64
}
