//! Job descriptions shared by the command line parser and `--config` files.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Subcommand, ValueEnum};
use hermrep::weights::WeightSequence;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// Weight sequence, given on the command line as a JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeqSpec {
    /// `M_p = p^{sp} (log p)^{tp}`.
    GevreyLog { s: f64, t: f64 },
    /// Explicit values `M_0 = 1, M_1, ...`.
    Table { values: Vec<f64> },
}

impl SeqSpec {
    pub fn build(&self) -> hermrep::Result<WeightSequence> {
        match self {
            SeqSpec::GevreyLog { s, t } => WeightSequence::gevrey_log(*s, *t),
            SeqSpec::Table { values } => WeightSequence::table(values.clone()),
        }
    }
}

impl Default for SeqSpec {
    fn default() -> Self {
        SeqSpec::GevreyLog { s: 0.5, t: 0.0 }
    }
}

impl FromStr for SeqSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| format!("invalid sequence JSON: {e}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    /// Certify (M.1), (M.2), (M.3)', (M.3)'' and (M.3)''' up to p_max.
    SeqCheck(SeqCheckArgs),
    /// Evaluate the associated function M(rho).
    Assoc(AssocArgs),
    /// Fourier-Hermite coefficients of a preset or of sampled data.
    Analyze(AnalyzeArgs),
    /// Evaluate a coefficient file as a function.
    Synth(SynthArgs),
    /// Decay/growth certificates and Gevrey index estimate.
    Classify(ClassifyArgs),
    /// Apply a coefficient-space operator.
    Transform(TransformArgs),
    /// Build an operator kernel matrix.
    Kernel(KernelArgs),
    /// Coefficient bounds of the oscillator expansion or the Hermite envelope.
    Bounds(BoundsArgs),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::SeqCheck(_) => "seq-check",
            Job::Assoc(_) => "assoc",
            Job::Analyze(_) => "analyze",
            Job::Synth(_) => "synth",
            Job::Classify(_) => "classify",
            Job::Transform(_) => "transform",
            Job::Kernel(_) => "kernel",
            Job::Bounds(_) => "bounds",
        }
    }

    pub fn input(&self) -> Option<&PathBuf> {
        match self {
            Job::Analyze(a) => a.input.as_ref(),
            Job::Synth(a) => Some(&a.input),
            Job::Classify(a) => Some(&a.input),
            Job::Transform(a) => Some(&a.input),
            _ => None,
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Job::SeqCheck(a) => a.out.as_ref(),
            Job::Assoc(a) => a.out.as_ref(),
            Job::Analyze(a) => Some(&a.out),
            Job::Synth(a) => Some(&a.out),
            Job::Classify(a) => a.out.as_ref(),
            Job::Transform(a) => Some(&a.out),
            Job::Kernel(a) => Some(&a.out),
            Job::Bounds(a) => a.out.as_ref(),
        }
    }
}

fn default_pmax() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct SeqCheckArgs {
    #[arg(long)]
    pub seq: SeqSpec,
    #[arg(long, default_value_t = default_pmax())]
    #[serde(default = "default_pmax")]
    pub pmax: usize,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct AssocArgs {
    #[arg(long)]
    pub seq: SeqSpec,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rho: Vec<f64>,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeArgs {
    /// `gaussian:A`, `hermite:N[,N...]` or `gaussian-poly:A:C0,C1,...`.
    #[arg(long, conflicts_with = "input")]
    #[serde(default)]
    pub preset: Option<String>,
    /// Samples `x1,...,xd,re,im` on a Gauss-Hermite tensor grid.
    #[arg(long = "in")]
    #[serde(default, rename = "in")]
    pub input: Option<PathBuf>,
    /// Coefficient box, one entry per axis.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    /// Quadrature order; defaults to `2*max(shape)+8` for presets and to the
    /// grid size for sampled input.
    #[arg(long)]
    #[serde(default)]
    pub order: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// Evaluate on the tensor grid of this quadrature order's nodes.
    #[arg(long, conflicts_with = "at")]
    #[serde(default)]
    pub nodes: Option<usize>,
    /// One-dimensional evaluation points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub at: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum QuantifierArg {
    Roumieu,
    Beurling,
}

fn default_noise_floor() -> f64 {
    hermrep::classify::NOISE_FLOOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub seq: SeqSpec,
    /// Scale grid; each value is used on every axis.
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    #[arg(long, value_enum)]
    pub mode: QuantifierArg,
    /// Treat the coefficients as a functional (growth bounds).
    #[arg(long)]
    #[serde(default)]
    pub dual: bool,
    /// Also estimate the Gevrey index (one-dimensional input only).
    #[arg(long)]
    #[serde(default)]
    pub estimate: bool,
    #[arg(long, default_value_t = default_noise_floor())]
    #[serde(default = "default_noise_floor")]
    pub noise_floor: f64,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TransformOp {
    Fourier,
    Raise,
    Lower,
    MulX,
    Diff,
    Oscillator,
}

fn default_power() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub op: TransformOp,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub axis: usize,
    /// Order N of the oscillator expansion.
    #[arg(long, default_value_t = default_power())]
    #[serde(default = "default_power")]
    pub power: usize,
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelOpArg {
    Identity,
    Fourier,
    MulX,
    Diff,
    Oscillator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub op: KernelOpArg,
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub axis: usize,
    #[arg(long, default_value_t = default_power())]
    #[serde(default = "default_power")]
    pub power: usize,
    /// Row scale of the growth certificate; requires `nu`.
    #[arg(long, requires = "nu")]
    #[serde(default)]
    pub theta: Option<f64>,
    /// Column scale of the growth certificate.
    #[arg(long, requires = "theta")]
    #[serde(default)]
    pub nu: Option<f64>,
    /// Sequence for the growth certificate (default gevrey s = 1/2).
    #[arg(long)]
    #[serde(default)]
    pub seq: Option<SeqSpec>,
    #[arg(long)]
    pub out: PathBuf,
}

fn default_lemma() -> u8 {
    2
}

fn default_order() -> usize {
    8
}

fn default_deriv() -> usize {
    4
}

fn default_nmax() -> usize {
    400
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    /// 2: oscillator expansion bounds for orders 1..=N. 1: Hermite envelope.
    #[arg(long, default_value_t = default_lemma(), value_parser = clap::value_parser!(u8).range(1..=2))]
    #[serde(default = "default_lemma")]
    pub lemma: u8,
    #[arg(long = "N", default_value_t = default_order())]
    #[serde(default = "default_order", rename = "N")]
    pub order: usize,
    /// Sequence for the weighted bound and the envelope (default gevrey s = 1/2).
    #[arg(long)]
    #[serde(default)]
    pub seq: Option<SeqSpec>,
    #[arg(long, default_value_t = default_deriv())]
    #[serde(default = "default_deriv")]
    pub alpha_max: usize,
    #[arg(long, default_value_t = default_deriv())]
    #[serde(default = "default_deriv")]
    pub beta_max: usize,
    #[arg(long, default_value_t = default_nmax())]
    #[serde(default = "default_nmax")]
    pub n_max: usize,
    /// Envelope scale; defaults to `1/(16 H L)` from the sequence certificates.
    #[arg(long)]
    #[serde(default)]
    pub m: Option<f64>,
    /// Also write the order-N expansion as `N,p,q,c`.
    #[arg(long)]
    #[serde(default)]
    pub expansion_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}
