use std::path::PathBuf;

use ldis_core::laplace_lab::{EventSpec, FunctionalSpec, LaplaceMethod};
use ldis_core::prob_models::{FiniteDistribution, ImportanceFunction, ImportanceModel, ScalarDistribution};
use ldis_core::subset_analysis::IncrementLaw;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawConfig {
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Bernoulli { p: f64 },
    Finite { points: Vec<f64>, probs: Vec<f64> },
}

impl LawConfig {
    pub fn build(&self) -> ldis_core::Result<ScalarDistribution> {
        match self {
            LawConfig::Gaussian { mean, sd } => ScalarDistribution::gaussian(*mean, *sd),
            LawConfig::Exponential { rate } => ScalarDistribution::exponential(*rate),
            LawConfig::Bernoulli { p } => ScalarDistribution::bernoulli(*p),
            LawConfig::Finite { points, probs } => Ok(ScalarDistribution::finite(FiniteDistribution::new(points.clone(), probs.clone())?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    pub mean: f64,
    pub sd: f64,
}

fn everywhere() -> ImportanceFunction {
    ImportanceFunction::Everywhere
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    StandardMc {
        target: LawConfig,
        #[serde(default = "everywhere")]
        importance: ImportanceFunction,
    },
    GaussianTilt {
        mean: f64,
        sd: f64,
        theta: f64,
        #[serde(default = "everywhere")]
        importance: ImportanceFunction,
    },
    GaussianPair {
        target: GaussianParams,
        proposal: GaussianParams,
        #[serde(default = "everywhere")]
        importance: ImportanceFunction,
    },
    ExponentialPair {
        target_rate: f64,
        proposal_rate: f64,
        #[serde(default = "everywhere")]
        importance: ImportanceFunction,
    },
    ZeroVariance {
        target: LawConfig,
        importance: ImportanceFunction,
    },
    /// Finite alphabet; `ratio` supplies `dF/dF̃` explicitly (checked against the laws).
    Finite {
        points: Vec<f64>,
        target: Vec<f64>,
        proposal: Vec<f64>,
        #[serde(default = "everywhere")]
        importance: ImportanceFunction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ratio: Option<Vec<f64>>,
    },
}

impl ModelConfig {
    pub fn build(&self) -> Result<ImportanceModel, CliError> {
        let at = |e| CliError::core("model", e);
        match self {
            ModelConfig::StandardMc { target, importance } => {
                Ok(ImportanceModel::standard_mc(target.build().map_err(at)?, importance.clone()))
            }
            ModelConfig::GaussianTilt { mean, sd, theta, importance } => {
                ImportanceModel::gaussian_tilt(*mean, *sd, *theta, importance.clone()).map_err(at)
            }
            ModelConfig::GaussianPair { target, proposal, importance } => {
                ImportanceModel::gaussian_pair((target.mean, target.sd), (proposal.mean, proposal.sd), importance.clone()).map_err(at)
            }
            ModelConfig::ExponentialPair { target_rate, proposal_rate, importance } => {
                ImportanceModel::exponential_pair(*target_rate, *proposal_rate, importance.clone()).map_err(at)
            }
            ModelConfig::ZeroVariance { target, importance } => {
                ImportanceModel::zero_variance(target.build().map_err(at)?, importance.clone()).map_err(at)
            }
            ModelConfig::Finite { points, target, proposal, importance, ratio } => {
                let f = FiniteDistribution::new(points.clone(), target.clone()).map_err(|e| CliError::core("model.target", e))?;
                let g = FiniteDistribution::new(points.clone(), proposal.clone()).map_err(|e| CliError::core("model.proposal", e))?;
                match ratio {
                    Some(r) => ImportanceModel::user_table(f, g, importance.clone(), r.clone()).map_err(|e| CliError::core("model.ratio", e)),
                    None => ImportanceModel::finite(f, g, importance.clone()).map_err(at),
                }
            }
        }
    }
}

/// A scalar or a list in the config; always a list once parsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "OneOrMany<T>")]
pub struct Values<T>(pub Vec<T>);

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Values<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => Values(vec![x]),
            OneOrMany::Many(xs) => Values(xs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideChoice {
    Plus,
    Minus,
    Both,
}

fn default_error_prob() -> f64 {
    0.01
}

fn default_cost() -> f64 {
    1.0
}

fn default_method() -> LaplaceMethod {
    LaplaceMethod::Dp
}

fn default_side() -> SideChoice {
    SideChoice::Plus
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisSpec {
    /// Give exactly one of `delta` (absolute) or `delta_prime` (fraction of `F(A)`).
    Subset {
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<Values<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_prime: Option<Values<f64>>,
        #[serde(default = "default_error_prob")]
        error_prob: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cost_factor: Option<f64>,
    },
    RandomWalk {
        law: IncrementLaw,
        a: Values<f64>,
        m: Values<u32>,
        eps: f64,
        delta_prime: f64,
        #[serde(default = "default_cost")]
        cost_factor: f64,
    },
    /// Give exactly one of `eps` or `tail`, the target tail mass `F((q, ∞))` at `q = (1+ε)Φ_α(F)`.
    Quantile {
        alpha: Values<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<Values<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<Values<f64>>,
        #[serde(default = "default_side")]
        side: SideChoice,
    },
    /// Finite alphabet taken from `proposal`/`wf`, or from a finite model when omitted.
    Laplace {
        functional: FunctionalSpec,
        n: Values<usize>,
        #[serde(default = "default_method")]
        method: LaplaceMethod,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        proposal: Option<FiniteDistribution>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wf: Option<Vec<f64>>,
    },
    Simulate {
        event: EventSpec,
        n: Values<usize>,
        reps: u64,
        /// Fit the decay slope when there are at least three sample sizes.
        #[serde(default = "yes")]
        fit: bool,
    },
}

impl AnalysisSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisSpec::Subset { .. } => "subset",
            AnalysisSpec::RandomWalk { .. } => "random-walk",
            AnalysisSpec::Quantile { .. } => "quantile",
            AnalysisSpec::Laplace { .. } => "laplace",
            AnalysisSpec::Simulate { .. } => "simulate",
        }
    }
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn model(&self) -> Result<ImportanceModel, CliError> {
        match &self.model {
            Some(m) => m.build(),
            None => Err(CliError::Config(format!("model: required for `{}` analysis", self.analysis.kind()))),
        }
    }
}
