use std::fmt;
use std::sync::Arc;

use super::distribution::{FiniteDistribution, ScalarDistribution};
use super::sets::{ImportanceFunction, Interval, Region};
use crate::error::{Error, Result};

/// Closed-form representation of `dF/dF̃`.
#[derive(Clone)]
pub enum LikelihoodRatio {
    Unit,
    /// Constant on the support of `f`; undefined elsewhere.
    Constant(f64),
    /// `exp(c0 + c1·x + c2·x²)`
    LogQuadratic { c0: f64, c1: f64, c2: f64 },
    /// One entry per alphabet point of a finite model.
    Table(Vec<f64>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LikelihoodRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unit => write!(f, "Unit"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::LogQuadratic { c0, c1, c2 } => write!(f, "LogQuadratic({c0}, {c1}, {c2})"),
            Self::Table(t) => write!(f, "Table({t:?})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl LikelihoodRatio {
    pub fn log_quadratic_at(c0: f64, c1: f64, c2: f64, x: f64) -> f64 {
        c0 + c1 * x + c2 * x * x
    }
}

/// An importance sampling algorithm: target `F`, proposal `F̃`, importance
/// function `f` and likelihood ratio `dF/dF̃`.
#[derive(Debug, Clone)]
pub struct ImportanceModel {
    target: ScalarDistribution,
    proposal: ScalarDistribution,
    importance: ImportanceFunction,
    ratio: LikelihoodRatio,
    label: String,
}

fn finite_weight_identity(
    target: &FiniteDistribution,
    proposal: &FiniteDistribution,
    importance: &ImportanceFunction,
    ratio: &[f64],
) -> Result<()> {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (i, &x) in target.points().iter().enumerate() {
        if importance.value(x) > 0.0 {
            let q = proposal.probs()[i];
            if q > 0.0 {
                if !ratio[i].is_finite() {
                    return Err(Error::InfiniteWeight { x });
                }
                lhs += ratio[i] * q;
            } else if target.probs()[i] > 0.0 {
                return Err(Error::InvalidModel(format!(
                    "target charges {x} inside the importance set but the proposal does not"
                )));
            }
            rhs += target.probs()[i];
        }
    }
    if (lhs - rhs).abs() > 1e-10 {
        return Err(Error::InvalidModel(format!(
            "weight identity fails: Σ w·F̃ = {lhs} but F({{f>0}}) = {rhs}"
        )));
    }
    Ok(())
}

impl ImportanceModel {
    /// Sample directly from the target.
    pub fn standard_mc(target: ScalarDistribution, importance: ImportanceFunction) -> Self {
        Self {
            proposal: target.clone(),
            target,
            importance,
            ratio: LikelihoodRatio::Unit,
            label: "standard-mc".into(),
        }
    }

    /// `F = N(μ, σ²)` sampled from `N(μ + θσ², σ²)`, i.e. the exponential tilt
    /// by `θ`. The ratio is `exp(κ(θ) − θx)` with `κ(θ) = μθ + σ²θ²/2`.
    pub fn gaussian_tilt(mean: f64, sd: f64, theta: f64, importance: ImportanceFunction) -> Result<Self> {
        let target = ScalarDistribution::gaussian(mean, sd)?;
        let proposal = ScalarDistribution::gaussian(mean + theta * sd * sd, sd)?;
        let kappa = mean * theta + 0.5 * sd * sd * theta * theta;
        Ok(Self {
            target,
            proposal,
            importance,
            ratio: LikelihoodRatio::LogQuadratic { c0: kappa, c1: -theta, c2: 0.0 },
            label: format!("gaussian-tilt(θ={theta})"),
        })
    }

    /// Two arbitrary Gaussians.
    pub fn gaussian_pair(target: (f64, f64), proposal: (f64, f64), importance: ImportanceFunction) -> Result<Self> {
        let (m1, s1) = target;
        let (m2, s2) = proposal;
        let t = ScalarDistribution::gaussian(m1, s1)?;
        let p = ScalarDistribution::gaussian(m2, s2)?;
        // log φ1 − log φ2 expanded in powers of x
        let a1 = 1.0 / (2.0 * s1 * s1);
        let a2 = 1.0 / (2.0 * s2 * s2);
        let c2 = a2 - a1;
        let c1 = 2.0 * (a1 * m1 - a2 * m2);
        let c0 = (s2 / s1).ln() - a1 * m1 * m1 + a2 * m2 * m2;
        Ok(Self {
            target: t,
            proposal: p,
            importance,
            ratio: LikelihoodRatio::LogQuadratic { c0, c1, c2 },
            label: "gaussian-pair".into(),
        })
    }

    /// `F = Exp(λ₁)` sampled from `Exp(λ₂)`; ratio `(λ₁/λ₂)e^{−(λ₁−λ₂)x}` on `x ≥ 0`.
    pub fn exponential_pair(target_rate: f64, proposal_rate: f64, importance: ImportanceFunction) -> Result<Self> {
        let t = ScalarDistribution::exponential(target_rate)?;
        let p = ScalarDistribution::exponential(proposal_rate)?;
        Ok(Self {
            target: t,
            proposal: p,
            importance,
            ratio: LikelihoodRatio::LogQuadratic {
                c0: (target_rate / proposal_rate).ln(),
                c1: -(target_rate - proposal_rate),
                c2: 0.0,
            },
            label: "exponential-pair".into(),
        })
    }

    /// Sample from `F(· | A)` where `A` is the support of `f`; the ratio is
    /// `p = F(A)` on `A`.
    pub fn zero_variance(target: ScalarDistribution, importance: ImportanceFunction) -> Result<Self> {
        let support = importance.support();
        let p = target.prob_region(&support);
        if !(p > 0.0) {
            return Err(Error::InvalidModel("zero-variance sampler needs F(A) > 0".into()));
        }
        let (proposal, ratio) = match (&target, &support) {
            (ScalarDistribution::Bernoulli { .. } | ScalarDistribution::Finite(_), _) => {
                let d = target.as_finite().expect("discrete");
                let probs: Vec<f64> = d
                    .points()
                    .iter()
                    .zip(d.probs())
                    .map(|(x, q)| if support.contains(*x) { q / p } else { 0.0 })
                    .collect();
                let table: Vec<f64> = d
                    .points()
                    .iter()
                    .map(|x| if support.contains(*x) { p } else { f64::INFINITY })
                    .collect();
                (ScalarDistribution::Finite(d.with_probs(renormalise(probs))?), LikelihoodRatio::Table(table))
            }
            (_, Region::Interval(i)) => (ScalarDistribution::conditioned(target.clone(), *i)?, LikelihoodRatio::Constant(p)),
            (_, Region::Points { .. }) => {
                return Err(Error::InvalidModel("a point set has no mass under a continuous law".into()))
            }
        };
        Ok(Self { target, proposal, importance, ratio, label: "zero-variance".into() })
    }

    /// Both laws on a common finite alphabet; the ratio is `F/F̃` pointwise.
    pub fn finite(target: FiniteDistribution, proposal: FiniteDistribution, importance: ImportanceFunction) -> Result<Self> {
        if target.points() != proposal.points() {
            return Err(Error::InvalidModel("target and proposal alphabets differ".into()));
        }
        let table: Vec<f64> = target
            .probs()
            .iter()
            .zip(proposal.probs())
            .map(|(p, q)| {
                if *q > 0.0 {
                    p / q
                } else if *p > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .collect();
        Self::user_table(target, proposal, importance, table)
    }

    /// Finite model with an explicitly supplied ratio table.
    pub fn user_table(
        target: FiniteDistribution,
        proposal: FiniteDistribution,
        importance: ImportanceFunction,
        ratio: Vec<f64>,
    ) -> Result<Self> {
        if target.points() != proposal.points() {
            return Err(Error::InvalidModel("target and proposal alphabets differ".into()));
        }
        if ratio.len() != target.len() {
            return Err(Error::InvalidModel(format!(
                "ratio table has {} entries for {} alphabet points",
                ratio.len(),
                target.len()
            )));
        }
        if ratio.iter().any(|r| r.is_nan() || *r < 0.0) {
            return Err(Error::InvalidModel("ratio entries must be nonnegative".into()));
        }
        finite_weight_identity(&target, &proposal, &importance, &ratio)?;
        Ok(Self {
            target: ScalarDistribution::Finite(target),
            proposal: ScalarDistribution::Finite(proposal),
            importance,
            ratio: LikelihoodRatio::Table(ratio),
            label: "finite".into(),
        })
    }

    /// Scalar model with a caller-supplied ratio function.
    pub fn custom(
        target: ScalarDistribution,
        proposal: ScalarDistribution,
        importance: ImportanceFunction,
        ratio: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        Self { target, proposal, importance, ratio: LikelihoodRatio::Custom(ratio), label: "custom".into() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn target(&self) -> &ScalarDistribution {
        &self.target
    }

    pub fn proposal(&self) -> &ScalarDistribution {
        &self.proposal
    }

    pub fn importance(&self) -> &ImportanceFunction {
        &self.importance
    }

    pub fn ratio(&self) -> &LikelihoodRatio {
        &self.ratio
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_finite(&self) -> bool {
        self.target.as_finite().is_some()
    }

    /// `A = {f > 0}`
    pub fn support(&self) -> Region {
        self.importance.support()
    }

    /// `F(A)`
    pub fn target_mass(&self) -> f64 {
        self.target.prob_region(&self.support())
    }

    /// `dF/dF̃(x)`, without the restriction to `{f > 0}`.
    pub fn ratio_at(&self, x: f64) -> f64 {
        match &self.ratio {
            LikelihoodRatio::Unit => 1.0,
            LikelihoodRatio::Constant(c) => *c,
            LikelihoodRatio::LogQuadratic { c0, c1, c2 } => LikelihoodRatio::log_quadratic_at(*c0, *c1, *c2, x).exp(),
            LikelihoodRatio::Table(t) => {
                let d = self.target.as_finite().expect("table ratio on finite model");
                d.index_of(x).map(|i| t[i]).unwrap_or(0.0)
            }
            LikelihoodRatio::Custom(g) => g(x),
        }
    }

    /// `w(x) = dF/dF̃(x)·1{f(x) > 0}`.
    pub fn weight(&self, x: f64) -> Result<f64> {
        if self.importance.value(x) <= 0.0 {
            return Ok(0.0);
        }
        let r = self.ratio_at(x);
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::InfiniteWeight { x })
        }
    }

    /// `w(x)·f(x)`
    pub fn wf(&self, x: f64) -> Result<f64> {
        let f = self.importance.value(x);
        if f <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.weight(x)? * f)
    }

    /// The value `r` when `dF/dF̃ ≡ r` on `A`.
    pub fn constant_ratio_on_support(&self) -> Option<f64> {
        match &self.ratio {
            LikelihoodRatio::Unit => Some(1.0),
            LikelihoodRatio::Constant(c) => Some(*c),
            LikelihoodRatio::LogQuadratic { c0, c1, c2 } if *c1 == 0.0 && *c2 == 0.0 => Some(c0.exp()),
            LikelihoodRatio::Table(t) => {
                let d = self.target.as_finite()?;
                let prop = self.proposal.as_finite()?;
                let mut seen: Option<f64> = None;
                for (i, x) in d.points().iter().enumerate() {
                    if self.importance.value(*x) > 0.0 && prop.probs()[i] > 0.0 {
                        match seen {
                            None => seen = Some(t[i]),
                            Some(v) if v == t[i] => {}
                            Some(_) => return None,
                        }
                    }
                }
                seen
            }
            _ => None,
        }
    }

    /// `(wf(x_i))_i` over the alphabet of a finite model.
    pub fn wf_table(&self) -> Result<Vec<f64>> {
        let d = self
            .proposal
            .as_finite()
            .ok_or_else(|| Error::InvalidModel("wf table requested for a continuous model".into()))?;
        d.points()
            .iter()
            .zip(d.probs())
            .map(|(x, q)| if *q > 0.0 { self.wf(*x) } else { Ok(0.0) })
            .collect()
    }

    /// For interval supports: the support interval.
    pub fn support_interval(&self) -> Option<Interval> {
        match self.support() {
            Region::Interval(i) => Some(i),
            Region::Points { .. } => None,
        }
    }
}

fn renormalise(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
