use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

use super::sets::{Interval, Region};
use crate::error::{Error, Result};
use crate::numerics::{integrate, log_sum_exp};

/// Probability vector on a strictly increasing list of real points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFinite", into = "RawFinite")]
pub struct FiniteDistribution {
    points: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawFinite {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawFinite> for FiniteDistribution {
    type Error = Error;
    fn try_from(raw: RawFinite) -> Result<Self> {
        FiniteDistribution::new(raw.points, raw.probs)
    }
}

impl From<FiniteDistribution> for RawFinite {
    fn from(d: FiniteDistribution) -> Self {
        RawFinite { points: d.points, probs: d.probs }
    }
}

impl FiniteDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidModel("finite distribution needs at least one point".into()));
        }
        if points.len() != probs.len() {
            return Err(Error::InvalidModel(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidModel("alphabet points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel("alphabet points must be distinct and strictly increasing".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidModel("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!("probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { points, probs, cumulative })
    }

    /// Uniform distribution on `0, 1, ..., k-1`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| i as f64).collect(), vec![1.0 / k as f64; k])
    }

    /// Binomial(m, p) on `0..=m`.
    pub fn binomial(m: u32, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("binomial p = {p} outside [0, 1]")));
        }
        let lf = crate::numerics::log_factorials(m as usize);
        let mut probs: Vec<f64> = (0..=m as usize)
            .map(|k| {
                let kf = k as f64;
                let mf = m as f64;
                let log_p = if p == 0.0 {
                    if k == 0 { 0.0 } else { f64::NEG_INFINITY }
                } else if p == 1.0 {
                    if k == m as usize { 0.0 } else { f64::NEG_INFINITY }
                } else {
                    lf[m as usize] - lf[k] - lf[m as usize - k] + kf * p.ln() + (mf - kf) * (-p).ln_1p()
                };
                log_p.exp()
            })
            .collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|q| *q /= total);
        Self::new((0..=m).map(f64::from).collect(), probs)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.points.binary_search_by(|p| p.total_cmp(&x)).ok()
    }

    pub fn pmf(&self, x: f64) -> f64 {
        self.index_of(x).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    /// `P(X ≤ x)`
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|p| *p <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1].min(1.0)
        }
    }

    /// `P(X > x)`, summed directly over the upper points.
    pub fn sf(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|p| *p <= x);
        self.probs[k..].iter().sum()
    }

    pub fn prob_interval(&self, i: &Interval) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .filter(|(p, _)| i.contains(**p))
            .map(|(_, q)| q)
            .sum()
    }

    /// `inf{x : P(X ≤ x) ≥ u}`
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|c| *c < u);
        self.points[k.min(self.len() - 1)]
    }

    /// `inf{x : P(X > x) ≤ alpha}`
    pub fn upper_quantile(&self, alpha: f64) -> f64 {
        let mut tail = 0.0;
        // walk down from the top; the answer is the lowest point whose strict upper tail is ≤ alpha
        let mut answer = self.points[self.len() - 1];
        for i in (0..self.len()).rev() {
            if tail <= alpha {
                answer = self.points[i];
            } else {
                break;
            }
            tail += self.probs[i];
        }
        answer
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let k = self.cumulative.partition_point(|c| *c <= u);
        // guard against a last cumulative entry a hair below 1
        let k = k.min(self.len() - 1);
        if self.probs[k] == 0.0 {
            // step back to the nearest charged point
            (0..=k).rev().find(|&j| self.probs[j] > 0.0).unwrap_or(k)
        } else {
            k
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.points[self.sample_index(rng)]
    }

    pub fn log_mgf(&self, theta: f64) -> f64 {
        let v: Vec<f64> = self
            .points
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, p)| p.ln() + theta * x)
            .collect();
        log_sum_exp(&v)
    }

    pub fn log_mgf_prime(&self, theta: f64) -> f64 {
        let lse = self.log_mgf(theta);
        self.points
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, p)| x * (p.ln() + theta * x - lse).exp())
            .sum()
    }

    /// Same alphabet with new probabilities.
    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), probs)
    }
}

/// One-dimensional distribution used as target `F` or proposal `F̃`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarDistribution {
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Bernoulli { p: f64, table: FiniteDistribution },
    Finite(FiniteDistribution),
    /// A continuous base law conditioned on an interval of positive mass.
    Conditioned { base: Box<ScalarDistribution>, on: Interval, mass: f64 },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// `z` with `P(Z > z) = s`, polished by Newton steps on `log P(Z > z)`.
fn std_normal_isf(s: f64) -> f64 {
    if s <= 0.0 {
        return f64::INFINITY;
    }
    if s >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if s > 0.5 {
        return -std_normal_isf(1.0 - s);
    }
    let mut z = SQRT_2 * erfc_inv(2.0 * s);
    let target = s.ln();
    for _ in 0..4 {
        let tail = std_normal_sf(z);
        let dens = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        if !(tail > 0.0 && dens > 0.0) {
            break;
        }
        let step = (tail.ln() - target) * tail / dens;
        z += step;
        if step.abs() <= 1e-16 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

impl ScalarDistribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd.is_finite() && sd > 0.0) {
            return Err(Error::InvalidModel(format!("gaussian needs finite mean and sd > 0 (got {mean}, {sd})")));
        }
        Ok(Self::Gaussian { mean, sd })
    }

    pub fn standard_gaussian() -> Self {
        Self::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidModel(format!("exponential needs rate > 0 (got {rate})")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!("bernoulli needs p in [0, 1] (got {p})")));
        }
        let table = FiniteDistribution::new(vec![0.0, 1.0], vec![1.0 - p, p])?;
        Ok(Self::Bernoulli { p, table })
    }

    pub fn finite(d: FiniteDistribution) -> Self {
        Self::Finite(d)
    }

    /// The law of `X` given `X ∈ on` for a continuous base law.
    pub fn conditioned(base: ScalarDistribution, on: Interval) -> Result<Self> {
        if !base.is_continuous() {
            return Err(Error::InvalidModel(
                "conditioning is only supported for continuous laws; renormalise a finite law instead".into(),
            ));
        }
        let mass = base.prob_interval(&on);
        if !(mass > 0.0) {
            return Err(Error::InvalidModel(format!("conditioning set {on:?} has zero probability")));
        }
        Ok(Self::Conditioned { base: Box::new(base), on, mass })
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            Self::Gaussian { .. } | Self::Exponential { .. } => true,
            Self::Conditioned { base, .. } => base.is_continuous(),
            Self::Bernoulli { .. } | Self::Finite(_) => false,
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteDistribution> {
        match self {
            Self::Bernoulli { table, .. } => Some(table),
            Self::Finite(d) => Some(d),
            _ => None,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Exponential { .. } => "exponential",
            Self::Bernoulli { .. } => "bernoulli",
            Self::Finite(_) => "finite",
            Self::Conditioned { .. } => "conditioned",
        }
    }

    /// Density for continuous laws, mass function for discrete ones.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::Conditioned { base, on, mass } => {
                if on.contains(x) {
                    base.density(x) / mass
                } else {
                    0.0
                }
            }
            _ => self.as_finite().expect("discrete").pmf(x),
        }
    }

    /// `P(X ≤ x)`
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => std_normal_cdf((x - mean) / sd),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Conditioned { base, on, mass } => {
                if x < on.lo {
                    0.0
                } else if x >= on.hi {
                    1.0
                } else {
                    (base.mass_between(on.lo, x) / mass).clamp(0.0, 1.0)
                }
            }
            _ => self.as_finite().expect("discrete").cdf(x),
        }
    }

    /// `P(X > x)`
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => std_normal_sf((x - mean) / sd),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Self::Conditioned { base, on, mass } => {
                if x < on.lo {
                    1.0
                } else if x >= on.hi {
                    0.0
                } else {
                    (base.mass_between(x, on.hi) / mass).clamp(0.0, 1.0)
                }
            }
            _ => self.as_finite().expect("discrete").sf(x),
        }
    }

    /// `P(a < X ≤ b)` for a continuous law, choosing the tail that keeps precision.
    fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let lower = self.cdf(b) - self.cdf(a);
        let upper = self.sf(a) - self.sf(b);
        // whichever side is subtracting the smaller numbers carries more digits
        if self.sf(a) < self.cdf(b) {
            upper.max(0.0)
        } else {
            lower.max(0.0)
        }
    }

    pub fn prob_interval(&self, i: &Interval) -> f64 {
        if i.is_empty() {
            return 0.0;
        }
        match self.as_finite() {
            Some(d) => d.prob_interval(i),
            None => self.mass_between(i.lo, i.hi),
        }
    }

    pub fn prob_region(&self, r: &Region) -> f64 {
        match r {
            Region::Interval(i) => self.prob_interval(i),
            Region::Points { points } => match self.as_finite() {
                Some(d) => points.iter().map(|x| d.pmf(*x)).sum(),
                None => 0.0,
            },
        }
    }

    /// Inverse survival function, `inf{x : P(X > x) ≤ s}`.
    pub fn isf(&self, s: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => mean + sd * std_normal_isf(s),
            Self::Exponential { rate } => {
                if s >= 1.0 {
                    0.0
                } else if s <= 0.0 {
                    f64::INFINITY
                } else {
                    -s.ln() / rate
                }
            }
            Self::Conditioned { base, on, mass } => {
                let s = s.clamp(0.0, 1.0);
                if s <= 0.0 {
                    return on.hi;
                }
                if s >= 1.0 {
                    return on.lo;
                }
                // P(X > x | on) = s  ⇔  P_base(X > x) = sf(hi) + s·mass
                let x = base.isf(base.sf(on.hi) + s * mass);
                x.clamp(on.lo, on.hi)
            }
            _ => self.as_finite().expect("discrete").upper_quantile(s),
        }
    }

    /// `inf{x : P(X ≤ x) ≥ u}`
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Self::Gaussian { .. } | Self::Exponential { .. } | Self::Conditioned { .. } => {
                if u <= 0.5 {
                    match self {
                        Self::Gaussian { mean, sd } => mean - sd * std_normal_isf(u),
                        Self::Exponential { rate } => -(-u).ln_1p() / rate,
                        Self::Conditioned { base, on, mass } => {
                            if u <= 0.0 {
                                return on.lo;
                            }
                            let x = base.quantile(base.cdf(on.lo) + u * mass);
                            x.clamp(on.lo, on.hi)
                        }
                        _ => unreachable!(),
                    }
                } else {
                    self.isf(1.0 - u)
                }
            }
            _ => self.as_finite().expect("discrete").quantile(u),
        }
    }

    /// `Φ_α(F) = inf{x : F((x, ∞)) ≤ α}`.
    pub fn upper_quantile(&self, alpha: f64) -> f64 {
        self.isf(alpha)
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mean, .. } => *mean,
            Self::Exponential { rate } => 1.0 / rate,
            Self::Conditioned { .. } => {
                let (lo, hi) = self.effective_support();
                integrate(|x| x * self.density(x), lo, hi, 1e-12, 1e-300).map(|v| v.0).unwrap_or(f64::NAN)
            }
            _ => self.as_finite().expect("discrete").mean(),
        }
    }

    /// Interval outside of which the law has negligible mass (< 1e-300 density).
    pub fn effective_support(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { mean, sd } => (mean - 38.0 * sd, mean + 38.0 * sd),
            Self::Exponential { rate } => (0.0, 745.0 / rate),
            Self::Conditioned { base, on, .. } => {
                let (lo, hi) = base.effective_support();
                (lo.max(on.lo), hi.min(on.hi))
            }
            _ => {
                let d = self.as_finite().expect("discrete");
                (d.points()[0], d.points()[d.len() - 1])
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Self::Exponential { rate } => {
                let e: f64 = rng.sample(Exp1);
                e / rate
            }
            Self::Conditioned { on, .. } => {
                let u: f64 = rng.random();
                self.quantile(u).clamp(on.lo, on.hi)
            }
            _ => self.as_finite().expect("discrete").sample(rng),
        }
    }

    /// `κ(θ) = log E[e^{θX}]`; `+∞` outside the domain.
    pub fn log_mgf(&self, theta: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => mean * theta + 0.5 * sd * sd * theta * theta,
            Self::Exponential { rate } => {
                if theta < *rate {
                    (rate / (rate - theta)).ln()
                } else {
                    f64::INFINITY
                }
            }
            Self::Conditioned { .. } => {
                let (lo, hi) = self.effective_support();
                // factor out e^{θ·c} with c the endpoint dominating the integrand
                let c = if theta >= 0.0 { hi.min(lo.max(0.0) + 1e6) } else { lo };
                let c = if c.is_finite() { c } else { 0.0 };
                match integrate(|x| (theta * (x - c)).exp() * self.density(x), lo, hi, 1e-12, 1e-300) {
                    Ok((v, _)) if v > 0.0 => theta * c + v.ln(),
                    _ => f64::INFINITY,
                }
            }
            _ => self.as_finite().expect("discrete").log_mgf(theta),
        }
    }

    pub fn log_mgf_prime(&self, theta: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => mean + sd * sd * theta,
            Self::Exponential { rate } => {
                if theta < *rate {
                    1.0 / (rate - theta)
                } else {
                    f64::INFINITY
                }
            }
            Self::Conditioned { .. } => {
                let (lo, hi) = self.effective_support();
                let k = self.log_mgf(theta);
                integrate(|x| x * (theta * x - k).exp() * self.density(x), lo, hi, 1e-12, 1e-300)
                    .map(|v| v.0)
                    .unwrap_or(f64::NAN)
            }
            _ => self.as_finite().expect("discrete").log_mgf_prime(theta),
        }
    }

    /// Open interval of θ on which `κ` is finite.
    pub fn log_mgf_domain(&self) -> (f64, f64) {
        match self {
            Self::Exponential { rate } => (f64::NEG_INFINITY, *rate),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}
