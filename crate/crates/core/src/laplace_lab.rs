//! Exact pre-limit Laplace values on finite alphabets, their convergence to
//! the variational limit, and Monte Carlo estimates of deviation events.
//!
//! For a proposal `F̃` on `k` points and `ν = Ψ(G)`, `Ψ(G)(x) = wf(x)G(x)`,
//!
//! ```text
//! Wⁿ = −(1/n) log E[exp(−n h(F̃ⁿ^{wf}))]
//! ```
//!
//! is computed in two independent ways: by summing over type classes, and by
//! the backward recursion over partial counts
//! `Wⁿ(j, c) = −(1/n) log Σ_x F̃(x) exp(−n Wⁿ(j+1, c + e_x))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_factorials;
use crate::prob_models::{FiniteDistribution, ImportanceModel, Region};
use crate::quantile_analysis::{quantile_rate, tilted_rate, QuantileRateResult, TiltSolution, WeightedIndicator};
use crate::rate_functions::{variational_value, MeasureFunctional};
use crate::stream::StreamKey;
use crate::subset_analysis::Side;

/// Serializable functionals of a finite measure `ν` (indexed by alphabet position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionalSpec {
    Constant { value: f64 },
    /// `Σ ν_i g_i`
    Linear { g: Vec<f64> },
    /// `min((Σ_{i ∈ indices} ν_i)², cap)`
    ClippedSquare { indices: Vec<usize>, cap: f64 },
    /// `min(scale · Σ (ν_i − target_i)², cap)`
    SquaredDistance { target: Vec<f64>, scale: f64, cap: f64 },
    /// `penalty · Σ_{i ∈ set} max(0, (1+ε)·reference_i − ν_i)`
    OverweightPenalty { set: Vec<usize>, reference: Vec<f64>, eps: f64, penalty: f64 },
}

impl FunctionalSpec {
    pub fn validate(&self, k: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("functional: {what}")));
        match self {
            FunctionalSpec::Constant { value } if !value.is_finite() => bad("constant must be finite"),
            FunctionalSpec::Linear { g } if g.len() != k => bad(&format!("g has {} entries for {k} points", g.len())),
            FunctionalSpec::Linear { g } if g.iter().any(|v| !v.is_finite()) => bad("g must be finite"),
            FunctionalSpec::ClippedSquare { indices, cap } if indices.iter().any(|i| *i >= k) || !(*cap >= 0.0) => {
                bad("indices must address the alphabet and cap must be ≥ 0")
            }
            FunctionalSpec::SquaredDistance { target, scale, cap } if target.len() != k || !(*scale >= 0.0) || !(*cap >= 0.0) => {
                bad("target must match the alphabet; scale and cap must be ≥ 0")
            }
            FunctionalSpec::OverweightPenalty { set, reference, eps, penalty }
                if set.iter().any(|i| *i >= k) || reference.len() != k || !(*eps > 0.0) || !(*penalty >= 0.0) =>
            {
                bad("set must address the alphabet, reference must match it, eps > 0, penalty ≥ 0")
            }
            _ => Ok(()),
        }
    }

    /// Whether `h` is linear in `ν` (then `Wⁿ` does not depend on `n`).
    pub fn is_linear(&self) -> bool {
        matches!(self, FunctionalSpec::Constant { .. } | FunctionalSpec::Linear { .. })
    }
}

impl MeasureFunctional for FunctionalSpec {
    fn eval(&self, nu: &[f64]) -> f64 {
        match self {
            FunctionalSpec::Constant { value } => *value,
            FunctionalSpec::Linear { g } => nu.iter().zip(g).map(|(a, b)| a * b).sum(),
            FunctionalSpec::ClippedSquare { indices, cap } => {
                let s: f64 = indices.iter().map(|&i| nu[i]).sum();
                (s * s).min(*cap)
            }
            FunctionalSpec::SquaredDistance { target, scale, cap } => {
                let d: f64 = nu.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
                (scale * d).min(*cap)
            }
            FunctionalSpec::OverweightPenalty { set, reference, eps, penalty } => {
                penalty * set.iter().map(|&i| ((1.0 + eps) * reference[i] - nu[i]).max(0.0)).sum::<f64>()
            }
        }
    }
}

pub const STATE_BUDGET: f64 = 1e7;

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Alphabet restricted to `F̃ > 0`: `(index, log F̃, wf)`.
fn charged(proposal: &FiniteDistribution, wf: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    if wf.len() != proposal.len() {
        return Err(Error::Domain(format!("wf has {} entries for {} points", wf.len(), proposal.len())));
    }
    if wf.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("wf entries must be finite and nonnegative".into()));
    }
    Ok((0..proposal.len())
        .filter(|&i| proposal.probs()[i] > 0.0)
        .map(|i| (i, proposal.probs()[i].ln(), wf[i]))
        .collect())
}

fn push_measure(nu: &mut [f64], support: &[(usize, f64, f64)], counts: &[usize], n: usize) {
    nu.iter_mut().for_each(|v| *v = 0.0);
    for (j, &(i, _, w)) in support.iter().enumerate() {
        nu[i] = w * counts[j] as f64 / n as f64;
    }
}

/// Running `log Σ exp(v)`.
#[derive(Clone, Copy)]
struct Lse {
    max: f64,
    sum: f64,
}

impl Lse {
    fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

fn visit_compositions(total: usize, parts: usize, visit: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(c: &mut Vec<usize>, left: usize, parts: usize, visit: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
        if c.len() + 1 == parts {
            c.push(left);
            visit(c)?;
            c.pop();
            return Ok(());
        }
        for v in 0..=left {
            c.push(v);
            rec(c, left - v, parts, visit)?;
            c.pop();
        }
        Ok(())
    }
    rec(&mut Vec::with_capacity(parts), total, parts, visit)
}

fn eval_h(h: &dyn MeasureFunctional, nu: &[f64]) -> Result<f64> {
    let v = h.eval(nu);
    if v.is_nan() {
        return Err(Error::Numerical(format!("functional returned NaN at ν = {nu:?}")));
    }
    Ok(v)
}

/// `Wⁿ` by summing over type classes with multinomial weights.
pub fn exact_laplace_value(proposal: &FiniteDistribution, wf: &[f64], h: &dyn MeasureFunctional, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let support = charged(proposal, wf)?;
    let m = support.len();
    let states = binom(n + m - 1, m - 1);
    if states > STATE_BUDGET {
        return Err(Error::Budget(format!(
            "{states:.3e} type classes exceed the {STATE_BUDGET:e} budget; use a smaller n or the recursion"
        )));
    }
    let lf = log_factorials(n);
    let mut nu = vec![0.0; proposal.len()];
    let mut h_ref = None;
    // the same shift is applied to both sums so a constant h cancels exactly
    let mut base = Lse::new();
    let mut tilted = Lse::new();
    let nf = n as f64;
    visit_compositions(n, m, &mut |c| {
        let mut lw = lf[n];
        for (j, &cj) in c.iter().enumerate() {
            lw -= lf[cj];
            if cj > 0 {
                lw += cj as f64 * support[j].1;
            }
        }
        push_measure(&mut nu, &support, c, n);
        let hv = eval_h(h, &nu)?;
        let r = *h_ref.get_or_insert(hv);
        base.add(lw);
        tilted.add(lw - nf * (hv - r));
        Ok(())
    })?;
    let r = h_ref.expect("at least one type");
    Ok(r - (tilted.value() - base.value()) / nf)
}

/// Lexicographic ranking of compositions of `j` into `m` parts.
struct Ranker {
    m: usize,
    /// `skip[p][r][v] = Σ_{u < v} N(r − u, p)` with `N(r, p)` compositions of `r` into `p` parts
    skip: Vec<Vec<Vec<usize>>>,
}

impl Ranker {
    fn new(n: usize, m: usize) -> Self {
        let count = |r: usize, p: usize| -> usize {
            if p == 0 {
                usize::from(r == 0)
            } else {
                binom(r + p - 1, p - 1).round() as usize
            }
        };
        let skip = (0..m)
            .map(|p| {
                (0..=n)
                    .map(|r| {
                        let mut acc = 0;
                        let mut row = Vec::with_capacity(r + 2);
                        row.push(0);
                        for u in 0..=r {
                            acc += count(r - u, p);
                            row.push(acc);
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        Self { m, skip }
    }

    fn rank(&self, c: &[usize], total: usize) -> usize {
        let mut rem = total;
        let mut rank = 0;
        for (i, &ci) in c.iter().enumerate().take(self.m - 1) {
            rank += self.skip[self.m - i - 1][rem][ci];
            rem -= ci;
        }
        rank
    }
}

/// All `Wⁿ(j, c)` for `0 ≤ j ≤ n`, as produced by the backward recursion.
pub struct DpTable {
    n: usize,
    support: Vec<(usize, f64, f64)>,
    alphabet: usize,
    ranker: Ranker,
    /// `levels[j][rank(c)]`
    levels: Vec<Vec<f64>>,
}

impl DpTable {
    pub fn build(proposal: &FiniteDistribution, wf: &[f64], h: &dyn MeasureFunctional, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let support = charged(proposal, wf)?;
        let m = support.len();
        let states = binom(n + m, m);
        if states > STATE_BUDGET {
            return Err(Error::Budget(format!(
                "{states:.3e} lattice states exceed the {STATE_BUDGET:e} budget; use a smaller n"
            )));
        }
        let ranker = Ranker::new(n, m);
        let nf = n as f64;
        let log_total = support.iter().map(|s| s.1.exp()).sum::<f64>().ln();
        let mut levels: Vec<Vec<f64>> = vec![Vec::new(); n + 1];

        let mut nu = vec![0.0; proposal.len()];
        let mut terminal = Vec::with_capacity(binom(n + m - 1, m - 1) as usize);
        visit_compositions(n, m, &mut |c| {
            push_measure(&mut nu, &support, c, n);
            terminal.push(eval_h(h, &nu)?);
            Ok(())
        })?;
        levels[n] = terminal;

        let mut child = vec![0usize; m];
        for j in (0..n).rev() {
            let next = &levels[j + 1];
            let mut cur = Vec::with_capacity(binom(j + m - 1, m - 1) as usize);
            visit_compositions(j, m, &mut |c| {
                child.copy_from_slice(c);
                let first = {
                    child[0] += 1;
                    let v = next[ranker.rank(&child, j + 1)];
                    child[0] -= 1;
                    v
                };
                let mut acc = Lse::new();
                for x in 0..m {
                    child[x] += 1;
                    let v = next[ranker.rank(&child, j + 1)];
                    child[x] -= 1;
                    acc.add(support[x].1 - nf * (v - first));
                }
                cur.push(first - (acc.value() - log_total) / nf);
                Ok(())
            })?;
            levels[j] = cur;
        }
        Ok(Self { n, support, alphabet: proposal.len(), ranker, levels })
    }

    /// `Wⁿ = Wⁿ(0, 0)`
    pub fn value(&self) -> f64 {
        self.levels[0][0]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of charged alphabet points (the length of a counts vector).
    pub fn parts(&self) -> usize {
        self.support.len()
    }

    /// Alphabet indices of the charged points, in counts-vector order.
    pub fn support_indices(&self) -> Vec<usize> {
        self.support.iter().map(|s| s.0).collect()
    }

    /// `Wⁿ(j, c)` where `c` counts draws per charged point and `Σ c = j`.
    pub fn w(&self, counts: &[usize]) -> Result<f64> {
        let j: usize = counts.iter().sum();
        if counts.len() != self.parts() || j > self.n {
            return Err(Error::Domain(format!("counts {counts:?} do not address the lattice")));
        }
        Ok(self.levels[j][self.ranker.rank(counts, j)])
    }

    /// Minimizing one-step kernel at `(j, c)`: `∝ F̃(x) exp(−n Wⁿ(j+1, c + e_x))`.
    pub fn kernel(&self, counts: &[usize]) -> Result<Vec<f64>> {
        let j: usize = counts.iter().sum();
        if j >= self.n {
            return Err(Error::Domain("no step is taken from the terminal level".into()));
        }
        let nf = self.n as f64;
        let mut child = counts.to_vec();
        let mut logits = Vec::with_capacity(self.parts());
        for x in 0..self.parts() {
            child[x] += 1;
            logits.push(self.support[x].1 - nf * self.w(&child)?);
            child[x] -= 1;
        }
        let z = crate::numerics::log_sum_exp(&logits);
        Ok(logits.iter().map(|l| (l - z).exp()).collect())
    }

    /// `Σ_x μ(x) Wⁿ(j+1, c + e_x) + (1/n) H(μ | F̃)` for a one-step kernel `μ`.
    pub fn step_cost(&self, counts: &[usize], mu: &[f64]) -> Result<f64> {
        let nf = self.n as f64;
        let mut child = counts.to_vec();
        let mut cost = 0.0;
        let mut ent = 0.0;
        for x in 0..self.parts() {
            child[x] += 1;
            cost += mu[x] * self.w(&child)?;
            child[x] -= 1;
            ent += crate::numerics::xlog_ratio(mu[x], self.support[x].1.exp());
        }
        Ok(cost + ent / nf)
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet
    }
}

/// `Wⁿ` by the backward recursion.
pub fn dp_laplace_value(proposal: &FiniteDistribution, wf: &[f64], h: &dyn MeasureFunctional, n: usize) -> Result<f64> {
    Ok(DpTable::build(proposal, wf, h, n)?.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplaceMethod {
    Enumeration,
    Dp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceRunResult {
    pub method: LaplaceMethod,
    pub n_values: Vec<usize>,
    pub w_n_values: Vec<f64>,
    pub variational_limit: f64,
    pub minimizer: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Whether the gap sequence never increases.
    pub nonincreasing: bool,
}

/// `Wⁿ` for each `n` against `inf_G {h(Ψ(G)) + H(G | F̃)}`.
pub fn convergence_check(
    proposal: &FiniteDistribution,
    wf: &[f64],
    h: &dyn MeasureFunctional,
    n_values: &[usize],
    method: LaplaceMethod,
) -> Result<LaplaceRunResult> {
    if n_values.is_empty() {
        return Err(Error::Domain("n list is empty".into()));
    }
    let limit = variational_value(proposal, wf, h)?;
    let w_n_values = n_values
        .par_iter()
        .map(|&n| match method {
            LaplaceMethod::Enumeration => exact_laplace_value(proposal, wf, h, n),
            LaplaceMethod::Dp => dp_laplace_value(proposal, wf, h, n),
        })
        .collect::<Result<Vec<f64>>>()?;
    let gaps: Vec<f64> = w_n_values.iter().map(|w| (w - limit.value).abs()).collect();
    let nonincreasing = gaps.windows(2).all(|g| g[1] <= g[0]);
    Ok(LaplaceRunResult {
        method,
        n_values: n_values.to_vec(),
        w_n_values,
        variational_limit: limit.value,
        minimizer: limit.minimizer,
        gaps,
        nonincreasing,
    })
}

/// A deviation event testable on a single sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventSpec {
    /// `Φ_α(F̃ⁿ^{wf}) ≥ (1+ε)Φ_α(F)`, tested as `F̃ⁿ^{wf}((q, ∞)) ≥ α`.
    QuantileExceedance { alpha: f64, eps: f64 },
    /// `F̃ⁿ^{wf}(C) ≥ (1+ε)F(C)`
    FiniteOverweight { set: Vec<f64>, eps: f64 },
    /// `F̃ⁿ^{wf}(C) ≤ (1−ε)F(C)`
    FiniteUnderweight { set: Vec<f64>, eps: f64 },
}

/// An event resolved against a model: sum `wf(X)` over `S` and compare with `threshold · n`.
struct ResolvedEvent {
    set: Region,
    threshold: f64,
    at_least: bool,
}

impl EventSpec {
    fn resolve(&self, model: &ImportanceModel) -> Result<ResolvedEvent> {
        match self {
            EventSpec::QuantileExceedance { alpha, eps } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
                }
                if !(*eps > 0.0) {
                    return Err(Error::Domain(format!("eps = {eps} must be positive")));
                }
                let q = (1.0 + eps) * model.target().upper_quantile(*alpha);
                Ok(ResolvedEvent { set: Region::Interval(crate::prob_models::Interval::greater_than(q)), threshold: *alpha, at_least: true })
            }
            EventSpec::FiniteOverweight { set, eps } | EventSpec::FiniteUnderweight { set, eps } => {
                let over = matches!(self, EventSpec::FiniteOverweight { .. });
                if !(*eps > 0.0) || (!over && *eps > 1.0) {
                    return Err(Error::Domain(format!("eps = {eps} out of range")));
                }
                let region = Region::Points { points: set.clone() };
                let fc = model.target().prob_region(&region);
                if !(fc > 0.0) {
                    return Err(Error::Domain("event set has zero target probability".into()));
                }
                let factor = if over { 1.0 + eps } else { 1.0 - eps };
                Ok(ResolvedEvent { set: region, threshold: factor * fc, at_least: over })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    pub n: usize,
    pub reps: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub std_err: f64,
    /// `−(1/n) log p̂`; `None` when no replication hit.
    pub neg_log_rate: Option<f64>,
}

/// Fraction of `reps` independent samples of size `n` whose weighted empirical
/// measure lies in the event. Replication `r` uses stream `(seed, n << 32 | r)`,
/// so results do not depend on thread count.
pub fn estimate_event_probability(model: &ImportanceModel, event: &EventSpec, n: usize, reps: u64, seed: u64) -> Result<EventEstimate> {
    if reps == 0 {
        return Err(Error::Domain("reps must be at least 1".into()));
    }
    if n == 0 || n as u64 >= 1 << 32 || reps >= 1 << 32 {
        return Err(Error::Domain(format!("n = {n} and reps = {reps} must lie in [1, 2^32)")));
    }
    let ev = event.resolve(model)?;
    let target = ev.threshold * n as f64;
    let slack = 1e-12 * target.abs().max(1.0);
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<u64> {
            let mut rng = StreamKey::new(seed, ((n as u64) << 32) | r).rng();
            let mut sum = 0.0;
            for _ in 0..n {
                let x = model.proposal().sample(&mut rng);
                if ev.set.contains(x) {
                    sum += model.wf(x)?;
                }
            }
            let hit = if ev.at_least { sum >= target - slack } else { sum <= target + slack };
            Ok(u64::from(hit))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p_hat = hits as f64 / reps as f64;
    let std_err = (p_hat * (1.0 - p_hat) / reps as f64).sqrt();
    let neg_log_rate = if hits > 0 { Some(-p_hat.ln() / n as f64) } else { None };
    Ok(EventEstimate { n, reps, hits, p_hat, std_err, neg_log_rate })
}

/// Large-deviations rate predicted for an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PredictedRate {
    Quantile(QuantileRateResult),
    Set(TiltSolution),
}

impl PredictedRate {
    pub fn value(&self) -> f64 {
        match self {
            PredictedRate::Quantile(q) => q.rate.value,
            PredictedRate::Set(s) => s.rate.value,
        }
    }
}

pub fn predicted_event_rate(model: &ImportanceModel, event: &EventSpec) -> Result<PredictedRate> {
    match event {
        EventSpec::QuantileExceedance { alpha, eps } => Ok(PredictedRate::Quantile(quantile_rate(model, *alpha, *eps, Side::Plus)?)),
        _ => {
            let ev = event.resolve(model)?;
            let side = if ev.at_least { Side::Plus } else { Side::Minus };
            Ok(PredictedRate::Set(tilted_rate(&WeightedIndicator::new(model, ev.set), ev.threshold, side)?))
        }
    }
}

/// `log P(Bin(n, p) ≥ k)`, summed in log space.
pub fn log_binomial_tail(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} must lie in [0, 1]")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if k > n {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let lf = log_factorials(n as usize);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut acc = Lse::new();
    for i in k..=n {
        let (i, nn) = (i as usize, n as usize);
        acc.add(lf[nn] - lf[i] - lf[nn - i] + i as f64 * lp + (nn - i) as f64 * lq);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares fit of `−log p̂_n ≈ intercept + slope · n`.
pub fn rate_slope_fit(n_values: &[usize], p_hats: &[f64]) -> Result<SlopeFit> {
    if n_values.len() != p_hats.len() {
        return Err(Error::Domain("n list and p list differ in length".into()));
    }
    if n_values.len() < 3 {
        return Err(Error::Domain("slope fit needs at least three points".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("n list must be strictly increasing".into()));
    }
    if let Some(p) = p_hats.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::Domain(format!(
            "p̂ = {p} is not in (0, 1]; increase reps or decrease n so every point has a hit"
        )));
    }
    let m = n_values.len() as f64;
    let xs: Vec<f64> = n_values.iter().map(|n| *n as f64).collect();
    let ys: Vec<f64> = p_hats.iter().map(|p| -p.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit { slope, intercept: my - slope * mx })
}
