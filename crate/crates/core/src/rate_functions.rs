//! Rate-function arithmetic: the γ± closed forms, relative entropy, Legendre
//! transforms, sample sizes and the variational value of the Laplace limit on
//! finite alphabets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_bracketed, xlog_ratio};
use crate::prob_models::{FiniteDistribution, ScalarDistribution};

/// A rate in nats, possibly `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    #[serde(with = "crate::serde_ext")]
    pub value: f64,
    /// Whether the constraint set defining the rate is nonempty.
    pub feasible: bool,
}

impl RateValue {
    pub fn finite(value: f64) -> Self {
        Self { value, feasible: true }
    }

    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, feasible: true }
    }

    pub fn infeasible() -> Self {
        Self { value: f64::INFINITY, feasible: false }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s = {s} must lie in [0, 1]")));
    }
    Ok(())
}

/// `γ⁺_ε(s)`: cheapest relative entropy of a `G` with `G(C) ≥ (1+ε)s` when `F̃(C) = s`.
pub fn gamma_plus(eps: f64, s: f64) -> Result<RateValue> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    check_s(s)?;
    if s == 0.0 {
        return Ok(RateValue::finite(0.0));
    }
    let u = (1.0 + eps) * s;
    if u > 1.0 {
        return Ok(RateValue::infeasible());
    }
    let tail = if u == 1.0 { 0.0 } else { (1.0 - u) * ((-u).ln_1p() - (-s).ln_1p()) };
    Ok(RateValue::finite((u * eps.ln_1p() + tail).max(0.0)))
}

/// `γ⁻_ε(s)`: cheapest relative entropy of a `G` with `G(C) ≤ (1−ε)s` when `F̃(C) = s`.
pub fn gamma_minus(eps: f64, s: f64) -> Result<RateValue> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1]")));
    }
    check_s(s)?;
    if s == 0.0 {
        return Ok(RateValue::finite(0.0));
    }
    if s == 1.0 {
        return Ok(RateValue::infeasible());
    }
    let v = (1.0 - eps) * s;
    let head = if v == 0.0 { 0.0 } else { v * (-eps).ln_1p() };
    let tail = (1.0 - v) * ((-v).ln_1p() - (-s).ln_1p());
    Ok(RateValue::finite((head + tail).max(0.0)))
}

/// `H(a | p)` between Bernoulli laws.
pub fn binary_relative_entropy(a: f64, p: f64) -> f64 {
    xlog_ratio(a, p) + xlog_ratio(1.0 - a, 1.0 - p)
}

/// `H(g | f) = Σ g log(g/f)` on raw probability vectors.
pub fn relative_entropy_probs(g: &[f64], f: &[f64]) -> f64 {
    g.iter().zip(f).map(|(a, b)| xlog_ratio(*a, *b)).sum::<f64>().max(0.0)
}

pub fn relative_entropy(g: &FiniteDistribution, f: &FiniteDistribution) -> Result<RateValue> {
    if g.points() != f.points() {
        return Err(Error::Domain("relative entropy needs a common alphabet".into()));
    }
    let h = relative_entropy_probs(g.probs(), f.probs());
    Ok(if h.is_finite() { RateValue::finite(h) } else { RateValue::infinite() })
}

/// A log moment generating function `κ(θ) = log E e^{θX}` with derivative.
pub trait LogMgf: Sync {
    fn kappa(&self, theta: f64) -> f64;
    fn kappa_prime(&self, theta: f64) -> f64;
    /// Open interval on which `κ` is finite.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

impl LogMgf for ScalarDistribution {
    fn kappa(&self, theta: f64) -> f64 {
        self.log_mgf(theta)
    }
    fn kappa_prime(&self, theta: f64) -> f64 {
        self.log_mgf_prime(theta)
    }
    fn domain(&self) -> (f64, f64) {
        self.log_mgf_domain()
    }
}

/// `κ` given by a pair of closures.
pub struct ClosureLogMgf<K, D> {
    pub kappa: K,
    pub kappa_prime: D,
    pub domain: (f64, f64),
}

impl<K, D> LogMgf for ClosureLogMgf<K, D>
where
    K: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    fn kappa(&self, theta: f64) -> f64 {
        (self.kappa)(theta)
    }
    fn kappa_prime(&self, theta: f64) -> f64 {
        (self.kappa_prime)(theta)
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

fn probe_convexity(k: &dyn LogMgf) -> Result<()> {
    let (lo, hi) = k.domain();
    let mut a = lo.max(-8.0);
    let mut b = hi.min(8.0);
    let width = b - a;
    if a == lo {
        a += 0.01 * width;
    }
    if b == hi {
        b -= 0.01 * width;
    }
    let mut prev = f64::NEG_INFINITY;
    for i in 0..41 {
        let theta = a + (b - a) * i as f64 / 40.0;
        let d = k.kappa_prime(theta);
        if d.is_nan() {
            return Err(Error::Numerical(format!("κ′({theta}) is NaN")));
        }
        if d < prev - 1e-9 * (1.0 + prev.abs()) {
            return Err(Error::NonConvex(format!("κ′ decreases near θ = {theta} ({prev} → {d})")));
        }
        prev = d;
    }
    Ok(())
}

/// Solve `κ′(θ) = x`; `None` when `κ′` never reaches `x` in the search direction.
pub fn solve_kappa_prime(k: &dyn LogMgf, x: f64) -> Result<Option<f64>> {
    let mean = k.kappa_prime(0.0);
    if x == mean {
        return Ok(Some(0.0));
    }
    let dir = if x > mean { 1.0 } else { -1.0 };
    let (lo, hi) = k.domain();
    let edge = if dir > 0.0 { hi } else { lo };
    let below = |t: f64| dir * (k.kappa_prime(t) - x) < 0.0;
    let mut inner = 0.0;
    let mut outer = dir;
    let mut found = false;
    for _ in 0..1100 {
        if dir * outer >= dir * edge {
            // approach a finite boundary geometrically instead of doubling past it
            outer = edge - 0.5 * (edge - inner);
            if outer == inner || outer == edge {
                break;
            }
        }
        let d = k.kappa_prime(outer);
        if d.is_nan() {
            return Err(Error::RootFinding(format!("κ′({outer}) is NaN")));
        }
        if !below(outer) {
            found = true;
            break;
        }
        inner = outer;
        outer *= 2.0;
        if !outer.is_finite() {
            break;
        }
    }
    if !found {
        return Ok(None);
    }
    let tol = 1e-12 * (1.0 + x.abs());
    let r = solve_bracketed(|t| k.kappa_prime(t) - x, inner, outer, tol, 400)?;
    Ok(Some(r.x))
}

/// `I(x) = sup_θ {θx − κ(θ)}`.
pub fn cramer_rate(k: &dyn LogMgf, x: f64) -> Result<RateValue> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x = {x} must be finite")));
    }
    probe_convexity(k)?;
    if let Some(theta) = solve_kappa_prime(k, x)? {
        let v = theta * x - k.kappa(theta);
        return Ok(RateValue::finite(v.max(0.0)));
    }
    // no interior root: follow θx − κ(θ) out to the boundary
    let dir = if x > k.kappa_prime(0.0) { 1.0 } else { -1.0 };
    let (lo, hi) = k.domain();
    let edge = if dir > 0.0 { hi } else { lo };
    let mut theta = dir;
    let mut inner = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..1100 {
        if dir * theta >= dir * edge {
            theta = edge - 0.5 * (edge - inner);
        }
        let g = theta * x - k.kappa(theta);
        if !g.is_finite() {
            break;
        }
        let slope = dir * (x - k.kappa_prime(theta));
        if slope <= 1e-9 && (g - prev).abs() <= 1e-14 * (1.0 + g.abs()) {
            return Ok(RateValue::finite(g.max(0.0)));
        }
        prev = g;
        inner = theta;
        theta *= 2.0;
        if !theta.is_finite() || theta == inner {
            break;
        }
    }
    let slope = dir * (x - k.kappa_prime(inner));
    if slope > 1e-9 {
        // x lies outside the closed convex hull of the support
        Ok(RateValue::infeasible())
    } else {
        Ok(RateValue::finite(prev.max(0.0)))
    }
}

/// Samples needed so that `e^{−n·rate} ≤ error_prob`.
pub fn sample_size(rate: RateValue, error_prob: f64) -> Result<u64> {
    if !(error_prob > 0.0 && error_prob < 1.0) {
        return Err(Error::Domain(format!("error probability {error_prob} must lie in (0, 1)")));
    }
    if rate.value.is_nan() {
        return Err(Error::Numerical("rate is NaN".into()));
    }
    if rate.value == f64::INFINITY {
        return Ok(1);
    }
    if rate.value <= 0.0 {
        return Err(Error::ZeroRate);
    }
    Ok((-error_prob.ln() / rate.value).ceil().max(1.0) as u64)
}

/// A functional `h` of a finite measure, given by its masses on the alphabet.
pub trait MeasureFunctional: Sync {
    fn eval(&self, nu: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> MeasureFunctional for F {
    fn eval(&self, nu: &[f64]) -> f64 {
        self(nu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    #[serde(with = "crate::serde_ext")]
    pub value: f64,
    /// Probability vector `G*` on the full alphabet.
    pub minimizer: Vec<f64>,
}

struct Objective<'a> {
    support: Vec<usize>,
    proposal: &'a [f64],
    wf: &'a [f64],
    h: &'a dyn MeasureFunctional,
    nu: Vec<f64>,
}

impl Objective<'_> {
    /// `h(Ψ(G)) + H(G | F̃)` with `G` given on the support.
    fn eval(&mut self, g: &[f64]) -> Result<f64> {
        self.nu.iter_mut().for_each(|v| *v = 0.0);
        let mut ent = 0.0;
        for (j, &i) in self.support.iter().enumerate() {
            self.nu[i] = self.wf[i] * g[j];
            ent += xlog_ratio(g[j], self.proposal[i]);
        }
        let hv = self.h.eval(&self.nu);
        if hv.is_nan() {
            return Err(Error::Numerical(format!("functional returned NaN at ν = {:?}", self.nu)));
        }
        Ok(hv + ent)
    }
}

/// Visit every vector of `parts` nonnegative integers summing to `total`.
fn for_each_composition(total: usize, parts: usize, mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
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
    rec(&mut Vec::with_capacity(parts), total, parts, &mut visit)
}

fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pattern_search(obj: &mut Objective<'_>, start: Vec<f64>, step0: f64) -> Result<(f64, Vec<f64>)> {
    let m = start.len();
    let mut g = start;
    let mut best = obj.eval(&g)?;
    let mut step = step0;
    let mut evals = 0usize;
    while step > 1e-13 && evals < 400_000 {
        let mut improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j || g[j] <= 0.0 {
                    continue;
                }
                let (gi, gj) = (g[i], g[j]);
                let d = step.min(gj);
                g[i] += d;
                g[j] -= d;
                let v = obj.eval(&g)?;
                evals += 1;
                if v < best {
                    best = v;
                    improved = true;
                } else {
                    g[i] = gi;
                    g[j] = gj;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, g))
}

/// `inf_G { h(Ψ(G)) + H(G | F̃) }` over probability vectors `G ≪ F̃`, where
/// `Ψ(G)(x) = wf(x)·G(x)`.
///
/// Exhaustive simplex grid followed by pairwise mass-transfer pattern search
/// from the best grid points, `F̃` and the vertices.
pub fn variational_value(proposal: &FiniteDistribution, wf: &[f64], h: &dyn MeasureFunctional) -> Result<VariationalSolution> {
    let k = proposal.len();
    if wf.len() != k {
        return Err(Error::Domain(format!("wf has {} entries for {k} alphabet points", wf.len())));
    }
    if wf.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("wf entries must be finite and nonnegative".into()));
    }
    let support: Vec<usize> = (0..k).filter(|&i| proposal.probs()[i] > 0.0).collect();
    let m = support.len();
    let mut obj = Objective { support: support.clone(), proposal: proposal.probs(), wf, h, nu: vec![0.0; k] };
    let expand = |g: &[f64]| {
        let mut full = vec![0.0; k];
        for (j, &i) in support.iter().enumerate() {
            full[i] = g[j];
        }
        full
    };
    if m == 1 {
        let g = vec![1.0];
        let value = obj.eval(&g)?;
        return Ok(VariationalSolution { value, minimizer: expand(&g) });
    }

    let mut pitch = 1usize;
    while binom(pitch + 1 + m - 1, m - 1) <= 2e5 && pitch < 4096 {
        pitch += 1;
    }
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    const KEEP: usize = 6;
    for_each_composition(pitch, m, |c| {
        let g: Vec<f64> = c.iter().map(|&v| v as f64 / pitch as f64).collect();
        let v = obj.eval(&g)?;
        if top.len() < KEEP || v < top[top.len() - 1].0 {
            top.push((v, g));
            top.sort_by(|a, b| a.0.total_cmp(&b.0));
            top.truncate(KEEP);
        }
        Ok(())
    })?;

    let mut starts: Vec<Vec<f64>> = top.into_iter().map(|t| t.1).collect();
    starts.push(support.iter().map(|&i| proposal.probs()[i]).collect());
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        starts.push(e);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        let (v, g) = pattern_search(&mut obj, s, 1.0 / pitch as f64)?;
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, g));
        }
    }
    let (value, g) = best.expect("at least one start");
    Ok(VariationalSolution { value, minimizer: expand(&g) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_plus(0.1, 0.0).unwrap().value, 0.0);
        let v = gamma_plus(0.1, 0.3).unwrap();
        assert!(v.feasible && (v.value - 2.104_602e-3).abs() < 1e-9);
        let inf = gamma_plus(0.1, 0.95).unwrap();
        assert!(!inf.feasible && inf.is_infinite());
        assert_eq!(gamma_minus(0.5, 0.0).unwrap().value, 0.0);
        assert!((gamma_minus(0.1, 0.3).unwrap().value - 2.186_526e-3).abs() < 1e-9);
        assert!((gamma_minus(1.0, 0.3).unwrap().value - (1.0f64 / 0.7).ln()).abs() < 1e-15);
        assert!(gamma_plus(0.0, 0.3).is_err());
        assert!(gamma_minus(1.5, 0.3).is_err());
        assert!(gamma_plus(0.1, 1.2).is_err());
    }

    #[test]
    fn gamma_plus_boundary_is_continuous() {
        let s = 1.0 / 1.1;
        let at = gamma_plus(0.1, s).unwrap().value;
        let near = gamma_plus(0.1, s * (1.0 - 1e-12)).unwrap().value;
        assert!((at - near).abs() < 1e-9);
        assert!((at - 1.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let f = FiniteDistribution::new(vec![0.0, 1.0], vec![0.97, 0.03]).unwrap();
        let g = FiniteDistribution::new(vec![0.0, 1.0], vec![0.95, 0.05]).unwrap();
        assert_eq!(relative_entropy(&f, &f).unwrap().value, 0.0);
        let h = relative_entropy(&g, &f).unwrap().value;
        assert!((h - 0.005_748_898_630_599_616_5).abs() < 1e-15);
        let a = FiniteDistribution::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let b = FiniteDistribution::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(relative_entropy(&a, &b).unwrap().is_infinite());
        let c = FiniteDistribution::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(relative_entropy(&a, &c).is_err());
    }

    #[test]
    fn cramer_examples() {
        let g = ScalarDistribution::standard_gaussian();
        assert_eq!(cramer_rate(&g, 0.0).unwrap().value, 0.0);
        assert!((cramer_rate(&g, 1.5).unwrap().value - 1.125).abs() < 1e-12);
        assert!((cramer_rate(&g, -2.0).unwrap().value - 2.0).abs() < 1e-12);
        let b = ScalarDistribution::bernoulli(0.5).unwrap();
        assert!((cramer_rate(&b, 1.0).unwrap().value - 2f64.ln()).abs() < 1e-12);
        assert!((cramer_rate(&b, 0.0).unwrap().value - 2f64.ln()).abs() < 1e-12);
        let out = cramer_rate(&b, 1.5).unwrap();
        assert!(out.is_infinite() && !out.feasible);
        // exponential: I(x) = λx − 1 − log(λx)
        let e = ScalarDistribution::exponential(2.0).unwrap();
        for x in [0.1f64, 0.5, 3.0] {
            let exact = 2.0 * x - 1.0 - (2.0 * x).ln();
            assert!((cramer_rate(&e, x).unwrap().value - exact).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn nonconvex_kappa_is_rejected() {
        let k = ClosureLogMgf { kappa: |t: f64| t.sin(), kappa_prime: |t: f64| t.cos(), domain: (f64::NEG_INFINITY, f64::INFINITY) };
        assert!(matches!(cramer_rate(&k, 0.5), Err(Error::NonConvex(_))));
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(sample_size(RateValue::infinite(), 0.01).unwrap(), 1);
        assert_eq!(sample_size(RateValue::finite(2f64.ln()), 0.5).unwrap(), 1);
        assert_eq!(sample_size(RateValue::finite(0.005_748_898_630_599_616_5), 0.01).unwrap(), 802);
        assert_eq!(sample_size(RateValue::finite(0.0), 0.01), Err(Error::ZeroRate));
    }

    #[test]
    fn compositions_are_complete() {
        let mut count = 0;
        for_each_composition(5, 3, |c| {
            assert_eq!(c.iter().sum::<usize>(), 5);
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 21);
    }

    #[test]
    fn variational_two_point() {
        let p = FiniteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let h = |nu: &[f64]| nu[1];
        let s = variational_value(&p, &[1.0, 1.0], &h).unwrap();
        let exact = 2f64.ln() - (1.0 + (-1.0f64).exp()).ln();
        assert!((s.value - exact).abs() < 1e-12);
        let g1 = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
        assert!((s.minimizer[1] - g1).abs() < 1e-6);
        let c = variational_value(&p, &[1.0, 1.0], &|_: &[f64]| 0.7).unwrap();
        assert!((c.value - 0.7).abs() < 1e-15);
        assert!((c.minimizer[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn variational_nan_is_an_error() {
        let p = FiniteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(variational_value(&p, &[1.0, 1.0], &|_: &[f64]| f64::NAN).is_err());
    }
}
