//! Quantile functional `Φ_α(ν) = inf{x : ν((x, ∞)) ≤ α}` and the rate of
//! over- or under-estimating `Φ_α(F)` by a relative `ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, log_sum_exp, solve_bracketed};
use crate::prob_models::{ImportanceModel, Interval, LikelihoodRatio, Region, ScalarDistribution, WeightedEmpiricalMeasure};
use crate::rate_functions::{binary_relative_entropy, RateValue};
use crate::subset_analysis::Side;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// `Φ_α` of a finite atomic measure given as `(location, mass)` pairs.
/// Returns `-∞` when the total mass is at most `α`.
pub fn quantile_of_atoms(atoms: &[(f64, f64)], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|a| a.1).sum();
    if total <= alpha {
        return Ok(f64::NEG_INFINITY);
    }
    let mut grouped: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (x, m) in sorted {
        match grouped.last_mut() {
            Some(last) if last.0 == x => last.1 += m,
            _ => grouped.push((x, m)),
        }
    }
    // walk down from the top; ν((x_j, ∞)) is summed from the top to avoid cancellation
    let mut tail = 0.0;
    let mut answer = f64::NEG_INFINITY;
    for &(x, m) in grouped.iter().rev() {
        if tail > alpha {
            break;
        }
        answer = x;
        tail += m;
    }
    Ok(answer)
}

pub fn quantile_of_measure(nu: &WeightedEmpiricalMeasure, alpha: f64) -> Result<f64> {
    let atoms: Vec<(f64, f64)> = nu.atoms().collect();
    quantile_of_atoms(&atoms, alpha)
}

pub fn quantile_of_distribution(d: &ScalarDistribution, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(d.upper_quantile(alpha))
}

/// `k(x) = 1{x ∈ S}·w(x)` for a model and a set `S`.
pub struct WeightedIndicator<'a> {
    model: &'a ImportanceModel,
    set: Region,
}

enum Domain {
    Finite(Vec<(f64, f64)>),
    Constant { ratio: f64, mass: f64 },
    Quadrature(Option<Interval>),
}

impl<'a> WeightedIndicator<'a> {
    pub fn new(model: &'a ImportanceModel, set: Region) -> Self {
        Self { model, set }
    }

    /// `k(x) = 1{x > q}·w(x)`
    pub fn above(model: &'a ImportanceModel, q: f64) -> Self {
        Self::new(model, Region::Interval(Interval::greater_than(q)))
    }

    pub fn k(&self, x: f64) -> Result<f64> {
        if self.set.contains(x) {
            self.model.weight(x)
        } else {
            Ok(0.0)
        }
    }

    fn domain(&self) -> Result<Domain> {
        let model = self.model;
        if let Some(d) = model.proposal().as_finite() {
            let pairs = d
                .points()
                .iter()
                .zip(d.probs())
                .filter(|(_, q)| **q > 0.0)
                .map(|(x, q)| Ok((*q, self.k(*x)?)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Domain::Finite(pairs));
        }
        let s = match &self.set {
            Region::Interval(i) => *i,
            Region::Points { .. } => return Ok(Domain::Quadrature(None)),
        };
        let i = match model.support() {
            Region::Interval(a) => s.intersect(&a),
            Region::Points { .. } => return Ok(Domain::Quadrature(None)),
        };
        if i.is_empty() {
            return Ok(Domain::Quadrature(None));
        }
        if let Some(r) = model.constant_ratio_on_support() {
            return Ok(Domain::Constant { ratio: r, mass: model.proposal().prob_interval(&i) });
        }
        let (lo, hi) = model.proposal().effective_support();
        let clipped = i.intersect(&Interval::closed(lo, hi));
        Ok(Domain::Quadrature(if clipped.is_empty() { None } else { Some(clipped) }))
    }

    /// Reject `λ > 0` when `w` grows without bound along an unbounded `S ∩ A`.
    fn check_growth(&self, lambda: f64) -> Result<()> {
        if lambda <= 0.0 {
            return Ok(());
        }
        let i = match (&self.set, self.model.support()) {
            (Region::Interval(s), Region::Interval(a)) => s.intersect(&a),
            _ => return Ok(()),
        };
        if let LikelihoodRatio::LogQuadratic { c1, c2, .. } = self.model.ratio() {
            let up = i.hi == f64::INFINITY && (*c2 > 0.0 || (*c2 == 0.0 && *c1 > 0.0));
            let down = i.lo == f64::NEG_INFINITY && (*c2 > 0.0 || (*c2 == 0.0 && *c1 < 0.0));
            if up || down {
                return Err(Error::Divergence(format!(
                    "w grows exponentially on the unbounded set {i:?}, so ∫ exp(λ k) dF̃ = ∞ for λ = {lambda}"
                )));
            }
        }
        Ok(())
    }

    /// `(log M(λ), M′(λ)/M(λ))`
    pub fn log_mgf_and_mean(&self, lambda: f64) -> Result<(f64, f64)> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be finite")));
        }
        self.check_growth(lambda)?;
        match self.domain()? {
            Domain::Finite(pairs) => {
                let terms: Vec<f64> = pairs.iter().map(|(q, k)| q.ln() + lambda * k).collect();
                let lm = log_sum_exp(&terms);
                let mean = pairs.iter().zip(&terms).map(|((_, k), t)| k * (t - lm).exp()).sum();
                Ok((lm, mean))
            }
            Domain::Constant { ratio: r, mass: p } => {
                let lr = lambda * r;
                let lm = if lr > 0.0 {
                    lr + (p + (1.0 - p) * (-lr).exp()).ln()
                } else {
                    (p * lr.exp_m1()).ln_1p()
                };
                let mean = r * p * (lr - lm).exp();
                Ok((lm, mean))
            }
            Domain::Quadrature(None) => Ok((0.0, 0.0)),
            Domain::Quadrature(Some(i)) => {
                let dens = |x: f64| self.model.proposal().density(x);
                let w = |x: f64| self.model.ratio_at(x);
                let mut bad = None;
                let excess = integrate(
                    |x| {
                        let d = dens(x);
                        if d == 0.0 {
                            return 0.0;
                        }
                        let lw = lambda * w(x);
                        if !lw.is_finite() {
                            bad.get_or_insert(x);
                        }
                        lw.exp_m1() * d
                    },
                    i.lo,
                    i.hi,
                    1e-12,
                    1e-300,
                )
                .map_err(|e| match e {
                    Error::Divergence(m) => Error::Divergence(format!("M({lambda}): {m}")),
                    other => other,
                })?;
                if let Some(x) = bad {
                    return Err(Error::Divergence(format!("λ·w overflows at x = {x} for λ = {lambda}")));
                }
                let m = 1.0 + excess.0;
                if !(m.is_finite() && m > 0.0) {
                    return Err(Error::Divergence(format!("M({lambda}) = {m}")));
                }
                let (d1, _) = integrate(
                    |x| {
                        let d = dens(x);
                        if d == 0.0 {
                            return 0.0;
                        }
                        let wx = w(x);
                        wx * (lambda * wx).exp() * d
                    },
                    i.lo,
                    i.hi,
                    1e-12,
                    1e-300,
                )?;
                if !d1.is_finite() {
                    return Err(Error::Divergence(format!("M′({lambda}) is not finite")));
                }
                Ok((m.ln(), d1 / m))
            }
        }
    }

    /// Essential range of `k` under `F̃`, used to detect infeasible levels.
    fn k_range(&self) -> Result<(f64, f64)> {
        Ok(match self.domain()? {
            Domain::Finite(pairs) => pairs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, k)| (lo.min(*k), hi.max(*k))),
            Domain::Constant { ratio, mass } => {
                if mass >= 1.0 {
                    (ratio, ratio)
                } else if mass <= 0.0 {
                    (0.0, 0.0)
                } else {
                    (0.0, ratio)
                }
            }
            Domain::Quadrature(_) => (0.0, f64::INFINITY),
        })
    }
}

/// `M(λ) = ∫ e^{λ k} dF̃` with `k(x) = 1{x > q}·w(x)`.
pub fn mgf_weighted_indicator(model: &ImportanceModel, q: f64, lambda: f64) -> Result<f64> {
    let (lm, _) = WeightedIndicator::above(model, q).log_mgf_and_mean(lambda)?;
    let m = lm.exp();
    if !m.is_finite() {
        return Err(Error::Divergence(format!("M({lambda}) overflows")));
    }
    Ok(m)
}

/// Dual solution of `inf{H(G | F̃) : ∫ k dG ≥ level}` (plus) or `≤ level` (minus).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltSolution {
    pub lambda: f64,
    pub log_m: f64,
    /// `∫ k dF̃`
    pub mean_k: f64,
    pub rate: RateValue,
}

pub fn tilted_rate(k: &WeightedIndicator<'_>, level: f64, side: Side) -> Result<TiltSolution> {
    let (_, mean_k) = k.log_mgf_and_mean(0.0)?;
    let dir = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    if dir * (mean_k - level) >= 0.0 {
        return Ok(TiltSolution { lambda: 0.0, log_m: 0.0, mean_k, rate: RateValue::finite(0.0) });
    }
    let (klo, khi) = k.k_range()?;
    let unreachable = match side {
        Side::Plus => level > khi,
        Side::Minus => level < klo,
    };
    if unreachable {
        return Ok(TiltSolution { lambda: f64::NAN, log_m: f64::NAN, mean_k, rate: RateValue::infeasible() });
    }
    let gap = |l: f64| k.log_mgf_and_mean(l).map(|(_, m)| m - level);
    let mut inner = 0.0;
    let mut outer = dir;
    let mut n = 0;
    while dir * gap(outer)? < 0.0 {
        inner = outer;
        outer *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::RootFinding(format!("tilted mean never reaches {level}")));
        }
    }
    let mut failure = None;
    let root = solve_bracketed(
        |l| match gap(l) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        inner,
        outer,
        1e-12,
        400,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let root = root?;
    if root.fx.abs() > 1e-10 {
        return Err(Error::RootFinding(format!("|M′/M − α| = {} after {} iterations", root.fx.abs(), root.iterations)));
    }
    let (log_m, _) = k.log_mgf_and_mean(root.x)?;
    let rate = (root.x * level - log_m).max(0.0);
    Ok(TiltSolution { lambda: root.x, log_m, mean_k, rate: RateValue::finite(rate) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRateResult {
    pub side: Side,
    pub alpha: f64,
    pub eps: f64,
    /// `Φ_α(F)`
    pub phi_alpha: f64,
    /// `q = (1 ± ε)Φ_α(F)`
    pub q_target: f64,
    /// `F((q, ∞))`
    pub p_target: f64,
    #[serde(with = "crate::serde_ext")]
    pub lambda_star: f64,
    #[serde(with = "crate::serde_ext")]
    pub log_m: f64,
    pub rate: RateValue,
    pub minimizer_note: String,
    pub diagnostics: Vec<String>,
}

/// Rate of `{ν : Φ_α(ν) ≥ (1+ε)Φ_α(F)}` (plus) or `{ν : Φ_α(ν) ≤ (1−ε)Φ_α(F)}` (minus).
///
/// Both reduce to a constraint on `ν((q, ∞)) = ∫ 1{x > q} w dG` and are solved
/// by exponential tilting of `k(x) = 1{x > q} w(x)`.
pub fn quantile_rate(model: &ImportanceModel, alpha: f64, eps: f64, side: Side) -> Result<QuantileRateResult> {
    check_alpha(alpha)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let phi = model.target().upper_quantile(alpha);
    let q = match side {
        Side::Plus => (1.0 + eps) * phi,
        Side::Minus => (1.0 - eps) * phi,
    };
    let p_target = model.target().sf(q);
    let k = WeightedIndicator::above(model, q);
    let sol = tilted_rate(&k, alpha, side)?;
    let mut diagnostics = Vec::new();
    if sol.lambda == 0.0 {
        diagnostics.push(format!(
            "inside typical set: ∫ k dF̃ = {} already satisfies the constraint at α = {alpha}",
            sol.mean_k
        ));
    }
    if !sol.rate.feasible {
        diagnostics.push(format!("no G ≪ F̃ reaches ν((q, ∞)) = {alpha}; rate is infinite"));
    }
    if (sol.mean_k - p_target).abs() > 1e-8 * p_target.max(1e-300) {
        diagnostics.push(format!(
            "importance set does not cover (q, ∞): ∫ k dF̃ = {} but F((q, ∞)) = {p_target}",
            sol.mean_k
        ));
    }
    let minimizer_note = if sol.rate.feasible {
        format!(
            "dG*/dF̃(x) = exp({} · k(x)) / {}, k(x) = 1{{x > {q}}} w(x)",
            sol.lambda,
            sol.log_m.exp()
        )
    } else {
        "no minimizer: constraint set is empty".into()
    };
    Ok(QuantileRateResult {
        side,
        alpha,
        eps,
        phi_alpha: phi,
        q_target: q,
        p_target,
        lambda_star: sol.lambda,
        log_m: sol.log_m,
        rate: sol.rate,
        minimizer_note,
        diagnostics,
    })
}

/// Standard Monte Carlo closed form `H(α | p)`.
pub fn mc_quantile_rate(alpha: f64, p: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(p > 0.0 && p <= alpha) {
        return Err(Error::Domain(format!("need 0 < p ≤ alpha (p = {p}, alpha = {alpha})")));
    }
    Ok(binary_relative_entropy(alpha, p))
}

/// `ε` with `F(((1+ε)Φ_α(F), ∞)) = p`, for building standard-MC examples.
pub fn eps_for_tail(target: &ScalarDistribution, alpha: f64, p: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let phi = target.upper_quantile(alpha);
    if phi == 0.0 {
        return Err(Error::Domain("Φ_α(F) = 0 admits no relative perturbation".into()));
    }
    Ok(target.isf(p) / phi - 1.0)
}
