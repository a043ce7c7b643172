//! Subset-performance rates: threshold sets `C_t`, the level `t̃_δ`, the rates
//! of over- and under-weighting, and the random-walk and zero-variance
//! special cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::solve_bracketed;
use crate::prob_models::{FiniteDistribution, ImportanceFunction, ImportanceModel, Interval, LikelihoodRatio, Region, ScalarDistribution};
use crate::rate_functions::{gamma_minus, gamma_plus, sample_size, solve_kappa_prime, LogMgf, RateValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn gamma(self, eps: f64, s: f64) -> Result<RateValue> {
        match self {
            Side::Plus => gamma_plus(eps, s),
            Side::Minus => gamma_minus(eps, s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetRepresentation {
    Intervals { intervals: Vec<Interval> },
    Points { points: Vec<f64> },
}

/// `C_t = {x ∈ A : dF/dF̃(x) ≥ t}` with its masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    #[serde(with = "crate::serde_ext")]
    pub t: f64,
    pub target_set: Region,
    pub realized_mass_f: f64,
    pub realized_mass_ftilde: f64,
    pub representation: SetRepresentation,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl ThresholdSet {
    pub fn is_empty(&self) -> bool {
        match &self.representation {
            SetRepresentation::Intervals { intervals } => intervals.is_empty(),
            SetRepresentation::Points { points } => points.is_empty(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match &self.representation {
            SetRepresentation::Intervals { intervals } => intervals.iter().any(|i| i.contains(x)),
            SetRepresentation::Points { points } => points.contains(&x),
        }
    }
}

fn interval_set(model: &ImportanceModel, t: f64, intervals: Vec<Interval>, diagnostics: Vec<String>) -> ThresholdSet {
    let intervals: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
    let mf = intervals.iter().map(|i| model.target().prob_interval(i)).sum::<f64>().clamp(0.0, 1.0);
    let mt = intervals.iter().map(|i| model.proposal().prob_interval(i)).sum::<f64>().clamp(0.0, 1.0);
    ThresholdSet {
        t,
        target_set: model.support(),
        realized_mass_f: mf,
        realized_mass_ftilde: mt,
        representation: SetRepresentation::Intervals { intervals },
        diagnostics,
    }
}

fn point_set(model: &ImportanceModel, t: f64, points: Vec<f64>) -> ThresholdSet {
    let f = model.target().as_finite().expect("finite model");
    let g = model.proposal().as_finite().expect("finite model");
    let mf = points.iter().map(|x| f.pmf(*x)).sum::<f64>().clamp(0.0, 1.0);
    let mt = points.iter().map(|x| g.pmf(*x)).sum::<f64>().clamp(0.0, 1.0);
    ThresholdSet {
        t,
        target_set: model.support(),
        realized_mass_f: mf,
        realized_mass_ftilde: mt,
        representation: SetRepresentation::Points { points },
        diagnostics: Vec::new(),
    }
}

/// Alphabet points of a finite model that lie in `A`.
fn support_points(model: &ImportanceModel) -> Vec<f64> {
    let d = model.target().as_finite().expect("finite model");
    let a = model.support();
    d.points().iter().copied().filter(|x| a.contains(*x)).collect()
}

/// `{x : c0 + c1 x + c2 x² ≥ level}` as at most two intervals.
fn quadratic_superlevel(c0: f64, c1: f64, c2: f64, level: f64) -> Vec<Interval> {
    if level == f64::NEG_INFINITY {
        return vec![Interval::all()];
    }
    if level == f64::INFINITY {
        return Vec::new();
    }
    let c = c0 - level;
    if c2 == 0.0 {
        if c1 == 0.0 {
            return if c >= 0.0 { vec![Interval::all()] } else { Vec::new() };
        }
        let x = -c / c1;
        return if c1 > 0.0 { vec![Interval::at_least(x)] } else { vec![Interval::at_most(x)] };
    }
    let disc = c1 * c1 - 4.0 * c2 * c;
    if disc < 0.0 {
        return if c2 > 0.0 { vec![Interval::all()] } else { Vec::new() };
    }
    // stable roots of c2 x² + c1 x + c
    let qd = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let (mut r1, mut r2) = if qd == 0.0 {
        let r = (-c / c2).abs().sqrt();
        (-r, r)
    } else {
        (qd / c2, c / qd)
    };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if c2 > 0.0 {
        vec![Interval::at_most(r1), Interval::at_least(r2)]
    } else {
        vec![Interval::closed(r1, r2)]
    }
}

/// Superlevel set of a black-box ratio on `A`, by grid scan and bisection.
fn numeric_superlevel(model: &ImportanceModel, a: &Interval, t: f64) -> (Vec<Interval>, String) {
    const GRID: usize = 4001;
    let (l1, h1) = model.target().effective_support();
    let (l2, h2) = model.proposal().effective_support();
    let lo = a.lo.max(l1.min(l2));
    let hi = a.hi.min(h1.max(h2));
    let note = format!("superlevel set located numerically on a {GRID}-point grid over [{lo}, {hi}]");
    if !(lo < hi) {
        return (Vec::new(), note);
    }
    let inside = |x: f64| model.ratio_at(x) >= t;
    let refine = |mut a: f64, mut b: f64| {
        // a inside-state differs from b
        let sa = inside(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if inside(m) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        if sa { a } else { b }
    };
    let step = (hi - lo) / (GRID - 1) as f64;
    let mut out = Vec::new();
    let mut start = if inside(lo) { Some(if lo == a.lo { a.lo } else { f64::NEG_INFINITY }) } else { None };
    let mut prev = lo;
    for i in 1..GRID {
        let x = if i == GRID - 1 { hi } else { lo + step * i as f64 };
        match (start, inside(x)) {
            (None, true) => start = Some(refine(x, prev)),
            (Some(s), false) => {
                let e = refine(prev, x);
                out.push(Interval::closed(s, e));
                start = None;
            }
            _ => {}
        }
        prev = x;
    }
    if let Some(s) = start {
        let e = if hi == a.hi { a.hi } else { f64::INFINITY };
        out.push(Interval::new(s, e, true, true));
    }
    let out = out.into_iter().map(|i| i.intersect(a)).collect();
    (out, note)
}

/// `C_t` for the model's importance set `A`.
pub fn threshold_set(model: &ImportanceModel, t: f64) -> Result<ThresholdSet> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("threshold t = {t} must be nonnegative")));
    }
    if model.is_finite() {
        let pts = support_points(model).into_iter().filter(|x| model.ratio_at(*x) >= t).collect();
        return Ok(point_set(model, t, pts));
    }
    let a = match model.support() {
        Region::Interval(i) => i,
        Region::Points { .. } => return Ok(interval_set(model, t, Vec::new(), Vec::new())),
    };
    match model.ratio() {
        LikelihoodRatio::LogQuadratic { c0, c1, c2 } => {
            let parts = quadratic_superlevel(*c0, *c1, *c2, t.ln());
            Ok(interval_set(model, t, parts.iter().map(|p| p.intersect(&a)).collect(), Vec::new()))
        }
        LikelihoodRatio::Unit | LikelihoodRatio::Constant(_) => {
            let r = model.ratio_at(a.lo.max(-1e300));
            let parts = if r >= t { vec![a] } else { Vec::new() };
            Ok(interval_set(model, t, parts, Vec::new()))
        }
        LikelihoodRatio::Custom(_) => {
            let (parts, note) = numeric_superlevel(model, &a, t);
            Ok(interval_set(model, t, parts, vec![note]))
        }
        LikelihoodRatio::Table(_) => Err(Error::InvalidModel("ratio table on a continuous model".into())),
    }
}

/// Outcome of searching for `t̃_δ` with `F(C_t̃) = δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThresholdSolution {
    Exact { set: ThresholdSet },
    /// No level attains `δ`: `lower` has `F(C) ≥ δ`, `upper` has `F(C) ≤ δ`.
    Bracket { lower: ThresholdSet, upper: ThresholdSet },
}

fn check_delta(model: &ImportanceModel, delta: f64) -> Result<f64> {
    let fa = model.target_mass();
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    if delta > fa * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("delta = {delta} exceeds F(A) = {fa}")));
    }
    Ok(fa)
}

/// Find `t̃_δ`, or the pair of threshold sets straddling `δ`.
pub fn solve_t_delta(model: &ImportanceModel, delta: f64) -> Result<ThresholdSolution> {
    let fa = check_delta(model, delta)?;
    if delta >= fa {
        return Ok(ThresholdSolution::Exact { set: threshold_set(model, 0.0)? });
    }
    if let Some(r) = model.constant_ratio_on_support() {
        return Ok(ThresholdSolution::Bracket {
            lower: threshold_set(model, r)?,
            upper: threshold_set(model, f64::INFINITY)?,
        });
    }
    if model.is_finite() {
        let mut levels: Vec<f64> = support_points(model).iter().map(|x| model.ratio_at(*x)).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let mut above = threshold_set(model, f64::INFINITY)?;
        for &t in &levels {
            let set = threshold_set(model, t)?;
            if (set.realized_mass_f - delta).abs() <= 1e-12 * delta.max(1e-300) {
                return Ok(ThresholdSolution::Exact { set });
            }
            if set.realized_mass_f > delta {
                return Ok(ThresholdSolution::Bracket { lower: set, upper: above });
            }
            above = set;
        }
        // only reachable through rounding at δ ≈ F(A)
        return Ok(ThresholdSolution::Exact { set: threshold_set(model, 0.0)? });
    }

    // continuous: t ↦ F(C_t) is nonincreasing; search in s = log t
    let mass = |s: f64| threshold_set(model, s.exp()).map(|c| c.realized_mass_f);
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut k = 0;
    while mass(lo)? < delta {
        lo *= 2.0;
        k += 1;
        if lo < -1e6 || k > 60 {
            return Err(Error::RootFinding(format!("F(C_t) stays below δ = {delta} as t → 0")));
        }
    }
    k = 0;
    while mass(hi)? > delta {
        hi *= 2.0;
        k += 1;
        if hi > 1e6 || k > 60 {
            return Err(Error::RootFinding(format!("F(C_t) stays above δ = {delta} as t → ∞")));
        }
    }
    let tol = 1e-10f64.min(1e-10 * delta);
    let mut failure = None;
    let root = solve_bracketed(
        |s| match mass(s) {
            Ok(m) => m - delta,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let root = root?;
    if root.converged {
        return Ok(ThresholdSolution::Exact { set: threshold_set(model, root.x.exp())? });
    }
    let (a, b) = root.bracket;
    let (s_lo, s_hi) = if a < b { (a, b) } else { (b, a) };
    Ok(ThresholdSolution::Bracket {
        lower: threshold_set(model, s_lo.exp())?,
        upper: threshold_set(model, s_hi.exp())?,
    })
}

/// Rate of one side with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub side: Side,
    /// Point value when `t̃_δ` exists or the ratio is constant on `A`.
    pub rate: Option<RateValue>,
    /// `(lower, upper)` sandwich otherwise.
    pub bounds: Option<(RateValue, RateValue)>,
    /// From `rate`, or from the lower bound when only bounds exist.
    pub sample_size: Option<u64>,
    #[serde(with = "crate::serde_ext::option", default, skip_serializing_if = "Option::is_none")]
    pub cost_reduction: Option<f64>,
}

impl SideReport {
    /// The point rate, else the conservative lower bound.
    pub fn conservative_rate(&self) -> Option<RateValue> {
        self.rate.or(self.bounds.map(|b| b.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetPerfReport {
    pub eps: f64,
    pub delta: f64,
    pub error_prob: f64,
    pub threshold: ThresholdSolution,
    /// `F̃(C)` entering the γ functions; `None` in the bracketed case.
    #[serde(with = "crate::serde_ext::option")]
    pub ftilde_mass: Option<f64>,
    pub plus: SideReport,
    pub minus: Option<SideReport>,
    pub diagnostics: Vec<String>,
}

impl SubsetPerfReport {
    pub fn side(&self, side: Side) -> Option<&SideReport> {
        match side {
            Side::Plus => Some(&self.plus),
            Side::Minus => self.minus.as_ref(),
        }
    }
}

/// Query for [`subset_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetQuery {
    pub eps: f64,
    pub delta: f64,
    /// Target error probability for the sample-size conversion.
    pub error_prob: f64,
    /// Relative per-sample cost `c`; enables the cost-reduction ratio against standard MC.
    #[serde(default)]
    pub cost_factor: Option<f64>,
}

fn side_report(side: Side, eps: f64, q: &SubsetQuery, point: Option<f64>, bracket: Option<(f64, f64)>) -> Result<SideReport> {
    let rate = point.map(|s| side.gamma(eps, s)).transpose()?;
    let bounds = match bracket {
        Some((lo_mass, hi_mass)) => Some((side.gamma(eps, lo_mass)?, side.gamma(eps, hi_mass)?)),
        None => None,
    };
    let conservative = rate.or(bounds.map(|b| b.0));
    let n = match conservative {
        Some(r) if r.value > 0.0 => Some(sample_size(r, q.error_prob)?),
        _ => None,
    };
    let cost_reduction = match (q.cost_factor, rate) {
        (Some(c), Some(r)) => {
            let mc = side.gamma(eps, q.delta)?;
            Some(cost_reduction(mc, r, c)?)
        }
        _ => None,
    };
    Ok(SideReport { side, rate, bounds, sample_size: n, cost_reduction })
}

/// Rates of mis-weighting some `C ⊂ A` with `F(C) ≥ δ` by a relative `ε`.
///
/// When `dF/dF̃ ≡ r` on `A` every `C` with `F(C) = δ` has `F̃(C) = δ/r`, so the
/// rate is `γ(δ/r)` directly. Otherwise the rate is `γ(F̃(C_t̃))` when `t̃_δ`
/// exists, and a sandwich from the straddling threshold sets when it does not.
pub fn subset_rate(model: &ImportanceModel, q: &SubsetQuery) -> Result<SubsetPerfReport> {
    if !(q.eps > 0.0 && q.eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {} must be positive", q.eps)));
    }
    if !(q.error_prob > 0.0 && q.error_prob < 1.0) {
        return Err(Error::Domain(format!("error probability {} must lie in (0, 1)", q.error_prob)));
    }
    if let Some(c) = q.cost_factor {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("cost factor {c} must be positive")));
        }
    }
    let threshold = solve_t_delta(model, q.delta)?;
    let mut diagnostics = Vec::new();
    let (point, bracket) = match (&threshold, model.constant_ratio_on_support()) {
        (ThresholdSolution::Exact { set }, _) => (Some(set.realized_mass_ftilde), None),
        (ThresholdSolution::Bracket { .. }, Some(r)) => {
            diagnostics.push(format!(
                "likelihood ratio is constant ({r}) on A; every C with F(C) = δ has F̃(C) = δ/{r}"
            ));
            (Some((q.delta / r).min(1.0)), None)
        }
        (ThresholdSolution::Bracket { lower, upper }, None) => {
            diagnostics.push("no threshold attains δ exactly; reporting the threshold-set sandwich".into());
            (None, Some((upper.realized_mass_ftilde, lower.realized_mass_ftilde)))
        }
    };
    let plus = side_report(Side::Plus, q.eps, q, point, bracket)?;
    let minus = if q.eps <= 1.0 {
        Some(side_report(Side::Minus, q.eps, q, point, bracket)?)
    } else {
        diagnostics.push("minus side needs eps ≤ 1".into());
        None
    };
    Ok(SubsetPerfReport {
        eps: q.eps,
        delta: q.delta,
        error_prob: q.error_prob,
        threshold,
        ftilde_mass: point,
        plus,
        minus,
        diagnostics,
    })
}

/// `c · I^MC / I^IS`, the approximate cost ratio of importance sampling over standard MC.
pub fn cost_reduction(rate_mc: RateValue, rate_is: RateValue, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("cost factor {c} must be positive")));
    }
    if rate_is.value == 0.0 {
        return Err(Error::ZeroRate);
    }
    if rate_is.is_infinite() {
        if rate_mc.is_infinite() {
            return Err(Error::Numerical("both rates are infinite".into()));
        }
        return Ok(0.0);
    }
    Ok(c * rate_mc.value / rate_is.value)
}

/// Exponential-tilt analysis of `S_m/m ≥ a` using only the increment `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkTilt {
    pub a: f64,
    pub m: u32,
    pub eps: f64,
    pub delta: f64,
    pub theta_a: f64,
    /// `θ_a a − κ(θ_a)`
    pub exponent: f64,
    /// `e^{m(θ_a a − κ(θ_a))} δ`, a lower bound on `F̃_θ(C_t̃)`.
    pub mass_bound: f64,
    pub rate_mc: RateValue,
    /// `γ⁺_ε(mass_bound)`
    pub rate_lower_bound: RateValue,
    /// `c γ⁺_ε(δ) / γ⁺_ε(mass_bound)`; `None` if the bound makes `γ⁺` infeasible.
    #[serde(with = "crate::serde_ext::option")]
    pub cost_reduction_bound: Option<f64>,
}

pub fn random_walk_tilt(kappa: &dyn LogMgf, a: f64, m: u32, eps: f64, delta: f64, cost: f64) -> Result<RandomWalkTilt> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let mean = kappa.kappa_prime(0.0);
    if !(a > mean) {
        return Err(Error::Domain(format!("a = {a} must exceed the increment mean {mean}")));
    }
    let theta = solve_kappa_prime(kappa, a)?.ok_or_else(|| {
        Error::RootFinding(format!(
            "κ′(θ) never reaches a = {a}; κ′ ranges over [{mean}, {}) on θ ≥ 0",
            kappa.kappa_prime(1e6)
        ))
    })?;
    let exponent = theta * a - kappa.kappa(theta);
    let mass_bound = (m as f64 * exponent).exp() * delta;
    let rate_mc = gamma_plus(eps, delta)?;
    let rate_lower_bound = if mass_bound <= 1.0 { gamma_plus(eps, mass_bound)? } else { RateValue::infeasible() };
    let cost_reduction_bound = if rate_lower_bound.feasible {
        Some(cost_reduction(rate_mc, rate_lower_bound, cost)?)
    } else {
        None
    };
    Ok(RandomWalkTilt { a, m, eps, delta, theta_a: theta, exponent, mass_bound, rate_mc, rate_lower_bound, cost_reduction_bound })
}

/// Increment law of a random walk whose sum statistic is available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum IncrementLaw {
    Gaussian { mean: f64, sd: f64 },
    Bernoulli { p: f64 },
}

impl IncrementLaw {
    pub fn distribution(&self) -> Result<ScalarDistribution> {
        match *self {
            IncrementLaw::Gaussian { mean, sd } => ScalarDistribution::gaussian(mean, sd),
            IncrementLaw::Bernoulli { p } => ScalarDistribution::bernoulli(p),
        }
    }

    /// `p_m = P(S_m ≥ m a)`
    pub fn p_m(&self, m: u32, a: f64) -> Result<f64> {
        let mf = m as f64;
        match *self {
            IncrementLaw::Gaussian { mean, sd } => Ok(ScalarDistribution::gaussian(mf * mean, sd * mf.sqrt())?.prob_interval(&Interval::at_least(mf * a))),
            IncrementLaw::Bernoulli { p } => {
                Ok(FiniteDistribution::binomial(m, p)?.prob_interval(&Interval::at_least(mf * a)))
            }
        }
    }

    /// Model for the sum `S_m` under `F` and the `θ`-tilted proposal, with `A = [m a, ∞)`.
    pub fn sum_model(&self, m: u32, theta: f64, a: f64) -> Result<ImportanceModel> {
        let mf = m as f64;
        let imp = ImportanceFunction::Interval(Interval::at_least(mf * a));
        match *self {
            IncrementLaw::Gaussian { mean, sd } => {
                Ok(ImportanceModel::gaussian_tilt(mf * mean, sd * mf.sqrt(), theta, imp)?.with_label("gaussian-walk"))
            }
            IncrementLaw::Bernoulli { p } => {
                let kappa = ((1.0 - p) + p * theta.exp()).ln();
                let pt = p * theta.exp() / ((1.0 - p) + p * theta.exp());
                let f = FiniteDistribution::binomial(m, p)?;
                let g = FiniteDistribution::binomial(m, pt)?;
                let ratio = f.points().iter().map(|k| (mf * kappa - theta * k).exp()).collect();
                Ok(ImportanceModel::user_table(f, g, imp, ratio)?.with_label("bernoulli-walk"))
            }
        }
    }
}

/// [`RandomWalkTilt`] plus the realized `F̃_θ(C_t̃)` from the sum model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkReport {
    pub law: IncrementLaw,
    pub delta_prime: f64,
    pub p_m: f64,
    pub tilt: RandomWalkTilt,
    /// `F̃_θ(C_t̃)`; for a bracket, the smaller (`F(C) ≤ δ`) set's mass.
    pub realized_mass: f64,
    pub realized_rate: Option<RateValue>,
    pub bound_holds: bool,
}

/// Full random-walk analysis with `δ = δ′ p_m` and `θ = θ_a`.
pub fn random_walk_analysis(law: IncrementLaw, a: f64, m: u32, eps: f64, delta_prime: f64, cost: f64) -> Result<RandomWalkReport> {
    if !(delta_prime > 0.0 && delta_prime <= 1.0) {
        return Err(Error::Domain(format!("delta' = {delta_prime} must lie in (0, 1]")));
    }
    let inc = law.distribution()?;
    let p_m = law.p_m(m, a)?;
    if !(p_m > 0.0) {
        return Err(Error::Numerical(format!("P(S_m ≥ m a) underflows for m = {m}, a = {a}")));
    }
    let delta = delta_prime * p_m;
    let tilt = random_walk_tilt(&inc, a, m, eps, delta, cost)?;
    let model = law.sum_model(m, tilt.theta_a, a)?;
    let (realized_mass, exact) = match solve_t_delta(&model, delta.min(model.target_mass()))? {
        ThresholdSolution::Exact { set } => (set.realized_mass_ftilde, true),
        ThresholdSolution::Bracket { upper, .. } => (upper.realized_mass_ftilde, false),
    };
    let realized_rate = if exact { Some(gamma_plus(eps, realized_mass)?) } else { None };
    // relative slack for the rounding in F̃(C) and the bound itself
    let bound_holds = realized_mass >= tilt.mass_bound * (1.0 - 1e-9) || !exact;
    Ok(RandomWalkReport { law, delta_prime, p_m, tilt, realized_mass, realized_rate, bound_holds })
}

/// `γ⁺_ε(δ′p)` and its small-`p` linearization `p δ′[(1+ε)log(1+ε) − ε]`.
pub fn small_p_expansion(eps: f64, delta_prime: f64, p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&delta_prime) {
        return Err(Error::Domain(format!("delta' = {delta_prime} must lie in [0, 1]")));
    }
    let exact = gamma_plus(eps, delta_prime * p)?.value;
    let leading = p * delta_prime * ((1.0 + eps) * eps.ln_1p() - eps);
    Ok((exact, leading))
}
