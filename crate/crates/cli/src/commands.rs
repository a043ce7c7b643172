use ldis_core::laplace_lab::{convergence_check, estimate_event_probability, predicted_event_rate, rate_slope_fit, SlopeFit};
use ldis_core::quantile_analysis::{eps_for_tail, quantile_rate};
use ldis_core::rate_functions::{gamma_minus, gamma_plus};
use ldis_core::subset_analysis::{random_walk_analysis, subset_rate, Side, SubsetQuery};

use crate::config::{AnalysisConfig, AnalysisSpec, SideChoice};
use crate::error::CliError;
use crate::report::{number, Results, SimulationSeries};

fn one_of<'a, T>(a: &'a Option<crate::config::Values<T>>, b: &'a Option<crate::config::Values<T>>, names: (&str, &str)) -> Result<(bool, &'a [T]), CliError> {
    match (a, b) {
        (Some(v), None) => Ok((true, &v.0)),
        (None, Some(v)) => Ok((false, &v.0)),
        _ => Err(CliError::Config(format!("analysis: give exactly one of `{}` and `{}`", names.0, names.1))),
    }
}

fn nonempty<T>(v: &[T], field: &str) -> Result<(), CliError> {
    if v.is_empty() {
        Err(CliError::Config(format!("analysis.{field}: must not be empty")))
    } else {
        Ok(())
    }
}

pub fn run(cfg: &AnalysisConfig) -> Result<Results, CliError> {
    match &cfg.analysis {
        AnalysisSpec::Subset { eps, delta, delta_prime, error_prob, cost_factor } => {
            let model = cfg.model()?;
            let (absolute, values) = one_of(delta, delta_prime, ("delta", "delta_prime"))?;
            nonempty(values, if absolute { "delta" } else { "delta_prime" })?;
            let mass = model.target_mass();
            let reports = values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let (field, delta) = if absolute { ("delta", v) } else { ("delta_prime", v * mass) };
                    if !absolute && !(0.0..=1.0).contains(&v) {
                        return Err(CliError::core(
                            format!("analysis.{field}[{i}]"),
                            ldis_core::Error::Domain(format!("delta' = {v} must lie in [0, 1]")),
                        ));
                    }
                    let q = SubsetQuery { eps: *eps, delta, error_prob: *error_prob, cost_factor: *cost_factor };
                    subset_rate(&model, &q).map_err(|e| CliError::core(format!("analysis.{field}[{i}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Results::Subset { reports })
        }
        AnalysisSpec::RandomWalk { law, a, m, eps, delta_prime, cost_factor } => {
            nonempty(&a.0, "a")?;
            nonempty(&m.0, "m")?;
            let mut reports = Vec::new();
            for &ai in &a.0 {
                for &mi in &m.0 {
                    reports.push(
                        random_walk_analysis(*law, ai, mi, *eps, *delta_prime, *cost_factor)
                            .map_err(|e| CliError::core(format!("analysis (a = {ai}, m = {mi})"), e))?,
                    );
                }
            }
            Ok(Results::RandomWalk { reports })
        }
        AnalysisSpec::Quantile { alpha, eps, tail, side } => {
            let model = cfg.model()?;
            nonempty(&alpha.0, "alpha")?;
            let (direct, values) = one_of(eps, tail, ("eps", "tail"))?;
            let sides: &[Side] = match side {
                SideChoice::Plus => &[Side::Plus],
                SideChoice::Minus => &[Side::Minus],
                SideChoice::Both => &[Side::Plus, Side::Minus],
            };
            let mut results = Vec::new();
            for (i, &al) in alpha.0.iter().enumerate() {
                for (j, &v) in values.iter().enumerate() {
                    let at = |field: &str| format!("analysis (alpha[{i}], {field}[{j}])");
                    let e = if direct { v } else { eps_for_tail(model.target(), al, v).map_err(|e| CliError::core(at("tail"), e))? };
                    for &s in sides {
                        results.push(quantile_rate(&model, al, e, s).map_err(|e| CliError::core(at(if direct { "eps" } else { "tail" }), e))?);
                    }
                }
            }
            Ok(Results::Quantile { results })
        }
        AnalysisSpec::Laplace { functional, n, method, proposal, wf } => {
            nonempty(&n.0, "n")?;
            let (proposal, wf) = match (proposal, wf) {
                (Some(p), Some(w)) => (p.clone(), w.clone()),
                (None, None) => {
                    let model = cfg.model()?;
                    let p = model
                        .proposal()
                        .as_finite()
                        .cloned()
                        .ok_or_else(|| CliError::Config("model: laplace verification needs a finite-alphabet proposal".into()))?;
                    (p, model.wf_table().map_err(|e| CliError::core("model", e))?)
                }
                _ => return Err(CliError::Config("analysis: give both `proposal` and `wf`, or neither".into())),
            };
            functional.validate(proposal.len()).map_err(|e| CliError::core("analysis.functional", e))?;
            let run = convergence_check(&proposal, &wf, functional, &n.0, *method).map_err(|e| CliError::core("analysis", e))?;
            Ok(Results::Laplace(run))
        }
        AnalysisSpec::Simulate { event, n, reps, fit } => {
            let model = cfg.model()?;
            let seed = cfg.seed.ok_or_else(|| CliError::Config("seed: required for stochastic commands (config `seed` or --seed)".into()))?;
            nonempty(&n.0, "n")?;
            let series = n
                .0
                .iter()
                .enumerate()
                .map(|(i, &ni)| estimate_event_probability(&model, event, ni, *reps, seed).map_err(|e| CliError::core(format!("analysis.n[{i}]"), e)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut diagnostics = Vec::new();
            let slope = if *fit && series.len() >= 3 {
                let ns: Vec<usize> = series.iter().map(|e| e.n).collect();
                let ps: Vec<f64> = series.iter().map(|e| e.p_hat).collect();
                match rate_slope_fit(&ns, &ps) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        diagnostics.push(format!("slope fit skipped: {e}"));
                        None
                    }
                }
            } else {
                None
            };
            let predicted = match predicted_event_rate(&model, event) {
                Ok(p) => Some(p),
                Err(e) => {
                    diagnostics.push(format!("no predicted rate: {e}"));
                    None
                }
            };
            if let (Some(SlopeFit { slope, .. }), Some(p)) = (&slope, &predicted) {
                diagnostics.push(format!("fitted slope {} against predicted rate {}", number(*slope), number(p.value())));
            }
            Ok(Results::Simulate(SimulationSeries { series, slope, predicted, diagnostics }))
        }
    }
}

/// `a:b:step`, inclusive of `b` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("--s-grid: expected a:b:step with step > 0, got `{spec}`"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && a.is_finite() && b.is_finite() && b >= a) {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(CliError::Config(format!("--s-grid: {count} points is too many")));
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

pub fn gamma_csv(eps: f64, side: Side, grid: &[f64]) -> Result<String, CliError> {
    let mut out = String::from("s,gamma,feasible\n");
    for (i, &s) in grid.iter().enumerate() {
        let r = match side {
            Side::Plus => gamma_plus(eps, s),
            Side::Minus => gamma_minus(eps, s),
        }
        .map_err(|e| CliError::core(format!("--s-grid[{i}]"), e))?;
        out.push_str(&format!("{},{},{}\n", number(s), number(r.value), r.feasible));
    }
    Ok(out)
}
