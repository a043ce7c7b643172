//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its own line; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ldis_core::laplace_lab::{
    convergence_check, dp_laplace_value, estimate_event_probability, exact_laplace_value, log_binomial_tail, rate_slope_fit,
    EventSpec, FunctionalSpec, LaplaceMethod,
};
use ldis_core::prob_models::{FiniteDistribution, ImportanceFunction, ImportanceModel, Interval, ScalarDistribution};
use ldis_core::quantile_analysis::{eps_for_tail, quantile_rate};
use ldis_core::rate_functions::{binary_relative_entropy, gamma_minus, gamma_plus};
use ldis_core::subset_analysis::{random_walk_analysis, small_p_expansion, subset_rate, IncrementLaw, Side, SubsetQuery};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    check(start.elapsed() < limit, format!("took {:?}, limit {limit:?}", start.elapsed()))
}

/// Minimize a convex function on `[lo, hi]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    f(lo).min(f(hi)).min(fc).min(fd)
}

fn gamma_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for i in 0..50 {
        let eps = 0.02 + 0.98 * i as f64 / 49.0;
        for j in 0..50 {
            let s = 0.01 + 0.98 * j as f64 / 49.0;
            let h = |q: f64| binary_relative_entropy(q, s);
            if (1.0 + eps) * s < 1.0 {
                let got = gamma_plus(eps, s).map_err(|e| e.to_string())?.value;
                worst = worst.max((got - golden_min(h, (1.0 + eps) * s, 1.0)).abs());
                cells += 1;
            }
            let got = gamma_minus(eps, s).map_err(|e| e.to_string())?.value;
            worst = worst.max((got - golden_min(h, 0.0, (1.0 - eps) * s)).abs());
            cells += 1;
        }
    }
    check(worst <= 1e-9, format!("max deviation {worst:e} over {cells} cells"))?;
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("max deviation {worst:.2e} over {cells} cells in {:?}", start.elapsed()))
}

fn laplace_verification() -> Outcome {
    let start = Instant::now();
    let e = |x: ldis_core::Error| x.to_string();
    let two = FiniteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).map_err(e)?;
    let three = FiniteDistribution::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.3, 0.2]).map_err(e)?;
    let cases: Vec<(&str, FiniteDistribution, Vec<f64>, FunctionalSpec)> = vec![
        ("2-point clipped square", two.clone(), vec![1.0, 1.0], FunctionalSpec::ClippedSquare { indices: vec![1], cap: 10.0 }),
        (
            "3-point squared distance",
            three.clone(),
            vec![1.0, 2.0, 0.5],
            FunctionalSpec::SquaredDistance { target: vec![0.2, 0.9, 0.05], scale: 4.0, cap: 10.0 },
        ),
    ];
    let ns = [10, 20, 40, 80];
    let mut notes = Vec::new();
    for (name, p, wf, h) in &cases {
        let mut agree: f64 = 0.0;
        for &n in &ns {
            let a = exact_laplace_value(p, wf, h, n).map_err(e)?;
            let b = dp_laplace_value(p, wf, h, n).map_err(e)?;
            agree = agree.max((a - b).abs());
        }
        check(agree <= 1e-12, format!("{name}: enumeration and recursion differ by {agree:e}"))?;
        let run = convergence_check(p, wf, h, &ns, LaplaceMethod::Dp).map_err(e)?;
        let (first, last) = (run.gaps[0], run.gaps[ns.len() - 1]);
        check(last < first, format!("{name}: gap at 80 ({last:e}) not below gap at 10 ({first:e})"))?;
        notes.push(format!("{name}: gaps {first:.2e} → {last:.2e}, agreement {agree:.0e}"));
    }
    for (p, g) in [(two, vec![0.0, 1.0]), (three, vec![0.3, -1.2, 2.0])] {
        let wf = vec![1.0; p.len()];
        let run = convergence_check(&p, &wf, &FunctionalSpec::Linear { g }, &[1, 5, 10, 20, 40, 80], LaplaceMethod::Enumeration).map_err(e)?;
        let worst = run.gaps.iter().cloned().fold(0.0, f64::max);
        check(worst <= 1e-10, format!("linear functional gap {worst:e}"))?;
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(notes.join("; "))
}

fn quantile_closed_form() -> Outcome {
    let start = Instant::now();
    let target = ScalarDistribution::exponential(1.0).map_err(|e| e.to_string())?;
    let model = ImportanceModel::standard_mc(target.clone(), ImportanceFunction::Everywhere);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let alpha = 0.02 + 0.9 * i as f64 / 19.0;
        for j in 1..=20 {
            let p = alpha * j as f64 / 21.0;
            let eps = eps_for_tail(&target, alpha, p).map_err(|e| e.to_string())?;
            let r = quantile_rate(&model, alpha, eps, Side::Plus).map_err(|e| e.to_string())?;
            let err = (r.rate.value - binary_relative_entropy(alpha, p)).abs();
            worst = worst.max(err);
        }
    }
    check(worst <= 1e-8, format!("max deviation {worst:e}"))?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("max deviation {worst:.2e} over 400 cells in {:?}", start.elapsed()))
}

fn zero_variance_invariance() -> Outcome {
    let eps = 0.2;
    let q = |delta: f64| SubsetQuery { eps, delta, error_prob: 0.01, cost_factor: None };
    let gauss = ScalarDistribution::standard_gaussian();
    let mut notes = Vec::new();
    for dp in [0.1, 0.25, 0.5, 0.75] {
        let mut rates = Vec::new();
        for p in [1e-1, 1e-2, 1e-3] {
            let a = ImportanceFunction::Interval(Interval::at_least(gauss.isf(p)));
            let m = ImportanceModel::zero_variance(gauss.clone(), a).map_err(|e| e.to_string())?;
            let r = subset_rate(&m, &q(dp * m.target_mass())).map_err(|e| e.to_string())?;
            rates.push(r.plus.rate.ok_or("no point rate for a constant ratio")?.value);
        }
        let spread = rates.iter().cloned().fold(f64::MIN, f64::max) - rates.iter().cloned().fold(f64::MAX, f64::min);
        check(spread <= 1e-12, format!("δ′ = {dp}: spread {spread:e} across p"))?;
        notes.push(format!("δ′={dp}: {:.6e}", rates[0]));
    }
    for p in [1e-1, 1e-2, 1e-3] {
        let a = ImportanceFunction::Interval(Interval::at_least(gauss.isf(p)));
        let m = ImportanceModel::zero_variance(gauss.clone(), a).map_err(|e| e.to_string())?;
        let r = subset_rate(&m, &q(m.target_mass())).map_err(|e| e.to_string())?;
        let rate = r.plus.rate.ok_or("no point rate at δ′ = 1")?;
        check(rate.value == f64::INFINITY, format!("δ′ = 1, p = {p}: rate {} is not infinite", rate.value))?;
    }
    Ok(format!("{} ; ∞ at δ′=1", notes.join(", ")))
}

fn rare_event_linearization() -> Outcome {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for eps in [0.1, 0.5, 1.0, 2.0] {
        for dp in [0.25, 0.5, 0.75, 1.0] {
            let (exact, leading) = small_p_expansion(eps, dp, 1e-4).map_err(|e| e.to_string())?;
            let ratio = exact / leading;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    check(lo >= 0.99 && hi <= 1.01, format!("ratios in [{lo}, {hi}]"))?;
    Ok(format!("ratios in [{lo:.6}, {hi:.6}]"))
}

fn random_walk_bound() -> Outcome {
    let law = IncrementLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let mut worst_margin = f64::MAX;
    for a in [1.5, 2.0, 3.0] {
        for m in [1, 5, 10] {
            let r = random_walk_analysis(law, a, m, 0.1, 0.5, 1.0).map_err(|e| e.to_string())?;
            check(
                r.realized_mass >= r.tilt.mass_bound,
                format!("a = {a}, m = {m}: F̃(C) = {} below bound {}", r.realized_mass, r.tilt.mass_bound),
            )?;
            worst_margin = worst_margin.min(r.realized_mass / r.tilt.mass_bound);
        }
    }
    let mut worst_ratio: f64 = 0.0;
    for a in [1.5, 2.0, 3.0] {
        let c = |m: u32| -> Result<(f64, f64), String> {
            let r = random_walk_analysis(law, a, m, 0.1, 0.5, 1.0).map_err(|e| e.to_string())?;
            Ok((r.tilt.cost_reduction_bound.ok_or("cost reduction bound unavailable")?, r.tilt.exponent))
        };
        let (c19, _) = c(19)?;
        let (c20, exponent) = c(20)?;
        let rel = (c20 / c19 / (-exponent).exp() - 1.0).abs();
        check(rel <= 0.01, format!("a = {a}: consecutive ratio off by {rel:e}"))?;
        worst_ratio = worst_ratio.max(rel);
    }
    Ok(format!("min F̃(C)/bound {worst_margin:.4}; consecutive-m ratio within {worst_ratio:.2e} at m = 20"))
}

fn empirical_decay() -> Outcome {
    let start = Instant::now();
    let (alpha, p) = (0.05f64, 0.03f64);
    let ns: Vec<usize> = (1..=10).map(|i| 200 * i).collect();
    let tails = ns
        .iter()
        .map(|&n| log_binomial_tail(n as u64, p, (alpha * n as f64).ceil() as u64).map(f64::exp))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    let slope = rate_slope_fit(&ns, &tails).map_err(|e| e.to_string())?.slope;
    let h = binary_relative_entropy(alpha, p);
    check(((slope - h) / h).abs() <= 0.1, format!("slope {slope} vs H = {h}"))?;

    let gauss = ScalarDistribution::standard_gaussian();
    let model = ImportanceModel::standard_mc(gauss.clone(), ImportanceFunction::Everywhere);
    let eps = eps_for_tail(&gauss, alpha, p).map_err(|e| e.to_string())?;
    let est = estimate_event_probability(&model, &EventSpec::QuantileExceedance { alpha, eps }, 400, 100_000, 20240601)
        .map_err(|e| e.to_string())?;
    let exact = tails[1];
    let z = (est.p_hat - exact) / est.std_err;
    check(z.abs() <= 4.0, format!("p̂ = {} vs exact {exact}: {z:.2} SE", est.p_hat))?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "slope {slope:.6e} vs H {h:.6e} ({:+.2}%); p̂ = {} vs {exact:.6e} ({z:+.2} SE)",
        100.0 * (slope - h) / h,
        est.p_hat
    ))
}

fn determinism() -> Outcome {
    let gauss = ScalarDistribution::standard_gaussian();
    let tilt = ImportanceModel::gaussian_tilt(0.0, 1.0, 1.5, ImportanceFunction::Interval(Interval::at_least(1.5))).map_err(|e| e.to_string())?;
    let mc = ImportanceModel::standard_mc(gauss, ImportanceFunction::Everywhere);
    let finite = ImportanceModel::finite(
        FiniteDistribution::new(vec![0.0, 1.0], vec![0.97, 0.03]).map_err(|e| e.to_string())?,
        FiniteDistribution::new(vec![0.0, 1.0], vec![0.8, 0.2]).map_err(|e| e.to_string())?,
        ImportanceFunction::Everywhere,
    )
    .map_err(|e| e.to_string())?;
    let jobs: Vec<(&ImportanceModel, EventSpec)> = vec![
        (&mc, EventSpec::QuantileExceedance { alpha: 0.1, eps: 0.2 }),
        (&tilt, EventSpec::QuantileExceedance { alpha: 0.05, eps: 0.1 }),
        (&finite, EventSpec::FiniteOverweight { set: vec![1.0], eps: 0.5 }),
    ];
    let run = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let mut out = Vec::new();
            for (m, ev) in &jobs {
                for n in [50, 150] {
                    let est = estimate_event_probability(m, ev, n, 20_000, 7).map_err(|e| e.to_string())?;
                    out.push(serde_json::to_string(&est).map_err(|e| e.to_string())?);
                }
            }
            Ok(out.join("\n"))
        })
    };
    let one = run(1)?;
    let four = run(4)?;
    let again = run(4)?;
    check(one == four && four == again, "payloads differ across worker counts or re-runs".into())?;
    Ok(format!("{} bytes identical across 1, 4, 4 workers", one.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("gamma oracle equivalence", gamma_oracle),
        ("Laplace verification", laplace_verification),
        ("quantile closed form", quantile_closed_form),
        ("zero-variance invariance", zero_variance_invariance),
        ("rare-event linearization", rare_event_linearization),
        ("random-walk bound", random_walk_bound),
        ("empirical decay", empirical_decay),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
