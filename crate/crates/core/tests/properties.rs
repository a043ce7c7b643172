use ldis_core::laplace_lab::{dp_laplace_value, exact_laplace_value, DpTable, FunctionalSpec};
use ldis_core::prob_models::{sample_weighted_empirical, FiniteDistribution, ImportanceFunction, ImportanceModel, Interval, ScalarDistribution};
use ldis_core::rate_functions::{
    cramer_rate, gamma_minus, gamma_plus, relative_entropy_probs, variational_value, LogMgf, MeasureFunctional,
};
use ldis_core::stream::StreamKey;
use proptest::prelude::*;

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
}

fn finite(probs: Vec<f64>) -> FiniteDistribution {
    let k = probs.len();
    // renormalize to sit within the constructor's tolerance
    let s: f64 = probs.iter().sum();
    FiniteDistribution::new((0..k).map(|i| i as f64).collect(), probs.iter().map(|p| p / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_plus_nondecreasing(eps in 0.01f64..3.0) {
        let smax = 1.0 / (1.0 + eps);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let s = smax * i as f64 / 1000.0;
            let v = gamma_plus(eps, s).unwrap();
            prop_assert!(v.value >= prev - 1e-15, "eps {} s {} {} < {}", eps, s, v.value, prev);
            prev = v.value;
        }
    }

    #[test]
    fn gamma_minus_nondecreasing(eps in 0.01f64..1.0) {
        let mut prev = 0.0;
        for i in 0..1000 {
            let s = i as f64 / 1000.0;
            let v = gamma_minus(eps, s).unwrap();
            prop_assert!(v.value >= prev - 1e-15);
            prev = v.value;
        }
    }

    #[test]
    fn relative_entropy_nonnegative(g in simplex(5), f in simplex(5)) {
        let h = relative_entropy_probs(&g, &f);
        prop_assert!(h >= -1e-15);
        prop_assert!(relative_entropy_probs(&f, &f).abs() < 1e-15);
    }

    #[test]
    fn cramer_convex_and_zero_at_mean(mean in -2.0f64..2.0, sd in 0.2f64..3.0) {
        let d = ScalarDistribution::gaussian(mean, sd).unwrap();
        prop_assert!(cramer_rate(&d, mean).unwrap().value.abs() < 1e-12);
        let xs: Vec<f64> = (0..21).map(|i| mean + sd * (i as f64 - 10.0) / 4.0).collect();
        let r: Vec<f64> = xs.iter().map(|x| cramer_rate(&d, *x).unwrap().value).collect();
        for w in r.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9);
        }
    }

    #[test]
    fn variational_is_an_upper_bound(p in simplex(3), wf in prop::collection::vec(0.1f64..3.0, 3), g in simplex(3)) {
        let p = finite(p);
        let h = FunctionalSpec::SquaredDistance { target: vec![0.3, 0.3, 0.3], scale: 5.0, cap: 2.0 };
        let best = variational_value(&p, &wf, &h).unwrap().value;
        let nu: Vec<f64> = g.iter().zip(&wf).map(|(a, b)| a * b).collect();
        let at_g = h.eval(&nu) + relative_entropy_probs(&g, p.probs());
        prop_assert!(best <= at_g + 1e-12);
    }

    #[test]
    fn enumeration_matches_recursion(p in simplex(3), wf in prop::collection::vec(0.0f64..2.0, 3), n in 1usize..30) {
        let p = finite(p);
        let h = FunctionalSpec::ClippedSquare { indices: vec![0, 2], cap: 1.5 };
        let a = exact_laplace_value(&p, &wf, &h, n).unwrap();
        let b = dp_laplace_value(&p, &wf, &h, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }
}

#[test]
fn enumeration_matches_recursion_on_four_points() {
    let p = FiniteDistribution::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let wf = [0.5, 1.5, 1.0, 0.25];
    let h = FunctionalSpec::SquaredDistance { target: vec![0.1, 0.4, 0.2, 0.05], scale: 3.0, cap: 4.0 };
    for n in [1, 7, 20, 40] {
        let a = exact_laplace_value(&p, &wf, &h, n).unwrap();
        let b = dp_laplace_value(&p, &wf, &h, n).unwrap();
        assert!((a - b).abs() <= 1e-12, "n = {n}: {a} vs {b}");
    }
}

#[test]
fn recursion_kernel_attains_gibbs_identity() {
    use rand::{Rng, SeedableRng};
    let p = FiniteDistribution::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.3, 0.2]).unwrap();
    let h = FunctionalSpec::SquaredDistance { target: vec![0.2, 0.9, 0.05], scale: 4.0, cap: 10.0 };
    let table = DpTable::build(&p, &[1.0, 2.0, 0.5], &h, 30).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let j = rng.random_range(0..30usize);
        let a = rng.random_range(0..=j);
        let b = rng.random_range(0..=j - a);
        let c = [a, b, j - a - b];
        let k = table.kernel(&c).unwrap();
        let w = table.w(&c).unwrap();
        let at_kernel = table.step_cost(&c, &k).unwrap();
        assert!((w - at_kernel).abs() < 1e-12, "node {c:?}: {w} vs {at_kernel}");
        // any other one-step law costs at least as much
        let mut other: Vec<f64> = k.iter().map(|x| x + rng.random_range(0.0..0.2)).collect();
        let s: f64 = other.iter().sum();
        other.iter_mut().for_each(|x| *x /= s);
        assert!(table.step_cost(&c, &other).unwrap() >= w - 1e-12);
    }
}

#[test]
fn weighted_empirical_is_unbiased() {
    let a = ImportanceFunction::Interval(Interval::at_least(2.0));
    let model = ImportanceModel::gaussian_tilt(0.0, 1.0, 2.0, a).unwrap();
    let truth = ScalarDistribution::standard_gaussian().sf(2.0);
    let reps = 200;
    let mut masses = Vec::with_capacity(reps);
    for r in 0..reps {
        let nu = sample_weighted_empirical(&model, 500, StreamKey::new(5, r as u64)).unwrap();
        masses.push(nu.total_mass());
    }
    let mean = masses.iter().sum::<f64>() / reps as f64;
    let var = masses.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!((mean - truth).abs() < 4.0 * se, "mean {mean} vs {truth}, se {se}");
}

#[test]
fn gaussian_log_mgf_matches_sampling() {
    use rand::SeedableRng;
    let d = ScalarDistribution::gaussian(0.5, 1.3).unwrap();
    let theta = 0.7;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
    let n = 10_000_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..n {
        let v = (theta * d.sample(&mut rng)).exp();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let exact = d.kappa(theta).exp();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
}

/// `J+(C)` by exact penalty over the simplex, minimized over every `C` with
/// `F(C) ≥ δ`, against the threshold-set answer.
#[test]
fn threshold_set_wins_the_set_search() {
    use ldis_core::subset_analysis::{subset_rate, SubsetQuery};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let k = 4;
    for _ in 0..6 {
        let f = finite((0..k).map(|_| rng.random_range(0.05..1.0)).collect());
        let g = finite((0..k).map(|_| rng.random_range(0.05..1.0)).collect());
        let ratio = |i: usize| f.probs()[i] / g.probs()[i];
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|a, b| ratio(*b).total_cmp(&ratio(*a)));
        let delta = f.probs()[order[0]] + f.probs()[order[1]];
        let eps = 0.3;
        let m = ImportanceModel::finite(f.clone(), g.clone(), ImportanceFunction::Everywhere).unwrap();
        let q = SubsetQuery { eps, delta, error_prob: 0.01, cost_factor: None };
        let rate = subset_rate(&m, &q).unwrap().plus.rate.unwrap().value;
        let wf = m.wf_table().unwrap();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << k) {
            let set: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            if set.iter().map(|&i| f.probs()[i]).sum::<f64>() < delta - 1e-12 {
                continue;
            }
            let h = FunctionalSpec::OverweightPenalty { set, reference: f.probs().to_vec(), eps, penalty: 200.0 };
            best = best.min(variational_value(&g, &wf, &h).unwrap().value);
        }
        assert!((rate - best).abs() < 1e-9, "{rate} vs {best}");
    }
}
