//! Small numerical kernels shared by the analysis modules: log-space sums,
//! safeguarded root finding and adaptive Gauss–Kronrod quadrature.

use crate::error::{Error, Result};

/// `log Σ exp(v_i)` with max-subtraction. Returns `-inf` for an empty slice
/// or when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `a · ln(a / b)` with the convention `0 · ln(0 / b) = 0`.
pub fn xlog_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

/// `ln(n!)` for `0..=n_max`, accumulated from `ln(i)`.
pub fn log_factorials(n_max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for i in 1..=n_max {
        acc += (i as f64).ln();
        table.push(acc);
    }
    table
}

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final bracket `(lo, hi)` with `f(lo)` and `f(hi)` of opposite sign.
    pub bracket: (f64, f64),
}

/// Safeguarded secant/bisection hybrid on a sign-changing bracket.
///
/// `f(lo)` and `f(hi)` must have opposite signs (zero allowed). Iterates
/// until `|f(x)| <= ftol`, the bracket collapses, or `max_iter` is reached.
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, ftol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::RootFinding("objective is NaN at bracket endpoint".into()));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, iterations: 0, converged: true, bracket: (a, a) });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, iterations: 0, converged: true, bracket: (b, b) });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=max_iter {
        let width = (b - a).abs();
        let secant = b - fb * (b - a) / (fb - fa);
        let inside = secant > a.min(b) + 0.05 * width && secant < a.max(b) - 0.05 * width;
        // every third step bisects so the bracket at least halves
        let x = if it % 3 != 0 && secant.is_finite() && inside {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::RootFinding(format!("objective is NaN at {x}")));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= ftol {
            return Ok(Root { x, fx, iterations: it, converged: true, bracket: (a, b) });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
    }
    Ok(Root {
        x: best.0,
        fx: best.1,
        iterations: max_iter,
        converged: best.1.abs() <= ftol,
        bracket: (a, b),
    })
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64 + ?Sized>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`; either bound may
/// be infinite. Returns `(value, error_estimate)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<(f64, f64)> {
    integrate_dyn(&mut f, a, b, rel_tol, abs_tol)
}

fn integrate_dyn(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    if a > b {
        let (v, e) = integrate_dyn(f, b, a, rel_tol, abs_tol)?;
        return Ok((-v, e));
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, rel_tol, abs_tol),
        (true, false) => {
            // x = a + t / (1 - t), t in [0, 1)
            let mut g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let x = a + t / (1.0 - t);
                let jac = 1.0 / ((1.0 - t) * (1.0 - t));
                let v = f(x);
                if v == 0.0 { 0.0 } else { v * jac }
            };
            adaptive(&mut g, 0.0, 1.0, rel_tol, abs_tol)
        }
        (false, true) => {
            let mut g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let x = b - t / (1.0 - t);
                let jac = 1.0 / ((1.0 - t) * (1.0 - t));
                let v = f(x);
                if v == 0.0 { 0.0 } else { v * jac }
            };
            adaptive(&mut g, 0.0, 1.0, rel_tol, abs_tol)
        }
        (false, false) => {
            let (l, el) = integrate_dyn(f, f64::NEG_INFINITY, 0.0, rel_tol, abs_tol)?;
            let (r, er) = integrate_dyn(f, 0.0, f64::INFINITY, rel_tol, abs_tol)?;
            Ok((l + r, el + er))
        }
    }
}

fn adaptive<F: FnMut(f64) -> f64 + ?Sized>(f: &mut F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<(f64, f64)> {
    const MAX_INTERVALS: usize = 4000;
    let (v0, e0) = gk15(f, a, b);
    let mut pieces = vec![(a, b, v0, e0)];
    let mut total = v0;
    let mut err = e0;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::Divergence("quadrature produced a non-finite value".into()));
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature did not reach tolerance (value {total}, error {err})"
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v, e) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further
            pieces.push((lo, hi, v, 0.0));
            err -= e;
            continue;
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated cancellation from the running updates
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let err: f64 = pieces.iter().map(|p| p.3).sum();
    if !total.is_finite() {
        return Err(Error::Divergence("quadrature produced a non-finite value".into()));
    }
    Ok((total, err))
}
