use serde::{Deserialize, Serialize};

use super::model::ImportanceModel;
use crate::error::Result;
use crate::stream::StreamKey;

/// `(1/n) Σ w(X_k) f(X_k) δ_{X_k}` stored as `(X_k, w f(X_k))` pairs.
///
/// Atoms with zero weight are dropped, so `atoms().len() ≤ n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEmpiricalMeasure {
    n: usize,
    atoms: Vec<(f64, f64)>,
}

impl WeightedEmpiricalMeasure {
    /// Build from locations and raw `wf` values (not yet divided by `n`).
    pub fn from_raw(n: usize, raw: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let atoms: Vec<(f64, f64)> = raw.into_iter().filter(|(_, wf)| *wf > 0.0).collect();
        debug_assert!(atoms.len() <= n);
        Self { n, atoms }
    }

    pub fn empty() -> Self {
        Self { n: 0, atoms: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(location, weight)` with weight `= wf / n`.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n as f64;
        self.atoms.iter().map(move |(x, wf)| (*x, wf / n))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `∫ g dν = (1/n) Σ wf(x_k) g(x_k)`
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.atoms.iter().map(|(x, wf)| wf * g(*x)).sum::<f64>() / self.n as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }
}

/// Draw `n` points from the proposal with the stream `key` and weight them.
pub fn sample_weighted_empirical(model: &ImportanceModel, n: usize, key: StreamKey) -> Result<WeightedEmpiricalMeasure> {
    let mut rng = key.rng();
    let mut raw = Vec::with_capacity(n);
    for _ in 0..n {
        let x = model.proposal().sample(&mut rng);
        raw.push((x, model.wf(x)?));
    }
    Ok(WeightedEmpiricalMeasure::from_raw(n, raw))
}
