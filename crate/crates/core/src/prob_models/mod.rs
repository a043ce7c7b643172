//! Target/proposal pairs, importance functions and weighted empirical measures.

mod distribution;
mod empirical;
mod model;
mod sets;

pub use distribution::{FiniteDistribution, ScalarDistribution};
pub use empirical::{sample_weighted_empirical, WeightedEmpiricalMeasure};
pub use model::{ImportanceModel, LikelihoodRatio};
pub use sets::{ImportanceFunction, Interval, Region};
