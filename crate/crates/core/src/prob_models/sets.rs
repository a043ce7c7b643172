use serde::{Deserialize, Serialize};

/// Interval on the real line; either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::serde_ext")]
    pub lo: f64,
    #[serde(with = "crate::serde_ext")]
    pub hi: f64,
    #[serde(default = "yes")]
    pub lo_closed: bool,
    #[serde(default = "yes")]
    pub hi_closed: bool,
}

fn yes() -> bool {
    true
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn all() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    /// `[lo, ∞)`
    pub fn at_least(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY, true, false)
    }

    /// `(lo, ∞)`
    pub fn greater_than(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY, false, false)
    }

    /// `(-∞, hi]`
    pub fn at_most(hi: f64) -> Self {
        Self::new(f64::NEG_INFINITY, hi, false, true)
    }

    /// `(-∞, hi)`
    pub fn less_than(hi: f64) -> Self {
        Self::new(f64::NEG_INFINITY, hi, false, false)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// Whether `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        self.intersect(other) == *self
    }
}

/// A subset of the real line: an interval or a finite set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Interval(Interval),
    Points { points: Vec<f64> },
}

impl Region {
    pub fn all() -> Self {
        Region::Interval(Interval::all())
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Region::Interval(i) => i.contains(x),
            Region::Points { points } => points.contains(&x),
        }
    }
}

/// Importance function `f`. Only indicators and finite tables are supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ImportanceFunction {
    /// `f ≡ 1`
    Everywhere,
    /// `f = 1{x ∈ I}`
    Interval(Interval),
    /// `f = 1{x ∈ S}` for a finite set `S`
    Points { points: Vec<f64> },
    /// `f(points[i]) = values[i]`, zero elsewhere
    Table { points: Vec<f64>, values: Vec<f64> },
}

impl ImportanceFunction {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            ImportanceFunction::Everywhere => 1.0,
            ImportanceFunction::Interval(i) => {
                if i.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            ImportanceFunction::Points { points } => {
                if points.contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            ImportanceFunction::Table { points, values } => points
                .iter()
                .position(|p| *p == x)
                .map(|i| values[i])
                .unwrap_or(0.0),
        }
    }

    /// The set `A = {f > 0}`.
    pub fn support(&self) -> Region {
        match self {
            ImportanceFunction::Everywhere => Region::all(),
            ImportanceFunction::Interval(i) => Region::Interval(*i),
            ImportanceFunction::Points { points } => Region::Points { points: points.clone() },
            ImportanceFunction::Table { points, values } => Region::Points {
                points: points
                    .iter()
                    .zip(values)
                    .filter(|(_, v)| **v > 0.0)
                    .map(|(p, _)| *p)
                    .collect(),
            },
        }
    }

    /// Whether `f` only takes the values 0 and 1.
    pub fn is_indicator(&self) -> bool {
        match self {
            ImportanceFunction::Table { values, .. } => values.iter().all(|v| *v == 0.0 || *v == 1.0),
            _ => true,
        }
    }
}
