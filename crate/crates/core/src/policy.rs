use crate::error::{Error, Result};
use crate::table::Table;
use crate::SUM_TOLERANCE;

/// Per-context action distributions, one stochastic row per context.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    probs: Table<f64>,
}

impl Policy {
    pub fn new(probs: Table<f64>) -> Result<Self> {
        for (s, row) in probs.iter_rows().enumerate() {
            if row.iter().any(|p| !(*p >= 0.0 && *p <= 1.0)) {
                let sum = row.iter().sum();
                return Err(Error::NonStochasticRow { table: "policy", row: s, sum });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::NonStochasticRow { table: "policy", row: s, sum });
            }
        }
        Ok(Self { probs })
    }

    /// Rows produced by a softmax are stochastic up to rounding.
    pub(crate) fn from_softmax(probs: Table<f64>) -> Self {
        debug_assert!(Self::new(probs.clone()).is_ok());
        Self { probs }
    }

    pub fn uniform(contexts: usize, arms: usize) -> Self {
        Self { probs: Table::filled(contexts, arms, 1.0 / arms as f64) }
    }

    /// Deterministic policy playing `arm` in every context.
    pub fn one_hot(contexts: usize, arms: usize, arm: usize) -> Self {
        assert!(arm < arms, "arm {arm} out of range for {arms} arms");
        Self { probs: Table::from_fn(contexts, arms, |_, a| if a == arm { 1.0 } else { 0.0 }) }
    }

    pub fn probs(&self) -> &Table<f64> {
        &self.probs
    }

    pub fn row(&self, context: usize) -> &[f64] {
        self.probs.row(context)
    }

    pub fn num_contexts(&self) -> usize {
        self.probs.rows()
    }

    pub fn num_arms(&self) -> usize {
        self.probs.cols()
    }

    /// Largest per-context total-variation distance to `other`.
    pub fn max_tv(&self, other: &Policy) -> f64 {
        self.probs
            .iter_rows()
            .zip(other.probs.iter_rows())
            .map(|(p, q)| crate::math::total_variation(p, q))
            .fold(0.0, f64::max)
    }
}
