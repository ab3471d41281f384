use crate::error::{PruneError, PruneResult};

/// Iterative pruning schedule: remove fraction `rate` of the remaining
/// weights at each of `iterations` cycles, for a cumulative pruned fraction
/// of 1 - (1 - rate)^k after k cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneSchedule {
    pub rate: f64,
    pub iterations: usize,
}

impl PruneSchedule {
    pub fn new(rate: f64, iterations: usize) -> PruneResult<Self> {
        let s = PruneSchedule { rate, iterations };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> PruneResult<()> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(PruneError::Contract(format!(
                "iterative rate {} outside (0, 1)",
                self.rate
            )));
        }
        if self.iterations == 0 {
            return Err(PruneError::Contract("zero pruning iterations".into()));
        }
        Ok(())
    }

    /// Cumulative pruned fraction after iteration k (1-based).
    pub fn cumulative_fraction(&self, k: usize) -> PruneResult<f64> {
        if k == 0 || k > self.iterations {
            return Err(PruneError::Contract(format!(
                "iteration {k} outside 1..={}",
                self.iterations
            )));
        }
        Ok(1.0 - (1.0 - self.rate).powi(k as i32))
    }
}
