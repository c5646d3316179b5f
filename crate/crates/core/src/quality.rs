//! Redundancy-aware quality aggregation, utilities, social welfare and the
//! two risk functionals (quality failure and intent mismatch).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Market-level economic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconParams {
    /// Currency gained per unit of aggregated quality.
    pub omega3: f64,
    /// Cap on the probability of missing a task's quality demand.
    pub rho1: f64,
    /// Cap on a worker's expected intent-mismatch ratio.
    pub rho2: f64,
}

impl Default for EconParams {
    fn default() -> Self {
        Self { omega3: 7.0, rho1: 0.2, rho2: 0.2 }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        if self.omega3 <= 0.0 {
            return Err(Error::Config("omega3 must be > 0".into()));
        }
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Redundancy-discounted aggregation: `sum(q) / (1 + (n-1) * zeta)`.
/// An empty contribution list aggregates to 0.
pub fn aggregate_quality(qualities: &[f64], zeta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::Domain(format!("zeta {zeta} outside [0, 1)")));
    }
    let n = qualities.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = qualities.iter().sum();
    Ok(sum / (1.0 + (n as f64 - 1.0) * zeta))
}

/// Sum of `participation * (payment - cost)` over a worker's engagements.
pub fn worker_utility(payments: &[f64], costs: &[f64], participation: &[bool]) -> f64 {
    payments
        .iter()
        .zip(costs)
        .zip(participation)
        .filter(|(_, part)| **part)
        .map(|((p, c), _)| p - c)
        .sum()
}

/// Quality value minus paid-out payments for one task.
pub fn task_utility(aggregated_quality: f64, payments_to_arrived: &[f64], omega3: f64) -> f64 {
    omega3 * aggregated_quality - payments_to_arrived.iter().sum::<f64>()
}

/// Plain sum of task and worker utilities. Payments cancel, so this must
/// always equal the quality-minus-cost form.
pub fn social_welfare(task_utils: &[f64], worker_utils: &[f64]) -> f64 {
    task_utils.iter().sum::<f64>() + worker_utils.iter().sum::<f64>()
}

/// How the failure probability is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum RiskMethod {
    /// Enumerate all arrival subsets. Only valid for up to 20 workers.
    Exact,
    /// Seeded Monte-Carlo with the given sample count.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Probability, over independent Bernoulli arrivals, that the aggregated
/// quality of the arrived subset falls below `quality_demand`.
/// `contracted` holds `(single_shot_quality, arrival_prob)` pairs.
pub fn quality_risk(
    contracted: &[(f64, f64)],
    zeta: f64,
    quality_demand: f64,
    method: RiskMethod,
) -> Result<f64> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::Domain(format!("zeta {zeta} outside [0, 1)")));
    }
    let n = contracted.len();
    match method {
        RiskMethod::Exact => {
            if n > 20 {
                return Err(Error::Capability(format!(
                    "exact enumeration supports at most 20 contracted workers, got {n}"
                )));
            }
            let mut fail = 0.0;
            for mask in 0u32..(1u32 << n) {
                let mut prob = 1.0;
                let mut sum = 0.0;
                let mut arrived = 0usize;
                for (idx, (q, pi)) in contracted.iter().enumerate() {
                    if mask >> idx & 1 == 1 {
                        prob *= pi;
                        sum += q;
                        arrived += 1;
                    } else {
                        prob *= 1.0 - pi;
                    }
                }
                let agg = if arrived == 0 {
                    0.0
                } else {
                    sum / (1.0 + (arrived as f64 - 1.0) * zeta)
                };
                if agg < quality_demand {
                    fail += prob;
                }
            }
            Ok(fail)
        }
        RiskMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Domain("Monte-Carlo sample count must be >= 1".into()));
            }
            let mut fails = 0usize;
            for k in 0..samples {
                let mut sum = 0.0;
                let mut arrived = 0usize;
                for (idx, (q, pi)) in contracted.iter().enumerate() {
                    if rng::unit_uniform(seed, "quality-risk", &[k as u64, idx as u64]) < *pi {
                        sum += q;
                        arrived += 1;
                    }
                }
                let agg = if arrived == 0 {
                    0.0
                } else {
                    sum / (1.0 + (arrived as f64 - 1.0) * zeta)
                };
                if agg < quality_demand {
                    fails += 1;
                }
            }
            Ok(fails as f64 / samples as f64)
        }
    }
}

/// Expected intent-mismatch ratio of one worker's assignment row under the
/// factorized prior: `(1/|S|) * sum_i x[i] * (1 - phi[i])`.
pub fn pref_risk(assignment_row: &[bool], prior_row: &[f64]) -> f64 {
    let num_tasks = assignment_row.len();
    if num_tasks == 0 {
        return 0.0;
    }
    assignment_row
        .iter()
        .zip(prior_row)
        .filter(|(x, _)| **x)
        .map(|(_, phi)| 1.0 - phi)
        .sum::<f64>()
        / num_tasks as f64
}
