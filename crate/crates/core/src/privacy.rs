//! Intent perturbation: binary randomized response with per-epoch
//! memoization, privacy-budget calibration, the expected report-distortion
//! metric and the one-/multi-snapshot inference attacks.
//!
//! The platform never consumes a true intent vector; it only ever sees the
//! memoized perturbed reports produced here. Attack evaluation is the one
//! deliberate exception and lives at the end of this module.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

fn check_eps(eps: f64) -> Result<f64> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!("privacy budget must be positive and finite, got {eps}")));
    }
    Ok(eps)
}

/// Probability that randomized response keeps the true bit: `e^eps / (e^eps + 1)`.
pub fn keep_probability(eps: f64) -> Result<f64> {
    let eps = check_eps(eps)?;
    let e = eps.exp();
    Ok(e / (e + 1.0))
}

/// Probability that randomized response flips the bit: `1 / (e^eps + 1)`.
pub fn flip_probability(eps: f64) -> Result<f64> {
    let eps = check_eps(eps)?;
    Ok(1.0 / (eps.exp() + 1.0))
}

/// One binary randomized-response draw.
pub fn rr_perturb(bit: bool, eps: f64, rng: &mut impl Rng) -> Result<bool> {
    let keep = keep_probability(eps)?;
    Ok(if rng.gen::<f64>() < keep { bit } else { !bit })
}

/// Caps and weights governing budget calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyCaps {
    /// Upper bound on the expected report distortion.
    pub q_loss_max: f64,
    /// Lower bound on the adversary's one-snapshot expected inference error.
    pub beta0: f64,
    /// Per-flip distortion weight of the worker.
    pub gamma: f64,
    /// Per-task sensitivity weights of the inference-error metric.
    pub omega: Vec<f64>,
}

impl PrivacyCaps {
    /// Default caps for a market of `num_tasks` tasks: unit weights,
    /// `beta0 = 0.2 * sum(omega)` and `q_loss_max = 0.3 * gamma * |S|`.
    pub fn defaults_for(num_tasks: usize, gamma: f64) -> Self {
        Self {
            q_loss_max: 0.3 * gamma * num_tasks as f64,
            beta0: 0.2 * num_tasks as f64,
            gamma,
            omega: vec![1.0; num_tasks],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_loss_max < 0.0 || self.beta0 < 0.0 || self.gamma < 0.0 {
            return Err(Error::Config("privacy caps must be nonnegative".into()));
        }
        if self.omega.iter().any(|w| *w < 0.0) {
            return Err(Error::Config("omega weights must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Expected weighted-Hamming distortion between the true and perturbed intent
/// vectors: `gamma * |S| / (e^eps + 1)`. The per-entry flip probability of
/// randomized response does not depend on the prior, so the outer prior
/// expectation collapses.
pub fn expected_report_distortion(eps: f64, gamma: f64, num_tasks: usize) -> Result<f64> {
    let eps = check_eps(eps)?;
    if gamma < 0.0 {
        return Err(Error::Domain(format!("gamma must be nonnegative, got {gamma}")));
    }
    if num_tasks == 0 {
        return Err(Error::Domain("num_tasks must be >= 1".into()));
    }
    Ok(gamma * num_tasks as f64 / (eps.exp() + 1.0))
}

/// Outcome of the one-snapshot Bayes attack on a single report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    /// Entry-wise minimizer of the expected weighted-Hamming loss.
    pub estimate: Vec<bool>,
    /// Posterior probability that each true entry is 1.
    pub posterior: Vec<f64>,
    /// Expected weighted-Hamming error of the estimate under the posterior.
    pub expected_error: f64,
}

fn posterior_one(phi: f64, report_bit: bool, keep: f64, flip: f64) -> f64 {
    let (like1, like0) = if report_bit { (keep, flip) } else { (flip, keep) };
    let num = phi * like1;
    let den = num + (1.0 - phi) * like0;
    if den == 0.0 {
        // Degenerate prior combined with a zero-likelihood report; the prior
        // wins by convention.
        phi
    } else {
        num / den
    }
}

/// Bayes-optimal inference from a single perturbed report under the
/// factorized prior. Ties (posterior exactly 0.5) resolve to 1.
pub fn one_snapshot_attack(
    report: &[bool],
    prior: &[f64],
    eps: f64,
    weights: &[f64],
) -> Result<AttackReport> {
    let keep = keep_probability(eps)?;
    let flip = 1.0 - keep;
    if report.len() != prior.len() || report.len() != weights.len() {
        return Err(Error::Domain("report, prior and weights must have equal length".into()));
    }
    let mut posterior = Vec::with_capacity(report.len());
    let mut estimate = Vec::with_capacity(report.len());
    let mut expected_error = 0.0;
    for ((bit, phi), w) in report.iter().zip(prior).zip(weights) {
        let post = posterior_one(*phi, *bit, keep, flip);
        estimate.push(post >= 0.5);
        expected_error += w * post.min(1.0 - post);
        posterior.push(post);
    }
    Ok(AttackReport { estimate, posterior, expected_error })
}

/// Joint probability that entry `i` reports `r` *and* the optimal estimator
/// errs, plus the marginal report probability. Building block shared by the
/// inference-error closed form and the floor check.
fn entry_error_and_marginal(phi: f64, report_bit: bool, keep: f64, flip: f64) -> (f64, f64) {
    let (j1, j0) = if report_bit {
        (phi * keep, (1.0 - phi) * flip) // joint with b=1 / b=0
    } else {
        (phi * flip, (1.0 - phi) * keep)
    };
    // The Bayes estimator picks the larger joint mass; the loss mass is the
    // smaller one.
    (j1.min(j0), j1 + j0)
}

/// Adversary's expected one-snapshot inference error over prior and
/// mechanism, `sum_i omega_i * E[min(post_i, 1 - post_i)]`.
pub fn one_snapshot_inference_error(prior: &[f64], eps: f64, weights: &[f64]) -> Result<f64> {
    let keep = keep_probability(eps)?;
    let flip = 1.0 - keep;
    if prior.len() != weights.len() {
        return Err(Error::Domain("prior and weights must have equal length".into()));
    }
    let mut total = 0.0;
    for (phi, w) in prior.iter().zip(weights) {
        let (err1, _) = entry_error_and_marginal(*phi, true, keep, flip);
        let (err0, _) = entry_error_and_marginal(*phi, false, keep, flip);
        total += w * (err1 + err0);
    }
    Ok(total)
}

/// Result of the inference-error floor decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorCheck {
    pub satisfied: bool,
    /// The expected inference error the floor is compared against.
    pub inference_error: f64,
    /// Tight per-report assignment `h(report)`, indexed by the report bitmask
    /// (entry i = bit i). Only materialized for up to 12 tasks.
    pub h: Option<Vec<f64>>,
}

/// Tight auxiliary decomposition of the inference-error floor: assigns each
/// report its prior-weighted error mass, whose total equals the expected
/// inference error, and checks the total against `beta0`.
pub fn inference_floor_check(
    prior: &[f64],
    eps: f64,
    weights: &[f64],
    beta0: f64,
) -> Result<FloorCheck> {
    let inference_error = one_snapshot_inference_error(prior, eps, weights)?;
    let keep = keep_probability(eps)?;
    let flip = 1.0 - keep;
    let s = prior.len();
    let h = if s <= 12 {
        let mut per_entry = Vec::with_capacity(s);
        for phi in prior {
            let (e1, m1) = entry_error_and_marginal(*phi, true, keep, flip);
            let (e0, m0) = entry_error_and_marginal(*phi, false, keep, flip);
            per_entry.push(((e0, m0), (e1, m1)));
        }
        let mut h = vec![0.0; 1usize << s];
        for (mask, slot) in h.iter_mut().enumerate() {
            let mut prod = 1.0;
            let mut err_ratio = 0.0;
            for (i, ((e0, m0), (e1, m1))) in per_entry.iter().enumerate() {
                let (e, m) = if mask >> i & 1 == 1 { (*e1, *m1) } else { (*e0, *m0) };
                prod *= m;
                err_ratio += weights[i] * e / m;
            }
            *slot = prod * err_ratio;
        }
        Some(h)
    } else {
        None
    };
    Ok(FloorCheck { satisfied: inference_error >= beta0, inference_error, h })
}

/// Budget calibration result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Calibration {
    Feasible { eps: f64, scanned: usize },
    Infeasible { scanned: usize },
}

impl Calibration {
    pub fn eps(&self) -> Option<f64> {
        match self {
            Calibration::Feasible { eps, .. } => Some(*eps),
            Calibration::Infeasible { .. } => None,
        }
    }

    pub fn scanned(&self) -> usize {
        match self {
            Calibration::Feasible { scanned, .. } | Calibration::Infeasible { scanned } => *scanned,
        }
    }
}

/// Deployable status of a worker's privacy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CalibratedEps {
    Feasible(f64),
    Infeasible,
}

impl CalibratedEps {
    pub fn value(&self) -> Option<f64> {
        match self {
            CalibratedEps::Feasible(e) => Some(*e),
            CalibratedEps::Infeasible => None,
        }
    }
}

/// Scan the budget interval from `eps_min` upward and return the first value
/// that keeps the report distortion under `q_loss_max` while leaving the
/// adversary's expected inference error at or above `beta0`. Scanning upward
/// means the accepted budget favors the strongest feasible privacy.
pub fn calibrate_budget(
    eps_range: [f64; 2],
    caps: &PrivacyCaps,
    prior: &[f64],
    step: f64,
) -> Result<Calibration> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::Domain(format!("calibration step must be positive, got {step}")));
    }
    let [eps_min, eps_max] = eps_range;
    check_eps(eps_min)?;
    if eps_min > eps_max {
        return Err(Error::Domain(format!("invalid budget interval [{eps_min}, {eps_max}]")));
    }
    caps.validate().map_err(|e| Error::Domain(e.to_string()))?;
    if prior.len() != caps.omega.len() {
        return Err(Error::Domain("prior and omega must have equal length".into()));
    }
    let num_tasks = prior.len();
    // At most 1 + ceil((eps_max - eps_min) / step) grid points.
    let max_iters = 1 + ((eps_max - eps_min) / step).ceil() as usize;
    let mut scanned = 0;
    for k in 0..max_iters {
        let eps = eps_min + k as f64 * step;
        if eps > eps_max {
            break;
        }
        scanned += 1;
        let distortion = expected_report_distortion(eps, caps.gamma, num_tasks)?;
        let inference_error = one_snapshot_inference_error(prior, eps, &caps.omega)?;
        if distortion <= caps.q_loss_max && inference_error >= caps.beta0 {
            return Ok(Calibration::Feasible { eps, scanned });
        }
    }
    Ok(Calibration::Infeasible { scanned })
}

/// A worker's reporting state: true intent, calibrated budget and the
/// memoized permanent perturbed vector of each epoch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntentState {
    pub worker_id: usize,
    pub true_intent: Vec<bool>,
    pub calibrated: CalibratedEps,
    /// Rounds per memo-epoch.
    pub epoch_length: u64,
    memo: BTreeMap<u64, Vec<bool>>,
    stream_seed: u64,
}

impl IntentState {
    pub fn new(
        worker_id: usize,
        true_intent: Vec<bool>,
        calibrated: CalibratedEps,
        epoch_length: u64,
        stream_seed: u64,
    ) -> Result<Self> {
        if epoch_length == 0 {
            return Err(Error::Config("epoch_length must be >= 1".into()));
        }
        Ok(Self { worker_id, true_intent, calibrated, epoch_length, memo: BTreeMap::new(), stream_seed })
    }

    pub fn epoch_of(&self, round: u64) -> u64 {
        round / self.epoch_length
    }

    /// Memoized perturbed report for `round`. The first call of an epoch
    /// draws a permanent vector by entry-wise randomized response; every
    /// later round of that epoch returns the stored vector unchanged.
    /// Entering a new epoch discards the old vector and regenerates.
    pub fn report(&mut self, round: u64) -> Result<&[bool]> {
        let eps = match self.calibrated {
            CalibratedEps::Feasible(e) => e,
            CalibratedEps::Infeasible => {
                return Err(Error::Caller(format!(
                    "worker {} opted out (no feasible privacy budget)",
                    self.worker_id
                )))
            }
        };
        let epoch = self.epoch_of(round);
        if !self.memo.contains_key(&epoch) {
            let mut r = rng::stream(self.stream_seed, "memo", &[self.worker_id as u64, epoch]);
            let perm: Vec<bool> = self
                .true_intent
                .iter()
                .map(|b| rr_perturb(*b, eps, &mut r))
                .collect::<Result<_>>()?;
            self.memo.insert(epoch, perm);
        }
        Ok(self.memo.get(&epoch).expect("just inserted"))
    }
}

/// Frequency statistics of repeated reports plus the majority estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAttack {
    /// Per-entry empirical frequency of reporting 1.
    pub frequency: Vec<f64>,
    /// Majority rule: 1 iff the frequency is at least the threshold.
    pub estimate: Vec<bool>,
}

/// Majority-vote profiling over a sequence of reports (threshold 0.5).
pub fn multi_snapshot_attack(reports: &[Vec<bool>]) -> Result<FrequencyAttack> {
    frequency_threshold_attack(reports, 0.5)
}

/// Frequency profiling with an explicit decision threshold; the optimal
/// threshold generally depends on the perturbation parameters and prior, so
/// sensitivity studies can move it away from the symmetric 0.5 default.
pub fn frequency_threshold_attack(reports: &[Vec<bool>], threshold: f64) -> Result<FrequencyAttack> {
    let t = reports.len();
    if t == 0 {
        return Err(Error::Domain("need at least one report".into()));
    }
    let s = reports[0].len();
    if reports.iter().any(|r| r.len() != s) {
        return Err(Error::Domain("reports must have equal length".into()));
    }
    let mut frequency = vec![0.0; s];
    for report in reports {
        for (i, bit) in report.iter().enumerate() {
            if *bit {
                frequency[i] += 1.0;
            }
        }
    }
    for f in &mut frequency {
        *f /= t as f64;
    }
    let estimate = frequency.iter().map(|f| *f >= threshold).collect();
    Ok(FrequencyAttack { frequency, estimate })
}
