//! Market model: tasks, workers, intent data, seeded scenario generation and
//! arrival sampling.
//!
//! A [`Scenario`] is an immutable market instance. All stochastic quantities
//! are derived from keyed streams of `rng_seed`, so the same `(config, seed)`
//! pair always produces a bit-identical scenario, and growing the worker or
//! task count extends an existing market instead of reshuffling it.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quality::EconParams;
use crate::rng;

/// Closed interval used for sampled market parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || min > max {
            return Err(Error::Config(format!("invalid range [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.min + (self.max - self.min) * rng.gen::<f64>()
    }

    fn check(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.min > self.max {
            return Err(Error::Config(format!(
                "{name}: range min {} exceeds max {}",
                self.min, self.max
            )));
        }
        if self.min < lo || self.max > hi {
            return Err(Error::Config(format!(
                "{name}: range [{}, {}] outside [{lo}, {hi}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

impl TryFrom<[f64; 2]> for Range {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Range::new(v[0], v[1])
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.min, r.max]
    }
}

/// Snap a sampled value to a multiple of `granularity`, then clamp back into
/// the sampling interval so degenerate ranges are preserved exactly.
/// Monetary quantities are generated at whole-currency granularity by default
/// so budget arithmetic stays exact in integer cents.
fn snap(value: f64, granularity: f64, lo: f64, hi: f64) -> f64 {
    if granularity <= 0.0 {
        return value;
    }
    ((value / granularity).round() * granularity).clamp(lo, hi)
}

/// Trace-derived cost/quality parameters (see [`crate::trace`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    pub path: String,
    /// Weights for (trip distance, current distance, post-service distance)
    /// in the execution-cost sum.
    #[serde(default = "default_trace_weights")]
    pub weights: [f64; 3],
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_eps_guard")]
    pub eps_guard: f64,
}

fn default_trace_weights() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}
fn default_kappa() -> f64 {
    1.0
}
fn default_eps_guard() -> f64 {
    0.01
}

impl TraceParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= 0.0 {
            return Err(Error::Config("trace.kappa must be > 0".into()));
        }
        if self.eps_guard <= 0.0 {
            return Err(Error::Config("trace.eps_guard must be > 0".into()));
        }
        if self.weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Config("trace.weights must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Ranges and counts for synthetic scenario generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub num_tasks: usize,
    pub num_workers: usize,
    pub arrival_prob: Range,
    pub capability: Range,
    pub payment: Range,
    pub budget: Range,
    pub quality_demand: Range,
    pub redundancy: Range,
    pub travel_cost_coeff: Range,
    pub privacy_cost_coeff: Range,
    pub reference_variance: Range,
    pub intent_prior: Range,
    /// Per-worker privacy budget search interval.
    pub eps_range: [f64; 2],
    /// Monetary granularity of the payment menu (0 disables snapping).
    pub payment_granularity: f64,
    /// Monetary granularity of task budgets (0 disables snapping).
    pub budget_granularity: f64,
    /// When set, costs/qualities/arrival rates come from a trajectory trace.
    pub trace: Option<TraceParams>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let r = |min, max| Range { min, max };
        Self {
            num_tasks: 20,
            num_workers: 120,
            arrival_prob: r(0.56, 0.96),
            capability: r(45.0, 55.0),
            payment: r(40.0, 55.0),
            budget: r(200.0, 250.0),
            quality_demand: r(20.0, 28.0),
            redundancy: r(0.05, 0.40),
            travel_cost_coeff: r(0.2, 0.8),
            privacy_cost_coeff: r(1.0, 5.0),
            reference_variance: r(1.8, 2.2),
            intent_prior: r(0.5, 0.5),
            eps_range: [0.1, 5.0],
            payment_granularity: 1.0,
            budget_granularity: 1.0,
            trace: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_tasks == 0 {
            return Err(Error::Config("num_tasks must be >= 1".into()));
        }
        if self.num_workers == 0 && self.trace.is_none() {
            return Err(Error::Config("num_workers must be >= 1".into()));
        }
        self.arrival_prob.check("arrival_prob", 0.0, 1.0)?;
        self.capability.check("capability", f64::MIN_POSITIVE, f64::MAX)?;
        self.payment.check("payment", 0.0, f64::MAX)?;
        self.budget.check("budget", 0.0, f64::MAX)?;
        self.quality_demand.check("quality_demand", f64::MIN_POSITIVE, f64::MAX)?;
        self.redundancy.check("redundancy", 0.0, 1.0 - f64::EPSILON)?;
        self.travel_cost_coeff.check("travel_cost_coeff", 0.0, f64::MAX)?;
        self.privacy_cost_coeff.check("privacy_cost_coeff", 0.0, f64::MAX)?;
        self.reference_variance.check("reference_variance", f64::MIN_POSITIVE, f64::MAX)?;
        self.intent_prior.check("intent_prior", 0.0, 1.0)?;
        if self.eps_range[0] <= 0.0 || self.eps_range[0] > self.eps_range[1] {
            return Err(Error::Config(format!(
                "eps_range [{}, {}] must satisfy 0 < min <= max",
                self.eps_range[0], self.eps_range[1]
            )));
        }
        if let Some(trace) = &self.trace {
            trace.validate()?;
        }
        Ok(())
    }
}

/// A sensing task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub location: [f64; 2],
    /// Nominal budget B.
    pub budget: f64,
    /// Minimum acceptable aggregated quality.
    pub quality_demand: f64,
    /// Redundancy correlation coefficient in [0, 1).
    pub redundancy: f64,
    /// Task-dependent reference variance under standard sensing conditions.
    pub reference_variance: f64,
}

/// A sensing worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: usize,
    pub location: [f64; 2],
    /// Privacy-budget search interval [eps_min, eps_max].
    pub eps_range: [f64; 2],
    /// Sensing capability; larger means smaller observation error.
    pub capability: f64,
    /// Probability the worker is actually present at execution time.
    pub arrival_prob: f64,
    /// Currency per unit travel distance.
    pub travel_cost_coeff: f64,
    /// Currency scale of the privacy compensation demand.
    pub privacy_cost_coeff: f64,
    /// Per-task data-variance overrides; absent entries mean 0.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub data_variance: BTreeMap<usize, f64>,
}

impl Worker {
    pub fn data_variance_for(&self, task: usize) -> f64 {
        self.data_variance.get(&task).copied().unwrap_or(0.0)
    }
}

/// Immutable market instance.
///
/// Matrices are task-major (`m[i][j]`); intent vectors are per worker over
/// tasks (`true_intents[j][i]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tasks: Vec<Task>,
    pub workers: Vec<Worker>,
    pub payment: Vec<Vec<f64>>,
    pub exe_cost: Vec<Vec<f64>>,
    pub quality: Vec<Vec<f64>>,
    pub intent_prior: Vec<Vec<f64>>,
    pub true_intents: Vec<Vec<bool>>,
    pub econ: EconParams,
    pub rng_seed: u64,
}

/// Everything the platform legitimately sees while planning: market economics
/// and the intent *prior*, but never the true intent vectors. Planning code
/// only ever receives this view, so the perturbed-report boundary is enforced
/// by the type system rather than by convention.
#[derive(Debug, Clone, Copy)]
pub struct PlannerView<'a> {
    pub tasks: &'a [Task],
    pub workers: &'a [Worker],
    pub payment: &'a [Vec<f64>],
    pub exe_cost: &'a [Vec<f64>],
    pub quality: &'a [Vec<f64>],
    pub intent_prior: &'a [Vec<f64>],
    pub econ: &'a EconParams,
    pub rng_seed: u64,
}

impl Scenario {
    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_workers(&self) -> usize {
        self.workers.len()
    }

    pub fn planner_view(&self) -> PlannerView<'_> {
        PlannerView {
            tasks: &self.tasks,
            workers: &self.workers,
            payment: &self.payment,
            exe_cost: &self.exe_cost,
            quality: &self.quality,
            intent_prior: &self.intent_prior,
            econ: &self.econ,
            rng_seed: self.rng_seed,
        }
    }

    /// Copy of this market with every redundancy coefficient forced to zero
    /// (linear quality aggregation).
    pub fn with_linear_quality(&self) -> Scenario {
        let mut s = self.clone();
        for t in &mut s.tasks {
            t.redundancy = 0.0;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let (nt, nw) = (self.tasks.len(), self.workers.len());
        let dims_ok = |m: &[Vec<f64>]| m.len() == nt && m.iter().all(|row| row.len() == nw);
        if !dims_ok(&self.payment)
            || !dims_ok(&self.exe_cost)
            || !dims_ok(&self.quality)
            || !dims_ok(&self.intent_prior)
        {
            return Err(Error::Config("matrix dimensions must be |tasks| x |workers|".into()));
        }
        if self.true_intents.len() != nw || self.true_intents.iter().any(|b| b.len() != nt) {
            return Err(Error::Config("true_intents must be |workers| vectors over tasks".into()));
        }
        for t in &self.tasks {
            if !(0.0..1.0).contains(&t.redundancy)
                || t.budget < 0.0
                || t.quality_demand <= 0.0
                || t.reference_variance <= 0.0
            {
                return Err(Error::Config(format!("task {} violates its invariants", t.id)));
            }
        }
        for w in &self.workers {
            if w.eps_range[0] > w.eps_range[1]
                || w.eps_range[0] <= 0.0
                || !(0.0..=1.0).contains(&w.arrival_prob)
                || w.capability <= 0.0
            {
                return Err(Error::Config(format!("worker {} violates its invariants", w.id)));
            }
        }
        // Precision round-trip: q must equal the inverse of the composed
        // error variance.
        for (i, t) in self.tasks.iter().enumerate() {
            for (j, w) in self.workers.iter().enumerate() {
                let var = t.reference_variance / w.capability + w.data_variance_for(i);
                let prod = self.quality[i][j] * var;
                if (prod - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "quality[{i}][{j}] does not equal inverse error variance (q*var = {prod})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Assemble a market from explicit components. The requested quality
    /// entries are installed through per-pair data variances so the
    /// precision identity holds; workers need small enough
    /// `reference_variance / capability` headroom for every target.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        tasks: Vec<Task>,
        mut workers: Vec<Worker>,
        payment: Vec<Vec<f64>>,
        exe_cost: Vec<Vec<f64>>,
        quality_targets: Vec<Vec<f64>>,
        intent_prior: Vec<Vec<f64>>,
        true_intents: Vec<Vec<bool>>,
        econ: EconParams,
        rng_seed: u64,
    ) -> Result<Scenario> {
        let mut quality = vec![vec![0.0; workers.len()]; tasks.len()];
        for (i, t) in tasks.iter().enumerate() {
            for (j, w) in workers.iter_mut().enumerate() {
                let target = quality_targets[i][j];
                if target <= 0.0 {
                    return Err(Error::Config(format!("quality[{i}][{j}] must be > 0")));
                }
                let dv = 1.0 / target - t.reference_variance / w.capability;
                if dv < 0.0 {
                    return Err(Error::Config(format!(
                        "quality[{i}][{j}] = {target} exceeds the capability ceiling"
                    )));
                }
                w.data_variance.insert(i, dv);
                quality[i][j] = precision(t.reference_variance, w.capability, dv);
            }
        }
        let scenario = Scenario {
            tasks,
            workers,
            payment,
            exe_cost,
            quality,
            intent_prior,
            true_intents,
            econ,
            rng_seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// JSON export with stable key ordering (struct declaration order).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Scenario> {
        let scn: Scenario = serde_json::from_str(s)?;
        scn.validate()?;
        Ok(scn)
    }
}

/// Realized per-worker availability for one execution epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalVector(pub Vec<bool>);

impl ArrivalVector {
    pub fn arrived(&self, worker: usize) -> bool {
        self.0[worker]
    }
}

pub fn euclidean(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Single-shot precision from capability and data variance.
pub fn precision(reference_variance: f64, capability: f64, data_variance: f64) -> f64 {
    1.0 / (reference_variance / capability + data_variance)
}

/// Generate a synthetic market. Identical `(config, seed)` pairs produce
/// bit-identical scenarios; trace-backed configs are delegated to
/// [`crate::trace::ingest_trace`].
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    if let Some(trace) = &config.trace {
        return crate::trace::ingest_trace(std::path::Path::new(&trace.path), config, seed);
    }

    let nt = config.num_tasks;
    let nw = config.num_workers;

    let mut tasks = Vec::with_capacity(nt);
    for i in 0..nt {
        let mut r = rng::stream(seed, "task", &[i as u64]);
        let location = [r.gen::<f64>(), r.gen::<f64>()];
        let budget = snap(
            config.budget.sample(&mut r),
            config.budget_granularity,
            config.budget.min,
            config.budget.max,
        );
        tasks.push(Task {
            id: i,
            location,
            budget,
            quality_demand: config.quality_demand.sample(&mut r),
            redundancy: config.redundancy.sample(&mut r),
            reference_variance: config.reference_variance.sample(&mut r),
        });
    }

    let mut workers = Vec::with_capacity(nw);
    for j in 0..nw {
        let mut r = rng::stream(seed, "worker", &[j as u64]);
        workers.push(Worker {
            id: j,
            location: [r.gen::<f64>(), r.gen::<f64>()],
            eps_range: config.eps_range,
            capability: config.capability.sample(&mut r),
            arrival_prob: config.arrival_prob.sample(&mut r),
            travel_cost_coeff: config.travel_cost_coeff.sample(&mut r),
            privacy_cost_coeff: config.privacy_cost_coeff.sample(&mut r),
            data_variance: BTreeMap::new(),
        });
    }

    let mut payment = vec![vec![0.0; nw]; nt];
    let mut exe_cost = vec![vec![0.0; nw]; nt];
    let mut quality = vec![vec![0.0; nw]; nt];
    let mut intent_prior = vec![vec![0.0; nw]; nt];
    let mut true_intents = vec![vec![false; nt]; nw];
    for i in 0..nt {
        for j in 0..nw {
            let key = [i as u64, j as u64];
            let p = config.payment.min
                + (config.payment.max - config.payment.min) * rng::unit_uniform(seed, "payment", &key);
            payment[i][j] = snap(p, config.payment_granularity, config.payment.min, config.payment.max);
            exe_cost[i][j] =
                workers[j].travel_cost_coeff * euclidean(workers[j].location, tasks[i].location);
            quality[i][j] = precision(tasks[i].reference_variance, workers[j].capability, 0.0);
            let phi = config.intent_prior.min
                + (config.intent_prior.max - config.intent_prior.min)
                    * rng::unit_uniform(seed, "prior", &key);
            intent_prior[i][j] = phi;
            true_intents[j][i] = rng::unit_uniform(seed, "intent", &key) < phi;
        }
    }

    let scenario = Scenario {
        tasks,
        workers,
        payment,
        exe_cost,
        quality,
        intent_prior,
        true_intents,
        econ: EconParams::default(),
        rng_seed: seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Sample one Bernoulli arrival vector. Deterministic in
/// `(scenario.rng_seed, epoch_seed)`.
pub fn sample_arrivals(scenario: &Scenario, epoch_seed: u64) -> ArrivalVector {
    ArrivalVector(
        scenario
            .workers
            .iter()
            .enumerate()
            .map(|(j, w)| {
                rng::unit_uniform(scenario.rng_seed, "arrival", &[epoch_seed, j as u64])
                    < w.arrival_prob
            })
            .collect(),
    )
}
