//! Offline pre-planning game: candidate construction, budget-constrained
//! subset search, Monte-Carlo potential estimation over stochastic arrivals,
//! asynchronous max-gain improvement dynamics and equilibrium verification.
//!
//! The potential is the expected social welfare in its quality-minus-cost
//! form (payments cancel). It decomposes per task, so a unilateral update
//! changes exactly one term and the exact-potential identity holds at the
//! estimator level whenever both sides share an arrival sample set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{self, InteractionRecord, Stage};
use crate::market::PlannerView;
use crate::privacy::CalibratedEps;
use crate::quality;
use crate::rng;

/// Monetary comparison slack for non-cent-aligned inputs.
const MONEY_EPS: f64 = 1e-6;

/// Subset-enumeration cutoff: up to 2^15 strategies are searched exhaustively.
pub const ENUM_LIMIT_BITS: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// Among equal gains pick the lowest task index; knapsack ties resolve to
    /// the lexicographically smallest worker-id set.
    LowestTaskId,
}

/// Planner knobs shared by both game stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    /// Monte-Carlo sample count for potential estimates and risk screens.
    pub mc_samples: usize,
    /// Strict-ascent threshold: updates must improve the potential by more.
    pub improve_eps: f64,
    /// Offline round cap.
    pub t_max: usize,
    /// Online round cap; `None` means 4 * |unmet tasks|.
    pub r_max: Option<usize>,
    pub tie_break: TieBreak,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            mc_samples: 200,
            improve_eps: 1e-4,
            t_max: 500,
            r_max: None,
            tie_break: TieBreak::LowestTaskId,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if self.mc_samples == 0 {
            return Err(Error::Config("mc_samples must be >= 1".into()));
        }
        if !self.improve_eps.is_finite() || self.improve_eps <= 0.0 {
            return Err(Error::Config("improve_eps must be > 0".into()));
        }
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Joint offline strategy: a sorted worker-id set per task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractProfile {
    pub assigned: Vec<Vec<usize>>,
}

impl ContractProfile {
    pub fn empty(num_tasks: usize) -> Self {
        Self { assigned: vec![Vec::new(); num_tasks] }
    }

    pub fn contains(&self, task: usize, worker: usize) -> bool {
        self.assigned[task].binary_search(&worker).is_ok()
    }

    /// Which task each worker is contracted to, if any.
    pub fn owner_map(&self, num_workers: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; num_workers];
        for (i, set) in self.assigned.iter().enumerate() {
            for j in set {
                owner[*j] = Some(i);
            }
        }
        owner
    }

    pub fn assigned_workers(&self) -> impl Iterator<Item = usize> + '_ {
        self.assigned.iter().flatten().copied()
    }

    pub fn reserved_payment(&self, payment: &[Vec<f64>], task: usize) -> f64 {
        self.assigned[task].iter().map(|j| payment[task][*j]).sum()
    }
}

/// Privacy cost per worker: `lambda / eps`. Workers without a feasible
/// budget get 0 here and are excluded from every candidate set instead.
pub fn privacy_costs(view: &PlannerView, eps: &[CalibratedEps]) -> Vec<f64> {
    view.workers
        .iter()
        .zip(eps)
        .map(|(w, e)| match e {
            CalibratedEps::Feasible(eps) => w.privacy_cost_coeff / eps,
            CalibratedEps::Infeasible => 0.0,
        })
        .collect()
}

pub fn worker_cost(view: &PlannerView, task: usize, worker: usize, priv_cost: f64) -> f64 {
    view.exe_cost[task][worker] + priv_cost
}

/// Per-task candidate sets from perturbed reports: a worker qualifies iff its
/// report marks the task, the payment covers its full cost, and calibration
/// succeeded. Never reads true intents.
pub fn build_candidates(
    view: &PlannerView,
    reports: &[Vec<bool>],
    eps: &[CalibratedEps],
) -> Vec<Vec<usize>> {
    let priv_cost = privacy_costs(view, eps);
    (0..view.tasks.len())
        .map(|i| {
            (0..view.workers.len())
                .filter(|&j| {
                    matches!(eps[j], CalibratedEps::Feasible(_))
                        && reports[j][i]
                        && view.payment[i][j] >= worker_cost(view, i, j, priv_cost[j])
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct KnapsackItem {
    pub id: usize,
    pub price: f64,
    pub value: f64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact 0/1 knapsack over integer-cent weights. Returns the subset of item
/// ids maximizing total value under the price budget; ties resolve to the
/// lexicographically smallest id set (so a zero-value item is taken exactly
/// when something of positive value still follows). Negative-value items
/// never improve the optimum and are dropped up front.
pub fn knapsack_select(items: &[KnapsackItem], budget: f64) -> Vec<usize> {
    if budget < 0.0 {
        return Vec::new();
    }
    let capacity_cents = (budget * 100.0 + 1e-9).floor() as u64;
    let mut picked: Vec<(usize, u64, f64)> = items
        .iter()
        .filter(|it| it.value >= 0.0)
        .map(|it| (it.id, (it.price * 100.0 - 1e-9).ceil().max(0.0) as u64, it.value))
        .filter(|(_, w, _)| *w <= capacity_cents)
        .collect();
    picked.sort_by_key(|(id, _, _)| *id);
    if picked.is_empty() {
        return Vec::new();
    }

    // Scale down by the common granularity (whole currency units give 100x).
    let mut g = capacity_cents;
    for (_, w, _) in &picked {
        if *w > 0 {
            g = gcd(g, *w);
        }
    }
    let g = g.max(1);
    let cap = (capacity_cents / g) as usize;
    let n = picked.len();

    // Suffix table: dp[idx][c] = best value from items idx.. with capacity c.
    let width = cap + 1;
    let mut dp = vec![0.0f64; (n + 1) * width];
    for idx in (0..n).rev() {
        let (_, w, v) = picked[idx];
        let w = (w / g) as usize;
        for c in 0..=cap {
            let skip = dp[(idx + 1) * width + c];
            let take = if w <= c { v + dp[(idx + 1) * width + (c - w)] } else { f64::NEG_INFINITY };
            dp[idx * width + c] = if take >= skip { take } else { skip };
        }
    }

    // Greedy reconstruction from the smallest id: including an item whenever
    // it preserves the optimum yields the lexicographically smallest set.
    // Once the remaining optimum is zero the empty continuation is the
    // smallest one, so reconstruction stops there.
    let mut chosen = Vec::new();
    let mut c = cap;
    for idx in 0..n {
        if dp[idx * width + c] <= 0.0 {
            break;
        }
        let (id, w, v) = picked[idx];
        let w = (w / g) as usize;
        if w <= c && v + dp[(idx + 1) * width + (c - w)] == dp[idx * width + c] {
            chosen.push(id);
            c -= w;
        }
    }
    chosen
}

/// Arrival sample context: `samples` common-random-number draws keyed by
/// `(seed, round_key)`, shared across every evaluation made with the same
/// context.
#[derive(Debug, Clone, Copy)]
pub struct SampleCtx {
    pub seed: u64,
    pub round_key: u64,
    pub samples: usize,
}

impl SampleCtx {
    pub fn new(seed: u64, round_key: u64, samples: usize) -> Self {
        Self { seed, round_key, samples }
    }

    #[inline]
    pub fn arrived(&self, k: usize, worker: usize, arrival_prob: f64) -> bool {
        rng::unit_uniform(self.seed, "mc-arrival", &[self.round_key, k as u64, worker as u64])
            < arrival_prob
    }
}

/// Realized welfare contribution of one task under one arrival vector:
/// `omega3 * Q_i(arrived) - sum of arrived worker costs`.
fn task_term(
    view: &PlannerView,
    task: usize,
    set: &[usize],
    priv_cost: &[f64],
    arrived: impl Fn(usize) -> bool,
) -> f64 {
    let zeta = view.tasks[task].redundancy;
    let mut sum_q = 0.0;
    let mut cost = 0.0;
    let mut n = 0usize;
    for &j in set {
        if arrived(j) {
            sum_q += view.quality[task][j];
            cost += worker_cost(view, task, j, priv_cost[j]);
            n += 1;
        }
    }
    let agg = if n == 0 { 0.0 } else { sum_q / (1.0 + (n as f64 - 1.0) * zeta) };
    view.econ.omega3 * agg - cost
}

fn expected_task_term(
    view: &PlannerView,
    task: usize,
    set: &[usize],
    priv_cost: &[f64],
    ctx: SampleCtx,
) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..ctx.samples {
        acc += task_term(view, task, set, priv_cost, |j| {
            ctx.arrived(k, j, view.workers[j].arrival_prob)
        });
    }
    acc / ctx.samples as f64
}

/// Realized social welfare of a full profile under a concrete arrival vector.
pub fn realized_social_welfare(
    view: &PlannerView,
    profile: &ContractProfile,
    priv_cost: &[f64],
    arrivals: &crate::market::ArrivalVector,
) -> f64 {
    (0..view.tasks.len())
        .map(|i| task_term(view, i, &profile.assigned[i], priv_cost, |j| arrivals.arrived(j)))
        .sum()
}

/// Monte-Carlo estimate of the expected social welfare of a profile. The
/// sample set is fully determined by `(view.rng_seed, round_key)`, so two
/// profiles evaluated with the same key share their arrival draws.
pub fn estimate_potential(
    view: &PlannerView,
    profile: &ContractProfile,
    priv_cost: &[f64],
    samples: usize,
    round_key: u64,
) -> f64 {
    let ctx = SampleCtx::new(view.rng_seed, round_key, samples);
    (0..view.tasks.len())
        .map(|i| expected_task_term(view, i, &profile.assigned[i], priv_cost, ctx))
        .sum()
}

/// Task payoff as the marginal contribution to the potential:
/// `Phi(a) - Phi(empty_i, a_-i)`, both estimated on the same sample set.
pub fn marginal_payoff(
    view: &PlannerView,
    profile: &ContractProfile,
    task: usize,
    priv_cost: &[f64],
    samples: usize,
    round_key: u64,
) -> f64 {
    let full = estimate_potential(view, profile, priv_cost, samples, round_key);
    let mut without = profile.clone();
    without.assigned[task].clear();
    full - estimate_potential(view, &without, priv_cost, samples, round_key)
}

/// Monte-Carlo quality-failure probability of a contracted set, on the fixed
/// per-run sample set keyed `(seed, "quality-screen", k, worker)`. This is
/// the screen the planner enforces; the exact enumerator in
/// [`quality::quality_risk`] is its test oracle.
pub fn screen_quality_risk(view: &PlannerView, task: usize, set: &[usize], samples: usize) -> f64 {
    let zeta = view.tasks[task].redundancy;
    let demand = view.tasks[task].quality_demand;
    let mut fails = 0usize;
    for k in 0..samples {
        let mut sum_q = 0.0;
        let mut n = 0usize;
        for &j in set {
            if rng::unit_uniform(view.rng_seed, "quality-screen", &[k as u64, j as u64])
                < view.workers[j].arrival_prob
            {
                sum_q += view.quality[task][j];
                n += 1;
            }
        }
        let agg = if n == 0 { 0.0 } else { sum_q / (1.0 + (n as f64 - 1.0) * zeta) };
        if agg < demand {
            fails += 1;
        }
    }
    fails as f64 / samples as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    Exclusivity { worker: usize, tasks: Vec<usize> },
    Budget { task: usize, reserved: f64, budget: f64 },
    QualityRisk { task: usize, risk: f64, cap: f64 },
    PrefRisk { worker: usize, risk: f64, cap: f64 },
}

/// Whether the quality-risk constraint applies to every task or only to
/// tasks with a nonempty contracted set. The planner accepts candidates only
/// when they pass the screen, so unfilled tasks are reported separately
/// instead of counted as violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityRiskScope {
    AllTasks,
    FilledOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub unfilled_tasks: Vec<usize>,
    pub quality_risk: Vec<f64>,
    pub pref_risk: Vec<f64>,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify exclusivity, per-task reserved budget, the quality-risk screen and
/// the per-worker intent-mismatch risk, listing every violated constraint.
pub fn check_feasible(
    view: &PlannerView,
    profile: &ContractProfile,
    params: &PlannerParams,
    scope: QualityRiskScope,
) -> FeasibilityReport {
    let mut violations = Vec::new();
    let nw = view.workers.len();

    let mut tasks_of = vec![Vec::new(); nw];
    for (i, set) in profile.assigned.iter().enumerate() {
        for &j in set {
            tasks_of[j].push(i);
        }
    }
    for (j, tasks) in tasks_of.iter().enumerate() {
        if tasks.len() > 1 {
            violations.push(Violation::Exclusivity { worker: j, tasks: tasks.clone() });
        }
    }

    let mut unfilled = Vec::new();
    let mut quality_risk = Vec::with_capacity(view.tasks.len());
    for (i, task) in view.tasks.iter().enumerate() {
        let reserved = profile.reserved_payment(view.payment, i);
        if reserved > task.budget + MONEY_EPS {
            violations.push(Violation::Budget { task: i, reserved, budget: task.budget });
        }
        let risk = screen_quality_risk(view, i, &profile.assigned[i], params.mc_samples);
        quality_risk.push(risk);
        if profile.assigned[i].is_empty() {
            unfilled.push(i);
            if scope == QualityRiskScope::AllTasks && risk > view.econ.rho1 {
                violations.push(Violation::QualityRisk { task: i, risk, cap: view.econ.rho1 });
            }
        } else if risk > view.econ.rho1 {
            violations.push(Violation::QualityRisk { task: i, risk, cap: view.econ.rho1 });
        }
    }

    let num_tasks = view.tasks.len();
    let mut pref = Vec::with_capacity(nw);
    for j in 0..nw {
        let mut row = vec![false; num_tasks];
        let mut phi = vec![0.0; num_tasks];
        for i in 0..num_tasks {
            row[i] = profile.contains(i, j);
            phi[i] = view.intent_prior[i][j];
        }
        let risk = quality::pref_risk(&row, &phi);
        pref.push(risk);
        if risk > view.econ.rho2 + 1e-12 {
            violations.push(Violation::PrefRisk { worker: j, risk, cap: view.econ.rho2 });
        }
    }

    FeasibilityReport { violations, unfilled_tasks: unfilled, quality_risk, pref_risk: pref }
}

/// How a task's improving move is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchMode {
    /// Budget knapsack over the surrogate per-worker values.
    Surrogate,
    /// Exhaustive subset search (small pools), knapsack otherwise.
    Exact,
}

pub struct MoveSearch<'a> {
    pub view: &'a PlannerView<'a>,
    pub candidates: &'a [Vec<usize>],
    pub priv_cost: &'a [f64],
    pub params: &'a PlannerParams,
    pub ctx: SampleCtx,
}

#[derive(Debug, Clone)]
pub struct Move {
    pub set: Vec<usize>,
    /// Full potential gain versus the current profile on the shared samples.
    pub gain: f64,
    pub mode: SearchMode,
}

impl<'a> MoveSearch<'a> {
    /// Workers a task may select this round: its own contracted workers plus
    /// the idle pool, intersected with its candidate set, minus workers whose
    /// single-assignment mismatch risk would already break the cap.
    pub fn available(&self, profile: &ContractProfile, task: usize) -> Vec<usize> {
        let owner = profile.owner_map(self.view.workers.len());
        let num_tasks = self.view.tasks.len() as f64;
        self.candidates[task]
            .iter()
            .copied()
            .filter(|&j| owner[j].is_none() || owner[j] == Some(task))
            .filter(|&j| {
                (1.0 - self.view.intent_prior[task][j]) / num_tasks
                    <= self.view.econ.rho2 + 1e-12
            })
            .collect()
    }

    fn knapsack_proposal(&self, task: usize, avail: &[usize]) -> Vec<usize> {
        let items: Vec<KnapsackItem> = avail
            .iter()
            .map(|&j| {
                let w = &self.view.workers[j];
                KnapsackItem {
                    id: j,
                    price: self.view.payment[task][j],
                    value: w.arrival_prob
                        * (self.view.econ.omega3 * self.view.quality[task][j]
                            - worker_cost(self.view, task, j, self.priv_cost[j])),
                }
            })
            .collect();
        knapsack_select(&items, self.view.tasks[task].budget)
    }

    fn passes_screens(&self, task: usize, set: &[usize]) -> bool {
        if set.is_empty() {
            return true;
        }
        let reserved: f64 = set.iter().map(|j| self.view.payment[task][*j]).sum();
        if reserved > self.view.tasks[task].budget + MONEY_EPS {
            return false;
        }
        screen_quality_risk(self.view, task, set, self.params.mc_samples) <= self.view.econ.rho1
    }

    /// Exhaustive best unilateral deviation for pools of at most
    /// [`ENUM_LIMIT_BITS`] workers. Returns the subset with the largest
    /// estimated gain (ties: first in mask order) that passes the screens.
    fn enumerate_proposal(
        &self,
        profile: &ContractProfile,
        task: usize,
        avail: &[usize],
    ) -> Option<Vec<usize>> {
        let n = avail.len();
        let m = self.ctx.samples;
        let budget = self.view.tasks[task].budget + MONEY_EPS;
        let zeta = self.view.tasks[task].redundancy;
        let demand = self.view.tasks[task].quality_demand;
        let omega3 = self.view.econ.omega3;

        let qs: Vec<f64> = avail.iter().map(|&j| self.view.quality[task][j]).collect();
        let costs: Vec<f64> =
            avail.iter().map(|&j| worker_cost(self.view, task, j, self.priv_cost[j])).collect();
        let prices: Vec<f64> = avail.iter().map(|&j| self.view.payment[task][j]).collect();

        // Common-random-number arrival masks for the potential samples and
        // the (independent) quality-risk screen samples.
        let mut pmask = vec![0u16; m];
        let mut qmask = vec![0u16; m];
        for k in 0..m {
            for (idx, &j) in avail.iter().enumerate() {
                let pi = self.view.workers[j].arrival_prob;
                if self.ctx.arrived(k, j, pi) {
                    pmask[k] |= 1 << idx;
                }
                if rng::unit_uniform(self.view.rng_seed, "quality-screen", &[k as u64, j as u64])
                    < pi
                {
                    qmask[k] |= 1 << idx;
                }
            }
        }

        let current_mean = expected_task_term(
            self.view,
            task,
            &profile.assigned[task],
            self.priv_cost,
            self.ctx,
        );

        let mut best: Option<(f64, u16)> = None;
        for mask in 0u32..(1u32 << n) {
            let mask = mask as u16;
            let mut price_sum = 0.0;
            for (idx, price) in prices.iter().enumerate() {
                if mask >> idx & 1 == 1 {
                    price_sum += price;
                }
            }
            if price_sum > budget {
                continue;
            }
            if mask != 0 {
                // quality-risk screen on the fixed per-run samples
                let mut fails = 0usize;
                for &am in &qmask {
                    let arrived = mask & am;
                    let mut sum_q = 0.0;
                    let mut cnt = 0u32;
                    let mut bits = arrived;
                    while bits != 0 {
                        let idx = bits.trailing_zeros() as usize;
                        sum_q += qs[idx];
                        cnt += 1;
                        bits &= bits - 1;
                    }
                    let agg =
                        if cnt == 0 { 0.0 } else { sum_q / (1.0 + (cnt as f64 - 1.0) * zeta) };
                    if agg < demand {
                        fails += 1;
                    }
                }
                if fails as f64 / m as f64 > self.view.econ.rho1 {
                    continue;
                }
            }
            // estimated term of this subset on the shared samples
            let mut acc = 0.0;
            if mask != 0 {
                for &am in &pmask {
                    let arrived = mask & am;
                    let mut sum_q = 0.0;
                    let mut cost = 0.0;
                    let mut cnt = 0u32;
                    let mut bits = arrived;
                    while bits != 0 {
                        let idx = bits.trailing_zeros() as usize;
                        sum_q += qs[idx];
                        cost += costs[idx];
                        cnt += 1;
                        bits &= bits - 1;
                    }
                    let agg =
                        if cnt == 0 { 0.0 } else { sum_q / (1.0 + (cnt as f64 - 1.0) * zeta) };
                    acc += omega3 * agg - cost;
                }
            }
            let delta = acc / m as f64 - current_mean;
            if best.is_none_or(|(g, _)| delta > g) {
                best = Some((delta, mask));
            }
        }

        best.map(|(_, mask)| {
            (0..n).filter(|idx| mask >> idx & 1 == 1).map(|idx| avail[idx]).collect()
        })
    }

    /// Best feasible unilateral move for `task` against the current profile,
    /// with its full-estimate potential gain. `None` when no screened
    /// proposal differs from the current set.
    pub fn best_move(&self, profile: &ContractProfile, task: usize, mode: SearchMode) -> Option<Move> {
        let avail = self.available(profile, task);
        let (proposal, used_mode) = match mode {
            SearchMode::Exact if (avail.len() as u32) <= ENUM_LIMIT_BITS => {
                (self.enumerate_proposal(profile, task, &avail)?, SearchMode::Exact)
            }
            _ => {
                let set = self.knapsack_proposal(task, &avail);
                if !self.passes_screens(task, &set) {
                    return None;
                }
                (set, SearchMode::Surrogate)
            }
        };
        if proposal == profile.assigned[task] {
            return None;
        }
        let mut next = profile.clone();
        next.assigned[task] = proposal.clone();
        let gain = estimate_potential(self.view, &next, self.priv_cost, self.ctx.samples, self.ctx.round_key)
            - estimate_potential(self.view, profile, self.priv_cost, self.ctx.samples, self.ctx.round_key);
        Some(Move { set: proposal, gain, mode: used_mode })
    }
}

/// Result of the offline improvement dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct OfflinePlan {
    pub profile: ContractProfile,
    /// Estimated potential after initialization and after every accepted
    /// update; strictly increasing by more than `improve_eps` per step.
    pub potential_trace: Vec<f64>,
    pub rounds: u32,
    pub accepted_updates: usize,
    pub converged: bool,
    pub unfilled_tasks: Vec<usize>,
    /// Key of the arrival sample set used for all potential estimates.
    pub sample_key: u64,
}

/// Asynchronous max-gain feasible-improvement dynamics over the offline
/// game. Rounds search each task's knapsack proposal; at quiescence the
/// search switches to exhaustive deviations for small pools, so termination
/// certifies a constrained equilibrium of the estimated game. At most one
/// task updates per round; ties go to the lowest task id. Accepted contract
/// changes are logged as offer/confirm exchanges (the game itself runs
/// platform-side over already-collected reports).
pub fn plan_offline(
    view: &PlannerView,
    candidates: &[Vec<usize>],
    priv_cost: &[f64],
    params: &PlannerParams,
    sample_key: u64,
    log: &mut Vec<InteractionRecord>,
) -> Result<OfflinePlan> {
    params.validate()?;
    let num_tasks = view.tasks.len();
    let ctx = SampleCtx::new(view.rng_seed, sample_key, params.mc_samples);
    let search = MoveSearch { view, candidates, priv_cost, params, ctx };

    let mut profile = ContractProfile::empty(num_tasks);
    let mut trace = vec![0.0f64];
    let mut accepted = 0usize;
    let mut converged = false;
    let mut rounds = 0u32;

    while (rounds as usize) < params.t_max {
        let mut best: Option<(usize, Move)> = None;
        let consider = |task: usize, mv: Move, best: &mut Option<(usize, Move)>| {
            let better = match best {
                None => true,
                Some((bt, bm)) => mv.gain > bm.gain || (mv.gain == bm.gain && task < *bt),
            };
            if better {
                *best = Some((task, mv));
            }
        };
        for task in 0..num_tasks {
            if let Some(mv) = search.best_move(&profile, task, SearchMode::Surrogate) {
                if mv.gain > params.improve_eps {
                    consider(task, mv, &mut best);
                }
            }
        }
        if best.is_none() {
            // Quiescent under the surrogate search: certify with exhaustive
            // deviations before declaring equilibrium.
            for task in 0..num_tasks {
                if let Some(mv) = search.best_move(&profile, task, SearchMode::Exact) {
                    if mv.gain > params.improve_eps {
                        consider(task, mv, &mut best);
                    }
                }
            }
        }
        let Some((task, mv)) = best else {
            converged = true;
            break;
        };
        // contract notifications: offers to added workers, releases to dropped
        for &j in &mv.set {
            if !profile.assigned[task].contains(&j) {
                interaction::log_exchange(log, Stage::Off, rounds, task as i64, j);
            }
        }
        for &j in &profile.assigned[task] {
            if !mv.set.contains(&j) {
                log.push(InteractionRecord {
                    stage: Stage::Off,
                    round: rounds,
                    task_id: task as i64,
                    worker_id: j,
                    direction: interaction::Direction::Down,
                    bytes: interaction::OFFER_BYTES,
                });
            }
        }
        profile.assigned[task] = mv.set;
        trace.push(trace.last().unwrap() + mv.gain);
        accepted += 1;
        rounds += 1;
    }

    let unfilled =
        (0..num_tasks).filter(|i| profile.assigned[*i].is_empty()).collect();
    Ok(OfflinePlan {
        profile,
        potential_trace: trace,
        rounds,
        accepted_updates: accepted,
        converged,
        unfilled_tasks: unfilled,
        sample_key,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskVerdict {
    pub task: usize,
    pub mode: SearchMode,
    pub best_gain: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeReport {
    pub is_ne: bool,
    pub verdicts: Vec<TaskVerdict>,
}

/// Confirm that no task has a feasible unilateral deviation improving its
/// estimated payoff by more than `improve_eps` on the designated sample set.
/// Pools above 2^15 subsets fall back to the knapsack search; the report
/// records which mode ran per task.
pub fn verify_equilibrium(
    view: &PlannerView,
    profile: &ContractProfile,
    candidates: &[Vec<usize>],
    priv_cost: &[f64],
    params: &PlannerParams,
    sample_key: u64,
) -> NeReport {
    let ctx = SampleCtx::new(view.rng_seed, sample_key, params.mc_samples);
    let search = MoveSearch { view, candidates, priv_cost, params, ctx };
    let mut verdicts = Vec::new();
    let mut is_ne = true;
    for task in 0..view.tasks.len() {
        let avail = search.available(profile, task);
        let mode = if (avail.len() as u32) <= ENUM_LIMIT_BITS {
            SearchMode::Exact
        } else {
            SearchMode::Surrogate
        };
        let gain = match search.best_move(profile, task, SearchMode::Exact) {
            Some(mv) => mv.gain,
            None => 0.0,
        };
        if gain > params.improve_eps {
            is_ne = false;
        }
        verdicts.push(TaskVerdict { task, mode, best_gain: gain });
    }
    NeReport { is_ne, verdicts }
}
