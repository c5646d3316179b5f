//! Execution-time realization and the lightweight temporary-recruitment
//! game: baseline quality from arrived contracted workers, residual budgets,
//! unmet-task and idle-worker derivation, and the online improvement
//! dynamics.
//!
//! Unlike the offline stage, arrivals are realized here, so the potential is
//! the online social welfare itself and every comparison is exact. Online
//! rounds touch real workers, so candidate probes are logged as message
//! exchanges.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interaction::{self, InteractionRecord, Stage};
use crate::market::{ArrivalVector, PlannerView};
use crate::offline::{knapsack_select, ContractProfile, KnapsackItem, PlannerParams, SearchMode, ENUM_LIMIT_BITS};
use crate::privacy::CalibratedEps;

const MONEY_EPS: f64 = 1e-6;

/// Snapshot of the market right after arrivals realize.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionState {
    pub arrivals: ArrivalVector,
    /// Contracted workers that actually arrived, per task.
    pub arrived_offline: Vec<Vec<usize>>,
    /// Redundancy-discounted quality delivered by the arrived contractors.
    pub q_base: Vec<f64>,
    /// Budget left after paying the arrived contractors.
    pub residual_budget: Vec<f64>,
    /// Tasks whose baseline quality misses their demand.
    pub unmet_tasks: Vec<usize>,
    /// Workers not locked by any offline contract (regardless of arrival).
    pub idle_workers: Vec<usize>,
}

/// Derive the execution snapshot from an offline profile and a realized
/// arrival vector. Deterministic.
pub fn realize_execution(
    view: &PlannerView,
    offline_profile: &ContractProfile,
    arrivals: &ArrivalVector,
) -> ExecutionState {
    let num_tasks = view.tasks.len();
    let mut arrived_offline = Vec::with_capacity(num_tasks);
    let mut q_base = Vec::with_capacity(num_tasks);
    let mut residual = Vec::with_capacity(num_tasks);
    let mut unmet = Vec::new();
    for i in 0..num_tasks {
        let arrived: Vec<usize> = offline_profile.assigned[i]
            .iter()
            .copied()
            .filter(|&j| arrivals.arrived(j))
            .collect();
        let qs: Vec<f64> = arrived.iter().map(|&j| view.quality[i][j]).collect();
        let base = crate::quality::aggregate_quality(&qs, view.tasks[i].redundancy)
            .expect("task redundancy validated at construction");
        let paid: f64 = arrived.iter().map(|&j| view.payment[i][j]).sum();
        residual.push(view.tasks[i].budget - paid);
        if base < view.tasks[i].quality_demand {
            unmet.push(i);
        }
        arrived_offline.push(arrived);
        q_base.push(base);
    }
    let owner = offline_profile.owner_map(view.workers.len());
    let idle = (0..view.workers.len()).filter(|&j| owner[j].is_none()).collect();
    ExecutionState {
        arrivals: arrivals.clone(),
        arrived_offline,
        q_base,
        residual_budget: residual,
        unmet_tasks: unmet,
        idle_workers: idle,
    }
}

/// Pooled quality of offline-arrived and online-recruited contributions:
/// numerators add, the redundancy discount counts every participant.
pub fn final_quality(offline_qs: &[f64], online_qs: &[f64], zeta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::Domain(format!("zeta {zeta} outside [0, 1)")));
    }
    let n = offline_qs.len() + online_qs.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = offline_qs.iter().chain(online_qs).sum();
    Ok(sum / (1.0 + (n as f64 - 1.0) * zeta))
}

fn final_quality_for(
    view: &PlannerView,
    state: &ExecutionState,
    task: usize,
    online_set: &[usize],
) -> f64 {
    let offline_qs: Vec<f64> =
        state.arrived_offline[task].iter().map(|&j| view.quality[task][j]).collect();
    let online_qs: Vec<f64> = online_set.iter().map(|&j| view.quality[task][j]).collect();
    final_quality(&offline_qs, &online_qs, view.tasks[task].redundancy)
        .expect("task redundancy validated at construction")
}

/// Online candidate pools: idle workers whose perturbed report marks the
/// task, whose payment covers their cost and whose calibration succeeded.
/// Only unmet tasks get nonempty pools.
pub fn build_online_candidates(
    view: &PlannerView,
    state: &ExecutionState,
    reports: &[Vec<bool>],
    eps: &[CalibratedEps],
) -> Vec<Vec<usize>> {
    let priv_cost = crate::offline::privacy_costs(view, eps);
    let mut pools = vec![Vec::new(); view.tasks.len()];
    for &i in &state.unmet_tasks {
        pools[i] = state
            .idle_workers
            .iter()
            .copied()
            .filter(|&j| {
                matches!(eps[j], CalibratedEps::Feasible(_))
                    && reports[j][i]
                    && view.payment[i][j] >= crate::offline::worker_cost(view, i, j, priv_cost[j])
            })
            .collect();
    }
    pools
}

/// Whether accepted recruit sets must fully restore the quality demand
/// (hard constraint) or merely not be screened on it (experimental mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RestorationRule {
    Strict,
    BestEffort,
}

/// Welfare contribution of one task's online recruit set: quality value of
/// the *online-stage* aggregation minus recruited worker costs.
fn online_task_term(view: &PlannerView, task: usize, set: &[usize], priv_cost: &[f64]) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let qs: Vec<f64> = set.iter().map(|&j| view.quality[task][j]).collect();
    let q_on = crate::quality::aggregate_quality(&qs, view.tasks[task].redundancy)
        .expect("task redundancy validated at construction");
    let cost: f64 =
        set.iter().map(|&j| crate::offline::worker_cost(view, task, j, priv_cost[j])).sum();
    view.econ.omega3 * q_on - cost
}

/// Exact online potential: the online social welfare in its
/// payments-cancelled form.
pub fn online_potential(view: &PlannerView, profile_on: &ContractProfile, priv_cost: &[f64]) -> f64 {
    (0..view.tasks.len())
        .map(|i| online_task_term(view, i, &profile_on.assigned[i], priv_cost))
        .sum()
}

/// Online social welfare of the recruitment profile (alias of the exact
/// potential; the utility-sum form with payments is algebraically equal).
pub fn online_welfare(view: &PlannerView, profile_on: &ContractProfile, priv_cost: &[f64]) -> f64 {
    online_potential(view, profile_on, priv_cost)
}

/// Marginal contribution of one task to the online potential.
pub fn online_marginal_payoff(
    view: &PlannerView,
    profile_on: &ContractProfile,
    task: usize,
    priv_cost: &[f64],
) -> f64 {
    let full = online_potential(view, profile_on, priv_cost);
    let mut without = profile_on.clone();
    without.assigned[task].clear();
    full - online_potential(view, &without, priv_cost)
}

struct OnlineSearch<'a> {
    view: &'a PlannerView<'a>,
    state: &'a ExecutionState,
    candidates: &'a [Vec<usize>],
    priv_cost: &'a [f64],
    rule: RestorationRule,
}

struct OnlineMove {
    set: Vec<usize>,
    gain: f64,
}

impl<'a> OnlineSearch<'a> {
    fn available(&self, profile_on: &ContractProfile, task: usize) -> Vec<usize> {
        let owner = profile_on.owner_map(self.view.workers.len());
        self.candidates[task]
            .iter()
            .copied()
            .filter(|&j| owner[j].is_none() || owner[j] == Some(task))
            .collect()
    }

    fn feasible(&self, task: usize, set: &[usize]) -> bool {
        if set.is_empty() {
            return true;
        }
        let spend: f64 = set.iter().map(|&j| self.view.payment[task][j]).sum();
        if spend > self.state.residual_budget[task] + MONEY_EPS {
            return false;
        }
        match self.rule {
            RestorationRule::Strict => {
                final_quality_for(self.view, self.state, task, set)
                    >= self.view.tasks[task].quality_demand
            }
            RestorationRule::BestEffort => true,
        }
    }

    fn enumerate(&self, profile_on: &ContractProfile, task: usize, avail: &[usize]) -> Vec<usize> {
        let n = avail.len();
        let current = online_task_term(self.view, task, &profile_on.assigned[task], self.priv_cost);
        let mut best_gain = f64::NEG_INFINITY;
        let mut best_mask = 0u32;
        for mask in 0u32..(1u32 << n) {
            let set: Vec<usize> =
                (0..n).filter(|idx| mask >> idx & 1 == 1).map(|idx| avail[idx]).collect();
            if !self.feasible(task, &set) {
                continue;
            }
            let gain = online_task_term(self.view, task, &set, self.priv_cost) - current;
            if gain > best_gain {
                best_gain = gain;
                best_mask = mask;
            }
        }
        (0..n).filter(|idx| best_mask >> idx & 1 == 1).map(|idx| avail[idx]).collect()
    }

    fn best_move(
        &self,
        profile_on: &ContractProfile,
        task: usize,
        mode: SearchMode,
    ) -> Option<OnlineMove> {
        let avail = self.available(profile_on, task);
        let proposal = match mode {
            SearchMode::Exact if (avail.len() as u32) <= ENUM_LIMIT_BITS => {
                self.enumerate(profile_on, task, &avail)
            }
            _ => {
                let items: Vec<KnapsackItem> = avail
                    .iter()
                    .map(|&j| KnapsackItem {
                        id: j,
                        price: self.view.payment[task][j],
                        value: self.view.econ.omega3 * self.view.quality[task][j]
                            - crate::offline::worker_cost(self.view, task, j, self.priv_cost[j]),
                    })
                    .collect();
                let set = knapsack_select(&items, self.state.residual_budget[task]);
                if !self.feasible(task, &set) {
                    return None;
                }
                set
            }
        };
        if proposal == profile_on.assigned[task] {
            return None;
        }
        let mut next = profile_on.clone();
        next.assigned[task] = proposal.clone();
        let gain = online_potential(self.view, &next, self.priv_cost)
            - online_potential(self.view, profile_on, self.priv_cost);
        Some(OnlineMove { set: proposal, gain })
    }
}

/// Result of the online temporary-recruitment dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct OnlinePlan {
    pub profile: ContractProfile,
    pub potential_trace: Vec<f64>,
    pub rounds: u32,
    pub accepted_updates: usize,
    pub converged: bool,
    /// Pooled realized quality per task after recruitment.
    pub final_quality: Vec<f64>,
    /// Unmet tasks whose deficit no feasible recruit set could close.
    pub still_unmet: Vec<usize>,
}

/// Asynchronous max-gain improvement over the online recruitment game.
/// Players are the unmet tasks; candidates are idle workers passing the
/// report and rationality screens; acceptance additionally requires residual
/// budget and (in strict mode) full quality restoration. The potential is
/// exact, so the dynamics terminate by finite improvement or the round cap.
pub fn plan_online(
    view: &PlannerView,
    state: &ExecutionState,
    candidates: &[Vec<usize>],
    priv_cost: &[f64],
    params: &PlannerParams,
    rule: RestorationRule,
    log: &mut Vec<InteractionRecord>,
) -> Result<OnlinePlan> {
    params.validate()?;
    let num_tasks = view.tasks.len();
    let r_max = params.r_max.unwrap_or(4 * state.unmet_tasks.len());
    let search = OnlineSearch { view, state, candidates, priv_cost, rule };

    let mut profile = ContractProfile::empty(num_tasks);
    let mut trace = vec![0.0f64];
    let mut accepted = 0usize;
    let mut rounds = 0u32;
    let mut converged = state.unmet_tasks.is_empty();

    while (rounds as usize) < r_max {
        let mut best: Option<(usize, OnlineMove)> = None;
        for &task in &state.unmet_tasks {
            // Every candidate in the task's pool is probed this round.
            for j in search.available(&profile, task) {
                interaction::log_exchange(log, Stage::On, rounds, task as i64, j);
            }
            // Surrogate search first; exhaustive certification below.
            if let Some(mv) = search.best_move(&profile, task, SearchMode::Surrogate) {
                if mv.gain > params.improve_eps {
                    let better = match &best {
                        None => true,
                        Some((bt, bm)) => mv.gain > bm.gain || (mv.gain == bm.gain && task < *bt),
                    };
                    if better {
                        best = Some((task, mv));
                    }
                }
            }
        }
        if best.is_none() {
            for &task in &state.unmet_tasks {
                if let Some(mv) = search.best_move(&profile, task, SearchMode::Exact) {
                    if mv.gain > params.improve_eps {
                        let better = match &best {
                            None => true,
                            Some((bt, bm)) => {
                                mv.gain > bm.gain || (mv.gain == bm.gain && task < *bt)
                            }
                        };
                        if better {
                            best = Some((task, mv));
                        }
                    }
                }
            }
        }
        let Some((task, mv)) = best else {
            converged = true;
            break;
        };
        profile.assigned[task] = mv.set;
        trace.push(trace.last().unwrap() + mv.gain);
        accepted += 1;
        rounds += 1;
    }

    let mut final_q = Vec::with_capacity(num_tasks);
    let mut still_unmet = Vec::new();
    for i in 0..num_tasks {
        let q = final_quality_for(view, state, i, &profile.assigned[i]);
        if q < view.tasks[i].quality_demand {
            still_unmet.push(i);
        }
        final_q.push(q);
    }
    Ok(OnlinePlan {
        profile,
        potential_trace: trace,
        rounds,
        accepted_updates: accepted,
        converged,
        final_quality: final_q,
        still_unmet,
    })
}

/// Online analog of the equilibrium check: exact potential, deviations over
/// idle candidates under residual budget and restoration constraints.
pub fn verify_equilibrium_online(
    view: &PlannerView,
    state: &ExecutionState,
    profile_on: &ContractProfile,
    candidates: &[Vec<usize>],
    priv_cost: &[f64],
    params: &PlannerParams,
    rule: RestorationRule,
) -> crate::offline::NeReport {
    let search = OnlineSearch { view, state, candidates, priv_cost, rule };
    let mut verdicts = Vec::new();
    let mut is_ne = true;
    for &task in &state.unmet_tasks {
        let avail = search.available(profile_on, task);
        let mode = if (avail.len() as u32) <= ENUM_LIMIT_BITS {
            SearchMode::Exact
        } else {
            SearchMode::Surrogate
        };
        let gain = match search.best_move(profile_on, task, SearchMode::Exact) {
            Some(mv) => mv.gain,
            None => 0.0,
        };
        if gain > params.improve_eps {
            is_ne = false;
        }
        verdicts.push(crate::offline::TaskVerdict { task, mode, best_gain: gain });
    }
    crate::offline::NeReport { is_ne, verdicts }
}

/// Post-hoc audit of the online constraint family: idle-pool exclusivity,
/// residual budgets, individual rationality, quality restoration for tasks
/// that recruited, and the perturbed-intent screen.
pub fn check_online_feasible(
    view: &PlannerView,
    state: &ExecutionState,
    profile_on: &ContractProfile,
    reports: &[Vec<bool>],
    priv_cost: &[f64],
) -> Vec<String> {
    let mut violations = Vec::new();
    let mut seen = vec![false; view.workers.len()];
    for (i, set) in profile_on.assigned.iter().enumerate() {
        if !set.is_empty() && !state.unmet_tasks.contains(&i) {
            violations.push(format!("task {i} recruited online without an unmet demand"));
        }
        let mut spend = 0.0;
        for &j in set {
            if seen[j] {
                violations.push(format!("worker {j} recruited by more than one task"));
            }
            seen[j] = true;
            if !state.idle_workers.contains(&j) {
                violations.push(format!("worker {j} is not idle"));
            }
            if !reports[j][i] {
                violations.push(format!("worker {j} recruited for task {i} without a report"));
            }
            if view.payment[i][j] < crate::offline::worker_cost(view, i, j, priv_cost[j]) {
                violations.push(format!("payment to worker {j} for task {i} below cost"));
            }
            spend += view.payment[i][j];
        }
        if spend > state.residual_budget[i] + MONEY_EPS {
            violations.push(format!(
                "task {i} online spend {spend} exceeds residual {}",
                state.residual_budget[i]
            ));
        }
        if !set.is_empty() {
            let q = final_quality_for(view, state, i, set);
            if q < view.tasks[i].quality_demand {
                violations.push(format!(
                    "task {i} recruited but final quality {q} misses demand {}",
                    view.tasks[i].quality_demand
                ));
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Scenario, Task, Worker};
    use crate::quality::EconParams;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn tiny_market(
        budget: &[f64],
        demand: &[f64],
        zeta: &[f64],
        pi: &[f64],
        payment: Vec<Vec<f64>>,
        quality: Vec<Vec<f64>>,
        seed: u64,
    ) -> Scenario {
        let nt = budget.len();
        let nw = pi.len();
        let tasks = (0..nt)
            .map(|i| Task {
                id: i,
                location: [0.0, 0.0],
                budget: budget[i],
                quality_demand: demand[i],
                redundancy: zeta[i],
                reference_variance: 1e-6,
            })
            .collect();
        let workers = (0..nw)
            .map(|j| Worker {
                id: j,
                location: [0.0, 0.0],
                eps_range: [0.5, 5.0],
                capability: 1.0,
                arrival_prob: pi[j],
                travel_cost_coeff: 0.0,
                privacy_cost_coeff: 0.0,
                data_variance: BTreeMap::new(),
            })
            .collect();
        Scenario::from_parts(
            tasks,
            workers,
            payment,
            vec![vec![0.0; nw]; nt],
            quality,
            vec![vec![1.0; nw]; nt],
            vec![vec![true; nt]; nw],
            EconParams { omega3: 7.0, rho1: 0.2, rho2: 0.2 },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn realization_examples() {
        let s = tiny_market(
            &[100.0, 100.0],
            &[20.0, 20.0],
            &[0.1, 0.1],
            &[1.0, 1.0, 1.0],
            vec![vec![40.0; 3]; 2],
            vec![vec![30.0; 3]; 2],
            1,
        );
        let view = s.planner_view();
        let mut profile = ContractProfile::empty(2);
        profile.assigned[0] = vec![0];
        profile.assigned[1] = vec![1];

        // everyone arrives and every demand is met
        let all = ArrivalVector(vec![true; 3]);
        let state = realize_execution(&view, &profile, &all);
        assert!(state.unmet_tasks.is_empty());
        assert_eq!(state.q_base, vec![30.0, 30.0]);
        assert_eq!(state.residual_budget, vec![60.0, 60.0]);
        // uncontracted worker is idle regardless of arrival
        assert_eq!(state.idle_workers, vec![2]);
        let none = ArrivalVector(vec![true, true, false]);
        assert_eq!(realize_execution(&view, &profile, &none).idle_workers, vec![2]);

        // a contracted worker stays home: zero baseline, full refund
        let absent = ArrivalVector(vec![false, true, true]);
        let state = realize_execution(&view, &profile, &absent);
        assert_eq!(state.q_base[0], 0.0);
        assert_eq!(state.unmet_tasks, vec![0]);
        assert_eq!(state.residual_budget[0], 100.0);
    }

    #[test]
    fn final_quality_examples() {
        // no recruits: reduces to the baseline aggregation
        assert_relative_eq!(final_quality(&[30.0], &[], 0.5).unwrap(), 30.0);
        assert_relative_eq!(
            final_quality(&[10.0], &[10.0], 0.5).unwrap(),
            20.0 / 1.5,
            max_relative = 1e-12
        );
        // a zero-quality recruit strictly hurts once zeta > 0
        let with = final_quality(&[10.0, 10.0], &[0.0], 0.3).unwrap();
        let without = final_quality(&[10.0, 10.0], &[], 0.3).unwrap();
        assert!(with < without);
        assert_eq!(final_quality(&[], &[], 0.2).unwrap(), 0.0);
        assert!(final_quality(&[1.0], &[], 1.0).is_err());
    }

    #[test]
    fn online_welfare_examples() {
        let s = tiny_market(
            &[100.0],
            &[20.0],
            &[0.1],
            &[1.0, 1.0],
            vec![vec![45.0, 45.0]],
            vec![vec![40.0 / 7.0, 30.0]],
            2,
        );
        let view = s.planner_view();
        assert_eq!(online_welfare(&view, &ContractProfile::empty(1), &[0.0; 2]), 0.0);

        // one recruit: quality value 40, cost 14 -> welfare 26
        let priv_cost = vec![14.0, 14.0];
        let mut profile = ContractProfile::empty(1);
        profile.assigned[0] = vec![0];
        let sw = online_welfare(&view, &profile, &priv_cost);
        assert_relative_eq!(sw, 26.0, max_relative = 1e-9);

        // dual form: task utility + worker utility with payments cancelling,
        // and doubling payments changes nothing
        for pay in [45.0, 90.0] {
            let task_u = 7.0 * (40.0 / 7.0) - pay;
            let worker_u = pay - 14.0;
            assert_relative_eq!(task_u + worker_u, sw, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_idle_recruit_restores_quality() {
        let s = tiny_market(
            &[100.0],
            &[20.0],
            &[0.1],
            &[1.0, 1.0],
            vec![vec![40.0, 40.0]],
            vec![vec![30.0, 30.0]],
            3,
        );
        let view = s.planner_view();
        // contracted worker 0 stays home; worker 1 idles
        let mut offline = ContractProfile::empty(1);
        offline.assigned[0] = vec![0];
        let state = realize_execution(&view, &offline, &ArrivalVector(vec![false, true]));
        assert_eq!(state.unmet_tasks, vec![0]);
        let pools = vec![vec![1]];
        let mut log = Vec::new();
        let plan = plan_online(
            &view,
            &state,
            &pools,
            &[0.0; 2],
            &PlannerParams::default(),
            RestorationRule::Strict,
            &mut log,
        )
        .unwrap();
        assert_eq!(plan.profile.assigned[0], vec![1]);
        assert_eq!(plan.accepted_updates, 1);
        assert!(plan.converged);
        assert!(plan.still_unmet.is_empty());
        assert!(plan.final_quality[0] >= 20.0);
        assert!(plan.final_quality[0] >= state.q_base[0]);

        // exhaustive 2-profile check: recruiting beats not recruiting
        let empty = ContractProfile::empty(1);
        assert!(
            online_potential(&view, &plan.profile, &[0.0; 2])
                > online_potential(&view, &empty, &[0.0; 2])
        );
        // probes were logged for the online round
        assert!(log.iter().any(|r| r.stage == Stage::On));
    }

    #[test]
    fn empty_idle_pool_changes_nothing() {
        let s = tiny_market(
            &[100.0],
            &[20.0],
            &[0.1],
            &[1.0],
            vec![vec![40.0]],
            vec![vec![30.0]],
            4,
        );
        let view = s.planner_view();
        let mut offline = ContractProfile::empty(1);
        offline.assigned[0] = vec![0];
        let state = realize_execution(&view, &offline, &ArrivalVector(vec![false]));
        assert_eq!(state.unmet_tasks, vec![0]);
        assert!(state.idle_workers.is_empty());
        let mut log = Vec::new();
        let plan = plan_online(
            &view,
            &state,
            &vec![Vec::new(); 1],
            &[0.0],
            &PlannerParams::default(),
            RestorationRule::Strict,
            &mut log,
        )
        .unwrap();
        assert_eq!(plan.accepted_updates, 0);
        assert_eq!(plan.still_unmet, vec![0]);
    }

    #[test]
    fn contended_idle_worker_goes_to_the_larger_gain() {
        // two unmet tasks, one idle worker, task 1 gains more
        let s = tiny_market(
            &[100.0, 100.0],
            &[20.0, 20.0],
            &[0.1, 0.1],
            &[1.0],
            vec![vec![40.0], vec![40.0]],
            vec![vec![25.0], vec![30.0]],
            5,
        );
        let view = s.planner_view();
        let offline = ContractProfile::empty(2);
        let state = realize_execution(&view, &offline, &ArrivalVector(vec![true]));
        assert_eq!(state.unmet_tasks, vec![0, 1]);
        let pools = vec![vec![0], vec![0]];
        let mut log = Vec::new();
        let plan = plan_online(
            &view,
            &state,
            &pools,
            &[0.0],
            &PlannerParams::default(),
            RestorationRule::Strict,
            &mut log,
        )
        .unwrap();
        assert_eq!(plan.profile.assigned, vec![vec![], vec![0]]);

        // matches the exhaustive feasible-profile search
        let mut best = (f64::NEG_INFINITY, ContractProfile::empty(2));
        for assignment in [vec![vec![], vec![]], vec![vec![0], vec![]], vec![vec![], vec![0]]] {
            let profile = ContractProfile { assigned: assignment };
            let phi = online_potential(&view, &profile, &[0.0]);
            if phi > best.0 {
                best = (phi, profile);
            }
        }
        assert_eq!(plan.profile, best.1);
        assert!(
            verify_equilibrium_online(
                &view,
                &state,
                &plan.profile,
                &pools,
                &[0.0],
                &PlannerParams::default(),
                RestorationRule::Strict,
            )
            .is_ne
        );
        assert!(check_online_feasible(
            &view,
            &state,
            &plan.profile,
            &vec![vec![true; 2]; 1],
            &[0.0]
        )
        .is_empty());
    }

    #[test]
    fn partial_restoration_is_rejected_in_strict_mode() {
        // the only idle worker cannot lift quality over the demand
        let s = tiny_market(
            &[100.0],
            &[25.0],
            &[0.1],
            &[1.0, 1.0],
            vec![vec![40.0, 40.0]],
            vec![vec![30.0, 10.0]],
            6,
        );
        let view = s.planner_view();
        let mut offline = ContractProfile::empty(1);
        offline.assigned[0] = vec![0];
        let state = realize_execution(&view, &offline, &ArrivalVector(vec![false, true]));
        let pools = vec![vec![1]];
        let mut log = Vec::new();
        let strict = plan_online(
            &view,
            &state,
            &pools,
            &[0.0; 2],
            &PlannerParams::default(),
            RestorationRule::Strict,
            &mut log,
        )
        .unwrap();
        assert!(strict.profile.assigned[0].is_empty());
        assert_eq!(strict.still_unmet, vec![0]);

        // the experimental mode may still take the partial lift
        let best_effort = plan_online(
            &view,
            &state,
            &pools,
            &[0.0; 2],
            &PlannerParams::default(),
            RestorationRule::BestEffort,
            &mut log,
        )
        .unwrap();
        assert_eq!(best_effort.profile.assigned[0], vec![1]);
        assert_eq!(best_effort.still_unmet, vec![0]);
    }

    #[test]
    fn exact_potential_identity_online() {
        let config = crate::market::ScenarioConfig {
            num_tasks: 4,
            num_workers: 10,
            ..Default::default()
        };
        let s = crate::market::generate_scenario(&config, 70).unwrap();
        let view = s.planner_view();
        let priv_cost = vec![0.7; 10];
        use rand::Rng;
        for trial in 0..100u64 {
            let mut r = crate::rng::stream(2, "online-id", &[trial]);
            let mut profile = ContractProfile::empty(4);
            for j in 0..10usize {
                let pick = r.gen::<u64>() % 6;
                if pick < 4 {
                    profile.assigned[pick as usize].push(j);
                }
            }
            let task = (r.gen::<u64>() % 4) as usize;
            let mut deviated = profile.clone();
            deviated.assigned[task] = profile.assigned[task]
                .iter()
                .copied()
                .filter(|j| j % 2 == 0)
                .collect();
            let du = online_marginal_payoff(&view, &deviated, task, &priv_cost)
                - online_marginal_payoff(&view, &profile, task, &priv_cost);
            let dphi = online_potential(&view, &deviated, &priv_cost)
                - online_potential(&view, &profile, &priv_cost);
            assert!((du - dphi).abs() <= 1e-12, "trial {trial}: {du} vs {dphi}");
        }
    }
}
