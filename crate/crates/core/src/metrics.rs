//! Evaluation metrics over run artifacts: welfare and completion, message
//! overhead (count, latency, energy), privacy robustness under one- and
//! multi-snapshot attackers, and the individual-rationality/risk audit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interaction::{Direction, InteractionRecord, PLATFORM};
use crate::market::{PlannerView, Scenario};
use crate::offline::{self, ContractProfile, PlannerParams};
use crate::online::ExecutionState;
use crate::privacy::{self, CalibratedEps, IntentState};
use crate::rng;

/// Per-pair link latencies (milliseconds) and per-entity transmit powers
/// (watts). Row 0 of the latency tables is the platform itself; task `i`
/// lives at row `i + 1`. Sampled once per run so overhead differences across
/// algorithms reflect only message counts.
#[derive(Debug, Clone)]
pub struct InteractionTables {
    pub t_up: Vec<Vec<f64>>,
    pub t_down: Vec<Vec<f64>>,
    pub worker_power: Vec<f64>,
    pub station_power: Vec<f64>,
}

pub fn sample_interaction_tables(
    num_tasks: usize,
    num_workers: usize,
    seed: u64,
) -> InteractionTables {
    let rows = num_tasks + 1;
    let sample =
        |label: &str, i: usize, j: usize, lo: f64, hi: f64| -> f64 {
            lo + (hi - lo) * rng::unit_uniform(seed, label, &[i as u64, j as u64])
        };
    InteractionTables {
        t_up: (0..rows)
            .map(|i| (0..num_workers).map(|j| sample("latency-up", i, j, 0.5, 11.0)).collect())
            .collect(),
        t_down: (0..rows)
            .map(|i| (0..num_workers).map(|j| sample("latency-down", i, j, 0.5, 4.0)).collect())
            .collect(),
        worker_power: (0..num_workers)
            .map(|j| 0.2 + (0.4 - 0.2) * rng::unit_uniform(seed, "power-worker", &[j as u64]))
            .collect(),
        station_power: (0..rows)
            .map(|i| 6.0 + (20.0 - 6.0) * rng::unit_uniform(seed, "power-station", &[i as u64]))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionMetrics {
    /// Total directed messages.
    pub count: u64,
    /// Milliseconds spent on links.
    pub latency_ms: f64,
    /// Millijoules spent transmitting (power in watts times milliseconds).
    pub energy_mj: f64,
}

/// Aggregate a message log: each up message costs its uplink latency at the
/// worker's power, each down message its downlink latency at the station's
/// power.
pub fn interaction_metrics(log: &[InteractionRecord], tables: &InteractionTables) -> InteractionMetrics {
    let mut latency = 0.0;
    let mut energy = 0.0;
    for r in log {
        let row = if r.task_id == PLATFORM { 0 } else { r.task_id as usize + 1 };
        match r.direction {
            Direction::Up => {
                let t = tables.t_up[row][r.worker_id];
                latency += t;
                energy += tables.worker_power[r.worker_id] * t;
            }
            Direction::Down => {
                let t = tables.t_down[row][r.worker_id];
                latency += t;
                energy += tables.station_power[row] * t;
            }
        }
    }
    InteractionMetrics { count: log.len() as u64, latency_ms: latency, energy_mj: energy }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareMetrics {
    pub social_welfare: f64,
    pub task_utility: f64,
    pub worker_utility: f64,
    /// Fraction of tasks whose final realized quality meets their demand.
    pub completion_rate: f64,
}

/// Realized welfare of a completed run: offline contracts evaluated at the
/// realized arrivals plus the online recruitment stage.
pub fn welfare_metrics(
    view: &PlannerView,
    state: &ExecutionState,
    online: Option<&ContractProfile>,
    final_quality: &[f64],
    priv_cost: &[f64],
) -> WelfareMetrics {
    let mut task_utility = 0.0;
    let mut worker_utility = 0.0;
    for (i, task) in view.tasks.iter().enumerate() {
        let arrived = &state.arrived_offline[i];
        let payments: Vec<f64> = arrived.iter().map(|&j| view.payment[i][j]).collect();
        task_utility += crate::quality::task_utility(state.q_base[i], &payments, view.econ.omega3);
        for &j in arrived {
            worker_utility +=
                view.payment[i][j] - offline::worker_cost(view, i, j, priv_cost[j]);
        }
        if let Some(online) = online {
            let set = &online.assigned[i];
            if !set.is_empty() {
                let qs: Vec<f64> = set.iter().map(|&j| view.quality[i][j]).collect();
                let q_on = crate::quality::aggregate_quality(&qs, task.redundancy)
                    .expect("validated redundancy");
                let payments: Vec<f64> = set.iter().map(|&j| view.payment[i][j]).collect();
                task_utility += crate::quality::task_utility(q_on, &payments, view.econ.omega3);
                for &j in set {
                    worker_utility +=
                        view.payment[i][j] - offline::worker_cost(view, i, j, priv_cost[j]);
                }
            }
        }
    }
    let met = final_quality
        .iter()
        .zip(view.tasks)
        .filter(|(q, t)| **q >= t.quality_demand)
        .count();
    WelfareMetrics {
        social_welfare: task_utility + worker_utility,
        task_utility,
        worker_utility,
        completion_rate: met as f64 / view.tasks.len() as f64,
    }
}

/// Which report sequence the attacker observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMechanism {
    /// Epoch-stable memoized randomized response.
    Memoized { epoch_length: u64 },
    /// Independent randomized response every round.
    Fresh,
    /// No perturbation at all.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyMetrics {
    /// Mean analytic one-snapshot expected inference error over workers.
    pub one_snapshot_error: f64,
    /// Entry-wise accuracy of the one-snapshot Bayes estimate.
    pub one_snapshot_success: f64,
    /// Mean absolute deviation between report frequency and true intent.
    pub frequency_leakage: f64,
    /// Entry-wise accuracy of the majority-rule estimate.
    pub multi_snapshot_success: f64,
    pub one_snapshot_success_se: f64,
    pub frequency_leakage_se: f64,
    pub multi_snapshot_success_se: f64,
    pub replications: usize,
    pub snapshots: usize,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Evaluate the attack battery over seeded replications. Workers whose
/// calibration failed opted out and produce no observable reports, so they
/// are excluded from the averages (the identity mechanism ignores
/// calibration entirely).
pub fn privacy_metrics(
    scenario: &Scenario,
    eps: &[CalibratedEps],
    weights: &[f64],
    mechanism: AttackMechanism,
    snapshots: usize,
    replications: usize,
    seed: u64,
) -> Result<PrivacyMetrics> {
    if snapshots == 0 {
        return Err(Error::Domain("snapshot count must be >= 1".into()));
    }
    if replications == 0 {
        return Err(Error::Domain("replication count must be >= 1".into()));
    }
    let num_tasks = scenario.num_tasks();

    let mut oeie_sum = 0.0;
    let mut oeie_count = 0usize;
    let mut osr = Vec::with_capacity(replications);
    let mut mfl = Vec::with_capacity(replications);
    let mut msr = Vec::with_capacity(replications);

    for rep in 0..replications {
        let rep_seed = rng::stream_key(seed, "attack-rep", &[rep as u64]);
        let mut correct_one = 0usize;
        let mut correct_multi = 0usize;
        let mut leak = 0.0;
        let mut entries = 0usize;
        for (j, worker_eps) in eps.iter().enumerate() {
            let truth = &scenario.true_intents[j];
            let prior: Vec<f64> = (0..num_tasks).map(|i| scenario.intent_prior[i][j]).collect();
            let reports: Vec<Vec<bool>> = match mechanism {
                AttackMechanism::Identity => vec![truth.clone(); snapshots],
                AttackMechanism::Memoized { epoch_length } => {
                    let Some(_) = worker_eps.value() else { continue };
                    let mut st = IntentState::new(j, truth.clone(), *worker_eps, epoch_length, rep_seed)?;
                    (0..snapshots as u64).map(|r| st.report(r).map(|s| s.to_vec())).collect::<Result<_>>()?
                }
                AttackMechanism::Fresh => {
                    let Some(e) = worker_eps.value() else { continue };
                    (0..snapshots)
                        .map(|t| {
                            let mut r = rng::stream(rep_seed, "fresh", &[j as u64, t as u64]);
                            truth
                                .iter()
                                .map(|b| privacy::rr_perturb(*b, e, &mut r))
                                .collect::<Result<Vec<bool>>>()
                        })
                        .collect::<Result<_>>()?
                }
            };

            // one-snapshot attack on the first observed report
            let estimate: Vec<bool> = match mechanism {
                AttackMechanism::Identity => reports[0].clone(),
                _ => {
                    let e = worker_eps.value().expect("filtered above");
                    privacy::one_snapshot_attack(&reports[0], &prior, e, weights)?.estimate
                }
            };
            if rep == 0 {
                oeie_sum += match mechanism {
                    AttackMechanism::Identity => 0.0,
                    _ => privacy::one_snapshot_inference_error(
                        &prior,
                        worker_eps.value().expect("filtered above"),
                        weights,
                    )?,
                };
                oeie_count += 1;
            }
            let freq = privacy::multi_snapshot_attack(&reports)?;
            for i in 0..num_tasks {
                entries += 1;
                if estimate[i] == truth[i] {
                    correct_one += 1;
                }
                if freq.estimate[i] == truth[i] {
                    correct_multi += 1;
                }
                leak += (freq.frequency[i] - if truth[i] { 1.0 } else { 0.0 }).abs();
            }
        }
        if entries == 0 {
            return Err(Error::Domain("no reporting workers to attack".into()));
        }
        osr.push(correct_one as f64 / entries as f64);
        msr.push(correct_multi as f64 / entries as f64);
        mfl.push(leak / entries as f64);
    }

    let (osr_m, osr_se) = mean_and_se(&osr);
    let (mfl_m, mfl_se) = mean_and_se(&mfl);
    let (msr_m, msr_se) = mean_and_se(&msr);
    Ok(PrivacyMetrics {
        one_snapshot_error: oeie_sum / oeie_count.max(1) as f64,
        one_snapshot_success: osr_m,
        frequency_leakage: mfl_m,
        multi_snapshot_success: msr_m,
        one_snapshot_success_se: osr_se,
        frequency_leakage_se: mfl_se,
        multi_snapshot_success_se: msr_se,
        replications,
        snapshots,
    })
}

/// Which constraint families a variant claims to enforce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditScope {
    pub exclusivity: bool,
    pub rationality: bool,
    pub budget: bool,
    pub risk: bool,
}

impl AuditScope {
    pub fn full() -> Self {
        Self { exclusivity: true, rationality: true, budget: true, risk: true }
    }

    pub fn without_risk() -> Self {
        Self { risk: false, ..Self::full() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub violations: Vec<String>,
    /// Quality-risk screen value per task (the constraint the planner
    /// enforced; exact enumeration is the test oracle).
    pub quality_risk: Vec<f64>,
    /// Offline mismatch risk per worker (enforced).
    pub pref_risk: Vec<f64>,
    /// Online mismatch risk per worker (logged for inspection only).
    pub pref_risk_online: Vec<f64>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Recompute the individual-rationality, budget and risk constraint families
/// from raw run data and report every violation within the given scope.
pub fn audit_ir_and_risk(
    view: &PlannerView,
    offline: &ContractProfile,
    state: &ExecutionState,
    online: Option<&ContractProfile>,
    priv_cost: &[f64],
    params: &PlannerParams,
    scope: AuditScope,
) -> AuditReport {
    let money_eps = 1e-6;
    let mut violations = Vec::new();
    let num_tasks = view.tasks.len();
    let num_workers = view.workers.len();

    if scope.exclusivity {
        let mut engagements = vec![Vec::new(); num_workers];
        for (i, set) in offline.assigned.iter().enumerate() {
            for &j in set {
                engagements[j].push(("offline", i));
            }
        }
        if let Some(online) = online {
            for (i, set) in online.assigned.iter().enumerate() {
                for &j in set {
                    engagements[j].push(("online", i));
                }
            }
        }
        for (j, e) in engagements.iter().enumerate() {
            if e.len() > 1 {
                violations.push(format!("worker {j} engaged more than once: {e:?}"));
            }
        }
    }

    for i in 0..num_tasks {
        let reserved = offline.reserved_payment(view.payment, i);
        let realized_offline: f64 =
            state.arrived_offline[i].iter().map(|&j| view.payment[i][j]).sum();
        let online_spend: f64 = online
            .map(|o| o.assigned[i].iter().map(|&j| view.payment[i][j]).sum())
            .unwrap_or(0.0);
        if scope.budget {
            if reserved > view.tasks[i].budget + money_eps {
                violations.push(format!(
                    "task {i}: reserved payments {reserved} exceed budget {}",
                    view.tasks[i].budget
                ));
            }
            if realized_offline + online_spend > view.tasks[i].budget + money_eps {
                violations.push(format!(
                    "task {i}: realized payments {} exceed budget {}",
                    realized_offline + online_spend,
                    view.tasks[i].budget
                ));
            }
        }
        if scope.rationality {
            let engaged = offline.assigned[i]
                .iter()
                .chain(online.map(|o| o.assigned[i].iter()).unwrap_or_else(|| [].iter()));
            for &j in engaged {
                let cost = offline::worker_cost(view, i, j, priv_cost[j]);
                if view.payment[i][j] < cost - money_eps {
                    violations.push(format!(
                        "worker {j} on task {i}: payment {} below cost {cost}",
                        view.payment[i][j]
                    ));
                }
            }
        }
    }

    let mut quality_risk = Vec::with_capacity(num_tasks);
    for i in 0..num_tasks {
        let risk = offline::screen_quality_risk(view, i, &offline.assigned[i], params.mc_samples);
        quality_risk.push(risk);
        if scope.risk && !offline.assigned[i].is_empty() && risk > view.econ.rho1 {
            violations.push(format!(
                "task {i}: quality risk {risk} exceeds cap {}",
                view.econ.rho1
            ));
        }
    }

    let row_risk = |profile: &ContractProfile, j: usize| {
        let mut row = vec![false; num_tasks];
        let mut phi = vec![0.0; num_tasks];
        for i in 0..num_tasks {
            row[i] = profile.contains(i, j);
            phi[i] = view.intent_prior[i][j];
        }
        crate::quality::pref_risk(&row, &phi)
    };
    let mut pref_risk = Vec::with_capacity(num_workers);
    let mut pref_risk_online = Vec::with_capacity(num_workers);
    for j in 0..num_workers {
        let r = row_risk(offline, j);
        if scope.risk && r > view.econ.rho2 + 1e-12 {
            violations.push(format!("worker {j}: mismatch risk {r} exceeds cap {}", view.econ.rho2));
        }
        pref_risk.push(r);
        pref_risk_online.push(online.map(|o| row_risk(o, j)).unwrap_or(0.0));
    }

    AuditReport { violations, quality_risk, pref_risk, pref_risk_online }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{log_exchange, Stage};
    use approx::assert_relative_eq;

    #[test]
    fn empty_log_is_all_zero() {
        let tables = sample_interaction_tables(2, 3, 0);
        let m = interaction_metrics(&[], &tables);
        assert_eq!(m.count, 0);
        assert_eq!(m.latency_ms, 0.0);
        assert_eq!(m.energy_mj, 0.0);
    }

    #[test]
    fn single_exchange_latency_and_energy() {
        let tables = InteractionTables {
            t_up: vec![vec![0.0], vec![1.0]],
            t_down: vec![vec![0.0], vec![2.0]],
            worker_power: vec![0.3],
            station_power: vec![0.0, 10.0],
        };
        let mut log = Vec::new();
        log_exchange(&mut log, Stage::On, 0, 0, 0);
        let m = interaction_metrics(&log, &tables);
        assert_eq!(m.count, 2);
        assert_relative_eq!(m.latency_ms, 3.0);
        assert_relative_eq!(m.energy_mj, 10.0 * 2.0 + 0.3 * 1.0);
    }

    #[test]
    fn latency_tables_stay_in_documented_ranges() {
        let t = sample_interaction_tables(4, 9, 3);
        assert!(t.t_up.iter().flatten().all(|v| (0.5..=11.0).contains(v)));
        assert!(t.t_down.iter().flatten().all(|v| (0.5..=4.0).contains(v)));
        assert!(t.worker_power.iter().all(|v| (0.2..=0.4).contains(v)));
        assert!(t.station_power.iter().all(|v| (6.0..=20.0).contains(v)));
    }

    fn attack_scenario() -> Scenario {
        let config = crate::market::ScenarioConfig {
            num_tasks: 4,
            num_workers: 10,
            ..Default::default()
        };
        crate::market::generate_scenario(&config, 77).unwrap()
    }

    #[test]
    fn identity_mechanism_leaks_everything() {
        let s = attack_scenario();
        let eps = vec![CalibratedEps::Feasible(1.0); 10];
        let m = privacy_metrics(
            &s,
            &eps,
            &[1.0; 4],
            AttackMechanism::Identity,
            5,
            3,
            1,
        )
        .unwrap();
        assert_eq!(m.one_snapshot_success, 1.0);
        assert_eq!(m.one_snapshot_error, 0.0);
        assert_eq!(m.frequency_leakage, 0.0);
        assert_eq!(m.multi_snapshot_success, 1.0);
    }

    #[test]
    fn memoized_success_is_snapshot_invariant() {
        let s = attack_scenario();
        let eps = vec![CalibratedEps::Feasible(1.0); 10];
        let one = privacy_metrics(
            &s,
            &eps,
            &[1.0; 4],
            AttackMechanism::Memoized { epoch_length: 1000 },
            1,
            5,
            9,
        )
        .unwrap();
        let many = privacy_metrics(
            &s,
            &eps,
            &[1.0; 4],
            AttackMechanism::Memoized { epoch_length: 1000 },
            200,
            5,
            9,
        )
        .unwrap();
        assert_eq!(one.multi_snapshot_success, many.multi_snapshot_success);
    }

    #[test]
    fn fresh_mechanism_degrades_with_observations() {
        let s = attack_scenario();
        let eps = vec![CalibratedEps::Feasible(1.0); 10];
        let one =
            privacy_metrics(&s, &eps, &[1.0; 4], AttackMechanism::Fresh, 1, 20, 5).unwrap();
        let many =
            privacy_metrics(&s, &eps, &[1.0; 4], AttackMechanism::Fresh, 200, 20, 5).unwrap();
        assert!(
            many.multi_snapshot_success > one.multi_snapshot_success,
            "{} vs {}",
            many.multi_snapshot_success,
            one.multi_snapshot_success
        );
        assert!(many.multi_snapshot_success > 0.99);
    }

    #[test]
    fn frequency_leakage_converges_to_flip_probability() {
        let s = attack_scenario();
        let eps_val = 1.0;
        let eps = vec![CalibratedEps::Feasible(eps_val); 10];
        let t = 10_000;
        let m = privacy_metrics(&s, &eps, &[1.0; 4], AttackMechanism::Fresh, t, 1, 13).unwrap();
        let flip = privacy::flip_probability(eps_val).unwrap();
        // 3 standard errors of the mean over 40 entries of T draws each
        let entries = 40.0;
        let se = (flip * (1.0 - flip) / (t as f64 * entries)).sqrt();
        assert!((m.frequency_leakage - flip).abs() <= 3.0 * se,
            "leakage {} flip {flip} se {se}", m.frequency_leakage);
    }

    #[test]
    fn one_snapshot_accuracy_complements_error_rate() {
        let s = attack_scenario();
        let eps = vec![CalibratedEps::Feasible(0.8); 10];
        let m = privacy_metrics(&s, &eps, &[1.0; 4], AttackMechanism::Fresh, 1, 10, 3).unwrap();
        // accuracy + error rate = 1 by construction; accuracy should match
        // the keep probability for a symmetric prior
        let keep = privacy::keep_probability(0.8).unwrap();
        assert!((m.one_snapshot_success - keep).abs() < 0.1);
        assert!(m.one_snapshot_success <= 1.0);
    }

    #[test]
    fn welfare_matches_hand_arithmetic() {
        use crate::market::{Scenario, Task, Worker};
        use crate::online::realize_execution;
        use std::collections::BTreeMap;
        // 2 tasks, 3 workers: worker 0 contracted to task 0 and arrives,
        // worker 1 contracted to task 1 but stays home, worker 2 idles and
        // is recruited online by task 1.
        let tasks = (0..2)
            .map(|i| Task {
                id: i,
                location: [0.0, 0.0],
                budget: 100.0,
                quality_demand: 20.0,
                redundancy: 0.2,
                reference_variance: 1e-6,
            })
            .collect();
        let workers = (0..3)
            .map(|j| Worker {
                id: j,
                location: [0.0, 0.0],
                eps_range: [0.5, 5.0],
                capability: 1.0,
                arrival_prob: 0.9,
                travel_cost_coeff: 0.0,
                privacy_cost_coeff: 0.0,
                data_variance: BTreeMap::new(),
            })
            .collect();
        let scenario = Scenario::from_parts(
            tasks,
            workers,
            vec![vec![50.0, 45.0, 40.0], vec![50.0, 45.0, 40.0]],
            vec![vec![0.0; 3]; 2],
            vec![vec![30.0, 25.0, 24.0], vec![30.0, 25.0, 24.0]],
            vec![vec![1.0; 3]; 2],
            vec![vec![true; 2]; 3],
            crate::quality::EconParams { omega3: 7.0, rho1: 0.2, rho2: 0.2 },
            0,
        )
        .unwrap();
        let view = scenario.planner_view();
        let mut offline = ContractProfile::empty(2);
        offline.assigned[0] = vec![0];
        offline.assigned[1] = vec![1];
        let arrivals = crate::market::ArrivalVector(vec![true, false, true]);
        let state = realize_execution(&view, &offline, &arrivals);
        let mut online = ContractProfile::empty(2);
        online.assigned[1] = vec![2];
        let priv_cost = vec![2.0; 3];
        let final_quality = vec![30.0, 24.0];
        let w = welfare_metrics(&view, &state, Some(&online), &final_quality, &priv_cost);
        // task 0: 7*30 - 50 = 160; task 1 offline: 0; task 1 online: 7*24 - 40 = 128
        assert!((w.task_utility - (160.0 + 128.0)).abs() < 1e-9, "{}", w.task_utility);
        // worker 0: 50 - 2 = 48; worker 2: 40 - 2 = 38; absent worker 1: 0
        assert!((w.worker_utility - (48.0 + 38.0)).abs() < 1e-9);
        assert!((w.social_welfare - (288.0 + 86.0)).abs() < 1e-9);
        // both tasks meet their demand
        assert_eq!(w.completion_rate, 1.0);

        // no contracts at all: everything zero
        let empty = ContractProfile::empty(2);
        let state = realize_execution(&view, &empty, &arrivals);
        let w = welfare_metrics(&view, &state, None, &state.q_base.clone(), &priv_cost);
        assert_eq!(w.social_welfare, 0.0);
        assert_eq!(w.task_utility, 0.0);
        assert_eq!(w.worker_utility, 0.0);
        assert_eq!(w.completion_rate, 0.0);
    }

    #[test]
    fn audit_flags_injected_faults() {
        use crate::market::{Scenario, Task, Worker};
        use crate::online::realize_execution;
        use std::collections::BTreeMap;
        // worker 0's arrival probability of 0.75 puts the exact quality
        // risk of a single-worker contract at 0.25, over the 0.2 cap
        let tasks = vec![Task {
            id: 0,
            location: [0.0, 0.0],
            budget: 60.0,
            quality_demand: 20.0,
            redundancy: 0.1,
            reference_variance: 1e-6,
        }];
        let workers = (0..2)
            .map(|j| Worker {
                id: j,
                location: [0.0, 0.0],
                eps_range: [0.5, 5.0],
                capability: 1.0,
                arrival_prob: 0.75,
                travel_cost_coeff: 0.0,
                privacy_cost_coeff: 0.0,
                data_variance: BTreeMap::new(),
            })
            .collect();
        let scenario = Scenario::from_parts(
            tasks,
            workers,
            vec![vec![50.0, 40.0]],
            vec![vec![0.0; 2]],
            vec![vec![30.0, 30.0]],
            vec![vec![1.0; 2]],
            vec![vec![true]; 2],
            crate::quality::EconParams { omega3: 7.0, rho1: 0.2, rho2: 0.2 },
            77,
        )
        .unwrap();
        let view = scenario.planner_view();
        let params = PlannerParams { mc_samples: 5000, ..Default::default() };

        // exact enumeration says 0.25; the screen must flag it
        let exact = crate::quality::quality_risk(
            &[(30.0, 0.75)],
            0.1,
            20.0,
            crate::quality::RiskMethod::Exact,
        )
        .unwrap();
        assert!((exact - 0.25).abs() < 1e-12);
        let mut risky = ContractProfile::empty(1);
        risky.assigned[0] = vec![0];
        let arrivals = crate::market::ArrivalVector(vec![true, true]);
        let state = realize_execution(&view, &risky, &arrivals);
        let report = audit_ir_and_risk(
            &view,
            &risky,
            &state,
            None,
            &[0.0; 2],
            &params,
            AuditScope::full(),
        );
        assert!(
            report.violations.iter().any(|v| v.contains("task 0") && v.contains("quality risk")),
            "{:?}",
            report.violations
        );

        // artificially inflated payments beyond the budget are flagged
        let mut greedy_both = ContractProfile::empty(1);
        greedy_both.assigned[0] = vec![0, 1]; // reserves 90 > 60
        let state = realize_execution(&view, &greedy_both, &arrivals);
        let report = audit_ir_and_risk(
            &view,
            &greedy_both,
            &state,
            None,
            &[0.0; 2],
            &params,
            AuditScope::full(),
        );
        assert!(
            report.violations.iter().any(|v| v.contains("task 0") && v.contains("budget")),
            "{:?}",
            report.violations
        );
    }

    #[test]
    fn zero_snapshots_rejected() {
        let s = attack_scenario();
        let eps = vec![CalibratedEps::Feasible(1.0); 10];
        assert!(privacy_metrics(&s, &eps, &[1.0; 4], AttackMechanism::Fresh, 0, 1, 1).is_err());
    }
}
