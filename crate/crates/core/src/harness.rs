//! Experiment harness: config schema, seeded sweeps over variants, stage
//! orchestration and CSV/JSON emission.
//!
//! Outputs are deterministic: a ledger produced twice from the same config
//! is byte-identical. Wall-clock timings go to a separate diagnostics file
//! that is excluded from that contract.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, LedgerRow, RunArtifacts, RunConfig, Variant, LEDGER_COLUMNS};
use crate::error::{Error, Result};
use crate::interaction;
use crate::market::{generate_scenario, sample_arrivals, Scenario, ScenarioConfig};
use crate::metrics;
use crate::offline::{self, ContractProfile, PlannerParams, QualityRiskScope};
use crate::online::{self, RestorationRule};
use crate::privacy::PrivacyCaps;
use crate::quality::EconParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrivacyConfig {
    pub gamma: f64,
    /// Per-task inference-error weights; `null` means all ones.
    pub omega: Option<Vec<f64>>,
    /// Inference-error floor; `null` means `0.2 * sum(omega)`.
    pub beta0: Option<f64>,
    /// Distortion cap; `null` means `0.3 * gamma * |tasks|`.
    pub q_loss_max: Option<f64>,
    pub calibration_step: f64,
    pub epoch_length: u64,
    /// Accept online recruit sets that do not fully restore the demand.
    pub best_effort_restoration: bool,
}

impl Default for PrivacyConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            omega: None,
            beta0: None,
            q_loss_max: None,
            calibration_step: 0.01,
            epoch_length: 10,
            best_effort_restoration: false,
        }
    }
}

impl PrivacyConfig {
    pub fn resolved_caps(&self, num_tasks: usize) -> Result<PrivacyCaps> {
        let omega = match &self.omega {
            Some(w) => {
                if w.len() != num_tasks {
                    return Err(Error::Config(format!(
                        "privacy.omega must have {num_tasks} entries, got {}",
                        w.len()
                    )));
                }
                w.clone()
            }
            None => vec![1.0; num_tasks],
        };
        let omega_sum: f64 = omega.iter().sum();
        let caps = PrivacyCaps {
            q_loss_max: self.q_loss_max.unwrap_or(0.3 * self.gamma * num_tasks as f64),
            beta0: self.beta0.unwrap_or(0.2 * omega_sum),
            gamma: self.gamma,
            omega,
        };
        caps.validate()?;
        Ok(caps)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.calibration_step.is_finite() || self.calibration_step <= 0.0 {
            return Err(Error::Config("privacy.calibration_step must be > 0".into()));
        }
        if self.epoch_length == 0 {
            return Err(Error::Config("privacy.epoch_length must be >= 1".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::Config("privacy.gamma must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackConfig {
    /// Snapshot counts for the multi-snapshot study.
    pub snapshots: Vec<usize>,
    pub replications: usize,
    pub variants: Vec<Variant>,
    /// Snapshot count feeding the per-run ledger attack columns.
    pub ledger_snapshots: usize,
    pub ledger_replications: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            snapshots: vec![1, 10, 50, 200],
            replications: 100,
            variants: vec![Variant::IParts, Variant::NoP, Variant::NoMem],
            ledger_snapshots: 10,
            ledger_replications: 1,
        }
    }
}

/// Top-level experiment description, versioned and strictly validated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: ScenarioConfig,
    pub econ: EconParams,
    pub privacy: PrivacyConfig,
    pub planner: PlannerParams,
    pub variants: Vec<Variant>,
    /// Explicit seed list; `null` derives `0..replications`.
    pub seeds: Option<Vec<u64>>,
    pub replications: usize,
    pub attack: AttackConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: 1,
            scenario: ScenarioConfig::default(),
            econ: EconParams::default(),
            privacy: PrivacyConfig::default(),
            planner: PlannerParams::default(),
            variants: vec![Variant::IParts],
            seeds: None,
            replications: 1,
            attack: AttackConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path)?;
        Self::from_json(&body)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected 1)",
                self.schema_version
            )));
        }
        self.scenario.validate()?;
        self.econ.validate()?;
        self.privacy.validate()?;
        self.planner.validate()?;
        if self.variants.is_empty() {
            return Err(Error::Config("variants must not be empty".into()));
        }
        if self.seeds.as_ref().map(|s| s.is_empty()).unwrap_or(self.replications == 0) {
            return Err(Error::Config("need at least one seed or replication".into()));
        }
        if self.attack.snapshots.is_empty() || self.attack.snapshots.contains(&0) {
            return Err(Error::Config("attack.snapshots must be nonempty positive counts".into()));
        }
        if self.attack.replications == 0 || self.attack.ledger_replications == 0 {
            return Err(Error::Config("attack replications must be >= 1".into()));
        }
        Ok(())
    }

    pub fn seeds(&self, offset: u64) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.iter().map(|v| v + offset).collect(),
            None => (0..self.replications as u64).map(|v| v + offset).collect(),
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            planner: self.planner,
            caps: self.privacy.resolved_caps(self.scenario.num_tasks)?,
            calibration_step: self.privacy.calibration_step,
            epoch_length: self.privacy.epoch_length,
            restoration: if self.privacy.best_effort_restoration {
                RestorationRule::BestEffort
            } else {
                RestorationRule::Strict
            },
            ledger_snapshots: self.attack.ledger_snapshots,
            ledger_replications: self.attack.ledger_replications,
        })
    }

    /// Scenario for one seed, stamped with this config's economics.
    pub fn scenario_for(&self, seed: u64) -> Result<Scenario> {
        let mut s = generate_scenario(&self.scenario, seed)?;
        s.econ = self.econ;
        Ok(s)
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "nan".to_string()
    }
}

fn ledger_record(row: &LedgerRow) -> Vec<String> {
    vec![
        row.variant.clone(),
        row.seed.to_string(),
        row.tasks.to_string(),
        row.workers.to_string(),
        fmt_f64(row.social_welfare),
        fmt_f64(row.task_utility),
        fmt_f64(row.worker_utility),
        fmt_f64(row.completion_rate),
        fmt_f64(row.completion_rate_discounted),
        row.unmet_initial.to_string(),
        row.unmet_final.to_string(),
        row.interactions.to_string(),
        fmt_f64(row.latency_ms),
        fmt_f64(row.energy_mj),
        fmt_f64(row.one_snapshot_error),
        fmt_f64(row.one_snapshot_success),
        fmt_f64(row.frequency_leakage),
        fmt_f64(row.multi_snapshot_success),
        fmt_f64(row.quality_risk_mean),
        fmt_f64(row.quality_risk_max),
        fmt_f64(row.pref_risk_mean),
        fmt_f64(row.pref_risk_max),
        row.audit_violations.to_string(),
        row.offline_converged.to_string(),
        row.offline_rounds.to_string(),
        row.offline_updates.to_string(),
        fmt_f64(row.potential_final),
        row.online_converged.to_string(),
        row.online_rounds.to_string(),
        row.online_updates.to_string(),
    ]
}

/// Stored per-run document: enough to replay audits and equilibrium checks
/// against the regenerated scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub variant: Variant,
    pub seed: u64,
    pub sample_key: u64,
    pub offline_profile: Vec<TaskContract>,
    pub offline_trace: Option<Vec<f64>>,
    pub offline_converged: Option<bool>,
    pub online_profile: Option<Vec<TaskContract>>,
    pub online_trace: Option<Vec<f64>>,
    pub online_converged: Option<bool>,
    pub unmet_initial: Vec<usize>,
    pub unmet_final: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskContract {
    pub task: usize,
    pub workers: Vec<usize>,
    pub reserved_payment: f64,
}

fn contracts_of(profile: &ContractProfile, payment: &[Vec<f64>]) -> Vec<TaskContract> {
    profile
        .assigned
        .iter()
        .enumerate()
        .map(|(task, workers)| TaskContract {
            task,
            workers: workers.clone(),
            reserved_payment: workers.iter().map(|j| payment[task][*j]).sum(),
        })
        .collect()
}

fn profile_from_contracts(contracts: &[TaskContract], num_tasks: usize) -> Result<ContractProfile> {
    let mut profile = ContractProfile::empty(num_tasks);
    for c in contracts {
        if c.task >= num_tasks {
            return Err(Error::Config(format!("stored profile names unknown task {}", c.task)));
        }
        profile.assigned[c.task] = c.workers.clone();
        profile.assigned[c.task].sort_unstable();
    }
    Ok(profile)
}

pub fn profile_doc(artifacts: &RunArtifacts) -> ProfileDoc {
    let payment = &artifacts.planning_scenario.payment;
    ProfileDoc {
        variant: artifacts.variant,
        seed: artifacts.seed,
        sample_key: artifacts.offline.as_ref().map(|p| p.sample_key).unwrap_or(0),
        offline_profile: contracts_of(&artifacts.offline_profile, payment),
        offline_trace: artifacts.offline.as_ref().map(|p| p.potential_trace.clone()),
        offline_converged: artifacts.offline.as_ref().map(|p| p.converged),
        online_profile: artifacts.online_profile().map(|p| contracts_of(p, payment)),
        online_trace: artifacts.online.as_ref().map(|p| p.potential_trace.clone()),
        online_converged: artifacts.online.as_ref().map(|p| p.converged),
        unmet_initial: artifacts.state.unmet_tasks.clone(),
        unmet_final: artifacts
            .online
            .as_ref()
            .map(|o| o.still_unmet.clone())
            .unwrap_or_else(|| artifacts.state.unmet_tasks.clone()),
    }
}

fn run_dir_name(variant: Variant, seed: u64) -> String {
    format!("{}_s{seed:08}", variant.name())
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub runs: usize,
    pub failed: Vec<String>,
    pub ledger_path: PathBuf,
}

/// Run every `(variant, seed)` combination, write per-run artifacts and the
/// metrics ledger. Work is distributed over `jobs` threads (0 = all cores);
/// results are sorted before writing so scheduling never changes the output.
pub fn run_simulate(
    config: &ExperimentConfig,
    out_dir: &Path,
    jobs: usize,
    seed_offset: u64,
) -> Result<SimulateSummary> {
    config.validate()?;
    let run_cfg = config.run_config()?;
    fs::create_dir_all(out_dir.join("runs"))?;
    fs::write(out_dir.join("config.json"), serde_json::to_string_pretty(config)?)?;

    let seeds = config.seeds(seed_offset);
    let mut jobs_list = Vec::new();
    for variant in &config.variants {
        for seed in &seeds {
            jobs_list.push((*variant, *seed));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    type RunFiles = (LedgerRow, ProfileDoc, Vec<u8>, f64);
    type RunOutput = (Variant, u64, Result<RunFiles>);
    let results: Vec<RunOutput> = pool.install(|| {
        jobs_list
            .par_iter()
            .map(|(variant, seed)| {
                let started = Instant::now();
                let out = (|| {
                    let scenario = config.scenario_for(*seed)?;
                    let artifacts = baselines::run_variant(*variant, &scenario, &run_cfg)?;
                    let row = baselines::ledger_row(&artifacts, &run_cfg)?;
                    let doc = profile_doc(&artifacts);
                    let mut log_csv = Vec::new();
                    interaction::write_csv(&artifacts.log, &mut log_csv)?;
                    Ok((row, doc, log_csv, started.elapsed().as_secs_f64() * 1e3))
                })();
                (*variant, *seed, out)
            })
            .collect()
    });

    let mut rows: Vec<(usize, LedgerRow)> = Vec::new();
    let mut timing: Vec<(String, f64)> = Vec::new();
    let mut failed = Vec::new();
    for (idx, (variant, seed, out)) in results.into_iter().enumerate() {
        let name = run_dir_name(variant, seed);
        match out {
            Ok((row, doc, log_csv, elapsed_ms)) => {
                let dir = out_dir.join("runs").join(&name);
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("profile.json"), serde_json::to_string_pretty(&doc)?)?;
                fs::write(dir.join("interactions.csv"), log_csv)?;
                rows.push((idx, row));
                timing.push((name, elapsed_ms));
            }
            Err(e) => failed.push(format!("{name}: {e}")),
        }
    }
    rows.sort_by_key(|(idx, _)| *idx);

    let ledger_path = out_dir.join("ledger.csv");
    {
        let mut w = csv::Writer::from_writer(fs::File::create(&ledger_path)?);
        w.write_record(LEDGER_COLUMNS)?;
        for (_, row) in &rows {
            w.write_record(ledger_record(row))?;
        }
        w.flush()?;
    }
    // Wall-clock diagnostics live outside the deterministic ledger.
    {
        let mut f = fs::File::create(out_dir.join("timing.csv"))?;
        writeln!(f, "run,elapsed_ms")?;
        for (name, ms) in &timing {
            writeln!(f, "{name},{ms:.3}")?;
        }
    }

    Ok(SimulateSummary { runs: rows.len(), failed, ledger_path })
}

/// Attack study: privacy metrics for each configured variant over the
/// snapshot grid, with mean, standard deviation and standard error per
/// metric.
pub fn run_attack(config: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<PathBuf> {
    config.validate()?;
    let run_cfg = config.run_config()?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.json"), serde_json::to_string_pretty(config)?)?;

    let seed = config.seeds(0).first().copied().unwrap_or(0);
    let scenario = config.scenario_for(seed)?;
    // Calibrate once; the identity mechanism ignores the budgets.
    let artifacts = baselines::run_variant(
        config.attack.variants.first().copied().unwrap_or(Variant::IParts),
        &scenario,
        &run_cfg,
    )?;

    let mut grid = Vec::new();
    for variant in &config.attack.variants {
        for t in &config.attack.snapshots {
            grid.push((*variant, *t));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let cells: Vec<Result<(Variant, usize, metrics::PrivacyMetrics)>> = pool.install(|| {
        grid.par_iter()
            .map(|(variant, t)| {
                let m = metrics::privacy_metrics(
                    &scenario,
                    &artifacts.eps,
                    &run_cfg.caps.omega,
                    variant.attack_mechanism(run_cfg.epoch_length),
                    *t,
                    config.attack.replications,
                    scenario.rng_seed,
                )?;
                Ok((*variant, *t, m))
            })
            .collect()
    });

    let path = out_dir.join("attack.csv");
    let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
    w.write_record([
        "variant",
        "snapshots",
        "replications",
        "one_snapshot_error",
        "one_snapshot_success",
        "one_snapshot_success_std",
        "one_snapshot_success_se",
        "frequency_leakage",
        "frequency_leakage_std",
        "frequency_leakage_se",
        "multi_snapshot_success",
        "multi_snapshot_success_std",
        "multi_snapshot_success_se",
    ])?;
    for cell in cells {
        let (variant, t, m) = cell?;
        let n = (m.replications as f64).sqrt();
        w.write_record([
            variant.name().to_string(),
            t.to_string(),
            m.replications.to_string(),
            fmt_f64(m.one_snapshot_error),
            fmt_f64(m.one_snapshot_success),
            fmt_f64(m.one_snapshot_success_se * n),
            fmt_f64(m.one_snapshot_success_se),
            fmt_f64(m.frequency_leakage),
            fmt_f64(m.frequency_leakage_se * n),
            fmt_f64(m.frequency_leakage_se),
            fmt_f64(m.multi_snapshot_success),
            fmt_f64(m.multi_snapshot_success_se * n),
            fmt_f64(m.multi_snapshot_success_se),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunVerdict {
    pub run: String,
    pub audit_ok: bool,
    pub audit_violations: Vec<String>,
    pub offline_ne: Option<bool>,
    pub online_ne: Option<bool>,
    pub feasibility_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub verdicts: Vec<RunVerdict>,
    pub all_ok: bool,
}

/// Replay the constraint audit and equilibrium checks over stored run
/// artifacts. Scenarios are regenerated from `(config, seed)`; profiles are
/// taken from disk, so tampering is detected.
pub fn run_verify(run_dir: &Path) -> Result<VerifySummary> {
    let config = ExperimentConfig::load(&run_dir.join("config.json"))?;
    let run_cfg = config.run_config()?;
    let runs_root = run_dir.join("runs");
    if !runs_root.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("missing runs directory under {}", run_dir.display()),
        )));
    }
    let mut names: Vec<String> = fs::read_dir(&runs_root)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();

    let mut verdicts = Vec::new();
    for name in names {
        let doc_path = runs_root.join(&name).join("profile.json");
        let doc: ProfileDoc = serde_json::from_str(&fs::read_to_string(&doc_path)?)?;
        let scenario = config.scenario_for(doc.seed)?;
        let toggles = doc.variant.toggles();
        let planning =
            if toggles.linear_quality { scenario.with_linear_quality() } else { scenario.clone() };
        let view = planning.planner_view();
        let num_tasks = planning.num_tasks();

        // Rebuild the deterministic pipeline inputs.
        let replayed = baselines::run_variant(doc.variant, &scenario, &run_cfg)?;
        let offline_profile = profile_from_contracts(&doc.offline_profile, num_tasks)?;
        let online_profile = doc
            .online_profile
            .as_ref()
            .map(|c| profile_from_contracts(c, num_tasks))
            .transpose()?;

        let arrivals = sample_arrivals(&scenario, 0);
        let state = online::realize_execution(&view, &offline_profile, &arrivals);
        let audit = metrics::audit_ir_and_risk(
            &view,
            &offline_profile,
            &state,
            online_profile.as_ref(),
            &replayed.priv_cost,
            &run_cfg.planner,
            doc.variant.audit_scope(),
        );

        let offline_ne = if toggles.offline_stage && !toggles.greedy_selector {
            Some(
                offline::verify_equilibrium(
                    &view,
                    &offline_profile,
                    &replayed.candidates,
                    &replayed.priv_cost,
                    &run_cfg.planner,
                    doc.sample_key,
                )
                .is_ne,
            )
        } else {
            None
        };
        let online_ne = match (&online_profile, toggles.online_stage) {
            (Some(op), true) => {
                let pools =
                    online::build_online_candidates(&view, &state, &replayed.reports, &replayed.eps);
                Some(
                    online::verify_equilibrium_online(
                        &view,
                        &state,
                        op,
                        &pools,
                        &replayed.priv_cost,
                        &run_cfg.planner,
                        run_cfg.restoration,
                    )
                    .is_ne,
                )
            }
            _ => None,
        };
        let feasibility = offline::check_feasible(
            &view,
            &offline_profile,
            &run_cfg.planner,
            QualityRiskScope::FilledOnly,
        );
        let feasibility_ok = if doc.variant.audit_scope().risk {
            feasibility.ok()
        } else {
            // variants that do not enforce risk are only held to
            // exclusivity and budget here
            !feasibility.violations.iter().any(|v| {
                matches!(
                    v,
                    offline::Violation::Exclusivity { .. } | offline::Violation::Budget { .. }
                )
            })
        };

        verdicts.push(RunVerdict {
            run: name,
            audit_ok: audit.ok(),
            audit_violations: audit.violations,
            offline_ne,
            online_ne,
            feasibility_ok,
        });
    }
    let all_ok = verdicts.iter().all(|v| {
        v.audit_ok
            && v.feasibility_ok
            && v.offline_ne.unwrap_or(true)
            && v.online_ne.unwrap_or(true)
    });
    Ok(VerifySummary { verdicts, all_ok })
}

/// Generate (or trace-ingest) a scenario and write its JSON export.
pub fn run_gen_scenario(config: &ExperimentConfig, seed: u64, out_path: &Path) -> Result<()> {
    let scenario = config.scenario_for(seed)?;
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(out_path, scenario.to_json()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config_json() -> String {
        r#"{
            "schema_version": 1,
            "scenario": {"num_tasks": 3, "num_workers": 8},
            "variants": ["iParts", "ConOff"],
            "seeds": [0, 1],
            "attack": {"snapshots": [1, 5], "replications": 3, "ledger_replications": 1}
        }"#
        .to_string()
    }

    #[test]
    fn defaults_parse_and_validate() {
        let cfg = ExperimentConfig::from_json(&tiny_config_json()).unwrap();
        assert_eq!(cfg.scenario.num_tasks, 3);
        assert_eq!(cfg.planner.mc_samples, 200);
        assert_eq!(cfg.planner.improve_eps, 1e-4);
        assert_eq!(cfg.seeds(0), vec![0, 1]);
        assert_eq!(cfg.seeds(10), vec![10, 11]);
        let caps = cfg.privacy.resolved_caps(3).unwrap();
        assert_eq!(caps.beta0, 0.2 * 3.0);
        assert_eq!(caps.q_loss_max, 0.3 * 3.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"bogus_knob": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus_knob"), "{err}");
    }

    #[test]
    fn misspelled_variant_is_named() {
        let err = ExperimentConfig::from_json(r#"{"variants": ["iPartz"]}"#).unwrap_err();
        assert!(err.to_string().contains("iPartz"), "{err}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"schema_version": 2}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn simulate_writes_deterministic_ledger() {
        let cfg = ExperimentConfig::from_json(&tiny_config_json()).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let summary = run_simulate(&cfg, dir_a.path(), 2, 0).unwrap();
        assert_eq!(summary.runs, 4);
        assert!(summary.failed.is_empty());
        run_simulate(&cfg, dir_b.path(), 1, 0).unwrap();
        let a = fs::read(dir_a.path().join("ledger.csv")).unwrap();
        let b = fs::read(dir_b.path().join("ledger.csv")).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
        // per-run artifacts exist
        assert!(dir_a.path().join("runs/iParts_s00000000/profile.json").is_file());
        assert!(dir_a.path().join("runs/iParts_s00000000/interactions.csv").is_file());
        assert!(dir_a.path().join("timing.csv").is_file());
    }

    #[test]
    fn verify_accepts_fresh_runs_and_catches_tampering() {
        let cfg = ExperimentConfig::from_json(&tiny_config_json()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        run_simulate(&cfg, dir.path(), 1, 0).unwrap();
        let summary = run_verify(dir.path()).unwrap();
        assert!(summary.all_ok, "{:?}", summary.verdicts);
        assert_eq!(summary.verdicts.len(), 4);
        // ConOff runs are verified on the offline game only
        let conoff = summary.verdicts.iter().find(|v| v.run.starts_with("ConOff")).unwrap();
        assert!(conoff.offline_ne.is_some());
        assert!(conoff.online_ne.is_none());

        // duplicate a worker across tasks inside a stored profile
        let doc_path = dir.path().join("runs/iParts_s00000000/profile.json");
        let mut doc: ProfileDoc = serde_json::from_str(&fs::read_to_string(&doc_path).unwrap()).unwrap();
        let stolen = doc
            .offline_profile
            .iter()
            .find(|c| !c.workers.is_empty())
            .map(|c| (c.task, c.workers[0]))
            .expect("some contracted worker");
        for c in &mut doc.offline_profile {
            if c.task != stolen.0 {
                c.workers.push(stolen.1);
                break;
            }
        }
        fs::write(&doc_path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
        let summary = run_verify(dir.path()).unwrap();
        assert!(!summary.all_ok);
        let bad = summary.verdicts.iter().find(|v| v.run == "iParts_s00000000").unwrap();
        assert!(!bad.audit_ok);
        assert!(bad.audit_violations.iter().any(|v| v.contains("engaged more than once")));
    }

    #[test]
    fn attack_study_emits_grid_rows() {
        let cfg = ExperimentConfig::from_json(&tiny_config_json()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = run_attack(&cfg, dir.path(), 1).unwrap();
        let body = fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        // header + 3 default variants x 2 snapshot counts
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert!(lines[0].starts_with("variant,snapshots,replications"));
        assert!(body.contains("NoP"));
    }

    #[test]
    fn attack_grid_shows_the_expected_profiles() {
        // one memo-epoch spans the whole grid
        let cfg = ExperimentConfig::from_json(
            r#"{
                "scenario": {"num_tasks": 4, "num_workers": 12},
                "privacy": {"epoch_length": 300},
                "attack": {"snapshots": [1, 10, 50, 200], "replications": 10}
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = run_attack(&cfg, dir.path(), 2).unwrap();
        let mut per_variant: std::collections::HashMap<String, Vec<(usize, f64, f64)>> =
            std::collections::HashMap::new();
        let mut reader = csv::Reader::from_path(path).unwrap();
        for record in reader.records() {
            let r = record.unwrap();
            per_variant.entry(r[0].to_string()).or_default().push((
                r[1].parse().unwrap(),
                r[4].parse().unwrap(),  // one_snapshot_success
                r[10].parse().unwrap(), // multi_snapshot_success
            ));
        }
        // no perturbation: the one-snapshot attacker is always right
        assert!(per_variant["NoP"].iter().all(|(_, osr, msr)| *osr == 1.0 && *msr == 1.0));
        // memoized reports: majority success does not move with T
        let memoized = &per_variant["iParts"];
        assert!(memoized.iter().all(|(_, _, msr)| *msr == memoized[0].2));
        // fresh perturbation: majority success is non-decreasing in T
        let mut fresh = per_variant["NoMem"].clone();
        fresh.sort_by_key(|(t, _, _)| *t);
        assert!(fresh.windows(2).all(|w| w[1].2 >= w[0].2));
        assert!(fresh.last().unwrap().2 > fresh[0].2);
    }

    #[test]
    fn gen_scenario_round_trips() {
        let cfg = ExperimentConfig::from_json(&tiny_config_json()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        run_gen_scenario(&cfg, 7, &path).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        let back = crate::market::Scenario::from_json(&body).unwrap();
        assert_eq!(back.num_tasks(), 3);
        assert_eq!(back.rng_seed, 7);
    }
}
