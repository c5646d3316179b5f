//! Two-stage mobile-crowdsensing market simulator.
//!
//! Workers hold private per-task intent vectors and report them through a
//! personalized randomized-response mechanism with per-epoch memoization.
//! The platform calibrates each worker's privacy budget against distortion
//! and inference-error caps, pre-plans budget- and risk-constrained
//! contracts offline through an exact potential game over expected welfare,
//! realizes stochastic arrivals, and patches quality deficits online through
//! a second, exact-potential recruitment game over idle workers. The
//! [`harness`] module drives seeded experiment sweeps over the algorithm
//! variants and emits deterministic CSV/JSON artifacts.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod interaction;
pub mod market;
pub mod metrics;
pub mod offline;
pub mod online;
pub mod privacy;
pub mod quality;
pub mod rng;
pub mod trace;

pub use baselines::{run_variant, LedgerRow, RunArtifacts, RunConfig, Variant};
pub use error::{Error, Result};
pub use harness::ExperimentConfig;
pub use market::{
    generate_scenario, sample_arrivals, ArrivalVector, PlannerView, Range, Scenario,
    ScenarioConfig, Task, Worker,
};
pub use offline::{ContractProfile, PlannerParams};
pub use online::ExecutionState;
pub use privacy::{CalibratedEps, IntentState, PrivacyCaps};
pub use quality::EconParams;
