//! Benchmark-only crate; see the `benches/` directory.
//!
//! Shared market fixtures for the planner and primitive benchmarks.

use iparts_core::baselines::{RunConfig, Variant};
use iparts_core::market::{generate_scenario, Scenario, ScenarioConfig};
use iparts_core::RunArtifacts;

/// Mid-sized market used across benches.
pub fn bench_scenario(num_tasks: usize, num_workers: usize) -> Scenario {
    let config = ScenarioConfig { num_tasks, num_workers, ..Default::default() };
    generate_scenario(&config, 12345).expect("valid bench config")
}

/// Full pipeline run for end-to-end benches.
pub fn bench_run(scenario: &Scenario) -> RunArtifacts {
    let cfg = RunConfig::defaults_for(scenario.num_tasks());
    iparts_core::run_variant(Variant::IParts, scenario, &cfg).expect("bench run")
}
