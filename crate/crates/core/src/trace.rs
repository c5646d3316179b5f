//! Trajectory-trace ingestion: derives execution costs, sensing qualities
//! and arrival probabilities from worker trip records instead of the
//! synthetic samplers.
//!
//! Trace CSV schema: header
//! `worker_id,day,trip_distance,cur_x,cur_y,post_x,post_y`, one row per
//! worker-day trip segment, UTF-8, comma separators, `.` decimal point.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::market::{euclidean, Scenario, ScenarioConfig, Task, Worker};
use crate::quality::EconParams;
use crate::rng;

#[derive(Debug, Default)]
struct WorkerAccumulator {
    trips: f64,
    cur: [f64; 2],
    post: [f64; 2],
    rows: usize,
    days: BTreeSet<String>,
}

/// Build a scenario from a trace file. Execution cost is a weighted sum of
/// trip distance, worker-to-task distance and post-service distance scaled
/// by the worker's cost coefficient; quality is `kappa` over the sum of the
/// two task distances (guarded); arrival probability is the worker's
/// presence frequency over the observed days. Remaining attributes come
/// from the synthetic samplers so the rest of the pipeline is unchanged.
pub fn ingest_trace(path: &Path, config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    let params = config
        .trace
        .as_ref()
        .ok_or_else(|| Error::Config("trace ingestion requires scenario.trace settings".into()))?;
    params.validate()?;

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    {
        let headers = reader.headers()?;
        let expected = ["worker_id", "day", "trip_distance", "cur_x", "cur_y", "post_x", "post_y"];
        if headers.len() != expected.len()
            || headers.iter().zip(expected).any(|(h, e)| h != e)
        {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected header {headers:?}, want {expected:?}"),
            });
        }
    }

    let mut acc: BTreeMap<String, WorkerAccumulator> = BTreeMap::new();
    let mut all_days: BTreeSet<String> = BTreeSet::new();
    let mut bounds: Option<[f64; 4]> = None; // min_x, min_y, max_x, max_y
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize, name: &str| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::Parse { line, message: format!("missing {name}") })?
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, message: format!("bad {name}: {e}") })
        };
        let worker_id = record
            .get(0)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Parse { line, message: "missing worker_id".into() })?
            .to_string();
        let day = record
            .get(1)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Parse { line, message: "missing day".into() })?
            .to_string();
        let trip = field(2, "trip_distance")?;
        let cur = [field(3, "cur_x")?, field(4, "cur_y")?];
        let post = [field(5, "post_x")?, field(6, "post_y")?];
        if trip < 0.0 {
            return Err(Error::Parse { line, message: "trip_distance must be nonnegative".into() });
        }

        let b = bounds.get_or_insert([cur[0], cur[1], cur[0], cur[1]]);
        for p in [cur, post] {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        }

        all_days.insert(day.clone());
        let slot = acc.entry(worker_id).or_default();
        slot.trips += trip;
        slot.cur[0] += cur[0];
        slot.cur[1] += cur[1];
        slot.post[0] += post[0];
        slot.post[1] += post[1];
        slot.rows += 1;
        slot.days.insert(day);
    }
    if acc.is_empty() {
        return Err(Error::Config(format!("trace {} contains no data rows", path.display())));
    }
    let bounds = bounds.expect("nonempty trace has bounds");
    let total_days = all_days.len() as f64;

    let nt = config.num_tasks;
    let mut tasks = Vec::with_capacity(nt);
    for i in 0..nt {
        let mut r = rng::stream(seed, "task", &[i as u64]);
        let location = [
            bounds[0] + (bounds[2] - bounds[0]) * r.gen::<f64>(),
            bounds[1] + (bounds[3] - bounds[1]) * r.gen::<f64>(),
        ];
        tasks.push(Task {
            id: i,
            location,
            budget: config.budget.sample(&mut r),
            quality_demand: config.quality_demand.sample(&mut r),
            redundancy: config.redundancy.sample(&mut r),
            reference_variance: config.reference_variance.sample(&mut r),
        });
    }

    let mut workers = Vec::new();
    let mut mean_trip = Vec::new();
    let mut mean_cur = Vec::new();
    let mut mean_post = Vec::new();
    for (j, (_, a)) in acc.iter().enumerate() {
        let mut r = rng::stream(seed, "worker", &[j as u64]);
        let n = a.rows as f64;
        let cur = [a.cur[0] / n, a.cur[1] / n];
        let post = [a.post[0] / n, a.post[1] / n];
        // consume the location draws for stream parity with synthetic mode
        let _ = (r.gen::<f64>(), r.gen::<f64>());
        let capability = config.capability.sample(&mut r);
        let _synthetic_arrival = config.arrival_prob.sample(&mut r);
        workers.push(Worker {
            id: j,
            location: cur,
            eps_range: config.eps_range,
            capability,
            arrival_prob: (a.days.len() as f64 / total_days).clamp(0.0, 1.0),
            travel_cost_coeff: config.travel_cost_coeff.sample(&mut r),
            privacy_cost_coeff: config.privacy_cost_coeff.sample(&mut r),
            data_variance: BTreeMap::new(),
        });
        mean_trip.push(a.trips / n);
        mean_cur.push(cur);
        mean_post.push(post);
    }
    let nw = workers.len();

    // Trace-driven quality, re-expressed through the variance decomposition:
    // the reference variance absorbs the smallest observed inverse quality,
    // the per-pair data variance the rest, so the precision identity holds.
    let [w1, w2, w3] = params.weights;
    let mut quality = vec![vec![0.0; nw]; nt];
    let mut exe_cost = vec![vec![0.0; nw]; nt];
    for i in 0..nt {
        let mut q_row = Vec::with_capacity(nw);
        for j in 0..nw {
            let d_cur = euclidean(mean_cur[j], tasks[i].location);
            let d_post = euclidean(mean_post[j], tasks[i].location);
            exe_cost[i][j] = workers[j].travel_cost_coeff
                * (w1 * mean_trip[j] + w2 * d_cur + w3 * d_post);
            q_row.push(params.kappa / (d_cur + d_post + params.eps_guard));
        }
        let min_inv_q = q_row
            .iter()
            .zip(&workers)
            .map(|(q, w)| w.capability / q)
            .fold(f64::INFINITY, f64::min);
        tasks[i].reference_variance = min_inv_q * (1.0 - 1e-9);
        for (j, q) in q_row.iter().enumerate() {
            let dv = 1.0 / q - tasks[i].reference_variance / workers[j].capability;
            workers[j].data_variance.insert(i, dv.max(0.0));
            quality[i][j] = 1.0
                / (tasks[i].reference_variance / workers[j].capability
                    + workers[j].data_variance[&i]);
        }
    }

    let mut payment = vec![vec![0.0; nw]; nt];
    let mut intent_prior = vec![vec![0.0; nw]; nt];
    let mut true_intents = vec![vec![false; nt]; nw];
    for i in 0..nt {
        for j in 0..nw {
            let key = [i as u64, j as u64];
            payment[i][j] = config.payment.min
                + (config.payment.max - config.payment.min)
                    * rng::unit_uniform(seed, "payment", &key);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Range, TraceParams};
    use approx::assert_relative_eq;
    use std::io::Write;

    fn write_trace(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "worker_id,day,trip_distance,cur_x,cur_y,post_x,post_y").unwrap();
        write!(f, "{body}").unwrap();
        f.flush().unwrap();
        f
    }

    fn trace_config(path: &Path) -> ScenarioConfig {
        ScenarioConfig {
            num_tasks: 1,
            num_workers: 0,
            trace: Some(TraceParams {
                path: path.to_string_lossy().into_owned(),
                weights: [1.0, 1.0, 1.0],
                kappa: 1.0,
                eps_guard: 0.01,
            }),
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn quality_formula_at_zero_distance() {
        // single point: the task lands exactly on the worker
        let f = write_trace("cab7,d1,0.0,0.25,0.75,0.25,0.75\n");
        let cfg = trace_config(f.path());
        let s = ingest_trace(f.path(), &cfg, 3).unwrap();
        assert_relative_eq!(s.quality[0][0], 1.0 / 0.01, max_relative = 1e-9);
        // precision identity still holds exactly
        s.validate().unwrap();
    }

    #[test]
    fn zero_distances_and_zero_coeff_give_zero_cost() {
        let f = write_trace("cab7,d1,0.0,0.5,0.5,0.5,0.5\n");
        let mut cfg = trace_config(f.path());
        cfg.travel_cost_coeff = Range { min: 0.0, max: 0.0 };
        let s = ingest_trace(f.path(), &cfg, 1).unwrap();
        assert_eq!(s.exe_cost[0][0], 0.0);
    }

    #[test]
    fn presence_frequency_becomes_arrival_probability() {
        let mut body = String::new();
        // worker a present on 28 of 30 days, worker b on all 30
        for d in 0..30 {
            body.push_str(&format!("b,{d},1.0,0.1,0.1,0.2,0.2\n"));
            if d >= 2 {
                body.push_str(&format!("a,{d},1.0,0.4,0.4,0.5,0.5\n"));
            }
        }
        let f = write_trace(&body);
        let cfg = trace_config(f.path());
        let s = ingest_trace(f.path(), &cfg, 9).unwrap();
        // workers sorted by id: a first
        assert_relative_eq!(s.workers[0].arrival_prob, 28.0 / 30.0, max_relative = 1e-12);
        assert_relative_eq!(s.workers[1].arrival_prob, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn malformed_row_names_its_line() {
        let f = write_trace("a,d1,1.0,0.1,0.1,0.2,0.2\nb,d1,oops,0.1,0.1,0.2,0.2\n");
        let cfg = trace_config(f.path());
        match ingest_trace(f.path(), &cfg, 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_ingestion_error() {
        let f = write_trace("");
        let cfg = trace_config(f.path());
        assert!(matches!(ingest_trace(f.path(), &cfg, 0), Err(Error::Config(_))));
    }

    #[test]
    fn execution_cost_uses_weighted_distance_sum() {
        let f = write_trace("w,d1,2.0,0.0,0.0,1.0,0.0\n");
        let mut cfg = trace_config(f.path());
        cfg.travel_cost_coeff = Range { min: 0.5, max: 0.5 };
        cfg.trace.as_mut().unwrap().weights = [1.0, 2.0, 3.0];
        let s = ingest_trace(f.path(), &cfg, 4).unwrap();
        let task = &s.tasks[0];
        let d_cur = euclidean([0.0, 0.0], task.location);
        let d_post = euclidean([1.0, 0.0], task.location);
        assert_relative_eq!(
            s.exe_cost[0][0],
            0.5 * (1.0 * 2.0 + 2.0 * d_cur + 3.0 * d_post),
            max_relative = 1e-12
        );
    }
}
