//! Message accounting shared by the planning stages and the overhead
//! metrics.
//!
//! The offline game runs platform-side over already-collected perturbed
//! reports, so its physical traffic is limited to report uplinks and
//! contract notifications. Online rounds touch real workers (presence and
//! commitment must be confirmed at execution time), so every candidate probe
//! in an online round is logged as a message pair.

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const PLATFORM: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Off,
    On,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Worker to platform/task.
    Up,
    /// Platform/task to worker.
    Down,
}

/// One directed message between a task (or the platform, task id -1) and a
/// worker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub stage: Stage,
    pub round: u32,
    pub task_id: i64,
    pub worker_id: usize,
    pub direction: Direction,
    pub bytes: u64,
}

pub const OFFER_BYTES: u64 = 16;

/// Append an offer/response exchange (one down plus one up message).
pub fn log_exchange(
    log: &mut Vec<InteractionRecord>,
    stage: Stage,
    round: u32,
    task_id: i64,
    worker_id: usize,
) {
    log.push(InteractionRecord {
        stage,
        round,
        task_id,
        worker_id,
        direction: Direction::Down,
        bytes: OFFER_BYTES,
    });
    log.push(InteractionRecord {
        stage,
        round,
        task_id,
        worker_id,
        direction: Direction::Up,
        bytes: OFFER_BYTES,
    });
}

pub fn write_csv<W: std::io::Write>(log: &[InteractionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "round", "task_id", "worker_id", "direction", "bytes"])?;
    for r in log {
        w.write_record([
            match r.stage {
                Stage::Off => "off",
                Stage::On => "on",
            }
            .to_string(),
            r.round.to_string(),
            r.task_id.to_string(),
            r.worker_id.to_string(),
            match r.direction {
                Direction::Up => "up",
                Direction::Down => "down",
            }
            .to_string(),
            r.bytes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<InteractionRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| crate::error::Error::Parse { line, message };
        let stage = match record.get(0) {
            Some("off") => Stage::Off,
            Some("on") => Stage::On,
            other => return Err(parse_err(format!("bad stage {other:?}"))),
        };
        let direction = match record.get(4) {
            Some("up") => Direction::Up,
            Some("down") => Direction::Down,
            other => return Err(parse_err(format!("bad direction {other:?}"))),
        };
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| crate::error::Error::Parse {
                line,
                message: format!("missing field {idx}"),
            })
        };
        out.push(InteractionRecord {
            stage,
            round: field(1)?.parse().map_err(|e| parse_err(format!("round: {e}")))?,
            task_id: field(2)?.parse().map_err(|e| parse_err(format!("task_id: {e}")))?,
            worker_id: field(3)?.parse().map_err(|e| parse_err(format!("worker_id: {e}")))?,
            direction,
            bytes: field(5)?.parse().map_err(|e| parse_err(format!("bytes: {e}")))?,
        });
    }
    Ok(out)
}
