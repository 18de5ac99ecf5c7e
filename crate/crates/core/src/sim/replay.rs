use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::metrics::cache_hit_ratio;
use super::trace::QueryTrace;
use crate::accel::AccelModel;
use crate::sched::{Policy, Scheduler, SchedulerConfig};
use crate::supernet::SubNetDescriptor;
use crate::table::{CandidateSet, LatencyTable};
use crate::Result;

/// One served query. Times in seconds, energy in joules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServingRecord {
    pub query: usize,
    pub subnet: String,
    /// Subgraph resident while this query ran.
    pub cache: String,
    pub accuracy_target: f64,
    pub latency_target_s: f64,
    pub served_accuracy: f64,
    pub table_latency_s: f64,
    /// Fill time of the previous cache update, charged here.
    pub fill_latency_s: f64,
    pub served_latency_s: f64,
    /// The scheduler found no feasible subnet.
    pub fallback: bool,
    pub violated: bool,
    pub cache_updated: bool,
    pub hit_ratio: f64,
    pub weight_miss_bytes: u64,
    pub weight_hit_bytes: u64,
    pub activation_bytes: u64,
    /// Cache-fill bytes charged to this query.
    pub fill_bytes: u64,
    pub energy_j: f64,
}

pub const RECORD_HEADER: [&str; 18] = [
    "query",
    "subnet",
    "cache",
    "accuracy_target",
    "latency_target_s",
    "served_accuracy",
    "table_latency_s",
    "fill_latency_s",
    "served_latency_s",
    "fallback",
    "violated",
    "cache_updated",
    "hit_ratio",
    "weight_miss_bytes",
    "weight_hit_bytes",
    "activation_bytes",
    "fill_bytes",
    "energy_j",
];

/// Runs `trace` through a fresh scheduler.
///
/// The initial cache is assumed warm. Each cache update's fill is charged to
/// the following query; a fill after the last query is dropped.
pub fn replay(
    model: &AccelModel<'_>,
    table: &LatencyTable,
    subnets: &[SubNetDescriptor],
    candidates: &CandidateSet,
    trace: &QueryTrace,
    config: SchedulerConfig,
) -> Result<Vec<ServingRecord>> {
    table.check_hardware(model.hw())?;
    let mut sched = Scheduler::new(model.net(), table, subnets, candidates, config)?;
    let enc: Vec<_> = subnets.iter().map(|s| s.shape.encode()).collect();
    let cand_enc: Vec<_> = candidates.subgraphs().iter().map(|g| g.shape.encode()).collect();
    let mut pending = 0u64;
    let mut out = Vec::with_capacity(trace.len());
    for q in &trace.queries {
        let d = sched.step(q)?;
        let sn = &subnets[d.subnet];
        let g = candidates.get(d.cache);
        let cost = model.subnet_cost(sn, g)?;
        let table_latency = table.get(d.subnet, d.cache);
        let fill_latency = model.fill_time(pending);
        let served = table_latency + fill_latency;
        let violated = match config.policy {
            Policy::StrictAccuracy => sn.accuracy < q.accuracy,
            Policy::StrictLatency => served > q.latency,
        };
        let energy = model.hw().energy_per_byte * (cost.off_chip_bytes() + pending) as f64;
        out.push(ServingRecord {
            query: q.index,
            subnet: sn.id.clone(),
            cache: g.id.clone(),
            accuracy_target: q.accuracy,
            latency_target_s: q.latency,
            served_accuracy: sn.accuracy,
            table_latency_s: table_latency,
            fill_latency_s: fill_latency,
            served_latency_s: served,
            fallback: d.violated,
            violated,
            cache_updated: d.cache_updated,
            hit_ratio: cache_hit_ratio(&enc[d.subnet], &cand_enc[d.cache])?,
            weight_miss_bytes: cost.weight_miss_bytes,
            weight_hit_bytes: cost.weight_hit_bytes,
            activation_bytes: cost.activation_bytes,
            fill_bytes: pending,
            energy_j: energy,
        });
        pending = d.fill_bytes;
    }
    Ok(out)
}

pub fn write_records<W: Write>(records: &[ServingRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ServingRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|rec| rec.map_err(Into::into)).collect()
}
