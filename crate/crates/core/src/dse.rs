//! Sweeps over persistent-buffer size, bandwidth and throughput, comparing
//! cached against uncached serving of one trace.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel::{AccelModel, HardwareConfig};
use crate::sched::{InitialCache, SchedulerConfig, Window};
use crate::sim::{aggregate, replay, QueryTrace};
use crate::supernet::{SubGraphDescriptor, SubNetDescriptor, SuperNet};
use crate::table::{build_candidate_set, build_table, shrink_to_fit, CandidateParams, CandidateSet};
use crate::{Error, Result};

/// What the persistent buffer holds at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    /// Union of the serving subnets, shrunk to fit, held for the whole trace.
    #[default]
    StaticUnion,
    /// Full candidate set with the cache-aware scheduler.
    Scheduler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub pb_bytes: u64,
    pub bandwidth: f64,
    pub throughput: f64,
}

/// Cartesian grid; every combination is one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub pb_bytes: Vec<u64>,
    pub bandwidth: Vec<f64>,
    pub throughput: Vec<f64>,
    #[serde(default)]
    pub energy_per_byte: f64,
}

impl Grid {
    /// Points ordered by (bandwidth, throughput, pb).
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &bandwidth in &self.bandwidth {
            for &throughput in &self.throughput {
                for &pb_bytes in &self.pb_bytes {
                    out.push(GridPoint {
                        pb_bytes,
                        bandwidth,
                        throughput,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub cache: CachePolicy,
    pub scheduler: SchedulerConfig,
    pub candidates: CandidateParams,
    pub energy_per_byte: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DseRow {
    pub pb_bytes: u64,
    pub bw_bytes_per_s: f64,
    pub flops_per_s: f64,
    pub mean_latency_pb: f64,
    pub mean_latency_nopb: f64,
    pub time_save_pct: f64,
}

pub const DSE_HEADER: [&str; 6] = [
    "pb_bytes",
    "bw_bytes_per_s",
    "flops_per_s",
    "mean_latency_pb",
    "mean_latency_nopb",
    "time_save_pct",
];

/// Union of all serving subnets, shrunk to the buffer.
pub fn static_union(net: &SuperNet, subnets: &[SubNetDescriptor], pb_bytes: u64) -> Result<CandidateSet> {
    let mut it = subnets.iter();
    let first = it.next().ok_or_else(|| Error::config("no serving subnets"))?;
    let union = it.try_fold(first.shape.clone(), |acc, s| acc.union(&s.shape))?;
    let shape = shrink_to_fit(net, &union, pb_bytes)?;
    let id = if shape.is_zero() { "none" } else { "union" };
    CandidateSet::new(vec![SubGraphDescriptor::new(net, id, shape)?], pb_bytes)
}

fn mean_latency(
    model: &AccelModel<'_>,
    subnets: &[SubNetDescriptor],
    candidates: &CandidateSet,
    trace: &QueryTrace,
    config: SchedulerConfig,
) -> Result<f64> {
    let table = build_table(model, subnets, candidates)?;
    let records = replay(model, &table, subnets, candidates, trace, config)?;
    Ok(aggregate(&records)?.mean_latency_s)
}

pub fn evaluate_point(
    net: &SuperNet,
    subnets: &[SubNetDescriptor],
    point: &GridPoint,
    trace: &QueryTrace,
    config: &SweepConfig,
) -> Result<DseRow> {
    let hw = HardwareConfig::new(point.bandwidth, point.throughput, point.pb_bytes, config.energy_per_byte)?;
    let fixed = SchedulerConfig {
        window: Window::Never,
        initial: InitialCache::Index(0),
        ..config.scheduler
    };
    let none_hw = hw.with_pb(0);
    let none = AccelModel::new(net, none_hw)?;
    let nopb = mean_latency(&none, subnets, &CandidateSet::uncached(net), trace, fixed)?;
    let pb = if point.pb_bytes == 0 {
        nopb
    } else {
        let model = AccelModel::new(net, hw)?;
        match config.cache {
            CachePolicy::StaticUnion => {
                mean_latency(&model, subnets, &static_union(net, subnets, point.pb_bytes)?, trace, fixed)?
            }
            CachePolicy::Scheduler => {
                let set = build_candidate_set(net, subnets, &hw, &config.candidates)?;
                mean_latency(&model, subnets, &set, trace, config.scheduler)?
            }
        }
    };
    Ok(DseRow {
        pb_bytes: point.pb_bytes,
        bw_bytes_per_s: point.bandwidth,
        flops_per_s: point.throughput,
        mean_latency_pb: pb,
        mean_latency_nopb: nopb,
        time_save_pct: 100.0 * (nopb - pb) / nopb,
    })
}

/// One row per grid point, in input order. Points run in parallel.
pub fn sweep(
    net: &SuperNet,
    subnets: &[SubNetDescriptor],
    points: &[GridPoint],
    trace: &QueryTrace,
    config: &SweepConfig,
) -> Result<Vec<DseRow>> {
    if points.is_empty() {
        return Err(Error::config("empty DSE grid"));
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            evaluate_point(net, subnets, p, trace, config).map_err(|e| {
                Error::config(format!(
                    "grid point {i} (pb={} bw={} p={}): {e}",
                    p.pb_bytes, p.bandwidth, p.throughput
                ))
            })
        })
        .collect()
}

pub fn write_dse_csv<W: Write>(rows: &[DseRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(DSE_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
