use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sched::Query;
use crate::supernet::SubNetDescriptor;
use crate::table::LatencyTable;
use crate::{Error, Result};

/// Margin around the subnet accuracy range for drawn accuracy targets.
pub const ACCURACY_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceMix {
    /// A_t and L_t drawn independently and uniformly.
    Uniform,
    /// A_t uniform; L_t pinned to the loose upper end of the range.
    AccuracyOnly,
    /// L_t uniform; A_t = 0.
    LatencyOnly,
    /// Runs of `burst` queries aimed at one randomly drawn subnet: A_t at
    /// its accuracy, L_t within 20% above its mean table latency.
    Bursty { burst: usize },
}

impl TraceMix {
    pub fn parse(s: &str, burst: usize) -> Result<Self> {
        Ok(match s {
            "uniform" => TraceMix::Uniform,
            "accuracy" | "accuracy_only" => TraceMix::AccuracyOnly,
            "latency" | "latency_only" => TraceMix::LatencyOnly,
            "bursty" => TraceMix::Bursty { burst },
            _ => {
                return Err(Error::config(format!(
                    "unknown trace mix `{s}` (uniform, accuracy, latency, bursty)"
                )))
            }
        })
    }
}

/// Ranges the generator drew from; recorded in the sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub accuracy_lo: f64,
    pub accuracy_hi: f64,
    pub latency_lo: f64,
    pub latency_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub seed: u64,
    pub mix: Option<TraceMix>,
    pub params: Option<TraceParams>,
    pub queries: Vec<Query>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    seed: u64,
    count: usize,
    mix: Option<TraceMix>,
    params: Option<TraceParams>,
}

impl QueryTrace {
    /// Wraps explicit queries, checking indices run 0, 1, 2, ...
    pub fn from_queries(queries: Vec<Query>, seed: u64) -> Result<Self> {
        for (i, q) in queries.iter().enumerate() {
            if q.index != i {
                return Err(Error::config(format!("trace index {} at position {i}", q.index)));
            }
            Query::new(q.index, q.accuracy, q.latency)?;
        }
        Ok(QueryTrace {
            seed,
            mix: None,
            params: None,
            queries,
        })
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// `t,accuracy_target,latency_target_s` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "accuracy_target", "latency_target_s"])?;
        for q in &self.queries {
            w.write_record([q.index.to_string(), format!("{:?}", q.accuracy), format!("{:?}", q.latency)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(csv_path)?)?;
        let side = Sidecar {
            seed: self.seed,
            count: self.queries.len(),
            mix: self.mix,
            params: self.params,
        };
        std::fs::write(csv_path.with_extension("json"), serde_json::to_string_pretty(&side)? + "\n")?;
        Ok(())
    }

    /// Reads a trace CSV; the sidecar is optional.
    pub fn load(csv_path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(csv_path)?;
        let mut queries = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |k: usize, name: &str| -> Result<&str> {
                rec.get(k)
                    .ok_or_else(|| Error::parse(csv_path, format!("row {}: missing `{name}`", i + 1)))
            };
            let num = |k: usize, name: &str| -> Result<f64> {
                let s = field(k, name)?;
                s.trim()
                    .parse()
                    .map_err(|_| Error::parse(csv_path, format!("row {}: bad `{name}` value `{s}`", i + 1)))
            };
            let t: usize = field(0, "t")?
                .trim()
                .parse()
                .map_err(|_| Error::parse(csv_path, format!("row {}: bad `t`", i + 1)))?;
            let q = Query::new(t, num(1, "accuracy_target")?, num(2, "latency_target_s")?)
                .map_err(|e| Error::parse(csv_path, e.to_string()))?;
            queries.push(q);
        }
        let side_path = csv_path.with_extension("json");
        let side: Option<Sidecar> = match std::fs::read_to_string(&side_path) {
            Ok(s) => Some(serde_json::from_str(&s).map_err(|e| Error::parse(&side_path, e.to_string()))?),
            Err(_) => None,
        };
        let mut trace = QueryTrace::from_queries(queries, side.as_ref().map_or(0, |s| s.seed))
            .map_err(|e| Error::parse(csv_path, e.to_string()))?;
        if let Some(s) = side {
            trace.mix = s.mix;
            trace.params = s.params;
        }
        Ok(trace)
    }
}

/// Draws `count` queries. Latency ranges come from the table.
pub fn generate_trace(
    subnets: &[SubNetDescriptor],
    table: &LatencyTable,
    count: usize,
    mix: TraceMix,
    seed: u64,
) -> Result<QueryTrace> {
    if subnets.is_empty() {
        return Err(Error::config("cannot generate a trace without subnets"));
    }
    if count == 0 {
        return Err(Error::config("trace length must be >= 1"));
    }
    if table.n_rows() != subnets.len() {
        return Err(Error::config("table rows do not match the subnet list"));
    }
    let accs = subnets.iter().map(|s| s.accuracy);
    let a_min = accs.clone().fold(f64::INFINITY, f64::min);
    let a_max = accs.fold(f64::NEG_INFINITY, f64::max);
    let l_min = table.entries().iter().copied().fold(f64::INFINITY, f64::min);
    let l_max = table.entries().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let params = TraceParams {
        accuracy_lo: (a_min - ACCURACY_EPSILON).max(0.0),
        accuracy_hi: (a_max + ACCURACY_EPSILON).min(1.0),
        latency_lo: 0.8 * l_min,
        latency_hi: 1.2 * l_max,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(count);
    let mut center = 0usize;
    for t in 0..count {
        let (a, l) = match mix {
            TraceMix::Uniform => (
                rng.gen_range(params.accuracy_lo..=params.accuracy_hi),
                rng.gen_range(params.latency_lo..=params.latency_hi),
            ),
            TraceMix::AccuracyOnly => (rng.gen_range(params.accuracy_lo..=params.accuracy_hi), params.latency_hi),
            TraceMix::LatencyOnly => (0.0, rng.gen_range(params.latency_lo..=params.latency_hi)),
            TraceMix::Bursty { burst } => {
                if burst == 0 {
                    return Err(Error::config("burst length must be >= 1"));
                }
                if t % burst == 0 {
                    center = rng.gen_range(0..subnets.len());
                }
                let row = table.row(center);
                let mean = row.iter().sum::<f64>() / row.len() as f64;
                (subnets[center].accuracy, mean * rng.gen_range(1.0..=1.2))
            }
        };
        queries.push(Query::new(t, a, l)?);
    }
    Ok(QueryTrace {
        seed,
        mix: Some(mix),
        params: Some(params),
        queries,
    })
}
