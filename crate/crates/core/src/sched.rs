//! Cache-state-aware query scheduling.
//!
//! Each query picks a SubNet from the latency table column of the currently
//! cached SubGraph. The served SubNet's encoding feeds a running average over
//! the last `Q` queries, and every `Q` queries the cache moves to the candidate
//! closest to that average.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::supernet::{EncodedVector, SubNetDescriptor, SuperNet};
use crate::table::{CandidateSet, LatencyTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Policy {
    /// Accuracy target is hard; minimize latency.
    #[value(alias = "accuracy")]
    StrictAccuracy,
    /// Latency target is hard; maximize accuracy.
    #[value(alias = "latency")]
    StrictLatency,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::StrictAccuracy => "STRICT_ACCURACY",
            Policy::StrictLatency => "STRICT_LATENCY",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub index: usize,
    /// A_t, top-1 fraction.
    pub accuracy: f64,
    /// L_t, seconds.
    pub latency: f64,
}

impl Query {
    pub fn new(index: usize, accuracy: f64, latency: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::config(format!("query {index}: accuracy target {accuracy} outside [0, 1]")));
        }
        if !(latency > 0.0 && latency.is_finite()) {
            return Err(Error::config(format!("query {index}: latency target {latency} must be > 0")));
        }
        Ok(Query {
            index,
            accuracy,
            latency,
        })
    }
}

/// How often the cache is reconsidered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Every(usize),
    Never,
}

impl Window {
    pub fn every(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::config("window Q must be >= 1"));
        }
        Ok(Window::Every(q))
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Every(q) => write!(f, "{q}"),
            Window::Never => f.write_str("inf"),
        }
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "never" | "∞" => Ok(Window::Never),
            t => {
                let q: usize = t
                    .parse()
                    .map_err(|_| Error::config(format!("bad window `{t}` (integer >= 1 or `inf`)")))?;
                Window::every(q)
            }
        }
    }
}

impl Serialize for Window {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(q) => Window::every(q),
            Raw::S(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCache {
    /// Seeded uniform choice over the candidates.
    Random(u64),
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub policy: Policy,
    pub window: Window,
    pub initial: InitialCache,
}

impl SchedulerConfig {
    pub fn new(policy: Policy, window: Window, seed: u64) -> Self {
        SchedulerConfig {
            policy,
            window,
            initial: InitialCache::Random(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub index: usize,
    /// The feasible set was empty and the fallback subnet was used.
    pub violated: bool,
}

/// Picks a subnet for `query` given per-subnet accuracies and the latency of
/// each subnet against the current cache. Ties go to the lowest index.
pub fn select_subnet(
    policy: Policy,
    query: &Query,
    accuracies: &[f64],
    latency: impl Fn(usize) -> f64,
) -> Result<Selection> {
    if accuracies.is_empty() {
        return Err(Error::config("no subnets to select from"));
    }
    let n = accuracies.len();
    // first index attaining the best key; `better(a, b)` is a strict order
    let best = |keep: &dyn Fn(usize) -> bool, better: &dyn Fn(usize, usize) -> bool| {
        (0..n)
            .filter(|&i| keep(i))
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if !better(i, j) => Some(j),
                _ => Some(i),
            })
    };
    let lat_lt = |i: usize, j: usize| latency(i) < latency(j);
    let acc_gt = |i: usize, j: usize| accuracies[i] > accuracies[j];
    let (feasible, fallback) = match policy {
        Policy::StrictAccuracy => (
            best(&|i| accuracies[i] >= query.accuracy, &lat_lt),
            best(&|_| true, &acc_gt),
        ),
        Policy::StrictLatency => (
            best(&|i| latency(i) <= query.latency, &acc_gt),
            best(&|_| true, &lat_lt),
        ),
    };
    Ok(match feasible {
        Some(index) => Selection {
            index,
            violated: false,
        },
        None => Selection {
            index: fallback.expect("non-empty"),
            violated: true,
        },
    })
}

/// Mean of the last `Q` served vectors (all of them for an unbounded window).
#[derive(Debug, Clone, PartialEq)]
pub struct RunningAverage {
    window: Option<usize>,
    history: VecDeque<EncodedVector>,
    sum: Vec<f64>,
    count: usize,
}

impl RunningAverage {
    pub fn new(len: usize, window: Window) -> Self {
        RunningAverage {
            window: match window {
                Window::Every(q) => Some(q),
                Window::Never => None,
            },
            history: VecDeque::new(),
            sum: vec![0.0; len],
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// AvgNet; the zero vector before any update.
    pub fn mean(&self) -> EncodedVector {
        if self.count == 0 {
            return EncodedVector::zeros(self.sum.len());
        }
        let n = self.count as f64;
        EncodedVector::new(self.sum.iter().map(|s| s / n).collect()).expect("mean of valid vectors")
    }
}

pub fn update_average(avg: &mut RunningAverage, served: &EncodedVector) -> Result<()> {
    if served.len() != avg.sum.len() {
        return Err(Error::LayerCount {
            expected: avg.sum.len() / 2,
            got: served.len() / 2,
        });
    }
    for (s, v) in avg.sum.iter_mut().zip(served.as_slice()) {
        *s += v;
    }
    avg.count += 1;
    if let Some(q) = avg.window {
        avg.history.push_back(served.clone());
        if avg.history.len() > q {
            let old = avg.history.pop_front().expect("non-empty");
            for (s, v) in avg.sum.iter_mut().zip(old.as_slice()) {
                *s -= v;
            }
            avg.count -= 1;
        }
    }
    Ok(())
}

/// Index of the candidate nearest to `avg` (Euclidean), lowest index on ties.
pub fn select_cache(avg: &EncodedVector, candidates: &[EncodedVector]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::config("empty candidate set"));
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, g) in candidates.iter().enumerate() {
        if g.len() != avg.len() {
            return Err(Error::LayerCount {
                expected: avg.len() / 2,
                got: g.len() / 2,
            });
        }
        let d = avg.distance(g);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub query: usize,
    pub subnet: usize,
    pub violated: bool,
    /// Cache index the subnet was served against.
    pub cache: usize,
    pub cache_updated: bool,
    /// Present iff `cache_updated`.
    pub new_cache: Option<usize>,
    /// Bytes of `new_cache` absent from the previous cache.
    pub fill_bytes: u64,
}

/// The scheduler state machine over fixed artifacts.
#[derive(Debug, Clone)]
pub struct Scheduler<'a> {
    net: &'a SuperNet,
    table: &'a LatencyTable,
    candidates: &'a CandidateSet,
    config: SchedulerConfig,
    accuracies: Vec<f64>,
    subnet_vecs: Vec<EncodedVector>,
    candidate_vecs: Vec<EncodedVector>,
    avg: RunningAverage,
    cache: usize,
    since_update: usize,
}

impl<'a> Scheduler<'a> {
    pub fn new(
        net: &'a SuperNet,
        table: &'a LatencyTable,
        subnets: &'a [SubNetDescriptor],
        candidates: &'a CandidateSet,
        config: SchedulerConfig,
    ) -> Result<Self> {
        if subnets.is_empty() {
            return Err(Error::config("no subnets to serve"));
        }
        if candidates.is_empty() {
            return Err(Error::config("empty candidate set"));
        }
        table.check_layout(subnets, candidates)?;
        let cache = match config.initial {
            InitialCache::Random(seed) => ChaCha8Rng::seed_from_u64(seed).gen_range(0..candidates.len()),
            InitialCache::Index(i) if i < candidates.len() => i,
            InitialCache::Index(i) => {
                return Err(Error::config(format!(
                    "initial cache index {i} out of range for {} candidates",
                    candidates.len()
                )))
            }
        };
        Ok(Scheduler {
            net,
            table,
            candidates,
            config,
            accuracies: subnets.iter().map(|s| s.accuracy).collect(),
            subnet_vecs: subnets.iter().map(|s| s.shape.encode()).collect(),
            candidate_vecs: candidates.subgraphs().iter().map(|g| g.shape.encode()).collect(),
            avg: RunningAverage::new(2 * net.layer_count(), config.window),
            cache,
            since_update: 0,
        })
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn cache(&self) -> usize {
        self.cache
    }

    pub fn average(&self) -> EncodedVector {
        self.avg.mean()
    }

    pub fn step(&mut self, query: &Query) -> Result<Decision> {
        let col = self.cache;
        let table = self.table;
        let sel = select_subnet(self.config.policy, query, &self.accuracies, |i| table.get(i, col))?;
        update_average(&mut self.avg, &self.subnet_vecs[sel.index])?;
        self.since_update += 1;
        let mut decision = Decision {
            query: query.index,
            subnet: sel.index,
            violated: sel.violated,
            cache: col,
            cache_updated: false,
            new_cache: None,
            fill_bytes: 0,
        };
        if let Window::Every(q) = self.config.window {
            if self.since_update >= q {
                self.since_update = 0;
                let next = select_cache(&self.avg.mean(), &self.candidate_vecs)?;
                if next != col {
                    let old = &self.candidates.get(col).shape;
                    let new = self.candidates.get(next);
                    decision.fill_bytes = new.weight_bytes - self.net.overlap_bytes(&new.shape, old)?;
                    decision.cache_updated = true;
                    decision.new_cache = Some(next);
                    self.cache = next;
                }
            }
        }
        Ok(decision)
    }
}
