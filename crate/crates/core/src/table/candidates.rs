use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::accel::HardwareConfig;
use crate::supernet::{
    common_core, EncodedVector, ExpandPick, LayerShape, Pick, Shape, SubGraphDescriptor,
    SubNetDescriptor, SuperNet,
};
use crate::{Error, Result};

/// The restricted set of SubGraphs the persistent buffer may hold.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    subgraphs: Vec<SubGraphDescriptor>,
    pb_bytes: u64,
}

impl CandidateSet {
    pub fn new(subgraphs: Vec<SubGraphDescriptor>, pb_bytes: u64) -> Result<Self> {
        if subgraphs.is_empty() {
            return Err(Error::config("candidate set is empty"));
        }
        let mut shapes = HashSet::new();
        let mut ids = HashSet::new();
        for g in &subgraphs {
            if g.weight_bytes > pb_bytes {
                return Err(Error::Capacity {
                    id: g.id.clone(),
                    bytes: g.weight_bytes,
                    capacity: pb_bytes,
                });
            }
            if !ids.insert(g.id.as_str()) {
                return Err(Error::config(format!("duplicate candidate id `{}`", g.id)));
            }
            if !shapes.insert(&g.shape) {
                return Err(Error::config(format!("candidate `{}` duplicates a shape", g.id)));
            }
        }
        Ok(CandidateSet {
            subgraphs,
            pb_bytes,
        })
    }

    /// The no-PB configuration: a single empty subgraph.
    pub fn uncached(net: &SuperNet) -> Self {
        CandidateSet {
            subgraphs: vec![SubGraphDescriptor::empty(net)],
            pb_bytes: 0,
        }
    }

    pub fn subgraphs(&self) -> &[SubGraphDescriptor] {
        &self.subgraphs
    }

    pub fn get(&self, index: usize) -> &SubGraphDescriptor {
        &self.subgraphs[index]
    }

    pub fn len(&self) -> usize {
        self.subgraphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgraphs.is_empty()
    }

    pub fn pb_bytes(&self) -> u64 {
        self.pb_bytes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.subgraphs.iter().position(|g| g.id == id)
    }

    /// Smallest and largest member sizes.
    pub fn byte_range(&self) -> (u64, u64) {
        let it = self.subgraphs.iter().map(|g| g.weight_bytes);
        (it.clone().min().unwrap_or(0), it.max().unwrap_or(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateParams {
    /// Upper bound on |S|, the number of table columns.
    pub max_columns: usize,
    /// Lower size bound as a fraction of PB capacity.
    pub alpha: f64,
    pub seed: u64,
    /// Elastic grids larger than this are sampled down to it.
    pub grid_limit: usize,
}

impl Default for CandidateParams {
    fn default() -> Self {
        CandidateParams {
            max_columns: 100,
            alpha: 0.5,
            seed: 0,
            grid_limit: 4096,
        }
    }
}

/// Largest uniform K scaling of `shape` (floor per layer) that fits `pb`.
pub fn shrink_to_fit(net: &SuperNet, shape: &Shape, pb: u64) -> Result<Shape> {
    if net.weight_bytes(shape)? <= pb {
        return Ok(shape.clone());
    }
    let scaled = |f: f64| -> Shape {
        shape
            .iter()
            .map(|l| {
                let k = (l.k as f64 * f).floor() as u32;
                if k == 0 {
                    LayerShape::EMPTY
                } else {
                    LayerShape::new(k, l.c)
                }
            })
            .collect()
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if net.weight_bytes(&scaled(mid))? <= pb {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(scaled(lo))
}

/// Per-stage depth x per-stage uniform expand fraction.
fn grid_axes(net: &SuperNet) -> Vec<(Vec<usize>, Vec<f64>)> {
    net.stages()
        .iter()
        .enumerate()
        .map(|(si, st)| {
            let mut fracs: Vec<f64> = net
                .layers()
                .iter()
                .filter(|l| l.stage == Some(si) && l.is_elastic())
                .flat_map(|l| l.expand_choices.iter().copied())
                .collect();
            fracs.sort_by(f64::total_cmp);
            fracs.dedup();
            if fracs.is_empty() {
                fracs.push(1.0);
            }
            let mut depths = st.depth_choices.clone();
            depths.sort_unstable();
            (depths, fracs)
        })
        .collect()
}

fn grid_pick(net: &SuperNet, axes: &[(Vec<usize>, Vec<f64>)], mut index: usize) -> Pick {
    let mut depths = Vec::with_capacity(axes.len());
    let mut stage_frac = Vec::with_capacity(axes.len());
    for (ds, fs) in axes {
        depths.push(ds[index % ds.len()]);
        index /= ds.len();
        stage_frac.push(fs[index % fs.len()]);
        index /= fs.len();
    }
    let layers = net
        .layers()
        .iter()
        .filter(|l| l.is_elastic())
        .map(|l| {
            let f = match l.stage {
                Some(s) => stage_frac[s],
                None => 1.0,
            };
            // nearest allowed fraction not above f, else the smallest
            let choice = l
                .expand_choices
                .iter()
                .copied()
                .filter(|c| *c <= f + 1e-12)
                .fold(None, |best: Option<f64>, c| Some(best.map_or(c, |b| b.max(c))))
                .unwrap_or_else(|| l.expand_choices.iter().copied().fold(f64::MAX, f64::min));
            (l.name.clone(), choice)
        })
        .collect();
    Pick {
        id: String::new(),
        accuracy: 0.0,
        depths,
        expand: ExpandPick::Layered {
            default: 1.0,
            layers,
        },
    }
}

fn grid_shapes(net: &SuperNet, limit: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Shape>> {
    let axes = grid_axes(net);
    let total = axes
        .iter()
        .try_fold(1usize, |acc, (d, f)| acc.checked_mul(d.len() * f.len()))
        .unwrap_or(usize::MAX);
    let indices: Vec<usize> = if total <= limit {
        (0..total).collect()
    } else {
        let mut v = sample(rng, total, limit).into_vec();
        v.sort_unstable();
        v
    };
    indices
        .into_iter()
        .map(|i| net.resolve(&grid_pick(net, &axes, i)))
        .collect()
}

/// Greedy farthest-point order over `points`, starting at `start` and
/// measuring distance to everything in `seeds` as well. Ties go to the lower
/// index. Prefixes of the result are the selections for smaller budgets.
fn farthest_point_order(
    points: &[EncodedVector],
    seeds: &[EncodedVector],
    start: Option<usize>,
    budget: usize,
) -> Vec<usize> {
    let mut min_dist: Vec<f64> = points
        .iter()
        .map(|p| seeds.iter().map(|s| p.distance(s)).fold(f64::INFINITY, f64::min))
        .collect();
    let mut taken = vec![false; points.len()];
    let mut order = Vec::with_capacity(budget.min(points.len()));
    let mut next = start;
    while order.len() < budget.min(points.len()) {
        let pick = match next.take() {
            Some(i) => i,
            None => {
                let mut best: Option<usize> = None;
                for i in 0..points.len() {
                    if taken[i] {
                        continue;
                    }
                    if best.is_none_or(|b| min_dist[i] > min_dist[b]) {
                        best = Some(i);
                    }
                }
                best.expect("untaken point exists")
            }
        };
        taken[pick] = true;
        order.push(pick);
        for i in 0..points.len() {
            if !taken[i] {
                let d = points[i].distance(&points[pick]);
                if d < min_dist[i] {
                    min_dist[i] = d;
                }
            }
        }
    }
    order
}

/// Builds the candidate set S for a persistent buffer of `hw.pb_bytes`.
///
/// Pool, in priority order: the common core of all serving subnets and every
/// serving subnet that fits (these are exempt from the `alpha` lower bound),
/// then shrunk versions of oversized ones, pairwise intersections and the
/// elastic grid. Oversized members are shrunk by uniform K scaling; all
/// non-priority members must land in `[alpha * PB, PB]`. Priority members are
/// taken first, the rest by farthest-point sampling on encoded vectors.
pub fn build_candidate_set(
    net: &SuperNet,
    subnets: &[SubNetDescriptor],
    hw: &HardwareConfig,
    params: &CandidateParams,
) -> Result<CandidateSet> {
    let pb = hw.pb_bytes;
    if pb == 0 {
        return Err(Error::config(
            "persistent buffer capacity is 0; no subgraph can be cached (use a larger PB)",
        ));
    }
    if params.max_columns == 0 {
        return Err(Error::config("max_columns must be >= 1"));
    }
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(Error::config(format!("alpha {} outside (0, 1]", params.alpha)));
    }
    if subnets.is_empty() {
        return Err(Error::config("no serving subnets"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let floor = (params.alpha * pb as f64).ceil() as u64;

    let mut seen: HashSet<Shape> = HashSet::new();
    let mut priority: Vec<SubGraphDescriptor> = Vec::new();
    let mut rest: Vec<SubGraphDescriptor> = Vec::new();

    let core = common_core(subnets.iter().map(|s| &s.shape))?.expect("non-empty subnets");
    let mut offer = |id: String, shape: Shape, prio: bool| -> Result<()> {
        let bytes = net.weight_bytes(&shape)?;
        if shape.is_zero() || bytes > pb || seen.contains(&shape) {
            return Ok(());
        }
        if prio {
            seen.insert(shape.clone());
            priority.push(SubGraphDescriptor::new(net, id, shape)?);
        } else if bytes >= floor {
            seen.insert(shape.clone());
            rest.push(SubGraphDescriptor::new(net, id, shape)?);
        }
        Ok(())
    };

    offer("core".into(), core.clone(), true)?;
    for s in subnets {
        offer(s.id.clone(), s.shape.clone(), true)?;
    }
    offer("core~".into(), shrink_to_fit(net, &core, pb)?, false)?;
    for s in subnets {
        offer(format!("{}~", s.id), shrink_to_fit(net, &s.shape, pb)?, false)?;
    }
    for (i, a) in subnets.iter().enumerate() {
        for b in &subnets[i + 1..] {
            let x = a.shape.intersect(&b.shape)?;
            let id = format!("{}^{}", a.id, b.id);
            let fitted = shrink_to_fit(net, &x, pb)?;
            let id = if fitted == x { id } else { id + "~" };
            offer(id, fitted, false)?;
        }
    }
    for (i, g) in grid_shapes(net, params.grid_limit, &mut rng)?.into_iter().enumerate() {
        let fitted = shrink_to_fit(net, &g, pb)?;
        let id = if fitted == g {
            format!("grid{i}")
        } else {
            format!("grid{i}~")
        };
        offer(id, fitted, false)?;
    }

    priority.truncate(params.max_columns);
    let budget = params.max_columns - priority.len();
    let mut chosen = priority;
    if budget > 0 && !rest.is_empty() {
        let points: Vec<EncodedVector> = rest.iter().map(|g| g.shape.encode()).collect();
        let seeds: Vec<EncodedVector> = chosen.iter().map(|g| g.shape.encode()).collect();
        let start = if !seeds.is_empty() {
            None
        } else if rest[0].id == "core~" {
            Some(0)
        } else {
            Some(rng.gen_range(0..rest.len()))
        };
        let order = farthest_point_order(&points, &seeds, start, budget);
        chosen.extend(order.into_iter().map(|i| rest[i].clone()));
    }
    if chosen.is_empty() {
        return Err(Error::config(format!(
            "no subgraph fits a {pb}-byte persistent buffer within alpha = {}; use a larger PB",
            params.alpha
        )));
    }
    CandidateSet::new(chosen, pb)
}
