//! SuperNets, SubNets and SubGraphs.
//!
//! Weight sharing is positional: the first `min(K)` kernels and `min(C)`
//! channels of a layer are the same weights in every network that activates
//! them. Depth pruning keeps the layer slot with `(0, 0)` so every shape and
//! encoded vector of a SuperNet has the same length.

mod shape;
mod spec;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use shape::{EncodedVector, LayerShape, Shape};
pub use spec::{ExpandPick, LayerSpec, Pick, PicksFile, StageSpec, SuperNet, SuperNetSpec};

use crate::{Error, Result};

/// A servable network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubNetDescriptor {
    pub id: String,
    pub accuracy: f64,
    pub weight_bytes: u64,
    pub shape: Shape,
}

/// A cacheable subset of SuperNet weights. Not necessarily servable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubGraphDescriptor {
    pub id: String,
    pub weight_bytes: u64,
    pub shape: Shape,
}

/// Anything with a shape: both descriptor kinds encode the same way.
pub trait Descriptor {
    fn id(&self) -> &str;
    fn shape(&self) -> &Shape;
    fn weight_bytes(&self) -> u64;
}

impl Descriptor for SubNetDescriptor {
    fn id(&self) -> &str {
        &self.id
    }
    fn shape(&self) -> &Shape {
        &self.shape
    }
    fn weight_bytes(&self) -> u64 {
        self.weight_bytes
    }
}

impl Descriptor for SubGraphDescriptor {
    fn id(&self) -> &str {
        &self.id
    }
    fn shape(&self) -> &Shape {
        &self.shape
    }
    fn weight_bytes(&self) -> u64 {
        self.weight_bytes
    }
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == ',') {
        return Err(Error::config(format!(
            "id `{id}` must be non-empty without whitespace or commas"
        )));
    }
    Ok(())
}

impl SubNetDescriptor {
    pub fn new(net: &SuperNet, id: impl Into<String>, shape: Shape, accuracy: f64) -> Result<Self> {
        let id = id.into();
        check_id(&id)?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::config(format!(
                "subnet `{id}`: accuracy {accuracy} outside [0, 1]"
            )));
        }
        net.check_shape(&shape)?;
        Ok(SubNetDescriptor {
            weight_bytes: net.weight_bytes(&shape)?,
            id,
            accuracy,
            shape,
        })
    }

    pub fn as_subgraph(&self) -> SubGraphDescriptor {
        SubGraphDescriptor {
            id: self.id.clone(),
            weight_bytes: self.weight_bytes,
            shape: self.shape.clone(),
        }
    }
}

impl SubGraphDescriptor {
    pub fn new(net: &SuperNet, id: impl Into<String>, shape: Shape) -> Result<Self> {
        let id = id.into();
        check_id(&id)?;
        net.check_shape(&shape)?;
        Ok(SubGraphDescriptor {
            weight_bytes: net.weight_bytes(&shape)?,
            id,
            shape,
        })
    }

    /// The empty subgraph: nothing cached.
    pub fn empty(net: &SuperNet) -> Self {
        SubGraphDescriptor {
            id: "none".to_string(),
            weight_bytes: 0,
            shape: Shape::empty(net.layer_count()),
        }
    }
}

/// Encodes a descriptor of `net` as `[K1, C1, .., KN, CN]`.
pub fn encode(net: &SuperNet, d: &impl Descriptor) -> Result<EncodedVector> {
    if d.shape().len() != net.layer_count() {
        return Err(Error::LayerCount {
            expected: net.layer_count(),
            got: d.shape().len(),
        });
    }
    Ok(d.shape().encode())
}

/// Shared weights of two shapes as an (unnamed) subgraph.
pub fn intersect(net: &SuperNet, a: &Shape, b: &Shape) -> Result<SubGraphDescriptor> {
    let shape = a.intersect(b)?;
    SubGraphDescriptor::new(net, "intersection", shape)
}

/// Reusable weight volume of `subgraph` when serving `subnet`.
pub fn overlap_bytes(net: &SuperNet, subnet: &impl Descriptor, subgraph: &impl Descriptor) -> Result<u64> {
    net.overlap_bytes(subnet.shape(), subgraph.shape())
}

/// Materializes picks in the order given.
pub fn enumerate_subnets(net: &SuperNet, picks: &[Pick]) -> Result<Vec<SubNetDescriptor>> {
    picks
        .iter()
        .map(|p| {
            let shape = net.resolve(p)?;
            SubNetDescriptor::new(net, p.id.clone(), shape, p.accuracy)
        })
        .collect()
}

/// Weights shared by every shape in `shapes`.
pub fn common_core<'a>(shapes: impl IntoIterator<Item = &'a Shape>) -> Result<Option<Shape>> {
    let mut it = shapes.into_iter();
    let Some(first) = it.next() else { return Ok(None) };
    it.try_fold(first.clone(), |acc, s| acc.intersect(s)).map(Some)
}

/// `subnets.json` written by `sgsim gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubNetFile {
    pub supernet: String,
    pub layer_count: usize,
    pub subnets: Vec<SubNetDescriptor>,
}

/// `subgraphs.json` / `candidates.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubGraphFile {
    pub supernet: String,
    pub layer_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pb_bytes: Option<u64>,
    pub subgraphs: Vec<SubGraphDescriptor>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path, format!("cannot read: {e}")))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            path,
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_supernet(path: &Path) -> Result<SuperNet> {
    SuperNet::new(read_json(path)?).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn load_picks(path: &Path) -> Result<PicksFile> {
    read_json(path)
}

/// Loads subnets and re-derives their byte sizes against `net`.
pub fn load_subnets(net: &SuperNet, path: &Path) -> Result<Vec<SubNetDescriptor>> {
    let file: SubNetFile = read_json(path)?;
    if file.layer_count != net.layer_count() {
        return Err(Error::parse(path, format!(
            "layer_count {} does not match supernet `{}` ({})",
            file.layer_count,
            net.name(),
            net.layer_count()
        )));
    }
    file.subnets
        .into_iter()
        .map(|d| {
            let id = d.id.clone();
            let fresh = SubNetDescriptor::new(net, d.id, d.shape, d.accuracy)
                .map_err(|e| Error::parse(path, format!("subnet `{id}`: {e}")))?;
            if fresh.weight_bytes != d.weight_bytes {
                return Err(Error::parse(path, format!(
                    "subnet `{id}`: weight_bytes {} but shape gives {}",
                    d.weight_bytes, fresh.weight_bytes
                )));
            }
            Ok(fresh)
        })
        .collect()
}

pub fn load_subgraphs(net: &SuperNet, path: &Path) -> Result<(Vec<SubGraphDescriptor>, Option<u64>)> {
    let file: SubGraphFile = read_json(path)?;
    if file.layer_count != net.layer_count() {
        return Err(Error::parse(path, format!(
            "layer_count {} does not match supernet `{}` ({})",
            file.layer_count,
            net.name(),
            net.layer_count()
        )));
    }
    let graphs = file
        .subgraphs
        .into_iter()
        .map(|d| {
            let id = d.id.clone();
            SubGraphDescriptor::new(net, d.id, d.shape)
                .map_err(|e| Error::parse(path, format!("subgraph `{id}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((graphs, file.pb_bytes))
}

pub fn save_subnets(net: &SuperNet, subnets: &[SubNetDescriptor], path: &Path) -> Result<()> {
    write_json(path, &SubNetFile {
        supernet: net.name().to_string(),
        layer_count: net.layer_count(),
        subnets: subnets.to_vec(),
    })
}

pub fn save_subgraphs(
    net: &SuperNet,
    subgraphs: &[SubGraphDescriptor],
    pb_bytes: Option<u64>,
    path: &Path,
) -> Result<()> {
    write_json(path, &SubGraphFile {
        supernet: net.name().to_string(),
        layer_count: net.layer_count(),
        pb_bytes,
        subgraphs: subgraphs.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn encode_checks_layer_count() {
        let net = fixtures::resnet50_like();
        let sg = SubGraphDescriptor {
            id: "bad".into(),
            weight_bytes: 0,
            shape: Shape::empty(3),
        };
        assert!(matches!(
            encode(&net, &sg),
            Err(Error::LayerCount { got: 3, .. })
        ));
    }

    #[test]
    fn overlap_of_self_is_own_bytes_and_empty_is_zero() {
        let net = fixtures::resnet50_like();
        let subnets = fixtures::resnet50_subnets();
        let sn = &subnets[2];
        assert_eq!(overlap_bytes(&net, sn, &sn.as_subgraph()).unwrap(), sn.weight_bytes);
        assert_eq!(overlap_bytes(&net, sn, &SubGraphDescriptor::empty(&net)).unwrap(), 0);
    }

    #[test]
    fn max_and_min_picks() {
        let net = fixtures::mobv3_like();
        let max = enumerate_subnets(&net, &[net.max_pick()]).unwrap();
        assert_eq!(max[0].shape, net.max_shape());
        let min = net.resolve(&net.min_pick()).unwrap();
        for s in fixtures::mobv3_subnets() {
            assert!(min.contained_in(&s.shape), "{}", s.id);
        }
    }

    #[test]
    fn rejects_bad_accuracy_and_ids() {
        let net = fixtures::mobv3_like();
        let shape = net.max_shape();
        assert!(SubNetDescriptor::new(&net, "a", shape.clone(), 1.5).is_err());
        assert!(SubNetDescriptor::new(&net, "has space", shape, 0.5).is_err());
    }
}
