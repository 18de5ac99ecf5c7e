use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::shape::{LayerShape, Shape};
use crate::{Error, Result};

fn one() -> u32 {
    1
}

fn full_width() -> Vec<f64> {
    vec![1.0]
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

fn is_full_width(v: &[f64]) -> bool {
    v == [1.0]
}

/// Maximal geometry of one convolution layer plus its elastic metadata.
///
/// Fully connected layers are 1x1 convolutions with `xo = yo = 1`. Depthwise
/// layers are encoded with `c = 1` and `k` equal to the channel count; their
/// input activation volume is taken from `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub k: u32,
    pub c: u32,
    pub r: u32,
    pub s: u32,
    pub xo: u32,
    pub yo: u32,
    /// Input spatial size is `xo * stride` by `yo * stride`.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub stride: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub depthwise: bool,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight_bytes: u32,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub activation_bytes: u32,
    /// Stage index for depth-elastic layers; `None` for fixed layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    /// Block index within the stage. Active iff `block < depth[stage]`.
    #[serde(default)]
    pub block: usize,
    /// Allowed fractions of `k` under the expand-ratio dimension.
    #[serde(default = "full_width", skip_serializing_if = "is_full_width")]
    pub expand_choices: Vec<f64>,
    /// Take the active K of the named earlier layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_tie: Option<String>,
    /// Take the active C from the active K of the named earlier layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_tie: Option<String>,
}

impl LayerSpec {
    /// Convenience constructor for a fixed layer with unit element widths.
    pub fn conv(name: &str, k: u32, c: u32, r: u32, s: u32, xo: u32, yo: u32) -> Self {
        LayerSpec {
            name: name.to_string(),
            k,
            c,
            r,
            s,
            xo,
            yo,
            stride: 1,
            depthwise: false,
            weight_bytes: 1,
            activation_bytes: 1,
            stage: None,
            block: 0,
            expand_choices: full_width(),
            k_tie: None,
            c_tie: None,
        }
    }

    pub fn max_shape(&self) -> LayerShape {
        LayerShape::new(self.k, self.c)
    }

    pub fn is_elastic(&self) -> bool {
        self.expand_choices.len() > 1
    }

    /// Weight bytes of a `(k, c)` slice of this layer.
    pub fn weight_bytes_of(&self, shape: LayerShape) -> u64 {
        shape.k as u64 * shape.c as u64 * self.r as u64 * self.s as u64 * self.weight_bytes as u64
    }

    pub fn check_bounds(&self, index: usize, shape: LayerShape) -> Result<()> {
        if shape.le(self.max_shape()) {
            Ok(())
        } else {
            Err(Error::LayerBounds {
                layer: index,
                name: self.name.clone(),
                msg: format!(
                    "shape ({}, {}) exceeds maximal ({}, {})",
                    shape.k, shape.c, self.k, self.c
                ),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub name: String,
    /// Allowed active block counts.
    pub depth_choices: Vec<usize>,
}

/// JSON form of a weight-shared SuperNet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperNetSpec {
    pub name: String,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
    pub layers: Vec<LayerSpec>,
}

/// Expand-ratio part of a pick: one fraction for every elastic layer, with
/// optional per-layer overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpandPick {
    Uniform(f64),
    Layered {
        default: f64,
        #[serde(default)]
        layers: BTreeMap<String, f64>,
    },
}

/// One point of the elastic grid plus caller-supplied accuracy metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub id: String,
    pub accuracy: f64,
    pub depths: Vec<usize>,
    pub expand: ExpandPick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicksFile {
    pub supernet: String,
    pub picks: Vec<Pick>,
}

/// A validated SuperNet with resolved layer ties.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperNet {
    spec: SuperNetSpec,
    k_ties: Vec<Option<usize>>,
    c_ties: Vec<Option<usize>>,
}

const FRACTION_EPS: f64 = 1e-9;

fn contains_fraction(choices: &[f64], f: f64) -> bool {
    choices.iter().any(|c| (c - f).abs() <= FRACTION_EPS)
}

impl SuperNet {
    pub fn new(spec: SuperNetSpec) -> Result<Self> {
        let err = |msg: String| Err(Error::Spec(msg));
        if spec.layers.is_empty() {
            return err("no layers".into());
        }
        for st in &spec.stages {
            if st.depth_choices.is_empty() {
                return err(format!("stage `{}` has no depth choices", st.name));
            }
        }
        let mut by_name = HashMap::new();
        for (i, l) in spec.layers.iter().enumerate() {
            if by_name.insert(l.name.as_str(), i).is_some() {
                return err(format!("duplicate layer name `{}`", l.name));
            }
            let dims = [l.k, l.c, l.r, l.s, l.xo, l.yo, l.stride, l.weight_bytes, l.activation_bytes];
            if dims.contains(&0) {
                return err(format!("layer `{}`: all dimensions must be >= 1", l.name));
            }
            if l.depthwise && l.c != 1 {
                return err(format!("depthwise layer `{}` must have c = 1", l.name));
            }
            if l.expand_choices.is_empty()
                || l.expand_choices.iter().any(|f| !(*f > 0.0 && *f <= 1.0))
            {
                return err(format!(
                    "layer `{}`: expand choices must lie in (0, 1]",
                    l.name
                ));
            }
            if let Some(s) = l.stage {
                let Some(stage) = spec.stages.get(s) else {
                    return err(format!("layer `{}` references missing stage {s}", l.name));
                };
                let max_depth = *stage.depth_choices.iter().max().unwrap();
                if l.block >= max_depth {
                    return err(format!(
                        "layer `{}`: block {} is never active (max depth {max_depth})",
                        l.name, l.block
                    ));
                }
            }
        }
        let resolve_tie = |i: usize, tie: &Option<String>, want: u32, what: &str| -> Result<Option<usize>> {
            let Some(target) = tie else { return Ok(None) };
            let l = &spec.layers[i];
            let j = *by_name.get(target.as_str()).ok_or_else(|| {
                Error::Spec(format!("layer `{}`: {what} tie to unknown layer `{target}`", l.name))
            })?;
            let t = &spec.layers[j];
            if j >= i {
                return Err(Error::Spec(format!(
                    "layer `{}`: {what} tie must reference an earlier layer",
                    l.name
                )));
            }
            if t.stage != l.stage || t.block != l.block {
                return Err(Error::Spec(format!(
                    "layer `{}`: {what} tie must stay within its block",
                    l.name
                )));
            }
            if t.k != want {
                return Err(Error::Spec(format!(
                    "layer `{}`: {what} tie target `{}` has k = {}, expected {want}",
                    l.name, t.name, t.k
                )));
            }
            Ok(Some(j))
        };
        let mut k_ties = Vec::with_capacity(spec.layers.len());
        let mut c_ties = Vec::with_capacity(spec.layers.len());
        for (i, l) in spec.layers.iter().enumerate() {
            k_ties.push(resolve_tie(i, &l.k_tie, l.k, "k")?);
            if l.depthwise && l.c_tie.is_some() {
                return err(format!("depthwise layer `{}` cannot tie c", l.name));
            }
            c_ties.push(resolve_tie(i, &l.c_tie, l.c, "c")?);
        }
        Ok(SuperNet {
            spec,
            k_ties,
            c_ties,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        SuperNet::new(serde_json::from_str(json)?)
    }

    pub fn spec(&self) -> &SuperNetSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.spec.layers
    }

    pub fn layer_count(&self) -> usize {
        self.spec.layers.len()
    }

    pub fn stages(&self) -> &[StageSpec] {
        &self.spec.stages
    }

    /// Checks length and per-layer bounds.
    pub fn check_shape(&self, shape: &Shape) -> Result<()> {
        if shape.len() != self.layer_count() {
            return Err(Error::LayerCount {
                expected: self.layer_count(),
                got: shape.len(),
            });
        }
        for (i, (l, s)) in self.layers().iter().zip(shape.iter()).enumerate() {
            l.check_bounds(i, s)?;
        }
        Ok(())
    }

    /// Weight bytes of any shape (no bounds check beyond length).
    pub fn weight_bytes(&self, shape: &Shape) -> Result<u64> {
        if shape.len() != self.layer_count() {
            return Err(Error::LayerCount {
                expected: self.layer_count(),
                got: shape.len(),
            });
        }
        Ok(self
            .layers()
            .iter()
            .zip(shape.iter())
            .map(|(l, s)| l.weight_bytes_of(s))
            .sum())
    }

    /// Bytes of weights `a` and `b` share.
    pub fn overlap_bytes(&self, a: &Shape, b: &Shape) -> Result<u64> {
        self.weight_bytes(&a.intersect(b)?)
    }

    /// The full SuperNet shape.
    pub fn max_shape(&self) -> Shape {
        self.layers().iter().map(LayerSpec::max_shape).collect()
    }

    pub fn max_pick(&self) -> Pick {
        self.extreme_pick("max", true)
    }

    pub fn min_pick(&self) -> Pick {
        self.extreme_pick("min", false)
    }

    fn extreme_pick(&self, id: &str, largest: bool) -> Pick {
        let pickf = |v: &[f64]| -> f64 {
            let it = v.iter().copied();
            if largest {
                it.fold(f64::MIN, f64::max)
            } else {
                it.fold(f64::MAX, f64::min)
            }
        };
        let depths = self
            .stages()
            .iter()
            .map(|s| {
                if largest {
                    *s.depth_choices.iter().max().unwrap()
                } else {
                    *s.depth_choices.iter().min().unwrap()
                }
            })
            .collect();
        let layers = self
            .layers()
            .iter()
            .filter(|l| l.is_elastic())
            .map(|l| (l.name.clone(), pickf(&l.expand_choices)))
            .collect();
        Pick {
            id: id.to_string(),
            accuracy: 0.0,
            depths,
            expand: ExpandPick::Layered {
                default: if largest { 1.0 } else { 0.0 },
                layers,
            },
        }
    }

    /// Materializes the shape selected by a pick.
    pub fn resolve(&self, pick: &Pick) -> Result<Shape> {
        let fail = |msg: String| Error::Pick {
            pick: pick.id.clone(),
            msg,
        };
        if pick.depths.len() != self.stages().len() {
            return Err(fail(format!(
                "{} depths given, supernet has {} stages",
                pick.depths.len(),
                self.stages().len()
            )));
        }
        for (d, st) in pick.depths.iter().zip(self.stages()) {
            if !st.depth_choices.contains(d) {
                return Err(fail(format!(
                    "stage `{}`: depth {d} not in {:?}",
                    st.name, st.depth_choices
                )));
            }
        }
        let (default, overrides) = match &pick.expand {
            ExpandPick::Uniform(f) => (*f, None),
            ExpandPick::Layered { default, layers } => (*default, Some(layers)),
        };
        if let Some(ov) = overrides {
            for name in ov.keys() {
                if !self.layers().iter().any(|l| &l.name == name) {
                    return Err(fail(format!("override for unknown layer `{name}`")));
                }
            }
        }

        let mut out: Vec<LayerShape> = Vec::with_capacity(self.layer_count());
        for (i, l) in self.layers().iter().enumerate() {
            if let Some(s) = l.stage {
                if l.block >= pick.depths[s] {
                    out.push(LayerShape::EMPTY);
                    continue;
                }
            }
            let explicit = overrides.and_then(|ov| ov.get(&l.name)).copied();
            let frac = match explicit {
                Some(f) => f,
                None if l.is_elastic() => default,
                None => l.expand_choices[0],
            };
            if !contains_fraction(&l.expand_choices, frac) {
                return Err(fail(format!(
                    "layer `{}`: expand {frac} not in {:?}",
                    l.name, l.expand_choices
                )));
            }
            let k = match self.k_ties[i] {
                Some(j) => out[j].k,
                None => ((frac * l.k as f64).round() as u32).clamp(1, l.k),
            };
            let c = if l.depthwise {
                1
            } else {
                match self.c_ties[i] {
                    Some(j) => out[j].k,
                    None => l.c,
                }
            };
            out.push(LayerShape::new(k, c));
        }
        Ok(Shape::new(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SuperNet {
        let mut layers = vec![LayerSpec::conv("stem", 8, 3, 3, 3, 8, 8)];
        for b in 0..2 {
            let mut a = LayerSpec::conv(&format!("b{b}a"), 16, 8, 1, 1, 8, 8);
            a.stage = Some(0);
            a.block = b;
            a.expand_choices = vec![0.5, 1.0];
            let mut p = LayerSpec::conv(&format!("b{b}p"), 8, 16, 1, 1, 8, 8);
            p.stage = Some(0);
            p.block = b;
            p.c_tie = Some(format!("b{b}a"));
            layers.push(a);
            layers.push(p);
        }
        SuperNet::new(SuperNetSpec {
            name: "toy".into(),
            stages: vec![StageSpec {
                name: "s0".into(),
                depth_choices: vec![1, 2],
            }],
            layers,
        })
        .unwrap()
    }

    #[test]
    fn max_pick_resolves_to_max_shape() {
        let net = toy();
        assert_eq!(net.resolve(&net.max_pick()).unwrap(), net.max_shape());
    }

    #[test]
    fn min_pick_prunes_and_shrinks() {
        let net = toy();
        let s = net.resolve(&net.min_pick()).unwrap();
        let pairs: Vec<(u32, u32)> = s.iter().map(Into::into).collect();
        assert_eq!(pairs, vec![(8, 3), (8, 8), (8, 8), (0, 0), (0, 0)]);
    }

    #[test]
    fn rejects_depth_outside_choices() {
        let net = toy();
        let mut p = net.max_pick();
        p.depths = vec![3];
        let e = net.resolve(&p).unwrap_err().to_string();
        assert!(e.contains("stage `s0`"), "{e}");
    }

    #[test]
    fn rejects_expand_outside_choices() {
        let net = toy();
        let p = Pick {
            id: "x".into(),
            accuracy: 0.5,
            depths: vec![2],
            expand: ExpandPick::Uniform(0.75),
        };
        let e = net.resolve(&p).unwrap_err().to_string();
        assert!(e.contains("layer `b0a`"), "{e}");
    }

    #[test]
    fn rejects_forward_ties() {
        let mut spec = toy().spec().clone();
        spec.layers[1].k_tie = Some("b0p".into());
        assert!(SuperNet::new(spec).is_err());
    }

    #[test]
    fn expand_pick_accepts_number_or_object() {
        let a: ExpandPick = serde_json::from_str("0.5").unwrap();
        assert_eq!(a, ExpandPick::Uniform(0.5));
        let b: ExpandPick = serde_json::from_str(r#"{"default": 1.0, "layers": {"b0a": 0.5}}"#).unwrap();
        assert!(matches!(b, ExpandPick::Layered { .. }));
    }
}
