use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Active kernels and channels of one layer.
///
/// `(0, 0)` marks a depth-pruned layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct LayerShape {
    pub k: u32,
    pub c: u32,
}

impl LayerShape {
    pub const EMPTY: LayerShape = LayerShape { k: 0, c: 0 };

    pub fn new(k: u32, c: u32) -> Self {
        LayerShape { k, c }
    }

    pub fn is_active(self) -> bool {
        self.k > 0 && self.c > 0
    }

    /// Element-wise minimum: the weights two top-k selections share.
    pub fn meet(self, other: LayerShape) -> LayerShape {
        LayerShape::new(self.k.min(other.k), self.c.min(other.c))
    }

    /// Element-wise maximum.
    pub fn join(self, other: LayerShape) -> LayerShape {
        LayerShape::new(self.k.max(other.k), self.c.max(other.c))
    }

    pub fn le(self, other: LayerShape) -> bool {
        self.k <= other.k && self.c <= other.c
    }
}

impl From<(u32, u32)> for LayerShape {
    fn from((k, c): (u32, u32)) -> Self {
        LayerShape { k, c }
    }
}

impl From<LayerShape> for (u32, u32) {
    fn from(s: LayerShape) -> Self {
        (s.k, s.c)
    }
}

/// Per-layer `(K, C)` pairs of a SubNet or SubGraph, in layer order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape(Vec<LayerShape>);

impl Shape {
    pub fn new(layers: Vec<LayerShape>) -> Self {
        Shape(layers)
    }

    pub fn empty(layer_count: usize) -> Self {
        Shape(vec![LayerShape::EMPTY; layer_count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = LayerShape> + '_ {
        self.0.iter().copied()
    }

    /// True when no layer holds any weight.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|l| !l.is_active())
    }

    fn check_len(&self, other: &Shape) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LayerCount {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    /// Shared weights of two shapes under top-k sharing.
    pub fn intersect(&self, other: &Shape) -> Result<Shape> {
        self.check_len(other)?;
        Ok(Shape(
            self.0.iter().zip(&other.0).map(|(a, b)| a.meet(*b)).collect(),
        ))
    }

    /// Smallest shape containing both.
    pub fn union(&self, other: &Shape) -> Result<Shape> {
        self.check_len(other)?;
        Ok(Shape(
            self.0.iter().zip(&other.0).map(|(a, b)| a.join(*b)).collect(),
        ))
    }

    /// Element-wise `self <= other`, i.e. `self` is contained in `other`.
    pub fn contained_in(&self, other: &Shape) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.le(*b))
    }

    pub fn encode(&self) -> EncodedVector {
        let mut values = Vec::with_capacity(2 * self.len());
        for l in &self.0 {
            values.push(l.k as f64);
            values.push(l.c as f64);
        }
        EncodedVector(values)
    }
}

impl FromIterator<LayerShape> for Shape {
    fn from_iter<T: IntoIterator<Item = LayerShape>>(iter: T) -> Self {
        Shape(iter.into_iter().collect())
    }
}

/// `[K1, C1, K2, C2, .., KN, CN]` for an N-layer network.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EncodedVector(Vec<f64>);

impl EncodedVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Encoding(format!(
                "entries must be finite and non-negative, found {bad}"
            )));
        }
        Ok(EncodedVector(values))
    }

    pub fn zeros(len: usize) -> Self {
        EncodedVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance. Panics on length mismatch.
    pub fn distance(&self, other: &EncodedVector) -> f64 {
        assert_eq!(self.len(), other.len(), "encoded vector length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn elementwise_min(&self, other: &EncodedVector) -> Result<EncodedVector> {
        if self.len() != other.len() {
            return Err(Error::Encoding(format!(
                "length {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(EncodedVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a.min(*b)).collect(),
        ))
    }

    /// Integer decode back to a shape. Fails on odd length or fractional
    /// entries (running averages are not shapes).
    pub fn decode(&self) -> Result<Shape> {
        if !self.0.len().is_multiple_of(2) {
            return Err(Error::Encoding(format!("odd length {}", self.0.len())));
        }
        let to_count = |v: f64| -> Result<u32> {
            if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                return Err(Error::Encoding(format!("{v} is not a count")));
            }
            Ok(v as u32)
        };
        let layers = self
            .0
            .chunks_exact(2)
            .map(|kc| Ok(LayerShape::new(to_count(kc[0])?, to_count(kc[1])?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Shape(layers))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(pairs: &[(u32, u32)]) -> Shape {
        pairs.iter().map(|&p| LayerShape::from(p)).collect()
    }

    #[test]
    fn encodes_in_layer_order() {
        let s = shape(&[(4, 3), (8, 4), (16, 8)]);
        assert_eq!(
            s.encode().as_slice(),
            &[4.0, 3.0, 8.0, 4.0, 16.0, 8.0]
        );
    }

    #[test]
    fn all_zero_shape_encodes_to_zero_vector() {
        let s = Shape::empty(5);
        let v = s.encode();
        assert_eq!(v.len(), 10);
        assert!(v.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn intersect_is_elementwise_min() {
        let a = shape(&[(8, 4), (8, 4)]);
        let b = shape(&[(4, 8), (4, 8)]);
        assert_eq!(a.intersect(&b).unwrap(), shape(&[(4, 4), (4, 4)]));
        assert_eq!(a.intersect(&a).unwrap(), a);
    }

    #[test]
    fn intersect_rejects_layer_count_mismatch() {
        let a = shape(&[(8, 4)]);
        let b = shape(&[(4, 8), (4, 8)]);
        assert!(matches!(
            a.intersect(&b),
            Err(Error::LayerCount { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn decode_rejects_fractional_entries() {
        let v = EncodedVector::new(vec![1.5, 2.0]).unwrap();
        assert!(v.decode().is_err());
        assert!(EncodedVector::new(vec![-1.0]).is_err());
    }

    #[test]
    fn layer_shape_serializes_as_pair() {
        let s = shape(&[(4, 3), (0, 0)]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[4,3],[0,0]]");
        let back: Shape = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
