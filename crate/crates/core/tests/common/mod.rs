#![allow(dead_code)]

use proptest::prelude::*;
use sgs::supernet::{LayerShape, Shape, SuperNet};

/// Shapes within `net`'s bounds, each layer independently scaled.
pub fn shape_in(net: &SuperNet) -> impl Strategy<Value = Shape> {
    let maxes: Vec<(u32, u32)> = net.layers().iter().map(|l| (l.k, l.c)).collect();
    prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), maxes.len()).prop_map(move |fs| {
        fs.iter()
            .zip(&maxes)
            .map(|((fk, fc), (k, c))| {
                let k = (fk * *k as f64).floor() as u32;
                let c = (fc * *c as f64).ceil() as u32;
                if k == 0 || c == 0 {
                    LayerShape::EMPTY
                } else {
                    LayerShape::new(k, c)
                }
            })
            .collect()
    })
}

/// A shape and one contained in it.
pub fn nested_in(net: &SuperNet) -> impl Strategy<Value = (Shape, Shape)> {
    let n = net.layer_count();
    (shape_in(net), prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), n)).prop_map(|(big, fs)| {
        let small = big
            .iter()
            .zip(&fs)
            .map(|(l, (fk, fc))| {
                let k = (fk * l.k as f64).floor() as u32;
                let c = (fc * l.c as f64).floor() as u32;
                if k == 0 || c == 0 {
                    LayerShape::EMPTY
                } else {
                    LayerShape::new(k, c)
                }
            })
            .collect();
        (big, small)
    })
}
