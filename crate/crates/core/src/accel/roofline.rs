use std::io::Write;

use super::{arithmetic_intensity, layer_latency, AccelModel};
use crate::supernet::Descriptor;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Memory,
    Compute,
}

impl Bound {
    fn of(memory_bound: bool) -> Self {
        if memory_bound {
            Bound::Memory
        } else {
            Bound::Compute
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bound::Memory => "memory",
            Bound::Compute => "compute",
        }
    }
}

/// One active layer measured with an empty and with the given cache.
#[derive(Debug, Clone, PartialEq)]
pub struct RooflineRow {
    pub layer: String,
    pub flops: u64,
    pub ai_without: f64,
    pub ai_with: f64,
    pub bound_without: Bound,
    pub bound_with: Bound,
    pub latency_without: f64,
    pub latency_with: f64,
}

impl RooflineRow {
    /// Memory-bound without the cache, compute-bound with it.
    pub fn flipped(&self) -> bool {
        self.bound_without == Bound::Memory && self.bound_with == Bound::Compute
    }
}

pub const ROOFLINE_HEADER: [&str; 8] = [
    "layer",
    "flops",
    "ai_without",
    "ai_with",
    "bound_without",
    "bound_with",
    "latency_without_s",
    "latency_with_s",
];

pub fn roofline_rows(
    model: &AccelModel<'_>,
    subnet: &impl Descriptor,
    cached: &impl Descriptor,
) -> Result<Vec<RooflineRow>> {
    // capacity check only; layer costs are recomputed below
    model.subnet_cost(subnet, cached)?;
    let mut rows = Vec::new();
    for ((layer, s), g) in model
        .net()
        .layers()
        .iter()
        .zip(subnet.shape().iter())
        .zip(cached.shape().iter())
    {
        if !s.is_active() {
            continue;
        }
        let cold = layer_latency(layer, s, crate::supernet::LayerShape::EMPTY, model.hw())?;
        let warm = layer_latency(layer, s, s.meet(g), model.hw())?;
        rows.push(RooflineRow {
            layer: layer.name.clone(),
            flops: cold.flops,
            ai_without: arithmetic_intensity(&cold),
            ai_with: arithmetic_intensity(&warm),
            bound_without: Bound::of(cold.memory_bound),
            bound_with: Bound::of(warm.memory_bound),
            latency_without: cold.latency,
            latency_with: warm.latency,
        });
    }
    Ok(rows)
}

pub fn write_roofline_csv<W: Write>(rows: &[RooflineRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROOFLINE_HEADER)?;
    for r in rows {
        w.write_record([
            r.layer.clone(),
            r.flops.to_string(),
            r.ai_without.to_string(),
            r.ai_with.to_string(),
            r.bound_without.as_str().to_string(),
            r.bound_with.as_str().to_string(),
            r.latency_without.to_string(),
            r.latency_with.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
