//! Analytic accelerator model.
//!
//! Per layer, compute time is `flops / P` and memory time is off-chip bytes
//! over `BW`. Ping-pong dynamic buffers overlap weight fetch with compute, so
//! layer latency is the larger of the two. Weights resident in the persistent
//! buffer never leave the chip; activations always do.
//!
//! The model targets latency trends rather than absolute board latency: it has
//! no tiling re-fetch or pipeline-fill terms.

mod roofline;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use roofline::{roofline_rows, write_roofline_csv, Bound, RooflineRow, ROOFLINE_HEADER};

use crate::supernet::{Descriptor, LayerShape, LayerSpec, Shape, SuperNet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    /// Off-chip bandwidth, bytes per second.
    pub bandwidth: f64,
    /// Peak throughput, FLOPs per second.
    pub throughput: f64,
    /// Persistent buffer capacity, bytes.
    pub pb_bytes: u64,
    /// Off-chip access energy, joules per byte.
    #[serde(default)]
    pub energy_per_byte: f64,
    /// Dynamic buffer tile size. Informational: the overlap model ignores it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile_bytes: Option<u64>,
}

impl HardwareConfig {
    pub fn new(bandwidth: f64, throughput: f64, pb_bytes: u64, energy_per_byte: f64) -> Result<Self> {
        let hw = HardwareConfig {
            bandwidth,
            throughput,
            pb_bytes,
            energy_per_byte,
            tile_bytes: None,
        };
        hw.validate()?;
        Ok(hw)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.bandwidth) {
            return Err(Error::Hardware(format!("bandwidth {} must be > 0", self.bandwidth)));
        }
        if !positive(self.throughput) {
            return Err(Error::Hardware(format!("throughput {} must be > 0", self.throughput)));
        }
        if !(self.energy_per_byte.is_finite() && self.energy_per_byte >= 0.0) {
            return Err(Error::Hardware(format!(
                "energy_per_byte {} must be >= 0",
                self.energy_per_byte
            )));
        }
        if !positive(self.ridge_point()) {
            return Err(Error::Hardware("ridge point is not finite and positive".into()));
        }
        Ok(())
    }

    /// FLOPs per byte where compute and memory time meet.
    pub fn ridge_point(&self) -> f64 {
        self.throughput / self.bandwidth
    }

    pub fn with_pb(mut self, pb_bytes: u64) -> Self {
        self.pb_bytes = pb_bytes;
        self
    }

    /// Stable hash of every field, recorded in latency tables.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "bw={:016x};p={:016x};pb={};e={:016x};tile={:?}",
            self.bandwidth.to_bits(),
            self.throughput.to_bits(),
            self.pb_bytes,
            self.energy_per_byte.to_bits(),
            self.tile_bytes
        );
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let hw: HardwareConfig = serde_json::from_str(json)?;
        hw.validate()?;
        Ok(hw)
    }
}

/// Off-chip and on-chip byte split of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Traffic {
    pub weight_miss_bytes: u64,
    pub weight_hit_bytes: u64,
    pub activation_bytes: u64,
}

impl Traffic {
    pub fn off_chip_bytes(&self) -> u64 {
        self.weight_miss_bytes + self.activation_bytes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerCost {
    pub flops: u64,
    pub weight_miss_bytes: u64,
    pub weight_hit_bytes: u64,
    pub activation_bytes: u64,
    pub compute_time: f64,
    pub memory_time: f64,
    pub latency: f64,
    pub memory_bound: bool,
}

impl LayerCost {
    pub fn off_chip_bytes(&self) -> u64 {
        self.weight_miss_bytes + self.activation_bytes
    }
}

/// `2 * K * C * R * S * Xo * Yo`; a multiply-accumulate is two FLOPs.
pub fn layer_flops(layer: &LayerSpec, shape: LayerShape) -> Result<u64> {
    layer.check_bounds(0, shape)?;
    if !shape.is_active() {
        return Ok(0);
    }
    Ok(2 * shape.k as u64
        * shape.c as u64
        * layer.r as u64
        * layer.s as u64
        * layer.xo as u64
        * layer.yo as u64)
}

/// Weight hit/miss split against the cached slice plus activation traffic.
pub fn layer_traffic(layer: &LayerSpec, shape: LayerShape, cached: LayerShape) -> Result<Traffic> {
    layer.check_bounds(0, shape)?;
    layer.check_bounds(0, cached)?;
    if !shape.is_active() {
        return Ok(Traffic::default());
    }
    let total = layer.weight_bytes_of(shape);
    let hit = layer.weight_bytes_of(shape.meet(cached));
    let in_channels = if layer.depthwise { shape.k } else { shape.c } as u64;
    let xi = layer.xo as u64 * layer.stride as u64;
    let yi = layer.yo as u64 * layer.stride as u64;
    let volume = in_channels * xi * yi + shape.k as u64 * layer.xo as u64 * layer.yo as u64;
    Ok(Traffic {
        weight_miss_bytes: total - hit,
        weight_hit_bytes: hit,
        activation_bytes: volume * layer.activation_bytes as u64,
    })
}

/// FLOPs per off-chip byte; `+inf` when nothing crosses the chip boundary.
pub fn arithmetic_intensity(cost: &LayerCost) -> f64 {
    let bytes = cost.off_chip_bytes();
    if bytes == 0 {
        f64::INFINITY
    } else {
        cost.flops as f64 / bytes as f64
    }
}

pub fn layer_latency(
    layer: &LayerSpec,
    shape: LayerShape,
    cached: LayerShape,
    hw: &HardwareConfig,
) -> Result<LayerCost> {
    let flops = layer_flops(layer, shape)?;
    let t = layer_traffic(layer, shape, cached)?;
    let compute_time = flops as f64 / hw.throughput;
    let memory_time = t.off_chip_bytes() as f64 / hw.bandwidth;
    Ok(LayerCost {
        flops,
        weight_miss_bytes: t.weight_miss_bytes,
        weight_hit_bytes: t.weight_hit_bytes,
        activation_bytes: t.activation_bytes,
        compute_time,
        memory_time,
        latency: compute_time.max(memory_time),
        memory_bound: memory_time > compute_time,
    })
}

/// Whole-network cost of serving one shape with another cached.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubnetCost {
    pub layers: Vec<LayerCost>,
    pub latency: f64,
    pub flops: u64,
    pub weight_miss_bytes: u64,
    pub weight_hit_bytes: u64,
    pub activation_bytes: u64,
}

impl SubnetCost {
    pub fn off_chip_bytes(&self) -> u64 {
        self.weight_miss_bytes + self.activation_bytes
    }
}

/// The accelerator model bound to one SuperNet and hardware config.
#[derive(Debug, Clone, Copy)]
pub struct AccelModel<'a> {
    net: &'a SuperNet,
    hw: HardwareConfig,
}

impl<'a> AccelModel<'a> {
    pub fn new(net: &'a SuperNet, hw: HardwareConfig) -> Result<Self> {
        hw.validate()?;
        Ok(AccelModel { net, hw })
    }

    pub fn net(&self) -> &'a SuperNet {
        self.net
    }

    pub fn hw(&self) -> &HardwareConfig {
        &self.hw
    }

    fn check_capacity(&self, cached: &impl Descriptor) -> Result<()> {
        if cached.weight_bytes() > self.hw.pb_bytes {
            return Err(Error::Capacity {
                id: cached.id().to_string(),
                bytes: cached.weight_bytes(),
                capacity: self.hw.pb_bytes,
            });
        }
        Ok(())
    }

    /// Per-layer costs without the capacity check.
    pub fn shape_cost(&self, shape: &Shape, cached: &Shape) -> Result<SubnetCost> {
        self.net.check_shape(shape)?;
        self.net.check_shape(cached)?;
        let mut out = SubnetCost {
            layers: Vec::with_capacity(shape.len()),
            ..Default::default()
        };
        for ((layer, s), g) in self.net.layers().iter().zip(shape.iter()).zip(cached.iter()) {
            let c = layer_latency(layer, s, s.meet(g), &self.hw)?;
            out.latency += c.latency;
            out.flops += c.flops;
            out.weight_miss_bytes += c.weight_miss_bytes;
            out.weight_hit_bytes += c.weight_hit_bytes;
            out.activation_bytes += c.activation_bytes;
            out.layers.push(c);
        }
        Ok(out)
    }

    pub fn subnet_cost(&self, subnet: &impl Descriptor, cached: &impl Descriptor) -> Result<SubnetCost> {
        self.check_capacity(cached)?;
        self.shape_cost(subnet.shape(), cached.shape())
    }

    /// End-to-end latency in seconds; the latency table entry for this pair.
    pub fn subnet_latency(&self, subnet: &impl Descriptor, cached: &impl Descriptor) -> Result<f64> {
        Ok(self.subnet_cost(subnet, cached)?.latency)
    }

    /// Off-chip energy of serving `subnet` with `cached` resident. Cache fill
    /// traffic is charged separately via [`AccelModel::fill_energy`].
    pub fn off_chip_energy(&self, subnet: &impl Descriptor, cached: &impl Descriptor) -> Result<f64> {
        let cost = self.subnet_cost(subnet, cached)?;
        Ok(cost.off_chip_bytes() as f64 * self.hw.energy_per_byte)
    }

    /// Bytes fetched when the cache switches from `old` to `new`.
    pub fn cache_fill_bytes(&self, old: &Shape, new: &Shape) -> Result<u64> {
        Ok(self.net.weight_bytes(new)? - self.net.overlap_bytes(new, old)?)
    }

    pub fn fill_time(&self, bytes: u64) -> f64 {
        bytes as f64 / self.hw.bandwidth
    }

    pub fn fill_energy(&self, bytes: u64) -> f64 {
        bytes as f64 * self.hw.energy_per_byte
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn layer(k: u32, c: u32, r: u32, x: u32) -> LayerSpec {
        LayerSpec::conv("l", k, c, r, r, x, x)
    }

    #[test]
    fn conv_flops_formula() {
        let l = layer(64, 64, 3, 56);
        assert_eq!(layer_flops(&l, l.max_shape()).unwrap(), 231_211_008);
        assert_eq!(layer_flops(&l, LayerShape::new(0, 64)).unwrap(), 0);
    }

    #[test]
    fn flops_reject_out_of_bounds_shape() {
        let l = layer(4, 4, 3, 4);
        assert!(layer_flops(&l, LayerShape::new(5, 4)).is_err());
    }

    #[test]
    fn traffic_full_and_cold_cache() {
        let l = layer(16, 8, 3, 4);
        let full = l.max_shape();
        let hot = layer_traffic(&l, full, full).unwrap();
        assert_eq!(hot.weight_miss_bytes, 0);
        assert_eq!(hot.weight_hit_bytes, 16 * 8 * 9);
        let cold = layer_traffic(&l, full, LayerShape::EMPTY).unwrap();
        assert_eq!(cold.weight_hit_bytes, 0);
        assert_eq!(cold.weight_miss_bytes, 16 * 8 * 9);
        assert_eq!(cold.activation_bytes, 8 * 16 + 16 * 16);
    }

    #[test]
    fn traffic_rejects_oversized_cache() {
        let l = layer(16, 8, 3, 4);
        assert!(layer_traffic(&l, l.max_shape(), LayerShape::new(17, 8)).is_err());
    }

    #[test]
    fn depthwise_input_volume_uses_kernel_count() {
        let mut l = layer(32, 1, 3, 7);
        l.depthwise = true;
        l.stride = 2;
        let t = layer_traffic(&l, l.max_shape(), LayerShape::EMPTY).unwrap();
        assert_eq!(t.activation_bytes, 32 * 14 * 14 + 32 * 7 * 7);
    }

    #[test]
    fn intensity_division_and_sentinel() {
        let cost = LayerCost {
            flops: 192_000_000,
            weight_miss_bytes: 4_000_000,
            activation_bytes: 6_000_000,
            ..Default::default()
        };
        assert!((arithmetic_intensity(&cost) - 19.2).abs() < 1e-12);
        let cached = LayerCost {
            flops: 10,
            ..Default::default()
        };
        assert_eq!(arithmetic_intensity(&cached), f64::INFINITY);
    }

    #[test]
    fn compute_only_layer_latency_is_compute_time() {
        let hw = HardwareConfig::new(1e9, 1e12, 0, 0.0).unwrap();
        // zero-width activations isolate the weight side
        let mut l = layer(8, 8, 3, 4);
        l.activation_bytes = 0;
        let c = layer_latency(&l, l.max_shape(), l.max_shape(), &hw).unwrap();
        assert_eq!(c.weight_miss_bytes + c.activation_bytes, 0);
        assert_eq!(c.latency, c.compute_time);
        assert_eq!(arithmetic_intensity(&c), f64::INFINITY);
    }

    #[test]
    fn ridge_point_equality() {
        // flops = 2*1*1*1*1*1*1 = 2, bytes = 1 weight + 2 activations = 3
        let l = LayerSpec::conv("r", 1, 1, 1, 1, 1, 1);
        let hw = HardwareConfig::new(3.0, 2.0, 0, 0.0).unwrap();
        let c = layer_latency(&l, l.max_shape(), LayerShape::EMPTY, &hw).unwrap();
        assert_eq!(c.compute_time, c.memory_time);
        assert!(!c.memory_bound);
        assert_eq!(arithmetic_intensity(&c), hw.ridge_point());
    }

    #[test]
    fn reference_config_ridge_classifies_low_intensity_as_memory_bound() {
        let hw = fixtures::hw_edge();
        assert!((hw.ridge_point() - 67.5).abs() < 1e-9);
        // 1x1 conv at 1x1 spatial (a classifier): AI well below the ridge
        let l = LayerSpec::conv("fc", 1000, 1000, 1, 1, 1, 1);
        let c = layer_latency(&l, l.max_shape(), LayerShape::EMPTY, &hw).unwrap();
        assert!(arithmetic_intensity(&c) < 10.0);
        assert!(c.memory_bound);
    }

    #[test]
    fn energy_is_bytes_times_energy_per_byte() {
        let hw = HardwareConfig::new(1e9, 1e12, 0, 20e-12).unwrap();
        let net = fixtures::resnet50_like();
        let model = AccelModel::new(&net, hw).unwrap();
        assert!((model.fill_energy(1_000_000) - 2.0e-5).abs() < 1e-18);
    }

    #[test]
    fn capacity_error_when_cache_exceeds_pb() {
        let net = fixtures::resnet50_like();
        let subnets = fixtures::resnet50_subnets();
        let model = AccelModel::new(&net, fixtures::hw_edge()).unwrap();
        let too_big = subnets[0].as_subgraph();
        assert!(matches!(
            model.subnet_latency(&subnets[0], &too_big),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let a = fixtures::hw_edge();
        assert_eq!(a.fingerprint(), fixtures::hw_edge().fingerprint());
        assert_ne!(a.fingerprint(), a.with_pb(0).fingerprint());
        let mut b = a;
        b.bandwidth *= 2.0;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn rejects_invalid_hardware() {
        assert!(HardwareConfig::new(0.0, 1.0, 0, 0.0).is_err());
        assert!(HardwareConfig::new(1.0, f64::NAN, 0, 0.0).is_err());
        assert!(HardwareConfig::new(1.0, 1.0, 0, -1.0).is_err());
    }
}
