//! SubGraph-stationary inference serving for weight-shared SuperNets.
//!
//! A weight-shared SuperNet serves every query with one of many SubNets that
//! overlap in their weights. Keeping a common SubGraph resident in an on-chip
//! persistent buffer (PB) removes its off-chip traffic from every query that
//! reuses it. This crate models that co-design end to end:
//!
//! * [`supernet`]: SuperNet/SubNet/SubGraph shapes, the `[K1, C1, .., KN, CN]`
//!   vector encoding, intersections and overlap byte accounting.
//! * [`accel`]: an analytic roofline latency and off-chip energy model with a
//!   persistent weight buffer.
//! * [`table`]: the restricted candidate SubGraph set and the dense
//!   SubNet x SubGraph latency lookup table.
//! * [`sched`]: the cache-state aware query scheduler (strict accuracy or
//!   strict latency) with running-average SubGraph selection.
//! * [`sim`]: query trace generation, replay and serving metrics.
//! * [`dse`]: design space sweeps over PB size, bandwidth and throughput.
//! * [`cli`]: the `sgsim` command line front end.
//!
//! The bundled [`fixtures`] provide a ResNet50-like and a MobileNetV3-like
//! SuperNet with synthetic accuracies.

pub mod accel;
pub mod cli;
pub mod dse;
mod error;
pub mod fixtures;
pub mod sched;
pub mod sim;
pub mod supernet;
pub mod table;

pub use error::{Error, Result};

/// Bytes per mebibyte; fixture sizes are quoted in MiB.
pub const MIB: u64 = 1 << 20;
