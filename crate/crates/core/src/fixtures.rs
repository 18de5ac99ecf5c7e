//! Bundled SuperNet fixtures.
//!
//! `resnet50_like` is an OFA-style bottleneck ResNet with reduced stage widths
//! at 160x160 input; `mobv3_like` is an OFA-style MobileNetV3 at 224x224 with
//! depthwise layers encoded as `C = 1`. Accuracies in the pick files are
//! synthetic and monotone in model size. `fixtures/make_fixtures.py`
//! regenerates the JSON.
//!
//! Two hardware configs ship alongside: `hw_edge` (19.2 GB/s, 1.296 TFLOP/s,
//! 1728 KiB persistent buffer) and `hw_roofline` (same roofline, 32 MiB buffer
//! so a whole shared core fits).

use crate::accel::HardwareConfig;
use crate::supernet::{enumerate_subnets, PicksFile, SubNetDescriptor, SuperNet};

pub const RESNET50_SUPERNET: &str = include_str!("../fixtures/resnet50_like.supernet.json");
pub const RESNET50_PICKS: &str = include_str!("../fixtures/resnet50_like.picks.json");
pub const MOBV3_SUPERNET: &str = include_str!("../fixtures/mobv3_like.supernet.json");
pub const MOBV3_PICKS: &str = include_str!("../fixtures/mobv3_like.picks.json");
pub const HW_EDGE: &str = include_str!("../fixtures/hw_edge.json");
pub const HW_ROOFLINE: &str = include_str!("../fixtures/hw_roofline.json");

/// Absolute path of the fixture directory (for CLI examples and tests).
pub fn dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn resnet50_like() -> SuperNet {
    SuperNet::from_json(RESNET50_SUPERNET).expect("bundled resnet50 fixture")
}

pub fn mobv3_like() -> SuperNet {
    SuperNet::from_json(MOBV3_SUPERNET).expect("bundled mobv3 fixture")
}

pub fn resnet50_picks() -> PicksFile {
    serde_json::from_str(RESNET50_PICKS).expect("bundled resnet50 picks")
}

pub fn mobv3_picks() -> PicksFile {
    serde_json::from_str(MOBV3_PICKS).expect("bundled mobv3 picks")
}

pub fn resnet50_subnets() -> Vec<SubNetDescriptor> {
    enumerate_subnets(&resnet50_like(), &resnet50_picks().picks).expect("resnet50 picks resolve")
}

pub fn mobv3_subnets() -> Vec<SubNetDescriptor> {
    enumerate_subnets(&mobv3_like(), &mobv3_picks().picks).expect("mobv3 picks resolve")
}

pub fn hw_edge() -> HardwareConfig {
    serde_json::from_str(HW_EDGE).expect("bundled hw_edge")
}

pub fn hw_roofline() -> HardwareConfig {
    serde_json::from_str(HW_ROOFLINE).expect("bundled hw_roofline")
}
