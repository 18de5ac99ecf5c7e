//! Show which layers of the smallest SubNet leave the memory-bound region
//! once the common core sits in the persistent buffer.
use sgs::accel::{roofline_rows, AccelModel};
use sgs::fixtures;
use sgs::supernet::{common_core, SubGraphDescriptor};

fn main() -> sgs::Result<()> {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    let hw = fixtures::hw_roofline();
    let model = AccelModel::new(&net, hw)?;
    let core = common_core(subs.iter().map(|s| &s.shape))?.expect("non-empty");
    let core = SubGraphDescriptor::new(&net, "core", core)?;
    let small = &subs[0];

    println!("ridge point {:.1} FLOP/B, PB {} bytes, core {} bytes", hw.ridge_point(), hw.pb_bytes, core.weight_bytes);
    println!("{:14} {:>9} {:>9}  bound", "layer", "AI", "AI+PB");
    let rows = roofline_rows(&model, small, &core)?;
    for r in &rows {
        let mark = if r.flipped() { "  <- flips" } else { "" };
        println!("{:14} {:>9.1} {:>9.1}  {} -> {}{mark}", r.layer, r.ai_without, r.ai_with, r.bound_without.as_str(), r.bound_with.as_str());
    }
    let before: f64 = rows.iter().map(|r| r.latency_without).sum();
    let after: f64 = rows.iter().map(|r| r.latency_with).sum();
    println!("{}: {:.3} ms -> {:.3} ms", small.id, before * 1e3, after * 1e3);
    Ok(())
}
