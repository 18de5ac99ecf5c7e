//! Off-chip energy per SubNet with and without the common core cached.
use sgs::accel::AccelModel;
use sgs::fixtures;
use sgs::supernet::{common_core, SubGraphDescriptor};

fn main() -> sgs::Result<()> {
    for (net, subs) in [
        (fixtures::resnet50_like(), fixtures::resnet50_subnets()),
        (fixtures::mobv3_like(), fixtures::mobv3_subnets()),
    ] {
        let core = common_core(subs.iter().map(|s| &s.shape))?.expect("non-empty");
        let core = SubGraphDescriptor::new(&net, "core", core)?;
        let empty = SubGraphDescriptor::empty(&net);
        let hw = fixtures::hw_edge().with_pb(core.weight_bytes.max(fixtures::hw_edge().pb_bytes));
        let model = AccelModel::new(&net, hw)?;
        println!("{} (core {} bytes)", net.name(), core.weight_bytes);
        for s in &subs {
            let off = model.subnet_cost(s, &empty)?;
            let on = model.subnet_cost(s, &core)?;
            let e_off = model.off_chip_energy(s, &empty)?;
            let e_on = model.off_chip_energy(s, &core)?;
            println!(
                "  {:8} weights {:5.1}% saved, energy {:.1} uJ -> {:.1} uJ ({:.1}% saved)",
                s.id,
                100.0 * (off.weight_miss_bytes - on.weight_miss_bytes) as f64 / off.weight_miss_bytes as f64,
                e_off * 1e6,
                e_on * 1e6,
                100.0 * (e_off - e_on) / e_off
            );
        }
    }
    Ok(())
}
