//! Resolve the bundled ResNet50-like picks, encode them and measure how much
//! weight the SubNets share.
use sgs::fixtures;
use sgs::supernet::{common_core, intersect};

fn main() -> sgs::Result<()> {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    println!("{}: {} layers, max {} bytes", net.name(), net.layer_count(), net.weight_bytes(&net.max_shape())?);
    for s in &subs {
        let v = s.shape.encode();
        println!("{:8} acc {:.3}  {:>10} bytes  |v| = {:.1}  v[..6] = {:?}", s.id, s.accuracy, s.weight_bytes, v.l2_norm(), &v.as_slice()[..6]);
    }

    let core = common_core(subs.iter().map(|s| &s.shape))?.expect("non-empty");
    println!("common core: {} bytes", net.weight_bytes(&core)?);

    println!("\npairwise overlap (bytes):");
    print!("{:8}", "");
    for b in &subs {
        print!("{:>10}", b.id);
    }
    println!();
    for a in &subs {
        print!("{:8}", a.id);
        for b in &subs {
            let g = intersect(&net, &a.shape, &b.shape)?;
            print!("{:>10}", g.weight_bytes);
        }
        println!();
    }
    Ok(())
}
