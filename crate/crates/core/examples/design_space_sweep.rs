//! Sweep PB size against bandwidth and print the latency saving.
use sgs::accel::AccelModel;
use sgs::dse::{sweep, CachePolicy, Grid, SweepConfig};
use sgs::fixtures;
use sgs::sched::{Policy, SchedulerConfig, Window};
use sgs::sim::{generate_trace, TraceMix};
use sgs::table::{build_table, CandidateParams, CandidateSet};
use sgs::MIB;

fn main() -> sgs::Result<()> {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    let grid = Grid {
        pb_bytes: vec![0, MIB, 2 * MIB, 4 * MIB, 8 * MIB, 16 * MIB, 32 * MIB],
        bandwidth: vec![4.8e9, 19.2e9, 76.8e9],
        throughput: vec![1.296e12],
        energy_per_byte: 0.0,
    };
    let base_hw = fixtures::hw_edge().with_pb(0);
    let base = build_table(&AccelModel::new(&net, base_hw)?, &subs, &CandidateSet::uncached(&net))?;
    let trace = generate_trace(&subs, &base, 500, TraceMix::AccuracyOnly, 3)?;
    let config = SweepConfig {
        cache: CachePolicy::StaticUnion,
        scheduler: SchedulerConfig::new(Policy::StrictAccuracy, Window::Every(10), 0),
        candidates: CandidateParams::default(),
        energy_per_byte: 0.0,
    };
    let rows = sweep(&net, &subs, &grid.points(), &trace, &config)?;

    print!("{:>10}", "BW \\ PB");
    for pb in &grid.pb_bytes {
        print!("{:>8}", format!("{}M", pb / MIB));
    }
    println!();
    for chunk in rows.chunks(grid.pb_bytes.len()) {
        print!("{:>8.1}GB", chunk[0].bw_bytes_per_s / 1e9);
        for r in chunk {
            print!("{:>7.1}%", r.time_save_pct);
        }
        println!();
    }
    Ok(())
}
