//! Sweep the cache update window Q on a bursty trace.
use sgs::accel::AccelModel;
use sgs::fixtures;
use sgs::sched::{Policy, SchedulerConfig, Window};
use sgs::sim::{aggregate, generate_trace, replay, TraceMix};
use sgs::table::{build_candidate_set, build_table, CandidateParams};

fn main() -> sgs::Result<()> {
    let net = fixtures::mobv3_like();
    let subs = fixtures::mobv3_subnets();
    let hw = fixtures::hw_edge();
    let model = AccelModel::new(&net, hw)?;
    let set = build_candidate_set(&net, &subs, &hw, &CandidateParams::default())?;
    let table = build_table(&model, &subs, &set)?;
    let trace = generate_trace(&subs, &table, 5000, TraceMix::Bursty { burst: 50 }, 7)?;

    println!("{:>6} {:>10} {:>8} {:>8} {:>12}", "Q", "mean ms", "hit", "updates", "fill MiB");
    for w in ["1", "2", "5", "10", "50", "200", "inf"] {
        let window: Window = w.parse()?;
        let recs = replay(&model, &table, &subs, &set, &trace, SchedulerConfig::new(Policy::StrictAccuracy, window, 0))?;
        let s = aggregate(&recs)?;
        println!(
            "{:>6} {:>10.4} {:>8.3} {:>8} {:>12.2}",
            window.to_string(),
            s.mean_latency_s * 1e3,
            s.mean_hit_ratio,
            s.cache_updates,
            s.total_fill_bytes as f64 / sgs::MIB as f64
        );
    }
    Ok(())
}
