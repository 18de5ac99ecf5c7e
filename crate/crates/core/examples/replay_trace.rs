//! Generate a seeded query trace, replay it and summarize the serving metrics.
use sgs::accel::AccelModel;
use sgs::fixtures;
use sgs::sched::{Policy, SchedulerConfig, Window};
use sgs::sim::{aggregate, generate_trace, replay, TraceMix};
use sgs::table::{build_candidate_set, build_table, CandidateParams};

fn main() -> sgs::Result<()> {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    let hw = fixtures::hw_edge();
    let model = AccelModel::new(&net, hw)?;
    let set = build_candidate_set(&net, &subs, &hw, &CandidateParams::default())?;
    let table = build_table(&model, &subs, &set)?;

    for mix in [TraceMix::Uniform, TraceMix::AccuracyOnly, TraceMix::LatencyOnly, TraceMix::Bursty { burst: 25 }] {
        let trace = generate_trace(&subs, &table, 2000, mix, 42)?;
        for policy in [Policy::StrictAccuracy, Policy::StrictLatency] {
            let recs = replay(&model, &table, &subs, &set, &trace, SchedulerConfig::new(policy, Window::Every(10), 0))?;
            let s = aggregate(&recs)?;
            println!(
                "{:12} {:16} mean {:.3} ms  p99 {:.3} ms  acc {:.4}  violations {:5.1}%  hit {:.3}  updates {}",
                format!("{mix:?}").split_whitespace().next().unwrap_or(""),
                policy.as_str(),
                s.mean_latency_s * 1e3,
                s.p99_latency_s * 1e3,
                s.mean_accuracy,
                100.0 * s.violation_rate,
                s.mean_hit_ratio,
                s.cache_updates
            );
        }
    }
    Ok(())
}
