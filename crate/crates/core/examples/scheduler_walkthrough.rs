//! Step the scheduler through a few hand-written queries and print each
//! decision.
use sgs::accel::AccelModel;
use sgs::fixtures;
use sgs::sched::{Policy, Query, Scheduler, SchedulerConfig, Window};
use sgs::table::{build_candidate_set, build_table, CandidateParams};

fn main() -> sgs::Result<()> {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    let hw = fixtures::hw_edge();
    let set = build_candidate_set(&net, &subs, &hw, &CandidateParams { max_columns: 16, ..Default::default() })?;
    let table = build_table(&AccelModel::new(&net, hw)?, &subs, &set)?;

    for policy in [Policy::StrictAccuracy, Policy::StrictLatency] {
        println!("{policy}, Q = 3");
        let mut sched = Scheduler::new(&net, &table, &subs, &set, SchedulerConfig::new(policy, Window::Every(3), 1))?;
        let targets = [(0.74, 3.0e-3), (0.79, 3.0e-3), (0.79, 2.0e-3), (0.76, 2.5e-3), (0.80, 1.0e-3), (0.74, 4.0e-3)];
        for (t, &(a, l)) in targets.iter().enumerate() {
            let d = sched.step(&Query::new(t, a, l)?)?;
            print!(
                "  q{t}: A>={a:.2} L<={:.1}ms -> {:8} on {:10} {:.3} ms",
                l * 1e3,
                subs[d.subnet].id,
                set.get(d.cache).id,
                table.get(d.subnet, d.cache) * 1e3
            );
            if d.violated {
                print!(" (fallback)");
            }
            if let Some(n) = d.new_cache {
                print!("  cache -> {} ({} bytes to fill)", set.get(n).id, d.fill_bytes);
            }
            println!();
        }
    }
    Ok(())
}
