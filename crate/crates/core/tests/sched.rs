use proptest::prelude::*;
use sgs::accel::{AccelModel, HardwareConfig};
use sgs::fixtures;
use sgs::sched::*;
use sgs::supernet::{SubNetDescriptor, SuperNet};
use sgs::table::*;

struct Setup {
    net: SuperNet,
    subs: Vec<SubNetDescriptor>,
    set: CandidateSet,
    table: LatencyTable,
}

fn setup(hw: HardwareConfig) -> Setup {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    let set = build_candidate_set(&net, &subs, &hw, &CandidateParams { max_columns: 40, ..Default::default() }).unwrap();
    let table = build_table(&AccelModel::new(&net, hw).unwrap(), &subs, &set).unwrap();
    Setup { net, subs, set, table }
}

fn queries(n: usize, seed: u64) -> Vec<Query> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|t| Query::new(t, rng.gen_range(0.74..0.80), rng.gen_range(2e-3..4e-3)).unwrap())
        .collect()
}

fn run(s: &Setup, table: &LatencyTable, cfg: SchedulerConfig, qs: &[Query]) -> Vec<Decision> {
    let mut sched = Scheduler::new(&s.net, table, &s.subs, &s.set, cfg).unwrap();
    qs.iter().map(|q| sched.step(q).unwrap()).collect()
}

#[test]
fn decisions_are_well_formed() {
    let s = setup(fixtures::hw_edge());
    let ds = run(&s, &s.table, SchedulerConfig::new(Policy::StrictAccuracy, Window::Every(3), 1), &queries(200, 1));
    let mut cache = ds[0].cache;
    for d in &ds {
        assert_eq!(d.cache, cache);
        assert_eq!(d.new_cache.is_some(), d.cache_updated);
        if let Some(n) = d.new_cache {
            assert_ne!(n, cache);
            let want = s.set.get(n).weight_bytes - s.net.overlap_bytes(&s.set.get(n).shape, &s.set.get(cache).shape).unwrap();
            assert_eq!(d.fill_bytes, want);
            cache = n;
        } else {
            assert_eq!(d.fill_bytes, 0);
        }
        if d.cache_updated {
            assert_eq!((d.query + 1) % 3, 0);
        }
    }
    assert!(ds.iter().any(|d| d.cache_updated));
}

#[test]
fn never_window_keeps_the_initial_cache() {
    let s = setup(fixtures::hw_edge());
    let cfg = SchedulerConfig { policy: Policy::StrictLatency, window: Window::Never, initial: InitialCache::Index(5) };
    let ds = run(&s, &s.table, cfg, &queries(300, 2));
    assert!(ds.iter().all(|d| d.cache == 5 && !d.cache_updated));
}

#[test]
fn window_of_one_tracks_the_last_subnet() {
    let s = setup(fixtures::hw_edge());
    let cfg = SchedulerConfig::new(Policy::StrictAccuracy, Window::Every(1), 3);
    let mut sched = Scheduler::new(&s.net, &s.table, &s.subs, &s.set, cfg).unwrap();
    let vecs: Vec<_> = s.set.subgraphs().iter().map(|g| g.shape.encode()).collect();
    for q in queries(50, 3) {
        let d = sched.step(&q).unwrap();
        let want = select_cache(&s.subs[d.subnet].shape.encode(), &vecs).unwrap();
        assert_eq!(sched.cache(), want);
        assert_eq!(sched.average(), s.subs[d.subnet].shape.encode());
    }
}

#[test]
fn repeated_query_reaches_a_fixed_point() {
    let s = setup(fixtures::hw_edge());
    let q = Query::new(0, 0.76, 3e-3).unwrap();
    let qs: Vec<Query> = (0..100).map(|t| Query { index: t, ..q }).collect();
    let ds = run(&s, &s.table, SchedulerConfig::new(Policy::StrictAccuracy, Window::Every(4), 9), &qs);
    let first = ds.iter().position(|d| d.query + 1 >= 4).unwrap();
    let settled = &ds[first + 1..];
    assert!(settled.iter().all(|d| !d.cache_updated));
    assert!(settled.windows(2).all(|w| w[0].subnet == w[1].subnet && w[0].cache == w[1].cache));
}

#[test]
fn cache_choices_ignore_table_scale() {
    // scaling the table leaves STRICT_ACCURACY choices and hence every cache decision unchanged
    let s = setup(fixtures::hw_edge());
    let hw = fixtures::hw_edge();
    let slow = HardwareConfig::new(hw.bandwidth / 4.0, hw.throughput / 4.0, hw.pb_bytes, hw.energy_per_byte).unwrap();
    let slow_table = build_table(&AccelModel::new(&s.net, slow).unwrap(), &s.subs, &s.set).unwrap();
    let cfg = SchedulerConfig::new(Policy::StrictAccuracy, Window::Every(5), 4);
    let qs = queries(300, 4);
    assert_eq!(run(&s, &s.table, cfg, &qs), run(&s, &slow_table, cfg, &qs));
}

#[test]
fn identical_runs_are_identical() {
    let s = setup(fixtures::hw_edge());
    let cfg = SchedulerConfig::new(Policy::StrictLatency, Window::Every(10), 11);
    let qs = queries(500, 5);
    assert_eq!(run(&s, &s.table, cfg, &qs), run(&s, &s.table, cfg, &qs));
}

#[test]
fn bad_initial_index_is_rejected() {
    let s = setup(fixtures::hw_edge());
    let cfg = SchedulerConfig { policy: Policy::StrictLatency, window: Window::Never, initial: InitialCache::Index(10_000) };
    assert!(Scheduler::new(&s.net, &s.table, &s.subs, &s.set, cfg).is_err());
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, f64)> {
    (1usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec((60u32..=85).prop_map(|a| a as f64 / 100.0), n),
            prop::collection::vec((1u32..=30).prop_map(|l| l as f64 * 1e-4), n),
            (55u32..=90).prop_map(|a| a as f64 / 100.0),
            (1u32..=32).prop_map(|l| l as f64 * 1e-4),
        )
    })
}

proptest! {
    #[test]
    fn latency_scale_does_not_move_strict_accuracy((acc, lat, a, l) in instance(), k in 0.1..10.0f64) {
        let q = Query::new(0, a, l).unwrap();
        let x = select_subnet(Policy::StrictAccuracy, &q, &acc, |i| lat[i]).unwrap();
        let y = select_subnet(Policy::StrictAccuracy, &q, &acc, |i| lat[i] * k).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn accuracy_shift_does_not_move_strict_latency((acc, lat, a, l) in instance(), d in -0.5..0.1f64) {
        let q = Query::new(0, a, l).unwrap();
        let shifted: Vec<f64> = acc.iter().map(|x| x + d).collect();
        let x = select_subnet(Policy::StrictLatency, &q, &acc, |i| lat[i]).unwrap();
        let y = select_subnet(Policy::StrictLatency, &q, &shifted, |i| lat[i]).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn feasible_choices_satisfy_the_hard_constraint((acc, lat, a, l) in instance()) {
        let q = Query::new(0, a, l).unwrap();
        let s = select_subnet(Policy::StrictAccuracy, &q, &acc, |i| lat[i]).unwrap();
        prop_assert_eq!(s.violated, acc.iter().all(|x| *x < a));
        if !s.violated { prop_assert!(acc[s.index] >= a); }
        let s = select_subnet(Policy::StrictLatency, &q, &acc, |i| lat[i]).unwrap();
        prop_assert_eq!(s.violated, lat.iter().all(|x| *x > l));
        if !s.violated { prop_assert!(lat[s.index] <= l); }
    }

    #[test]
    fn average_matches_window_mean(vs in prop::collection::vec(prop::collection::vec(0u32..500, 6), 1..30), q in 1usize..8) {
        let mut avg = RunningAverage::new(6, Window::Every(q));
        for v in &vs {
            update_average(&mut avg, &sgs::supernet::EncodedVector::new(v.iter().map(|&x| x as f64).collect()).unwrap()).unwrap();
        }
        let tail = &vs[vs.len().saturating_sub(q)..];
        let want: Vec<f64> = (0..6).map(|i| tail.iter().map(|v| v[i] as f64).sum::<f64>() / tail.len() as f64).collect();
        let mean = avg.mean();
        prop_assert_eq!(mean.as_slice(), &want[..]);
    }
}
