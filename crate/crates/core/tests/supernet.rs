mod common;

use proptest::prelude::*;
use sgs::fixtures;
use sgs::supernet::*;
use sgs::{Error, MIB};

// Computed from the raw fixture JSON by a separate resolver script.
const RESNET_BYTES: [(&str, u64); 6] = [
    ("r50-xs", 7_935_504),
    ("r50-s", 8_056_784),
    ("r50-m", 16_335_072),
    ("r50-l", 20_086_912),
    ("r50-xl", 24_113_744),
    ("r50-xxl", 28_578_192),
];
const RESNET_CORE: u64 = 7_909_184;
const RESNET_MAX: u64 = 30_826_432;
const MOBV3_BYTES: [(&str, u64); 7] = [
    ("mb-xs", 3_138_708),
    ("mb-s", 3_178_392),
    ("mb-m", 3_825_096),
    ("mb-ml", 4_176_924),
    ("mb-l", 4_159_392),
    ("mb-xl", 4_807_212),
    ("mb-xxl", 4_814_688),
];
const MOBV3_CORE: u64 = 3_136_656;

#[test]
fn fixture_sizes_match_independent_resolver() {
    for (subs, want) in [
        (fixtures::resnet50_subnets(), &RESNET_BYTES[..]),
        (fixtures::mobv3_subnets(), &MOBV3_BYTES[..]),
    ] {
        let got: Vec<(&str, u64)> = subs.iter().map(|s| (s.id.as_str(), s.weight_bytes)).collect();
        assert_eq!(got, want);
    }
    let net = fixtures::resnet50_like();
    assert_eq!(net.weight_bytes(&net.max_shape()).unwrap(), RESNET_MAX);
}

#[test]
fn shared_core_sizes() {
    for (net, subs, want) in [
        (fixtures::resnet50_like(), fixtures::resnet50_subnets(), RESNET_CORE),
        (fixtures::mobv3_like(), fixtures::mobv3_subnets(), MOBV3_CORE),
    ] {
        let core = common_core(subs.iter().map(|s| &s.shape)).unwrap().unwrap();
        assert_eq!(net.weight_bytes(&core).unwrap(), want);
        for a in &subs {
            for b in &subs {
                assert!(net.overlap_bytes(&a.shape, &b.shape).unwrap() >= want);
            }
        }
    }
    // 7.54 MiB shared; subnets span roughly 7.6 to 27.3 MiB
    let mib = |b: u64| b as f64 / MIB as f64;
    assert!((mib(RESNET_CORE) - 7.54).abs() < 0.05);
    assert!((mib(RESNET_BYTES[0].1) - 7.57).abs() < 0.05);
    assert!((mib(RESNET_BYTES[5].1) - 27.25).abs() < 0.05);
}

#[test]
fn encode_layout() {
    let net = SuperNet::new(SuperNetSpec {
        name: "toy".into(),
        stages: vec![],
        layers: vec![
            LayerSpec::conv("a", 4, 3, 3, 3, 8, 8),
            LayerSpec::conv("b", 8, 4, 3, 3, 8, 8),
            LayerSpec::conv("c", 16, 8, 1, 1, 8, 8),
        ],
    })
    .unwrap();
    let shape = Shape::new(vec![LayerShape::new(4, 3), LayerShape::new(8, 4), LayerShape::new(16, 8)]);
    let sn = SubNetDescriptor::new(&net, "x", shape, 0.7).unwrap();
    assert_eq!(encode(&net, &sn).unwrap().as_slice(), &[4.0, 3.0, 8.0, 4.0, 16.0, 8.0]);
    let empty = SubGraphDescriptor::empty(&net);
    assert_eq!(encode(&net, &empty).unwrap(), EncodedVector::zeros(6));
}

#[test]
fn intersect_examples() {
    let a = Shape::new(vec![LayerShape::new(8, 4); 3]);
    let b = Shape::new(vec![LayerShape::new(4, 8); 3]);
    assert_eq!(a.intersect(&b).unwrap(), Shape::new(vec![LayerShape::new(4, 4); 3]));
    assert_eq!(a.intersect(&a).unwrap(), a);
    assert!(matches!(a.intersect(&Shape::empty(2)), Err(Error::LayerCount { .. })));
}

#[test]
fn extreme_picks() {
    let net = fixtures::resnet50_like();
    let max = enumerate_subnets(&net, &[net.max_pick()]).unwrap();
    assert_eq!(max[0].shape, net.max_shape());
    let all = fixtures::resnet50_subnets();
    let min = net.resolve(&net.min_pick()).unwrap();
    let core = common_core(all.iter().map(|s| &s.shape).chain([&max[0].shape])).unwrap().unwrap();
    assert!(min.contained_in(&core));
    let big = intersect(&net, &max[0].shape, &min).unwrap();
    assert_eq!(big.shape, min);
}

#[test]
fn out_of_range_pick_names_the_stage() {
    let net = fixtures::resnet50_like();
    let mut p = net.max_pick();
    p.id = "bad".into();
    p.depths[1] = 7;
    let e = net.resolve(&p).unwrap_err().to_string();
    assert!(e.contains("bad"), "{e}");
    assert!(e.contains("stage"), "{e}");
}

#[test]
fn enumerate_keeps_order_and_accuracy() {
    let picks = fixtures::resnet50_picks();
    let subs = enumerate_subnets(&fixtures::resnet50_like(), &picks.picks).unwrap();
    for (p, s) in picks.picks.iter().zip(&subs) {
        assert_eq!(p.id, s.id);
        assert_eq!(p.accuracy, s.accuracy);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn intersect_is_a_meet(a in common::shape_in(&fixtures::mobv3_like()),
                           b in common::shape_in(&fixtures::mobv3_like()),
                           c in common::shape_in(&fixtures::mobv3_like())) {
        prop_assert_eq!(a.intersect(&b).unwrap(), b.intersect(&a).unwrap());
        prop_assert_eq!(
            a.intersect(&b).unwrap().intersect(&c).unwrap(),
            a.intersect(&b.intersect(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.intersect(&a).unwrap(), a.clone());
    }

    #[test]
    fn overlap_is_bytes_of_intersection(a in common::shape_in(&fixtures::mobv3_like()),
                                        g in common::shape_in(&fixtures::mobv3_like())) {
        let net = fixtures::mobv3_like();
        let o = net.overlap_bytes(&a, &g).unwrap();
        prop_assert_eq!(o, net.weight_bytes(&a.intersect(&g).unwrap()).unwrap());
        prop_assert!(o <= net.weight_bytes(&a).unwrap().min(net.weight_bytes(&g).unwrap()));
    }

    #[test]
    fn containment_is_monotone((big, small) in common::nested_in(&fixtures::resnet50_like()),
                               g in common::shape_in(&fixtures::resnet50_like())) {
        let net = fixtures::resnet50_like();
        prop_assert!(small.contained_in(&big));
        prop_assert!(net.weight_bytes(&small).unwrap() <= net.weight_bytes(&big).unwrap());
        prop_assert!(net.overlap_bytes(&small, &g).unwrap() <= net.overlap_bytes(&big, &g).unwrap());
        let (vs, vb) = (small.encode(), big.encode());
        prop_assert!(vs.as_slice().iter().zip(vb.as_slice()).all(|(x, y)| x <= y));
    }

    #[test]
    fn encode_decode_round_trip(s in common::shape_in(&fixtures::resnet50_like())) {
        prop_assert_eq!(s.encode().decode().unwrap(), s);
    }
}
