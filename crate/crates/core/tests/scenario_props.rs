mod support;

use pokerrt::geometry::{Pose2, Region};
use pokerrt::scenarios::{builtin_scenario, parse_scenario, serialize_scenario, BUILTIN_IDS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{error_class, error_path, random_scenario, violations};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_scenarios_round_trip(seed in any::<u64>()) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), "random");
        let text = serialize_scenario(&s);
        let back = parse_scenario(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(serialize_scenario(&back), text);
    }
}

#[test]
fn every_violation_class_is_named() {
    for v in violations() {
        let err = parse_scenario(&v.document).expect_err(v.label);
        assert_eq!(error_class(&err), v.class, "{}: {err}", v.label);
        assert_eq!(error_path(&err), v.path, "{}: {err}", v.label);
        assert!(err.to_string().contains(v.class), "{}: {err}", v.label);
    }
}

#[test]
fn builtins_satisfy_invariants() {
    for id in BUILTIN_IDS {
        let s = builtin_scenario(id).unwrap();
        assert!(s.pose_valid(s.start()), "{id}");
        assert!(!s.in_goal(s.start()), "{id}");
        let reach = &s.acting_robot().reachable;
        assert!(reach.contains(s.start().position()), "{id}");
        for o in s.obstacles() {
            assert!(s.workspace().contains_polygon(o.world()), "{id}");
        }
    }
}

#[test]
fn s6_splits_the_workspace_between_two_robots() {
    let s6 = builtin_scenario("S6").unwrap();
    let robots = s6.robots();
    assert_eq!(robots.len(), 2);
    let disc = |r: &Region| match *r {
        Region::Disc { center, radius } => (center, radius),
        ref other => panic!("expected a disc, got {other:?}"),
    };
    let (c1, r1) = disc(&robots[0].reachable);
    let (c2, r2) = disc(&robots[1].reachable);
    assert!((c1 - c2).norm() > r1 + r2);
    assert!(robots[0].reachable.contains(s6.start().position()));
    let goal = s6.goal().center();
    assert!(robots[1].reachable.contains(goal));
    assert!(!robots[0].reachable.contains(goal));
}

#[test]
fn s5_walls_leave_a_single_gap() {
    let s5 = builtin_scenario("S5").unwrap();
    assert_eq!(s5.obstacles().len(), 2);
    // Every vertical line through the walls' x span is blocked except the gap.
    let xs: Vec<f64> = s5.obstacles()[0].world().iter().map(|p| p.x).collect();
    let mid = (xs.iter().cloned().fold(f64::INFINITY, f64::min) + xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)) / 2.0;
    let blocked = |y: f64| s5.collides(&Pose2::new(mid, y, 0.0));
    assert!(!blocked(0.0));
    assert!(blocked(0.2) && blocked(-0.2));
}
