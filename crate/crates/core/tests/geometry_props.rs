mod support;

use pokerrt::geometry::{polygons_intersect, se2_distance, transform_polygon, Pose2, Vec2};
use proptest::collection::vec;
use proptest::prelude::*;
use support::{brute_force_overlap, ellipse_polygon};

fn polygon_area(pts: &[Vec2]) -> f64 {
    (0..pts.len())
        .map(|i| pts[i].cross(pts[(i + 1) % pts.len()]))
        .sum::<f64>()
        / 2.0
}

fn edge_lengths(pts: &[Vec2]) -> Vec<f64> {
    (0..pts.len())
        .map(|i| (pts[(i + 1) % pts.len()] - pts[i]).norm())
        .collect()
}

fn shape() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (vec(0.0f64..std::f64::consts::TAU, 3..9), 0.02f64..0.3, 0.02f64..0.3)
}

fn pose(range: f64) -> impl Strategy<Value = Pose2> {
    (-range..range, -range..range, -4.0f64..4.0).prop_map(|(x, y, t)| Pose2::new(x, y, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sat_is_symmetric_and_matches_brute_force(
        (a_angles, a_rx, a_ry) in shape(),
        (b_angles, b_rx, b_ry) in shape(),
        pa in pose(0.3),
        pb in pose(0.3),
    ) {
        let a = ellipse_polygon(&a_angles, a_rx, a_ry);
        let b = ellipse_polygon(&b_angles, b_rx, b_ry);
        prop_assume!(a.is_some() && b.is_some());
        let wa = transform_polygon(&a.unwrap(), &pa);
        let wb = transform_polygon(&b.unwrap(), &pb);
        let ab = polygons_intersect(&wa, &wb);
        prop_assert_eq!(ab, polygons_intersect(&wb, &wa));
        prop_assert_eq!(ab, brute_force_overlap(&wa, &wb));
    }

    #[test]
    fn se2_distance_is_a_metric(a in pose(2.0), b in pose(2.0), c in pose(2.0), w in 0.0f64..2.0) {
        prop_assert_eq!(se2_distance(&a, &a, w), 0.0);
        let ab = se2_distance(&a, &b, w);
        prop_assert!((ab - se2_distance(&b, &a, w)).abs() <= 1e-12);
        prop_assert!(ab <= se2_distance(&a, &c, w) + se2_distance(&c, &b, w) + 1e-12);
    }

    #[test]
    fn transform_preserves_lengths_and_area((angles, rx, ry) in shape(), p in pose(5.0)) {
        let poly = ellipse_polygon(&angles, rx, ry);
        prop_assume!(poly.is_some());
        let poly = poly.unwrap();
        let world = transform_polygon(&poly, &p);
        for (l, w) in edge_lengths(poly.vertices()).iter().zip(edge_lengths(&world)) {
            prop_assert!((l - w).abs() <= 1e-9);
        }
        prop_assert!((polygon_area(&world) - poly.area()).abs() <= 1e-9);
    }
}
