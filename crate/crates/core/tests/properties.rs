//! Property tests for the invariants of the geometric primitives, capsules,
//! ellipsoids and the built structure.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use segavd::avd::{self, BuildConfig};
use segavd::capsule::{build_capsule, ScaleConstants};
use segavd::ellipsoid::{ellipsoids_disjoint, inscribed_ellipsoid, Ellipsoid};
use segavd::geometry::{
    domain_ball, dist_segment_segment, local_feature_size, point_segment, Segment, SegmentSet,
};
use segavd::linalg::{Mat, Point};
use segavd::tensors::{blended_tensor, distance_triple, hessian_line, local_tensor};
use segavd::workbench::{brute_force_nn, gen_random};

fn point(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0..2.0f64, d).prop_map(|v| Point::new(&v))
}

fn segment(d: usize) -> impl Strategy<Value = Segment> {
    (point(d), point(d))
        .prop_filter("nonzero length", |(a, b)| a.dist(b) > 1e-3)
        .prop_map(|(a, b)| Segment::new(a, b, 0))
}

fn dim_point_segment() -> impl Strategy<Value = (Point, Segment)> {
    (2usize..=4).prop_flat_map(|d| (point(d), segment(d)))
}

fn instance() -> impl Strategy<Value = SegmentSet> {
    (2usize..6, 2usize..=3, any::<u64>()).prop_map(|(n, d, seed)| gen_random(n, d, seed, 0.02, None).unwrap())
}

fn sampled_min(q: &Point, s: &Segment, steps: usize) -> f64 {
    (0..=steps)
        .map(|k| q.dist(&s.at(k as f64 / steps as f64)))
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn point_segment_distance_matches_dense_sampling((q, s) in dim_point_segment()) {
        let foot = point_segment(&q, &s);
        let sampled = sampled_min(&q, &s, 2000);
        prop_assert!(foot.dist <= sampled + 1e-12);
        // The sampled minimum is within half a step of the true one.
        prop_assert!(sampled - foot.dist <= s.length() / 2000.0 + 1e-12);
        prop_assert!((q.dist(&foot.point) - foot.dist).abs() < 1e-9);
    }

    #[test]
    fn segment_distance_is_symmetric_and_below_endpoint_distances(
        (s1, s2) in (2usize..=3).prop_flat_map(|d| (segment(d), segment(d)))
    ) {
        let d12 = dist_segment_segment(&s1, &s2);
        let d21 = dist_segment_segment(&s2, &s1);
        prop_assert!((d12 - d21).abs() < 1e-12);
        prop_assert!(d12 >= 0.0);
        for p in [s1.a, s1.b] {
            prop_assert!(d12 <= point_segment(&p, &s2).dist + 1e-12);
        }
        let sampled = (0..=200)
            .map(|k| sampled_min(&s1.at(k as f64 / 200.0), &s2, 200))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(d12 <= sampled + 1e-12);
    }

    #[test]
    fn distance_triple_is_ordered((x, s) in dim_point_segment()) {
        let t = distance_triple(&x, &s);
        prop_assert!(t.d_line <= t.d_seg * (1.0 + 1e-12) + 1e-15);
        prop_assert!(t.d_seg <= t.d_endpoint * (1.0 + 1e-12) + 1e-15);
        let dist = point_segment(&x, &s).dist;
        prop_assert!((t.d_seg - 0.5 * dist * dist).abs() <= 1e-12 * (1.0 + t.d_seg));
        let other = if t.interior_foot { t.d_line } else { t.d_endpoint };
        prop_assert!((t.d_seg - other).abs() <= 1e-9 * (1.0 + t.d_seg));
    }

    #[test]
    fn local_tensor_spectrum((x, s) in dim_point_segment()) {
        prop_assume!(point_segment(&x, &s).dist > 1e-3);
        let h = local_tensor(&x, &s).unwrap();
        let v = h.axis.unwrap();
        let hv = h.matrix.mul_vec(&v);
        prop_assert!((hv - v * h.eigen_small).norm() <= 1e-9 * h.eigen_large);
        // Any direction orthogonal to the axis has the large eigenvalue.
        let d = x.dim();
        let mut w = Point::unit(d, if v[0].abs() < 0.9 { 0 } else { 1 });
        w = w - v * w.dot(&v);
        let w = w.normalized().unwrap();
        let hw = h.matrix.mul_vec(&w);
        prop_assert!((hw - w * h.eigen_large).norm() <= 1e-9 * h.eigen_large);
        prop_assert!(h.eigen_small <= h.eigen_large * (1.0 + 1e-12));
    }

    #[test]
    fn line_hessian_is_a_projector(v in (2usize..=4).prop_flat_map(point)) {
        prop_assume!(v.norm() > 1e-3);
        let v = v.normalized().unwrap();
        let p = hessian_line(&v).unwrap();
        prop_assert!(p.mul(&p).max_abs_diff(&p) < 1e-12);
        prop_assert!(p.max_abs_diff(&p.transpose()) < 1e-15);
        prop_assert!((p.trace() - (v.dim() as f64 - 1.0)).abs() < 1e-12);
        prop_assert!(p.mul_vec(&v).norm() < 1e-12);
    }

    #[test]
    fn blended_tensor_of_one_segment_is_its_local_tensor((x, s) in dim_point_segment()) {
        prop_assume!(point_segment(&x, &s).dist > 1e-3);
        let set = SegmentSet::new(vec![(s.a, s.b)], false).unwrap();
        let b = blended_tensor(&x, &set).unwrap();
        let h = local_tensor(&x, &s).unwrap();
        prop_assert!(b.max_abs_diff(&h.matrix) <= 1e-12 * h.eigen_large);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lfs_is_one_lipschitz(set in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = Ellipsoid::ball(Point::new(&vec![0.5; set.dim]), 1.5);
        for _ in 0..50 {
            let (x, y) = (ball.sample_interior(&mut rng), ball.sample_interior(&mut rng));
            let fx = local_feature_size(&x, &set).unwrap().value;
            let fy = local_feature_size(&y, &set).unwrap().value;
            prop_assert!((fx - fy).abs() <= x.dist(&y) + 1e-9);
        }
    }

    #[test]
    fn domain_ball_contains_endpoints(set in instance(), eps in 0.05..2.0f64) {
        let b = domain_ball(&set, eps).unwrap();
        prop_assert!((b.radius - (1.0 + 2.0 / eps) * b.inner_radius).abs() <= 1e-12 * b.radius);
        for p in set.endpoints() {
            prop_assert!(p.dist(&b.center) <= b.inner_radius * (1.0 + 1e-9));
        }
    }

    #[test]
    fn capsule_is_symmetric_and_homogeneous(set in instance(), seed in any::<u64>(), rscale in 0.1..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let around = Ellipsoid::ball(Point::new(&vec![0.5; set.dim]), 1.0);
        let x = around.sample_interior(&mut rng);
        let phi = local_feature_size(&x, &set).unwrap().value;
        let cap = build_capsule(&set, &x, rscale * phi).unwrap();
        prop_assert!(cap.constraints.len() <= 2 * set.len());
        prop_assert!(cap.contains(&x, 1e-9));
        for _ in 0..30 {
            let w = Ellipsoid::ball(Point::zeros(set.dim), 2.0 * cap.bounding_radius()).sample_interior(&mut rng);
            let (g1, g2) = (cap.gauge(&(x + w)), cap.gauge(&(x - w)));
            prop_assert!((g1 - g2).abs() <= 1e-12 * (1.0 + g1));
            let t = 0.37;
            prop_assert!((cap.gauge(&(x + w * t)) - t * g1).abs() <= 1e-12 * (1.0 + g1));
        }
    }

    #[test]
    fn inscribed_ellipsoid_lies_in_the_shrunken_capsule(set in instance(), seed in any::<u64>(), lambda in 0.1..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let around = Ellipsoid::ball(Point::new(&vec![0.5; set.dim]), 1.0);
        let x = around.sample_interior(&mut rng);
        let phi = local_feature_size(&x, &set).unwrap().value;
        let cap = build_capsule(&set, &x, phi).unwrap();
        let e = inscribed_ellipsoid(&cap, lambda);
        prop_assert!(e.center.dist(&x) < 1e-15);
        for _ in 0..200 {
            let z = e.sample_boundary(&mut rng);
            prop_assert!(cap.gauge(&z) <= lambda * (1.0 + 1e-9));
        }
        let c = ScaleConstants::for_dim(set.dim);
        prop_assert!(0.0 < c.lambda_double_prime && c.lambda_double_prime < c.lambda_prime && c.lambda_prime < 1.0);
    }

    #[test]
    fn ellipsoid_scaling_and_disjointness(
        (c1, c2) in (point(2), point(2)),
        (a, b, th) in (0.1..2.0f64, 0.1..2.0f64, 0.0..3.14f64),
        lambda in 0.1..3.0f64,
        seed in any::<u64>(),
    ) {
        let rot = Mat::from_rows(&[vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]]).unwrap();
        let shape = rot.mul(&Mat::diag(&[1.0 / (a * a), 1.0 / (b * b)])).mul(&rot.transpose());
        let e1 = Ellipsoid::new(c1, shape);
        let e2 = Ellipsoid::new(c2, Mat::diag(&[1.0 / (b * b), 1.0 / (a * a)]));
        let s = e1.scaled(lambda);
        for (x, y) in e1.semi_axes().iter().zip(s.semi_axes()) {
            prop_assert!((x * lambda - y).abs() <= 1e-12 * y);
        }
        let dis = ellipsoids_disjoint(&e1, &e2);
        prop_assert_eq!(dis, ellipsoids_disjoint(&e2, &e1));
        if dis {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                prop_assert!(!e2.contains(&e1.sample_interior(&mut rng)));
            }
        }
        if e1.contains(&c2) {
            prop_assert!(!dis);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn structure_answers_within_one_plus_epsilon(
        n in 1usize..5, seed in 0u64..1000, eps in prop::sample::select(vec![1.0, 0.5])
    ) {
        let set = gen_random(n, 2, seed, 0.05, None).unwrap();
        let cfg = BuildConfig { root_samples: 200, node_samples: 2, ..BuildConfig::with_seed(seed) };
        let dag = avd::build(&set, eps, &cfg).unwrap();
        let ball = Ellipsoid::ball(dag.domain.center, 1.2 * dag.domain.radius);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..300 {
            let q = ball.sample_interior(&mut rng);
            let got = dag.query(&q);
            let best = brute_force_nn(&set, &q).1;
            prop_assert!(got.distance <= (1.0 + eps) * best + 1e-9);
            prop_assert!((got.distance - point_segment(&q, &set.segments[got.segment]).dist).abs() < 1e-12);
            prop_assert_eq!(got.fallback, !dag.domain.contains(&q));
        }
        let text = avd::serialize(&dag);
        let back = avd::deserialize(&text).unwrap();
        prop_assert_eq!(&back.stats, &dag.stats);
        prop_assert_eq!(avd::serialize(&back), text);
    }
}
