use crate::geometry::{nearest_segment, SegmentSet};
use crate::linalg::Point;

/// Exact nearest segment by linear scan; ties go to the lowest id.
pub fn brute_force_nn(set: &SegmentSet, q: &Point) -> (usize, f64) {
    nearest_segment(q, &set.segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_segment_dist;
    use crate::workbench::gen_random;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_parallel() {
        let set = SegmentSet::new(
            vec![
                (Point::new(&[0.0, 0.0]), Point::new(&[10.0, 0.0])),
                (Point::new(&[0.0, 2.0]), Point::new(&[10.0, 2.0])),
            ],
            false,
        )
        .unwrap();
        let (id, d) = brute_force_nn(&set, &Point::new(&[5.0, 0.4]));
        assert_eq!(id, 0);
        assert!((d - 0.4).abs() < 1e-15);
        let (id, d) = brute_force_nn(&set, &Point::new(&[5.0, 1.0]));
        assert_eq!((id, d), (0, 1.0));
        assert_eq!(brute_force_nn(&set, &Point::new(&[3.0, 2.0])), (1, 0.0));
    }

    #[test]
    fn order_independent() {
        let set = gen_random(20, 3, 5, 0.01, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut order: Vec<usize> = (0..set.len()).collect();
        for _ in 0..500 {
            let q = Point::new(&[rng.random(), rng.random(), rng.random()]);
            order.shuffle(&mut rng);
            let mut best = (usize::MAX, f64::INFINITY);
            for &i in &order {
                let d = point_segment_dist(&q, &set.segments[i]);
                if d < best.1 || (d == best.1 && i < best.0) {
                    best = (i, d);
                }
            }
            assert_eq!(brute_force_nn(&set, &q), best);
        }
    }
}
