use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{dist_segment_segment, Segment, SegmentSet};
use crate::linalg::Point;

const MAX_REJECTIONS: usize = 1_000_000;
const MAX_SPREAD_RETRIES: u64 = 200;

/// Seeded random disjoint segments in the unit cube `[0,1]^d`.
///
/// Each segment gets a uniform midpoint, a uniform direction and a length in
/// `[0.05, 0.35]`; it is rejected if it leaves the cube or comes closer than
/// `min_gap` to an accepted one. With `spread_band = Some((lo, hi))` whole
/// instances whose spread falls outside the band are redrawn.
pub fn gen_random(n: usize, d: usize, seed: u64, min_gap: f64, spread_band: Option<(f64, f64)>) -> Result<SegmentSet> {
    if n == 0 {
        return Err(Error::Usage("n must be at least 1".into()));
    }
    if !(2..=crate::linalg::MAX_DIM).contains(&d) {
        return Err(Error::Usage(format!("dimension must lie in 2..={}", crate::linalg::MAX_DIM)));
    }
    if !(min_gap > 0.0) || !min_gap.is_finite() {
        return Err(Error::Usage("min_gap must be positive".into()));
    }
    if n >= 2 && min_gap >= (d as f64).sqrt() {
        return Err(Error::Generator(format!(
            "min_gap {min_gap} exceeds the cube diameter; no two segments fit"
        )));
    }
    for attempt in 0..MAX_SPREAD_RETRIES {
        let set = draw(n, d, seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9)), min_gap)?;
        match (spread_band, set.spread) {
            (Some((lo, hi)), Some(s)) if s < lo || s > hi => continue,
            _ => return Ok(set),
        }
    }
    Err(Error::Generator("no instance with spread inside the requested band".into()))
}

fn draw(n: usize, d: usize, seed: u64, min_gap: f64) -> Result<SegmentSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted: Vec<Segment> = Vec::with_capacity(n);
    let mut rejections = 0usize;
    while accepted.len() < n {
        let mid: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mid = Point::new(&mid);
        let dir = crate::ellipsoid::random_unit(d, &mut rng);
        let len = rng.random_range(0.05..0.35);
        let a = mid.offset(&dir, -0.5 * len);
        let b = mid.offset(&dir, 0.5 * len);
        let in_cube = |p: &Point| p.as_slice().iter().all(|&c| (0.0..=1.0).contains(&c));
        let cand = Segment::new(a, b, accepted.len());
        if in_cube(&a) && in_cube(&b) && accepted.iter().all(|s| dist_segment_segment(s, &cand) >= min_gap) {
            accepted.push(cand);
            continue;
        }
        rejections += 1;
        if rejections > MAX_REJECTIONS {
            return Err(Error::Generator(format!(
                "gave up after {MAX_REJECTIONS} rejections with {} of {n} segments placed",
                accepted.len()
            )));
        }
    }
    SegmentSet::new(accepted.into_iter().map(|s| (s.a, s.b)).collect(), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_gapped() {
        let a = gen_random(20, 2, 42, 0.01, None).unwrap();
        let b = gen_random(20, 2, 42, 0.01, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.min_gap.unwrap() >= 0.01);
        assert!(a.spread.unwrap() > 1.0);
        let c = gen_random(20, 2, 43, 0.01, None).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn single_and_infeasible() {
        let one = gen_random(1, 3, 1, 0.5, None).unwrap();
        assert_eq!(one.len(), 1);
        assert!(matches!(gen_random(2, 2, 1, 10.0, None), Err(Error::Generator(_))));
        assert!(matches!(gen_random(2, 2, 1, 0.0, None), Err(Error::Usage(_))));
    }

    #[test]
    fn spread_band_filter() {
        let set = gen_random(10, 2, 3, 0.01, Some((5.0, 60.0))).unwrap();
        let s = set.spread.unwrap();
        assert!((5.0..=60.0).contains(&s));
    }
}
