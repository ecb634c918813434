use super::{AvdDag, NodeKind, QueryResult};
use crate::config::TOL;
use crate::error::{check_dims, Result};
use crate::geometry::point_segment_dist;
use crate::linalg::Point;

impl AvdDag {
    /// Descends from the lowest-id root containing `q`, always taking the
    /// lowest-id child whose outer ellipsoid contains `q`.
    ///
    /// Panics if the dimension of `q` differs from the structure's.
    pub fn query(&self, q: &Point) -> QueryResult {
        self.try_query(q).expect("query dimension mismatch")
    }

    pub fn try_query(&self, q: &Point) -> Result<QueryResult> {
        check_dims(self.dim(), q.dim())?;
        if !self.domain.contains(q) {
            return Ok(self.answer(0, 0, true, q));
        }
        let inside = |id: usize| self.nodes[id].outer.form(q) <= 1.0 + TOL.membership;
        let Some(mut cur) = self.roots.iter().copied().find(|&r| inside(r)) else {
            let all: Vec<usize> = (0..self.nodes.len()).collect();
            let leaf = self.nearest_final(&all, q);
            return Ok(self.answer(leaf.map_or(0, |l| self.rep(l)), 0, true, q));
        };
        let mut path = 1;
        loop {
            let node = &self.nodes[cur];
            if node.kind == NodeKind::FinalLeaf {
                return Ok(self.answer(self.rep(cur), path, false, q));
            }
            match node.children.iter().copied().find(|&c| inside(c)) {
                Some(c) => {
                    cur = c;
                    path += 1;
                }
                None => {
                    let below = self.descendants(cur);
                    let leaf = self.nearest_final(&below, q);
                    let seg = leaf.map_or_else(|| self.segments.nearest(&node.center).0, |l| self.rep(l));
                    return Ok(self.answer(seg, path, true, q));
                }
            }
        }
    }

    fn rep(&self, id: usize) -> usize {
        self.nodes[id].representative.unwrap_or(0)
    }

    fn answer(&self, segment: usize, path_length: usize, fallback: bool, q: &Point) -> QueryResult {
        QueryResult {
            segment,
            distance: point_segment_dist(q, &self.segments.segments[segment]),
            path_length,
            fallback,
        }
    }

    /// All nodes reachable from `start`, in increasing id order.
    pub fn descendants(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(id) = stack.pop() {
            for &c in &self.nodes[id].children {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).collect()
    }

    fn nearest_final(&self, ids: &[usize], q: &Point) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &id in ids {
            let n = &self.nodes[id];
            if n.kind != NodeKind::FinalLeaf {
                continue;
            }
            let d = n.center.dist_sq(q);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, id));
            }
        }
        best.map(|(_, id)| id)
    }
}
