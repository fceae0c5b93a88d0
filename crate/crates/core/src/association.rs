//! Minimum-cost assignment and ID inheritance between consecutive frames.

use serde::{Deserialize, Serialize};

use crate::geometry::{iou, BoundingBox};
use crate::{Error, Result};

/// Dense `rows x cols` cost matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, costs: Vec<f64>) -> Result<CostMatrix> {
        if costs.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{}x{} cost matrix needs {} entries, got {}", rows, cols, rows * cols, costs.len())));
        }
        if costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::ShapeMismatch("cost matrix entries must be finite".into()));
        }
        Ok(CostMatrix { rows, cols, costs })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<CostMatrix> {
        let costs = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        CostMatrix::new(rows, cols, costs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.costs[r * self.cols + c]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment {
    /// Matched `(row, col)` pairs in increasing row order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
    pub total_cost: f64,
}

/// Exact minimum-cost assignment (shortest augmenting paths with potentials,
/// O(n^3)). Rectangular inputs are padded to square with a constant, so every
/// row or every column is matched.
pub fn hungarian(costs: &CostMatrix) -> Assignment {
    let (n_rows, n_cols) = (costs.rows, costs.cols);
    let n = n_rows.max(n_cols);
    if n == 0 {
        return Assignment::default();
    }
    let pad = costs.costs.iter().fold(0.0f64, |m, c| m.max(c.abs())) + 1.0;
    let cost = |r: usize, c: usize| if r < n_rows && c < n_cols { costs.get(r, c) } else { pad };

    // 1-based; row 0 / column 0 are sentinels
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        if col_owner[j] > 0 {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    let mut out = Assignment::default();
    let mut col_used = vec![false; n_cols];
    for (r, &c) in row_to_col.iter().enumerate().take(n_rows) {
        if c < n_cols {
            out.pairs.push((r, c));
            out.total_cost += costs.get(r, c);
            col_used[c] = true;
        } else {
            out.unmatched_rows.push(r);
        }
    }
    out.unmatched_cols = (0..n_cols).filter(|&c| !col_used[c]).collect();
    out
}

/// Monotonic object id source; ids start at 1 and are never reused.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdCounter {
    next: u64,
}

impl Default for IdCounter {
    fn default() -> Self {
        IdCounter { next: 1 }
    }
}

impl IdCounter {
    pub fn fresh(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// Gives fresh detections the ids of the previous frame's boxes they match.
///
/// The cost of a pair is `1 - IOU`; pairs below `gate_iou` or with different
/// classes are forbidden. Unmatched detections get new ids; unmatched previous
/// boxes simply end.
pub fn associate(prev: &[BoundingBox], curr: &[BoundingBox], gate_iou: f64, ids: &mut IdCounter) -> Vec<BoundingBox> {
    let allowed = |p: &BoundingBox, c: &BoundingBox| p.class_id == c.class_id && iou(&p.rect, &c.rect) >= gate_iou;
    // any forbidden pair outweighs every feasible total
    let forbidden = prev.len().min(curr.len()) as f64 + 1.0;
    let costs = CostMatrix::from_fn(prev.len(), curr.len(), |r, c| {
        if allowed(&prev[r], &curr[c]) {
            1.0 - iou(&prev[r].rect, &curr[c].rect)
        } else {
            forbidden
        }
    })
    .expect("costs are finite by construction");
    let assignment = hungarian(&costs);
    let mut inherited = vec![None; curr.len()];
    for &(r, c) in &assignment.pairs {
        if allowed(&prev[r], &curr[c]) {
            inherited[c] = prev[r].id;
        }
    }
    curr.iter()
        .zip(inherited)
        .map(|(b, id)| BoundingBox { id: Some(id.unwrap_or_else(|| ids.fresh())), ..*b })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..=p.len() {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Minimum over all injective maps from the smaller side to the larger.
    fn brute_force(m: &CostMatrix) -> f64 {
        let (r, c) = (m.rows(), m.cols());
        let n = r.max(c);
        permutations(n)
            .into_iter()
            .map(|p| (0..n).filter(|&i| i < r && p[i] < c).map(|i| m.get(i, p[i])).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn trivial_cases() {
        let a = hungarian(&CostMatrix::new(1, 1, vec![7.0]).unwrap());
        assert_eq!(a.pairs, vec![(0, 0)]);
        assert_eq!(a.total_cost, 7.0);
        let m = CostMatrix::from_fn(4, 4, |r, c| if r == c { 0.0 } else { 1.0 }).unwrap();
        let a = hungarian(&m);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(a.total_cost, 0.0);
        assert_eq!(hungarian(&CostMatrix::new(0, 3, vec![]).unwrap()).unmatched_cols, vec![0, 1, 2]);
        assert!(CostMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn random_5x5_equal_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let m = CostMatrix::from_fn(5, 5, |_, _| rng.random_range(0..20) as f64).unwrap();
            assert_eq!(hungarian(&m).total_cost, brute_force(&m));
        }
    }

    #[test]
    fn rectangular() {
        let m = CostMatrix::new(2, 3, vec![5.0, 1.0, 9.0, 2.0, 8.0, 0.5]).unwrap();
        let a = hungarian(&m);
        assert_eq!(a.pairs, vec![(0, 1), (1, 2)]);
        assert_eq!(a.unmatched_cols, vec![0]);
        let t = CostMatrix::new(3, 2, vec![5.0, 2.0, 1.0, 8.0, 9.0, 0.5]).unwrap();
        let a = hungarian(&t);
        assert_eq!(a.pairs, vec![(1, 0), (2, 1)]);
        assert_eq!(a.unmatched_rows, vec![0]);
    }

    proptest! {
        #[test]
        fn optimal_up_to_6(seed in 0u64..100_000, r in 1usize..7, c in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = CostMatrix::from_fn(r, c, |_, _| rng.random_range(-10..30) as f64).unwrap();
            let a = hungarian(&m);
            prop_assert_eq!(a.total_cost, brute_force(&m));
            prop_assert_eq!(a.pairs.len(), r.min(c));
            let mut rows: Vec<_> = a.pairs.iter().map(|p| p.0).chain(a.unmatched_rows.iter().copied()).collect();
            rows.sort();
            prop_assert_eq!(rows, (0..r).collect::<Vec<_>>());
            let mut cols: Vec<_> = a.pairs.iter().map(|p| p.1).chain(a.unmatched_cols.iter().copied()).collect();
            cols.sort();
            prop_assert_eq!(cols, (0..c).collect::<Vec<_>>());
        }

        #[test]
        fn scaling_keeps_pairs(seed in 0u64..100_000, n in 1usize..7, k in 1u32..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = CostMatrix::from_fn(n, n, |_, _| rng.random_range(0..50) as f64).unwrap();
            let scaled = CostMatrix::from_fn(n, n, |r, c| m.get(r, c) * k as f64).unwrap();
            prop_assert_eq!(hungarian(&m).pairs, hungarian(&scaled).pairs);
        }
    }

    fn bx(x: f64, y: f64, id: Option<u64>) -> BoundingBox {
        BoundingBox { rect: Rect::new(x, y, 10.0, 10.0).unwrap(), fid: 1, score: 0.9, id, class_id: 0 }
    }

    #[test]
    fn same_geometry_inherits() {
        let prev = vec![bx(0.0, 0.0, Some(4)), bx(30.0, 0.0, Some(9))];
        let curr = vec![bx(30.0, 0.0, None), bx(0.0, 0.0, None)];
        let mut ids = IdCounter { next: 10 };
        let out = associate(&prev, &curr, 0.3, &mut ids);
        assert_eq!(out.iter().map(|b| b.id.unwrap()).collect::<Vec<_>>(), vec![9, 4]);
        assert_eq!(ids.peek(), 10);
    }

    #[test]
    fn empty_prev_gets_sequential_ids() {
        let mut ids = IdCounter::default();
        let out = associate(&[], &[bx(0.0, 0.0, None), bx(50.0, 0.0, None), bx(90.0, 0.0, None)], 0.3, &mut ids);
        assert_eq!(out.iter().map(|b| b.id.unwrap()).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn crossed_overlaps_follow_min_total_cost() {
        // prev A overlaps both detections; prev B overlaps only the first
        let prev = vec![bx(0.0, 0.0, Some(1)), bx(4.0, 0.0, Some(2))];
        let curr = vec![bx(3.0, 0.0, None), bx(-2.0, 0.0, None)];
        let mut ids = IdCounter { next: 3 };
        let out = associate(&prev, &curr, 0.3, &mut ids);
        let cost = |p: &BoundingBox, c: &BoundingBox| 1.0 - iou(&p.rect, &c.rect);
        let straight = cost(&prev[0], &curr[0]) + cost(&prev[1], &curr[1]);
        let crossed = cost(&prev[0], &curr[1]) + cost(&prev[1], &curr[0]);
        let expect = if crossed < straight { vec![2, 1] } else { vec![1, 2] };
        assert_eq!(out.iter().map(|b| b.id.unwrap()).collect::<Vec<_>>(), expect);
    }

    #[test]
    fn gate_and_class_block_matches() {
        let prev = vec![bx(0.0, 0.0, Some(1)), BoundingBox { class_id: 2, ..bx(40.0, 0.0, Some(2)) }];
        let curr = vec![bx(8.0, 0.0, None), bx(40.0, 0.0, None)];
        let mut ids = IdCounter { next: 3 };
        let out = associate(&prev, &curr, 0.3, &mut ids);
        // iou((0..10),(8..18)) = 2/18 < 0.3; class differs for the second
        assert_eq!(out.iter().map(|b| b.id.unwrap()).collect::<Vec<_>>(), vec![3, 4]);
    }

    proptest! {
        #[test]
        fn ids_unique_within_frame(seed in 0u64..10_000, n in 0usize..8, m in 0usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ids = IdCounter::default();
            let prev: Vec<_> = (0..n).map(|_| bx(rng.random_range(0.0..40.0), rng.random_range(0.0..40.0), Some(ids.fresh()))).collect();
            let curr: Vec<_> = (0..m).map(|_| bx(rng.random_range(0.0..40.0), rng.random_range(0.0..40.0), None)).collect();
            let before = ids.peek();
            let out = associate(&prev, &curr, 0.3, &mut ids);
            let mut seen: Vec<u64> = out.iter().map(|b| b.id.unwrap()).collect();
            let fresh = seen.iter().filter(|&&i| i >= before).count() as u64;
            prop_assert_eq!(ids.peek(), before + fresh);
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), m);
        }
    }
}
