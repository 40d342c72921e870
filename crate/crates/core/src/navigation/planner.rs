//! A* over the 8-connected occupancy grid.
//!
//! Path costs live in ℤ[√2]: a cost is `straight + diagonal·√2` held as two counts, so
//! comparisons are exact and the optimality check against an oracle needs no tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::Occupancy;
use crate::raster::{Cell, Raster};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathCost {
    pub straight: u64,
    pub diagonal: u64,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost {
        straight: 0,
        diagonal: 0,
    };

    pub fn new(straight: u64, diagonal: u64) -> Self {
        Self { straight, diagonal }
    }

    pub fn to_f64(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self::new(self.straight, self.diagonal + 1)
        } else {
            Self::new(self.straight + 1, self.diagonal)
        }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.straight + o.straight, self.diagonal + o.diagonal)
    }

    /// Octile distance between two cells.
    pub fn octile(a: Cell, b: Cell) -> Self {
        let dr = a.0.abs_diff(b.0) as u64;
        let dc = a.1.abs_diff(b.1) as u64;
        let d = dr.min(dc);
        Self::new(dr.max(dc) - d, d)
    }
}

impl Ord for PathCost {
    fn cmp(&self, o: &Self) -> Ordering {
        // Sign of (a1 − a2) + (b1 − b2)·√2.
        let a = self.straight as i128 - o.straight as i128;
        let b = self.diagonal as i128 - o.diagonal as i128;
        match (a.signum(), b.signum()) {
            (x, y) if x >= 0 && y >= 0 => (a + b).cmp(&0),
            (x, y) if x <= 0 && y <= 0 => (a + b).cmp(&0),
            // Opposite signs: compare a² with 2b².
            (x, _) => {
                let lhs = a * a;
                let rhs = 2 * b * b;
                if x > 0 {
                    lhs.cmp(&rhs)
                } else {
                    rhs.cmp(&lhs)
                }
            }
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const OFFSETS: [(i64, i64); 8] = [
    (-1, 0),
    (0, 1),
    (1, 0),
    (0, -1),
    (-1, 1),
    (1, 1),
    (1, -1),
    (-1, -1),
];

/// Traversable neighbors of `cell` and whether each move is diagonal. Diagonal moves need
/// both orthogonally adjacent cells free.
pub fn neighbors(occ: &Occupancy, cell: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
    let (r, c) = (cell.0 as i64, cell.1 as i64);
    OFFSETS.iter().filter_map(move |&(dr, dc)| {
        let (nr, nc) = (r + dr, c + dc);
        if !occ.is_traversable_i(nr, nc) {
            return None;
        }
        let diag = dr != 0 && dc != 0;
        if diag && !(occ.is_traversable_i(r + dr, c) && occ.is_traversable_i(r, c + dc)) {
            return None;
        }
        Some(((nr as usize, nc as usize), diag))
    })
}

/// Whether `a → b` is a single legal move (or no move).
pub fn is_legal_step(occ: &Occupancy, a: Cell, b: Cell) -> bool {
    a == b || neighbors(occ, a).any(|(n, _)| n == b)
}

pub fn path_cost(path: &[Cell]) -> PathCost {
    path.windows(2).fold(PathCost::ZERO, |acc, w| {
        acc.step(w[0].0 != w[1].0 && w[0].1 != w[1].1)
    })
}

#[derive(PartialEq, Eq)]
struct Open {
    f: PathCost,
    h: PathCost,
    cell: Cell,
}

impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        // Min-heap on f, then h, then cell for determinism.
        o.f.cmp(&self.f)
            .then_with(|| o.h.cmp(&self.h))
            .then_with(|| o.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Minimal-cost path from `start` to `goal`, both inclusive.
pub fn plan_path(start: Cell, goal: Cell, occ: &Occupancy) -> Result<Vec<Cell>> {
    if !occ.is_traversable(start) {
        return Err(Error::invalid("path start", format!("{start:?} is not traversable")));
    }
    if !occ.is_traversable(goal) {
        return Err(Error::Unreachable(format!("goal {goal:?} is not traversable")));
    }
    let (h, w) = occ.dims();
    let mut g: Raster<Option<PathCost>> = Raster::filled(h, w, None);
    let mut parent: Raster<Option<Cell>> = Raster::filled(h, w, None);
    let mut closed = Raster::filled(h, w, false);
    let mut open = BinaryHeap::new();
    g[start] = Some(PathCost::ZERO);
    let h0 = PathCost::octile(start, goal);
    open.push(Open {
        f: h0,
        h: h0,
        cell: start,
    });
    while let Some(Open { cell, .. }) = open.pop() {
        if closed[cell] {
            continue;
        }
        if cell == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while let Some(p) = parent[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok(path);
        }
        closed[cell] = true;
        let gc = g[cell].expect("opened cells have a cost");
        for (n, diag) in neighbors(occ, cell) {
            if closed[n] {
                continue;
            }
            let cand = gc.step(diag);
            if g[n].is_none_or(|old| cand < old) {
                g[n] = Some(cand);
                parent[n] = Some(cell);
                let hn = PathCost::octile(n, goal);
                open.push(Open {
                    f: cand.add(hn),
                    h: hn,
                    cell: n,
                });
            }
        }
    }
    Err(Error::Unreachable(format!("no path from {start:?} to {goal:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn open(h: usize, w: usize) -> Occupancy {
        Occupancy::from_blocked(Raster::filled(h, w, false))
    }

    #[test]
    fn exact_cost_order() {
        // 3 vs 2√2 ≈ 2.83
        assert!(PathCost::new(3, 0) > PathCost::new(0, 2));
        // 1 + √2 ≈ 2.41 vs 2.5? use 5 straight vs 1 + 3√2 ≈ 5.24
        assert!(PathCost::new(5, 0) < PathCost::new(1, 3));
        assert_eq!(PathCost::new(2, 1).cmp(&PathCost::new(2, 1)), Ordering::Equal);
        assert!(PathCost::new(0, 1) < PathCost::new(2, 0));
        assert!(PathCost::new(0, 1) > PathCost::new(1, 0));
    }

    proptest! {
        #[test]
        fn cost_order_agrees_with_float(a in 0u64..10_000, b in 0u64..10_000, c in 0u64..10_000, d in 0u64..10_000) {
            let (x, y) = (PathCost::new(a, b), PathCost::new(c, d));
            let (fx, fy) = (x.to_f64(), y.to_f64());
            // √2 is irrational, so equality only when both counts agree.
            if (a, b) == (c, d) {
                prop_assert_eq!(x.cmp(&y), Ordering::Equal);
            } else if (fx - fy).abs() > 1e-6 {
                prop_assert_eq!(x.cmp(&y), fx.partial_cmp(&fy).unwrap());
            }
        }
    }

    #[test]
    fn trivial_paths() {
        let occ = open(10, 10);
        assert_eq!(plan_path((3, 3), (3, 3), &occ).unwrap(), vec![(3, 3)]);
        let p = plan_path((0, 0), (9, 9), &occ).unwrap();
        assert_eq!(path_cost(&p), PathCost::new(0, 9));
        assert_eq!(p.len(), 10);
    }

    #[test]
    fn wall_blocks() {
        let occ = Occupancy::from_blocked(Raster::from_fn(10, 10, |(_, c)| c == 5));
        assert!(matches!(plan_path((0, 0), (0, 9), &occ), Err(Error::Unreachable(_))));
    }

    #[test]
    fn no_corner_cutting() {
        let blocked = Raster::from_fn(3, 3, |c| c == (0, 1) || c == (1, 0));
        let occ = Occupancy::from_blocked(blocked);
        assert!(!is_legal_step(&occ, (0, 0), (1, 1)));
        assert!(plan_path((0, 0), (2, 2), &occ).is_err());
    }
}
