//! Supercritical path identification on the square lattice: right-hand wall
//! following for non-intersecting crossings and the alternating bridge
//! decomposition onto a brick-wall skeleton.
//!
//! Conventions: vertical paths run from `y = lo` to `y = hi` heading north
//! with the right hand on the east wall, so the first path is the
//! east-most; horizontal paths run from `x = lo` to `x = hi` heading east
//! with the right hand on the south wall, so the first path is the
//! south-most.

use serde::{Deserialize, Serialize};

use super::skeleton::{brick_wall, failure, Skeleton, Thread};
use crate::error::{domain, Result};
use crate::graph::Vertex;
use crate::lattice::{LatticeKind, SiteId};
use crate::percolation::PercolationSample;

fn check_square(sample: &PercolationSample) -> Result<()> {
    let lat = sample.lattice();
    if lat.kind() != LatticeKind::Square || lat.ndim() != 2 {
        return domain("wall following needs a two-dimensional square lattice");
    }
    Ok(())
}

/// Successive crossings along `axis` (0: left to right, 1: bottom to top),
/// each avoiding all sites within lattice distance `min_gap − 1` of the
/// previous ones.
#[derive(Debug, Clone)]
pub struct WallFollower<'a> {
    sample: &'a PercolationSample,
    axis: usize,
    min_gap: usize,
    blocked: Vec<bool>,
}

impl<'a> WallFollower<'a> {
    pub fn new(sample: &'a PercolationSample, axis: usize, min_gap: usize) -> Result<Self> {
        check_square(sample)?;
        if axis > 1 || min_gap == 0 {
            return domain(format!("invalid wall follower axis {axis} or gap {min_gap}"));
        }
        let n = sample.lattice().num_sites();
        Ok(WallFollower { sample, axis, min_gap, blocked: vec![false; n] })
    }

    /// Treats `path` as the wall for the next search.
    pub fn block(&mut self, path: &[SiteId]) {
        let lat = self.sample.lattice();
        let r = self.min_gap as i64 - 1;
        for &s in path {
            let c = lat.coord(s);
            for dx in -r..=r {
                let rem = r - dx.abs();
                for dy in -rem..=rem {
                    if let Some(t) = lat.site_at(&[c[0] + dx, c[1] + dy]) {
                        self.blocked[t as usize] = true;
                    }
                }
            }
        }
    }

    /// Right-most crossing relative to the current wall, found by depth-first
    /// search trying right turn, straight on and left turn in that order.
    pub fn next_path(&mut self) -> Option<Vec<SiteId>> {
        let lat = self.sample.lattice();
        let b = lat.bounds();
        let (a, o) = (self.axis, 1 - self.axis);
        let heading: [i64; 2] = if a == 1 { [0, 1] } else { [1, 0] };
        let mut starts: Vec<i64> = (b.lo[o]..=b.hi[o]).collect();
        if a == 1 {
            starts.reverse();
        }
        let mut seen = vec![false; lat.num_sites()];
        let usable = |s: SiteId, seen: &[bool]| !seen[s as usize] && !self.blocked[s as usize] && self.sample.is_occupied(s);
        for t in starts {
            let mut c = [0i64; 2];
            c[a] = b.lo[a];
            c[o] = t;
            let s = lat.site_at(&c).expect("square lattice is full");
            if !usable(s, &seen) {
                continue;
            }
            seen[s as usize] = true;
            let mut stack: Vec<(SiteId, [i64; 2], u8)> = vec![(s, heading, 0)];
            if b.lo[a] == b.hi[a] {
                return Some(vec![s]);
            }
            while let Some(top) = stack.last_mut() {
                let (v, h, k) = *top;
                if k == 3 {
                    stack.pop();
                    continue;
                }
                top.2 += 1;
                let dir = match k {
                    0 => [h[1], -h[0]],
                    1 => h,
                    _ => [-h[1], h[0]],
                };
                let cv = lat.coord(v);
                let Some(w) = lat.site_at(&[cv[0] + dir[0], cv[1] + dir[1]]) else { continue };
                if !usable(w, &seen) || !self.sample.conducts(lat.bond_between(v, w).unwrap()) {
                    continue;
                }
                seen[w as usize] = true;
                stack.push((w, dir, 0));
                if lat.coord(w)[a] == b.hi[a] {
                    return Some(stack.iter().map(|e| e.0).collect());
                }
            }
        }
        None
    }
}

impl Iterator for WallFollower<'_> {
    type Item = Vec<SiteId>;

    fn next(&mut self) -> Option<Vec<SiteId>> {
        let p = self.next_path()?;
        self.block(&p);
        Some(p)
    }
}

/// One wall-follower step: the right-most crossing along `axis` keeping at
/// least `min_gap` lattice distance from `previous` (or hugging the
/// boundary when there is none).
pub fn wall_follower(
    sample: &PercolationSample,
    axis: usize,
    previous: Option<&[SiteId]>,
    min_gap: usize,
) -> Result<Option<Vec<SiteId>>> {
    let mut w = WallFollower::new(sample, axis, min_gap)?;
    if let Some(p) = previous {
        w.block(p);
    }
    Ok(w.next_path())
}

/// Vertical paths (every third wall-follower path, first one included) and
/// horizontal paths (2-local, gap 3), each ordered west to east and south
/// to north respectively.
pub fn find_paths(sample: &PercolationSample) -> Result<(Vec<Vec<SiteId>>, Vec<Vec<SiteId>>)> {
    let horizontal: Vec<_> = WallFollower::new(sample, 0, 3)?.collect();
    let mut vertical: Vec<_> = WallFollower::new(sample, 1, 1)?.step_by(3).collect();
    vertical.reverse();
    Ok((horizontal, vertical))
}

/// Kept vertical segment between horizontal paths `row` and `row + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bridge {
    pub row: usize,
    pub col: usize,
    pub path: Vec<SiteId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePlan {
    pub bridges: Vec<Bridge>,
    pub skeleton: Skeleton,
}

/// Cuts the first `l` vertical paths into segments between neighboring
/// horizontal paths and keeps segment `(row, col)` iff `row + col` is even,
/// which yields an `l × l` brick wall. Junctions are the segment ends on
/// the horizontal paths; junctions of degree 2 sit halfway between their
/// neighbors.
pub fn bridge_decompose(horizontal: &[Vec<SiteId>], vertical: &[Vec<SiteId>], l: usize) -> Result<BridgePlan> {
    if l == 0 || horizontal.len() < l || vertical.len() < l {
        return failure(
            "bridge_decompose",
            format!("need {l} paths per direction, found {} horizontal and {} vertical", horizontal.len(), vertical.len()),
        );
    }
    let rows: Vec<std::collections::HashMap<SiteId, usize>> =
        horizontal[..l].iter().map(|h| h.iter().enumerate().map(|(i, &s)| (s, i)).collect()).collect();
    let mut bridges = Vec::new();
    // position on its row of each junction
    let mut pos: Vec<Vec<Option<usize>>> = vec![vec![None; l]; l];
    for (col, v) in vertical[..l].iter().enumerate() {
        for row in (col % 2..l.saturating_sub(1)).step_by(2) {
            let top = v.iter().position(|s| rows[row + 1].contains_key(s));
            let bottom = top.and_then(|t| v[..t].iter().rposition(|s| rows[row].contains_key(s)));
            let (Some(t), Some(b)) = (top, bottom) else {
                return failure("bridge_decompose", format!("vertical path {col} does not cross rows {row} and {}", row + 1));
            };
            pos[row][col] = Some(rows[row][&v[b]]);
            pos[row + 1][col] = Some(rows[row + 1][&v[t]]);
            bridges.push(Bridge { row, col, path: v[b..=t].to_vec() });
        }
    }
    let mut branch = vec![0 as Vertex; l * l];
    let mut threads = Vec::new();
    for row in 0..l {
        let h = &horizontal[row];
        let p = fill_positions(&pos[row], h.len()).ok_or_else(|| {
            crate::Error::Extraction { stage: "bridge_decompose".into(), detail: format!("junctions out of order on row {row}") }
        })?;
        for col in 0..l {
            branch[row * l + col] = h[p[col]];
            if col + 1 < l {
                let ends = [(row * l + col) as u32, (row * l + col + 1) as u32];
                threads.push(Thread { ends, path: h[p[col]..=p[col + 1]].to_vec() });
            }
        }
    }
    for b in &bridges {
        let ends = [(b.row * l + b.col) as u32, ((b.row + 1) * l + b.col) as u32];
        threads.push(Thread { ends, path: b.path.clone() });
    }
    Ok(BridgePlan { bridges, skeleton: Skeleton { target: brick_wall(l, l), branch, threads } })
}

/// Completes junction positions along a row: free junctions go halfway
/// between their fixed neighbors (row ends at the path ends). `None` unless
/// the result is strictly increasing.
fn fill_positions(fixed: &[Option<usize>], len: usize) -> Option<Vec<usize>> {
    let n = fixed.len();
    let mut out = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if let Some(p) = fixed[i] {
            out[i] = p;
            i += 1;
            continue;
        }
        let j = (i..n).find(|&j| fixed[j].is_some()).unwrap_or(n);
        // free run i..j between anchors
        let a = if i == 0 { 0 } else { out[i - 1] as i64 };
        let b = if j == n { len as i64 - 1 } else { fixed[j].unwrap() as i64 };
        let slots = (j - i) as i64;
        for k in 0..slots {
            out[i + k as usize] = (a + (b - a) * (k + 1) / (slots + 1)) as usize;
        }
        i = j;
    }
    out.windows(2).all(|w| w[0] < w[1]).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use std::collections::HashSet;
    use std::sync::Arc;

    fn closed(n: usize) -> (Arc<Lattice>, PercolationSample) {
        let lat = Arc::new(Lattice::square(&[n, n]));
        let s = PercolationSample::from_parts(&lat, vec![false; lat.num_bonds()], vec![true; lat.num_sites()]).unwrap();
        (lat, s)
    }

    fn column(lat: &Lattice, x: i64, n: i64) -> Vec<SiteId> {
        (1..=n).map(|y| lat.site_at(&[x, y]).unwrap()).collect()
    }

    #[test]
    fn full_lattice_hugs_the_wall() {
        let lat = Arc::new(Lattice::square(&[5, 5]));
        let s = PercolationSample::full(&lat);
        let p = wall_follower(&s, 1, None, 1).unwrap().unwrap();
        assert_eq!(p, column(&lat, 5, 5));
        let next = wall_follower(&s, 1, Some(&p), 1).unwrap().unwrap();
        assert_eq!(next, column(&lat, 4, 5));
        let h = wall_follower(&s, 0, None, 3).unwrap().unwrap();
        assert!(h.iter().all(|&x| lat.coord(x)[1] == 1));
    }

    #[test]
    fn closed_lattice_has_no_path() {
        let (_, s) = closed(5);
        assert_eq!(wall_follower(&s, 0, None, 1).unwrap(), None);
    }

    #[test]
    fn engineered_paths_found_right_to_left() {
        let (lat, mut s) = closed(7);
        s.open_path(&column(&lat, 2, 7)).unwrap();
        s.open_path(&column(&lat, 6, 7)).unwrap();
        let all: Vec<_> = WallFollower::new(&s, 1, 1).unwrap().collect();
        assert_eq!(all, vec![column(&lat, 6, 7), column(&lat, 2, 7)]);
        // a gap of 5 excludes x = 2 after x = 6
        let gapped: Vec<_> = WallFollower::new(&s, 1, 5).unwrap().collect();
        assert_eq!(gapped.len(), 1);
        let gapped: Vec<_> = WallFollower::new(&s, 1, 4).unwrap().collect();
        assert_eq!(gapped.len(), 2);
    }

    #[test]
    fn paths_are_disjoint_and_cross() {
        let lat = Arc::new(Lattice::square(&[24, 24]));
        let s = crate::percolation::sample(&lat, 0.75, 1.0, 5, 0).unwrap();
        for (axis, gap) in [(0, 3), (1, 1)] {
            let paths: Vec<_> = WallFollower::new(&s, axis, gap).unwrap().collect();
            assert!(!paths.is_empty());
            let mut seen = HashSet::new();
            for p in &paths {
                assert_eq!(lat.coord(p[0])[axis], 1);
                assert_eq!(lat.coord(*p.last().unwrap())[axis], 24);
                for w in p.windows(2) {
                    assert!(s.conducts(lat.bond_between(w[0], w[1]).unwrap()));
                }
                assert!(p.iter().all(|x| seen.insert(*x)));
            }
        }
    }

    #[test]
    fn ideal_grid_bridges() {
        let lat = Arc::new(Lattice::square(&[9, 9]));
        let rows: Vec<Vec<SiteId>> = [2, 5, 8].iter().map(|&y| (1..=9).map(|x| lat.site_at(&[x, y]).unwrap()).collect()).collect();
        let cols: Vec<Vec<SiteId>> = [2, 5, 8].iter().map(|&x| column(&lat, x, 9)).collect();
        let plan = bridge_decompose(&rows, &cols, 3).unwrap();
        let kept: Vec<(usize, usize)> = plan.bridges.iter().map(|b| (b.row, b.col)).collect();
        assert_eq!(kept, vec![(0, 0), (1, 1), (0, 2)]);
        let s = PercolationSample::full(&lat);
        plan.skeleton.validate(&super::super::sample_graph(&s)).unwrap();
        assert!(bridge_decompose(&rows, &[], 3).is_err());
        assert!(bridge_decompose(&rows[..2], &cols, 3).is_err());
    }

    #[test]
    fn positions_fill_between_anchors() {
        assert_eq!(fill_positions(&[None, Some(4), None], 9), Some(vec![2, 4, 6]));
        assert_eq!(fill_positions(&[Some(0), None, Some(1)], 9), None);
        assert_eq!(fill_positions(&[None, None], 5), Some(vec![1, 2]));
        assert_eq!(fill_positions(&[None, None], 2), None);
        assert_eq!(fill_positions(&[Some(5), Some(3)], 9), None);
    }
}
