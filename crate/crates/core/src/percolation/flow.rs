//! Edge-disjoint crossings as a unit-capacity max-flow (Dinic).

use std::collections::VecDeque;

use crate::lattice::Region;

use super::sample::PercolationSample;

struct Dinic {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u32>,
    next: Vec<usize>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic { head: vec![NIL; n], to: vec![], cap: vec![], next: vec![], level: vec![0; n], iter: vec![0; n] }
    }

    fn arc(&mut self, u: usize, v: usize, c: u32) {
        self.to.push(v);
        self.cap.push(c);
        self.next.push(self.head[u]);
        self.head[u] = self.to.len() - 1;
    }

    /// Directed arc `u → v` with capacity `c` plus its residual twin.
    fn add(&mut self, u: usize, v: usize, c: u32) {
        self.arc(u, v, c);
        self.arc(v, u, 0);
    }

    /// Undirected unit edge: one arc each way, each the other's residual.
    fn add_undirected(&mut self, u: usize, v: usize) {
        self.arc(u, v, 1);
        self.arc(v, u, 1);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let mut e = self.head[u];
            while e != NIL {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
                e = self.next[e];
            }
        }
        self.level[t] >= 0
    }

    /// Iterative blocking-flow augmentation along one path.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut stack: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                for &e in &stack {
                    self.cap[e] -= 1;
                    self.cap[e ^ 1] += 1;
                }
                return true;
            }
            let mut advanced = false;
            while self.iter[u] != NIL {
                let e = self.iter[u];
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                    stack.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] = self.next[e];
            }
            if !advanced {
                self.level[u] = -1;
                match stack.pop() {
                    Some(e) => {
                        u = self.to[e ^ 1];
                        self.iter[u] = self.next[self.iter[u]];
                    }
                    None => return false,
                }
            }
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.clone_from(&self.head);
            while self.augment(s, t) {
                flow += 1;
            }
        }
        flow
    }
}

/// Maximum number of edge-disjoint open crossings of `region` along `axis`.
///
/// Every open bond between occupied sites of the region has unit capacity in
/// both directions; a virtual source feeds the lower face and the upper face
/// drains into a virtual sink.
pub fn count_edge_disjoint_crossings(sample: &PercolationSample, region: &Region, axis: usize) -> usize {
    let lat = sample.lattice();
    let sites = lat.sites_in(region);
    if sites.is_empty() {
        return 0;
    }
    let lo = sites.iter().map(|&s| lat.coord(s)[axis]).min().unwrap();
    let hi = sites.iter().map(|&s| lat.coord(s)[axis]).max().unwrap();
    if lo == hi {
        return 0;
    }
    let n = sites.len();
    let (src, sink) = (n, n + 1);
    let mut g = Dinic::new(n + 2);
    let big = u32::MAX / 4;
    for (i, &s) in sites.iter().enumerate() {
        if !sample.is_occupied(s) {
            continue;
        }
        let x = lat.coord(s)[axis];
        if x == lo {
            g.add(src, i, big);
        }
        if x == hi {
            g.add(i, sink, big);
        }
        for &(t, b) in lat.incident(s) {
            if t > s && sample.conducts(b) && region.contains(lat.coord(t)) {
                let j = sites.binary_search(&t).unwrap();
                g.add_undirected(i, j);
            }
        }
    }
    g.max_flow(src, sink)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lattice::Lattice;
    use crate::percolation::sample::sample;

    #[test]
    fn full_block_saturates_the_face() {
        for n in [1usize, 2, 5, 8] {
            let lat = Arc::new(Lattice::square(&[n.max(2), n]));
            let s = sample(&lat, 1.0, 1.0, 0, 0).unwrap();
            assert_eq!(count_edge_disjoint_crossings(&s, &lat.bounds(), 0), n);
        }
    }

    #[test]
    fn closed_block_has_none() {
        let lat = Arc::new(Lattice::square(&[6, 6]));
        let s = sample(&lat, 0.0, 1.0, 0, 0).unwrap();
        assert_eq!(count_edge_disjoint_crossings(&s, &lat.bounds(), 0), 0);
    }

    #[test]
    fn shared_bond_limits_flow() {
        // two rows funnel through one vertical-free bottleneck column
        let lat = Arc::new(Lattice::square(&[5, 2]));
        let at = |x, y| lat.site_at(&[x, y]).unwrap();
        let mut s = sample(&lat, 0.0, 1.0, 0, 0).unwrap();
        s.open_path(&[at(1, 1), at(2, 1), at(3, 1), at(4, 1), at(5, 1)]).unwrap();
        s.open_path(&[at(1, 2), at(2, 2), at(2, 1)]).unwrap();
        s.open_path(&[at(3, 1), at(3, 2), at(4, 2), at(5, 2)]).unwrap();
        // both crossings need bond (2,1)-(3,1)
        assert_eq!(count_edge_disjoint_crossings(&s, &lat.bounds(), 0), 1);
    }

    /// Brute-force oracle: max number of edge-disjoint crossings via
    /// min edge cut, enumerating all subsets of open bonds.
    fn min_cut_brute(s: &PercolationSample) -> usize {
        let lat = s.lattice();
        let open: Vec<u32> = (0..lat.num_bonds() as u32).filter(|&b| s.conducts(b)).collect();
        let bounds = lat.bounds();
        let mut best = open.len();
        for mask in 0u32..(1 << open.len()) {
            let removed = mask.count_ones() as usize;
            if removed >= best {
                continue;
            }
            let mut t = s.clone();
            for (i, &b) in open.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    t.set_bond(b, false);
                }
            }
            let lab = crate::percolation::clusters::label_region(&t, &bounds);
            if crate::percolation::clusters::crossing_clusters(&lab, 0).is_empty() {
                best = removed;
            }
        }
        best
    }

    #[test]
    fn agrees_with_min_cut_on_small_grids() {
        let lat = Arc::new(Lattice::square(&[3, 3]));
        for t in 0..200 {
            let s = sample(&lat, 0.6, 1.0, 5, t).unwrap();
            assert_eq!(count_edge_disjoint_crossings(&s, &lat.bounds(), 0), min_cut_brute(&s), "trial {t}");
        }
    }
}
