//! Fixed-block pipeline: a mid-qubit on a crossing cluster of every block,
//! BFS distance labels inside the block, and least-distance open bonds
//! across the faces of neighboring blocks.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::skeleton::{brick_wall, failure, Skeleton, Thread};
use crate::error::Result;
use crate::graph::Vertex;
use crate::lattice::{Lattice, Region, SiteId};
use crate::percolation::{dominant_crossing_cluster, label_region, BlockLayout, ClusterLabeling, PercolationSample};

fn lex(lat: &Lattice, a: SiteId, b: SiteId) -> Ordering {
    lat.coord(a).cmp(lat.coord(b))
}

/// Site of the block's dominant left-right crossing cluster closest to the
/// block center in the Chebyshev metric; ties go to the smaller Euclidean
/// distance, then to the smallest coordinate. Returns the site and its
/// cluster id.
pub fn select_mid_qubit(lattice: &Lattice, labeling: &ClusterLabeling) -> Result<(SiteId, u32)> {
    let Some(c) = dominant_crossing_cluster(labeling, 0) else {
        let r = labeling.region();
        return failure("select_mid_qubit", format!("no crossing cluster in block {:?}..{:?}", r.lo, r.hi));
    };
    let center = labeling.region().center();
    let offsets = |s: SiteId| lattice.coord(s).iter().zip(&center).map(|(&x, &m)| (x as f64 - m).abs()).collect::<Vec<_>>();
    let cheb = |s: SiteId| offsets(s).into_iter().fold(0.0, f64::max);
    let eucl = |s: SiteId| offsets(s).into_iter().map(|d| d * d).sum::<f64>();
    let mid = labeling
        .members(c)
        .into_iter()
        .min_by(|&a, &b| {
            cheb(a).total_cmp(&cheb(b)).then_with(|| eucl(a).total_cmp(&eucl(b))).then_with(|| lex(lattice, a, b))
        })
        .expect("clusters are nonempty");
    Ok((mid, c))
}

/// Open-path distance from `mid` for every site of `region` reachable
/// inside it.
pub fn bfs_labels(sample: &PercolationSample, region: &Region, mid: SiteId) -> HashMap<SiteId, u32> {
    let lat = sample.lattice();
    let mut labels = HashMap::from([(mid, 0)]);
    let mut queue = std::collections::VecDeque::from([mid]);
    while let Some(s) = queue.pop_front() {
        let d = labels[&s];
        for t in sample.open_neighbors(s) {
            if region.contains(lat.coord(t)) && !labels.contains_key(&t) {
                labels.insert(t, d + 1);
                queue.push_back(t);
            }
        }
    }
    labels
}

/// Shortest path from `s` down to the label-0 site, stepping to the
/// smallest-coordinate neighbor one label lower.
pub fn descend(sample: &PercolationSample, labels: &HashMap<SiteId, u32>, s: SiteId) -> Vec<SiteId> {
    let lat = sample.lattice();
    let mut path = vec![s];
    let mut cur = s;
    while labels[&cur] > 0 {
        let want = labels[&cur] - 1;
        cur = sample
            .open_neighbors(cur)
            .filter(|t| labels.get(t) == Some(&want))
            .min_by(|&a, &b| lex(lat, a, b))
            .expect("BFS labels have a predecessor");
        path.push(cur);
    }
    path
}

/// Open bond `(s₁, s₂)` between two labeled blocks with the least label sum,
/// skipping sites already used as exits.
pub fn connect_blocks(
    sample: &PercolationSample,
    a: &HashMap<SiteId, u32>,
    b: &HashMap<SiteId, u32>,
    used: &HashSet<SiteId>,
) -> Result<(SiteId, SiteId)> {
    let lat = sample.lattice();
    let mut best: Option<(u32, SiteId, SiteId)> = None;
    for (&s1, &d1) in a {
        if used.contains(&s1) {
            continue;
        }
        for &(s2, bond) in lat.incident(s1) {
            let Some(&d2) = b.get(&s2) else { continue };
            if used.contains(&s2) || !sample.conducts(bond) {
                continue;
            }
            let better = best.is_none_or(|(d, x, y)| {
                (d1 + d2).cmp(&d).then_with(|| lex(lat, s1, x)).then_with(|| lex(lat, s2, y)) == Ordering::Less
            });
            if better {
                best = Some((d1 + d2, s1, s2));
            }
        }
    }
    match best {
        Some((_, s1, s2)) => Ok((s1, s2)),
        None => failure("connect_blocks", "no open bond joins the chosen clusters"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPath {
    pub blocks: [u32; 2],
    /// Mid-qubit to mid-qubit.
    pub path: Vec<SiteId>,
    /// Crossing bond `(s₁, s₂)`.
    pub exit: [SiteId; 2],
}

/// Blocks are numbered `y·L + x` for renormalized coordinates `x, y < L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub layout: BlockLayout,
    pub mid_qubits: Vec<SiteId>,
    pub chosen_cluster: Vec<u32>,
    pub inter_block_paths: Vec<BlockPath>,
    #[serde(skip)]
    labels: Vec<HashMap<SiteId, u32>>,
}

pub fn block_region(layout: &BlockLayout, id: usize) -> Region {
    let (x, y) = (id % layout.l, id / layout.l);
    layout.site_block([x + 1, y + 1]).region
}

/// Mid-qubits and inter-block paths for the brick-wall target on the
/// layout's `L × L` blocks.
pub fn plan_fixed_block(sample: &PercolationSample, layout: &BlockLayout) -> Result<PathPlan> {
    layout.check(sample)?;
    let lat = sample.lattice();
    let n = layout.l * layout.l;
    let mut mid_qubits = Vec::with_capacity(n);
    let mut chosen_cluster = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for id in 0..n {
        let region = block_region(layout, id);
        let lab = label_region(sample, &region);
        let (mid, c) = select_mid_qubit(lat, &lab).map_err(|e| with_block(e, id))?;
        labels.push(bfs_labels(sample, &region, mid));
        mid_qubits.push(mid);
        chosen_cluster.push(c);
    }
    let mut used = HashSet::new();
    let mut inter_block_paths = Vec::new();
    for [a, b] in brick_wall(layout.l, layout.l).edges() {
        let (la, lb) = (&labels[a as usize], &labels[b as usize]);
        let (s1, s2) = connect_blocks(sample, la, lb, &used).map_err(|e| with_block(e, a as usize))?;
        used.extend([s1, s2]);
        let mut path = descend(sample, la, s1);
        path.reverse();
        path.extend(descend(sample, lb, s2));
        inter_block_paths.push(BlockPath { blocks: [a, b], path, exit: [s1, s2] });
    }
    Ok(PathPlan { layout: *layout, mid_qubits, chosen_cluster, inter_block_paths, labels })
}

fn with_block(e: crate::Error, id: usize) -> crate::Error {
    match e {
        crate::Error::Extraction { stage, detail } => crate::Error::Extraction { stage, detail: format!("block {id}: {detail}") },
        e => e,
    }
}

/// First site of `p` that lies on `q`, with its positions in both.
fn meet(p: &[SiteId], q: &[SiteId]) -> (usize, usize) {
    let pos: HashMap<SiteId, usize> = q.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    p.iter().enumerate().find_map(|(i, s)| pos.get(s).map(|&j| (i, j))).expect("descents share the mid-qubit")
}

impl PathPlan {
    /// Junction of each block and the thread halves from it to the exits.
    /// The exits' descents form a tree rooted at the mid-qubit; the junction
    /// is the median of the exits, so the halves are disjoint apart from it.
    pub fn skeleton(&self, sample: &PercolationSample) -> Result<Skeleton> {
        let n = self.mid_qubits.len();
        let mut exits: Vec<Vec<(usize, SiteId)>> = vec![Vec::new(); n];
        for (i, bp) in self.inter_block_paths.iter().enumerate() {
            exits[bp.blocks[0] as usize].push((i, bp.exit[0]));
            exits[bp.blocks[1] as usize].push((i, bp.exit[1]));
        }
        let mut branch = Vec::with_capacity(n);
        let mut halves: HashMap<(usize, usize), Vec<SiteId>> = HashMap::new();
        for id in 0..n {
            let labels = &self.labels[id];
            let descents: Vec<Vec<SiteId>> = exits[id].iter().map(|&(_, s)| descend(sample, labels, s)).collect();
            let mut junction = self.mid_qubits[id];
            let mut depth = 0;
            for i in 0..descents.len() {
                for j in i + 1..descents.len() {
                    let (pi, _) = meet(&descents[i], &descents[j]);
                    let v = descents[i][pi];
                    if labels[&v] >= depth {
                        (junction, depth) = (v, labels[&v]);
                    }
                }
            }
            let up = descend(sample, labels, junction);
            for (k, &(edge, _)) in exits[id].iter().enumerate() {
                let d = &descents[k];
                let (pd, pu) = meet(d, &up);
                let half: Vec<SiteId> = up[..=pu].iter().chain(d[..pd].iter().rev()).copied().collect();
                halves.insert((id, edge), half);
            }
            branch.push(junction as Vertex);
        }
        let threads = self
            .inter_block_paths
            .iter()
            .enumerate()
            .map(|(i, bp)| {
                let [a, b] = bp.blocks;
                let mut path = halves[&(a as usize, i)].clone();
                path.extend(halves[&(b as usize, i)].iter().rev());
                Thread { ends: [a, b], path }
            })
            .collect();
        Ok(Skeleton { target: brick_wall(self.layout.l, self.layout.l), branch, threads })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use std::sync::Arc;

    fn full(dims: &[usize]) -> PercolationSample {
        PercolationSample::full(&Arc::new(Lattice::square(dims)))
    }

    #[test]
    fn mid_qubit_of_full_block() {
        let s = full(&[6, 6]);
        let r = Region::new(vec![1, 1], vec![5, 5]);
        let lab = label_region(&s, &r);
        let (mid, _) = select_mid_qubit(s.lattice(), &lab).unwrap();
        assert_eq!(s.lattice().coord(mid), &[3, 3]);
        // even side: four central sites tie, smallest coordinate wins
        let lab = label_region(&s, &Region::new(vec![1, 1], vec![4, 4]));
        let (mid, _) = select_mid_qubit(s.lattice(), &lab).unwrap();
        assert_eq!(s.lattice().coord(mid), &[2, 2]);
    }

    #[test]
    fn mid_qubit_on_single_path() {
        let lat = Arc::new(Lattice::square(&[7, 7]));
        let mut s = PercolationSample::from_parts(&lat, vec![false; lat.num_bonds()], vec![true; lat.num_sites()]).unwrap();
        // straight crossing at y = 2
        let path: Vec<SiteId> = (1..=7).map(|x| lat.site_at(&[x, 2]).unwrap()).collect();
        s.open_path(&path).unwrap();
        let lab = label_region(&s, &lat.bounds());
        let (mid, _) = select_mid_qubit(&lat, &lab).unwrap();
        assert_eq!(lat.coord(mid), &[4, 2]);
        let labels = bfs_labels(&s, &lat.bounds(), mid);
        assert_eq!(labels.len(), 7);
        for x in 1..=7i64 {
            assert_eq!(labels[&lat.site_at(&[x, 2]).unwrap()], (x - 4).unsigned_abs() as u32);
        }
    }

    #[test]
    fn larger_crossing_cluster_wins() {
        let lat = Arc::new(Lattice::square(&[5, 5]));
        let mut s = PercolationSample::from_parts(&lat, vec![false; lat.num_bonds()], vec![true; lat.num_sites()]).unwrap();
        let row = |y: i64| (1..=5).map(|x| lat.site_at(&[x, y]).unwrap()).collect::<Vec<_>>();
        s.open_path(&row(1)).unwrap();
        s.open_path(&row(4)).unwrap();
        s.open_path(&[lat.site_at(&[2, 4]).unwrap(), lat.site_at(&[2, 5]).unwrap()]).unwrap();
        let lab = label_region(&s, &lat.bounds());
        let (mid, _) = select_mid_qubit(&lat, &lab).unwrap();
        assert_eq!(lat.coord(mid)[1], 4);
    }

    #[test]
    fn closed_block_fails() {
        let lat = Arc::new(Lattice::square(&[4, 4]));
        let s = PercolationSample::from_parts(&lat, vec![false; lat.num_bonds()], vec![true; lat.num_sites()]).unwrap();
        let lab = label_region(&s, &lat.bounds());
        assert!(matches!(select_mid_qubit(&lat, &lab), Err(crate::Error::Extraction { .. })));
    }

    #[test]
    fn full_blocks_connect_by_distance_sum() {
        let s = full(&[8, 4]);
        let (ra, rb) = (Region::new(vec![1, 1], vec![4, 4]), Region::new(vec![5, 1], vec![8, 4]));
        let lat = s.lattice();
        let ma = lat.site_at(&[2, 2]).unwrap();
        let mb = lat.site_at(&[6, 2]).unwrap();
        let (la, lb) = (bfs_labels(&s, &ra, ma), bfs_labels(&s, &rb, mb));
        let (s1, s2) = connect_blocks(&s, &la, &lb, &HashSet::new()).unwrap();
        assert_eq!((lat.coord(s1), lat.coord(s2)), (&[4i64, 2][..], &[5i64, 2][..]));
        assert_eq!(la[&s1] + 1 + lb[&s2], 2 + 1 + 1);
        let used = HashSet::from([s1]);
        let (t1, _) = connect_blocks(&s, &la, &lb, &used).unwrap();
        assert_ne!(t1, s1);
    }

    #[test]
    fn unreachable_neighbor_fails() {
        let lat = Arc::new(Lattice::square(&[4, 2]));
        let mut s = PercolationSample::full(&lat);
        for x in 1..=2 {
            let b = lat.bond_between(lat.site_at(&[2, x]).unwrap(), lat.site_at(&[3, x]).unwrap()).unwrap();
            s.set_bond(b, false);
        }
        let (ra, rb) = (Region::new(vec![1, 1], vec![2, 2]), Region::new(vec![3, 1], vec![4, 2]));
        let la = bfs_labels(&s, &ra, lat.site_at(&[1, 1]).unwrap());
        let lb = bfs_labels(&s, &rb, lat.site_at(&[4, 1]).unwrap());
        assert!(connect_blocks(&s, &la, &lb, &HashSet::new()).is_err());
    }

    #[test]
    fn plan_paths_are_loop_free() {
        let layout = BlockLayout::new(3, 2, 2).unwrap();
        let s = full(&[12, 12]);
        let plan = plan_fixed_block(&s, &layout).unwrap();
        assert_eq!(plan.inter_block_paths.len(), brick_wall(3, 3).num_edges());
        for bp in &plan.inter_block_paths {
            let set: HashSet<_> = bp.path.iter().collect();
            assert_eq!(set.len(), bp.path.len());
        }
        let sk = plan.skeleton(&s).unwrap();
        sk.validate(&super::super::sample_graph(&s)).unwrap();
    }
}
