//! Union-find cluster labeling, optionally restricted to a box.

use crate::lattice::{Region, SiteId};

use super::sample::PercolationSample;

/// Label value for unoccupied sites.
pub const NO_CLUSTER: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (ra, rb) = if self.rank[ra as usize] < self.rank[rb as usize] { (rb, ra) } else { (ra, rb) };
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
        true
    }
}

/// Cluster labels for the occupied sites of a region.
///
/// Cluster ids are assigned in order of each cluster's smallest site id, so
/// labelings are canonical for a given sample and region.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    region: Region,
    sites: Vec<SiteId>,
    full: bool,
    labels: Vec<u32>,
    sizes: Vec<usize>,
    face_lo: Vec<i64>,
    face_hi: Vec<i64>,
    coords: Vec<i64>,
}

/// Labels clusters over the whole lattice.
pub fn label_clusters(sample: &PercolationSample) -> ClusterLabeling {
    let lat = sample.lattice();
    let sites: Vec<SiteId> = (0..lat.num_sites() as SiteId).collect();
    build(sample, lat.bounds(), sites, true)
}

/// Labels clusters of the subgraph induced by the sites inside `region`.
pub fn label_region(sample: &PercolationSample, region: &Region) -> ClusterLabeling {
    let sites = sample.lattice().sites_in(region);
    build(sample, region.clone(), sites, false)
}

fn build(sample: &PercolationSample, region: Region, sites: Vec<SiteId>, full: bool) -> ClusterLabeling {
    let lat = sample.lattice();
    let n = sites.len();
    let nd = lat.ndim();
    let local = |t: SiteId| -> Option<usize> {
        if full {
            Some(t as usize)
        } else if region.contains(lat.coord(t)) {
            sites.binary_search(&t).ok()
        } else {
            None
        }
    };
    let mut uf = UnionFind::new(n);
    for (i, &s) in sites.iter().enumerate() {
        for t in sample.open_neighbors(s) {
            if t > s {
                if let Some(j) = local(t) {
                    uf.union(i as u32, j as u32);
                }
            }
        }
    }
    let mut labels = vec![NO_CLUSTER; n];
    let mut root_label = vec![NO_CLUSTER; n];
    let mut sizes = Vec::new();
    let mut coords = Vec::with_capacity(n * nd);
    let mut face_lo = vec![i64::MAX; nd];
    let mut face_hi = vec![i64::MIN; nd];
    for (i, &s) in sites.iter().enumerate() {
        let c = lat.coord(s);
        coords.extend_from_slice(c);
        for a in 0..nd {
            face_lo[a] = face_lo[a].min(c[a]);
            face_hi[a] = face_hi[a].max(c[a]);
        }
        if !sample.is_occupied(s) {
            continue;
        }
        let r = uf.find(i as u32) as usize;
        if root_label[r] == NO_CLUSTER {
            root_label[r] = sizes.len() as u32;
            sizes.push(0);
        }
        labels[i] = root_label[r];
        sizes[root_label[r] as usize] += 1;
    }
    ClusterLabeling { region, sites, full, labels, sizes, face_lo, face_hi, coords }
}

impl ClusterLabeling {
    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Lattice sites covered by the labeling, ascending.
    pub fn sites(&self) -> &[SiteId] {
        &self.sites
    }

    fn index(&self, s: SiteId) -> Option<usize> {
        if self.full {
            ((s as usize) < self.sites.len()).then_some(s as usize)
        } else {
            self.sites.binary_search(&s).ok()
        }
    }

    /// Cluster id of `s`, or `None` if unoccupied or outside the region.
    pub fn label(&self, s: SiteId) -> Option<u32> {
        self.index(s).map(|i| self.labels[i]).filter(|&l| l != NO_CLUSTER)
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn largest_cluster_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn connected(&self, a: SiteId, b: SiteId) -> bool {
        matches!((self.label(a), self.label(b)), (Some(x), Some(y)) if x == y)
    }

    /// Sites of cluster `c`, ascending.
    pub fn members(&self, c: u32) -> Vec<SiteId> {
        self.sites
            .iter()
            .zip(&self.labels)
            .filter(|&(_, &l)| l == c)
            .map(|(&s, _)| s)
            .collect()
    }

    /// Extreme coordinates along `axis` among the sites of the region.
    pub fn face_coords(&self, axis: usize) -> (i64, i64) {
        (self.face_lo[axis], self.face_hi[axis])
    }

    /// Per-cluster flags: touches the lower face, touches the upper face.
    pub fn face_contacts(&self, axis: usize) -> Vec<(bool, bool)> {
        let nd = self.region.ndim();
        let (lo, hi) = self.face_coords(axis);
        let mut out = vec![(false, false); self.sizes.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            if l == NO_CLUSTER {
                continue;
            }
            let x = self.coords[i * nd + axis];
            if x == lo {
                out[l as usize].0 = true;
            }
            if x == hi {
                out[l as usize].1 = true;
            }
        }
        out
    }
}

/// Clusters with occupied sites on both opposite faces of the labeled region
/// along `axis`, ascending by id.
pub fn crossing_clusters(labeling: &ClusterLabeling, axis: usize) -> Vec<u32> {
    labeling
        .face_contacts(axis)
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| a && b)
        .map(|(c, _)| c as u32)
        .collect()
}

/// The crossing cluster with the most sites, ties to the smallest id.
pub fn dominant_crossing_cluster(labeling: &ClusterLabeling, axis: usize) -> Option<u32> {
    crossing_clusters(labeling, axis)
        .into_iter()
        .max_by(|&a, &b| {
            labeling.sizes[a as usize]
                .cmp(&labeling.sizes[b as usize])
                .then(b.cmp(&a))
        })
}
