//! Lattice families with explicit adjacency.
//!
//! Every lattice is embedded in the integer grid with 1-based coordinates and
//! open boundaries. The embeddings are fixed conventions that the rest of the
//! crate (blocks, faces, wall followers) relies on:
//!
//! * `Square` — hypercubic `Z^d`, neighbors at `±e_i`.
//! * `Hexagonal` — brick-wall honeycomb on `[1,nx]×[1,ny]`. Horizontal bonds
//!   `(x,y)–(x+1,y)` always exist; the vertical bond `(x,y)–(x,y+1)` exists iff
//!   `x + y` is even. Interior degree 3.
//! * `Triangular` — offset rows on `[1,nx]×[1,ny]`. Square-lattice bonds plus
//!   diagonals: on odd rows `(x,y)–(x+1,y±1)`, on even rows `(x,y)–(x−1,y±1)`.
//!   Interior degree 6. Rows are `√3/2` apart in the physical picture.
//! * `Diamond` — with `c = coord − 1`, the sites are the points whose
//!   coordinates are all even with `c₁+c₂+c₃ ≡ 0 (mod 4)` (sublattice A) or
//!   all odd with `c₁+c₂+c₃ ≡ 3 (mod 4)` (sublattice B). An A site connects to
//!   `c + (1,1,1), (1,−1,−1), (−1,1,−1), (−1,−1,1)`. Every coordinate plane
//!   holds sites, so `dims` counts atomic layers per axis.
//! * `Pyrochlore` — the covering (line) lattice of `Diamond`. Its sites sit on
//!   diamond bond midpoints, stored in doubled coordinates (the sum of the two
//!   endpoint coordinates).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Site index into a [`Lattice`].
pub type SiteId = u32;
/// Bond index into a [`Lattice`].
pub type BondId = u32;

const NO_SITE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Diamond,
    Pyrochlore,
    Hexagonal,
    Triangular,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Diamond => "diamond",
            LatticeKind::Pyrochlore => "pyrochlore",
            LatticeKind::Hexagonal => "hexagonal",
            LatticeKind::Triangular => "triangular",
        }
    }

    /// Smallest translation (in coordinate units, along every axis) mapping
    /// the lattice onto itself.
    pub fn translation_period(self) -> i64 {
        match self {
            LatticeKind::Square => 1,
            LatticeKind::Hexagonal | LatticeKind::Triangular => 2,
            LatticeKind::Diamond => 4,
            LatticeKind::Pyrochlore => 8,
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(LatticeKind::Square),
            "diamond" => Ok(LatticeKind::Diamond),
            "pyrochlore" => Ok(LatticeKind::Pyrochlore),
            "hexagonal" | "honeycomb" => Ok(LatticeKind::Hexagonal),
            "triangular" => Ok(LatticeKind::Triangular),
            other => domain(format!("unknown lattice kind `{other}`")),
        }
    }
}

/// Serializable lattice descriptor, `{"kind": "...", "dims": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub dims: Vec<usize>,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Lattice> {
        Lattice::new(self.kind, &self.dims)
    }
}

/// Inclusive axis-aligned box of coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Region {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Region { lo, hi }
    }

    pub fn ndim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, c: &[i64]) -> bool {
        c.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&l, &h))| x >= l && x <= h)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn intersect(&self, other: &Region) -> Region {
        Region {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect(),
        }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Region) -> Region {
        Region {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect(),
        }
    }

    /// Number of integer points in the box.
    pub fn volume(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (*l + *h) as f64 / 2.0)
            .collect()
    }
}

/// An immutable lattice instance: sites, coordinates, bonds and adjacency.
#[derive(Debug, Clone)]
pub struct Lattice {
    kind: LatticeKind,
    dims: Vec<usize>,
    ndim: usize,
    coords: Vec<i64>,
    offsets: Vec<usize>,
    adj: Vec<(SiteId, BondId)>,
    bonds: Vec<[SiteId; 2]>,
    grid_lo: Vec<i64>,
    grid_extent: Vec<usize>,
    grid: Vec<u32>,
}

impl Lattice {
    pub fn new(kind: LatticeKind, dims: &[usize]) -> Result<Lattice> {
        if dims.contains(&0) {
            return domain("lattice extents must be positive");
        }
        match kind {
            LatticeKind::Square => {
                if dims.len() < 2 {
                    return domain("square lattice needs d >= 2");
                }
                Ok(Self::square(dims))
            }
            LatticeKind::Hexagonal | LatticeKind::Triangular => {
                if dims.len() != 2 {
                    return domain(format!("{kind} lattice is two-dimensional"));
                }
                Ok(if kind == LatticeKind::Hexagonal {
                    Self::hexagonal(dims[0], dims[1])
                } else {
                    Self::triangular(dims[0], dims[1])
                })
            }
            LatticeKind::Diamond => {
                if dims.len() != 3 {
                    return domain("diamond lattice is three-dimensional");
                }
                Ok(Self::diamond(dims))
            }
            LatticeKind::Pyrochlore => {
                if dims.len() != 3 {
                    return domain("pyrochlore lattice is three-dimensional");
                }
                covering_lattice(&Self::diamond(dims))
            }
        }
    }

    pub fn square(dims: &[usize]) -> Lattice {
        let d = dims.len();
        let mut steps = Vec::new();
        for i in 0..d {
            let mut e = vec![0i64; d];
            e[i] = 1;
            steps.push(e);
        }
        Self::from_rule(LatticeKind::Square, dims, |_| true, |_, out| {
            out.extend(steps.iter().cloned());
        })
    }

    pub fn hexagonal(nx: usize, ny: usize) -> Lattice {
        Self::from_rule(LatticeKind::Hexagonal, &[nx, ny], |_| true, |c, out| {
            out.push(vec![1, 0]);
            if (c[0] + c[1]).rem_euclid(2) == 0 {
                out.push(vec![0, 1]);
            }
        })
    }

    pub fn triangular(nx: usize, ny: usize) -> Lattice {
        Self::from_rule(LatticeKind::Triangular, &[nx, ny], |_| true, |c, out| {
            out.push(vec![1, 0]);
            out.push(vec![0, 1]);
            if c[1].rem_euclid(2) == 1 {
                out.push(vec![1, 1]);
            } else {
                out.push(vec![-1, 1]);
            }
        })
    }

    pub fn diamond(dims: &[usize]) -> Lattice {
        Self::from_rule(
            LatticeKind::Diamond,
            dims,
            |c| diamond_sublattice(c).is_some(),
            |c, out| {
                // Only forward offsets (first nonzero component positive) so
                // each bond is produced once.
                let sign = if diamond_sublattice(c) == Some(0) { 1 } else { -1 };
                for o in [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]] {
                    let v: Vec<i64> = o.iter().map(|x| x * sign).collect();
                    if v[0] > 0 {
                        out.push(v);
                    }
                }
            },
        )
    }

    /// Generic builder over the box `[1, dims]` using a site predicate and a
    /// function producing forward neighbor offsets.
    fn from_rule(
        kind: LatticeKind,
        dims: &[usize],
        is_site: impl Fn(&[i64]) -> bool,
        forward: impl Fn(&[i64], &mut Vec<Vec<i64>>),
    ) -> Lattice {
        let ndim = dims.len();
        let total: usize = dims.iter().product();
        let mut grid = vec![NO_SITE; total];
        let mut coords = Vec::new();
        let mut c = vec![1i64; ndim];
        let mut n = 0u32;
        for cell in grid.iter_mut() {
            if is_site(&c) {
                *cell = n;
                coords.extend_from_slice(&c);
                n += 1;
            }
            advance(&mut c, dims);
        }
        let mut lat = Lattice {
            kind,
            dims: dims.to_vec(),
            ndim,
            coords,
            offsets: Vec::new(),
            adj: Vec::new(),
            bonds: Vec::new(),
            grid_lo: vec![1; ndim],
            grid_extent: dims.to_vec(),
            grid,
        };
        let mut bonds = Vec::new();
        let mut buf = Vec::new();
        let mut target = vec![0i64; ndim];
        for s in 0..n {
            buf.clear();
            let cs = lat.coord(s).to_vec();
            forward(&cs, &mut buf);
            for off in &buf {
                for i in 0..ndim {
                    target[i] = cs[i] + off[i];
                }
                if let Some(t) = lat.site_at(&target) {
                    bonds.push([s.min(t), s.max(t)]);
                }
            }
        }
        bonds.sort_unstable();
        bonds.dedup();
        lat.set_bonds(bonds);
        lat
    }

    fn set_bonds(&mut self, bonds: Vec<[SiteId; 2]>) {
        let n = self.num_sites();
        let mut deg = vec![0usize; n];
        for b in &bonds {
            deg[b[0] as usize] += 1;
            deg[b[1] as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0, 0); offsets[n]];
        for (id, b) in bonds.iter().enumerate() {
            let id = id as BondId;
            adj[fill[b[0] as usize]] = (b[1], id);
            fill[b[0] as usize] += 1;
            adj[fill[b[1] as usize]] = (b[0], id);
            fill[b[1] as usize] += 1;
        }
        for i in 0..n {
            adj[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        self.offsets = offsets;
        self.adj = adj;
        self.bonds = bonds;
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec { kind: self.kind, dims: self.dims.clone() }
    }

    pub fn num_sites(&self) -> usize {
        self.coords.len() / self.ndim
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn coord(&self, s: SiteId) -> &[i64] {
        let i = s as usize * self.ndim;
        &self.coords[i..i + self.ndim]
    }

    pub fn bond(&self, b: BondId) -> [SiteId; 2] {
        self.bonds[b as usize]
    }

    pub fn bonds(&self) -> &[[SiteId; 2]] {
        &self.bonds
    }

    /// `(neighbor, bond)` pairs of a site, sorted by neighbor id.
    pub fn incident(&self, s: SiteId) -> &[(SiteId, BondId)] {
        &self.adj[self.offsets[s as usize]..self.offsets[s as usize + 1]]
    }

    pub fn bond_between(&self, a: SiteId, b: SiteId) -> Option<BondId> {
        let inc = self.incident(a);
        inc.binary_search_by_key(&b, |&(t, _)| t).ok().map(|i| inc[i].1)
    }

    pub fn degree(&self, s: SiteId) -> usize {
        self.offsets[s as usize + 1] - self.offsets[s as usize]
    }

    pub fn site_at(&self, c: &[i64]) -> Option<SiteId> {
        if c.len() != self.ndim {
            return None;
        }
        let mut idx = 0usize;
        let mut stride = 1usize;
        for i in 0..self.ndim {
            let r = c[i] - self.grid_lo[i];
            if r < 0 || r as usize >= self.grid_extent[i] {
                return None;
            }
            idx += r as usize * stride;
            stride *= self.grid_extent[i];
        }
        match self.grid[idx] {
            NO_SITE => None,
            s => Some(s),
        }
    }

    /// Neighbor coordinates of the site at `c`.
    pub fn neighbors(&self, c: &[i64]) -> Result<Vec<Vec<i64>>> {
        let s = self
            .site_at(c)
            .ok_or_else(|| Error::Domain(format!("site {c:?} is not in the lattice")))?;
        Ok(self
            .incident(s)
            .iter()
            .map(|&(t, _)| self.coord(t).to_vec())
            .collect())
    }

    /// Bounding box of the coordinate grid.
    pub fn bounds(&self) -> Region {
        Region {
            lo: self.grid_lo.clone(),
            hi: self
                .grid_lo
                .iter()
                .zip(&self.grid_extent)
                .map(|(l, e)| l + *e as i64 - 1)
                .collect(),
        }
    }

    /// Sites whose coordinates lie in `region`, in increasing id order.
    pub fn sites_in(&self, region: &Region) -> Vec<SiteId> {
        let clipped = region.intersect(&self.bounds());
        if clipped.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut c = clipped.lo.clone();
        loop {
            if let Some(s) = self.site_at(&c) {
                out.push(s);
            }
            let mut i = 0;
            loop {
                if i == self.ndim {
                    out.sort_unstable();
                    return out;
                }
                c[i] += 1;
                if c[i] <= clipped.hi[i] {
                    break;
                }
                c[i] = clipped.lo[i];
                i += 1;
            }
        }
    }

    /// Sites of `region` on its lower (`upper = false`) or upper face along
    /// `axis`. Faces are the extreme coordinates actually carrying sites.
    pub fn face_sites(&self, region: &Region, axis: usize, upper: bool) -> Vec<SiteId> {
        let sites = self.sites_in(region);
        let pick = sites.iter().map(|&s| self.coord(s)[axis]);
        let Some(extreme) = (if upper { pick.max() } else { pick.min() }) else {
            return Vec::new();
        };
        sites
            .into_iter()
            .filter(|&s| self.coord(s)[axis] == extreme)
            .collect()
    }

    /// Site closest (Euclidean) to the geometric center of the lattice, ties
    /// broken by lowest id.
    pub fn central_site(&self) -> SiteId {
        let center = self.bounds().center();
        (0..self.num_sites() as SiteId)
            .min_by(|&a, &b| {
                let da = dist2(self.coord(a), &center);
                let db = dist2(self.coord(b), &center);
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .expect("lattice has sites")
    }
}

fn dist2(c: &[i64], center: &[f64]) -> f64 {
    c.iter().zip(center).map(|(&x, &m)| (x as f64 - m).powi(2)).sum()
}

fn advance(c: &mut [i64], dims: &[usize]) {
    for i in 0..c.len() {
        c[i] += 1;
        if c[i] <= dims[i] as i64 {
            return;
        }
        c[i] = 1;
    }
}

/// 0 for sublattice A, 1 for B, `None` if the point is not a diamond site.
fn diamond_sublattice(c: &[i64]) -> Option<u8> {
    let z: Vec<i64> = c.iter().map(|x| x - 1).collect();
    let parity = z[0].rem_euclid(2);
    if z.iter().any(|x| x.rem_euclid(2) != parity) {
        return None;
    }
    let sum = z.iter().sum::<i64>().rem_euclid(4);
    match (parity, sum) {
        (0, 0) => Some(0),
        (1, 3) => Some(1),
        _ => None,
    }
}

/// Covering (line) lattice: one site per input bond, adjacent iff the bonds
/// share an endpoint. Only `Diamond → Pyrochlore` is supported.
pub fn covering_lattice(lattice: &Lattice) -> Result<Lattice> {
    if lattice.kind != LatticeKind::Diamond {
        return Err(Error::NotImplemented(format!(
            "covering lattice of {} is not supported",
            lattice.kind
        )));
    }
    let ndim = lattice.ndim;
    let mut coords = Vec::with_capacity(lattice.num_bonds() * ndim);
    for b in lattice.bonds() {
        let (a, c) = (lattice.coord(b[0]), lattice.coord(b[1]));
        coords.extend(a.iter().zip(c).map(|(x, y)| x + y));
    }
    let lo: Vec<i64> = (0..ndim)
        .map(|i| coords.iter().skip(i).step_by(ndim).copied().min().unwrap_or(0))
        .collect();
    let hi: Vec<i64> = (0..ndim)
        .map(|i| coords.iter().skip(i).step_by(ndim).copied().max().unwrap_or(0))
        .collect();
    let extent: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(1) as usize).collect();
    let mut grid = vec![NO_SITE; extent.iter().product()];
    for s in 0..lattice.num_bonds() {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for i in 0..ndim {
            idx += (coords[s * ndim + i] - lo[i]) as usize * stride;
            stride *= extent[i];
        }
        grid[idx] = s as u32;
    }
    let mut bonds = Vec::new();
    for site in 0..lattice.num_sites() as SiteId {
        let inc = lattice.incident(site);
        for (i, &(_, b1)) in inc.iter().enumerate() {
            for &(_, b2) in &inc[i + 1..] {
                bonds.push([b1.min(b2), b1.max(b2)]);
            }
        }
    }
    bonds.sort_unstable();
    bonds.dedup();
    let mut out = Lattice {
        kind: LatticeKind::Pyrochlore,
        dims: lattice.dims.clone(),
        ndim,
        coords,
        offsets: Vec::new(),
        adj: Vec::new(),
        bonds: Vec::new(),
        grid_lo: lo,
        grid_extent: extent,
        grid,
    };
    out.set_bonds(bonds);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// Hypercube of extent `2k` in the first two dimensions.
    A,
    /// Overlap `A_y ∩ A_(y1+1, y2)` of horizontally adjacent blocks.
    B,
    /// Union `A_z ∪ A_(z1, z2+2)` of vertically adjacent blocks.
    C,
}

/// A block of the slab `U = [1, 2kL]² × [1, 2k]^(d−2)`.
///
/// `A_y` spans `[(y_i − 2)k + 1, y_i k]` in the first two dimensions and
/// `[1, 2k]` in the others, so the even-index blocks `A_(2x1, 2x2)` tile `U`
/// and odd indices give the half-shifted blocks in between.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub index: [i64; 2],
    pub k: usize,
    pub region: Region,
}

impl Block {
    pub fn a(y: [i64; 2], k: usize, d: usize) -> Block {
        Block { kind: BlockKind::A, index: y, k, region: a_region(y, k, d) }
    }

    pub fn b(y: [i64; 2], k: usize, d: usize) -> Block {
        let region = a_region(y, k, d).intersect(&a_region([y[0] + 1, y[1]], k, d));
        Block { kind: BlockKind::B, index: y, k, region }
    }

    pub fn c(z: [i64; 2], k: usize, d: usize) -> Block {
        let region = a_region(z, k, d).hull(&a_region([z[0], z[1] + 2], k, d));
        Block { kind: BlockKind::C, index: z, k, region }
    }

    pub fn origin(&self) -> &[i64] {
        &self.region.lo
    }
}

fn a_region(y: [i64; 2], k: usize, d: usize) -> Region {
    let k = k as i64;
    let mut lo = vec![1; d];
    let mut hi = vec![2 * k; d];
    for i in 0..2 {
        lo[i] = (y[i] - 2) * k + 1;
        hi[i] = y[i] * k;
    }
    Region::new(lo, hi)
}

/// The slab `U` tiled by the `L²` even A-blocks.
pub fn slab(l: usize, k: usize, d: usize) -> Region {
    let mut hi = vec![2 * k as i64; d];
    hi[0] = (2 * k * l) as i64;
    hi[1] = (2 * k * l) as i64;
    Region::new(vec![1; d], hi)
}

/// Side lengths of the raw lattice box holding the slab.
pub fn slab_dims(l: usize, k: usize, d: usize) -> Vec<usize> {
    slab(l, k, d).hi.iter().map(|&h| h as usize).collect()
}

/// All blocks of the layout: the `L²` A-blocks `A_(2x1, 2x2)`, the B-overlaps
/// for `y1 = 2..2L−1, y2 = 2, 4, …, 2L`, and the C-unions for
/// `z1 = 2, 4, …, 2L, z2 = 2, 4, …, 2(L−1)`.
pub fn enumerate_blocks(l: usize, k: usize, d: usize) -> Result<Vec<Block>> {
    if l == 0 || k == 0 || d < 2 {
        return domain(format!("invalid block layout L={l}, k={k}, d={d}"));
    }
    let l = l as i64;
    let mut out = Vec::new();
    for x2 in 1..=l {
        for x1 in 1..=l {
            out.push(Block::a([2 * x1, 2 * x2], k, d));
        }
    }
    for y2 in (2..=2 * l).step_by(2) {
        for y1 in 2..2 * l {
            out.push(Block::b([y1, y2], k, d));
        }
    }
    for z2 in (2..2 * l).step_by(2) {
        for z1 in (2..=2 * l).step_by(2) {
            out.push(Block::c([z1, z2], k, d));
        }
    }
    Ok(out)
}

/// Dimensions of a roughly isotropic `L`-sized 2-d sample for lattices whose
/// integer embedding is anisotropic. The returned box is physically close to
/// square, so crossing probabilities at criticality sit near 1/2.
pub fn isotropic_dims(kind: LatticeKind, l: usize) -> Vec<usize> {
    match kind {
        // Honeycomb brick wall: columns √3/2 apart, rows 3/2 apart.
        LatticeKind::Hexagonal => vec![l, ((l as f64) / 3f64.sqrt()).round().max(2.0) as usize],
        // Offset triangular rows: columns 1 apart, rows √3/2 apart.
        LatticeKind::Triangular => {
            vec![l, ((l as f64) * 2.0 / 3f64.sqrt()).round().max(2.0) as usize]
        }
        LatticeKind::Diamond | LatticeKind::Pyrochlore => vec![l; 3],
        LatticeKind::Square => vec![l, l],
    }
}

/// Known critical probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdTable {
    bond: HashMap<String, f64>,
    site: HashMap<String, f64>,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        let s18 = (std::f64::consts::PI / 18.0).sin();
        let bond = [
            ("square-2", 0.5),
            ("square-3", 0.248_812),
            ("diamond-3", 0.389),
            ("hexagonal-2", 1.0 - 2.0 * s18),
            ("triangular-2", 2.0 * s18),
        ];
        let site = [
            ("square-2", 0.592_746),
            ("square-3", 0.311_608),
            ("diamond-3", 0.430_1),
            ("hexagonal-2", 0.697_04),
            ("triangular-2", 0.5),
            // Bond percolation on diamond is site percolation on its cover.
            ("pyrochlore-3", 0.389),
        ];
        ThresholdTable {
            bond: bond.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            site: site.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl ThresholdTable {
    fn key(kind: LatticeKind, d: usize) -> String {
        format!("{}-{}", kind.name(), d)
    }

    pub fn bond(&self, kind: LatticeKind, d: usize) -> Option<f64> {
        self.bond.get(&Self::key(kind, d)).copied()
    }

    pub fn site(&self, kind: LatticeKind, d: usize) -> Option<f64> {
        self.site.get(&Self::key(kind, d)).copied()
    }
}

/// Hexagonal bond threshold `1 − 2 sin(π/18)`.
pub fn hexagonal_bond_threshold() -> f64 {
    1.0 - 2.0 * (std::f64::consts::PI / 18.0).sin()
}

/// Triangular bond threshold `2 sin(π/18)`.
pub fn triangular_bond_threshold() -> f64 {
    2.0 * (std::f64::consts::PI / 18.0).sin()
}
