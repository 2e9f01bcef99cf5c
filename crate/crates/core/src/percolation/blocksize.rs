//! Block-size search over stitched populations of pre-generated blocks.
//!
//! For each trial `k`, a pool of independent block configurations is drawn
//! once. Each population of the renormalized `L×L` lattice then assigns a
//! random pool entry to every site block and draws the bonds that join
//! neighboring blocks afresh. `U` is evaluated on the assembled sample.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{slab_dims, BondId, Lattice, LatticeKind, SiteId};
use crate::stats::ci95;

use super::events::{evaluate_event, BlockLayout, Event};
use super::sample::{check_probability, trial_rng, PercolationSample};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSizeSearch {
    pub kind: LatticeKind,
    /// Lattice dimension; ignored for the fixed-dimension kinds.
    pub d: usize,
    pub p_site: f64,
    pub p_bond: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub target: f64,
    /// Pre-generated blocks per block shape.
    pub pool: usize,
    /// Stitched renormalized lattices per `k`.
    pub populations: usize,
    pub cap: usize,
    pub seed: u64,
}

impl BlockSizeSearch {
    pub fn dimension(&self) -> usize {
        match self.kind {
            LatticeKind::Square => self.d,
            LatticeKind::Hexagonal | LatticeKind::Triangular => 2,
            LatticeKind::Diamond | LatticeKind::Pyrochlore => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSizeResult {
    pub k: usize,
    pub estimate: f64,
    pub ci95: f64,
    /// `(k, P(U))` for every `k` tried.
    pub tried: Vec<(usize, f64)>,
}

/// Internal structure of one block shape, shared by every translate.
struct Shape {
    /// Per block of this shape: lattice site ids in canonical order.
    sites: Vec<Vec<SiteId>>,
    /// Per block: internal bond ids in canonical order.
    bonds: Vec<Vec<BondId>>,
}

/// Smallest `k ≤ cap` with estimated `P(U(L, k)) ≥ target`.
pub fn find_block_size(search: &BlockSizeSearch) -> Result<BlockSizeResult> {
    check_probability("p_site", search.p_site)?;
    check_probability("p_bond", search.p_bond)?;
    if !(search.target > 0.0 && search.target < 1.0) {
        return domain(format!("target probability {} must lie in (0, 1)", search.target));
    }
    if search.pool == 0 || search.populations == 0 || search.l == 0 || search.cap == 0 {
        return domain("pool, populations, L and cap must be positive");
    }
    if search.kind == LatticeKind::Pyrochlore {
        return Err(Error::NotImplemented("block search on the pyrochlore lattice".into()));
    }
    let mut tried = Vec::new();
    for k in 1..=search.cap {
        let (hits, n) = population_hits(search, k)?;
        let est = hits as f64 / n as f64;
        tried.push((k, est));
        if est >= search.target {
            return Ok(BlockSizeResult { k, estimate: est, ci95: ci95(hits, n), tried });
        }
    }
    Err(Error::SearchFailure { cap: search.cap })
}

/// Number of stitched populations (out of `search.populations`) on which
/// `U(L, k)` holds.
pub fn population_hits(search: &BlockSizeSearch, k: usize) -> Result<(u64, u64)> {
    let d = search.dimension();
    let layout = BlockLayout::new(search.l, k, d)?;
    let lattice = Arc::new(Lattice::new(search.kind, &slab_dims(search.l, k, d))?);
    let period = search.kind.translation_period();

    // group site blocks by shape (origin modulo the lattice period)
    let mut shape_of: Vec<usize> = Vec::new();
    let mut shape_index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut shapes: Vec<Shape> = Vec::new();
    let mut in_block = vec![false; lattice.num_bonds()];
    for x2 in 1..=search.l {
        for x1 in 1..=search.l {
            let region = layout.site_block([x1, x2]).region;
            let key: Vec<i64> = region.lo.iter().map(|c| c.rem_euclid(period)).collect();
            let sites = lattice.sites_in(&region);
            let mut bonds = Vec::new();
            for &s in &sites {
                for &(t, b) in lattice.incident(s) {
                    if t > s && region.contains(lattice.coord(t)) {
                        bonds.push(b);
                        in_block[b as usize] = true;
                    }
                }
            }
            let id = *shape_index.entry(key).or_insert_with(|| {
                shapes.push(Shape { sites: Vec::new(), bonds: Vec::new() });
                shapes.len() - 1
            });
            if let Some(first) = shapes[id].sites.first() {
                if first.len() != sites.len() || shapes[id].bonds[0].len() != bonds.len() {
                    return domain("block translates differ in structure");
                }
            }
            shapes[id].sites.push(sites);
            shapes[id].bonds.push(bonds);
            shape_of.push(id);
        }
    }
    let joining: Vec<BondId> = (0..lattice.num_bonds() as BondId).filter(|&b| !in_block[b as usize]).collect();

    // pool: per shape, `pool` configurations of (sites, bonds)
    let tag = ((k as u64) << 48) | ((search.l as u64) << 32);
    let pools: Vec<Vec<(Vec<bool>, Vec<bool>)>> = shapes
        .iter()
        .enumerate()
        .map(|(si, shape)| {
            let (ns, nb) = (shape.sites[0].len(), shape.bonds[0].len());
            (0..search.pool)
                .into_par_iter()
                .map(|j| {
                    let mut rng = trial_rng(search.seed, tag | ((si as u64) << 24) | j as u64);
                    let s = (0..ns).map(|_| rng.random::<f64>() < search.p_site).collect();
                    let b = (0..nb).map(|_| rng.random::<f64>() < search.p_bond).collect();
                    (s, b)
                })
                .collect()
        })
        .collect();

    let hits = (0..search.populations)
        .into_par_iter()
        .map(|m| -> Result<u64> {
            let mut rng = trial_rng(search.seed, tag | (1 << 31) | m as u64);
            let mut occupied = vec![false; lattice.num_sites()];
            let mut open = vec![false; lattice.num_bonds()];
            let mut per_shape_seen = vec![0usize; shapes.len()];
            for &sid in &shape_of {
                let which = per_shape_seen[sid];
                per_shape_seen[sid] += 1;
                let (ps, pb) = &pools[sid][rng.random_range(0..search.pool)];
                for (&s, &v) in shapes[sid].sites[which].iter().zip(ps) {
                    occupied[s as usize] = v;
                }
                for (&b, &v) in shapes[sid].bonds[which].iter().zip(pb) {
                    open[b as usize] = v;
                }
            }
            for &b in &joining {
                open[b as usize] = rng.random::<f64>() < search.p_bond;
            }
            let sample = PercolationSample::from_parts(&lattice, open, occupied)?;
            Ok(u64::from(evaluate_event(&sample, &Event::UFull, &layout)?))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok((hits, search.populations as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn search(kind: LatticeKind, p: f64) -> BlockSizeSearch {
        BlockSizeSearch { kind, d: 2, p_site: p, p_bond: p, l: 3, target: 0.5, pool: 20, populations: 20, cap: 6, seed: 1 }
    }

    #[test]
    fn deterministic_lattice_needs_k_one() {
        assert_eq!(find_block_size(&search(LatticeKind::Square, 1.0)).unwrap().k, 1);
        let mut s = search(LatticeKind::Diamond, 1.0);
        s.l = 2;
        // side-2 diamond blocks hold no crossing path, so k = 2 is minimal
        let r = find_block_size(&s).unwrap();
        assert_eq!((r.k, r.estimate), (2, 1.0));
        assert_eq!(r.tried[0], (1, 0.0));
    }

    #[test]
    fn hopeless_search_reports_cap() {
        let s = search(LatticeKind::Square, 0.0);
        assert_eq!(find_block_size(&s).unwrap_err(), Error::SearchFailure { cap: 6 });
    }

    #[test]
    fn bad_target_rejected() {
        let mut s = search(LatticeKind::Square, 0.9);
        s.target = 1.0;
        assert!(find_block_size(&s).is_err());
    }
}
