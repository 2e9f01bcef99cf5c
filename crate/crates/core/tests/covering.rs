//! Bond percolation on the diamond lattice equals site percolation on its
//! covering (pyrochlore) lattice.

use std::sync::Arc;

use perconet::lattice::{covering_lattice, Lattice, LatticeKind};
use perconet::percolation::{label_clusters, sample, PercolationSample};

#[test]
fn cover_adjacency_is_shared_endpoint() {
    let d = Lattice::diamond(&[5, 5, 5]);
    let c = covering_lattice(&d).unwrap();
    assert_eq!(c.kind(), LatticeKind::Pyrochlore);
    assert_eq!(c.num_sites(), d.num_bonds());
    let m = d.num_bonds() as u32;
    for b1 in 0..m {
        for b2 in b1 + 1..m {
            let [x1, y1] = d.bond(b1);
            let [x2, y2] = d.bond(b2);
            let share = x1 == x2 || x1 == y2 || y1 == x2 || y1 == y2;
            assert_eq!(c.bond_between(b1, b2).is_some(), share, "bonds {b1}, {b2}");
        }
    }
}

#[test]
fn clusters_correspond() {
    let d = Arc::new(Lattice::diamond(&[6, 6, 6]));
    let c = Arc::new(covering_lattice(&d).unwrap());
    for stream in 0..20 {
        let s = sample(&d, 0.4, 1.0, 99, stream).unwrap();
        let open: Vec<bool> = (0..d.num_bonds() as u32).map(|b| s.is_open(b)).collect();
        let cover = PercolationSample::from_parts(&c, vec![true; c.num_bonds()], open.clone()).unwrap();
        let (ld, lc) = (label_clusters(&s), label_clusters(&cover));
        let open_ids: Vec<u32> = (0..open.len() as u32).filter(|&b| open[b as usize]).collect();
        for (i, &b1) in open_ids.iter().enumerate() {
            for &b2 in &open_ids[i + 1..] {
                let via_bonds = ld.connected(d.bond(b1)[0], d.bond(b2)[0]);
                assert_eq!(lc.connected(b1, b2), via_bonds, "stream {stream}, bonds {b1}, {b2}");
            }
        }
    }
}

#[test]
fn other_kinds_have_no_cover() {
    assert!(covering_lattice(&Lattice::square(&[3, 3])).is_err());
}
