//! Monte Carlo crossing and block events against exhaustive enumeration.

use std::sync::Arc;

use perconet::lattice::Lattice;
use perconet::percolation::{
    crossing_sweep, estimate_event_probability, evaluate_event, label_clusters, crossing_clusters, BlockLayout, Event,
    PercolationSample,
};

/// `Σ_configs P(config) · [event]` over all bond configurations.
fn exact<F: Fn(&PercolationSample) -> bool>(lat: &Arc<Lattice>, p: f64, event: F) -> f64 {
    let m = lat.num_bonds();
    assert!(m <= 20);
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let open: Vec<bool> = (0..m).map(|b| mask >> b & 1 == 1).collect();
        let k = mask.count_ones() as i32;
        let s = PercolationSample::from_parts(lat, open, vec![true; lat.num_sites()]).unwrap();
        if event(&s) {
            total += p.powi(k) * (1.0 - p).powi(m as i32 - k);
        }
    }
    total
}

#[test]
fn crossing_of_three_by_three() {
    let lat = Arc::new(Lattice::square(&[3, 3]));
    let ps = [0.3, 0.5, 0.7];
    let trials = 20_000;
    let mc = crossing_sweep(&lat, &ps, 1.0, 0, trials, 11).unwrap();
    for (i, &p) in ps.iter().enumerate() {
        let want = exact(&lat, p, |s| !crossing_clusters(&label_clusters(s), 0).is_empty());
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!((mc[i].estimate - want).abs() < 3.0 * sigma, "p={p}: {} vs {want}", mc[i].estimate);
    }
}

#[test]
fn self_dual_rectangle_crosses_with_probability_half() {
    // 3 × 2 sites: horizontal crossing of an (n+1) × n box at p = 1/2
    let lat = Arc::new(Lattice::square(&[3, 2]));
    let want = exact(&lat, 0.5, |s| !crossing_clusters(&label_clusters(s), 0).is_empty());
    assert!((want - 0.5).abs() < 1e-12, "{want}");
}

#[test]
fn block_event_in_two_and_three_dimensions() {
    for d in [2, 3] {
        let layout = BlockLayout::new(1, 1, d).unwrap();
        let lat = Arc::new(Lattice::square(&vec![2; d]));
        let event = Event::ACross { y: [2, 2] };
        let p = 0.45;
        let want = exact(&lat, p, |s| evaluate_event(s, &event, &layout).unwrap());
        let trials = 20_000;
        let mc = estimate_event_probability(&lat, &event, &layout, p, 1.0, trials, 3).unwrap();
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!((mc.estimate - want).abs() < 3.0 * sigma, "d={d}: {} vs {want}", mc.estimate);
    }
}
