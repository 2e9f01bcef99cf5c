//! End-to-end extraction on random samples.

use std::collections::HashSet;
use std::sync::Arc;

use perconet::graph::{apply_schedule, Basis};
use perconet::lattice::{slab_dims, Lattice};
use perconet::percolation::{sample, BlockLayout};
use perconet::renorm::{
    brick_wall, extract, extraction_trials, plan_fixed_block, sample_graph, topology_matches, ExtractTarget, Pipeline,
};

const SUPER: ExtractTarget = ExtractTarget { l: 4, pipeline: Pipeline::Supercritical };

#[test]
fn supercritical_extraction_is_sound_and_likely() {
    let lat = Arc::new(Lattice::square(&[40, 40]));
    let r = extraction_trials(&lat, 0.8, 1.0, &SUPER, 60, 5).unwrap();
    assert!(r.all_schedules_sound);
    assert!(r.rate >= 0.85, "rate {} failures {:?}", r.rate, r.failures_by_stage);
}

#[test]
fn subcritical_extraction_fails() {
    let lat = Arc::new(Lattice::square(&[40, 40]));
    let r = extraction_trials(&lat, 0.4, 1.0, &SUPER, 40, 5).unwrap();
    assert_eq!(r.successes, 0);
    assert_eq!(r.failures_by_stage.values().sum::<u64>(), 40);
}

#[test]
fn successful_results_are_brick_walls() {
    let lat = Arc::new(Lattice::square(&[36, 36]));
    let mut seen = 0;
    for t in 0..30 {
        let s = sample(&lat, 0.8, 1.0, 11, t).unwrap();
        let Ok(r) = extract(&s, &SUPER) else { continue };
        seen += 1;
        assert_eq!(r.relabeled(), brick_wall(4, 4));
        assert!(topology_matches(&r.renormalized_graph, &brick_wall(4, 4)));
        let st = &r.stats;
        assert_eq!(st.measured_z + st.measured_y, r.schedule.len());
        assert_eq!(r.schedule.count(Basis::Z), st.measured_z);
        assert_eq!(r.schedule.len() + 16, lat.num_sites());
        assert_eq!(apply_schedule(&sample_graph(&s), &r.schedule).unwrap(), r.renormalized_graph);
    }
    assert!(seen > 20);
}

#[test]
fn fixed_block_accounting_in_three_dimensions() {
    let (l, k) = (2, 2);
    let lat = Arc::new(Lattice::square(&slab_dims(l, k, 3)));
    let target = ExtractTarget { l, pipeline: Pipeline::FixedBlock { k } };
    let r = extraction_trials(&lat, 0.9, 1.0, &target, 20, 3).unwrap();
    assert!(r.all_schedules_sound);
    assert!(r.successes > 0);
    let layout = BlockLayout::new(l, k, 3).unwrap();
    let slab = lat.sites_in(&layout.slab()).len();
    assert_eq!(slab, l * l * (2 * k).pow(3));
    for o in r.outcomes.iter().filter(|o| o.success) {
        assert_eq!(o.stats.as_ref().unwrap().sites_consumed, slab);
    }
}

#[test]
fn fixed_block_plans_are_loop_free() {
    let (l, k) = (3, 3);
    let lat = Arc::new(Lattice::square(&slab_dims(l, k, 2)));
    let layout = BlockLayout::new(l, k, 2).unwrap();
    let mut planned = 0;
    for t in 0..30 {
        let s = sample(&lat, 0.75, 1.0, 21, t).unwrap();
        let Ok(plan) = plan_fixed_block(&s, &layout) else { continue };
        planned += 1;
        assert_eq!(plan.mid_qubits.len(), l * l);
        let mut exits = HashSet::new();
        for bp in &plan.inter_block_paths {
            let distinct: HashSet<_> = bp.path.iter().collect();
            assert_eq!(distinct.len(), bp.path.len(), "path revisits a site");
            assert_eq!(bp.path.first(), Some(&plan.mid_qubits[bp.blocks[0] as usize]));
            assert_eq!(bp.path.last(), Some(&plan.mid_qubits[bp.blocks[1] as usize]));
            for w in bp.path.windows(2) {
                let b = lat.bond_between(w[0], w[1]).expect("consecutive sites adjacent");
                assert!(s.is_open(b));
            }
            assert!(exits.insert(bp.exit[0]) && exits.insert(bp.exit[1]));
        }
        if let Ok(sk) = plan.skeleton(&s) {
            assert_eq!(sk.target, brick_wall(l, l));
        }
    }
    assert!(planned > 10, "only {planned} plans");
}
