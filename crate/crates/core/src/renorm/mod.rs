//! Renormalization pipelines from a percolated lattice sample to a
//! brick-wall hexagonal graph state.

mod fixed;
mod skeleton;
mod wall;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fixed::{bfs_labels, block_region, connect_blocks, descend, plan_fixed_block, select_mid_qubit, BlockPath, PathPlan};
pub use skeleton::{
    brick_wall, correct_local_errors, reduce, topology_matches, ExtractionResult, ExtractionStats, Skeleton, Thread,
};
pub use wall::{bridge_decompose, find_paths, wall_follower, Bridge, BridgePlan, WallFollower};

use crate::error::{domain, Error, Result};
use crate::graph::{apply_schedule, GraphState, Vertex};
use crate::lattice::{Lattice, LatticeKind};
use crate::percolation::{sample, BlockLayout, PercolationSample};
use crate::stats::ci95;

/// Occupied sites and conducting bonds of a sample as a graph on site ids.
pub fn sample_graph(sample: &PercolationSample) -> GraphState {
    let lat = sample.lattice();
    let mut g = GraphState::new();
    for s in 0..lat.num_sites() as Vertex {
        if sample.is_occupied(s) {
            g.add_vertex(s);
        }
    }
    for (b, &[x, y]) in lat.bonds().iter().enumerate() {
        if sample.conducts(b as u32) {
            g.add_edge(x, y).expect("bond endpoints are occupied");
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "camelCase")]
pub enum Pipeline {
    FixedBlock { k: usize },
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractTarget {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(flatten)]
    pub pipeline: Pipeline,
}

/// Runs the pipeline on one sample. Failures of a stage come back as
/// [`Error::Extraction`].
pub fn extract(sample: &PercolationSample, target: &ExtractTarget) -> Result<ExtractionResult> {
    extract_from(sample, &sample_graph(sample), target)
}

fn extract_from(sample: &PercolationSample, graph: &GraphState, target: &ExtractTarget) -> Result<ExtractionResult> {
    let lat = sample.lattice();
    if target.l == 0 {
        return domain("target size L must be positive");
    }
    match target.pipeline {
        Pipeline::FixedBlock { k } => {
            if lat.kind() == LatticeKind::Pyrochlore {
                return Err(Error::NotImplemented("fixed-block layout on the pyrochlore lattice".into()));
            }
            let layout = BlockLayout::new(target.l, k, lat.ndim())?;
            let plan = plan_fixed_block(sample, &layout)?;
            let consumed = lat.sites_in(&layout.slab()).len();
            reduce(graph, plan.skeleton(sample)?, consumed)
        }
        Pipeline::Supercritical => {
            let (h, v) = find_paths(sample)?;
            let plan = bridge_decompose(&h, &v, target.l)?;
            reduce(graph, plan.skeleton, lat.num_sites())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionTrial {
    pub stream: u64,
    pub success: bool,
    pub failed_stage: Option<String>,
    pub schedule_sound: bool,
    pub topology_ok: bool,
    pub stats: Option<ExtractionStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub lattice: LatticeKind,
    pub dims: Vec<usize>,
    pub target: ExtractTarget,
    pub p_bond: f64,
    pub p_site: f64,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci95: f64,
    /// Every completed extraction replays to its result graph.
    pub all_schedules_sound: bool,
    pub failures_by_stage: BTreeMap<String, u64>,
    pub seed: u64,
    #[serde(skip)]
    pub outcomes: Vec<ExtractionTrial>,
}

fn run_trial(lattice: &Arc<Lattice>, p_bond: f64, p_site: f64, target: &ExtractTarget, seed: u64, t: u64) -> Result<ExtractionTrial> {
    let s = sample(lattice, p_bond, p_site, seed, t)?;
    let g = sample_graph(&s);
    match extract_from(&s, &g, target) {
        Ok(r) => {
            let schedule_sound = apply_schedule(&g, &r.schedule)? == r.renormalized_graph;
            let topology_ok = topology_matches(&r.renormalized_graph, &r.target);
            Ok(ExtractionTrial {
                stream: t,
                success: schedule_sound && topology_ok,
                failed_stage: None,
                schedule_sound,
                topology_ok,
                stats: Some(r.stats),
            })
        }
        Err(Error::Extraction { stage, .. }) => Ok(ExtractionTrial {
            stream: t,
            success: false,
            failed_stage: Some(stage),
            schedule_sound: true,
            topology_ok: false,
            stats: None,
        }),
        Err(e) => Err(e),
    }
}

/// Monte Carlo extraction success on independent samples, trial `t` drawn
/// from stream `t` of `seed`.
pub fn extraction_trials(
    lattice: &Arc<Lattice>,
    p_bond: f64,
    p_site: f64,
    target: &ExtractTarget,
    trials: u64,
    seed: u64,
) -> Result<ExtractionReport> {
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let outcomes: Vec<ExtractionTrial> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(lattice, p_bond, p_site, target, seed, t))
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|o| o.success).count() as u64;
    let mut failures_by_stage = BTreeMap::new();
    for o in &outcomes {
        if let Some(st) = &o.failed_stage {
            *failures_by_stage.entry(st.clone()).or_insert(0) += 1;
        } else if !o.success {
            *failures_by_stage.entry("topology".to_string()).or_insert(0) += 1;
        }
    }
    Ok(ExtractionReport {
        lattice: lattice.kind(),
        dims: lattice.dims().to_vec(),
        target: *target,
        p_bond,
        p_site,
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        ci95: ci95(successes, trials),
        all_schedules_sound: outcomes.iter().all(|o| o.schedule_sound),
        failures_by_stage,
        seed,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSizeResult {
    pub n: usize,
    pub rate: f64,
    pub ci95: f64,
    pub tried: Vec<(usize, f64)>,
}

/// Smallest side `n ∈ {3L, 4L, …} ≤ cap` of a square bond-percolation sample
/// whose supercritical extraction of an `L × L` brick wall succeeds with
/// frequency at least `target` over `trials` samples.
pub fn find_lattice_size(p: f64, l: usize, target: f64, trials: u64, cap: usize, seed: u64) -> Result<LatticeSizeResult> {
    if !(target > 0.0 && target < 1.0) {
        return domain(format!("target success rate {target} must lie in (0, 1)"));
    }
    let goal = ExtractTarget { l, pipeline: Pipeline::Supercritical };
    let mut tried = Vec::new();
    for n in (3 * l..=cap).step_by(l.max(1)) {
        let lat = Arc::new(Lattice::square(&[n, n]));
        let r = extraction_trials(&lat, p, 1.0, &goal, trials, seed ^ (n as u64) << 40)?;
        tried.push((n, r.rate));
        if r.rate >= target {
            return Ok(LatticeSizeResult { n, rate: r.rate, ci95: r.ci95, tried });
        }
    }
    Err(Error::SearchFailure { cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_graph_of_full_square() {
        let lat = Arc::new(Lattice::square(&[3, 3]));
        let g = sample_graph(&PercolationSample::full(&lat));
        assert_eq!((g.num_vertices(), g.num_edges()), (9, 12));
    }

    #[test]
    fn fixed_block_on_full_lattice() {
        for (l, k) in [(1, 1), (2, 1), (2, 2), (3, 2), (4, 2), (3, 3)] {
            let lat = Arc::new(Lattice::square(&crate::lattice::slab_dims(l, k, 2)));
            let s = PercolationSample::full(&lat);
            let r = extract(&s, &ExtractTarget { l, pipeline: Pipeline::FixedBlock { k } }).unwrap();
            assert_eq!(r.relabeled(), brick_wall(l, l), "L={l} k={k}");
            assert_eq!(r.stats.sites_consumed, l * l * (2 * k).pow(2));
            assert_eq!(apply_schedule(&sample_graph(&s), &r.schedule).unwrap(), r.renormalized_graph);
        }
    }

    #[test]
    fn side_two_blocks_cannot_separate_threads() {
        // threads of vertically adjacent 2×2 blocks always touch
        let lat = Arc::new(Lattice::square(&crate::lattice::slab_dims(3, 1, 2)));
        let s = PercolationSample::full(&lat);
        let e = extract(&s, &ExtractTarget { l: 3, pipeline: Pipeline::FixedBlock { k: 1 } }).unwrap_err();
        assert!(matches!(e, Error::Extraction { ref stage, .. } if stage == "correct_local_errors"));
    }

    #[test]
    fn fixed_block_in_three_dimensions() {
        let (l, k) = (2, 1);
        let lat = Arc::new(Lattice::square(&crate::lattice::slab_dims(l, k, 3)));
        let s = PercolationSample::full(&lat);
        let r = extract(&s, &ExtractTarget { l, pipeline: Pipeline::FixedBlock { k } }).unwrap();
        assert_eq!(r.relabeled(), brick_wall(2, 2));
        assert_eq!(r.stats.sites_consumed, l * l * (2 * k).pow(3));
    }

    #[test]
    fn supercritical_on_full_lattice() {
        let l = 3;
        let lat = Arc::new(Lattice::square(&[3 * l + 2, 3 * l + 2]));
        let s = PercolationSample::full(&lat);
        let r = extract(&s, &ExtractTarget { l, pipeline: Pipeline::Supercritical }).unwrap();
        assert_eq!(r.relabeled(), brick_wall(l, l));
        assert!(topology_matches(&r.renormalized_graph, &brick_wall(l, l)));
    }

    #[test]
    fn closed_lattice_fails_with_stage() {
        let lat = Arc::new(Lattice::square(&[8, 8]));
        let s = sample(&lat, 0.0, 1.0, 1, 0).unwrap();
        for pipeline in [Pipeline::FixedBlock { k: 2 }, Pipeline::Supercritical] {
            let e = extract(&s, &ExtractTarget { l: 2, pipeline }).unwrap_err();
            assert!(matches!(e, Error::Extraction { .. }), "{e}");
        }
    }

    #[test]
    fn target_serde() {
        let t = ExtractTarget { l: 4, pipeline: Pipeline::FixedBlock { k: 3 } };
        let j = serde_json::to_string(&t).unwrap();
        assert_eq!(j, r#"{"L":4,"pipeline":"fixedBlock","k":3}"#);
        assert_eq!(serde_json::from_str::<ExtractTarget>(&j).unwrap(), t);
    }
}
