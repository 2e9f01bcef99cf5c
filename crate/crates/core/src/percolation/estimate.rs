//! Monte Carlo estimators. Trial `t` always uses stream `t` of the
//! experiment seed, and results are merged by counting, so every estimator
//! returns the same value for any number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{isotropic_dims, Lattice, LatticeKind, SiteId, ThresholdTable};
use crate::stats::{ci95, linear_fit, LinearFit};

use super::clusters::{crossing_clusters, label_clusters, UnionFind};
use super::events::{evaluate_event, BlockLayout, Event};
use super::flow::count_edge_disjoint_crossings;
use super::sample::{check_probability, sample, Uniforms};

/// Binomial estimate of an event probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    pub event: String,
    pub lattice: String,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub k: usize,
    pub p_site: f64,
    pub p_bond: f64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci95: f64,
    pub seed: u64,
}

impl EventEstimate {
    #[allow(clippy::too_many_arguments)]
    pub fn new(event: &str, lattice: &Lattice, l: usize, k: usize, p_site: f64, p_bond: f64, trials: u64, hits: u64, seed: u64) -> Self {
        EventEstimate {
            event: event.to_string(),
            lattice: lattice.kind().name().to_string(),
            d: lattice.ndim(),
            l,
            k,
            p_site,
            p_bond,
            trials,
            hits,
            estimate: hits as f64 / trials as f64,
            ci95: ci95(hits, trials),
            seed,
        }
    }

    /// Binomial standard error.
    pub fn sigma(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    Ok(())
}

/// Counts trials `0..trials` for which `f(trial)` holds, in parallel.
pub fn count_hits<F>(trials: u64, f: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(t).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

pub fn estimate_event_probability(
    lattice: &Arc<Lattice>,
    event: &Event,
    layout: &BlockLayout,
    p_bond: f64,
    p_site: f64,
    trials: u64,
    seed: u64,
) -> Result<EventEstimate> {
    check_trials(trials)?;
    check_probability("p_bond", p_bond)?;
    check_probability("p_site", p_site)?;
    let hits = count_hits(trials, |t| {
        let s = sample(lattice, p_bond, p_site, seed, t)?;
        evaluate_event(&s, event, layout)
    })?;
    Ok(EventEstimate::new(event.kind().name(), lattice, layout.l, layout.k, p_site, p_bond, trials, hits, seed))
}

/// Smallest bond uniform at which the lattice first acquires an open
/// crossing along `axis`, given the site occupations at `p_site`. The sample
/// thresholded at `p_bond` crosses iff `p_bond > crossing_point`.
pub fn crossing_point(lattice: &Lattice, u: &Uniforms, p_site: f64, axis: usize) -> f64 {
    let n = lattice.num_sites();
    let (src, sink) = (n as u32, n as u32 + 1);
    let mut uf = UnionFind::new(n + 2);
    let lo = (0..n as SiteId).map(|s| lattice.coord(s)[axis]).min().unwrap_or(0);
    let hi = (0..n as SiteId).map(|s| lattice.coord(s)[axis]).max().unwrap_or(0);
    let occ = |s: SiteId| u.site[s as usize] < p_site;
    for s in 0..n as SiteId {
        if !occ(s) {
            continue;
        }
        let x = lattice.coord(s)[axis];
        if x == lo {
            uf.union(s, src);
        }
        if x == hi {
            uf.union(s, sink);
        }
    }
    if uf.find(src) == uf.find(sink) {
        return f64::NEG_INFINITY;
    }
    let mut order: Vec<u32> = (0..lattice.num_bonds() as u32)
        .filter(|&b| {
            let [x, y] = lattice.bond(b);
            occ(x) && occ(y)
        })
        .collect();
    order.sort_unstable_by(|&a, &b| u.bond[a as usize].total_cmp(&u.bond[b as usize]));
    for b in order {
        let [x, y] = lattice.bond(b);
        uf.union(x, y);
        if uf.find(src) == uf.find(sink) {
            return u.bond[b as usize];
        }
    }
    f64::INFINITY
}

/// Crossing probability along `axis` at each `p_bond` in `ps`, using one set
/// of coupled uniforms per trial.
pub fn crossing_sweep(
    lattice: &Arc<Lattice>,
    ps: &[f64],
    p_site: f64,
    axis: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<EventEstimate>> {
    check_trials(trials)?;
    check_probability("p_site", p_site)?;
    for &p in ps {
        check_probability("p_bond", p)?;
    }
    let points: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| crossing_point(lattice, &Uniforms::draw(lattice, seed, t), p_site, axis))
        .collect();
    let l = lattice.dims()[axis];
    Ok(ps
        .iter()
        .map(|&p| {
            let hits = points.iter().filter(|&&c| p > c).count() as u64;
            EventEstimate::new("crossing", lattice, l, 0, p_site, p, trials, hits, seed)
        })
        .collect())
}

/// Linear interpolation of the point where `ys` (sampled at increasing `xs`)
/// first reaches `target`.
pub fn interpolate_crossing(xs: &[f64], ys: &[f64], target: f64) -> Option<f64> {
    for i in 1..xs.len() {
        let (y0, y1) = (ys[i - 1] - target, ys[i] - target);
        if y0 == 0.0 {
            return Some(xs[i - 1]);
        }
        if y0 < 0.0 && y1 >= 0.0 {
            return Some(xs[i - 1] + (xs[i] - xs[i - 1]) * (-y0) / (y1 - y0));
        }
    }
    None
}

/// Lattice of nominal size `l` used by the finite-size estimators.
pub fn estimator_lattice(kind: LatticeKind, l: usize) -> Result<Arc<Lattice>> {
    Ok(Arc::new(Lattice::new(kind, &isotropic_dims(kind, l))?))
}

/// Finite-size percolation probability: the fraction of trials in which the
/// site nearest the center belongs to an open left-to-right crossing cluster
/// of the whole sample (bond percolation, all sites occupied).
pub fn theta_estimate(kind: LatticeKind, p: f64, l: usize, trials: u64, seed: u64) -> Result<EventEstimate> {
    if l < 2 {
        return domain("theta estimate needs L >= 2");
    }
    check_trials(trials)?;
    check_probability("p", p)?;
    let lat = estimator_lattice(kind, l)?;
    let center = lat.central_site();
    let hits = count_hits(trials, |t| {
        let s = sample(&lat, p, 1.0, seed, t)?;
        let lab = label_clusters(&s);
        let Some(c) = lab.label(center) else { return Ok(false) };
        Ok(crossing_clusters(&lab, 0).contains(&c))
    })?;
    Ok(EventEstimate::new("theta", &lat, l, 0, 1.0, p, trials, hits, seed))
}

/// Probability that the sites at `a` and `b` are connected (bond percolation).
pub fn pair_connection_probability(lattice: &Arc<Lattice>, a: &[i64], b: &[i64], p: f64, trials: u64, seed: u64) -> Result<EventEstimate> {
    check_trials(trials)?;
    let sa = lattice.site_at(a).ok_or_else(|| Error::Domain(format!("no site at {a:?}")))?;
    let sb = lattice.site_at(b).ok_or_else(|| Error::Domain(format!("no site at {b:?}")))?;
    let hits = count_hits(trials, |t| {
        let s = sample(lattice, p, 1.0, seed, t)?;
        Ok(label_clusters(&s).connected(sa, sb))
    })?;
    Ok(EventEstimate::new("H_pairConnect", lattice, lattice.dims()[0], 0, 1.0, p, trials, hits, seed))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lattice: String,
    pub p: f64,
    pub sizes: Vec<usize>,
    pub mean_largest: Vec<f64>,
    pub trials: u64,
    /// Fit of the mean largest cluster against `ln L`.
    pub log_fit: LinearFit,
    /// Fit of the mean largest cluster against `L`.
    pub linear_fit: LinearFit,
    pub seed: u64,
}

/// Mean size of the largest cluster for each `L` in `sizes`, below threshold.
pub fn largest_cluster_scaling(
    kind: LatticeKind,
    p: f64,
    sizes: &[usize],
    trials: u64,
    seed: u64,
    thresholds: &ThresholdTable,
) -> Result<ScalingReport> {
    check_trials(trials)?;
    check_probability("p", p)?;
    if sizes.len() < 2 {
        return domain("need at least two lattice sizes");
    }
    let d = isotropic_dims(kind, 2).len();
    let pc = thresholds
        .bond(kind, d)
        .ok_or_else(|| Error::Domain(format!("no bond threshold known for {kind}")))?;
    if p >= pc {
        return domain(format!("p = {p} is not below the threshold {pc}; the logarithmic law does not apply"));
    }
    let mut means = Vec::new();
    for &l in sizes {
        let lat = estimator_lattice(kind, l)?;
        let total: u64 = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<u64> {
                let s = sample(&lat, p, 1.0, seed, t)?;
                Ok(label_clusters(&s).largest_cluster_size() as u64)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        means.push(total as f64 / trials as f64);
    }
    let ls: Vec<f64> = sizes.iter().map(|&l| l as f64).collect();
    let logs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    Ok(ScalingReport {
        lattice: kind.name().to_string(),
        p,
        sizes: sizes.to_vec(),
        log_fit: linear_fit(&logs, &means),
        linear_fit: linear_fit(&ls, &means),
        mean_largest: means,
        trials,
        seed,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingCountReport {
    pub p: f64,
    pub sizes: Vec<usize>,
    pub mean_count: Vec<f64>,
    pub trials: u64,
    pub fit: LinearFit,
    pub seed: u64,
}

/// Mean number of edge-disjoint left-right crossings of an `n×n` square
/// sample, with a linear fit in `n`.
pub fn edge_disjoint_scaling(p: f64, sizes: &[usize], trials: u64, seed: u64) -> Result<CrossingCountReport> {
    check_trials(trials)?;
    check_probability("p", p)?;
    let mut means = Vec::new();
    for &n in sizes {
        let lat = Arc::new(Lattice::square(&[n, n]));
        let bounds = lat.bounds();
        let total: u64 = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<u64> {
                let s = sample(&lat, p, 1.0, seed, t)?;
                Ok(count_edge_disjoint_crossings(&s, &bounds, 0) as u64)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        means.push(total as f64 / trials as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    Ok(CrossingCountReport { p, sizes: sizes.to_vec(), fit: linear_fit(&xs, &means), mean_count: means, trials, seed })
}

/// Block size and resource count of the ansatz `k = ⌈L^ε⌉`, `R = L²·k^d`.
pub fn resource_bound(l: usize, epsilon: f64, d: usize) -> Result<(usize, u128)> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return domain(format!("epsilon = {epsilon} must be positive"));
    }
    let k = ((l as f64).powf(epsilon) - 1e-12).ceil().max(1.0) as usize;
    let r = (l as u128).pow(2) * (k as u128).pow(d as u32);
    Ok((k, r))
}

/// Constants of the asymptotic bounds. The theory only asserts that positive
/// constants exist, so these are user inputs for illustrative curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub g: f64,
    pub a: f64,
    pub c: f64,
    pub s: f64,
    pub t: f64,
    pub beta: f64,
}

impl BoundConstants {
    pub fn new(g: f64, a: f64, c: f64, s: f64, t: f64, beta: f64) -> Result<Self> {
        let b = BoundConstants { g, a, c, s, t, beta };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g", self.g), ("a", self.a), ("c", self.c), ("s", self.s), ("t", self.t), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("bound constant {name} = {v} must be positive"));
            }
        }
        Ok(())
    }

    /// Lower bound on the single-block crossing probability.
    pub fn block_crossing(&self, k: usize) -> f64 {
        1.0 - (-self.g * (k * k) as f64).exp()
    }

    /// Lower bound on "at most one crossing cluster" in a block.
    pub fn at_most_one(&self, k: usize, d: usize) -> f64 {
        1.0 - (2.0 * k as f64).powi(2 * d as i32) * self.a * (-self.c * k as f64).exp()
    }

    /// Lower bound on the full renormalized lattice for `d ≥ 3`.
    pub fn full_lattice(&self, l: usize, k: usize, d: usize) -> f64 {
        self.at_most_one(k, d).max(0.0).powi(5 * (l * l) as i32)
    }

    /// Lower bound on all row and column crossings for `d = 2`.
    pub fn full_lattice_2d(&self, l: usize, k: usize) -> f64 {
        let one = 1.0 - self.s * (k * l) as f64 * (-self.t * k as f64).exp();
        one.max(0.0).powi(2 * l as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resource_bound_examples() {
        assert_eq!(resource_bound(10, 0.5, 3).unwrap(), (4, 6400));
        assert_eq!(resource_bound(100, 0.25, 2).unwrap(), (4, 160_000));
        assert_eq!(resource_bound(50, 1e-15, 3).unwrap(), (1, 2500));
        assert!(resource_bound(10, 0.0, 2).is_err());
    }

    #[test]
    fn bound_constants_validated() {
        assert!(BoundConstants::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_ok());
        assert!(BoundConstants::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let b = BoundConstants::new(0.5, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(b.block_crossing(4) > b.block_crossing(2));
    }

    #[test]
    fn crossing_point_matches_direct_evaluation() {
        let lat = Arc::new(Lattice::square(&[6, 6]));
        for t in 0..100 {
            let u = Uniforms::draw(&lat, 3, t);
            let c = crossing_point(&lat, &u, 0.9, 0);
            for p in [0.2, 0.4, 0.5, 0.6, 0.8] {
                let s = super::super::sample::PercolationSample::threshold(&lat, &u, p, 0.9, 3, t);
                let direct = !crossing_clusters(&label_clusters(&s), 0).is_empty();
                assert_eq!(direct, p > c, "trial {t} p {p}");
            }
        }
    }

    #[test]
    fn interpolation() {
        let x = [0.4, 0.5, 0.6];
        let y = [0.1, 0.3, 0.7];
        assert!((interpolate_crossing(&x, &y, 0.5).unwrap() - 0.55).abs() < 1e-12);
        assert_eq!(interpolate_crossing(&x, &y, 0.9), None);
    }

    #[test]
    fn theta_extremes() {
        assert_eq!(theta_estimate(LatticeKind::Square, 1.0, 8, 20, 1).unwrap().estimate, 1.0);
        assert_eq!(theta_estimate(LatticeKind::Square, 0.0, 8, 20, 1).unwrap().estimate, 0.0);
        assert!(theta_estimate(LatticeKind::Square, 0.5, 1, 20, 1).is_err());
    }

    #[test]
    fn largest_cluster_guards() {
        let t = ThresholdTable::default();
        assert!(largest_cluster_scaling(LatticeKind::Square, 0.6, &[8, 16], 4, 0, &t).is_err());
        let r = largest_cluster_scaling(LatticeKind::Square, 0.0, &[8, 16], 4, 0, &t).unwrap();
        assert_eq!(r.mean_largest, vec![1.0, 1.0]);
    }
}
