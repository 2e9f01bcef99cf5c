//! Graph states and their Pauli-measurement rewrite rules.
//!
//! Measurement byproducts (local Clifford corrections) are not tracked: every
//! rule yields the post-measurement graph up to local unitaries, which the
//! statevector oracle certifies on small instances.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::percolation::trial_rng;

pub type Vertex = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

/// Undirected simple graph on `u32` vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GraphState {
    adj: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<Vertex>,
    edges: Vec<[Vertex; 2]>,
}

impl Serialize for GraphState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson { vertices: self.vertices().collect(), edges: self.edges() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraphState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = GraphJson::deserialize(d)?;
        GraphState::from_edges(g.vertices, &g.edges).map_err(serde::de::Error::custom)
    }
}

impl GraphState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph; rejects self-loops and edges to unknown vertices.
    pub fn from_edges(vertices: impl IntoIterator<Item = Vertex>, edges: &[[Vertex; 2]]) -> Result<Self> {
        let mut g = GraphState::new();
        for v in vertices {
            g.add_vertex(v);
        }
        for &[a, b] in edges {
            if !g.contains(a) || !g.contains(b) {
                return domain(format!("edge ({a}, {b}) references a missing vertex"));
            }
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Path `0 – 1 – … – (n−1)`.
    pub fn path(n: u32) -> Self {
        let edges: Vec<_> = (1..n).map(|i| [i - 1, i]).collect();
        Self::from_edges(0..n, &edges).unwrap()
    }

    /// Cycle on `0..n`.
    pub fn cycle(n: u32) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.add_edge(n - 1, 0).unwrap();
        }
        g
    }

    /// Star with center `0` and arms `1..=arms`.
    pub fn star(arms: u32) -> Self {
        let edges: Vec<_> = (1..=arms).map(|i| [0, i]).collect();
        Self::from_edges(0..=arms, &edges).unwrap()
    }

    pub fn complete(n: u32) -> Self {
        let mut g = Self::from_edges(0..n, &[]).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b).unwrap();
            }
        }
        g
    }

    pub fn add_vertex(&mut self, v: Vertex) {
        self.adj.entry(v).or_default();
    }

    pub fn add_edge(&mut self, a: Vertex, b: Vertex) -> Result<()> {
        if a == b {
            return domain(format!("self-loop at {a}"));
        }
        self.adj.entry(a).or_default().insert(b);
        self.adj.entry(b).or_default().insert(a);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: Vertex, b: Vertex) {
        if let Some(n) = self.adj.get_mut(&a) {
            n.remove(&b);
        }
        if let Some(n) = self.adj.get_mut(&b) {
            n.remove(&a);
        }
    }

    pub fn toggle_edge(&mut self, a: Vertex, b: Vertex) {
        if self.has_edge(a, b) {
            self.remove_edge(a, b);
        } else {
            self.add_edge(a, b).expect("distinct vertices");
        }
    }

    /// Removes `v` and its edges; returns its former neighborhood.
    pub fn remove_vertex(&mut self, v: Vertex) -> BTreeSet<Vertex> {
        let n = self.adj.remove(&v).unwrap_or_default();
        for u in &n {
            self.adj.get_mut(u).unwrap().remove(&v);
        }
        n
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn neighbors(&self, v: Vertex) -> Result<&BTreeSet<Vertex>> {
        self.adj.get(&v).ok_or_else(|| Error::Domain(format!("vertex {v} is not in the graph")))
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj.get(&v).map_or(0, |n| n.len())
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adj.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Edges `[a, b]` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<[Vertex; 2]> {
        self.adj
            .iter()
            .flat_map(|(&a, n)| n.range(a + 1..).map(move |&b| [a, b]))
            .collect()
    }

    /// Subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<Vertex>) -> GraphState {
        let adj = self
            .adj
            .iter()
            .filter(|(v, _)| keep.contains(v))
            .map(|(&v, n)| (v, n.intersection(keep).copied().collect()))
            .collect();
        GraphState { adj }
    }

    /// Toggles every edge inside `N(a)`.
    pub fn local_complement(&mut self, a: Vertex) -> Result<()> {
        let n: Vec<Vertex> = self.neighbors(a)?.iter().copied().collect();
        for (i, &x) in n.iter().enumerate() {
            for &y in &n[i + 1..] {
                self.toggle_edge(x, y);
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.adj.keys().next() else { return true };
        let mut seen = BTreeSet::from([start]);
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            for &u in &self.adj[&v] {
                if seen.insert(u) {
                    q.push_back(u);
                }
            }
        }
        seen.len() == self.adj.len()
    }

    /// Drops vertices without edges.
    pub fn without_isolated(&self) -> GraphState {
        let keep = self.adj.iter().filter(|(_, n)| !n.is_empty()).map(|(&v, _)| v).collect();
        self.induced(&keep)
    }

    /// Relabels vertices to `0..n` in ascending order.
    pub fn compacted(&self) -> (GraphState, Vec<Vertex>) {
        let order: Vec<Vertex> = self.vertices().collect();
        let index: BTreeMap<Vertex, Vertex> = order.iter().enumerate().map(|(i, &v)| (v, i as Vertex)).collect();
        let edges: Vec<_> = self.edges().iter().map(|[a, b]| [index[a], index[b]]).collect();
        (GraphState::from_edges(0..order.len() as Vertex, &edges).unwrap(), order)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n");
        for v in self.vertices() {
            let _ = writeln!(s, "  {v};");
        }
        for [a, b] in self.edges() {
            let _ = writeln!(s, "  {a} -- {b};");
        }
        s.push_str("}\n");
        s
    }
}

/// σ_z: deletes `a`.
pub fn measure_z(g: &GraphState, a: Vertex) -> Result<GraphState> {
    g.neighbors(a)?;
    let mut h = g.clone();
    h.remove_vertex(a);
    Ok(h)
}

/// σ_y: local complementation at `a`, then deletion of `a`.
pub fn measure_y(g: &GraphState, a: Vertex) -> Result<GraphState> {
    let mut h = g.clone();
    h.local_complement(a)?;
    h.remove_vertex(a);
    Ok(h)
}

/// σ_x with pivot `b0 ∈ N(a)`: `τ_b0(τ_a(τ_b0(G)) − a)`. An isolated `a` is
/// simply removed.
pub fn measure_x(g: &GraphState, a: Vertex, pivot: Option<Vertex>) -> Result<GraphState> {
    let n = g.neighbors(a)?;
    if n.is_empty() {
        let mut h = g.clone();
        h.remove_vertex(a);
        return Ok(h);
    }
    let b0 = pivot.unwrap_or_else(|| *n.iter().next().unwrap());
    if !n.contains(&b0) {
        return domain(format!("pivot {b0} is not a neighbor of {a}"));
    }
    let mut h = g.clone();
    h.local_complement(b0)?;
    h.local_complement(a)?;
    h.remove_vertex(a);
    h.local_complement(b0)?;
    Ok(h)
}

pub fn measure(g: &GraphState, a: Vertex, basis: Basis) -> Result<GraphState> {
    let mut h = g.clone();
    h.measure_in_place(a, basis)?;
    Ok(h)
}

impl GraphState {
    /// In-place form of [`measure`] (default σ_x pivot).
    pub fn measure_in_place(&mut self, a: Vertex, basis: Basis) -> Result<()> {
        match basis {
            Basis::Z => {
                self.neighbors(a)?;
            }
            Basis::Y => self.local_complement(a)?,
            Basis::X => {
                if let Some(&b0) = self.neighbors(a)?.iter().next() {
                    self.local_complement(b0)?;
                    self.local_complement(a)?;
                    self.remove_vertex(a);
                    return self.local_complement(b0);
                }
            }
        }
        self.remove_vertex(a);
        Ok(())
    }
}

/// Ordered single-qubit Pauli measurements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSchedule(pub Vec<(Vertex, Basis)>);

impl MeasurementSchedule {
    pub fn push(&mut self, v: Vertex, b: Basis) {
        self.0.push((v, b));
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, basis: Basis) -> usize {
        self.0.iter().filter(|(_, b)| *b == basis).count()
    }

    /// No vertex twice and every vertex present in `g`.
    pub fn validate(&self, g: &GraphState) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &(v, _) in &self.0 {
            if !seen.insert(v) {
                return domain(format!("vertex {v} measured twice"));
            }
            if !g.contains(v) {
                return domain(format!("vertex {v} is not in the graph"));
            }
        }
        Ok(())
    }
}

pub fn apply_schedule(g: &GraphState, schedule: &MeasurementSchedule) -> Result<GraphState> {
    schedule.validate(g)?;
    let mut h = g.clone();
    for &(v, b) in &schedule.0 {
        h.measure_in_place(v, b)?;
    }
    Ok(h)
}

/// Replaces a path of degree-2 vertices by one edge between its endpoints.
/// `path` lists the endpoints first and last.
pub fn shrink_path(g: &GraphState, path: &[Vertex]) -> Result<GraphState> {
    if path.len() < 2 {
        return domain("a path needs two endpoints");
    }
    for w in path.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return domain(format!("({}, {}) is not an edge", w[0], w[1]));
        }
    }
    for &v in &path[1..path.len() - 1] {
        if g.degree(v) != 2 {
            return domain(format!("interior vertex {v} has degree {}", g.degree(v)));
        }
    }
    let mut h = g.clone();
    for &v in &path[1..path.len() - 1] {
        h = measure_y(&h, v)?;
    }
    Ok(h)
}

/// Removes a triangle by a σ_y measurement on its lowest-id vertex.
pub fn eliminate_triangle(g: &GraphState, tri: [Vertex; 3]) -> Result<GraphState> {
    let [a, b, c] = tri;
    if !(g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c)) {
        return domain(format!("{tri:?} is not a triangle"));
    }
    measure_y(g, a.min(b).min(c))
}

/// Type-I fusion success: `a` and `b` become one vertex (id `a`) with
/// neighborhood `N(a) Δ N(b)`.
pub fn fuse_vertices(g: &GraphState, a: Vertex, b: Vertex) -> Result<GraphState> {
    if a == b {
        return domain("cannot fuse a vertex with itself");
    }
    let na = g.neighbors(a)?.clone();
    let nb = g.neighbors(b)?.clone();
    let mut h = g.clone();
    h.remove_vertex(a);
    h.remove_vertex(b);
    h.add_vertex(a);
    for &v in na.symmetric_difference(&nb) {
        if v != a && v != b {
            h.add_edge(a, v)?;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionOutcome {
    pub success: bool,
    pub result_graph: GraphState,
    pub probability: f64,
}

/// Vertex ids of the two five-qubit stars: centers 0 and 5, arms 1–4 and 6–9.
pub const STAR_CENTERS: [Vertex; 2] = [0, 5];

fn two_stars() -> GraphState {
    let mut edges = Vec::new();
    for (c, arms) in [(0, 1..=4), (5, 6..=9)] {
        for a in arms {
            edges.push([c, a]);
        }
    }
    GraphState::from_edges(0..10, &edges).unwrap()
}

/// Deterministic graph of a successful merge: a single center (id 0) with the
/// six remaining arms.
pub fn merged_star() -> Result<GraphState> {
    // first gate fuses arm 1 with arm 6; σ_x on the fused qubit joins the
    // centers, and the second gate collapses the redundant center pair
    let g = fuse_vertices(&two_stars(), 1, 6)?;
    let g = measure_x(&g, 1, Some(0))?;
    fuse_vertices(&g, 0, 5)
}

/// Six arms, no edges.
pub fn separated_arms() -> GraphState {
    GraphState::from_edges([2, 3, 4, 7, 8, 9], &[]).unwrap()
}

/// Success probability `1 − (1 − p_gate)²` of the five-star fusion.
pub fn fusion_success_probability(p_gate: f64) -> f64 {
    1.0 - (1.0 - p_gate).powi(2)
}

/// Both outcomes of the fusion with their probabilities.
pub fn fusion_outcomes(p_gate: f64) -> Result<[FusionOutcome; 2]> {
    crate::percolation::sample::check_probability("p_gate", p_gate)?;
    let ps = fusion_success_probability(p_gate);
    Ok([
        FusionOutcome { success: true, result_graph: merged_star()?, probability: ps },
        FusionOutcome { success: false, result_graph: separated_arms(), probability: 1.0 - ps },
    ])
}

/// Two five-qubit stars joined by probabilistic gates, each succeeding with
/// `p_gate`. One success among two attempts merges them into a seven-qubit
/// star; two failures act as σ_z on the gate qubits and isolate the arms.
pub fn fuse_stars(p_gate: f64, seed: u64) -> Result<FusionOutcome> {
    fuse_stars_trial(p_gate, seed, 0)
}

pub fn fuse_stars_trial(p_gate: f64, seed: u64, stream: u64) -> Result<FusionOutcome> {
    let [ok, fail] = fusion_outcomes(p_gate)?;
    let mut rng = trial_rng(seed, stream);
    let success = (0..2).any(|_| rng.random::<f64>() < p_gate);
    Ok(if success { ok } else { fail })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[Vertex]) -> BTreeSet<Vertex> {
        v.iter().copied().collect()
    }

    #[test]
    fn z_cut_of_triangle() {
        let g = GraphState::cycle(3);
        let h = measure_z(&g, 2).unwrap();
        assert_eq!(h.edges(), vec![[0, 1]]);
        assert!(measure_z(&g, 9).is_err());
    }

    #[test]
    fn z_cut_star_center() {
        let h = measure_z(&GraphState::star(4), 0).unwrap();
        assert_eq!(h.num_vertices(), 4);
        assert_eq!(h.num_edges(), 0);
    }

    #[test]
    fn y_on_path_middle() {
        let h = measure_y(&GraphState::path(3), 1).unwrap();
        assert_eq!(h.edges(), vec![[0, 2]]);
    }

    #[test]
    fn y_on_star_center_gives_complete_graph() {
        let h = measure_y(&GraphState::star(5), 0).unwrap();
        let (c, _) = h.compacted();
        assert_eq!(c, GraphState::complete(5));
    }

    #[test]
    fn y_on_triangle_vertex_gives_t_junction() {
        // triangle 0,1,2 with two-site arms 0-3-6, 1-4-7, 2-5-8
        let g = GraphState::from_edges(
            0..9,
            &[[0, 1], [1, 2], [0, 2], [0, 3], [1, 4], [2, 5], [3, 6], [4, 7], [5, 8]],
        )
        .unwrap();
        let h = eliminate_triangle(&g, [2, 1, 0]).unwrap();
        assert!(!h.contains(0));
        assert_eq!(h.neighbors(3).unwrap(), &set(&[1, 2, 6]));
        assert!(!h.has_edge(1, 2));
        let junctions: Vec<_> = h.vertices().filter(|&v| h.degree(v) == 3).collect();
        assert_eq!(junctions, vec![3]);
    }

    #[test]
    fn local_complement_is_an_involution() {
        let g = GraphState::from_edges(0..5, &[[0, 1], [0, 2], [0, 3], [1, 2], [3, 4]]).unwrap();
        let mut h = g.clone();
        h.local_complement(0).unwrap();
        assert_ne!(h, g);
        h.local_complement(0).unwrap();
        assert_eq!(h, g);
    }

    #[test]
    fn x_on_isolated_vertex() {
        let g = GraphState::from_edges(0..3, &[[0, 1]]).unwrap();
        assert_eq!(measure_x(&g, 2, None).unwrap().edges(), vec![[0, 1]]);
        assert!(measure_x(&g, 0, Some(2)).is_err());
    }

    #[test]
    fn x_on_chain_middle_merges_the_centers() {
        // stars at 0 (arms 1,2,3) and 6 (arms 7,8,9) joined by the chain 0–4–6
        let g = GraphState::from_edges(
            [0, 1, 2, 3, 4, 6, 7, 8, 9],
            &[[0, 1], [0, 2], [0, 3], [0, 4], [4, 6], [6, 7], [6, 8], [6, 9]],
        )
        .unwrap();
        let h = measure_x(&g, 4, Some(0)).unwrap();
        // 6 becomes the center of every arm, with the old center 0 as a leaf
        assert_eq!(h.neighbors(6).unwrap(), &set(&[0, 1, 2, 3, 7, 8, 9]));
        assert!([0, 1, 2, 3].iter().all(|&a| h.neighbors(a).unwrap() == &set(&[6])));
    }

    #[test]
    fn fused_star_has_six_arms() {
        let m = merged_star().unwrap();
        assert_eq!(m.neighbors(0).unwrap(), &set(&[2, 3, 4, 7, 8, 9]));
        assert_eq!(m.num_edges(), 6);
        let [ok, fail] = fusion_outcomes(0.5).unwrap();
        assert!((ok.probability - 0.75).abs() < 1e-15);
        assert!((ok.probability + fail.probability - 1.0).abs() < 1e-15);
        assert_eq!(fail.result_graph.num_edges(), 0);
        assert_eq!(fail.result_graph.num_vertices(), 6);
    }

    #[test]
    fn fusion_rates() {
        assert!(fuse_stars(1.0, 3).unwrap().success);
        let n = 100_000u64;
        let hits = (0..n).filter(|&t| fuse_stars_trial(0.3, 1, t).unwrap().success).count();
        let p = fusion_success_probability(0.3);
        assert!((p - 0.51).abs() < 1e-12);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * sigma);
        assert!(fuse_stars(1.5, 0).is_err());
    }

    #[test]
    fn shrink_chain_between_junctions() {
        // junction 0 (leaves 10, 11) – 1 – 2 – 3 – 4 – 5 (leaves 12, 13)
        let mut g = GraphState::path(6);
        for (c, l) in [(0, 10), (0, 11), (5, 12), (5, 13)] {
            g.add_edge(c, l).unwrap();
        }
        let h = shrink_path(&g, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!(h.has_edge(0, 5));
        assert_eq!(h.num_vertices(), 6);
        assert_eq!(shrink_path(&GraphState::path(2), &[0, 1]).unwrap(), GraphState::path(2));
        assert!(shrink_path(&g, &[10, 0, 1]).is_err());
    }

    #[test]
    fn hexagon_with_long_edges() {
        // hexagon corners 0..6, each side subdivided by two extra vertices
        let mut g = GraphState::new();
        let mut next = 6;
        let mut paths = Vec::new();
        for i in 0..6 {
            let (a, b) = (i, (i + 1) % 6);
            g.add_edge(a, next).unwrap();
            g.add_edge(next, next + 1).unwrap();
            g.add_edge(next + 1, b).unwrap();
            paths.push(vec![a, next, next + 1, b]);
            next += 2;
        }
        let mut h = g;
        for p in &paths {
            h = shrink_path(&h, p).unwrap();
        }
        assert_eq!(h, GraphState::cycle(6));
    }

    #[test]
    fn schedule_validation_and_commuting_cuts() {
        let g = GraphState::cycle(6);
        assert_eq!(apply_schedule(&g, &MeasurementSchedule::default()).unwrap(), g);
        let twice = MeasurementSchedule(vec![(1, Basis::Z), (1, Basis::Z)]);
        assert!(apply_schedule(&g, &twice).is_err());
        let a = MeasurementSchedule(vec![(0, Basis::Z), (3, Basis::Z)]);
        let b = MeasurementSchedule(vec![(3, Basis::Z), (0, Basis::Z)]);
        assert_eq!(apply_schedule(&g, &a).unwrap(), apply_schedule(&g, &b).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let g = GraphState::from_edges([1, 2, 5], &[[1, 2]]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"vertices":[1,2,5],"edges":[[1,2]]}"#);
        assert_eq!(serde_json::from_str::<GraphState>(&s).unwrap(), g);
        assert!(serde_json::from_str::<GraphState>(r#"{"vertices":[1],"edges":[[1,1]]}"#).is_err());
    }
}
