//! A subdivision of the target graph inside the sample graph, and its
//! reduction to the target by σ_z cuts, local error repair and σ_y shrinks.

use std::collections::{BTreeSet, HashMap, HashSet};

use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Basis, GraphState, MeasurementSchedule, Vertex};

pub(crate) fn failure<T>(stage: &str, detail: impl Into<String>) -> Result<T> {
    Err(Error::Extraction { stage: stage.into(), detail: detail.into() })
}

/// Path realizing one target edge; `path` runs from the branch vertex of
/// `ends[0]` to that of `ends[1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub ends: [u32; 2],
    pub path: Vec<Vertex>,
}

/// Target graph on `0..n`, one branch vertex per target vertex and one
/// thread per target edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub target: GraphState,
    pub branch: Vec<Vertex>,
    pub threads: Vec<Thread>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Branch(u32),
    Interior(usize, usize),
}

impl Skeleton {
    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.threads.iter().flat_map(|t| t.path.iter().copied()).chain(self.branch.iter().copied()).collect()
    }

    /// Threads are simple paths of `g` with the right ends, internally
    /// disjoint from each other and from all branch vertices.
    pub fn validate(&self, g: &GraphState) -> Result<()> {
        let n = self.target.num_vertices();
        if self.branch.len() != n || self.target.vertices().enumerate().any(|(i, v)| v != i as Vertex) {
            return failure("plan", "target must be labeled 0..n with one branch vertex each");
        }
        let branches: HashSet<Vertex> = self.branch.iter().copied().collect();
        if branches.len() != n {
            return failure("plan", "branch vertices are not distinct");
        }
        let mut edges: BTreeSet<[u32; 2]> = self.target.edges().into_iter().collect();
        if edges.len() != self.threads.len() {
            return failure("plan", format!("{} threads for {} target edges", self.threads.len(), edges.len()));
        }
        let mut seen = HashSet::new();
        for t in &self.threads {
            let [a, b] = t.ends;
            if !edges.remove(&[a.min(b), a.max(b)]) {
                return failure("plan", format!("thread {a}-{b} is not a target edge or repeats one"));
            }
            let p = &t.path;
            if p.len() < 2 || p[0] != self.branch[a as usize] || p[p.len() - 1] != self.branch[b as usize] {
                return failure("plan", format!("thread {a}-{b} does not join its branch vertices"));
            }
            if let Some(w) = p.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
                return failure("plan", format!("thread {a}-{b} uses a missing edge {}-{}", w[0], w[1]));
            }
            for &v in &p[1..p.len() - 1] {
                if branches.contains(&v) || !seen.insert(v) {
                    return failure("plan", format!("site {v} appears twice in the plan"));
                }
            }
        }
        Ok(())
    }

    fn roles(&self) -> HashMap<Vertex, Role> {
        let mut r = HashMap::new();
        for (i, &b) in self.branch.iter().enumerate() {
            r.insert(b, Role::Branch(i as u32));
        }
        for (ti, t) in self.threads.iter().enumerate() {
            for (pos, &v) in t.path.iter().enumerate().take(t.path.len() - 1).skip(1) {
                r.insert(v, Role::Interior(ti, pos));
            }
        }
        r
    }

    fn edge_set(&self) -> HashSet<(Vertex, Vertex)> {
        self.threads
            .iter()
            .flat_map(|t| t.path.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))))
            .collect()
    }

    /// Thread indices at target vertex `t`.
    fn incident(&self, t: u32) -> Vec<usize> {
        (0..self.threads.len()).filter(|&i| self.threads[i].ends.contains(&t)).collect()
    }

    /// Path of thread `i` oriented to start at the branch of `t`.
    fn oriented(&self, i: usize, t: u32) -> Vec<Vertex> {
        let th = &self.threads[i];
        let mut p = th.path.clone();
        if th.ends[0] != t {
            p.reverse();
        }
        p
    }

    /// Replaces thread `i` by `path`, which starts at the branch of `t`.
    fn set_oriented(&mut self, i: usize, t: u32, mut path: Vec<Vertex>) {
        if self.threads[i].ends[0] != t {
            path.reverse();
        }
        self.threads[i].path = path;
    }
}

/// Measurement counts and site bookkeeping of one extraction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub measured_z: usize,
    pub measured_y: usize,
    pub sites_consumed: usize,
    pub skeleton_sites: usize,
    pub repairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    /// Result graph on the surviving sample sites.
    pub renormalized_graph: GraphState,
    /// Sample site carrying each target vertex.
    pub branch: Vec<Vertex>,
    pub target: GraphState,
    pub schedule: MeasurementSchedule,
    pub stats: ExtractionStats,
}

impl ExtractionResult {
    /// Result graph relabeled onto the target's vertex ids.
    pub fn relabeled(&self) -> GraphState {
        let idx: HashMap<Vertex, Vertex> = self.branch.iter().enumerate().map(|(i, &v)| (v, i as Vertex)).collect();
        let edges: Vec<[Vertex; 2]> = self.renormalized_graph.edges().iter().map(|[a, b]| [idx[a], idx[b]]).collect();
        GraphState::from_edges(0..self.branch.len() as Vertex, &edges).expect("branch map covers the result")
    }
}

struct Reducer<'a> {
    g: &'a mut GraphState,
    schedule: &'a mut MeasurementSchedule,
}

impl Reducer<'_> {
    fn measure(&mut self, v: Vertex, b: Basis) -> Result<()> {
        self.g.measure_in_place(v, b)?;
        self.schedule.push(v, b);
        Ok(())
    }

    fn cut(&mut self, vs: &[Vertex]) -> Result<()> {
        vs.iter().try_for_each(|&v| self.measure(v, Basis::Z))
    }
}

/// Removes every edge of `g` that is not a thread edge by local moves that
/// keep the skeleton a subdivision of the target. `g` must be restricted to
/// the skeleton's vertices. Returns the number of repairs.
pub fn correct_local_errors(g: &mut GraphState, sk: &mut Skeleton, schedule: &mut MeasurementSchedule) -> Result<usize> {
    let mut repairs = 0;
    loop {
        let edges = sk.edge_set();
        let chord = g
            .edges()
            .into_iter()
            .find(|[a, b]| !edges.contains(&(*a, *b)));
        let Some([x, y]) = chord else { return Ok(repairs) };
        repair(&mut Reducer { g, schedule }, sk, x, y)?;
        repairs += 1;
    }
}

fn repair(r: &mut Reducer, sk: &mut Skeleton, x: Vertex, y: Vertex) -> Result<()> {
    let roles = sk.roles();
    let (Some(&rx), Some(&ry)) = (roles.get(&x), roles.get(&y)) else {
        return failure("correct_local_errors", format!("edge {x}-{y} leaves the skeleton"));
    };
    // shortcut along one thread
    let on = |role: Role, v: Vertex, th: usize| match role {
        Role::Interior(t, p) => (t == th).then_some(p),
        Role::Branch(_) => sk.threads[th].path.iter().position(|&w| w == v),
    };
    for th in 0..sk.threads.len() {
        if let (Some(px), Some(py)) = (on(rx, x, th), on(ry, y, th)) {
            let (lo, hi) = (px.min(py), px.max(py));
            let path = sk.threads[th].path.clone();
            r.cut(&path[lo + 1..hi])?;
            sk.threads[th].path = path[..=lo].iter().chain(&path[hi..]).copied().collect();
            return Ok(());
        }
    }
    let describe = |r: Role| match r {
        Role::Branch(t) => format!("junction {t}"),
        Role::Interior(th, _) => format!("thread {:?}", sk.threads[th].ends),
    };
    let irreducible = || failure("correct_local_errors", format!("irreducible crossing at edge {x}-{y} between {} and {}", describe(rx), describe(ry)));
    let (Role::Interior(t1, _), Role::Interior(t2, _)) = (rx, ry) else {
        return irreducible();
    };
    let shared: Vec<u32> = sk.threads[t1].ends.iter().filter(|e| sk.threads[t2].ends.contains(e)).copied().collect();
    let [w] = shared[..] else {
        return irreducible();
    };
    let others: Vec<usize> = sk.incident(w).into_iter().filter(|&t| t != t1 && t != t2).collect();
    if others.len() > 1 {
        return failure("correct_local_errors", format!("junction {w} has degree above 3"));
    }
    let p1 = sk.oriented(t1, w);
    let p2 = sk.oriented(t2, w);
    let i = p1.iter().position(|&v| v == x).unwrap();
    let j = p2.iter().position(|&v| v == y).unwrap();
    if j >= 2 && i >= 2 {
        // both moves are possible: keep the one leaving fewer chords
        let trial = |a: (usize, &[Vertex], usize), b: (usize, &[Vertex], usize)| -> Result<_> {
            let (mut g, mut s, mut k) = (r.g.clone(), MeasurementSchedule::default(), sk.clone());
            move_branch(&mut Reducer { g: &mut g, schedule: &mut s }, &mut k, w, a, b, &others)?;
            let chords = g.num_edges() - k.edge_set().len();
            Ok((chords, g, s, k))
        };
        let first = trial((t1, &p1, i), (t2, &p2, j))?;
        let second = trial((t2, &p2, j), (t1, &p1, i))?;
        let (_, g, s, k) = if second.0 < first.0 { second } else { first };
        *r.g = g;
        r.schedule.0.extend(s.0);
        *sk = k;
        Ok(())
    } else if j >= 2 {
        move_branch(r, sk, w, (t1, &p1, i), (t2, &p2, j), &others)
    } else if i >= 2 {
        move_branch(r, sk, w, (t2, &p2, j), (t1, &p1, i), &others)
    } else {
        triangle(r, sk, w, (t1, &p1), (t2, &p2), &others)
    }
}

/// The branch of `w` moves to `p1[i]`: `p2` is cut back to `p2[j]`, which
/// attaches to the new branch, and the remaining thread at `w` (if any) is
/// extended along `p1` to the new branch.
fn move_branch(
    r: &mut Reducer,
    sk: &mut Skeleton,
    w: u32,
    (t1, p1, i): (usize, &[Vertex], usize),
    (t2, p2, j): (usize, &[Vertex], usize),
    others: &[usize],
) -> Result<()> {
    r.cut(&p2[1..j])?;
    let nb = p1[i];
    match others {
        [t3] => {
            let p3 = sk.oriented(*t3, w);
            let ext: Vec<Vertex> = p1[..=i].iter().rev().chain(&p3[1..]).copied().collect();
            sk.set_oriented(*t3, w, ext);
        }
        _ => r.cut(&p1[..i])?,
    }
    sk.set_oriented(t1, w, p1[i..].to_vec());
    sk.set_oriented(t2, w, std::iter::once(nb).chain(p2[j..].iter().copied()).collect());
    sk.branch[w as usize] = nb;
    Ok(())
}

/// Chord between the first vertices of two threads at `w`.
fn triangle(
    r: &mut Reducer,
    sk: &mut Skeleton,
    w: u32,
    (t1, p1): (usize, &[Vertex]),
    (t2, p2): (usize, &[Vertex]),
    others: &[usize],
) -> Result<()> {
    let (x, y) = (p1[1], p2[1]);
    let Some(&t3) = others.first() else {
        // degree-2 junction: drop it and let `x` carry the branch
        r.cut(&[p1[0]])?;
        sk.set_oriented(t1, w, p1[1..].to_vec());
        sk.set_oriented(t2, w, std::iter::once(x).chain(p2[1..].iter().copied()).collect());
        sk.branch[w as usize] = x;
        return Ok(());
    };
    let p3 = sk.oriented(t3, w);
    let branches: HashSet<Vertex> = sk.branch.iter().copied().collect();
    // σ_y on one triangle vertex whose only other neighbor is its arm
    let arms = [(p1[0], p3.get(1)), (x, p1.get(2)), (y, p2.get(2))];
    for (k, &(c, arm)) in arms.iter().enumerate() {
        let Some(&a) = arm else { continue };
        let rest: Vec<Vertex> = [p1[0], x, y].into_iter().filter(|&v| v != c).collect();
        let expect: BTreeSet<Vertex> = rest.iter().copied().chain([a]).collect();
        if branches.contains(&a) || *r.g.neighbors(c)? != expect || rest.iter().any(|&u| r.g.has_edge(a, u)) {
            continue;
        }
        r.measure(c, Basis::Y)?;
        let tail = |p: &[Vertex], from: usize| -> Vec<Vertex> { std::iter::once(a).chain(p[from..].iter().copied()).collect() };
        match k {
            0 => {
                sk.set_oriented(t1, w, tail(p1, 1));
                sk.set_oriented(t2, w, tail(p2, 1));
                sk.set_oriented(t3, w, p3[1..].to_vec());
            }
            1 => {
                sk.set_oriented(t1, w, p1[2..].to_vec());
                sk.set_oriented(t2, w, tail(p2, 1));
                sk.set_oriented(t3, w, tail(&p3, 0));
            }
            _ => {
                sk.set_oriented(t1, w, tail(p1, 1));
                sk.set_oriented(t2, w, p2[2..].to_vec());
                sk.set_oriented(t3, w, tail(&p3, 0));
            }
        }
        sk.branch[w as usize] = a;
        return Ok(());
    }
    failure("correct_local_errors", format!("irreducible triangle at junction {w}"))
}

/// Cuts everything off the skeleton, repairs local errors and shrinks the
/// threads to single edges. The result equals the target under the branch
/// map or the reduction fails.
pub fn reduce(sample_graph: &GraphState, mut sk: Skeleton, sites_consumed: usize) -> Result<ExtractionResult> {
    sk.validate(sample_graph)?;
    let keep = sk.vertices();
    let mut g = sample_graph.clone();
    let mut schedule = MeasurementSchedule::default();
    let off: Vec<Vertex> = g.vertices().filter(|v| !keep.contains(v)).collect();
    Reducer { g: &mut g, schedule: &mut schedule }.cut(&off)?;
    let repairs = correct_local_errors(&mut g, &mut sk, &mut schedule)?;
    let mut r = Reducer { g: &mut g, schedule: &mut schedule };
    for t in &sk.threads {
        for &v in &t.path[1..t.path.len() - 1] {
            if r.g.degree(v) != 2 {
                return failure("reduce", format!("thread site {v} has degree {}", r.g.degree(v)));
            }
            r.measure(v, Basis::Y)?;
        }
    }
    let result = ExtractionResult {
        stats: ExtractionStats {
            measured_z: schedule.count(Basis::Z),
            measured_y: schedule.count(Basis::Y),
            sites_consumed,
            skeleton_sites: keep.len(),
            repairs,
        },
        renormalized_graph: g,
        branch: sk.branch,
        target: sk.target,
        schedule,
    };
    if result.renormalized_graph.num_vertices() != result.branch.len() || result.relabeled() != result.target {
        return failure("reduce", "reduced graph differs from the target");
    }
    Ok(result)
}

/// Brick-wall embedding of the hexagonal lattice on an `nx × ny` grid:
/// vertex `y·nx + x`, horizontal edges along rows, vertical edge
/// `(x, y)–(x, y+1)` iff `x + y` is even.
pub fn brick_wall(nx: usize, ny: usize) -> GraphState {
    let id = |x: usize, y: usize| (y * nx + x) as Vertex;
    let mut edges = Vec::new();
    for y in 0..ny {
        for x in 0..nx {
            if x + 1 < nx {
                edges.push([id(x, y), id(x + 1, y)]);
            }
            if y + 1 < ny && (x + y) % 2 == 0 {
                edges.push([id(x, y), id(x, y + 1)]);
            }
        }
    }
    GraphState::from_edges(0..(nx * ny) as Vertex, &edges).expect("valid brick wall")
}

/// Multigraph left after suppressing degree-2 vertices: node weights count
/// loops, edge weights count parallel edges.
fn suppressed(g: &GraphState) -> UnGraph<u32, u32> {
    let nodes: Vec<Vertex> = g.vertices().filter(|&v| g.degree(v) != 2).collect();
    let mut out = UnGraph::<u32, u32>::default();
    let idx: HashMap<Vertex, _> = nodes.iter().map(|&v| (v, out.add_node(0))).collect();
    let mut mult: HashMap<(usize, usize), u32> = HashMap::new();
    let mut covered: HashSet<Vertex> = nodes.iter().copied().collect();
    for &s in &nodes {
        for &f in g.neighbors(s).unwrap() {
            let (mut prev, mut cur) = (s, f);
            while g.degree(cur) == 2 {
                covered.insert(cur);
                let next = *g.neighbors(cur).unwrap().iter().find(|&&n| n != prev).unwrap();
                (prev, cur) = (cur, next);
            }
            // count each chain from its lexicographically smaller end
            if (s, f) <= (cur, prev) {
                let (a, b) = (idx[&s].index(), idx[&cur].index());
                *mult.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    // components that are pure cycles
    for v in g.vertices() {
        if covered.contains(&v) {
            continue;
        }
        out.add_node(1);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if covered.insert(u) {
                stack.extend(g.neighbors(u).unwrap().iter().copied());
            }
        }
    }
    for ((a, b), m) in mult {
        if a == b {
            out[petgraph::graph::NodeIndex::new(a)] += m;
        } else {
            out.add_edge(petgraph::graph::NodeIndex::new(a), petgraph::graph::NodeIndex::new(b), m);
        }
    }
    out
}

/// Isomorphism after suppressing degree-2 vertices.
pub fn topology_matches(a: &GraphState, b: &GraphState) -> bool {
    let (ga, gb) = (suppressed(a), suppressed(b));
    petgraph::algo::is_isomorphic_matching(&ga, &gb, |x, y| x == y, |x, y| x == y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::apply_schedule;

    fn skeleton_on_path(n: u32) -> (GraphState, Skeleton) {
        let g = GraphState::path(n);
        let target = GraphState::path(2);
        let sk = Skeleton { target, branch: vec![0, n - 1], threads: vec![Thread { ends: [0, 1], path: (0..n).collect() }] };
        (g, sk)
    }

    #[test]
    fn brick_wall_shapes() {
        let b = brick_wall(2, 2);
        assert_eq!(b.edges(), vec![[0, 1], [0, 2], [2, 3]]);
        let b = brick_wall(4, 4);
        assert_eq!(b.num_edges(), 12 + 6);
        assert!(b.vertices().all(|v| b.degree(v) <= 3));
    }

    #[test]
    fn path_reduces_to_edge() {
        let (g, sk) = skeleton_on_path(6);
        let r = reduce(&g, sk, 6).unwrap();
        assert_eq!(r.renormalized_graph.edges(), vec![[0, 5]]);
        assert_eq!(r.stats.measured_y, 4);
        assert_eq!(apply_schedule(&g, &r.schedule).unwrap(), r.renormalized_graph);
    }

    #[test]
    fn chord_on_one_thread_is_shortcut() {
        let (mut g, sk) = skeleton_on_path(6);
        g.add_edge(1, 4).unwrap();
        g.add_vertex(9);
        g.add_edge(9, 2).unwrap();
        let r = reduce(&g, sk, 7).unwrap();
        assert_eq!(r.stats.repairs, 1);
        assert_eq!(r.schedule.count(Basis::Z), 3);
        assert_eq!(apply_schedule(&g, &r.schedule).unwrap(), r.renormalized_graph);
    }

    /// Star with three arms of length 3 around center 0, arms 1-2-3, 4-5-6,
    /// 7-8-9.
    fn tripod() -> (GraphState, Skeleton) {
        let edges = [[0, 1], [1, 2], [2, 3], [0, 4], [4, 5], [5, 6], [0, 7], [7, 8], [8, 9]];
        let g = GraphState::from_edges(0..10, &edges).unwrap();
        let target = GraphState::star(3);
        let th = |e: u32, p: Vec<u32>| Thread { ends: [0, e], path: p };
        let sk = Skeleton {
            target,
            branch: vec![0, 3, 6, 9],
            threads: vec![th(1, vec![0, 1, 2, 3]), th(2, vec![0, 4, 5, 6]), th(3, vec![0, 7, 8, 9])],
        };
        (g, sk)
    }

    #[test]
    fn abutment_moves_the_junction() {
        let (mut g, sk) = tripod();
        g.add_edge(2, 5).unwrap();
        let r = reduce(&g, sk, 10).unwrap();
        assert_eq!(r.relabeled(), GraphState::star(3));
        assert_ne!(r.branch[0], 0);
        assert_eq!(apply_schedule(&g, &r.schedule).unwrap(), r.renormalized_graph);
    }

    #[test]
    fn triangle_becomes_t_junction() {
        let (mut g, sk) = tripod();
        g.add_edge(1, 4).unwrap();
        let r = reduce(&g, sk, 10).unwrap();
        assert_eq!(r.relabeled(), GraphState::star(3));
        assert_eq!(r.stats.repairs, 1);
        assert_eq!(apply_schedule(&g, &r.schedule).unwrap(), r.renormalized_graph);
    }

    #[test]
    fn far_chord_is_irreducible() {
        // cycle of four threads; chord between opposite threads
        let target = GraphState::cycle(4);
        let mut edges = Vec::new();
        let mut threads = Vec::new();
        let mut next = 4;
        for (a, b) in [(0u32, 1u32), (1, 2), (2, 3), (3, 0)] {
            let mid = next;
            next += 1;
            edges.push([a, mid]);
            edges.push([mid, b]);
            threads.push(Thread { ends: [a, b], path: vec![a, mid, b] });
        }
        edges.push([4, 6]);
        let g = GraphState::from_edges(0..8, &edges).unwrap();
        let sk = Skeleton { target, branch: vec![0, 1, 2, 3], threads };
        assert!(matches!(reduce(&g, sk, 8), Err(Error::Extraction { .. })));
    }

    #[test]
    fn invalid_plan_rejected() {
        let (g, mut sk) = skeleton_on_path(5);
        sk.threads[0].path = vec![0, 1, 2, 1, 4];
        assert!(reduce(&g, sk, 5).is_err());
        let (g, mut sk) = skeleton_on_path(5);
        sk.threads[0].path = vec![0, 2, 3, 4];
        assert!(reduce(&g, sk, 5).is_err());
    }

    #[test]
    fn topology_check() {
        assert!(topology_matches(&GraphState::path(7), &GraphState::path(2)));
        assert!(topology_matches(&GraphState::cycle(6), &GraphState::cycle(3)));
        assert!(!topology_matches(&GraphState::cycle(6), &GraphState::path(6)));
        assert!(!topology_matches(&GraphState::star(3), &GraphState::path(4)));
        let b = brick_wall(4, 4);
        assert!(topology_matches(&b, &b));
        let mut c = b.clone();
        c.toggle_edge(5, 6);
        assert!(!topology_matches(&b, &c));
    }
}
