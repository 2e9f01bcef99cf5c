//! Dense statevector oracle for small graph states.
//!
//! Qubit `i` of a register is bit `i` of the amplitude index (little endian);
//! `order[i]` is the graph vertex it represents, ascending.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::graph::{Basis, GraphState, Vertex};

pub const DEFAULT_CAP: usize = 14;
const TOL: f64 = 1e-8;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub amplitudes: Vec<C>,
    pub order: Vec<Vertex>,
}

impl Statevector {
    pub fn num_qubits(&self) -> usize {
        self.order.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.order.iter().position(|&o| o == v)
    }

    /// Applies a 2×2 unitary to qubit position `q`.
    pub fn apply(&mut self, q: usize, m: &Mat2) {
        let bit = 1usize << q;
        for x in 0..self.amplitudes.len() {
            if x & bit == 0 {
                let (a0, a1) = (self.amplitudes[x], self.amplitudes[x | bit]);
                self.amplitudes[x] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[x | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Copy with the global phase fixed by the first non-negligible amplitude.
    pub fn phase_normalized(&self) -> Vec<C> {
        let first = self.amplitudes.iter().find(|a| a.norm() > 1e-12).copied().unwrap_or(ONE);
        let ph = first.conj() / first.norm();
        self.amplitudes.iter().map(|a| a * ph).collect()
    }

    /// Equal up to global phase within `1e-8` per amplitude.
    pub fn approx_eq_up_to_phase(&self, other: &Statevector) -> bool {
        self.order == other.order
            && self
                .phase_normalized()
                .iter()
                .zip(other.phase_normalized())
                .all(|(a, b)| (a - b).norm() < TOL)
    }

    /// `⟨ψ|P|ψ⟩` for a Pauli string given as per-position codes
    /// `0 = I, 1 = X, 2 = Y, 3 = Z`.
    pub fn pauli_expectation(&self, codes: &[u8]) -> f64 {
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u32);
        for (q, &c) in codes.iter().enumerate() {
            match c {
                1 => xm |= 1 << q,
                2 => {
                    xm |= 1 << q;
                    zm |= 1 << q;
                    ny += 1;
                }
                3 => zm |= 1 << q,
                _ => {}
            }
        }
        let iy = I.powu(ny);
        let mut acc = ZERO;
        for (x, a) in self.amplitudes.iter().enumerate() {
            let sign = if (x & zm).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += self.amplitudes[x ^ xm].conj() * a * sign;
        }
        (acc * iy).re
    }
}

/// `|+⟩^{⊗n}` followed by a controlled-Z on every edge.
pub fn build_graph_state(g: &GraphState) -> Result<Statevector> {
    build_graph_state_capped(g, DEFAULT_CAP)
}

pub fn build_graph_state_capped(g: &GraphState, cap: usize) -> Result<Statevector> {
    let n = g.num_vertices();
    if n > cap {
        return Err(Error::Capacity { requested: n, cap });
    }
    let order: Vec<Vertex> = g.vertices().collect();
    let pos: HashMap<Vertex, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<usize> = g.edges().iter().map(|[a, b]| (1 << pos[a]) | (1 << pos[b])).collect();
    let amp = (0.5f64).powf(n as f64 / 2.0);
    let amplitudes = (0..1usize << n)
        .map(|x| {
            let flips = masks.iter().filter(|&&m| x & m == m).count();
            C::new(if flips % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect();
    Ok(Statevector { amplitudes, order })
}

/// True iff `X_a ∏_{b ∈ N(a)} Z_b` fixes `psi` for every vertex `a`.
pub fn check_stabilizers(g: &GraphState, psi: &Statevector) -> bool {
    let order: Vec<Vertex> = g.vertices().collect();
    if order != psi.order {
        return false;
    }
    let pos: HashMap<Vertex, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    g.vertices().all(|a| {
        let xm = 1usize << pos[&a];
        let zm: usize = g.neighbors(a).unwrap().iter().map(|b| 1 << pos[b]).sum();
        psi.amplitudes.iter().enumerate().all(|(x, amp)| {
            let sign = if (x & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            // (Kψ)[x ⊕ xm] = sign(x) ψ[x]
            (psi.amplitudes[x ^ xm] - amp * sign).norm() < TOL
        })
    })
}

/// Eigenvector of the Pauli `basis` with eigenvalue `outcome` (±1).
fn eigenvector(basis: Basis, outcome: i8) -> [C; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = if outcome > 0 { 1.0 } else { -1.0 };
    match basis {
        Basis::Z => if outcome > 0 { [ONE, ZERO] } else { [ZERO, ONE] },
        Basis::X => [C::new(h, 0.0), C::new(s * h, 0.0)],
        Basis::Y => [C::new(h, 0.0), C::new(0.0, s * h)],
    }
}

#[derive(Debug, Clone)]
pub struct PauliMeasurementResult {
    pub outcome: i8,
    pub probability: f64,
    pub post_state: Statevector,
}

/// Unnormalized projection of `vertex` onto the `outcome` eigenvector, with
/// the qubit removed.
fn project(psi: &Statevector, q: usize, basis: Basis, outcome: i8) -> Statevector {
    let e = eigenvector(basis, outcome);
    let bit = 1usize << q;
    let low = bit - 1;
    let amplitudes = (0..psi.amplitudes.len() / 2)
        .map(|r| {
            let x0 = (r & low) | ((r & !low) << 1);
            e[0].conj() * psi.amplitudes[x0] + e[1].conj() * psi.amplitudes[x0 | bit]
        })
        .collect();
    let mut order = psi.order.clone();
    order.remove(q);
    Statevector { amplitudes, order }
}

/// Probabilities of outcomes `+1` and `−1`.
pub fn outcome_probabilities(psi: &Statevector, vertex: Vertex, basis: Basis) -> Result<[f64; 2]> {
    let q = psi.position(vertex).ok_or_else(|| Error::Domain(format!("qubit {vertex} not in register")))?;
    let p = project(psi, q, basis, 1).norm().powi(2);
    Ok([p, project(psi, q, basis, -1).norm().powi(2)])
}

/// Projective Pauli measurement. With `forced` the given outcome is taken
/// (it must have nonzero probability); otherwise it is drawn from `rng`.
pub fn measure_pauli<R: Rng + ?Sized>(
    psi: &Statevector,
    vertex: Vertex,
    basis: Basis,
    forced: Option<i8>,
    rng: &mut R,
) -> Result<PauliMeasurementResult> {
    let q = psi.position(vertex).ok_or_else(|| Error::Domain(format!("qubit {vertex} not in register")))?;
    let plus = project(psi, q, basis, 1);
    let p_plus = plus.norm().powi(2);
    let outcome = match forced {
        Some(o) if o != 1 && o != -1 => return domain(format!("outcome {o} is not ±1")),
        Some(o) => o,
        None => {
            if rng.random::<f64>() < p_plus {
                1
            } else {
                -1
            }
        }
    };
    let mut post = if outcome == 1 { plus } else { project(psi, q, basis, -1) };
    let prob = post.norm().powi(2);
    if prob <= 1e-12 {
        return domain(format!("outcome {outcome} has probability {prob:.3e}"));
    }
    let scale = 1.0 / prob.sqrt();
    post.amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(PauliMeasurementResult { outcome, probability: prob, post_state: post })
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn paulis() -> [Mat2; 3] {
    [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

/// A single-qubit Clifford with its conjugation action
/// `C† P C = sign · Q` on `P ∈ {X, Y, Z}` (codes 1..=3).
#[derive(Debug, Clone)]
pub struct Clifford {
    pub matrix: Mat2,
    pub action: [(u8, f64); 3],
}

/// The 24 single-qubit Cliffords modulo phase, generated by H and S.
pub fn single_qubit_cliffords() -> Vec<Clifford> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let gens: [Mat2; 2] = [
        [[C::new(h, 0.0), C::new(h, 0.0)], [C::new(h, 0.0), C::new(-h, 0.0)]],
        [[ONE, ZERO], [ZERO, I]],
    ];
    let canon = |m: &Mat2| -> Mat2 {
        let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
        let f = flat.iter().find(|a| a.norm() > 1e-9).unwrap();
        let ph = f.conj() / f.norm();
        [[m[0][0] * ph, m[0][1] * ph], [m[1][0] * ph, m[1][1] * ph]]
    };
    let same = |a: &Mat2, b: &Mat2| (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < 1e-9));
    let mut found: Vec<Mat2> = vec![[[ONE, ZERO], [ZERO, ONE]]];
    let mut i = 0;
    while i < found.len() {
        let cur = found[i];
        for g in &gens {
            let m = canon(&mat_mul(g, &cur));
            if !found.iter().any(|f| same(f, &m)) {
                found.push(m);
            }
        }
        i += 1;
    }
    let ps = paulis();
    found
        .into_iter()
        .map(|m| {
            let mut action = [(0u8, 0.0); 3];
            for (pi, p) in ps.iter().enumerate() {
                let conj = mat_mul(&dagger(&m), &mat_mul(p, &m));
                for (qi, q) in ps.iter().enumerate() {
                    for sign in [1.0, -1.0] {
                        let sq = [[q[0][0] * sign, q[0][1] * sign], [q[1][0] * sign, q[1][1] * sign]];
                        if same(&conj, &sq) {
                            action[pi] = (qi as u8 + 1, sign);
                        }
                    }
                }
            }
            Clifford { matrix: m, action }
        })
        .collect()
}

/// Search for local Cliffords on the register positions `support` mapping
/// `post` onto the graph state of `target` (up to phase).
fn find_correction(post: &Statevector, target: &GraphState, support: &[usize], cliffords: &[Clifford]) -> Option<Vec<(usize, usize)>> {
    let n = post.num_qubits();
    let pos: HashMap<Vertex, usize> = post.order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // stabilizer generators of the target as code strings
    let gens: Vec<Vec<u8>> = target
        .vertices()
        .map(|a| {
            let mut codes = vec![0u8; n];
            codes[pos[&a]] = 1;
            for b in target.neighbors(a).unwrap() {
                codes[pos[b]] = 3;
            }
            codes
        })
        .collect();
    let mut order: Vec<usize> = support.to_vec();
    order.sort_by_key(|&q| std::cmp::Reverse(gens.iter().filter(|g| g[q] != 0).count()));
    // generator i is checkable once all its support qubits in `order` are set
    let last_needed: Vec<Option<usize>> = gens
        .iter()
        .map(|g| order.iter().rposition(|&q| g[q] != 0))
        .collect();
    let mut memo: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut expect = |codes: &[u8]| *memo.entry(codes.to_vec()).or_insert_with(|| post.pauli_expectation(codes));
    let holds = |gi: usize, choice: &[usize], expect: &mut dyn FnMut(&[u8]) -> f64| -> bool {
        let mut codes = gens[gi].clone();
        let mut sign = 1.0;
        for (j, &q) in order.iter().enumerate().take(choice.len()) {
            let c = codes[q];
            if c != 0 {
                let (nc, s) = cliffords[choice[j]].action[c as usize - 1];
                codes[q] = nc;
                sign *= s;
            }
        }
        (expect(&codes) - sign).abs() < TOL
    };
    for gi in 0..gens.len() {
        if last_needed[gi].is_none() && !holds(gi, &[], &mut expect) {
            return None;
        }
    }
    if order.is_empty() {
        return Some(Vec::new());
    }
    let mut choice: Vec<usize> = Vec::with_capacity(order.len());
    let mut next = 0usize;
    loop {
        if next < cliffords.len() {
            choice.push(next);
            let depth = choice.len() - 1;
            let ok = (0..gens.len())
                .filter(|&gi| last_needed[gi] == Some(depth))
                .all(|gi| holds(gi, &choice, &mut expect));
            if ok {
                if choice.len() == order.len() {
                    return Some(order.iter().copied().zip(choice).collect());
                }
                next = 0;
            } else {
                next = choice.pop().unwrap() + 1;
            }
        } else {
            next = choice.pop()? + 1;
        }
    }
}

/// Checks that measuring `vertex` of `g` in `basis` leaves, for every outcome
/// of nonzero probability, the graph state of `expected` up to single-qubit
/// Clifford corrections on the former neighborhood (widened to second
/// neighbors if needed).
pub fn verify_rewrite(g: &GraphState, vertex: Vertex, basis: Basis, expected: &GraphState) -> bool {
    verify_rewrite_capped(g, vertex, basis, expected, DEFAULT_CAP)
}

pub fn verify_rewrite_capped(g: &GraphState, vertex: Vertex, basis: Basis, expected: &GraphState, cap: usize) -> bool {
    let Ok(psi) = build_graph_state_capped(g, cap) else { return false };
    let Ok(nbrs) = g.neighbors(vertex) else { return false };
    let remaining: BTreeSet<Vertex> = g.vertices().filter(|&v| v != vertex).collect();
    if expected.vertices().collect::<BTreeSet<_>>() != remaining {
        return false;
    }
    let Ok(target) = build_graph_state_capped(expected, cap) else { return false };
    let first: BTreeSet<Vertex> = nbrs.clone();
    let mut second = first.clone();
    for &b in nbrs {
        second.extend(g.neighbors(b).unwrap().iter().copied());
    }
    second.remove(&vertex);
    let candidates: Vec<BTreeSet<Vertex>> = match basis {
        Basis::X => vec![second],
        _ => vec![first, second],
    };
    let cliffords = single_qubit_cliffords();
    let mut rng = crate::percolation::trial_rng(0, 0);
    for outcome in [1i8, -1] {
        let Ok(m) = measure_pauli(&psi, vertex, basis, Some(outcome), &mut rng) else { continue };
        let post = m.post_state;
        let verified = candidates.iter().any(|set| {
            let support: Vec<usize> = set.iter().map(|v| post.position(*v).unwrap()).collect();
            let Some(corr) = find_correction(&post, expected, &support, &cliffords) else { return false };
            let mut fixed = post.clone();
            for (q, ci) in corr {
                fixed.apply(q, &cliffords[ci].matrix);
            }
            fixed.approx_eq_up_to_phase(&target)
        });
        if !verified {
            return false;
        }
    }
    true
}

/// All connected graphs on `n` vertices (ids `0..n`), one per isomorphism
/// class.
pub fn connected_graphs(n: u32) -> Vec<GraphState> {
    let pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let pair_index = |a: u32, b: u32| -> usize {
        let (a, b) = (a.min(b), a.max(b));
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    let perms = permutations(n);
    // relabelled pair index for every permutation
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| pairs.iter().map(|&(a, b)| pair_index(p[a as usize], p[b as usize])).collect())
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<[u32; 2]> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| [pairs[i].0, pairs[i].1]).collect();
        let g = GraphState::from_edges(0..n, &edges).unwrap();
        if !g.is_connected() {
            continue;
        }
        let canon = maps
            .iter()
            .map(|m| (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| 1u64 << m[i]).sum::<u64>())
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(g);
        }
    }
    out
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}
