//! Pure-state entanglement percolation: singlet conversion, Procrustean
//! filtering, entanglement swapping, concurrence chains and the lattice
//! strategies built from them.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{hexagonal_bond_threshold, triangular_bond_threshold, Lattice, LatticeKind};
use crate::percolation::estimate::{count_hits, crossing_sweep, estimator_lattice, EventEstimate};
use crate::percolation::{crossing_clusters, label_clusters, sample};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Schmidt coefficients `λ₁ ≥ λ₂ ≥ 0`, `λ₁ + λ₂ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmidtPair {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SchmidtPair {
    pub fn new(lambda1: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&lambda1) {
            return domain(format!("largest Schmidt coefficient {lambda1} must lie in [1/2, 1]"));
        }
        Ok(SchmidtPair { lambda1, lambda2: 1.0 - lambda1 })
    }

    pub fn from_coefficients(lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda2 < 0.0 || lambda1 < lambda2 || (lambda1 + lambda2 - 1.0).abs() > 1e-12 {
            return domain(format!("({lambda1}, {lambda2}) are not ordered Schmidt coefficients"));
        }
        Ok(SchmidtPair { lambda1, lambda2 })
    }

    pub fn maximally_entangled() -> Self {
        SchmidtPair { lambda1: 0.5, lambda2: 0.5 }
    }

    /// Amplitude matrix `diag(√λ₁, √λ₂)`.
    pub fn matrix(&self) -> TwoQubitMatrix {
        TwoQubitMatrix { t: [[C::new(self.lambda1.sqrt(), 0.0), ZERO], [ZERO, C::new(self.lambda2.sqrt(), 0.0)]] }
    }

    pub fn concurrence(&self) -> f64 {
        2.0 * (self.lambda1 * self.lambda2).sqrt()
    }
}

/// Amplitudes `T_jk` of `Σ T_jk |j,k⟩`; also used for measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitMatrix {
    pub t: [[C; 2]; 2],
}

impl TwoQubitMatrix {
    pub fn new(t: [[C; 2]; 2]) -> Self {
        TwoQubitMatrix { t }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.t.iter().flatten().map(|a| a.norm_sqr()).sum()
    }

    pub fn det(&self) -> C {
        self.t[0][0] * self.t[1][1] - self.t[0][1] * self.t[1][0]
    }

    pub fn mul(&self, o: &TwoQubitMatrix) -> TwoQubitMatrix {
        let mut t = [[ZERO; 2]; 2];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.t[i][0] * o.t[0][j] + self.t[i][1] * o.t[1][j];
            }
        }
        TwoQubitMatrix { t }
    }

    pub fn conj(&self) -> TwoQubitMatrix {
        TwoQubitMatrix { t: self.t.map(|r| r.map(|x| x.conj())) }
    }

    pub fn scaled(&self, s: f64) -> TwoQubitMatrix {
        TwoQubitMatrix { t: self.t.map(|r| r.map(|x| x * s)) }
    }

    /// Concurrence `2|det T|` of the normalized state.
    pub fn concurrence(&self) -> f64 {
        2.0 * self.det().norm() / self.norm_sqr()
    }

    /// Schmidt coefficients of the normalized state.
    pub fn schmidt(&self) -> SchmidtPair {
        // eigenvalue gap of T T† directly; going through C loses half the
        // digits near maximal entanglement
        let [[a, b], [c, d]] = self.t;
        let rows = a.norm_sqr() + b.norm_sqr() - c.norm_sqr() - d.norm_sqr();
        let cross = a * c.conj() + b * d.conj();
        let gap = rows.hypot(2.0 * cross.norm()) / self.norm_sqr();
        let lambda1 = ((1.0 + gap) / 2.0).clamp(0.5, 1.0);
        SchmidtPair { lambda1, lambda2: 1.0 - lambda1 }
    }
}

/// Optimal singlet conversion probability from one or two copies.
pub fn scp(pair: &SchmidtPair, copies: u32) -> Result<f64> {
    match copies {
        1 => Ok((2.0 * (1.0 - pair.lambda1)).min(1.0)),
        2 => Ok((2.0 * (1.0 - pair.lambda1 * pair.lambda1)).min(1.0)),
        _ => domain(format!("singlet conversion from {copies} copies is not supported")),
    }
}

/// Local filter `M_A = diag(√(λ₂/λ₁), 1)`, `M_B = 1` and its success
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcrusteanFilter {
    pub m_a: TwoQubitMatrix,
    pub m_b: TwoQubitMatrix,
    pub success: f64,
}

impl ProcrusteanFilter {
    /// Filtered (unnormalized) state `M_A T M_Bᵀ`.
    pub fn apply(&self, state: &TwoQubitMatrix) -> TwoQubitMatrix {
        let mut bt = self.m_b;
        bt.t = [[self.m_b.t[0][0], self.m_b.t[1][0]], [self.m_b.t[0][1], self.m_b.t[1][1]]];
        self.m_a.mul(state).mul(&bt)
    }
}

pub fn procrustean_filter(pair: &SchmidtPair) -> Result<ProcrusteanFilter> {
    if pair.lambda1 <= 0.0 {
        return domain("λ₁ must be positive");
    }
    let r = C::new((pair.lambda2 / pair.lambda1).sqrt(), 0.0);
    let one = C::new(1.0, 0.0);
    let m_a = TwoQubitMatrix { t: [[r, ZERO], [ZERO, one]] };
    let m_b = TwoQubitMatrix { t: [[one, ZERO], [ZERO, one]] };
    let success = m_a.mul(&pair.matrix()).norm_sqr();
    Ok(ProcrusteanFilter { m_a, m_b, success })
}

/// Bell basis as amplitude matrices `σ_k / √2`, `k = I, X, Y, Z`.
pub fn bell_basis() -> [TwoQubitMatrix; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (C::new(h, 0.0), ZERO, C::new(0.0, h));
    [
        TwoQubitMatrix::new([[o, z], [z, o]]),
        TwoQubitMatrix::new([[z, o], [o, z]]),
        TwoQubitMatrix::new([[z, -i], [i, z]]),
        TwoQubitMatrix::new([[o, z], [z, -o]]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome {
    pub probability: f64,
    pub pair: SchmidtPair,
}

/// Bell measurement on the middle station of `A–B`, `B′–C`: the four
/// outcomes with their probabilities and resulting `A–C` pairs.
pub fn swap(ab: &SchmidtPair, bc: &SchmidtPair) -> Vec<SwapOutcome> {
    let (t1, t2) = (ab.matrix(), bc.matrix());
    bell_basis()
        .iter()
        .map(|psi| {
            let phi = t1.mul(&psi.conj()).mul(&t2);
            SwapOutcome { probability: phi.norm_sqr(), pair: phi.schmidt() }
        })
        .collect()
}

/// Mean singlet conversion probability of the swapped pair.
pub fn swap_expected_scp(ab: &SchmidtPair, bc: &SchmidtPair) -> f64 {
    swap(ab, bc).iter().map(|o| o.probability * scp(&o.pair, 1).unwrap()).sum()
}

/// Closed-form swap probabilities `(p_max, p_min)` for identical pairs.
pub fn swap_probabilities(pair: &SchmidtPair) -> (f64, f64) {
    let (a, b) = (pair.lambda1, pair.lambda2);
    ((a * a + b * b) / 2.0, a * b)
}

/// Average end-to-end concurrence of a repeater chain,
/// `Σ_r 2|det(T₁ M̄₁ T₂ M̄₂ ⋯ T_{N+1})|`, over all outcome combinations.
/// `measurements[i]` holds the outcome operators at station `i`.
pub fn chain_concurrence(pairs: &[SchmidtPair], measurements: &[Vec<TwoQubitMatrix>]) -> Result<f64> {
    if pairs.len() != measurements.len() + 1 {
        return domain(format!("{} pairs need {} stations, got {}", pairs.len(), pairs.len() - 1, measurements.len()));
    }
    for (i, m) in measurements.iter().enumerate() {
        check_completeness(m).map_err(|e| Error::Domain(format!("station {i}: {e}")))?;
    }
    fn rec(acc: TwoQubitMatrix, i: usize, pairs: &[SchmidtPair], ms: &[Vec<TwoQubitMatrix>]) -> f64 {
        if i == ms.len() {
            return 2.0 * acc.det().norm();
        }
        ms[i]
            .iter()
            .map(|m| rec(acc.mul(&m.conj()).mul(&pairs[i + 1].matrix()), i + 1, pairs, ms))
            .sum()
    }
    Ok(rec(pairs[0].matrix(), 0, pairs, measurements))
}

/// `Σ_k vec(M_k) vec(M_k)† = 1` within `1e-10`.
fn check_completeness(ms: &[TwoQubitMatrix]) -> Result<()> {
    let mut acc = [[ZERO; 4]; 4];
    for m in ms {
        let v = [m.t[0][0], m.t[0][1], m.t[1][0], m.t[1][1]];
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] += v[i] * v[j].conj();
            }
        }
    }
    for (i, row) in acc.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (x - C::new(want, 0.0)).norm() > 1e-10 {
                return domain("measurement operators are not complete");
            }
        }
    }
    Ok(())
}

/// Product form `∏ 2√(λ₁λ₂)` of the Bell-swap chain.
pub fn swap_chain_concurrence(pairs: &[SchmidtPair]) -> f64 {
    pairs.iter().map(|p| p.concurrence()).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "CEP")]
    Cep,
    Swap,
    HexToTri,
    SquareDistill,
    SquareDouble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub lattice: LatticeKind,
    pub derived_edge_probability: f64,
    pub threshold: f64,
    pub percolates: bool,
}

impl StrategyReport {
    fn new(strategy: Strategy, lattice: LatticeKind, p: f64, threshold: f64) -> Self {
        StrategyReport { strategy, lattice, derived_edge_probability: p, threshold, percolates: p > threshold }
    }
}

/// Honeycomb with a doubled pair per edge. Classically each edge is opened
/// from its two copies with probability `2(1 − λ₁²)` on the honeycomb;
/// swapping at every other site instead yields a triangular lattice with
/// edge probability `2λ₂`.
pub fn hex_to_tri(pair: &SchmidtPair) -> (StrategyReport, StrategyReport) {
    let cep = StrategyReport::new(Strategy::Cep, LatticeKind::Hexagonal, scp(pair, 2).unwrap(), hexagonal_bond_threshold());
    let quantum = StrategyReport::new(Strategy::HexToTri, LatticeKind::Triangular, scp(pair, 1).unwrap(), triangular_bond_threshold());
    (cep, quantum)
}

/// Interval of `λ₁` where the classical strategy fails and the quantum one
/// percolates: `(√(1/2 + sin(π/18)), 1 − sin(π/18))`.
pub fn hex_to_tri_window() -> (f64, f64) {
    let s = (std::f64::consts::PI / 18.0).sin();
    ((0.5 + s).sqrt(), 1.0 - s)
}

/// Crossing probability of an isotropic `L`-sample of the report's lattice at
/// its derived edge probability.
pub fn strategy_crossing(report: &StrategyReport, l: usize, trials: u64, seed: u64) -> Result<EventEstimate> {
    let lat = estimator_lattice(report.lattice, l)?;
    Ok(crossing_sweep(&lat, &[report.derived_edge_probability], 1.0, 0, trials, seed)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareDistill {
    pub lambda2_prime: f64,
    pub lambda1_double_prime: f64,
    pub deterministic_singlet: bool,
}

/// Two-step distillation on the square lattice.
pub fn square_distill(pair: &SchmidtPair) -> SquareDistill {
    let x = 4.0 * pair.lambda1 * pair.lambda2;
    let lambda2_prime = (1.0 - (1.0 - x * x).max(0.0).sqrt()) / 2.0;
    let l1p = 1.0 - lambda2_prime;
    let sq = l1p * l1p;
    let deterministic = sq <= 0.5 + 1e-12;
    SquareDistill {
        lambda2_prime,
        lambda1_double_prime: if deterministic { 0.5 } else { sq },
        deterministic_singlet: deterministic,
    }
}

/// Largest `λ₁` for which the distillation ends in a singlet:
/// `(1 + √(1 − √(2(√2 − 1))))/2`.
pub fn lambda1_star() -> f64 {
    let r = (2.0 * (2f64.sqrt() - 1.0)).sqrt();
    (1.0 + (1.0 - r).sqrt()) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareDoubleReport {
    pub p: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub trials: u64,
    pub theta: f64,
    pub theta_ci95: f64,
    /// `P(A ↔ A′)` on the original lattice.
    pub p_connect: f64,
    pub p_connect_ci95: f64,
    /// Doubled lattices: `θ²(2 − θ²)`.
    pub lhs_estimate: f64,
    /// Original lattice bound: `θ²(2 − P(A ↔ A′))²`.
    pub rhs_bound_estimate: f64,
    /// `2 − P(A ↔ A′)`.
    pub aa_prime_factor: f64,
    /// `√(2 − θ²)`, the corresponding factor of the doubled lattices.
    pub doubled_factor: f64,
    pub seed: u64,
}

/// Monte Carlo comparison of the original and the doubled square lattice.
///
/// Swapping at every site of one checkerboard sublattice leaves two disjoint
/// square lattices on the other sublattice, so neighbors `A`, `A′` there are
/// diagonal neighbors of the original lattice: `A` is the central site and
/// `A′ = A + (1, 1)`. `θ` is estimated as the probability that `A` lies on an
/// open left-to-right crossing cluster.
pub fn square_double_compare(p: f64, l: usize, trials: u64, seed: u64) -> Result<SquareDoubleReport> {
    if !(0.5..=1.0).contains(&p) {
        return domain(format!("p = {p} is not in the supercritical range [1/2, 1]"));
    }
    if l < 16 {
        return domain("square doubling comparison needs L >= 16");
    }
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let lat = Arc::new(Lattice::square(&[l, l]));
    let a = lat.central_site();
    let ca = lat.coord(a).to_vec();
    let a2 = lat.site_at(&[ca[0] + 1, ca[1] + 1]).expect("interior site");
    let theta_hits = count_hits(trials, |t| {
        let s = sample(&lat, p, 1.0, seed, t)?;
        let lab = label_clusters(&s);
        Ok(lab.label(a).is_some_and(|c| crossing_clusters(&lab, 0).contains(&c)))
    })?;
    let conn_hits = count_hits(trials, |t| {
        let s = sample(&lat, p, 1.0, seed, t)?;
        Ok(label_clusters(&s).connected(a, a2))
    })?;
    let n = trials as f64;
    let theta = theta_hits as f64 / n;
    let pc = conn_hits as f64 / n;
    let th2 = theta * theta;
    Ok(SquareDoubleReport {
        p,
        l,
        trials,
        theta,
        theta_ci95: crate::stats::ci95(theta_hits, trials),
        p_connect: pc,
        p_connect_ci95: crate::stats::ci95(conn_hits, trials),
        lhs_estimate: th2 * (2.0 - th2),
        rhs_bound_estimate: th2 * (2.0 - pc).powi(2),
        aa_prime_factor: 2.0 - pc,
        doubled_factor: (2.0 - th2).sqrt(),
        seed,
    })
}

/// One row of a `λ₁` sweep over the lattice strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub lambda1: f64,
    pub cep_probability: f64,
    pub cep_threshold: f64,
    pub cep_percolates: bool,
    pub quantum_probability: f64,
    pub quantum_threshold: f64,
    pub quantum_percolates: bool,
    pub lambda1_double_prime: f64,
    pub deterministic_singlet: bool,
}

pub fn strategy_sweep(lambdas: &[f64]) -> Result<Vec<StrategyRow>> {
    lambdas
        .iter()
        .map(|&l1| {
            let pair = SchmidtPair::new(l1)?;
            let (cep, q) = hex_to_tri(&pair);
            let sd = square_distill(&pair);
            Ok(StrategyRow {
                lambda1: l1,
                cep_probability: cep.derived_edge_probability,
                cep_threshold: cep.threshold,
                cep_percolates: cep.percolates,
                quantum_probability: q.derived_edge_probability,
                quantum_threshold: q.threshold,
                quantum_percolates: q.percolates,
                lambda1_double_prime: sd.lambda1_double_prime,
                deterministic_singlet: sd.deterministic_singlet,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(l: f64) -> SchmidtPair {
        SchmidtPair::new(l).unwrap()
    }

    #[test]
    fn scp_values() {
        assert_eq!(scp(&pair(0.5), 1).unwrap(), 1.0);
        assert_eq!(scp(&pair(1.0), 1).unwrap(), 0.0);
        assert!((scp(&pair(0.75), 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((scp(&pair(0.75), 2).unwrap() - 0.875).abs() < 1e-15);
        assert!(scp(&pair(0.75), 3).is_err());
    }

    #[test]
    fn invalid_pairs() {
        assert!(SchmidtPair::new(0.4).is_err());
        assert!(SchmidtPair::from_coefficients(0.6, 0.5).is_err());
        assert!(SchmidtPair::from_coefficients(0.3, 0.7).is_err());
    }

    #[test]
    fn filter_produces_a_singlet() {
        let p = pair(0.8);
        let f = procrustean_filter(&p).unwrap();
        assert!((f.success - 0.4).abs() < 1e-12);
        let out = f.apply(&p.matrix());
        assert!((out.norm_sqr() - 0.4).abs() < 1e-12);
        assert!((out.concurrence() - 1.0).abs() < 1e-12);
        let id = procrustean_filter(&pair(0.5)).unwrap();
        assert!((id.m_a.t[0][0].re - 1.0).abs() < 1e-15 && (id.success - 1.0).abs() < 1e-12);
        // M_A† M_A ≤ 1: diagonal entries at most one
        assert!(f.m_a.t[0][0].norm() <= 1.0 && f.m_a.t[1][1].norm() <= 1.0);
    }

    #[test]
    fn swap_outcomes() {
        let sym = swap(&pair(0.5), &pair(0.5));
        assert!(sym.iter().all(|o| (o.probability - 0.25).abs() < 1e-15 && (o.pair.lambda1 - 0.5).abs() < 1e-12));
        let out = swap(&pair(0.8), &pair(0.8));
        let mut ps: Vec<f64> = out.iter().map(|o| o.probability).collect();
        ps.sort_by(f64::total_cmp);
        assert!((ps[0] - 0.16).abs() < 1e-12 && (ps[1] - 0.16).abs() < 1e-12);
        assert!((ps[2] - 0.34).abs() < 1e-12 && (ps[3] - 0.34).abs() < 1e-12);
        assert!((ps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((swap_expected_scp(&pair(0.8), &pair(0.8)) - 0.4).abs() < 1e-12);
        let (pmax, pmin) = swap_probabilities(&pair(0.8));
        assert!((pmax - 0.34).abs() < 1e-12 && (pmin - 0.16).abs() < 1e-12);
    }

    #[test]
    fn chain_of_one_pair() {
        let p = pair(0.8);
        let c = chain_concurrence(&[p], &[]).unwrap();
        assert!((c - 2.0 * (0.8f64 * 0.2).sqrt()).abs() < 1e-12);
        assert!((c - 2.0 * p.matrix().det().norm()).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled_chain_keeps_unit_concurrence() {
        let bell: Vec<TwoQubitMatrix> = bell_basis().to_vec();
        for n in 0..5 {
            let pairs = vec![SchmidtPair::maximally_entangled(); n + 1];
            let ms = vec![bell.clone(); n];
            assert!((chain_concurrence(&pairs, &ms).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_matches_product_form_and_decays() {
        let bell: Vec<TwoQubitMatrix> = bell_basis().to_vec();
        let mut logs = Vec::new();
        for n in 1..=5 {
            let pairs = vec![pair(0.8); n + 1];
            let c = chain_concurrence(&pairs, &vec![bell.clone(); n]).unwrap();
            assert!((c - swap_chain_concurrence(&pairs)).abs() < 1e-12);
            logs.push(c.ln());
        }
        let xs: Vec<f64> = (1..=5).map(|n| n as f64).collect();
        let fit = crate::stats::linear_fit(&xs, &logs);
        assert!(fit.slope < 0.0 && fit.r2 > 0.99);
    }

    #[test]
    fn incomplete_measurement_rejected() {
        let bell = bell_basis();
        let partial = vec![bell[0], bell[1], bell[2]];
        assert!(chain_concurrence(&[pair(0.7), pair(0.7)], &[partial]).is_err());
        assert!(chain_concurrence(&[pair(0.7)], &[bell.to_vec()]).is_err());
    }

    #[test]
    fn hex_to_tri_reports() {
        let (cep, q) = hex_to_tri(&pair(0.823));
        assert!(cep.derived_edge_probability < 0.6527 && !cep.percolates);
        assert!((q.derived_edge_probability - 0.354).abs() < 1e-12 && q.percolates);
        let (cep, q) = hex_to_tri(&pair(0.5));
        assert!(cep.percolates && q.percolates);
        let (cep, q) = hex_to_tri(&pair(0.99));
        assert!(!cep.percolates && !q.percolates);
        let (lo, hi) = hex_to_tri_window();
        assert!(lo < hi && lo < 0.823 && 0.823 < hi);
    }

    #[test]
    fn distillation() {
        let sd = square_distill(&pair(0.5));
        assert!((sd.lambda2_prime - 0.5).abs() < 1e-12 && sd.deterministic_singlet);
        let sd = square_distill(&pair(0.6));
        assert!((sd.lambda2_prime - 0.36).abs() < 1e-12);
        assert!(sd.deterministic_singlet && sd.lambda1_double_prime == 0.5);
        assert!(!square_distill(&pair(0.66)).deterministic_singlet);
        assert!((lambda1_star() - 0.6499).abs() < 5e-4);
    }

    #[test]
    fn square_double_guards() {
        assert!(square_double_compare(0.4, 32, 10, 0).is_err());
        assert!(square_double_compare(0.6, 8, 10, 0).is_err());
        let r = square_double_compare(1.0, 16, 10, 0).unwrap();
        assert_eq!((r.theta, r.p_connect, r.lhs_estimate, r.aa_prime_factor), (1.0, 1.0, 1.0, 1.0));
    }
}
