//! Seeded bond/site configurations.
//!
//! Each trial owns an independent ChaCha8 stream keyed by `(seed, stream)`,
//! so a trial's configuration does not depend on scheduling or thread count.
//! Sites draw their uniforms first, then bonds; thresholding the same
//! uniforms at different probabilities gives monotonically coupled samples.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::lattice::{BondId, Lattice, SiteId};

/// RNG for trial `stream` of experiment `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("{name} = {p} is not a probability"));
    }
    Ok(())
}

/// Per-site and per-bond uniforms for one trial.
#[derive(Debug, Clone)]
pub struct Uniforms {
    pub site: Vec<f64>,
    pub bond: Vec<f64>,
}

impl Uniforms {
    pub fn draw(lattice: &Lattice, seed: u64, stream: u64) -> Uniforms {
        let mut rng = trial_rng(seed, stream);
        let site = (0..lattice.num_sites()).map(|_| rng.random::<f64>()).collect();
        let bond = (0..lattice.num_bonds()).map(|_| rng.random::<f64>()).collect();
        Uniforms { site, bond }
    }
}

/// One random realization of bond and site percolation on a lattice.
#[derive(Debug, Clone)]
pub struct PercolationSample {
    lattice: Arc<Lattice>,
    open_bonds: Vec<bool>,
    occupied: Vec<bool>,
    pub p_bond: f64,
    pub p_site: f64,
    pub seed: u64,
    pub stream: u64,
}

/// Draws a sample: bond `b` is open iff its uniform is below `p_bond`, site `s`
/// occupied iff its uniform is below `p_site`.
pub fn sample(
    lattice: &Arc<Lattice>,
    p_bond: f64,
    p_site: f64,
    seed: u64,
    stream: u64,
) -> Result<PercolationSample> {
    check_probability("p_bond", p_bond)?;
    check_probability("p_site", p_site)?;
    let u = Uniforms::draw(lattice, seed, stream);
    Ok(PercolationSample::threshold(lattice, &u, p_bond, p_site, seed, stream))
}

impl PercolationSample {
    pub fn threshold(
        lattice: &Arc<Lattice>,
        u: &Uniforms,
        p_bond: f64,
        p_site: f64,
        seed: u64,
        stream: u64,
    ) -> PercolationSample {
        PercolationSample {
            lattice: Arc::clone(lattice),
            open_bonds: u.bond.iter().map(|&x| x < p_bond).collect(),
            occupied: u.site.iter().map(|&x| x < p_site).collect(),
            p_bond,
            p_site,
            seed,
            stream,
        }
    }

    /// A sample with explicit bond and site states.
    pub fn from_parts(
        lattice: &Arc<Lattice>,
        open_bonds: Vec<bool>,
        occupied: Vec<bool>,
    ) -> Result<PercolationSample> {
        if open_bonds.len() != lattice.num_bonds() || occupied.len() != lattice.num_sites() {
            return domain("bond/site vectors do not match the lattice");
        }
        Ok(PercolationSample {
            lattice: Arc::clone(lattice),
            open_bonds,
            occupied,
            p_bond: f64::NAN,
            p_site: f64::NAN,
            seed: 0,
            stream: 0,
        })
    }

    /// Everything open and occupied.
    pub fn full(lattice: &Arc<Lattice>) -> PercolationSample {
        Self::from_parts(lattice, vec![true; lattice.num_bonds()], vec![true; lattice.num_sites()])
            .expect("sizes match")
    }

    /// Opens the bonds along a sequence of adjacent sites (and occupies them).
    pub fn open_path(&mut self, path: &[SiteId]) -> Result<()> {
        for w in path.windows(2) {
            let b = self
                .lattice
                .incident(w[0])
                .iter()
                .find(|&&(t, _)| t == w[1])
                .map(|&(_, b)| b);
            match b {
                Some(b) => self.open_bonds[b as usize] = true,
                None => return domain(format!("sites {} and {} are not adjacent", w[0], w[1])),
            }
        }
        for &s in path {
            self.occupied[s as usize] = true;
        }
        Ok(())
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn is_open(&self, b: BondId) -> bool {
        self.open_bonds[b as usize]
    }

    pub fn is_occupied(&self, s: SiteId) -> bool {
        self.occupied[s as usize]
    }

    pub fn open_bonds(&self) -> &[bool] {
        &self.open_bonds
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    pub fn set_bond(&mut self, b: BondId, open: bool) {
        self.open_bonds[b as usize] = open;
    }

    pub fn set_site(&mut self, s: SiteId, occupied: bool) {
        self.occupied[s as usize] = occupied;
    }

    /// True if `b` is open and both endpoints are occupied.
    pub fn conducts(&self, b: BondId) -> bool {
        let [x, y] = self.lattice.bond(b);
        self.open_bonds[b as usize] && self.occupied[x as usize] && self.occupied[y as usize]
    }

    /// Occupied neighbors reachable over open bonds.
    pub fn open_neighbors(&self, s: SiteId) -> impl Iterator<Item = SiteId> + '_ {
        let ok = self.occupied[s as usize];
        self.lattice
            .incident(s)
            .iter()
            .filter(move |&&(t, b)| ok && self.open_bonds[b as usize] && self.occupied[t as usize])
            .map(|&(t, _)| t)
    }

    pub fn count_open(&self) -> usize {
        self.open_bonds.iter().filter(|&&x| x).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<Lattice> {
        Arc::new(Lattice::square(&[n, n]))
    }

    #[test]
    fn degenerate_probabilities() {
        let l = grid(5);
        assert_eq!(sample(&l, 0.0, 1.0, 1, 0).unwrap().count_open(), 0);
        assert_eq!(sample(&l, 1.0, 1.0, 1, 0).unwrap().count_open(), l.num_bonds());
        assert!(sample(&l, 1.2, 1.0, 1, 0).is_err());
        assert!(sample(&l, 0.5, -0.1, 1, 0).is_err());
    }

    #[test]
    fn reproducible_and_stream_dependent() {
        let l = grid(6);
        let a = sample(&l, 0.5, 0.7, 42, 3).unwrap();
        let b = sample(&l, 0.5, 0.7, 42, 3).unwrap();
        let c = sample(&l, 0.5, 0.7, 42, 4).unwrap();
        assert_eq!(a.open_bonds(), b.open_bonds());
        assert_eq!(a.occupied(), b.occupied());
        assert_ne!(a.open_bonds(), c.open_bonds());
    }

    #[test]
    fn open_fraction_is_binomial() {
        let l = grid(10);
        let trials = 10_000u64;
        let total: usize = (0..trials)
            .map(|t| sample(&l, 0.5, 1.0, 7, t).unwrap().count_open())
            .sum();
        let n = (trials as usize * l.num_bonds()) as f64;
        let mean = total as f64 / n;
        let sigma = (0.25 / n).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn coupling_is_monotone() {
        let l = grid(8);
        let u = Uniforms::draw(&l, 9, 0);
        let lo = PercolationSample::threshold(&l, &u, 0.3, 0.6, 9, 0);
        let hi = PercolationSample::threshold(&l, &u, 0.6, 0.9, 9, 0);
        assert!(lo.open_bonds().iter().zip(hi.open_bonds()).all(|(a, b)| !a || *b));
        assert!(lo.occupied().iter().zip(hi.occupied()).all(|(a, b)| !a || *b));
    }
}
