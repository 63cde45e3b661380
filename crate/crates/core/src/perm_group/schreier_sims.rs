//! Deterministic Schreier–Sims for arbitrary permutation generators.
//!
//! Used for groups whose generators do not all respect the tree structure,
//! and as an independent route to group orders in tests.

use crate::arith::log_exact;
use crate::perm::Permutation;

use super::chain::{ChainLevel, StabilizerChain};
use super::GroupError;

#[derive(Debug, Clone)]
struct Level {
    base: usize,
    /// Points of the fundamental orbit, in discovery order.
    orbit: Vec<usize>,
    /// `transversal[y]` maps the base point to `y`.
    transversal: Vec<Option<Permutation>>,
}

#[derive(Debug, Clone)]
pub(crate) struct SchreierSims {
    degree: usize,
    prime: u64,
    strong: Vec<Permutation>,
    levels: Vec<Level>,
}

impl SchreierSims {
    pub fn new(degree: usize, prime: u64) -> Self {
        SchreierSims {
            degree,
            prime,
            strong: Vec::new(),
            levels: Vec::new(),
        }
    }

    pub fn order_exponent(&self) -> usize {
        self.levels
            .iter()
            .map(|l| log_exact(l.orbit.len() as u64, self.prime).expect("checked on insert") as usize)
            .sum()
    }

    /// Strips `x` through the levels from `from`; returns the residue and the
    /// level at which it stopped (`levels.len()` if it passed them all).
    fn sift(&self, x: &Permutation, from: usize) -> (Permutation, usize) {
        let mut x = x.clone();
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let y = x.apply(level.base);
            match &level.transversal[y] {
                Some(u) => x = x.then(&u.inverse()),
                None => return (x, i),
            }
        }
        let n = self.levels.len();
        (x, n)
    }

    pub fn contains(&self, x: &Permutation) -> bool {
        self.sift(x, 0).0.is_identity()
    }

    fn level_generators(&self, i: usize) -> Vec<&Permutation> {
        let bases: Vec<usize> = self.levels[..i].iter().map(|l| l.base).collect();
        self.strong
            .iter()
            .filter(|s| bases.iter().all(|&b| s.apply(b) == b))
            .collect()
    }

    fn rebuild_level(&mut self, i: usize) -> Result<(), GroupError> {
        let gens: Vec<Permutation> = self.level_generators(i).into_iter().cloned().collect();
        let base = self.levels[i].base;
        let mut transversal: Vec<Option<Permutation>> = vec![None; self.degree];
        transversal[base] = Some(Permutation::identity(self.degree));
        let mut orbit = vec![base];
        let mut k = 0;
        while k < orbit.len() {
            let x = orbit[k];
            let ux = transversal[x].clone().expect("orbit point has a representative");
            for s in &gens {
                let y = s.apply(x);
                if transversal[y].is_none() {
                    transversal[y] = Some(ux.then(s));
                    orbit.push(y);
                }
            }
            k += 1;
        }
        if log_exact(orbit.len() as u64, self.prime).is_none() {
            return Err(GroupError::NotPGroup {
                orbit_length: orbit.len(),
                prime: self.prime as u32,
            });
        }
        self.levels[i].orbit = orbit;
        self.levels[i].transversal = transversal;
        Ok(())
    }

    fn insert_strong(&mut self, r: Permutation, level: usize) -> Result<(), GroupError> {
        if level == self.levels.len() {
            let base = r.first_moved().expect("nontrivial residue");
            self.levels.push(Level {
                base,
                orbit: Vec::new(),
                transversal: Vec::new(),
            });
        }
        self.strong.push(r);
        for i in 0..=level {
            self.rebuild_level(i)?;
        }
        Ok(())
    }

    /// Finds a Schreier generator at level `i` that does not sift through the
    /// deeper levels.
    fn failing_schreier_generator(&self, i: usize) -> Option<(Permutation, usize)> {
        let level = &self.levels[i];
        let gens = self.level_generators(i);
        for &y in &level.orbit {
            let uy = level.transversal[y].as_ref().expect("orbit point");
            for s in &gens {
                let z = s.apply(y);
                let uz = level.transversal[z].as_ref().expect("orbit closed under generators");
                let sg = uy.then(s).then(&uz.inverse());
                let (r, j) = self.sift(&sg, i + 1);
                if !r.is_identity() {
                    return Some((r, j));
                }
            }
        }
        None
    }

    /// Adds a generator; returns whether the group grew.
    pub fn add(&mut self, g: &Permutation) -> Result<bool, GroupError> {
        let (r, j) = self.sift(g, 0);
        if r.is_identity() {
            return Ok(false);
        }
        self.insert_strong(r, j)?;
        // Levels deeper than the last insertion stay complete; walk upwards,
        // re-descending whenever a new strong generator appears.
        let mut i = j + 1;
        while i > 0 {
            i -= 1;
            if let Some((r, k)) = self.failing_schreier_generator(i) {
                self.insert_strong(r, k)?;
                i = k + 1;
            }
        }
        Ok(true)
    }

    pub fn chain(&self) -> StabilizerChain {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| ChainLevel {
                base_point: l.base,
                orbit: l.orbit.clone(),
                transversal: l
                    .orbit
                    .iter()
                    .map(|&y| l.transversal[y].clone().expect("orbit point"))
                    .collect(),
                strong_generators: self.level_generators(i).into_iter().cloned().collect(),
            })
            .collect();
        StabilizerChain {
            prime: self.prime as u32,
            levels,
        }
    }
}
