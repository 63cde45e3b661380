//! Explicit stabilizer chains (base, fundamental orbits, transversals and
//! strong generators).

use std::collections::HashMap;
use std::sync::Arc;

use crate::arith::log_exact;
use crate::perm::Permutation;

use super::pc::{PcBasis, TreeShape};

#[derive(Debug, Clone)]
pub struct ChainLevel {
    pub base_point: usize,
    /// Fundamental orbit of the base point under the stabilizer of the
    /// earlier base points.
    pub orbit: Vec<usize>,
    /// `transversal[k]` maps the base point to `orbit[k]`.
    pub transversal: Vec<Permutation>,
    pub strong_generators: Vec<Permutation>,
}

#[derive(Debug, Clone)]
pub struct StabilizerChain {
    pub(crate) prime: u32,
    pub(crate) levels: Vec<ChainLevel>,
}

impl StabilizerChain {
    pub fn levels(&self) -> &[ChainLevel] {
        &self.levels
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base_point).collect()
    }

    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// `k` with `p^k` equal to the product of the fundamental orbit lengths.
    pub fn order_exponent(&self) -> usize {
        self.levels
            .iter()
            .map(|l| log_exact(l.orbit.len() as u64, self.prime as u64).expect("p-group orbit") as usize)
            .sum()
    }

    /// Membership by sifting through the transversals.
    pub fn contains(&self, x: &Permutation) -> bool {
        let mut x = x.clone();
        for level in &self.levels {
            let y = x.apply(level.base_point);
            match level.orbit.iter().position(|&o| o == y) {
                Some(k) => x = x.then(&level.transversal[k].inverse()),
                None => return false,
            }
        }
        x.is_identity()
    }
}

/// Chain with base points in increasing leaf order for a subgroup of the
/// iterated wreath product, read off from its depth-first echelon basis.
///
/// Fixing leaf `ℓ` means a zero label on every vertex above it, so the
/// stabilizer of all leaves before `ℓ` is the set of elements vanishing on a
/// depth-first prefix, and its orbit on `ℓ` has length `p` to the number of
/// basis elements led by vertices whose leftmost leaf is `ℓ`.
pub(crate) fn tree_chain(shape: &Arc<TreeShape>, generators: &PcBasis) -> StabilizerChain {
    let mut dfs = PcBasis::new(Arc::clone(shape), shape.dfs_order());
    for g in generators.elements() {
        dfs.add(g);
    }
    let order = Arc::clone(dfs.order());
    let leaves: Vec<usize> = order.iter().map(|&v| shape.first_leaf(v as usize)).collect();
    let elements: Vec<(usize, Permutation)> = dfs
        .positioned()
        .map(|(pos, e)| (pos, shape.to_permutation(e)))
        .collect();

    let mut levels = Vec::new();
    let mut start = 0;
    while start < leaves.len() {
        let leaf = leaves[start];
        let end = start + leaves[start..].iter().take_while(|&&l| l == leaf).count();
        let count = elements.iter().filter(|(pos, _)| (start..end).contains(pos)).count();
        if count > 0 {
            let strong: Vec<Permutation> = elements
                .iter()
                .filter(|(pos, _)| *pos >= start)
                .map(|(_, e)| e.clone())
                .collect();
            let (orbit, transversal) = orbit_with_transversal(leaf, &strong, shape.leaf_count());
            debug_assert_eq!(orbit.len(), shape.p.pow(count as u32));
            levels.push(ChainLevel {
                base_point: leaf,
                orbit,
                transversal,
                strong_generators: strong,
            });
        }
        start = end;
    }
    StabilizerChain {
        prime: shape.p as u32,
        levels,
    }
}

fn orbit_with_transversal(point: usize, gens: &[Permutation], degree: usize) -> (Vec<usize>, Vec<Permutation>) {
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut orbit = vec![point];
    let mut transversal = vec![Permutation::identity(degree)];
    index.insert(point, 0);
    let mut k = 0;
    while k < orbit.len() {
        let x = orbit[k];
        for s in gens {
            let y = s.apply(x);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(y) {
                e.insert(orbit.len());
                orbit.push(y);
                transversal.push(transversal[k].then(s));
            }
        }
        k += 1;
    }
    (orbit, transversal)
}
