//! Finite p-groups acting on the leaves of the depth-`N` p-regular tree.
//!
//! A [`GroupHandle`] is a subgroup of `Sym(p^N)` given by generators. When all
//! generators rotate the children of every vertex cyclically (the case for
//! everything generated by rooted and directed automorphisms) the handle is
//! backed by an echelon basis over the iterated wreath product, which makes
//! membership, level stabilizers and subgroup closure cheap at degree `p^N`.
//! Any other generating set falls back to a deterministic Schreier–Sims
//! chain, which rejects groups whose orbits are not `p`-powers.

mod chain;
mod pc;
mod schreier_sims;

use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::arith::prime_power;
use crate::perm::Permutation;

pub use chain::{ChainLevel, StabilizerChain};
use pc::{PcBasis, TreeElt, TreeShape};
use schreier_sims::SchreierSims;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("degree {0} is not a power of a prime")]
    NotPrimePowerDegree(usize),
    #[error("orbit of length {orbit_length} is not a power of {prime}")]
    NotPGroup { orbit_length: usize, prime: u32 },
    #[error("element {index} does not lie in the ambient group")]
    ElementNotInAmbient { index: usize },
    #[error("generator {index} of an operand is not in the ambient group")]
    NotASubgroup { index: usize },
    #[error("level {level} exceeds depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("group does not act on the tree by cyclic rotations")]
    NotTreeAction,
}

#[derive(Clone)]
enum Repr {
    Tree {
        shape: Arc<TreeShape>,
        gens: Vec<TreeElt>,
        basis: PcBasis,
    },
    Generic {
        ss: SchreierSims,
    },
}

/// A finite p-group of permutations of `p^N` points.
#[derive(Clone)]
pub struct GroupHandle {
    degree: usize,
    prime: u32,
    depth: usize,
    generators: Vec<Permutation>,
    repr: Repr,
    chain: OnceLock<Arc<StabilizerChain>>,
}

impl fmt::Debug for GroupHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupHandle")
            .field("degree", &self.degree)
            .field("prime", &self.prime)
            .field("order_exponent", &self.order_exponent())
            .field("generators", &self.generators.len())
            .field("tree_action", &self.is_tree_action())
            .finish()
    }
}

fn degree_parts(degree: usize) -> Result<(u32, usize), GroupError> {
    match prime_power(degree as u64) {
        Some((p, n)) if p <= 255 => Ok((p as u32, n as usize)),
        _ => Err(GroupError::NotPrimePowerDegree(degree)),
    }
}

fn check_degree(expected: usize, x: &Permutation) -> Result<(), GroupError> {
    if x.degree() != expected {
        return Err(GroupError::DegreeMismatch {
            expected,
            found: x.degree(),
        });
    }
    Ok(())
}

/// Subgroup closure in tree form: returns the basis and the generators that
/// enlarged it.
fn tree_closure(shape: &Arc<TreeShape>, seeds: impl IntoIterator<Item = TreeElt>) -> (PcBasis, Vec<TreeElt>) {
    let mut basis = PcBasis::new(Arc::clone(shape), shape.bfs_order());
    let mut kept = Vec::new();
    for s in seeds {
        if basis.add(&s) {
            kept.push(s);
        }
    }
    (basis, kept)
}

/// Normal closure of `seeds` under conjugation by `ambient` (tree form).
fn tree_normal_closure(shape: &Arc<TreeShape>, ambient: &[TreeElt], seeds: Vec<TreeElt>) -> (PcBasis, Vec<TreeElt>) {
    let (mut basis, mut kept) = tree_closure(shape, seeds);
    let mut next = 0;
    while next < kept.len() {
        let x = kept[next].clone();
        next += 1;
        for g in ambient {
            let c = shape.conj(&x, g);
            if basis.add(&c) {
                kept.push(c);
            }
        }
    }
    (basis, kept)
}

fn generic_closure(degree: usize, prime: u32, seeds: &[Permutation]) -> Result<(SchreierSims, Vec<Permutation>), GroupError> {
    let mut ss = SchreierSims::new(degree, prime as u64);
    let mut kept = Vec::new();
    for s in seeds {
        if ss.add(s)? {
            kept.push(s.clone());
        }
    }
    Ok((ss, kept))
}

fn generic_normal_closure(
    degree: usize,
    prime: u32,
    ambient: &[Permutation],
    seeds: &[Permutation],
) -> Result<(SchreierSims, Vec<Permutation>), GroupError> {
    let (mut ss, mut kept) = generic_closure(degree, prime, seeds)?;
    let mut next = 0;
    while next < kept.len() {
        let x = kept[next].clone();
        next += 1;
        for g in ambient {
            let c = x.conjugate_by(g);
            if ss.add(&c)? {
                kept.push(c);
            }
        }
    }
    Ok((ss, kept))
}

impl GroupHandle {
    /// The subgroup of `Sym(degree)` generated by `gens`; `degree` must be a
    /// prime power `p^N`.
    pub fn generate(degree: usize, gens: &[Permutation]) -> Result<Self, GroupError> {
        let (prime, depth) = degree_parts(degree)?;
        for g in gens {
            check_degree(degree, g)?;
        }
        let shape = Arc::new(TreeShape::new(prime as usize, depth));
        let tree: Option<Vec<TreeElt>> = gens.iter().map(|g| shape.element_of(g)).collect();
        match tree {
            Some(elts) => {
                let (basis, kept) = tree_closure(&shape, elts);
                Ok(Self::from_tree(shape, kept, basis))
            }
            None => {
                let (ss, kept) = generic_closure(degree, prime, gens)?;
                Ok(GroupHandle {
                    degree,
                    prime,
                    depth,
                    generators: kept,
                    repr: Repr::Generic { ss },
                    chain: OnceLock::new(),
                })
            }
        }
    }

    /// Generic Schreier–Sims route regardless of the generators' shape.
    pub fn generate_unstructured(degree: usize, gens: &[Permutation]) -> Result<Self, GroupError> {
        let (prime, depth) = degree_parts(degree)?;
        for g in gens {
            check_degree(degree, g)?;
        }
        let (ss, kept) = generic_closure(degree, prime, gens)?;
        Ok(GroupHandle {
            degree,
            prime,
            depth,
            generators: kept,
            repr: Repr::Generic { ss },
            chain: OnceLock::new(),
        })
    }

    pub fn trivial(degree: usize) -> Result<Self, GroupError> {
        Self::generate(degree, &[])
    }

    fn from_tree(shape: Arc<TreeShape>, gens: Vec<TreeElt>, basis: PcBasis) -> Self {
        GroupHandle {
            degree: shape.leaf_count(),
            prime: shape.p as u32,
            depth: shape.depth,
            generators: gens.iter().map(|g| shape.to_permutation(g)).collect(),
            repr: Repr::Tree { shape, gens, basis },
            chain: OnceLock::new(),
        }
    }

    fn with_generic(&self, ss: SchreierSims, gens: Vec<Permutation>) -> Self {
        GroupHandle {
            degree: self.degree,
            prime: self.prime,
            depth: self.depth,
            generators: gens,
            repr: Repr::Generic { ss },
            chain: OnceLock::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// `N` with `degree = p^N`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Whether the handle is backed by the wreath-product basis.
    pub fn is_tree_action(&self) -> bool {
        matches!(self.repr, Repr::Tree { .. })
    }

    /// `k` with `|G| = p^k`.
    pub fn order_exponent(&self) -> usize {
        match &self.repr {
            Repr::Tree { basis, .. } => basis.len(),
            Repr::Generic { ss } => ss.order_exponent(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order_exponent() == 0
    }

    /// Stabilizer chain with base points in increasing order, built on first use.
    pub fn chain(&self) -> Arc<StabilizerChain> {
        Arc::clone(self.chain.get_or_init(|| {
            Arc::new(match &self.repr {
                Repr::Tree { shape, basis, .. } => chain::tree_chain(shape, basis),
                Repr::Generic { ss } => ss.chain(),
            })
        }))
    }

    pub fn contains(&self, x: &Permutation) -> Result<bool, GroupError> {
        check_degree(self.degree, x)?;
        Ok(match &self.repr {
            Repr::Tree { shape, basis, .. } => match shape.element_of(x) {
                Some(e) => basis.contains(&e),
                None => false,
            },
            Repr::Generic { ss } => ss.contains(x),
        })
    }

    /// First generator of `self` outside `other`, if any.
    pub fn first_generator_outside(&self, other: &GroupHandle) -> Result<Option<Permutation>, GroupError> {
        if self.degree != other.degree {
            return Err(GroupError::DegreeMismatch {
                expected: other.degree,
                found: self.degree,
            });
        }
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(Some(g.clone()));
            }
        }
        Ok(None)
    }

    pub fn is_subgroup_of(&self, other: &GroupHandle) -> Result<bool, GroupError> {
        if self.order_exponent() > other.order_exponent() && self.degree == other.degree {
            return Ok(false);
        }
        Ok(self.first_generator_outside(other)?.is_none())
    }

    /// Equality as subgroups of `Sym(degree)`.
    pub fn equals(&self, other: &GroupHandle) -> Result<bool, GroupError> {
        if self.degree != other.degree {
            return Err(GroupError::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        if self.order_exponent() != other.order_exponent() {
            return Ok(false);
        }
        Ok(self.is_subgroup_of(other)? && other.is_subgroup_of(self)?)
    }

    fn tree_elts(&self, xs: &[Permutation]) -> Option<Vec<TreeElt>> {
        match &self.repr {
            Repr::Tree { shape, .. } => xs.iter().map(|x| shape.element_of(x)).collect(),
            Repr::Generic { .. } => None,
        }
    }

    /// Smallest subgroup containing `seeds` and normalized by `self`.
    pub fn normal_closure(&self, seeds: &[Permutation]) -> Result<GroupHandle, GroupError> {
        for (index, s) in seeds.iter().enumerate() {
            check_degree(self.degree, s)?;
            if !self.contains(s)? {
                return Err(GroupError::ElementNotInAmbient { index });
            }
        }
        self.normal_closure_unchecked(seeds)
    }

    fn normal_closure_unchecked(&self, seeds: &[Permutation]) -> Result<GroupHandle, GroupError> {
        match &self.repr {
            Repr::Tree { shape, gens, .. } => {
                let elts = self.tree_elts(seeds).expect("members of a tree group are tree elements");
                let (basis, kept) = tree_normal_closure(shape, gens, elts);
                Ok(Self::from_tree(Arc::clone(shape), kept, basis))
            }
            Repr::Generic { .. } => {
                let (ss, kept) = generic_normal_closure(self.degree, self.prime, &self.generators, seeds)?;
                Ok(self.with_generic(ss, kept))
            }
        }
    }

    /// Normal closure of tree-form seeds known to lie in `self`.
    fn tree_normal_closure_of(&self, seeds: Vec<TreeElt>) -> GroupHandle {
        match &self.repr {
            Repr::Tree { shape, gens, .. } => {
                let (basis, kept) = tree_normal_closure(shape, gens, seeds);
                Self::from_tree(Arc::clone(shape), kept, basis)
            }
            Repr::Generic { .. } => unreachable!("tree seeds need a tree ambient"),
        }
    }

    /// `[G, G]`.
    pub fn derived(&self) -> GroupHandle {
        match &self.repr {
            Repr::Tree { shape, gens, .. } => {
                let mut seeds = Vec::new();
                for (i, x) in gens.iter().enumerate() {
                    for y in &gens[i + 1..] {
                        seeds.push(shape.comm(x, y));
                    }
                }
                self.tree_normal_closure_of(seeds)
            }
            Repr::Generic { .. } => {
                let seeds = pairwise_commutators(&self.generators, &self.generators);
                self.normal_closure_unchecked(&seeds)
                    .expect("subgroups of a p-group are p-groups")
            }
        }
    }

    /// `[A, B]` as a normal subgroup of `ambient`; both operands must lie in it.
    pub fn commutator_subgroup(a: &GroupHandle, b: &GroupHandle, ambient: &GroupHandle) -> Result<GroupHandle, GroupError> {
        for operand in [a, b] {
            if let Some(index) = operand
                .generators
                .iter()
                .map(|g| ambient.contains(g))
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .position(|&inside| !inside)
            {
                return Err(GroupError::NotASubgroup { index });
            }
        }
        match (&ambient.repr, ambient.tree_elts(&a.generators), ambient.tree_elts(&b.generators)) {
            (Repr::Tree { shape, .. }, Some(xs), Some(ys)) => {
                let mut seeds = Vec::with_capacity(xs.len() * ys.len());
                for x in &xs {
                    for y in &ys {
                        seeds.push(shape.comm(x, y));
                    }
                }
                Ok(ambient.tree_normal_closure_of(seeds))
            }
            _ => {
                let seeds = pairwise_commutators(&a.generators, &b.generators);
                ambient.normal_closure_unchecked(&seeds)
            }
        }
    }

    /// `Φ(G) = G' G^p`, the smallest normal subgroup with elementary abelian
    /// quotient.
    pub fn frattini(&self) -> GroupHandle {
        let p = self.prime as usize;
        match &self.repr {
            Repr::Tree { shape, gens, .. } => {
                let mut seeds = Vec::new();
                for (i, x) in gens.iter().enumerate() {
                    seeds.push(shape.pow(x, p));
                    for y in &gens[i + 1..] {
                        seeds.push(shape.comm(x, y));
                    }
                }
                self.tree_normal_closure_of(seeds)
            }
            Repr::Generic { .. } => {
                let mut seeds = pairwise_commutators(&self.generators, &self.generators);
                seeds.extend(self.generators.iter().map(|g| g.pow(p as i64)));
                self.normal_closure_unchecked(&seeds)
                    .expect("subgroups of a p-group are p-groups")
            }
        }
    }

    /// Minimal number of generators, `log_p |G : Φ(G)|`.
    pub fn rank(&self) -> usize {
        self.order_exponent() - self.frattini().order_exponent()
    }

    /// Kernel of the action on the level-`m` vertices.
    pub fn level_stabilizer(&self, m: usize) -> Result<GroupHandle, GroupError> {
        if m > self.depth {
            return Err(GroupError::LevelOutOfRange {
                level: m,
                depth: self.depth,
            });
        }
        match &self.repr {
            Repr::Tree { shape, basis, .. } => {
                let tail = basis.tail(shape.level_offset(m));
                let gens: Vec<TreeElt> = tail.elements().cloned().collect();
                Ok(Self::from_tree(Arc::clone(shape), gens, tail))
            }
            Repr::Generic { .. } => Err(GroupError::NotTreeAction),
        }
    }

    /// The group induced on the level-`m` vertices.
    pub fn level_image(&self, m: usize) -> Result<GroupHandle, GroupError> {
        if m > self.depth {
            return Err(GroupError::LevelOutOfRange {
                level: m,
                depth: self.depth,
            });
        }
        let gens = self
            .generators
            .iter()
            .map(|g| crate::tree_autom::restrict_permutation(g, self.prime, self.depth, m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| GroupError::NotTreeAction)?;
        let shape = Arc::new(TreeShape::new(self.prime as usize, m));
        match gens.iter().map(|g| shape.element_of(g)).collect::<Option<Vec<_>>>() {
            Some(elts) => {
                let (basis, kept) = tree_closure(&shape, elts);
                Ok(Self::from_tree(shape, kept, basis))
            }
            None => Self::generate(shape.leaf_count(), &gens),
        }
    }
}

fn pairwise_commutators(xs: &[Permutation], ys: &[Permutation]) -> Vec<Permutation> {
    let mut out = Vec::new();
    for x in xs {
        for y in ys {
            let c = x.commutator(y);
            if !c.is_identity() {
                out.push(c);
            }
        }
    }
    out
}
