//! Depth-truncated portraits of automorphisms of the p-regular rooted tree.
//!
//! A vertex at level `m` is a word of `m` digits in `{0, …, p-1}`; its index
//! is the base-`p` value of the word read most-significant digit first, so the
//! leaves below a vertex form one contiguous block of indices.
//!
//! An [`Automorphism`] of depth `N` stores the permutation it induces on the
//! children of the root together with the `p` automorphisms it induces on the
//! subtrees below (its sections), down to depth zero where everything is the
//! identity. Truncating at depth `N` is exactly computing in `G / st_G(N)`.
//! Identical sub-portraits are shared through reference counting.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::arith::is_prime;
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u32),
    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("automorphism moves level-{level} vertices")]
    NotLevelStabilized { level: usize },
    #[error("vertex at level {level} is deeper than depth {depth}")]
    VertexTooDeep { level: usize, depth: usize },
    #[error("digit {digit} is out of range for p = {p}")]
    DigitOutOfRange { digit: u32, p: u32 },
    #[error("index {index} out of range for level {level}")]
    IndexOutOfRange { index: usize, level: usize },
    #[error("rooted automorphisms need depth >= 1")]
    ZeroDepth,
    #[error("defining vector has length {found}, expected {expected}")]
    BadVectorLength { expected: usize, found: usize },
    #[error("root label is not a permutation of 0..{0}")]
    BadRootPermutation(usize),
    #[error("permutation does not preserve the tree structure")]
    NotTreeCompatible,
}

/// Checks that `p` is an odd prime small enough for byte labels.
pub fn check_prime(p: u32) -> Result<(), TreeError> {
    if !(3..=255).contains(&p) || !is_prime(p as u64) {
        return Err(TreeError::InvalidPrime(p));
    }
    Ok(())
}

fn pow(p: usize, m: usize) -> usize {
    p.pow(m as u32)
}

/// A vertex of the tree, given by its digit word (root = empty word).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    digits: Vec<u8>,
}

impl Vertex {
    pub fn root() -> Self {
        Vertex { digits: Vec::new() }
    }

    pub fn new(p: u32, digits: &[u32]) -> Result<Self, TreeError> {
        let digits = digits
            .iter()
            .map(|&d| {
                if d < p {
                    Ok(d as u8)
                } else {
                    Err(TreeError::DigitOutOfRange { digit: d, p })
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Vertex { digits })
    }

    /// The level-`level` vertex with the given index.
    pub fn from_index(p: u32, level: usize, index: usize) -> Result<Self, TreeError> {
        let p = p as usize;
        if index >= pow(p, level) {
            return Err(TreeError::IndexOutOfRange { index, level });
        }
        let mut digits = vec![0u8; level];
        let mut k = index;
        for d in digits.iter_mut().rev() {
            *d = (k % p) as u8;
            k /= p;
        }
        Ok(Vertex { digits })
    }

    pub fn index(&self, p: u32) -> usize {
        self.digits
            .iter()
            .fold(0usize, |acc, &d| acc * p as usize + d as usize)
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn child(&self, digit: u8) -> Vertex {
        let mut digits = self.digits.clone();
        digits.push(digit);
        Vertex { digits }
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

struct Node {
    depth: usize,
    root: Box<[u8]>,
    children: Box<[Automorphism]>,
    trivial: bool,
}

/// Portrait of a tree automorphism truncated at a fixed depth.
#[derive(Clone)]
pub struct Automorphism {
    node: Arc<Node>,
}

impl Automorphism {
    /// Identity portrait of the given depth.
    pub fn identity(p: u32, depth: usize) -> Result<Self, TreeError> {
        check_prime(p)?;
        Ok(Self::identity_unchecked(p as usize, depth))
    }

    pub(crate) fn identity_unchecked(p: usize, depth: usize) -> Self {
        let root: Box<[u8]> = (0..p as u8).collect();
        let mut current = Automorphism {
            node: Arc::new(Node {
                depth: 0,
                root: root.clone(),
                children: Box::new([]),
                trivial: true,
            }),
        };
        for d in 1..=depth {
            current = Automorphism {
                node: Arc::new(Node {
                    depth: d,
                    root: root.clone(),
                    children: vec![current; p].into_boxed_slice(),
                    trivial: true,
                }),
            };
        }
        current
    }

    /// `a^power`, where `a` cycles the children of the root as `0 → 1 → … → p-1 → 0`
    /// and acts trivially below.
    pub fn rooted(p: u32, depth: usize, power: i64) -> Result<Self, TreeError> {
        check_prime(p)?;
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        Ok(Self::rooted_unchecked(p as usize, depth, power))
    }

    pub(crate) fn rooted_unchecked(p: usize, depth: usize, power: i64) -> Self {
        let shift = power.rem_euclid(p as i64) as usize;
        let id = Self::identity_unchecked(p, depth);
        if shift == 0 || depth == 0 {
            return id;
        }
        let child = id.node.children[0].clone();
        Automorphism {
            node: Arc::new(Node {
                depth,
                root: (0..p).map(|x| ((x + shift) % p) as u8).collect(),
                children: vec![child; p].into_boxed_slice(),
                trivial: false,
            }),
        }
    }

    /// The directed automorphism `b` with first-level sections
    /// `(a^{e_1}, …, a^{e_{p-1}}, b)` for the defining vector `e`.
    ///
    /// At depth 1 every section truncates away and the result is the identity.
    pub fn directed(p: u32, vector: &[u32], depth: usize) -> Result<Self, TreeError> {
        check_prime(p)?;
        if vector.len() != p as usize - 1 {
            return Err(TreeError::BadVectorLength {
                expected: p as usize - 1,
                found: vector.len(),
            });
        }
        let p = p as usize;
        let mut current = Self::identity_unchecked(p, 0);
        for d in 1..=depth {
            let mut children: Vec<Automorphism> = vector
                .iter()
                .map(|&e| Self::rooted_unchecked(p, d - 1, e as i64))
                .collect();
            children.push(current);
            current = Self::from_parts_unchecked((0..p as u8).collect(), children);
        }
        Ok(current)
    }

    /// Assembles a portrait from a root permutation (any permutation of
    /// `0..p`) and `p` children of equal depth.
    pub fn from_parts(root: Vec<u8>, children: Vec<Automorphism>) -> Result<Self, TreeError> {
        let p = root.len();
        let mut seen = vec![false; p];
        for &x in &root {
            if x as usize >= p || seen[x as usize] {
                return Err(TreeError::BadRootPermutation(p));
            }
            seen[x as usize] = true;
        }
        if children.len() != p {
            return Err(TreeError::ArityMismatch {
                left: p,
                right: children.len(),
            });
        }
        let depth = children[0].depth();
        for c in &children {
            if c.arity() != p {
                return Err(TreeError::ArityMismatch {
                    left: p,
                    right: c.arity(),
                });
            }
            if c.depth() != depth {
                return Err(TreeError::DepthMismatch {
                    left: depth,
                    right: c.depth(),
                });
            }
        }
        Ok(Self::from_parts_unchecked(root, children))
    }

    fn from_parts_unchecked(root: Vec<u8>, children: Vec<Automorphism>) -> Self {
        let depth = children[0].depth() + 1;
        let trivial =
            root.iter().enumerate().all(|(i, &x)| i == x as usize) && children.iter().all(|c| c.is_identity());
        if trivial {
            return Self::identity_unchecked(root.len(), depth);
        }
        Automorphism {
            node: Arc::new(Node {
                depth,
                root: root.into_boxed_slice(),
                children: children.into_boxed_slice(),
                trivial: false,
            }),
        }
    }

    pub fn depth(&self) -> usize {
        self.node.depth
    }

    pub fn arity(&self) -> usize {
        self.node.root.len()
    }

    pub fn is_identity(&self) -> bool {
        self.node.trivial
    }

    /// Permutation of the children of the root.
    pub fn root_permutation(&self) -> &[u8] {
        &self.node.root
    }

    /// `k` if the root permutation is `x ↦ x + k (mod p)`.
    pub fn root_rotation(&self) -> Option<u8> {
        let p = self.arity();
        let k = self.node.root[0];
        self.node
            .root
            .iter()
            .enumerate()
            .all(|(x, &y)| (x + k as usize) % p == y as usize)
            .then_some(k)
    }

    pub fn children(&self) -> &[Automorphism] {
        &self.node.children
    }

    fn check_compatible(&self, other: &Automorphism) -> Result<(), TreeError> {
        if self.arity() != other.arity() {
            return Err(TreeError::ArityMismatch {
                left: self.arity(),
                right: other.arity(),
            });
        }
        if self.depth() != other.depth() {
            return Err(TreeError::DepthMismatch {
                left: self.depth(),
                right: other.depth(),
            });
        }
        Ok(())
    }

    /// "`self` then `other`" as a single automorphism.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism, TreeError> {
        self.check_compatible(other)?;
        Ok(self.then(other))
    }

    /// Like [`compose`](Self::compose) but panics on a depth or arity mismatch.
    pub fn then(&self, other: &Automorphism) -> Automorphism {
        assert!(
            self.arity() == other.arity() && self.depth() == other.depth(),
            "incompatible portraits"
        );
        if self.is_identity() {
            return other.clone();
        }
        if other.is_identity() || self.depth() == 0 {
            return self.clone();
        }
        let f = &self.node;
        let g = &other.node;
        let root = f.root.iter().map(|&x| g.root[x as usize]).collect();
        let children = f
            .children
            .iter()
            .zip(f.root.iter())
            .map(|(c, &x)| c.then(&g.children[x as usize]))
            .collect();
        Self::from_parts_unchecked(root, children)
    }

    pub fn inverse(&self) -> Automorphism {
        if self.is_identity() {
            return self.clone();
        }
        let f = &self.node;
        let p = self.arity();
        let mut inv_root = vec![0u8; p];
        for (x, &y) in f.root.iter().enumerate() {
            inv_root[y as usize] = x as u8;
        }
        let children = inv_root
            .iter()
            .map(|&x| f.children[x as usize].inverse())
            .collect();
        Self::from_parts_unchecked(inv_root, children)
    }

    pub fn pow(&self, exp: i64) -> Automorphism {
        let base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::identity_unchecked(self.arity(), self.depth());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.then(&sq);
            }
        }
        acc
    }

    /// `g⁻¹ self g`.
    pub fn conjugate_by(&self, g: &Automorphism) -> Automorphism {
        g.inverse().then(self).then(g)
    }

    /// `[self, other] = self⁻¹ other⁻¹ self other`.
    pub fn commutator(&self, other: &Automorphism) -> Automorphism {
        self.inverse().then(&other.inverse()).then(self).then(other)
    }

    pub fn apply(&self, v: &Vertex) -> Result<Vertex, TreeError> {
        self.check_vertex(v)?;
        let mut current = self;
        let mut digits = Vec::with_capacity(v.level());
        for &d in v.digits() {
            digits.push(current.node.root[d as usize]);
            current = &current.node.children[d as usize];
        }
        Ok(Vertex { digits })
    }

    fn check_vertex(&self, v: &Vertex) -> Result<(), TreeError> {
        if v.level() > self.depth() {
            return Err(TreeError::VertexTooDeep {
                level: v.level(),
                depth: self.depth(),
            });
        }
        if let Some(&d) = v.digits().iter().find(|&&d| d as usize >= self.arity()) {
            return Err(TreeError::DigitOutOfRange {
                digit: d as u32,
                p: self.arity() as u32,
            });
        }
        Ok(())
    }

    /// The automorphism induced on the subtree at `v`, of depth `depth - |v|`.
    pub fn section(&self, v: &Vertex) -> Result<Automorphism, TreeError> {
        self.check_vertex(v)?;
        let mut current = self;
        for &d in v.digits() {
            current = &current.node.children[d as usize];
        }
        Ok(current.clone())
    }

    /// First-level sections of an element of the first level stabilizer.
    pub fn psi(&self) -> Result<Vec<Automorphism>, TreeError> {
        if self.depth() == 0 {
            return Err(TreeError::NotLevelStabilized { level: 1 });
        }
        if self.root_rotation() != Some(0) {
            return Err(TreeError::NotLevelStabilized { level: 1 });
        }
        Ok(self.node.children.to_vec())
    }

    /// The `p²` second-level sections of an element of the second level
    /// stabilizer, in vertex order.
    pub fn psi2(&self) -> Result<Vec<Automorphism>, TreeError> {
        if self.depth() < 2 {
            return Err(TreeError::NotLevelStabilized { level: 2 });
        }
        let first = self.psi()?;
        let mut out = Vec::with_capacity(self.arity() * self.arity());
        for c in &first {
            out.extend(c.psi().map_err(|_| TreeError::NotLevelStabilized { level: 2 })?);
        }
        Ok(out)
    }

    /// The automorphism of depth `depth` acting as `g` below `v` and trivially
    /// elsewhere.
    pub fn embed_at_vertex(g: &Automorphism, v: &Vertex, depth: usize) -> Result<Automorphism, TreeError> {
        if g.depth() + v.level() != depth {
            return Err(TreeError::DepthMismatch {
                left: g.depth() + v.level(),
                right: depth,
            });
        }
        let p = g.arity();
        if let Some(&d) = v.digits().iter().find(|&&d| d as usize >= p) {
            return Err(TreeError::DigitOutOfRange {
                digit: d as u32,
                p: p as u32,
            });
        }
        let mut current = g.clone();
        for (k, &d) in v.digits().iter().enumerate().rev() {
            let level_depth = depth - k;
            let id = Self::identity_unchecked(p, level_depth - 1);
            let mut children = vec![id; p];
            children[d as usize] = current;
            current = Self::from_parts_unchecked((0..p as u8).collect(), children);
        }
        Ok(current)
    }

    /// The permutation induced on the `p^m` level-`m` vertices.
    pub fn to_permutation(&self, m: usize) -> Result<Permutation, TreeError> {
        if m > self.depth() {
            return Err(TreeError::VertexTooDeep {
                level: m,
                depth: self.depth(),
            });
        }
        let mut images = vec![0u32; pow(self.arity(), m)];
        self.fill_images(m, &mut images);
        Ok(Permutation::from_images_unchecked(images))
    }

    fn fill_images(&self, m: usize, out: &mut [u32]) {
        if self.is_identity() || m == 0 {
            for (i, x) in out.iter_mut().enumerate() {
                *x = i as u32;
            }
            return;
        }
        let block = out.len() / self.arity();
        for (x, chunk) in out.chunks_mut(block).enumerate() {
            self.node.children[x].fill_images(m - 1, chunk);
            let offset = (self.node.root[x] as usize * block) as u32;
            for y in chunk.iter_mut() {
                *y += offset;
            }
        }
    }

    /// Recovers the depth-`depth` portrait from a permutation of the `p^depth`
    /// leaves, provided the permutation maps leaf blocks to leaf blocks.
    pub fn from_permutation(perm: &Permutation, p: u32, depth: usize) -> Result<Automorphism, TreeError> {
        check_prime(p)?;
        if perm.degree() != pow(p as usize, depth) {
            return Err(TreeError::NotTreeCompatible);
        }
        Self::from_images(perm.images(), p as usize, depth)
    }

    fn from_images(images: &[u32], p: usize, depth: usize) -> Result<Automorphism, TreeError> {
        if depth == 0 {
            return Ok(Self::identity_unchecked(p, 0));
        }
        let block = images.len() / p;
        let mut root = Vec::with_capacity(p);
        let mut children = Vec::with_capacity(p);
        for chunk in images.chunks(block) {
            let target = chunk[0] as usize / block;
            let base = (target * block) as u32;
            let mut local = Vec::with_capacity(block);
            for &y in chunk {
                if y as usize / block != target {
                    return Err(TreeError::NotTreeCompatible);
                }
                local.push(y - base);
            }
            root.push(target as u8);
            children.push(Self::from_images(&local, p, depth - 1)?);
        }
        Self::from_parts(root, children).map_err(|_| TreeError::NotTreeCompatible)
    }

    /// Order of the element (a power of `p` for portraits with cyclic labels).
    pub fn order(&self) -> u64 {
        let id = Self::identity_unchecked(self.arity(), self.depth());
        let mut x = self.clone();
        let mut n = 1;
        while x != id {
            x = x.then(self);
            n += 1;
        }
        n
    }
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.node, &other.node) {
            return true;
        }
        let (a, b) = (&self.node, &other.node);
        a.depth == b.depth
            && a.trivial == b.trivial
            && a.root == b.root
            && a.children.iter().zip(b.children.iter()).all(|(x, y)| x == y)
    }
}

impl Eq for Automorphism {}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        match self.root_rotation() {
            Some(k) => write!(f, "a^{k}")?,
            None => write!(f, "{:?}", self.node.root)?,
        }
        f.debug_list().entries(self.node.children.iter()).finish()
    }
}

/// Image of each level-`m` vertex under a permutation of the level-`depth`
/// vertices that preserves the tree structure.
pub fn restrict_permutation(perm: &Permutation, p: u32, depth: usize, m: usize) -> Result<Permutation, TreeError> {
    if m > depth || perm.degree() != pow(p as usize, depth) {
        return Err(TreeError::VertexTooDeep { level: m, depth });
    }
    let block = pow(p as usize, depth - m);
    let images = (0..pow(p as usize, m))
        .map(|v| (perm.apply(v * block) / block) as u32)
        .collect();
    Permutation::from_images(images).map_err(|_| TreeError::NotTreeCompatible)
}

/// The permutation that `perm` induces from the subtree at `v` onto the
/// subtree at its image, in local leaf coordinates.
pub fn section_permutation(perm: &Permutation, p: u32, depth: usize, v: &Vertex) -> Result<Permutation, TreeError> {
    if v.level() > depth {
        return Err(TreeError::VertexTooDeep { level: v.level(), depth });
    }
    let block = pow(p as usize, depth - v.level());
    let start = v.index(p) * block;
    let target = perm.apply(start) / block;
    let base = target * block;
    let mut images = Vec::with_capacity(block);
    for x in start..start + block {
        let y = perm.apply(x);
        if y / block != target {
            return Err(TreeError::NotTreeCompatible);
        }
        images.push((y - base) as u32);
    }
    Ok(Permutation::from_images_unchecked(images))
}

/// Permutation of the level-`depth` leaves acting as `h` on the block below
/// `v` and fixing every other leaf.
pub fn embed_permutation(h: &Permutation, p: u32, depth: usize, v: &Vertex) -> Result<Permutation, TreeError> {
    if v.level() > depth || h.degree() != pow(p as usize, depth - v.level()) {
        return Err(TreeError::DepthMismatch {
            left: h.degree(),
            right: pow(p as usize, depth.saturating_sub(v.level())),
        });
    }
    let block = h.degree();
    let start = v.index(p) * block;
    let mut images: Vec<u32> = (0..pow(p as usize, depth) as u32).collect();
    for (i, &y) in h.images().iter().enumerate() {
        images[start + i] = (start as u32) + y;
    }
    Ok(Permutation::from_images_unchecked(images))
}
