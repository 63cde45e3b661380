//! Elements of the iterated wreath product `C_p ≀ … ≀ C_p` (depth `N`) stored
//! as per-vertex rotation labels, and echelon bases of their subgroups.
//!
//! Every vertex `v` of the first `N` levels carries a label `x(v) ∈ Z/p`: the
//! element rotates the children of `v` by `x(v)` before moving on. With the
//! left-to-right product, `(xy)(v) = x(v) + y(x·v)`.
//!
//! Ordering the vertices so that every prefix is closed under taking parents
//! gives a composition series with factors of order `p`: the elements whose
//! labels vanish on a prefix form a subgroup, and the label at the next vertex
//! is additive on it. A subgroup is then described by an echelon basis (an
//! induced polycyclic sequence) with at most one element per vertex, the
//! element in slot `v` having label 1 at `v` and zero labels before it.

use std::sync::Arc;

use crate::arith::mod_inv;
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct TreeElt {
    labels: Box<[u8]>,
}

/// Geometry of the depth-`N` tree: level offsets in breadth-first layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TreeShape {
    pub p: usize,
    pub depth: usize,
    offsets: Vec<usize>,
}

impl TreeShape {
    pub fn new(p: usize, depth: usize) -> Self {
        let mut offsets = Vec::with_capacity(depth + 1);
        let mut acc = 0;
        let mut width = 1;
        for _ in 0..=depth {
            offsets.push(acc);
            acc += width;
            width *= p;
        }
        TreeShape { p, depth, offsets }
    }

    /// Number of labelled (non-leaf) vertices.
    pub fn vertex_count(&self) -> usize {
        self.offsets[self.depth]
    }

    pub fn level_offset(&self, level: usize) -> usize {
        self.offsets[level]
    }

    pub fn leaf_count(&self) -> usize {
        self.p.pow(self.depth as u32)
    }

    pub fn identity(&self) -> TreeElt {
        TreeElt {
            labels: vec![0; self.vertex_count()].into_boxed_slice(),
        }
    }

    #[cfg(test)]
    pub fn is_identity(&self, x: &TreeElt) -> bool {
        x.labels.iter().all(|&l| l == 0)
    }

    pub fn mul(&self, x: &TreeElt, y: &TreeElt) -> TreeElt {
        let p = self.p;
        let mut out = vec![0u8; self.vertex_count()];
        let mut images = vec![0usize];
        let mut next = Vec::new();
        for level in 0..self.depth {
            let off = self.offsets[level];
            let last = level + 1 == self.depth;
            if !last {
                next.clear();
                next.resize(images.len() * p, 0);
            }
            for (j, &img) in images.iter().enumerate() {
                let lx = x.labels[off + j] as usize;
                out[off + j] = ((lx + y.labels[off + img] as usize) % p) as u8;
                if !last {
                    for c in 0..p {
                        next[j * p + c] = img * p + (c + lx) % p;
                    }
                }
            }
            if !last {
                std::mem::swap(&mut images, &mut next);
            }
        }
        TreeElt {
            labels: out.into_boxed_slice(),
        }
    }

    pub fn inv(&self, x: &TreeElt) -> TreeElt {
        let p = self.p;
        let mut out = vec![0u8; self.vertex_count()];
        let mut images = vec![0usize];
        let mut next = Vec::new();
        for level in 0..self.depth {
            let off = self.offsets[level];
            next.clear();
            next.resize(images.len() * p, 0);
            for (j, &img) in images.iter().enumerate() {
                let lx = x.labels[off + j] as usize;
                out[off + img] = ((p - lx) % p) as u8;
                for c in 0..p {
                    next[j * p + c] = img * p + (c + lx) % p;
                }
            }
            std::mem::swap(&mut images, &mut next);
        }
        TreeElt {
            labels: out.into_boxed_slice(),
        }
    }

    pub fn pow(&self, x: &TreeElt, exp: usize) -> TreeElt {
        let mut acc = self.identity();
        let mut sq = x.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }

    /// `g⁻¹ x g`.
    pub fn conj(&self, x: &TreeElt, g: &TreeElt) -> TreeElt {
        self.mul(&self.mul(&self.inv(g), x), g)
    }

    /// `x⁻¹ y⁻¹ x y`.
    pub fn comm(&self, x: &TreeElt, y: &TreeElt) -> TreeElt {
        let xy = self.mul(x, y);
        let yx = self.mul(y, x);
        self.mul(&self.inv(&yx), &xy)
    }

    /// Leaf images of `x`.
    pub fn to_permutation(&self, x: &TreeElt) -> Permutation {
        let p = self.p;
        let mut images = vec![0usize];
        for level in 0..self.depth {
            let off = self.offsets[level];
            let mut next = vec![0usize; images.len() * p];
            for (j, &img) in images.iter().enumerate() {
                let lx = x.labels[off + j] as usize;
                for c in 0..p {
                    next[j * p + c] = img * p + (c + lx) % p;
                }
            }
            images = next;
        }
        Permutation::from_images_unchecked(images.into_iter().map(|i| i as u32).collect())
    }

    /// Labels of a leaf permutation, if it lies in the iterated wreath product.
    pub fn element_of(&self, perm: &Permutation) -> Option<TreeElt> {
        let p = self.p;
        if perm.degree() != self.leaf_count() {
            return None;
        }
        let mut labels = vec![0u8; self.vertex_count()];
        for level in 0..self.depth {
            let off = self.offsets[level];
            let block = p.pow((self.depth - level) as u32);
            let child_block = block / p;
            for j in 0..p.pow(level as u32) {
                let img = perm.apply(j * block) / block;
                let label = (perm.apply(j * block) / child_block) % p;
                for c in 0..p {
                    let ic = perm.apply((j * p + c) * child_block) / child_block;
                    if ic / p != img || ic % p != (c + label) % p {
                        return None;
                    }
                }
                labels[off + j] = label as u8;
            }
        }
        let elt = TreeElt {
            labels: labels.into_boxed_slice(),
        };
        // Leaf images are only sampled at block starts above; confirm exactly.
        (self.to_permutation(&elt) == *perm).then_some(elt)
    }

    /// Internal vertices in breadth-first order (the storage order).
    pub fn bfs_order(&self) -> Arc<[u32]> {
        (0..self.vertex_count() as u32).collect()
    }

    /// Internal vertices in depth-first preorder. Every prefix is closed under
    /// parents, and the vertices whose leftmost leaf is a given leaf form one
    /// contiguous run.
    pub fn dfs_order(&self) -> Arc<[u32]> {
        let mut out = Vec::with_capacity(self.vertex_count());
        self.dfs_visit(0, 0, &mut out);
        out.into()
    }

    fn dfs_visit(&self, level: usize, index: usize, out: &mut Vec<u32>) {
        out.push((self.offsets[level] + index) as u32);
        if level + 1 < self.depth {
            for c in 0..self.p {
                self.dfs_visit(level + 1, index * self.p + c, out);
            }
        }
    }

    /// `(level, index)` of the vertex stored at `v`.
    pub fn locate(&self, v: usize) -> (usize, usize) {
        let level = self.offsets.partition_point(|&o| o <= v) - 1;
        (level, v - self.offsets[level])
    }

    /// The leftmost leaf below the vertex stored at `v`.
    pub fn first_leaf(&self, v: usize) -> usize {
        let (level, index) = self.locate(v);
        index * self.p.pow((self.depth - level) as u32)
    }
}

#[derive(Debug, Clone)]
struct Slot {
    /// `h, h², …, h^{p-1}`.
    powers: Vec<TreeElt>,
}

/// Echelon basis of a subgroup of the iterated wreath product with respect to
/// a parent-closed vertex order.
#[derive(Debug, Clone)]
pub(crate) struct PcBasis {
    shape: Arc<TreeShape>,
    order: Arc<[u32]>,
    slots: Vec<Option<Slot>>,
    len: usize,
}

impl PcBasis {
    pub fn new(shape: Arc<TreeShape>, order: Arc<[u32]>) -> Self {
        let n = order.len();
        PcBasis {
            shape,
            order,
            slots: vec![None; n],
            len: 0,
        }
    }

    /// `log_p` of the subgroup order.
    pub fn len(&self) -> usize {
        self.len
    }

    fn lead(&self, x: &TreeElt, from: usize) -> Option<(usize, u8)> {
        (from..self.order.len()).find_map(|pos| {
            let l = x.labels[self.order[pos] as usize];
            (l != 0).then_some((pos, l))
        })
    }

    /// Reduces `x` against the basis. Returns `None` when `x` is a member,
    /// otherwise the residue and its leading position.
    pub fn sift(&self, x: &TreeElt) -> Option<(TreeElt, usize)> {
        let p = self.shape.p;
        let mut x = x.clone();
        let mut from = 0;
        while let Some((pos, label)) = self.lead(&x, from) {
            match &self.slots[pos] {
                Some(slot) => {
                    x = self.shape.mul(&x, &slot.powers[p - label as usize - 1]);
                    from = pos + 1;
                }
                None => return Some((x, pos)),
            }
        }
        None
    }

    pub fn contains(&self, x: &TreeElt) -> bool {
        self.sift(x).is_none()
    }

    /// Adds `x` and closes the basis under products. Returns whether the
    /// subgroup grew.
    pub fn add(&mut self, x: &TreeElt) -> bool {
        let Some((first, _)) = self.sift(x) else {
            return false;
        };
        let shape = Arc::clone(&self.shape);
        let p = shape.p;
        let mut pending = vec![first];
        while let Some(y) = pending.pop() {
            let Some((y, pos)) = self.sift(&y) else {
                continue;
            };
            let label = y.labels[self.order[pos] as usize] as u64;
            let y = shape.pow(&y, mod_inv(label, p as u64) as usize);
            let mut powers = Vec::with_capacity(p - 1);
            powers.push(y.clone());
            for k in 1..p - 1 {
                let next = shape.mul(&powers[k - 1], &y);
                powers.push(next);
            }
            // The closure conditions: p-th power and commutators with every
            // basis element must reduce to the identity.
            pending.push(shape.mul(&powers[p - 2], &y));
            for h in self.elements() {
                pending.push(shape.comm(&y, h));
            }
            self.slots[pos] = Some(Slot { powers });
            self.len += 1;
        }
        true
    }

    /// Basis elements in series order.
    pub fn elements(&self) -> impl Iterator<Item = &TreeElt> + '_ {
        self.slots.iter().flatten().map(|s| &s.powers[0])
    }

    /// Basis elements with their series positions.
    pub fn positioned(&self) -> impl Iterator<Item = (usize, &TreeElt)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|s| (i, &s.powers[0])))
    }

    /// The basis of the subgroup of elements whose labels vanish at every
    /// position before `start`.
    pub fn tail(&self, start: usize) -> PcBasis {
        let mut slots = self.slots.clone();
        for s in slots.iter_mut().take(start) {
            *s = None;
        }
        let len = slots.iter().filter(|s| s.is_some()).count();
        PcBasis {
            shape: Arc::clone(&self.shape),
            order: Arc::clone(&self.order),
            slots,
            len,
        }
    }

    pub fn order(&self) -> &Arc<[u32]> {
        &self.order
    }
}
