//! Defining data of multi-GGS groups: validation, row normalization and
//! construction of the level-`N` quotient.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime, mod_inv};
use crate::perm::Permutation;
use crate::perm_group::{GroupError, GroupHandle};
use crate::tree_autom::{restrict_permutation, Automorphism, TreeError};

/// Largest leaf count `p^N` built without an explicit override.
pub const DEFAULT_LEAF_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GgsError {
    #[error("p = {0} is not prime")]
    NotPrime(u32),
    #[error("p = {0} is not odd")]
    NotOdd(u32),
    #[error("p = {0} is too large (labels are stored as bytes)")]
    PrimeTooLarge(u32),
    #[error("at least one defining vector is required")]
    NoVectors,
    #[error("{r} vectors cannot be independent in F_{p}^{}", p - 1)]
    TooManyVectors { r: usize, p: u32 },
    #[error("vector {row} has length {found}, expected {expected}")]
    BadLength { row: usize, expected: usize, found: usize },
    #[error("entry {value} of vector {row} is not reduced modulo {p}")]
    EntryOutOfRange { row: usize, value: u32, p: u32 },
    #[error("defining vectors are linearly dependent: coefficients {certificate:?} give zero")]
    DependentVectors { certificate: Vec<u32> },
    #[error("normalization failed: {step}")]
    NormalizationImpossible { step: String },
    #[error("index {index} out of range for {r} directed generators")]
    GeneratorIndex { index: usize, r: usize },
    #[error("depth {0} is too small (need at least 2)")]
    DepthTooSmall(usize),
    #[error("p^depth = {leaves} exceeds the cap of {cap} leaves")]
    DepthCapExceeded { leaves: u64, cap: u64 },
    #[error("restriction of generator {generator} to level {level} disagrees with its direct image")]
    DiagramMismatch { generator: usize, level: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A prime `p` and `r` linearly independent vectors of `F_p^{p-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GgsSpec {
    p: u32,
    vectors: Vec<Vec<u32>>,
}

/// Returns coefficients `c`, not all zero, with `Σ c_i v_i = 0`, or `None`
/// if the rows are independent.
pub fn dependency(p: u32, rows: &[Vec<u32>]) -> Option<Vec<u32>> {
    let p64 = p as u64;
    let r = rows.len();
    // (pivot column, reduced row, combination of original rows)
    let mut pivots: Vec<(usize, Vec<u64>, Vec<u64>)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut cur: Vec<u64> = row.iter().map(|&x| x as u64 % p64).collect();
        let mut combo = vec![0u64; r];
        combo[i] = 1;
        for (col, prow, pcombo) in &pivots {
            if cur[*col] != 0 {
                let f = cur[*col] * mod_inv(prow[*col], p64) % p64;
                for (c, x) in cur.iter_mut().zip(prow) {
                    *c = (*c + p64 - f * x % p64) % p64;
                }
                for (c, x) in combo.iter_mut().zip(pcombo) {
                    *c = (*c + p64 - f * x % p64) % p64;
                }
            }
        }
        match cur.iter().position(|&x| x != 0) {
            Some(col) => pivots.push((col, cur, combo)),
            None => return Some(combo.into_iter().map(|x| x as u32).collect()),
        }
    }
    None
}

/// `e_j = e_{p-j}` for all `j`.
pub fn is_symmetric(vector: &[u32]) -> bool {
    vector.iter().eq(vector.iter().rev())
}

/// Which argument shows that `st_G(1)'` is a full product of copies of `G'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchCase {
    /// `b_1` has a non-symmetric vector with `e_{1,1} = 1` and last entry `m`.
    NonSymmetric { m: u32 },
    /// All vectors symmetric and `r ≥ 2`; `e_2` starts `(0, …)` and
    /// `e_{1,column} = 0` where `column` (1-based) is the first nonzero entry
    /// of `e_2`.
    Symmetric { column: usize },
    /// A single symmetric vector (this includes the constant vector).
    SingleSymmetric,
}

/// Result of [`GgsSpec::normalize`]: `spec.vectors = transform · original`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub spec: GgsSpec,
    pub transform: Vec<Vec<u32>>,
    pub case: BranchCase,
}

/// Row operations over F_p applied simultaneously to the vectors and to a
/// transformation matrix.
struct RowOps {
    p: u64,
    rows: Vec<Vec<u64>>,
    transform: Vec<Vec<u64>>,
}

impl RowOps {
    fn scale(&mut self, i: usize, k: u64) {
        let p = self.p;
        for x in self.rows[i].iter_mut().chain(self.transform[i].iter_mut()) {
            *x = *x * k % p;
        }
    }

    /// `row_i += k · row_j`.
    fn add_multiple(&mut self, i: usize, j: usize, k: u64) {
        let p = self.p;
        let (src_row, src_t) = (self.rows[j].clone(), self.transform[j].clone());
        for (x, y) in self.rows[i].iter_mut().zip(src_row) {
            *x = (*x + k * y) % p;
        }
        for (x, y) in self.transform[i].iter_mut().zip(src_t) {
            *x = (*x + k * y) % p;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.rows.swap(i, j);
        self.transform.swap(i, j);
    }
}

impl GgsSpec {
    /// Checks `p` and the vectors, including linear independence.
    pub fn validate(p: u32, vectors: Vec<Vec<u32>>) -> Result<Self, GgsError> {
        if p == 2 {
            return Err(GgsError::NotOdd(p));
        }
        if !is_prime(p as u64) {
            return Err(GgsError::NotPrime(p));
        }
        if p > 255 {
            return Err(GgsError::PrimeTooLarge(p));
        }
        if vectors.is_empty() {
            return Err(GgsError::NoVectors);
        }
        for (row, v) in vectors.iter().enumerate() {
            if v.len() != p as usize - 1 {
                return Err(GgsError::BadLength {
                    row,
                    expected: p as usize - 1,
                    found: v.len(),
                });
            }
            if let Some(&value) = v.iter().find(|&&x| x >= p) {
                return Err(GgsError::EntryOutOfRange { row, value, p });
            }
        }
        if vectors.len() > p as usize - 1 {
            return Err(GgsError::TooManyVectors { r: vectors.len(), p });
        }
        if let Some(certificate) = dependency(p, &vectors) {
            return Err(GgsError::DependentVectors { certificate });
        }
        Ok(GgsSpec { p, vectors })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of directed generators.
    pub fn r(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<u32>] {
        &self.vectors
    }

    /// The single-generator group with a constant defining vector.
    pub fn is_constant(&self) -> bool {
        self.r() == 1 && self.vectors[0].iter().all(|&x| x == self.vectors[0][0])
    }

    pub fn all_symmetric(&self) -> bool {
        self.vectors.iter().all(|v| is_symmetric(v))
    }

    /// Rewrites the vectors by invertible row operations (each of which
    /// replaces a directed generator by a product of powers of the others and
    /// so leaves the group unchanged) into the form used by the branching
    /// argument: every first entry equal to 1, and then either a non-symmetric
    /// first vector (preferably with last entry `m ≠ 1`), or, when all vectors
    /// are symmetric and `r ≥ 2`, `e_i = (0, *, …, *, 0)` for `i ≥ 2` and a
    /// zero in `e_1` at the first nonzero position of `e_2`.
    pub fn normalize(&self) -> Result<Normalized, GgsError> {
        let p = self.p as u64;
        let r = self.r();
        let mut ops = RowOps {
            p,
            rows: self.vectors.iter().map(|v| v.iter().map(|&x| x as u64).collect()).collect(),
            transform: (0..r).map(|i| (0..r).map(|j| (i == j) as u64).collect()).collect(),
        };

        let pivot = ops
            .rows
            .iter()
            .position(|v| v[0] != 0)
            .ok_or_else(|| GgsError::NormalizationImpossible {
                step: "no defining vector has a nonzero first entry, so e_{i,1} = 1 cannot be reached".into(),
            })?;
        let inv = mod_inv(ops.rows[pivot][0], p);
        ops.scale(pivot, inv);
        for i in 0..r {
            if i == pivot {
                continue;
            }
            if ops.rows[i][0] == 0 {
                ops.add_multiple(i, pivot, 1);
            } else {
                let inv = mod_inv(ops.rows[i][0], p);
                ops.scale(i, inv);
            }
        }

        let sym = |v: &Vec<u64>| v.iter().eq(v.iter().rev());
        let non_symmetric: Vec<usize> = (0..r).filter(|&i| !sym(&ops.rows[i])).collect();
        let case = if !non_symmetric.is_empty() {
            let first = non_symmetric
                .iter()
                .copied()
                .find(|&i| ops.rows[i][p as usize - 2] != 1)
                .unwrap_or(non_symmetric[0]);
            ops.swap(0, first);
            BranchCase::NonSymmetric {
                m: ops.rows[0][p as usize - 2] as u32,
            }
        } else if r >= 2 {
            for i in 1..r {
                ops.add_multiple(i, 0, p - 1);
            }
            let column = ops.rows[1]
                .iter()
                .position(|&x| x != 0)
                .ok_or_else(|| GgsError::NormalizationImpossible {
                    step: "e_2 - e_1 vanished".into(),
                })?;
            let k = (p - ops.rows[0][column]) * mod_inv(ops.rows[1][column], p) % p;
            ops.add_multiple(0, 1, k);
            BranchCase::Symmetric { column: column + 1 }
        } else {
            BranchCase::SingleSymmetric
        };

        let to_u32 = |m: Vec<Vec<u64>>| -> Vec<Vec<u32>> {
            m.into_iter()
                .map(|v| v.into_iter().map(|x| x as u32).collect())
                .collect()
        };
        Ok(Normalized {
            spec: GgsSpec {
                p: self.p,
                vectors: to_u32(ops.rows),
            },
            transform: to_u32(ops.transform),
            case,
        })
    }

    /// The rooted generator `a` at the given depth.
    pub fn rooted(&self, depth: usize) -> Result<Automorphism, GgsError> {
        Ok(Automorphism::rooted(self.p, depth, 1)?)
    }

    /// The directed generator with 0-based index `index` (`b_{index+1}`).
    pub fn directed(&self, index: usize, depth: usize) -> Result<Automorphism, GgsError> {
        let v = self.vectors.get(index).ok_or(GgsError::GeneratorIndex {
            index,
            r: self.r(),
        })?;
        Ok(Automorphism::directed(self.p, v, depth)?)
    }

    /// Builds `G_N` on the `p^depth` leaves.
    pub fn build(&self, depth: usize, options: &BuildOptions) -> Result<GroupSession, GgsError> {
        if depth < 2 {
            return Err(GgsError::DepthTooSmall(depth));
        }
        let leaves = (self.p as u64).checked_pow(depth as u32).unwrap_or(u64::MAX);
        if leaves > DEFAULT_LEAF_CAP && !options.allow_large {
            return Err(GgsError::DepthCapExceeded {
                leaves,
                cap: DEFAULT_LEAF_CAP,
            });
        }
        let a = self.rooted(depth)?;
        let b = (0..self.r())
            .map(|i| self.directed(i, depth))
            .collect::<Result<Vec<_>, _>>()?;
        let mut images = vec![a.to_permutation(depth)?];
        for bi in &b {
            images.push(bi.to_permutation(depth)?);
        }
        // Truncating at level N and then restricting to level m must agree
        // with truncating at level m directly.
        let all: Vec<&Automorphism> = std::iter::once(&a).chain(b.iter()).collect();
        for (generator, (g, image)) in all.iter().zip(&images).enumerate() {
            for level in 0..depth {
                if restrict_permutation(image, self.p, depth, level)? != g.to_permutation(level)? {
                    return Err(GgsError::DiagramMismatch { generator, level });
                }
            }
        }
        let group = GroupHandle::generate(images[0].degree(), &images)?;
        Ok(GroupSession {
            spec: self.clone(),
            depth,
            a,
            b,
            images,
            group,
        })
    }
}

impl fmt::Display for GgsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} vectors=", self.p)?;
        for (i, v) in self.vectors.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", s.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Build even when `p^depth` exceeds [`DEFAULT_LEAF_CAP`].
    pub allow_large: bool,
}

/// Generators of a multi-GGS group at depth `N` and the group `G_N` they
/// generate on the leaves.
#[derive(Debug, Clone)]
pub struct GroupSession {
    pub spec: GgsSpec,
    pub depth: usize,
    pub a: Automorphism,
    pub b: Vec<Automorphism>,
    /// Leaf permutations of `a, b_1, …, b_r`.
    pub images: Vec<Permutation>,
    pub group: GroupHandle,
}

impl GroupSession {
    /// `G_n` for `n ≤ N`, generated by the level-`n` images of the generators.
    pub fn quotient(&self, n: usize) -> Result<GroupHandle, GgsError> {
        let gens = std::iter::once(&self.a)
            .chain(self.b.iter())
            .map(|g| g.to_permutation(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupHandle::generate((self.spec.p as usize).pow(n as u32), &gens)?)
    }

    /// One line per fact, stable across runs.
    pub fn summary(&self) -> String {
        let chain = self.group.chain();
        format!(
            "spec {}\ndepth {}\norder_exponent {}\nbase {:?}\norbits {:?}\n",
            self.spec,
            self.depth,
            self.group.order_exponent(),
            chain.base(),
            chain.orbit_lengths()
        )
    }
}
