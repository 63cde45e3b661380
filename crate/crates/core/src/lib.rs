//! Multi-GGS groups acting on the p-regular rooted tree.
//!
//! The crate builds the rooted generator `a` and the directed generators
//! `b_1, …, b_r` of a multi-GGS group from its defining vectors, realizes the
//! finite quotients `G_N = G / st_G(N)` as permutation groups on the `p^N`
//! leaves of the truncated tree, and checks the structural properties of these
//! groups (abelianization, regular branching over `G'`, subdirectness, rank
//! growth, level stabilizers inside `G'` and `G''`) exactly at a chosen level.

pub mod arith;
pub mod ggs;
pub mod perm;
pub mod perm_group;
pub mod tree_autom;
pub mod verifier;

pub use ggs::{GgsError, GgsSpec, GroupSession};
pub use perm::Permutation;
pub use perm_group::{GroupError, GroupHandle};
pub use tree_autom::{Automorphism, TreeError, Vertex};
