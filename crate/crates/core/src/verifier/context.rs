use std::sync::OnceLock;

use crate::ggs::{GgsError, GroupSession};
use crate::perm::Permutation;
use crate::perm_group::GroupHandle;
use crate::tree_autom::{embed_permutation, Vertex};

/// Subgroups of one quotient `G_n`, each computed on first use.
#[derive(Default)]
struct Level {
    group: OnceLock<GroupHandle>,
    derived: OnceLock<GroupHandle>,
    gamma3: OnceLock<GroupHandle>,
    derived2: OnceLock<GroupHandle>,
    stab1_derived: OnceLock<GroupHandle>,
}

/// A built session plus lazily computed subgroups of `G_n` for `n ≤ N`,
/// shared between checks.
pub struct Context<'s> {
    pub session: &'s GroupSession,
    levels: Vec<Level>,
}

impl<'s> Context<'s> {
    pub fn new(session: &'s GroupSession) -> Self {
        Context {
            session,
            levels: (0..=session.depth).map(|_| Level::default()).collect(),
        }
    }

    pub fn p(&self) -> u32 {
        self.session.spec.p()
    }

    pub fn r(&self) -> usize {
        self.session.spec.r()
    }

    pub fn depth(&self) -> usize {
        self.session.depth
    }

    /// `G_n`.
    pub fn group(&self, n: usize) -> Result<&GroupHandle, GgsError> {
        let level = &self.levels[n];
        if let Some(g) = level.group.get() {
            return Ok(g);
        }
        let g = if n == self.depth() {
            self.session.group.clone()
        } else {
            self.session.group.level_image(n)?
        };
        Ok(level.group.get_or_init(|| g))
    }

    /// `G_n'`.
    pub fn derived(&self, n: usize) -> Result<&GroupHandle, GgsError> {
        let g = self.group(n)?;
        Ok(self.levels[n].derived.get_or_init(|| g.derived()))
    }

    /// `γ₃(G_n) = [G_n', G_n]`.
    pub fn gamma3(&self, n: usize) -> Result<&GroupHandle, GgsError> {
        if let Some(g) = self.levels[n].gamma3.get() {
            return Ok(g);
        }
        let g = self.group(n)?;
        let gamma3 = GroupHandle::commutator_subgroup(self.derived(n)?, g, g)?;
        Ok(self.levels[n].gamma3.get_or_init(|| gamma3))
    }

    /// `G_n''`.
    pub fn derived2(&self, n: usize) -> Result<&GroupHandle, GgsError> {
        let d = self.derived(n)?;
        Ok(self.levels[n].derived2.get_or_init(|| d.derived()))
    }

    /// `st_{G_n}(m)`.
    pub fn stabilizer(&self, n: usize, m: usize) -> Result<GroupHandle, GgsError> {
        Ok(self.group(n)?.level_stabilizer(m)?)
    }

    /// `st_{G_n}(1)'`.
    pub fn stab1_derived(&self, n: usize) -> Result<&GroupHandle, GgsError> {
        if let Some(g) = self.levels[n].stab1_derived.get() {
            return Ok(g);
        }
        let d = self.stabilizer(n, 1)?.derived();
        Ok(self.levels[n].stab1_derived.get_or_init(|| d))
    }

    /// The product of copies of `h ≤ G_{N-level}`, one below each vertex of
    /// the given level, acting block-diagonally on the leaves of `G_N`.
    pub fn block_product(&self, h: &GroupHandle, level: usize) -> Result<GroupHandle, GgsError> {
        let (p, n) = (self.p(), self.depth());
        let mut gens = Vec::new();
        for index in 0..(p as usize).pow(level as u32) {
            let v = Vertex::from_index(p, level, index)?;
            for g in h.generators() {
                gens.push(embed_permutation(g, p, n, &v)?);
            }
        }
        Ok(GroupHandle::generate((p as usize).pow(n as u32), &gens)?)
    }

    /// Level-`n` image of a leaf permutation of `G_N`.
    pub fn project(&self, x: &Permutation, n: usize) -> Result<Permutation, GgsError> {
        Ok(crate::tree_autom::restrict_permutation(x, self.p(), self.depth(), n)?)
    }
}
