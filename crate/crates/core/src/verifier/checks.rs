//! One function per claim. Each returns a verdict at level `N`; errors are
//! reserved for internal failures, never for a claim not holding.

use crate::arith::mod_pow;
use crate::ggs::{BranchCase, GgsError, Normalized};
use crate::perm_group::GroupHandle;
use crate::tree_autom::{section_permutation, Automorphism, Vertex};

use super::{ClaimId, Context, Status, Verdict, Witness};

const NOT_CONSTANT: &str = "hypothesis G != constant-vector group excludes this spec";

/// Fails `v` with an element of `sub` outside `sup`, if there is one.
fn require_subgroup(
    v: &mut Verdict,
    sub: &GroupHandle,
    sub_name: &str,
    sup: &GroupHandle,
    sup_name: &str,
) -> Result<(), GgsError> {
    if let Some(x) = sub.first_generator_outside(sup)? {
        v.fail(Witness::Element {
            member_of: sub_name.into(),
            missing_from: sup_name.into(),
            permutation: x,
        });
    }
    Ok(())
}

fn require_equal(
    v: &mut Verdict,
    left: &GroupHandle,
    left_name: &str,
    right: &GroupHandle,
    right_name: &str,
) -> Result<(), GgsError> {
    v.detail(&format!("{left_name}_exponent"), left.order_exponent());
    v.detail(&format!("{right_name}_exponent"), right.order_exponent());
    require_subgroup(v, left, left_name, right, right_name)?;
    require_subgroup(v, right, right_name, left, left_name)
}

fn needs_depth(ctx: &Context<'_>, claim: ClaimId, min: usize) -> Option<Verdict> {
    (ctx.depth() < min).then(|| {
        Verdict::vacuous(
            claim,
            ctx.depth(),
            format!("needs depth at least {min}, have {}", ctx.depth()),
        )
    })
}

pub fn abelianization(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let (n, r) = (ctx.depth(), ctx.r());
    let mut v = Verdict::new(ClaimId::Abelianization, n);
    let g = ctx.group(n)?;
    let d = ctx.derived(n)?;
    let phi = g.frattini();
    let index = g.order_exponent() - d.order_exponent();
    v.detail("order_exponent", g.order_exponent());
    v.detail("derived_exponent", d.order_exponent());
    v.detail("frattini_exponent", phi.order_exponent());
    v.detail("index_exponent", index);
    // Every generator has order p, so the abelianization is elementary
    // abelian at every level.
    require_subgroup(&mut v, &phi, "frattini", d, "derived")?;
    if v.status == Status::Fails {
        return Ok(v);
    }
    // G_n can need fewer than r+1 generators below level r+1.
    if n < r + 1 {
        v.status = Status::Vacuous;
        v.reason = Some(format!(
            "index p^(r+1) is only forced from depth {} on; observed p^{index}",
            r + 1
        ));
        return Ok(v);
    }
    if index != r + 1 {
        v.fail(Witness::Count {
            quantity: "log_p |G_N : G_N'|".into(),
            expected: (r + 1) as i64,
            found: index as i64,
        });
    }
    Ok(v)
}

pub fn gamma3_product(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let n = ctx.depth();
    if ctx.session.spec.is_constant() {
        return Ok(Verdict::skipped(ClaimId::Gamma3Product, n, NOT_CONSTANT));
    }
    if let Some(v) = needs_depth(ctx, ClaimId::Gamma3Product, 3) {
        return Ok(v);
    }
    let mut v = Verdict::new(ClaimId::Gamma3Product, n);
    let st1 = ctx.stabilizer(n, 1)?;
    let st1_derived = ctx.stab1_derived(n)?;
    let lhs = GroupHandle::commutator_subgroup(st1_derived, &st1, &st1)?;
    let rhs = ctx.block_product(ctx.gamma3(n - 1)?, 1)?;
    require_equal(&mut v, &lhs, "gamma3_st1", &rhs, "gamma3_product")?;
    Ok(v)
}

/// `∏_{k=0}^{p-1} [b^{a^{-k}}, b^{a^{1-k}}]^{m^k}`.
pub(crate) fn twisted_commutator_product(a: &Automorphism, b: &Automorphism, m: u32) -> Automorphism {
    let p = a.arity() as u64;
    let conj = |k: i64| b.conjugate_by(&a.pow(k));
    let mut acc = Automorphism::identity(p as u32, a.depth()).expect("valid prime");
    for k in 0..p as i64 {
        let factor = conj(-k).commutator(&conj(1 - k));
        acc = acc.then(&factor.pow(mod_pow(m as u64, k as u64, p) as i64));
    }
    acc
}

pub fn key_congruence(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let n = ctx.depth();
    let claim = ClaimId::KeyCongruence;
    let spec = &ctx.session.spec;
    if spec.is_constant() {
        return Ok(Verdict::skipped(claim, n, NOT_CONSTANT));
    }
    let normalized = match spec.normalize() {
        Ok(x) => x,
        Err(e) => return Ok(Verdict::skipped(claim, n, format!("normalization unavailable: {e}"))),
    };
    let m = match normalized.case {
        BranchCase::NonSymmetric { m } if m != 1 => m,
        BranchCase::NonSymmetric { .. } => {
            return Ok(Verdict::skipped(claim, n, "needs a non-symmetric vector with last entry m != 1"))
        }
        _ => return Ok(Verdict::skipped(claim, n, "all defining vectors are symmetric")),
    };
    if let Some(v) = needs_depth(ctx, claim, 3) {
        return Ok(v);
    }
    let mut v = Verdict::new(claim, n);
    v.detail("m", m);
    let p = ctx.p();
    let a = normalized.spec.rooted(n)?;
    let b1 = normalized.spec.directed(0, n)?;
    let lhs = twisted_commutator_product(&a, &b1, m);
    let short_a = normalized.spec.rooted(n - 1)?;
    let short_b = normalized.spec.directed(0, n - 1)?;
    let exponent = (1 + p as i64 - m as i64) % p as i64;
    let target = short_a.commutator(&short_b).pow(exponent);
    let rhs = Automorphism::embed_at_vertex(&target, &Vertex::new(p, &[0])?, n)?;
    let quotient = lhs.then(&rhs.inverse()).to_permutation(n)?;
    let modulus = ctx.block_product(ctx.gamma3(n - 1)?, 1)?;
    v.detail("modulus_exponent", modulus.order_exponent());
    if !modulus.contains(&quotient)? {
        v.fail(Witness::Element {
            member_of: "lhs * rhs^-1".into(),
            missing_from: "gamma3_product".into(),
            permutation: quotient,
        });
    }
    // The congruence is only useful if the target is nontrivial modulo γ₃.
    let target_perm = rhs.to_permutation(n)?;
    v.detail("target_outside_modulus", !modulus.contains(&target_perm)? as i64);
    Ok(v)
}

pub fn regular_branch(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let n = ctx.depth();
    let claim = ClaimId::RegularBranch;
    let spec = &ctx.session.spec;
    if spec.is_constant() {
        return Ok(Verdict::skipped(claim, n, NOT_CONSTANT));
    }
    if let Some(v) = needs_depth(ctx, claim, 3) {
        return Ok(v);
    }
    let mut v = Verdict::new(claim, n);
    if spec.r() == 1 {
        v.notes.push(
            "extended: r = 1 non-constant; the statement comes from the GGS-group literature, \
             the multi-generator argument needs r >= 2"
                .into(),
        );
    }
    match spec.normalize() {
        Ok(normalized) => {
            v.notes.push(match normalized.case {
                BranchCase::NonSymmetric { m } => format!("non-symmetric case, m = {m}"),
                BranchCase::Symmetric { column } => format!("symmetric case, pivot column {column}"),
                BranchCase::SingleSymmetric => "single symmetric vector".into(),
            });
            let identities = section_identities(&normalized, n)?;
            v.detail("section_identities", identities.len());
            for (name, lhs, expected) in identities {
                if lhs.psi()? != expected {
                    v.fail(Witness::Identity {
                        name,
                        element: lhs.to_permutation(n)?,
                    });
                }
            }
        }
        Err(e) => v.notes.push(format!("normalization unavailable: {e}")),
    }
    let lhs = ctx.stab1_derived(n)?;
    let rhs = ctx.block_product(ctx.derived(n - 1)?, 1)?;
    require_equal(&mut v, lhs, "st1_derived", &rhs, "derived_product")?;
    Ok(v)
}

/// Exact first-level section identities for the normalized generators:
/// `ψ([b_1, b_i^a]) = ([a, b_i], 1, …, 1, [b_1, a^{e_{i,p-1}}])` in general, and
/// in the symmetric case `ψ([b_1^{a^j}, b_2])` supported on the single
/// coordinate `j - 1`, where `j` is the pivot column.
fn section_identities(normalized: &Normalized, n: usize) -> Result<Vec<(String, Automorphism, Vec<Automorphism>)>, GgsError> {
    let spec = &normalized.spec;
    let p = spec.p() as usize;
    let a = spec.rooted(n)?;
    let b1 = spec.directed(0, n)?;
    let short_a = spec.rooted(n - 1)?;
    let short_b1 = spec.directed(0, n - 1)?;
    let one = Automorphism::identity(spec.p(), n - 1)?;
    let mut out = Vec::new();
    for i in 1..spec.r() {
        let bi = spec.directed(i, n)?;
        let short_bi = spec.directed(i, n - 1)?;
        let mut expected = vec![one.clone(); p];
        expected[0] = short_a.commutator(&short_bi);
        let last = spec.vectors()[i][p - 2] as i64;
        expected[p - 1] = short_b1.commutator(&short_a.pow(last));
        out.push((format!("psi([b1, b{}^a])", i + 1), b1.commutator(&bi.conjugate_by(&a)), expected));
    }
    if let BranchCase::Symmetric { column: j } = normalized.case {
        let b2 = spec.directed(1, n)?;
        let mut expected = vec![one.clone(); p];
        expected[j - 1] = short_b1.commutator(&short_a.pow(spec.vectors()[1][j - 1] as i64));
        out.push((
            format!("psi([b1^(a^{j}), b2])"),
            b1.conjugate_by(&a.pow(j as i64)).commutator(&b2),
            expected,
        ));
    }
    Ok(out)
}

pub fn stab1_derived_in_gamma3(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let n = ctx.depth();
    let mut v = Verdict::new(ClaimId::Stab1DerivedInGamma3, n);
    let sub = ctx.stab1_derived(n)?;
    let sup = ctx.gamma3(n)?;
    v.detail("st1_derived_exponent", sub.order_exponent());
    v.detail("gamma3_exponent", sup.order_exponent());
    require_subgroup(&mut v, sub, "st1_derived", sup, "gamma3")?;
    Ok(v)
}

pub fn subdirect(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let n = ctx.depth();
    let claim = ClaimId::Subdirect;
    if ctx.session.spec.is_constant() {
        return Ok(Verdict::skipped(claim, n, NOT_CONSTANT));
    }
    if let Some(v) = needs_depth(ctx, claim, 3) {
        return Ok(v);
    }
    let mut v = Verdict::new(claim, n);
    let p = ctx.p();
    let derived = ctx.derived(n)?;
    let full = ctx.group(n - 1)?;
    v.detail("target_exponent", full.order_exponent());
    for j in 0..p {
        let vertex = Vertex::new(p, &[j])?;
        let sections = derived
            .generators()
            .iter()
            .map(|x| section_permutation(x, p, n, &vertex))
            .collect::<Result<Vec<_>, _>>()?;
        let projection = GroupHandle::generate(full.degree(), &sections)?;
        v.detail(&format!("projection_{j}_exponent"), projection.order_exponent());
        require_subgroup(&mut v, full, "G_(N-1)", &projection, &format!("projection_{j}"))?;
    }
    Ok(v)
}

pub fn psi2_second_derived(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let n = ctx.depth();
    let claim = ClaimId::Psi2SecondDerived;
    if ctx.r() < 2 {
        return Ok(Verdict::skipped(claim, n, "hypothesis r >= 2 excludes this spec"));
    }
    if let Some(v) = needs_depth(ctx, claim, 3) {
        return Ok(v);
    }
    let mut v = Verdict::new(claim, n);
    let product = ctx.block_product(ctx.derived(n - 2)?, 2)?;
    let second = ctx.derived2(n)?;
    v.detail("derived_product_exponent", product.order_exponent());
    v.detail("second_derived_exponent", second.order_exponent());
    require_subgroup(&mut v, &product, "derived_product", second, "second_derived")?;
    Ok(v)
}

pub fn rank_growth(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let (n, r) = (ctx.depth(), ctx.r());
    let mut v = Verdict::new(ClaimId::RankGrowth, n);
    let top = n.min(r + 1);
    for level in 2..=top {
        let rank = ctx.group(level)?.rank();
        v.detail(&format!("rank_{level}"), rank);
        if rank < level {
            v.fail(Witness::Count {
                quantity: format!("d(G_{level})"),
                expected: level as i64,
                found: rank as i64,
            });
        }
        if level == r + 1 && rank != r + 1 {
            v.fail(Witness::Count {
                quantity: format!("d(G_{level})"),
                expected: (r + 1) as i64,
                found: rank as i64,
            });
        }
    }
    if v.status == Status::Holds && top < r + 1 {
        v.status = Status::Vacuous;
        v.reason = Some(format!("depth {n} stops short of level r+1 = {}", r + 1));
    }
    Ok(v)
}

pub fn derived_contains_stab(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let (n, r) = (ctx.depth(), ctx.r());
    let claim = ClaimId::DerivedContainsStab;
    if n <= r + 1 {
        return Ok(Verdict::vacuous(
            claim,
            n,
            format!("st(r+1) = st({}) is trivial in G_{n}", r + 1),
        ));
    }
    let mut v = Verdict::new(claim, n);
    let st = ctx.stabilizer(n, r + 1)?;
    let derived = ctx.derived(n)?;
    v.detail("stabilizer_level", r + 1);
    v.detail("stabilizer_exponent", st.order_exponent());
    v.detail("derived_exponent", derived.order_exponent());
    require_subgroup(&mut v, &st, "stabilizer", derived, "derived")?;
    Ok(v)
}

pub fn second_derived_contains_stab(ctx: &Context<'_>) -> Result<Verdict, GgsError> {
    let (n, r) = (ctx.depth(), ctx.r());
    let claim = ClaimId::SecondDerivedContainsStab;
    if ctx.session.spec.is_constant() {
        return Ok(Verdict::skipped(claim, n, NOT_CONSTANT));
    }
    if n <= r + 3 {
        return Ok(Verdict::vacuous(
            claim,
            n,
            format!("st(r+3) = st({}) is trivial in G_{n}", r + 3),
        ));
    }
    let mut v = Verdict::new(claim, n);
    let st = ctx.stabilizer(n, r + 3)?;
    let second = ctx.derived2(n)?;
    v.detail("stabilizer_level", r + 3);
    v.detail("stabilizer_exponent", st.order_exponent());
    v.detail("second_derived_exponent", second.order_exponent());
    require_subgroup(&mut v, &st, "stabilizer", second, "second_derived")?;
    Ok(v)
}
