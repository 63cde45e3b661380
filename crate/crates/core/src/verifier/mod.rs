//! Structural checks on the finite quotients `G_N`, each reported as a
//! [`Verdict`], and the classification of a spec by the congruence subgroup
//! property.
//!
//! Every statement about `G` is checked as its exact image in `G_N`; a holding
//! verdict is evidence at level `N`, never a proof for the infinite group.

mod checks;
mod context;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ggs::{BuildOptions, GgsError, GgsSpec};
use crate::perm::Permutation;

pub use context::Context;

/// Identifier of one structural claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    Abelianization,
    Gamma3Product,
    KeyCongruence,
    RegularBranch,
    Stab1DerivedInGamma3,
    Subdirect,
    Psi2SecondDerived,
    RankGrowth,
    DerivedContainsStab,
    SecondDerivedContainsStab,
}

impl ClaimId {
    /// All claims, in the order they are run.
    pub const ALL: [ClaimId; 10] = [
        ClaimId::Abelianization,
        ClaimId::Gamma3Product,
        ClaimId::KeyCongruence,
        ClaimId::RegularBranch,
        ClaimId::Stab1DerivedInGamma3,
        ClaimId::Subdirect,
        ClaimId::Psi2SecondDerived,
        ClaimId::RankGrowth,
        ClaimId::DerivedContainsStab,
        ClaimId::SecondDerivedContainsStab,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Abelianization => "abelianization",
            ClaimId::Gamma3Product => "gamma3_product",
            ClaimId::KeyCongruence => "key_congruence",
            ClaimId::RegularBranch => "regular_branch",
            ClaimId::Stab1DerivedInGamma3 => "stab1_derived_in_gamma3",
            ClaimId::Subdirect => "subdirect",
            ClaimId::Psi2SecondDerived => "psi2_second_derived",
            ClaimId::RankGrowth => "rank_growth",
            ClaimId::DerivedContainsStab => "derived_contains_stab",
            ClaimId::SecondDerivedContainsStab => "second_derived_contains_stab",
        }
    }

    /// The statement being checked, in words.
    pub fn statement(self) -> &'static str {
        match self {
            ClaimId::Abelianization => "G/G' is elementary abelian of order p^(r+1)",
            ClaimId::Gamma3Product => "psi(gamma3(st(1))) = gamma3(G) x ... x gamma3(G)",
            ClaimId::KeyCongruence => {
                "psi of the twisted commutator product is ([a,b1]^(1-m),1,...,1) mod gamma3(G)^p"
            }
            ClaimId::RegularBranch => "psi(st(1)') = G' x ... x G'",
            ClaimId::Stab1DerivedInGamma3 => "st(1)' <= gamma3(G)",
            ClaimId::Subdirect => "psi(G') projects onto G in every coordinate",
            ClaimId::Psi2SecondDerived => "psi2(G'') >= G' x ... x G' (p^2 factors)",
            ClaimId::RankGrowth => "d(G_n) >= n for n = 2..r+1 and d(G_(r+1)) = r+1",
            ClaimId::DerivedContainsStab => "G' >= st(r+1)",
            ClaimId::SecondDerivedContainsStab => "G'' >= st(r+3)",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| {
                let known: Vec<&str> = ClaimId::ALL.iter().map(|c| c.as_str()).collect();
                format!("unknown check `{}` (known: {})", s.trim(), known.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    /// The claim's hypothesis excludes this spec.
    Skipped,
    /// The depth is too small for the check to say anything.
    Vacuous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Skipped => "skipped",
            Status::Vacuous => "vacuous",
        })
    }
}

/// Certificate attached to a failing verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A leaf permutation lying in `member_of` but not in `missing_from`.
    Element {
        member_of: String,
        missing_from: String,
        permutation: Permutation,
    },
    /// An element whose first-level sections differ from the expected ones.
    Identity { name: String, element: Permutation },
    /// A numerical invariant with the wrong value.
    Count {
        quantity: String,
        expected: i64,
        found: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: ClaimId,
    pub level: usize,
    pub status: Status,
    /// Named exponents and ranks supporting the verdict.
    pub details: BTreeMap<String, i64>,
    pub notes: Vec<String>,
    /// Why a check was skipped or vacuous.
    pub reason: Option<String>,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub(crate) fn new(claim: ClaimId, level: usize) -> Self {
        Verdict {
            claim,
            level,
            status: Status::Holds,
            details: BTreeMap::new(),
            notes: Vec::new(),
            reason: None,
            witness: None,
        }
    }

    pub(crate) fn skipped(claim: ClaimId, level: usize, reason: impl Into<String>) -> Self {
        Verdict {
            status: Status::Skipped,
            reason: Some(reason.into()),
            ..Verdict::new(claim, level)
        }
    }

    pub(crate) fn vacuous(claim: ClaimId, level: usize, reason: impl Into<String>) -> Self {
        Verdict {
            status: Status::Vacuous,
            reason: Some(reason.into()),
            ..Verdict::new(claim, level)
        }
    }

    pub(crate) fn detail(&mut self, key: &str, value: impl TryInto<i64>) {
        let value = value.try_into().unwrap_or(i64::MAX);
        self.details.insert(key.to_string(), value);
    }

    /// Marks the verdict failing unless it already failed.
    pub(crate) fn fail(&mut self, witness: Witness) {
        if self.status != Status::Fails {
            self.status = Status::Fails;
            self.witness = Some(witness);
        }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Has the congruence subgroup property.
    HasCsp,
    /// The group defined by a constant vector, which lacks it.
    ConstantVectorException,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::HasCsp => "has the congruence subgroup property",
            Classification::ConstantVectorException => "constant vector: no congruence subgroup property",
        })
    }
}

/// Definitional: only the constant-vector group lacks the property.
pub fn classify_csp(spec: &GgsSpec) -> Classification {
    if spec.is_constant() {
        Classification::ConstantVectorException
    } else {
        Classification::HasCsp
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Restrict to these claims; `None` runs everything.
    pub checks: Option<Vec<ClaimId>>,
    pub build: BuildOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: GgsSpec,
    pub depth: usize,
    pub classification: Classification,
    pub verdicts: Vec<Verdict>,
    /// Wall time of each verdict in milliseconds, parallel to `verdicts`.
    pub timings_ms: Vec<f64>,
    pub notes: Vec<String>,
}

impl Report {
    /// No verdict failed (skipped and vacuous ones do not count).
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fails)
    }

    pub fn verdict(&self, claim: ClaimId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.claim == claim)
    }
}

/// Runs one claim against a prepared context.
pub fn run_check(ctx: &Context<'_>, claim: ClaimId) -> Result<Verdict, GgsError> {
    match claim {
        ClaimId::Abelianization => checks::abelianization(ctx),
        ClaimId::Gamma3Product => checks::gamma3_product(ctx),
        ClaimId::KeyCongruence => checks::key_congruence(ctx),
        ClaimId::RegularBranch => checks::regular_branch(ctx),
        ClaimId::Stab1DerivedInGamma3 => checks::stab1_derived_in_gamma3(ctx),
        ClaimId::Subdirect => checks::subdirect(ctx),
        ClaimId::Psi2SecondDerived => checks::psi2_second_derived(ctx),
        ClaimId::RankGrowth => checks::rank_growth(ctx),
        ClaimId::DerivedContainsStab => checks::derived_contains_stab(ctx),
        ClaimId::SecondDerivedContainsStab => checks::second_derived_contains_stab(ctx),
    }
}

/// Builds `G_depth` once and runs the selected checks on it.
pub fn run_all(spec: &GgsSpec, depth: usize, options: &RunOptions) -> Result<Report, GgsError> {
    let session = spec.build(depth, &options.build)?;
    let ctx = Context::new(&session);
    let claims: Vec<ClaimId> = match &options.checks {
        Some(list) => ClaimId::ALL.into_iter().filter(|c| list.contains(c)).collect(),
        None => ClaimId::ALL.to_vec(),
    };
    let mut verdicts = Vec::with_capacity(claims.len());
    let mut timings_ms = Vec::with_capacity(claims.len());
    for claim in claims {
        let start = Instant::now();
        verdicts.push(run_check(&ctx, claim)?);
        timings_ms.push(start.elapsed().as_secs_f64() * 1000.0);
    }
    let classification = classify_csp(spec);
    let mut notes = vec![format!(
        "all verdicts are statements about the quotient G_{depth} acting on {} leaves",
        session.group.degree()
    )];
    notes.push(match classification {
        Classification::HasCsp => {
            "classification is by the defining data; passing checks are finite-level evidence for it".into()
        }
        Classification::ConstantVectorException => {
            "classification is by the defining data: the constant vector is the only exception".into()
        }
    });
    Ok(Report {
        spec: spec.clone(),
        depth,
        classification,
        verdicts,
        timings_ms,
        notes,
    })
}
