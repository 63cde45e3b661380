//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails. Every numeric expectation is exact; the
//! only tolerances are the wall-clock budgets below.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use mggs::ggs::{BranchCase, BuildOptions, GgsSpec};
use mggs::tree_autom::{restrict_permutation, Vertex};
use mggs::verifier::{classify_csp, run_all, Classification, ClaimId, Report, RunOptions, Status};
use mggs::{Automorphism, Permutation};
use mggs_cli::report::ReportFile;
use mggs_cli::{run, EXIT_OK};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const BUDGET_ORACLE: Duration = Duration::from_secs(1);
const BUDGET_GUPTA_SIDKI: Duration = Duration::from_secs(120);
const BUDGET_R2: Duration = Duration::from_secs(300);
const BUDGET_SECOND_DERIVED: Duration = Duration::from_secs(1800);
const BUDGET_SYMMETRIC: Duration = Duration::from_secs(120);
const PROPERTY_CASES: u32 = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn spec(p: u32, rows: &[&[u32]]) -> GgsSpec {
    GgsSpec::validate(p, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn gupta_sidki() -> GgsSpec {
    spec(3, &[&[1, 2]])
}

fn verify(s: &GgsSpec, depth: usize, checks: Option<Vec<ClaimId>>) -> Report {
    let options = RunOptions {
        checks,
        build: BuildOptions::default(),
    };
    run_all(s, depth, &options).unwrap()
}

fn expect(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    expect(t <= budget, format!("{what} took {t:?}, budget {budget:?}"))
}

fn holds(report: &Report, claim: ClaimId) -> Result<(), String> {
    let v = report.verdict(claim).ok_or(format!("{claim} missing"))?;
    expect(v.status == Status::Holds, format!("{claim} at N={}: {}", report.depth, v.status))
}

fn detail(report: &Report, claim: ClaimId, key: &str) -> Result<i64, String> {
    report
        .verdict(claim)
        .and_then(|v| v.details.get(key).copied())
        .ok_or(format!("{claim}: no detail `{key}`"))
}

/// Brute-force count of the group generated by `gens`.
fn closure_size(degree: usize, gens: &[Permutation]) -> usize {
    let id = Permutation::identity(degree);
    let mut seen = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen.len()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let s = gupta_sidki();
    let mut seen = Vec::new();
    for n in [1usize, 2] {
        let session = s.build(n.max(2), &BuildOptions::default()).map_err(|e| e.to_string())?;
        let g = session.quotient(n).map_err(|e| e.to_string())?;
        let images: Vec<Permutation> = session
            .images
            .iter()
            .map(|x| restrict_permutation(x, 3, session.depth, n).unwrap())
            .collect();
        let count = closure_size(g.degree(), &images);
        let order = 3usize.pow(g.order_exponent() as u32);
        expect(count == order, format!("N={n}: chain order {order}, closure {count}"))?;
        seen.push(format!("|G_{n}|={order}"));
    }
    within(start, BUDGET_ORACLE, "oracle")?;
    Ok(seen.join(" "))
}

fn gupta_sidki_suite() -> Outcome {
    let start = Instant::now();
    let r = verify(&gupta_sidki(), 5, None);
    for claim in [
        ClaimId::Abelianization,
        ClaimId::Gamma3Product,
        ClaimId::KeyCongruence,
        ClaimId::Stab1DerivedInGamma3,
        ClaimId::Subdirect,
        ClaimId::RankGrowth,
        ClaimId::DerivedContainsStab,
        ClaimId::SecondDerivedContainsStab,
    ] {
        holds(&r, claim)?;
    }
    expect(detail(&r, ClaimId::Abelianization, "index_exponent")? == 2, "|G:G'| != 9")?;
    expect(detail(&r, ClaimId::RankGrowth, "rank_2")? == 2, "rank(G_2) != 2")?;
    expect(detail(&r, ClaimId::DerivedContainsStab, "stabilizer_level")? == 2, "not st(2)")?;
    expect(detail(&r, ClaimId::SecondDerivedContainsStab, "stabilizer_level")? == 4, "not st(4)")?;
    within(start, BUDGET_GUPTA_SIDKI, "Gupta-Sidki suite")?;
    Ok(format!("N=5, |G:G'|=9, rank(G_2)=2, {:?}", start.elapsed()))
}

fn r2_suite() -> Outcome {
    let s = spec(3, &[&[1, 0], &[0, 1]]);
    let start = Instant::now();
    let r = verify(&s, 4, None);
    for claim in [
        ClaimId::RegularBranch,
        ClaimId::Psi2SecondDerived,
        ClaimId::Abelianization,
        ClaimId::RankGrowth,
    ] {
        holds(&r, claim)?;
    }
    expect(detail(&r, ClaimId::Abelianization, "index_exponent")? == 3, "|G:G'| != 27")?;
    expect(detail(&r, ClaimId::RankGrowth, "rank_2")? == 2, "rank(G_2) != 2")?;
    expect(detail(&r, ClaimId::RankGrowth, "rank_3")? == 3, "rank(G_3) != 3")?;
    let r5 = verify(&s, 5, Some(vec![ClaimId::DerivedContainsStab]));
    holds(&r5, ClaimId::DerivedContainsStab)?;
    expect(detail(&r5, ClaimId::DerivedContainsStab, "stabilizer_level")? == 3, "not st(3)")?;
    within(start, BUDGET_R2, "r=2 suite")?;
    let base = start.elapsed();

    let start = Instant::now();
    let r6 = verify(&s, 6, Some(vec![ClaimId::SecondDerivedContainsStab]));
    holds(&r6, ClaimId::SecondDerivedContainsStab)?;
    expect(detail(&r6, ClaimId::SecondDerivedContainsStab, "stabilizer_level")? == 5, "not st(5)")?;
    within(start, BUDGET_SECOND_DERIVED, "st(5) <= G'' at N=6")?;
    Ok(format!("N=4,5 in {base:?}; st(5) <= G'' at N=6 in {:?}", start.elapsed()))
}

fn symmetric_branch() -> Outcome {
    let start = Instant::now();
    let s = spec(5, &[&[1, 1, 1, 1], &[1, 0, 0, 1]]);
    let n = s.normalize().map_err(|e| e.to_string())?;
    expect(matches!(n.case, BranchCase::Symmetric { .. }), "not the symmetric case")?;
    for row in &n.spec.vectors()[1..] {
        expect(row[0] == 0 && row[row.len() - 1] == 0, format!("row {row:?} is not (0,*,...,*,0)"))?;
    }
    let r = verify(&s, 3, Some(vec![ClaimId::RegularBranch]));
    holds(&r, ClaimId::RegularBranch)?;
    let notes = &r.verdict(ClaimId::RegularBranch).unwrap().notes;
    expect(notes.iter().any(|x| x.contains("symmetric case")), "symmetric case not used")?;
    within(start, BUDGET_SYMMETRIC, "symmetric pair")?;
    Ok(format!("normalized rows {:?}", n.spec.vectors()))
}

fn negative_control() -> Outcome {
    let s = spec(3, &[&[1, 1]]);
    expect(
        classify_csp(&s) == Classification::ConstantVectorException,
        "constant spec not classified as the exception",
    )?;
    let r = verify(&s, 4, None);
    for claim in [
        ClaimId::Gamma3Product,
        ClaimId::KeyCongruence,
        ClaimId::RegularBranch,
        ClaimId::Subdirect,
        ClaimId::SecondDerivedContainsStab,
    ] {
        let v = r.verdict(claim).unwrap();
        expect(v.status == Status::Skipped, format!("{claim}: {}", v.status))?;
        let reason = v.reason.as_deref().unwrap_or("");
        expect(reason.contains("constant"), format!("{claim}: reason `{reason}` omits the hypothesis"))?;
    }
    holds(&r, ClaimId::Stab1DerivedInGamma3)?;
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        ["mggs", "verify", "--p", "3", "--vectors", "1,1", "--depth", "4", "--no-cache"],
        &mut out,
        &mut err,
    );
    expect(code == EXIT_OK, format!("exit code {code}"))?;
    Ok("skips named, exit code 0".into())
}

fn arb_spec() -> impl Strategy<Value = GgsSpec> {
    prop_oneof![Just(3u32), Just(5u32)]
        .prop_flat_map(|p| (Just(p), prop::collection::vec(prop::collection::vec(0..p, p as usize - 1), 1..=2)))
        .prop_filter_map("dependent", |(p, rows)| GgsSpec::validate(p, rows).ok())
}

fn word(spec: &GgsSpec, depth: usize, w: &[(usize, i64)]) -> Automorphism {
    let a = spec.rooted(depth).unwrap();
    let bs: Vec<Automorphism> = (0..spec.r()).map(|i| spec.directed(i, depth).unwrap()).collect();
    w.iter().fold(a.pow(0), |acc, &(g, e)| {
        let x = match g % (spec.r() + 1) {
            0 => a.clone(),
            i => bs[i - 1].clone(),
        };
        acc.then(&x.pow(e))
    })
}

fn property_suites() -> Outcome {
    let arb_word = || prop::collection::vec((0usize..8, -6i64..6), 0..10);
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let case = (arb_spec(), 1usize..=4, arb_word(), arb_word(), 0i64..8);
    runner
        .run(&case, |(s, depth, u, w, n)| {
            let (f, g) = (word(&s, depth, &u), word(&s, depth, &w));
            for m in 0..=depth {
                let lhs = f.then(&g).to_permutation(m).unwrap();
                prop_assert_eq!(lhs, f.to_permutation(m).unwrap().then(&g.to_permutation(m).unwrap()));
            }
            prop_assert!(f.then(&f.inverse()).is_identity());
            prop_assert_eq!(f.inverse().inverse(), f.clone());

            let a = s.rooted(depth).unwrap();
            let b1 = s.directed(0, depth).unwrap();
            let c = a.commutator(&b1);
            let rhs = (0..n).rev().fold(a.pow(0), |acc, k| acc.then(&c.conjugate_by(&a.pow(k))));
            prop_assert_eq!(a.pow(n).commutator(&b1), rhs);

            // Elements of st(1): sections read off psi.
            let st = b1.conjugate_by(&a.pow(n)).then(&b1);
            let psi = st.psi().unwrap();
            for j in 0..s.p() {
                prop_assert_eq!(&st.section(&Vertex::new(s.p(), &[j]).unwrap()).unwrap(), &psi[j as usize]);
            }
            Ok(())
        })
        .map_err(|e| format!("element properties: {e}"))?;

    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(arb_spec(), 2usize..=4), |(s, depth)| {
            if let Ok(n) = s.normalize() {
                let g = s.build(depth, &BuildOptions::default()).unwrap().group;
                let h = n.spec.build(depth, &BuildOptions::default()).unwrap().group;
                prop_assert!(g.equals(&h).unwrap());
            }
            Ok(())
        })
        .map_err(|e| format!("normalization: {e}"))?;
    Ok(format!("{PROPERTY_CASES} cases per suite, zero failures"))
}

fn monotonic_evidence() -> Outcome {
    let s = gupta_sidki();
    let top = verify(&s, 5, None);
    let mut compared = 0;
    for n in [3usize, 4] {
        let low = verify(&s, n, None);
        for v in top.verdicts.iter().filter(|v| v.status == Status::Holds) {
            let w = low.verdict(v.claim).unwrap();
            expect(
                matches!(w.status, Status::Holds | Status::Vacuous),
                format!("{} holds at N=5 but is {} at N={n}", v.claim, w.status),
            )?;
            compared += 1;
        }
    }
    Ok(format!("{compared} comparisons, zero violations"))
}

fn determinism() -> Outcome {
    let args = ["mggs", "verify", "--p", "3", "--vectors", "1,2", "--depth", "5", "--format", "json", "--no-cache"];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        expect(run(args, &mut out, &mut err) == EXIT_OK, "verify failed")?;
        let file: ReportFile = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
        runs.push(file.without_timings().to_json());
    }
    expect(runs[0] == runs[1], "reports differ")?;
    Ok(format!("{} identical bytes", runs[0].len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("Gupta-Sidki suite", gupta_sidki_suite),
        ("multi-GGS r=2 suite", r2_suite),
        ("symmetric-branch coverage", symmetric_branch),
        ("negative control", negative_control),
        ("algebraic property suites", property_suites),
        ("monotonic evidence", monotonic_evidence),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(info) => println!("criterion {}: PASS  {name}: {info}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all 8 criteria pass");
}
