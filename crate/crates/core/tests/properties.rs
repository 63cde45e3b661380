use mggs::ggs::{dependency, is_symmetric, BranchCase, BuildOptions, GgsSpec};
use mggs::tree_autom::{restrict_permutation, Vertex};
use mggs::{Automorphism, GroupHandle};
use proptest::prelude::*;

/// A random valid spec with `p ∈ {3, 5}` and at most two vectors.
fn arb_spec() -> impl Strategy<Value = GgsSpec> {
    prop_oneof![Just(3u32), Just(5u32)]
        .prop_flat_map(|p| {
            let row = prop::collection::vec(0..p, p as usize - 1);
            (Just(p), prop::collection::vec(row, 1..=2))
        })
        .prop_filter_map("dependent vectors", |(p, rows)| GgsSpec::validate(p, rows).ok())
}

/// A word in `a, b_1, …, b_r` as (generator, exponent) pairs.
fn arb_word() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..8, -6i64..6), 0..12)
}

struct Gens {
    a: Automorphism,
    b: Vec<Automorphism>,
}

impl Gens {
    fn new(spec: &GgsSpec, depth: usize) -> Self {
        Gens {
            a: spec.rooted(depth).unwrap(),
            b: (0..spec.r()).map(|i| spec.directed(i, depth).unwrap()).collect(),
        }
    }

    fn get(&self, index: usize) -> &Automorphism {
        match index % (self.b.len() + 1) {
            0 => &self.a,
            i => &self.b[i - 1],
        }
    }

    fn word(&self, w: &[(usize, i64)]) -> Automorphism {
        w.iter().fold(self.a.pow(0), |acc, &(g, e)| acc.then(&self.get(g).pow(e)))
    }

    /// Products of conjugates of the `b_i` by powers of `a`, which fix level 1.
    fn stabilizer_word(&self, w: &[(usize, i64)]) -> Automorphism {
        w.iter().fold(self.a.pow(0), |acc, &(g, e)| {
            let b = &self.b[g % self.b.len()];
            acc.then(&b.conjugate_by(&self.a.pow(e)))
        })
    }
}

fn arb_case() -> impl Strategy<Value = (GgsSpec, usize, Vec<(usize, i64)>, Vec<(usize, i64)>)> {
    (arb_spec(), 1usize..=4, arb_word(), arb_word())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn permutation_image_is_a_homomorphism((spec, depth, u, w) in arb_case()) {
        let gens = Gens::new(&spec, depth);
        let (f, g) = (gens.word(&u), gens.word(&w));
        let fg = f.then(&g);
        for m in 0..=depth {
            let lhs = fg.to_permutation(m).unwrap();
            let rhs = f.to_permutation(m).unwrap().then(&g.to_permutation(m).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn inverse_round_trip((spec, depth, u, w) in arb_case()) {
        let gens = Gens::new(&spec, depth);
        let (f, g) = (gens.word(&u), gens.word(&w));
        prop_assert!(f.then(&f.inverse()).is_identity());
        prop_assert!(f.inverse().then(&f).is_identity());
        prop_assert_eq!(f.then(&g).inverse(), g.inverse().then(&f.inverse()));
    }

    #[test]
    fn faithful_at_full_depth((spec, depth, u, w) in arb_case()) {
        let gens = Gens::new(&spec, depth);
        let (f, g) = (gens.word(&u), gens.word(&w));
        let (pf, pg) = (f.to_permutation(depth).unwrap(), g.to_permutation(depth).unwrap());
        prop_assert_eq!(f == g, pf == pg);
        prop_assert_eq!(Automorphism::from_permutation(&pf, spec.p(), depth).unwrap(), f);
    }

    #[test]
    fn psi_agrees_with_sections((spec, depth, u, _w) in arb_case()) {
        let gens = Gens::new(&spec, depth);
        let f = gens.stabilizer_word(&u);
        let psi = f.psi().unwrap();
        for j in 0..spec.p() {
            let v = Vertex::new(spec.p(), &[j]).unwrap();
            prop_assert_eq!(&f.section(&v).unwrap(), &psi[j as usize]);
        }
    }

    #[test]
    fn section_of_product_twists((spec, depth, u, w) in arb_case()) {
        let gens = Gens::new(&spec, depth);
        let (f, g) = (gens.word(&u), gens.word(&w));
        for index in 0..spec.p() as usize {
            let v = Vertex::from_index(spec.p(), 1, index).unwrap();
            let lhs = f.then(&g).section(&v).unwrap();
            let rhs = f.section(&v).unwrap().then(&g.section(&f.apply(&v).unwrap()).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn commutator_power_expansion((spec, depth, u, _w) in arb_case(), n in 0i64..8) {
        // [a^n, x] = [a,x]^(a^(n-1)) ... [a,x]^a [a,x], in any group.
        let gens = Gens::new(&spec, depth);
        let x = gens.word(&u);
        let c = gens.a.commutator(&x);
        let rhs = (0..n).rev().fold(gens.a.pow(0), |acc, k| acc.then(&c.conjugate_by(&gens.a.pow(k))));
        prop_assert_eq!(gens.a.pow(n).commutator(&x), rhs);
        let b1 = &gens.b[0];
        let c1 = gens.a.commutator(b1);
        let rhs1 = (0..n).rev().fold(gens.a.pow(0), |acc, k| acc.then(&c1.conjugate_by(&gens.a.pow(k))));
        prop_assert_eq!(gens.a.pow(n).commutator(b1), rhs1);
    }

    #[test]
    fn restriction_commutes_with_truncation((spec, depth, u, _w) in arb_case()) {
        let gens = Gens::new(&spec, depth);
        let f = gens.word(&u);
        let top = f.to_permutation(depth).unwrap();
        for m in 0..depth {
            prop_assert_eq!(restrict_permutation(&top, spec.p(), depth, m).unwrap(), f.to_permutation(m).unwrap());
        }
        // Truncating the generators first gives the same element.
        if depth >= 2 {
            let short = Gens::new(&spec, depth - 1).word(&u);
            prop_assert_eq!(short.to_permutation(depth - 1).unwrap(), f.to_permutation(depth - 1).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generators_have_order_p(spec in arb_spec(), depth in 1usize..=4) {
        let gens = Gens::new(&spec, depth);
        let p = spec.p() as i64;
        prop_assert!(gens.a.pow(p).is_identity());
        for b in &gens.b {
            prop_assert!(b.pow(p).is_identity());
        }
    }

    #[test]
    fn conjugation_by_a_shifts_sections(spec in arb_spec(), depth in 2usize..=4) {
        let gens = Gens::new(&spec, depth);
        let p = spec.p() as usize;
        for b in &gens.b {
            let plain = b.psi().unwrap();
            let shifted = b.conjugate_by(&gens.a).psi().unwrap();
            for j in 0..p {
                prop_assert_eq!(&shifted[j], &plain[(j + p - 1) % p]);
            }
        }
    }

    #[test]
    fn directed_sections_follow_the_vector(spec in arb_spec(), depth in 2usize..=4) {
        let gens = Gens::new(&spec, depth);
        let p = spec.p() as usize;
        for (i, b) in gens.b.iter().enumerate() {
            let psi = b.psi().unwrap();
            for j in 0..p - 1 {
                prop_assert_eq!(&psi[j], &spec.rooted(depth - 1).unwrap().pow(spec.vectors()[i][j] as i64));
            }
            prop_assert_eq!(&psi[p - 1], &spec.directed(i, depth - 1).unwrap());
        }
    }

    #[test]
    fn normalize_preserves_the_group(spec in arb_spec(), depth in 2usize..=4) {
        let Ok(normalized) = spec.normalize() else { return Ok(()) };
        let options = BuildOptions::default();
        let g = spec.build(depth, &options).unwrap().group;
        let h = normalized.spec.build(depth, &options).unwrap().group;
        prop_assert!(g.equals(&h).unwrap());
        let firsts: Vec<u32> = normalized.spec.vectors().iter().map(|v| v[0]).collect();
        match normalized.case {
            BranchCase::Symmetric { column } => {
                prop_assert!(firsts[0] == 1 && firsts[1..].iter().all(|&x| x == 0));
                prop_assert!(normalized.spec.vectors()[1..].iter().all(|v| v[v.len() - 1] == 0));
                prop_assert_eq!(normalized.spec.vectors()[0][column - 1], 0);
            }
            _ => prop_assert!(firsts.iter().all(|&x| x == 1)),
        }
    }

    #[test]
    fn validation_matches_enumeration(
        (p, rows) in prop_oneof![Just(3u32), Just(5u32)].prop_flat_map(|p| {
            let row = prop::collection::vec(0..p, p as usize - 1);
            (Just(p), prop::collection::vec(row, 1..=3))
        })
    ) {
        // Brute force: some nonzero coefficient vector kills the rows.
        let r = rows.len();
        let dependent = (1..(p as usize).pow(r as u32)).any(|mut code| {
            let coeffs: Vec<u32> = (0..r).map(|_| { let c = code % p as usize; code /= p as usize; c as u32 }).collect();
            (0..p as usize - 1).all(|col| rows.iter().zip(&coeffs).map(|(row, c)| row[col] * c).sum::<u32>() % p == 0)
        });
        let result = GgsSpec::validate(p, rows.clone());
        prop_assert_eq!(result.is_ok(), !dependent);
        if let Some(cert) = dependency(p, &rows) {
            prop_assert!(cert.iter().any(|&c| c != 0));
            for col in 0..p as usize - 1 {
                prop_assert_eq!(rows.iter().zip(&cert).map(|(row, c)| row[col] * c).sum::<u32>() % p, 0);
            }
        }
    }

    #[test]
    fn constant_implies_symmetric(spec in arb_spec()) {
        if spec.is_constant() {
            prop_assert!(is_symmetric(&spec.vectors()[0]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subgroup_invariants(spec in arb_spec(), depth in 2usize..=3, u in arb_word()) {
        let session = spec.build(depth, &BuildOptions::default()).unwrap();
        let g = &session.group;
        let gens = Gens::new(&spec, depth);
        let x = gens.word(&u).to_permutation(depth).unwrap();
        prop_assert!(g.contains(&x).unwrap());

        // Normal closure of one element is closed under conjugation by G.
        let n = g.normal_closure(std::slice::from_ref(&x)).unwrap();
        for h in n.generators() {
            for s in g.generators() {
                prop_assert!(n.contains(&h.conjugate_by(s)).unwrap());
            }
        }
        prop_assert!(n.is_subgroup_of(g).unwrap());
        prop_assert!(n.order_exponent() <= g.order_exponent());

        let phi = g.frattini();
        let d = g.derived();
        prop_assert!(d.is_subgroup_of(&phi).unwrap());
        for s in g.generators() {
            prop_assert!(phi.contains(&s.pow(spec.p() as i64)).unwrap());
        }
        prop_assert!(g.rank() <= spec.r() + 1);
        for m in 0..=depth {
            let st = g.level_stabilizer(m).unwrap();
            prop_assert_eq!(st.order_exponent() + g.level_image(m).unwrap().order_exponent(), g.order_exponent());
        }
        let again = GroupHandle::generate(g.degree(), &session.images).unwrap();
        prop_assert_eq!(again.order_exponent(), g.order_exponent());
        prop_assert_eq!(session.summary(), spec.build(depth, &BuildOptions::default()).unwrap().summary());
    }
}
