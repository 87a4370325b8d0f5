use epswb_core::pca::{self, apply, enumerate_terms, reduce, Budget, EvalOutcome, PcaTerm};
use proptest::prelude::*;

fn arb_term() -> impl Strategy<Value = PcaTerm> {
    let leaf = prop_oneof![Just(PcaTerm::k()), Just(PcaTerm::s())];
    leaf.prop_recursive(6, 24, 2, |inner| (inner.clone(), inner).prop_map(|(f, a)| f.app(&a)))
}

fn b(n: u64) -> Budget {
    Budget::new(n).unwrap()
}

fn nf(t: &PcaTerm) -> Option<PcaTerm> {
    reduce(t, b(2_000)).normal_form().cloned()
}

proptest! {
    #[test]
    fn reduction_is_deterministic(t in arb_term()) {
        prop_assert_eq!(reduce(&t, b(500)), reduce(&t, b(500)));
    }

    #[test]
    fn more_budget_never_changes_a_result(t in arb_term(), b1 in 1u64..100, extra in 1u64..400) {
        if let EvalOutcome::NormalForm(x) = reduce(&t, b(b1)) {
            prop_assert_eq!(reduce(&t, b(b1 + extra)), EvalOutcome::NormalForm(x));
        }
    }

    #[test]
    fn normal_forms_are_fixed(t in arb_term()) {
        if let Some(n) = nf(&t) {
            prop_assert!(n.is_normal());
            prop_assert_eq!(reduce(&n, b(1)), EvalOutcome::NormalForm(n.clone()));
        }
    }

    #[test]
    fn printing_round_trips(t in arb_term()) {
        prop_assert_eq!(PcaTerm::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn k_and_s_laws(x in arb_term(), y in arb_term(), z in arb_term()) {
        if let Some(nx) = nf(&x) {
            prop_assert_eq!(nf(&PcaTerm::k().app(&x).app(&y)), Some(nx));
        }
        let rhs = x.app(&z).app(&y.app(&z));
        if let Some(r) = nf(&rhs) {
            prop_assert_eq!(reduce(&PcaTerm::s().app(&x).app(&y).app(&z), b(2_001)).normal_form().cloned(), Some(r));
        }
    }

    #[test]
    fn derived_combinators(x in arb_term(), y in arb_term()) {
        let (Some(nx), Some(ny)) = (nf(&x), nf(&y)) else { return Ok(()) };
        prop_assert_eq!(nf(&pca::i().app(&x)), Some(nx.clone()));
        let p = pca::pair().app(&nx).app(&ny);
        prop_assert_eq!(nf(&pca::fst().app(&p)), Some(nx.clone()));
        prop_assert_eq!(nf(&pca::snd().app(&p)), Some(ny.clone()));
        prop_assert_eq!(nf(&pca::constant(&nx).app(&ny)), Some(nx));
    }
}

#[test]
fn zero_budget_is_rejected() {
    assert!(Budget::new(0).is_err());
}

#[test]
fn omega_exhausts_every_budget() {
    let s = PcaTerm::s();
    let w = s.app(&pca::i()).app(&pca::i());
    let omega = w.app(&w);
    for n in [1, 10, 1_000, 10_000] {
        assert_eq!(reduce(&omega, b(n)), EvalOutcome::BudgetExceeded);
    }
}

#[test]
fn numerals_are_distinct_and_stepped_by_succ() {
    let ns: Vec<PcaTerm> = (0..6).map(pca::numeral).collect();
    for (i, n) in ns.iter().enumerate() {
        assert!(n.is_normal());
        assert!(ns[i + 1..].iter().all(|m| m != n));
        assert_eq!(apply(&pca::succ(), n, Budget::default()).normal_form(), Some(&pca::numeral(i as u32 + 1)));
    }
}

#[test]
fn composition_and_fork() {
    let (f, g) = (pca::succ(), pca::succ());
    let h = pca::compose().app(&g).app(&f);
    assert_eq!(nf(&h.app(&pca::numeral(1))), Some(pca::numeral(3)));
    let fk = pca::fork(&pca::succ(), &pca::i());
    let out = nf(&fk.app(&pca::numeral(0))).unwrap();
    assert_eq!(nf(&pca::fst().app(&out)), Some(pca::numeral(1)));
    assert_eq!(nf(&pca::snd().app(&out)), Some(pca::numeral(0)));
}

#[test]
fn enumeration_is_canonical_and_complete() {
    // Catalan-weighted count of binary trees over two leaves
    let counts = [2usize, 4, 16, 80];
    let terms = enumerate_terms(3);
    assert_eq!(terms.len(), counts.iter().sum::<usize>());
    let mut sorted = terms.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), terms.len());
}
