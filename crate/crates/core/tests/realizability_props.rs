use epswb_core::pca::{self, apply, Budget, PcaTerm};
use epswb_core::realizability::{
    meet, poset_equal, search_track, valid, verify_track, Carrier, Predicate, RealizerSet, SearchOutcome, Sentence,
    ValidityOutcome, Verdict,
};
use proptest::prelude::*;

fn atoms() -> Vec<PcaTerm> {
    (0..3).map(pca::numeral).chain([PcaTerm::k()]).collect()
}

fn arb_set() -> impl Strategy<Value = RealizerSet> {
    prop_oneof![
        1 => Just(RealizerSet::All),
        6 => prop::sample::subsequence(atoms(), 0..=3).prop_map(|v| RealizerSet::of(&v)),
    ]
}

fn arb_pair() -> impl Strategy<Value = (Predicate, Predicate)> {
    (1usize..=3).prop_flat_map(|n| {
        (prop::collection::vec(arb_set(), n), prop::collection::vec(arb_set(), n)).prop_map(move |(a, b)| {
            let c = Carrier::new((0..n).map(|i| format!("x{i}"))).unwrap();
            (Predicate::new(c.clone(), a).unwrap(), Predicate::new(c, b).unwrap())
        })
    })
}

fn budget() -> Budget {
    Budget::default()
}

/// Pointwise check of a track on finite inputs, independent of the verifier.
fn tracks_finitely(phi: &Predicate, psi: &Predicate, e: &PcaTerm) -> Option<bool> {
    let mut ok = true;
    for (x, y) in phi.values().iter().zip(psi.values()) {
        match x {
            RealizerSet::All => return None,
            RealizerSet::Finite(s) => {
                for a in s {
                    ok &= apply(e, a, budget()).normal_form().is_some_and(|r| y.contains(r));
                }
            }
        }
    }
    Some(ok)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn identity_tracks_reflexivity((phi, _) in arb_pair()) {
        prop_assert_eq!(verify_track(&phi, &phi, &pca::i(), budget()).unwrap(), Verdict::Holds);
    }

    #[test]
    fn verifier_agrees_with_pointwise_application((phi, psi) in arb_pair(), k in 0usize..4) {
        let e = [pca::i(), pca::succ(), pca::constant(&pca::numeral(1)), pca::fst()][k].clone();
        if let Some(expected) = tracks_finitely(&phi, &psi, &e) {
            let v = verify_track(&phi, &psi, &e, budget()).unwrap();
            prop_assert_eq!(v.holds(), expected, "{:?}", v);
        }
    }

    #[test]
    fn search_is_sound((phi, psi) in arb_pair()) {
        match search_track(&phi, &psi, 3, budget()).unwrap() {
            SearchOutcome::Found(t) => prop_assert!(verify_track(&phi, &psi, &t.witness, t.budget).unwrap().holds()),
            SearchOutcome::Refuted { .. } => {
                for e in pca::enumerate_terms(2) {
                    prop_assert!(!verify_track(&phi, &psi, &e, budget()).unwrap().holds());
                }
            }
            SearchOutcome::NotFound { .. } => {}
        }
    }

    #[test]
    fn meet_is_a_lower_bound((phi, psi) in arb_pair()) {
        // fst and snd need not terminate on an arbitrary realizer of All
        let top = |x: &RealizerSet| matches!(x, RealizerSet::All);
        prop_assume!(phi.values().iter().zip(psi.values()).all(|(a, b)| !(top(a) && top(b))));
        let m = meet(&phi, &psi).unwrap();
        prop_assert!(verify_track(&m, &phi, &pca::fst(), budget()).unwrap().holds());
        prop_assert!(verify_track(&m, &psi, &pca::snd(), budget()).unwrap().holds());
    }

    #[test]
    fn poset_certificates_recheck((phi, psi) in arb_pair()) {
        if let Some(c) = poset_equal(&phi, &psi, 3, budget()).unwrap() {
            prop_assert!(c.recheck(&phi, &psi).unwrap());
        }
        prop_assert!(poset_equal(&phi, &phi, 3, budget()).unwrap().is_some());
    }

    #[test]
    fn atom_validity_is_inhabitation(s in arb_set()) {
        let out = valid(&Sentence::atom(s.clone()), 3, budget());
        prop_assert_eq!(matches!(out, ValidityOutcome::Valid(_)), s.is_inhabited());
    }
}

#[test]
fn transitivity_composes_tracks() {
    let c = Carrier::new(["x", "y"]).unwrap();
    let n = |k| RealizerSet::of(&[pca::numeral(k)]);
    let phi = Predicate::new(c.clone(), vec![n(0), n(1)]).unwrap();
    let psi = Predicate::new(c.clone(), vec![n(1), n(2)]).unwrap();
    let chi = Predicate::new(c, vec![n(2), n(3)]).unwrap();
    let t1 = search_track(&phi, &psi, 3, budget()).unwrap().track().cloned().unwrap();
    let t2 = search_track(&psi, &chi, 3, budget()).unwrap().track().cloned().unwrap();
    let both = pca::compose().app(&t2.witness).app(&t1.witness);
    assert!(verify_track(&phi, &chi, &both, budget()).unwrap().holds());
}

#[test]
fn uniformity_is_required() {
    // the same realizer would have to go to two places
    let c = Carrier::new(["x", "y"]).unwrap();
    let n = |k| RealizerSet::of(&[pca::numeral(k)]);
    let phi = Predicate::new(c.clone(), vec![n(0), n(0)]).unwrap();
    let psi = Predicate::new(c, vec![n(0), n(1)]).unwrap();
    assert!(matches!(search_track(&phi, &psi, 4, budget()).unwrap(), SearchOutcome::Refuted { .. }));
}
