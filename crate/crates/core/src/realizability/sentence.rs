//! Sentences over realizer sets and their validity.
//!
//! `⋂` and `⋃` are literal intersection and union of realizer sets. An
//! implication is never materialised as a set; it only appears under a
//! validity judgement, where it becomes a track obligation. A sentence is
//! valid when it has a realizer, i.e. when `⊤₁ ≤ s` (tracked by a constant).

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::pca::{self, Budget, EvalOutcome, PcaTerm};

use super::{meet_sets, pair_nf, search_cases, verify_cases, Carrier, Case, Counterexample, RealizerSet, SearchOutcome, Track, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sentence {
    Atom(RealizerSet),
    And(Box<Sentence>, Box<Sentence>),
    Implies(Box<Sentence>, Box<Sentence>),
    /// One instance per carrier element, in carrier order.
    InterOver(Carrier, Vec<Sentence>),
    UnionOver(Carrier, Vec<Sentence>),
}

impl Sentence {
    pub fn atom(s: RealizerSet) -> Self {
        Sentence::Atom(s)
    }

    pub fn and(a: Sentence, b: Sentence) -> Self {
        Sentence::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Sentence, b: Sentence) -> Self {
        Sentence::Implies(Box::new(a), Box::new(b))
    }

    pub fn inter_over(index: &Carrier, f: impl FnMut(usize) -> Sentence) -> Self {
        Sentence::InterOver(index.clone(), (0..index.len()).map(f).collect())
    }

    pub fn union_over(index: &Carrier, f: impl FnMut(usize) -> Sentence) -> Self {
        Sentence::UnionOver(index.clone(), (0..index.len()).map(f).collect())
    }

    /// The realizer set of an implication-free sentence.
    pub fn denote(&self) -> Option<RealizerSet> {
        match self {
            Sentence::Atom(s) => Some(s.clone()),
            Sentence::And(a, b) => Some(meet_sets(&a.denote()?, &b.denote()?)),
            Sentence::Implies(..) => None,
            Sentence::InterOver(_, xs) => xs
                .iter()
                .try_fold(RealizerSet::All, |acc, x| Some(acc.intersection(&x.denote()?))),
            Sentence::UnionOver(_, xs) => xs
                .iter()
                .try_fold(RealizerSet::empty(), |acc, x| Some(acc.union(&x.denote()?))),
        }
    }

    /// Flattens `⋂…⋂ (A → B)` with implication-free `A`, `B` into track
    /// obligations labelled by the quantified elements.
    pub(crate) fn track_cases(&self) -> Option<Vec<Case>> {
        fn go(s: &Sentence, label: &str, out: &mut Vec<Case>) -> Option<()> {
            match s {
                Sentence::Implies(a, b) => {
                    out.push(Case { label: label.to_string(), input: a.denote()?, output: b.denote()? });
                    Some(())
                }
                Sentence::InterOver(c, xs) => {
                    for (e, x) in c.elems().iter().zip(xs) {
                        let l = if label.is_empty() { e.clone() } else { format!("{label},{e}") };
                        go(x, &l, out)?;
                    }
                    Some(())
                }
                _ => None,
            }
        }
        let mut out = Vec::new();
        go(self, "", &mut out)?;
        Some(out)
    }

    /// Whether `r` realizes the sentence.
    pub fn realized_by(&self, r: &PcaTerm, budget: Budget) -> Verdict {
        let fail = || Verdict::Fails(Counterexample { element: String::new(), realizer: r.clone() });
        if let Some(set) = self.denote() {
            return if set.contains(r) { Verdict::Holds } else { fail() };
        }
        match self {
            Sentence::Implies(..) | Sentence::InterOver(..) if self.track_cases().is_some() => {
                verify_cases(&self.track_cases().expect("checked"), r, budget)
            }
            Sentence::And(a, b) => {
                let proj = |p: PcaTerm| match pca::apply(&p, r, budget) {
                    EvalOutcome::NormalForm(u) => Some(u),
                    EvalOutcome::BudgetExceeded => None,
                };
                let (Some(u), Some(v)) = (proj(pca::fst()), proj(pca::snd())) else {
                    return Verdict::Undetermined(format!("projections of {r} exceeded the budget"));
                };
                if pair_nf(&u, &v) != *r {
                    return fail();
                }
                combine_all([a.realized_by(&u, budget), b.realized_by(&v, budget)])
            }
            Sentence::InterOver(_, xs) => combine_all(xs.iter().map(|x| x.realized_by(r, budget))),
            Sentence::UnionOver(_, xs) => {
                let mut undetermined = None;
                for x in xs {
                    match x.realized_by(r, budget) {
                        Verdict::Holds => return Verdict::Holds,
                        Verdict::Undetermined(why) => {
                            undetermined.get_or_insert(why);
                        }
                        Verdict::Fails(_) => {}
                    }
                }
                undetermined.map_or_else(fail, Verdict::Undetermined)
            }
            Sentence::Implies(..) => Verdict::Undetermined("nested implication".into()),
            Sentence::Atom(_) => unreachable!("atoms always denote"),
        }
    }
}

fn combine_all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut undetermined = None;
    for v in vs {
        match v {
            Verdict::Holds => {}
            Verdict::Fails(c) => return Verdict::Fails(c),
            Verdict::Undetermined(why) => {
                undetermined.get_or_insert(why);
            }
        }
    }
    undetermined.map_or(Verdict::Holds, Verdict::Undetermined)
}

/// A realizer of a sentence together with the track of `⊤₁ ≤ s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityCertificate {
    pub realizer: PcaTerm,
    pub track: Track,
}

impl ValidityCertificate {
    fn of(realizer: PcaTerm, top: bool, budget: Budget) -> Self {
        // `K` itself tracks ⊤ ≤ ⊤; otherwise the constant function onto the realizer
        let witness = if top { PcaTerm::k() } else { pca::constant(&realizer) };
        ValidityCertificate { realizer, track: Track { witness, budget } }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidityOutcome {
    Valid(ValidityCertificate),
    /// No realizer exists, shown by finite exhaustion at the named instance.
    Refuted(String),
    /// No realizer found; inconclusive.
    NotValidFound,
    Undetermined(String),
}

impl ValidityOutcome {
    pub fn certificate(&self) -> Option<&ValidityCertificate> {
        match self {
            ValidityOutcome::Valid(c) => Some(c),
            _ => None,
        }
    }
}

pub fn valid(s: &Sentence, depth: usize, budget: Budget) -> ValidityOutcome {
    valid_with(s, depth, budget, &[], Exec::default())
}

pub(crate) fn valid_with(s: &Sentence, depth: usize, budget: Budget, hints: &[PcaTerm], exec: Exec) -> ValidityOutcome {
    if let Some(set) = s.denote() {
        return match set.first() {
            Some(r) => ValidityOutcome::Valid(ValidityCertificate::of(r, set == RealizerSet::All, budget)),
            None => ValidityOutcome::Refuted("the sentence denotes ∅".into()),
        };
    }
    if let Some(cases) = s.track_cases() {
        return match search_cases(&cases, depth, budget, hints, exec) {
            SearchOutcome::Found(t) => ValidityOutcome::Valid(ValidityCertificate::of(t.witness, false, budget)),
            SearchOutcome::Refuted { element } => ValidityOutcome::Refuted(element),
            SearchOutcome::NotFound { undecided: 0 } => ValidityOutcome::NotValidFound,
            SearchOutcome::NotFound { undecided } => {
                ValidityOutcome::Undetermined(format!("{undecided} candidate tracks could not be decided"))
            }
        };
    }
    match s {
        Sentence::And(a, b) => {
            let (ra, rb) = match (valid_with(a, depth, budget, hints, exec), valid_with(b, depth, budget, hints, exec)) {
                (ValidityOutcome::Valid(x), ValidityOutcome::Valid(y)) => (x.realizer, y.realizer),
                (ValidityOutcome::Refuted(w), _) | (_, ValidityOutcome::Refuted(w)) => return ValidityOutcome::Refuted(w),
                (ValidityOutcome::Undetermined(w), _) | (_, ValidityOutcome::Undetermined(w)) => {
                    return ValidityOutcome::Undetermined(w)
                }
                _ => return ValidityOutcome::NotValidFound,
            };
            ValidityOutcome::Valid(ValidityCertificate::of(pair_nf(&ra, &rb), false, budget))
        }
        Sentence::UnionOver(_, xs) => {
            let mut undetermined = None;
            let mut refuted = 0;
            for x in xs {
                match valid_with(x, depth, budget, hints, exec) {
                    ValidityOutcome::Valid(c) => return ValidityOutcome::Valid(c),
                    ValidityOutcome::Undetermined(w) => {
                        undetermined.get_or_insert(w);
                    }
                    ValidityOutcome::Refuted(_) => refuted += 1,
                    ValidityOutcome::NotValidFound => {}
                }
            }
            if refuted == xs.len() {
                return ValidityOutcome::Refuted("every disjunct is refuted".into());
            }
            undetermined.map_or(ValidityOutcome::NotValidFound, ValidityOutcome::Undetermined)
        }
        _ => {
            // mixed intersections: try realizers of the first instance, then small terms
            let mut candidates = Vec::new();
            if let Sentence::InterOver(_, xs) = s {
                if let Some(c) = xs.first().and_then(|x| valid_with(x, depth, budget, hints, exec).certificate().cloned()) {
                    candidates.push(c.realizer);
                }
            }
            candidates.extend(pca::enumerate_terms(depth));
            let found = exec.find_map_first(&candidates, |r| s.realized_by(r, budget).holds().then(|| r.clone()));
            match found {
                Some(r) => ValidityOutcome::Valid(ValidityCertificate::of(r, false, budget)),
                None => ValidityOutcome::NotValidFound,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pca::numeral;
    use crate::realizability::verify_track;
    use crate::realizability::Predicate;

    fn b() -> Budget {
        Budget::new(1000).unwrap()
    }

    #[test]
    fn top_is_valid_via_k() {
        let out = valid(&Sentence::atom(RealizerSet::All), 2, b());
        assert_eq!(out.certificate().unwrap().track.witness, PcaTerm::k());
    }

    #[test]
    fn empty_is_not_valid() {
        assert!(matches!(valid(&Sentence::atom(RealizerSet::empty()), 2, b()), ValidityOutcome::Refuted(_)));
        let c = Carrier::new(["x"]).unwrap();
        let s = Sentence::inter_over(&c, |_| Sentence::implies(Sentence::atom(RealizerSet::All), Sentence::atom(RealizerSet::empty())));
        assert_eq!(valid(&s, 2, b()), ValidityOutcome::Refuted("x".into()));
    }

    #[test]
    fn singleton_validity_is_a_constant_function() {
        let r = numeral(2);
        let out = valid(&Sentence::atom(RealizerSet::of([&r])), 2, b());
        let cert = out.certificate().unwrap();
        assert_eq!(cert.track.witness, pca::constant(&r));
        // the certificate tracks ⊤₁ ≤ {r}
        let top = Predicate::top(&Carrier::point());
        let s = Predicate::constant(&Carrier::point(), RealizerSet::of([&r]));
        assert!(verify_track(&top, &s, &cert.track.witness, b()).unwrap().holds());
    }

    #[test]
    fn uniform_track_under_intersection() {
        let c = Carrier::new(["x", "y"]).unwrap();
        let vals = [numeral(0), numeral(1)];
        // ⋂_x  {n_x} → {n_x}: identity is uniform
        let s = Sentence::inter_over(&c, |i| {
            Sentence::implies(Sentence::atom(RealizerSet::of([&vals[i]])), Sentence::atom(RealizerSet::of([&vals[i]])))
        });
        let cert = valid(&s, 2, b());
        let r = cert.certificate().unwrap().realizer.clone();
        assert!(s.realized_by(&r, b()).holds());
        // ⋂_x  {n0} → {n_x} has no uniform track: a literal intersection
        let s2 = Sentence::inter_over(&c, |i| {
            Sentence::implies(Sentence::atom(RealizerSet::of([&vals[0]])), Sentence::atom(RealizerSet::of([&vals[i]])))
        });
        assert!(valid(&s2, 2, b()).certificate().is_none());
    }

    #[test]
    fn conjunction_and_union() {
        let a = Sentence::atom(RealizerSet::of([&numeral(0)]));
        let imp = Sentence::implies(a.clone(), a.clone());
        let both = Sentence::and(imp.clone(), a.clone());
        let cert = valid(&both, 2, b()).certificate().cloned().unwrap();
        assert!(both.realized_by(&cert.realizer, b()).holds());
        let c = Carrier::new(["j0", "j1"]).unwrap();
        let u = Sentence::union_over(&c, |j| if j == 0 { Sentence::atom(RealizerSet::empty()) } else { imp.clone() });
        let cert = valid(&u, 2, b()).certificate().cloned().unwrap();
        assert!(u.realized_by(&cert.realizer, b()).holds());
    }
}
