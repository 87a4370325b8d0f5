//! Realizer-set valued predicates over finite carriers.
//!
//! A [`Predicate`] assigns to each element of a finite [`Carrier`] a set of
//! realizers. `φ ≤ ψ` holds when one term (a *track*) sends every realizer of
//! `φ(x)` to a realizer of `ψ(x)`, uniformly in `x`. Tracks are searched for
//! and then re-verified; a failed search is never taken as a proof of `≰`.

mod search;
mod sentence;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::pca::{self, reduce_open, Budget, EvalOutcome, PcaTerm, Stop, Tm};

pub(crate) use search::search_cases;
pub use search::SearchOutcome;
pub(crate) use sentence::valid_with;
pub use sentence::{valid, Sentence, ValidityCertificate, ValidityOutcome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealizabilityError {
    #[error("duplicate carrier element `{0}`")]
    DuplicateElement(String),
    #[error("unknown carrier element `{0}`")]
    UnknownElement(String),
    #[error("predicate over {expected} elements given {got} values")]
    ValueCount { expected: usize, got: usize },
    #[error("predicates live on different carriers")]
    CarrierMismatch,
    #[error("realizer `{0}` is not in normal form")]
    NotNormal(PcaTerm),
}

/// Ordered finite set of element identifiers. The order is the canonical
/// iteration and tie-breaking order everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Carrier {
    elems: Vec<String>,
}

impl Carrier {
    pub fn new<S: Into<String>>(elems: impl IntoIterator<Item = S>) -> Result<Self, RealizabilityError> {
        let elems: Vec<String> = elems.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for e in &elems {
            if !seen.insert(e.as_str()) {
                return Err(RealizabilityError::DuplicateElement(e.clone()));
            }
        }
        Ok(Carrier { elems })
    }

    /// The one-point carrier `{*}`.
    pub fn point() -> Self {
        Carrier { elems: vec!["*".into()] }
    }

    /// `A × B`, row-major, elements labelled `(a,b)`.
    pub fn product(a: &Carrier, b: &Carrier) -> Self {
        let elems = a
            .elems
            .iter()
            .flat_map(|x| b.elems.iter().map(move |y| format!("({x},{y})")))
            .collect();
        Carrier { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[String] {
        &self.elems
    }

    pub fn index_of(&self, e: &str) -> Result<usize, RealizabilityError> {
        self.elems
            .iter()
            .position(|x| x == e)
            .ok_or_else(|| RealizabilityError::UnknownElement(e.to_string()))
    }
}

/// A set of realizers: either a finite set of normal forms or the whole
/// algebra (`All`, the top value).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RealizerSet {
    Finite(BTreeSet<PcaTerm>),
    All,
}

impl RealizerSet {
    pub fn empty() -> Self {
        RealizerSet::Finite(BTreeSet::new())
    }

    pub fn of<'a>(terms: impl IntoIterator<Item = &'a PcaTerm>) -> Self {
        RealizerSet::Finite(terms.into_iter().cloned().collect())
    }

    /// Checked constructor: every member must be a normal form.
    pub fn finite(terms: impl IntoIterator<Item = PcaTerm>) -> Result<Self, RealizabilityError> {
        let mut set = BTreeSet::new();
        for t in terms {
            if !t.is_normal() {
                return Err(RealizabilityError::NotNormal(t));
            }
            set.insert(t);
        }
        Ok(RealizerSet::Finite(set))
    }

    /// Inhabited. `All` always is.
    pub fn is_inhabited(&self) -> bool {
        match self {
            RealizerSet::All => true,
            RealizerSet::Finite(s) => !s.is_empty(),
        }
    }

    pub fn contains(&self, t: &PcaTerm) -> bool {
        match self {
            RealizerSet::All => true,
            RealizerSet::Finite(s) => s.contains(t),
        }
    }

    pub fn union(&self, other: &RealizerSet) -> RealizerSet {
        match (self, other) {
            (RealizerSet::All, _) | (_, RealizerSet::All) => RealizerSet::All,
            (RealizerSet::Finite(a), RealizerSet::Finite(b)) => RealizerSet::Finite(a.union(b).cloned().collect()),
        }
    }

    pub fn intersection(&self, other: &RealizerSet) -> RealizerSet {
        match (self, other) {
            (RealizerSet::All, x) | (x, RealizerSet::All) => x.clone(),
            (RealizerSet::Finite(a), RealizerSet::Finite(b)) => {
                RealizerSet::Finite(a.intersection(b).cloned().collect())
            }
        }
    }

    /// First realizer in canonical order, `K` standing in for `All`.
    pub fn first(&self) -> Option<PcaTerm> {
        match self {
            RealizerSet::All => Some(PcaTerm::k()),
            RealizerSet::Finite(s) => s.iter().next().cloned(),
        }
    }

    pub fn as_finite(&self) -> Option<&BTreeSet<PcaTerm>> {
        match self {
            RealizerSet::Finite(s) => Some(s),
            RealizerSet::All => None,
        }
    }
}

impl fmt::Display for RealizerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealizerSet::All => f.write_str("all"),
            RealizerSet::Finite(s) => {
                f.write_str("{")?;
                for (i, t) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Normal form of `pair·a·b`.
pub fn pair_nf(a: &PcaTerm, b: &PcaTerm) -> PcaTerm {
    match pca::reduce(&pca::pair().app(a).app(b), Budget::default()) {
        EvalOutcome::NormalForm(t) => t,
        EvalOutcome::BudgetExceeded => unreachable!("pairing normal forms terminates"),
    }
}

/// Pointwise meet of realizer sets. `All` contributes the canonical witness
/// `K` so the result stays finite unless both sides are `All`.
pub fn meet_sets(a: &RealizerSet, b: &RealizerSet) -> RealizerSet {
    let k = PcaTerm::k();
    match (a, b) {
        (RealizerSet::All, RealizerSet::All) => RealizerSet::All,
        (RealizerSet::All, RealizerSet::Finite(s)) => RealizerSet::Finite(s.iter().map(|y| pair_nf(&k, y)).collect()),
        (RealizerSet::Finite(s), RealizerSet::All) => RealizerSet::Finite(s.iter().map(|x| pair_nf(x, &k)).collect()),
        (RealizerSet::Finite(s), RealizerSet::Finite(t)) => {
            RealizerSet::Finite(s.iter().flat_map(|x| t.iter().map(move |y| pair_nf(x, y))).collect())
        }
    }
}

/// A map from carrier elements to realizer sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    carrier: Carrier,
    values: Vec<RealizerSet>,
}

impl Predicate {
    pub fn new(carrier: Carrier, values: Vec<RealizerSet>) -> Result<Self, RealizabilityError> {
        if carrier.len() != values.len() {
            return Err(RealizabilityError::ValueCount { expected: carrier.len(), got: values.len() });
        }
        Ok(Predicate { carrier, values })
    }

    pub fn from_fn(carrier: &Carrier, mut f: impl FnMut(usize) -> RealizerSet) -> Self {
        let values = (0..carrier.len()).map(&mut f).collect();
        Predicate { carrier: carrier.clone(), values }
    }

    pub fn constant(carrier: &Carrier, value: RealizerSet) -> Self {
        Predicate::from_fn(carrier, |_| value.clone())
    }

    /// `⊤_X`: constantly `All`.
    pub fn top(carrier: &Carrier) -> Self {
        Predicate::constant(carrier, RealizerSet::All)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn values(&self) -> &[RealizerSet] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &RealizerSet {
        &self.values[i]
    }

    pub fn get(&self, elem: &str) -> Result<&RealizerSet, RealizabilityError> {
        Ok(&self.values[self.carrier.index_of(elem)?])
    }

    fn same_carrier(&self, other: &Predicate) -> Result<(), RealizabilityError> {
        if self.carrier != other.carrier {
            return Err(RealizabilityError::CarrierMismatch);
        }
        Ok(())
    }

    /// The obligations of `self ≤ other`, one per carrier element.
    pub(crate) fn cases_to(&self, other: &Predicate) -> Result<Vec<Case>, RealizabilityError> {
        self.same_carrier(other)?;
        Ok(self
            .carrier
            .elems
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(label, (i, o))| Case { label: label.clone(), input: i.clone(), output: o.clone() })
            .collect())
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (e, v)) in self.carrier.elems.iter().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e} = {v}")?;
        }
        Ok(())
    }
}

/// Pointwise meet `(φ∧ψ)(x) = { pair·a·b : a∈φ(x), b∈ψ(x) }`.
pub fn meet(phi: &Predicate, psi: &Predicate) -> Result<Predicate, RealizabilityError> {
    phi.same_carrier(psi)?;
    Ok(Predicate::from_fn(&phi.carrier, |i| meet_sets(&phi.values[i], &psi.values[i])))
}

fn check_family(index: &Carrier, family: &[Predicate], target: &Carrier) -> Result<(), RealizabilityError> {
    if family.len() != index.len() {
        return Err(RealizabilityError::ValueCount { expected: index.len(), got: family.len() });
    }
    if family.iter().any(|p| &p.carrier != target) {
        return Err(RealizabilityError::CarrierMismatch);
    }
    Ok(())
}

/// Literal pointwise union over an index carrier.
pub fn union_over(index: &Carrier, family: &[Predicate], target: &Carrier) -> Result<Predicate, RealizabilityError> {
    check_family(index, family, target)?;
    Ok(Predicate::from_fn(target, |x| {
        family.iter().fold(RealizerSet::empty(), |acc, p| acc.union(&p.values[x]))
    }))
}

/// Literal pointwise intersection over an index carrier.
pub fn intersect_over(
    index: &Carrier,
    family: &[Predicate],
    target: &Carrier,
) -> Result<Predicate, RealizabilityError> {
    check_family(index, family, target)?;
    Ok(Predicate::from_fn(target, |x| {
        family.iter().fold(RealizerSet::All, |acc, p| acc.intersection(&p.values[x]))
    }))
}

/// A term witnessing an inequality of predicates, with the budget under which
/// it was verified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub witness: PcaTerm,
    pub budget: Budget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub element: String,
    pub realizer: PcaTerm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails(Counterexample),
    Undetermined(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// One obligation of a track: every realizer of `input` must be sent into
/// `output`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Case {
    pub label: String,
    pub input: RealizerSet,
    pub output: RealizerSet,
}

/// Terms tried in turn when a counterexample to a track on `All` is needed.
fn probe_inputs() -> Vec<PcaTerm> {
    let mut v = pca::enumerate_terms(1);
    v.extend((0..4).map(pca::numeral));
    v
}

/// Checks `e` against every case; a definite failure outranks an
/// undetermined application.
pub(crate) fn verify_cases(cases: &[Case], e: &PcaTerm, budget: Budget) -> Verdict {
    let mut undetermined: Option<String> = None;
    for case in cases {
        match &case.input {
            RealizerSet::Finite(inputs) => {
                for a in inputs {
                    match pca::apply(e, a, budget) {
                        EvalOutcome::NormalForm(u) => {
                            if !case.output.contains(&u) {
                                return Verdict::Fails(Counterexample {
                                    element: case.label.clone(),
                                    realizer: a.clone(),
                                });
                            }
                        }
                        EvalOutcome::BudgetExceeded => {
                            undetermined.get_or_insert_with(|| {
                                format!("{e} · {a} exceeded {} steps at {}", budget.max_steps(), case.label)
                            });
                        }
                    }
                }
            }
            RealizerSet::All => match verify_on_all(e, &case.output, budget) {
                Ok(()) => {}
                Err(Some(a)) => {
                    return Verdict::Fails(Counterexample { element: case.label.clone(), realizer: a });
                }
                Err(None) => {
                    undetermined.get_or_insert_with(|| {
                        format!("cannot decide {e} on the unenumerable realizer set at {}", case.label)
                    });
                }
            },
        }
    }
    match undetermined {
        Some(reason) => Verdict::Undetermined(reason),
        None => Verdict::Holds,
    }
}

/// Decides `e·a ∈ output` for every realizer `a` by evaluating `e` on an
/// opaque input. Sound whenever the opaque input never reaches head position:
/// weak reduction commutes with substitution, so every instance follows the
/// same reduction sequence. `Err(Some(a))` is a concrete failing input,
/// `Err(None)` means undecided.
fn verify_on_all(e: &PcaTerm, output: &RealizerSet, budget: Budget) -> Result<(), Option<PcaTerm>> {
    let probe = Tm::app(e.tm().clone(), Arc::new(Tm::Hole));
    let result = match reduce_open(&probe, budget) {
        Ok(r) => r,
        Err(Stop::Exceeded | Stop::Sensitive) => return Err(None),
    };
    if !result.contains_hole() {
        let u = PcaTerm::from_tm(result);
        return if output.contains(&u) { Ok(()) } else { Err(Some(PcaTerm::k())) };
    }
    if matches!(output, RealizerSet::All) {
        return Ok(());
    }
    // the result varies injectively with the input while `output` is finite
    probe_inputs()
        .into_iter()
        .find(|a| !output.contains(&PcaTerm::fill_hole(&result, a)))
        .map_or(Err(None), |a| Err(Some(a)))
}

/// Checks that `e` tracks `phi ≤ psi`.
pub fn verify_track(phi: &Predicate, psi: &Predicate, e: &PcaTerm, budget: Budget) -> Result<Verdict, RealizabilityError> {
    Ok(verify_cases(&phi.cases_to(psi)?, e, budget))
}

/// Looks for a track of `phi ≤ psi`.
pub fn search_track(
    phi: &Predicate,
    psi: &Predicate,
    depth: usize,
    budget: Budget,
) -> Result<SearchOutcome, RealizabilityError> {
    Ok(search_cases(&phi.cases_to(psi)?, depth, budget, &[], Exec::default()))
}

/// Tracks in both directions: equality in the poset reflection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetCertificate {
    pub forward: Track,
    pub backward: Track,
}

impl PosetCertificate {
    pub fn recheck(&self, phi: &Predicate, psi: &Predicate) -> Result<bool, RealizabilityError> {
        Ok(verify_track(phi, psi, &self.forward.witness, self.forward.budget)?.holds()
            && verify_track(psi, phi, &self.backward.witness, self.backward.budget)?.holds())
    }
}

/// Searches tracks for `phi ≤ psi` and `psi ≤ phi`. `None` is inconclusive.
pub fn poset_equal(
    phi: &Predicate,
    psi: &Predicate,
    depth: usize,
    budget: Budget,
) -> Result<Option<PosetCertificate>, RealizabilityError> {
    poset_equal_with(phi, psi, depth, budget, &[], Exec::default())
}

pub(crate) fn poset_equal_with(
    phi: &Predicate,
    psi: &Predicate,
    depth: usize,
    budget: Budget,
    hints: &[PcaTerm],
    exec: Exec,
) -> Result<Option<PosetCertificate>, RealizabilityError> {
    let fw = search_cases(&phi.cases_to(psi)?, depth, budget, hints, exec);
    let SearchOutcome::Found(forward) = fw else { return Ok(None) };
    let bw = search_cases(&psi.cases_to(phi)?, depth, budget, hints, exec);
    let SearchOutcome::Found(backward) = bw else { return Ok(None) };
    Ok(Some(PosetCertificate { forward, backward }))
}
