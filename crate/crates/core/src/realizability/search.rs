//! Track search.
//!
//! Candidates are tried in three phases, each in a fixed order:
//!
//! 1. a library pool: `I`, `K`, the projections, caller-supplied hint tracks,
//!    their pairwise compositions, and constant functions onto realizers that
//!    occur in the targets;
//! 2. goal-directed synthesis of tupling terms `λx. ⟨…⟩` whose leaves are
//!    projection paths, hints after paths, or constants, guided by the pair
//!    structure of the target realizers;
//! 3. every closed `K`/`S` term with at most `depth` application nodes in
//!    canonical size-then-lexicographic order.
//!
//! The first candidate that verifies is returned. Synthesis only proposes;
//! every answer goes through [`verify_cases`].

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::exec::Exec;
use crate::pca::{self, abstract_closed, app, canonical_cmp, reduce_open, Budget, Lam, PcaTerm, Tm};

use super::{verify_cases, Case, RealizerSet, Track, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Track),
    /// Nothing verified. `undecided` counts candidates whose check could not
    /// be completed (budget exhaustion or an unenumerable input).
    NotFound { undecided: usize },
    /// No term can work: an inhabited input must land in an empty set.
    Refuted { element: String },
}

impl SearchOutcome {
    pub fn track(&self) -> Option<&Track> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

const PATH_LEN: usize = 3;
const HINT_PATH_LEN: usize = 2;
const SOLUTION_CAP: usize = 6;

pub(crate) fn search_cases(cases: &[Case], depth: usize, budget: Budget, hints: &[PcaTerm], exec: Exec) -> SearchOutcome {
    if let Some(c) = cases.iter().find(|c| c.input.is_inhabited() && !c.output.is_inhabited()) {
        return SearchOutcome::Refuted { element: c.label.clone() };
    }
    if let Some(element) = conflict(cases) {
        return SearchOutcome::Refuted { element };
    }
    let undecided = AtomicUsize::new(0);
    let check = |e: &PcaTerm| match verify_cases(cases, e, budget) {
        Verdict::Holds => Some(Track { witness: e.clone(), budget }),
        Verdict::Fails(_) => None,
        Verdict::Undetermined(_) => {
            undecided.fetch_add(1, Ordering::Relaxed);
            None
        }
    };

    if let Some(t) = exec.find_map_first(&pool(cases, hints), check) {
        return SearchOutcome::Found(t);
    }
    if let Some(t) = Synth::new(cases, hints, budget).run(depth).and_then(|e| check(&e)) {
        return SearchOutcome::Found(t);
    }
    if let Some(t) = exec.find_map_first(&pca::enumerate_terms(depth), check) {
        return SearchOutcome::Found(t);
    }
    SearchOutcome::NotFound { undecided: undecided.into_inner() }
}

/// An input shared by several cases whose outputs have empty intersection.
/// Application is deterministic, so no track can serve all of them.
fn conflict(cases: &[Case]) -> Option<String> {
    let mut probes: BTreeSet<PcaTerm> = BTreeSet::new();
    for c in cases {
        match &c.input {
            RealizerSet::Finite(s) => probes.extend(s.iter().cloned()),
            RealizerSet::All => {
                probes.insert(PcaTerm::k());
            }
        }
    }
    probes.into_iter().find_map(|r| {
        let hit: Vec<&Case> = cases.iter().filter(|c| c.input.contains(&r)).collect();
        let meet = hit.iter().fold(RealizerSet::All, |acc, c| acc.intersection(&c.output));
        (!meet.is_inhabited()).then(|| {
            let labels: Vec<&str> = hit.iter().map(|c| c.label.as_str()).collect();
            format!("{} on {r}", labels.join(" and "))
        })
    })
}

fn pool(cases: &[Case], hints: &[PcaTerm]) -> Vec<PcaTerm> {
    let mut base = vec![pca::i(), PcaTerm::k(), pca::fst(), pca::snd(), pca::succ()];
    base.extend(hints.iter().cloned());
    let mut out: BTreeSet<PcaTerm> = base.iter().cloned().collect();
    let b = pca::compose();
    for g in &base {
        for f in &base {
            out.insert(b.app(g).app(f));
        }
    }
    for c in cases {
        if let RealizerSet::Finite(s) = &c.output {
            out.extend(s.iter().map(pca::constant));
        }
    }
    out.insert(pca::constant(&PcaTerm::k()));
    // case split on a numeral input: `λn. n (K c) v` sends 0 to v and every successor to c
    let consts: BTreeSet<&PcaTerm> = cases
        .iter()
        .filter_map(|c| match &c.output {
            RealizerSet::Finite(s) => Some(s.iter()),
            RealizerSet::All => None,
        })
        .flatten()
        .collect();
    if consts.len() <= 8 {
        use Lam::*;
        for c in &consts {
            for v in &consts {
                let body = app(app(Var(0), Con(pca::constant(c))), Con((*v).clone()));
                out.insert(abstract_closed(&[0], body));
            }
        }
    }
    let mut v: Vec<PcaTerm> = out.into_iter().collect();
    v.sort_by(canonical_cmp);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Proj {
    Fst,
    Snd,
}

#[derive(Clone, Debug)]
enum Leaf {
    Path(Vec<Proj>),
    Hint(usize, Vec<Proj>),
}

#[derive(Clone, Debug)]
enum Shape {
    Leaf(usize),
    Const(Arc<Tm>),
    Pair(Box<Shape>, Box<Shape>),
}

#[derive(Clone, Debug)]
enum Target {
    All,
    Finite(BTreeSet<Arc<Tm>>),
}

impl Target {
    fn accepts(&self, v: &Arc<Tm>) -> bool {
        match self {
            Target::All => true,
            Target::Finite(s) => !v.contains_hole() && s.contains(v),
        }
    }
}

#[derive(Clone, Debug)]
struct Example {
    input: usize,
    target: Target,
}

fn paths(max_len: usize) -> Vec<Vec<Proj>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            for q in [Proj::Fst, Proj::Snd] {
                let mut np: Vec<Proj> = p.clone();
                np.push(q);
                next.push(np);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

type Split = Option<(Arc<Tm>, Arc<Tm>)>;

struct Synth<'a> {
    hints: &'a [PcaTerm],
    budget: Budget,
    examples: Vec<Example>,
    leaves: Vec<Leaf>,
    /// `[leaf][input]`
    leaf_vals: Vec<Vec<Option<Arc<Tm>>>>,
    pair_cache: HashMap<Arc<Tm>, Split>,
    fst: Arc<Tm>,
    snd: Arc<Tm>,
    pair: Arc<Tm>,
}

impl<'a> Synth<'a> {
    fn new(cases: &[Case], hints: &'a [PcaTerm], budget: Budget) -> Self {
        let mut inputs: Vec<Arc<Tm>> = Vec::new();
        let index = |t: Arc<Tm>, inputs: &mut Vec<Arc<Tm>>| match inputs.iter().position(|x| *x == t) {
            Some(i) => i,
            None => {
                inputs.push(t);
                inputs.len() - 1
            }
        };
        let mut examples = Vec::new();
        for c in cases {
            let target = match &c.output {
                RealizerSet::All => Target::All,
                RealizerSet::Finite(s) => Target::Finite(s.iter().map(|t| t.tm().clone()).collect()),
            };
            match &c.input {
                RealizerSet::All => {
                    let i = index(Arc::new(Tm::Hole), &mut inputs);
                    examples.push(Example { input: i, target });
                }
                RealizerSet::Finite(s) => {
                    for a in s {
                        let i = index(a.tm().clone(), &mut inputs);
                        examples.push(Example { input: i, target: target.clone() });
                    }
                }
            }
        }
        let mut leaves: Vec<Leaf> = paths(PATH_LEN).into_iter().map(Leaf::Path).collect();
        for h in 0..hints.len() {
            leaves.extend(paths(HINT_PATH_LEN).into_iter().map(|p| Leaf::Hint(h, p)));
        }
        let mut s = Synth {
            hints,
            budget,
            examples,
            leaves,
            leaf_vals: Vec::new(),
            pair_cache: HashMap::new(),
            fst: pca::fst().tm().clone(),
            snd: pca::snd().tm().clone(),
            pair: pca::pair().tm().clone(),
        };
        s.leaf_vals = s.leaves.iter().map(|l| inputs.iter().map(|x| s.eval_leaf(l, x)).collect()).collect();
        s
    }

    fn nf(&self, t: Arc<Tm>) -> Option<Arc<Tm>> {
        reduce_open(&t, self.budget).ok()
    }

    fn eval_leaf(&self, leaf: &Leaf, input: &Arc<Tm>) -> Option<Arc<Tm>> {
        let (hint, ps) = match leaf {
            Leaf::Path(ps) => (None, ps),
            Leaf::Hint(h, ps) => (Some(*h), ps),
        };
        let mut v = input.clone();
        for p in ps {
            let f = match p {
                Proj::Fst => &self.fst,
                Proj::Snd => &self.snd,
            };
            v = self.nf(Tm::app(f.clone(), v))?;
        }
        if let Some(h) = hint {
            v = self.nf(Tm::app(self.hints[h].tm().clone(), v))?;
        }
        Some(v)
    }

    fn eval(&self, shape: &Shape, input: usize) -> Option<Arc<Tm>> {
        match shape {
            Shape::Leaf(l) => self.leaf_vals[*l][input].clone(),
            Shape::Const(c) => Some(c.clone()),
            Shape::Pair(a, b) => {
                let (va, vb) = (self.eval(a, input)?, self.eval(b, input)?);
                self.nf(Tm::app(Tm::app(self.pair.clone(), va), vb))
            }
        }
    }

    /// Components of a realizer that is a normal-form pair.
    fn split(&mut self, t: &Arc<Tm>) -> Option<(Arc<Tm>, Arc<Tm>)> {
        if let Some(hit) = self.pair_cache.get(t) {
            return hit.clone();
        }
        let res = (|| {
            let u = self.nf(Tm::app(self.fst.clone(), t.clone()))?;
            let v = self.nf(Tm::app(self.snd.clone(), t.clone()))?;
            let back = self.nf(Tm::app(Tm::app(self.pair.clone(), u.clone()), v.clone()))?;
            (back == *t).then_some((u, v))
        })();
        self.pair_cache.insert(t.clone(), res.clone());
        res
    }

    fn run(mut self, depth: usize) -> Option<PcaTerm> {
        let examples = std::mem::take(&mut self.examples);
        let shape = self.solutions(&examples, depth, 1).into_iter().next()?;
        Some(self.compile(&shape))
    }

    fn solutions(&mut self, examples: &[Example], depth: usize, cap: usize) -> Vec<Shape> {
        let mut out = Vec::new();
        for (li, vals) in self.leaf_vals.iter().enumerate() {
            let ok = examples
                .iter()
                .all(|ex| vals[ex.input].as_ref().is_some_and(|v| ex.target.accepts(v)));
            if ok {
                out.push(Shape::Leaf(li));
                if out.len() >= cap {
                    return out;
                }
            }
        }
        for c in self.constants(examples) {
            out.push(Shape::Const(c));
            if out.len() >= cap {
                return out;
            }
        }
        if depth == 0 || examples.is_empty() {
            return out;
        }
        // tupling: every finite target must consist of pairs
        let mut split_targets = Vec::with_capacity(examples.len());
        for ex in examples {
            match &ex.target {
                Target::All => split_targets.push(None),
                Target::Finite(s) => {
                    if s.is_empty() {
                        return out;
                    }
                    let mut parts = Vec::new();
                    for t in s {
                        match self.split(t) {
                            Some(p) => parts.push(p),
                            None => return out,
                        }
                    }
                    split_targets.push(Some(parts));
                }
            }
        }
        let firsts: Vec<Example> = examples
            .iter()
            .zip(&split_targets)
            .map(|(ex, parts)| Example {
                input: ex.input,
                target: match parts {
                    None => Target::All,
                    Some(ps) => Target::Finite(ps.iter().map(|(u, _)| u.clone()).collect()),
                },
            })
            .collect();
        for left in self.solutions(&firsts, depth - 1, SOLUTION_CAP) {
            let mut seconds = Vec::with_capacity(examples.len());
            let mut feasible = true;
            for (ex, parts) in examples.iter().zip(&split_targets) {
                let target = match parts {
                    None => Target::All,
                    Some(ps) => {
                        let Some(lv) = self.eval(&left, ex.input) else {
                            feasible = false;
                            break;
                        };
                        Target::Finite(ps.iter().filter(|(u, _)| *u == lv).map(|(_, v)| v.clone()).collect())
                    }
                };
                seconds.push(Example { input: ex.input, target });
            }
            if !feasible {
                continue;
            }
            for right in self.solutions(&seconds, depth - 1, cap - out.len()) {
                out.push(Shape::Pair(Box::new(left.clone()), Box::new(right)));
                if out.len() >= cap {
                    return out;
                }
            }
        }
        out
    }

    /// Realizers accepted by every example, in canonical order.
    fn constants(&self, examples: &[Example]) -> Vec<Arc<Tm>> {
        let mut pool: Option<BTreeSet<Arc<Tm>>> = None;
        for ex in examples {
            if let Target::Finite(s) = &ex.target {
                pool = Some(match pool {
                    None => s.clone(),
                    Some(p) => p.intersection(s).cloned().collect(),
                });
            }
        }
        match pool {
            None => vec![PcaTerm::k().tm().clone()],
            Some(p) => {
                let mut v: Vec<Arc<Tm>> = p.into_iter().collect();
                v.sort_by(|a, b| canonical_cmp(&PcaTerm::from_tm(a.clone()), &PcaTerm::from_tm(b.clone())));
                v
            }
        }
    }

    fn body(&self, shape: &Shape) -> Lam {
        let path_body = |ps: &[Proj]| {
            ps.iter().fold(Lam::Var(0), |acc, p| {
                let f = match p {
                    Proj::Fst => pca::fst(),
                    Proj::Snd => pca::snd(),
                };
                app(Lam::Con(f), acc)
            })
        };
        match shape {
            Shape::Leaf(l) => match &self.leaves[*l] {
                Leaf::Path(ps) => path_body(ps),
                Leaf::Hint(h, ps) => app(Lam::Con(self.hints[*h].clone()), path_body(ps)),
            },
            Shape::Const(c) => Lam::Con(PcaTerm::from_tm(c.clone())),
            Shape::Pair(a, b) => app(app(Lam::Con(pca::pair()), self.body(a)), self.body(b)),
        }
    }

    fn compile(&self, shape: &Shape) -> PcaTerm {
        abstract_closed(&[0], self.body(shape))
    }
}
