//! A partial combinatory algebra over the two atoms `K` and `S`.
//!
//! Application is modelled by budgeted normal-order reduction: an application
//! `f·a` is *defined* when `f·a` reaches a normal form within the step budget.
//! Normal forms are full normal forms: once the head of the spine is stuck the
//! arguments are normalised left to right, so a normal form contains no `K` or
//! `S` redex anywhere.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Internal node type. `Hole` is an opaque input used only for symbolic
/// evaluation of tracks against the unenumerable top realizer set; it never
/// escapes through [`PcaTerm`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub(crate) enum Tm {
    K,
    S,
    Hole,
    App(Arc<Tm>, Arc<Tm>),
}

impl Tm {
    pub(crate) fn app(f: Arc<Tm>, a: Arc<Tm>) -> Arc<Tm> {
        Arc::new(Tm::App(f, a))
    }

    pub(crate) fn contains_hole(&self) -> bool {
        match self {
            Tm::Hole => true,
            Tm::K | Tm::S => false,
            Tm::App(f, a) => f.contains_hole() || a.contains_hole(),
        }
    }

    fn substitute_hole(self: &Arc<Tm>, with: &Arc<Tm>) -> Arc<Tm> {
        match &**self {
            Tm::Hole => with.clone(),
            Tm::K | Tm::S => self.clone(),
            Tm::App(f, a) => Tm::app(f.substitute_hole(with), a.substitute_hole(with)),
        }
    }
}

/// A closed combinatory term built from `K`, `S` and application.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PcaTerm(Arc<Tm>);

/// One level of a [`PcaTerm`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    K,
    S,
    App(PcaTerm, PcaTerm),
}

impl PcaTerm {
    pub fn k() -> Self {
        PcaTerm(Arc::new(Tm::K))
    }

    pub fn s() -> Self {
        PcaTerm(Arc::new(Tm::S))
    }

    /// The application node `self · arg`.
    pub fn app(&self, arg: &PcaTerm) -> PcaTerm {
        PcaTerm(Tm::app(self.0.clone(), arg.0.clone()))
    }

    /// Left-nested application to several arguments.
    pub fn app_all<'a>(&self, args: impl IntoIterator<Item = &'a PcaTerm>) -> PcaTerm {
        args.into_iter().fold(self.clone(), |f, a| f.app(a))
    }

    pub fn view(&self) -> Node {
        match &*self.0 {
            Tm::K => Node::K,
            Tm::S => Node::S,
            Tm::App(f, a) => Node::App(PcaTerm(f.clone()), PcaTerm(a.clone())),
            Tm::Hole => unreachable!("holes never appear in closed terms"),
        }
    }

    /// Number of application nodes.
    pub fn size(&self) -> usize {
        fn go(t: &Tm) -> usize {
            match t {
                Tm::App(f, a) => 1 + go(f) + go(a),
                _ => 0,
            }
        }
        go(&self.0)
    }

    /// Whether no `K`/`S` redex occurs anywhere in the term.
    pub fn is_normal(&self) -> bool {
        normalize(&self.0, &mut 0).is_ok()
    }

    pub(crate) fn tm(&self) -> &Arc<Tm> {
        &self.0
    }

    /// Wraps an internal term; callers guarantee it is hole-free.
    pub(crate) fn from_tm(t: Arc<Tm>) -> Self {
        debug_assert!(!t.contains_hole());
        PcaTerm(t)
    }

    pub(crate) fn fill_hole(t: &Arc<Tm>, with: &PcaTerm) -> PcaTerm {
        PcaTerm(t.substitute_hole(&with.0))
    }

    /// Parses the textual syntax: `K`, `S`, juxtaposition and parentheses.
    pub fn parse(text: &str) -> Result<PcaTerm, PcaError> {
        parse_with(text, &|_: &str| None)
    }
}

/// Canonical enumeration order: fewer application nodes first, then
/// structural order (`K < S < application`, left subterm first).
pub fn canonical_cmp(a: &PcaTerm, b: &PcaTerm) -> std::cmp::Ordering {
    a.size().cmp(&b.size()).then_with(|| a.cmp(b))
}

impl fmt::Display for PcaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tm(&self.0, false, f)
    }
}

impl fmt::Debug for PcaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

fn write_tm(t: &Tm, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Tm::K => f.write_str("K"),
        Tm::S => f.write_str("S"),
        Tm::Hole => f.write_str("?"),
        Tm::App(g, a) => {
            if parens {
                f.write_str("(")?;
            }
            write_tm(g, false, f)?;
            f.write_str(" ")?;
            write_tm(a, true, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl FromStr for PcaTerm {
    type Err = PcaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PcaTerm::parse(s)
    }
}

impl Serialize for PcaTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PcaTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        PcaTerm::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcaError {
    #[error("budget must allow at least one reduction step")]
    ZeroBudget,
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Maximum number of reduction steps allowed for one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Budget {
    max_steps: u64,
}

impl Budget {
    pub const DEFAULT_STEPS: u64 = 10_000;

    pub fn new(max_steps: u64) -> Result<Self, PcaError> {
        if max_steps == 0 {
            return Err(PcaError::ZeroBudget);
        }
        Ok(Budget { max_steps })
    }

    pub fn max_steps(self) -> u64 {
        self.max_steps
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: Self::DEFAULT_STEPS }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    NormalForm(PcaTerm),
    BudgetExceeded,
}

impl EvalOutcome {
    pub fn normal_form(&self) -> Option<&PcaTerm> {
        match self {
            EvalOutcome::NormalForm(t) => Some(t),
            EvalOutcome::BudgetExceeded => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Stop {
    Exceeded,
    /// The opaque input reached head position with arguments, so the result
    /// would depend on which realizer fills it.
    Sensitive,
}

fn spend(fuel: &mut u64) -> Result<(), Stop> {
    if *fuel == 0 {
        return Err(Stop::Exceeded);
    }
    *fuel -= 1;
    Ok(())
}

fn rebuild(mut head: Arc<Tm>, rest: &[Arc<Tm>]) -> Arc<Tm> {
    for a in rest {
        head = Tm::app(head, a.clone());
    }
    head
}

/// Leftmost-outermost reduction to full normal form, spending one unit of
/// `fuel` per contraction.
pub(crate) fn normalize(t: &Arc<Tm>, fuel: &mut u64) -> Result<Arc<Tm>, Stop> {
    let mut cur = t.clone();
    loop {
        let mut args = Vec::new();
        let mut head = cur.clone();
        while let Tm::App(f, a) = &*head {
            args.push(a.clone());
            let next = f.clone();
            head = next;
        }
        args.reverse();
        match &*head {
            Tm::K if args.len() >= 2 => {
                spend(fuel)?;
                cur = rebuild(args[0].clone(), &args[2..]);
            }
            Tm::S if args.len() >= 3 => {
                spend(fuel)?;
                let (x, y, z) = (&args[0], &args[1], &args[2]);
                let contracted = Tm::app(Tm::app(x.clone(), z.clone()), Tm::app(y.clone(), z.clone()));
                cur = rebuild(contracted, &args[3..]);
            }
            Tm::Hole if !args.is_empty() => return Err(Stop::Sensitive),
            _ => {
                let mut out = head;
                for a in &args {
                    let na = normalize(a, fuel)?;
                    out = Tm::app(out, na);
                }
                return Ok(out);
            }
        }
    }
}

/// Evaluates a possibly-open term under `budget`.
pub(crate) fn reduce_open(t: &Arc<Tm>, budget: Budget) -> Result<Arc<Tm>, Stop> {
    let mut fuel = budget.max_steps;
    normalize(t, &mut fuel)
}

/// Normal-order reduction of `t` within `budget` steps.
pub fn reduce(t: &PcaTerm, budget: Budget) -> EvalOutcome {
    match reduce_open(&t.0, budget) {
        Ok(nf) => EvalOutcome::NormalForm(PcaTerm(nf)),
        Err(Stop::Exceeded) => EvalOutcome::BudgetExceeded,
        Err(Stop::Sensitive) => unreachable!("closed terms contain no hole"),
    }
}

/// Application `f·a`, i.e. `reduce(f a)`.
pub fn apply(f: &PcaTerm, a: &PcaTerm, budget: Budget) -> EvalOutcome {
    reduce(&f.app(a), budget)
}

/// Derived combinators used to assemble tracks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Combinator {
    I,
    Pair,
    Fst,
    Snd,
    Const(PcaTerm),
    Compose,
    Numeral(u32),
    Succ,
}

pub fn combinator(c: Combinator) -> PcaTerm {
    match c {
        Combinator::I => i(),
        Combinator::Pair => pair(),
        Combinator::Fst => fst(),
        Combinator::Snd => snd(),
        Combinator::Const(t) => constant(&t),
        Combinator::Compose => compose(),
        Combinator::Numeral(k) => numeral(k),
        Combinator::Succ => succ(),
    }
}

/// `S K K`.
pub fn i() -> PcaTerm {
    let (s, k) = (PcaTerm::s(), PcaTerm::k());
    s.app(&k).app(&k)
}

/// `λa b f. f a b`
pub fn pair() -> PcaTerm {
    use Lam::*;
    let body = app(app(Var(2), Var(0)), Var(1));
    abstract_closed(&[0, 1, 2], body)
}

/// `λp. p K`
pub fn fst() -> PcaTerm {
    use Lam::*;
    abstract_closed(&[0], app(Var(0), Con(PcaTerm::k())))
}

/// `λp. p (K I)`
pub fn snd() -> PcaTerm {
    use Lam::*;
    abstract_closed(&[0], app(Var(0), Con(PcaTerm::k().app(&i()))))
}

/// `λg f x. g (f x)`
pub fn compose() -> PcaTerm {
    use Lam::*;
    abstract_closed(&[0, 1, 2], app(Var(0), app(Var(1), Var(2))))
}

/// The constant function `K t`.
pub fn constant(t: &PcaTerm) -> PcaTerm {
    PcaTerm::k().app(t)
}

/// Church successor `λn f x. f (n f x)`.
pub fn succ() -> PcaTerm {
    use Lam::*;
    abstract_closed(&[0, 1, 2], app(Var(1), app(app(Var(0), Var(1)), Var(2))))
}

/// Church numeral `λf x. fᵏ x`. Successors are stored as the normal form of
/// `succ · numeral(k-1)`, so `apply(succ, numeral(k))` returns `numeral(k+1)`
/// syntactically.
pub fn numeral(k: u32) -> PcaTerm {
    let sc = succ();
    let mut n = PcaTerm::k().app(&i());
    for _ in 0..k {
        n = sc.app(&n);
    }
    n
}

/// `λx. pair (f x) (g x)` for closed `f`, `g`.
pub fn fork(f: &PcaTerm, g: &PcaTerm) -> PcaTerm {
    use Lam::*;
    let body = app(app(Con(pair()), app(Con(f.clone()), Var(0))), app(Con(g.clone()), Var(0)));
    abstract_closed(&[0], body)
}

/// Lambda terms over combinator constants, compiled by bracket abstraction.
#[derive(Clone, Debug)]
pub(crate) enum Lam {
    Var(u8),
    Con(PcaTerm),
    App(Box<Lam>, Box<Lam>),
}

pub(crate) fn app(f: Lam, a: Lam) -> Lam {
    Lam::App(Box::new(f), Box::new(a))
}

impl Lam {
    fn free(&self, v: u8) -> bool {
        match self {
            Lam::Var(w) => *w == v,
            Lam::Con(_) => false,
            Lam::App(f, a) => f.free(v) || a.free(v),
        }
    }
}

fn bracket(v: u8, body: Lam) -> Lam {
    if !body.free(v) {
        return Lam::App(Box::new(Lam::Con(PcaTerm::k())), Box::new(body));
    }
    match body {
        Lam::Var(_) => Lam::Con(i()),
        Lam::App(f, a) => {
            if matches!(&*a, Lam::Var(w) if *w == v) && !f.free(v) {
                return *f;
            }
            let s = Lam::Con(PcaTerm::s());
            app(app(s, bracket(v, *f)), bracket(v, *a))
        }
        Lam::Con(_) => unreachable!(),
    }
}

/// Abstracts `vars` (outermost first) and converts the closed result.
pub(crate) fn abstract_closed(vars: &[u8], body: Lam) -> PcaTerm {
    let mut t = body;
    for v in vars.iter().rev() {
        t = bracket(*v, t);
    }
    fn close(l: Lam) -> PcaTerm {
        match l {
            Lam::Con(t) => t,
            Lam::App(f, a) => close(*f).app(&close(*a)),
            Lam::Var(v) => panic!("variable {v} left free after abstraction"),
        }
    }
    close(t)
}

/// Parses terms whose identifiers other than `K` and `S` are resolved by
/// `lookup` (used for named combinators in spec files).
pub fn parse_with(text: &str, lookup: &dyn Fn(&str) -> Option<PcaTerm>) -> Result<PcaTerm, PcaError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, lookup };
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    lookup: &'a dyn Fn(&str) -> Option<PcaTerm>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PcaError {
        PcaError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<PcaTerm, PcaError> {
        let mut t = self.atom()?.ok_or_else(|| self.err("expected a term"))?;
        while let Some(a) = self.atom()? {
            t = t.app(&a);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Option<PcaTerm>, PcaError> {
        self.skip_ws();
        let Some(&c) = self.src.get(self.pos) else { return Ok(None) };
        match c {
            b'(' => {
                self.pos += 1;
                let t = self.term()?;
                self.skip_ws();
                if self.src.get(self.pos) != Some(&b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(Some(t))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match word {
                    "K" => Ok(Some(PcaTerm::k())),
                    "S" => Ok(Some(PcaTerm::s())),
                    w => match (self.lookup)(w) {
                        Some(t) => Ok(Some(t)),
                        None => {
                            self.pos = start;
                            Err(self.err(&format!("unknown combinator `{w}`")))
                        }
                    },
                }
            }
            _ => Ok(None),
        }
    }
}

/// All closed terms with at most `max_apps` application nodes, in canonical
/// order.
pub fn enumerate_terms(max_apps: usize) -> Vec<PcaTerm> {
    let mut by_size: Vec<Vec<PcaTerm>> = vec![vec![PcaTerm::k(), PcaTerm::s()]];
    for n in 1..=max_apps {
        let mut level = Vec::new();
        for left in 0..n {
            let right = n - 1 - left;
            for f in &by_size[left] {
                for a in &by_size[right] {
                    level.push(f.app(a));
                }
            }
        }
        level.sort();
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nf(t: &PcaTerm, steps: u64) -> PcaTerm {
        match reduce(t, Budget::new(steps).unwrap()) {
            EvalOutcome::NormalForm(u) => u,
            EvalOutcome::BudgetExceeded => panic!("{t} did not normalise in {steps} steps"),
        }
    }

    /// Church decoding oracle: `n (S K) K` unfolds to `S K (S K (... K))`.
    fn decode_numeral(n: &PcaTerm) -> Option<u32> {
        let sk = PcaTerm::s().app(&PcaTerm::k());
        let mut t = nf(&n.app(&sk).app(&PcaTerm::k()), 1000);
        let mut count = 0;
        loop {
            match t.view() {
                Node::K => return Some(count),
                Node::App(f, a) if f == sk => {
                    count += 1;
                    t = a;
                }
                _ => return None,
            }
        }
    }

    #[test]
    fn k_law_on_atoms() {
        let (a, b) = (PcaTerm::s(), PcaTerm::k().app(&PcaTerm::s()));
        assert_eq!(reduce(&PcaTerm::k().app(&a).app(&b), Budget::new(10).unwrap()), EvalOutcome::NormalForm(a));
    }

    #[test]
    fn skk_is_identity() {
        let x = PcaTerm::s().app(&PcaTerm::k());
        let t = PcaTerm::parse("S K K").unwrap().app(&x);
        assert_eq!(nf(&t, 10), x);
        assert_eq!(combinator(Combinator::I), PcaTerm::parse("S K K").unwrap());
        assert_eq!(apply(&i(), &x, Budget::new(10).unwrap()), EvalOutcome::NormalForm(x));
    }

    #[test]
    fn omega_exceeds_every_budget() {
        let sii = PcaTerm::s().app(&i()).app(&i());
        let omega = sii.app(&sii);
        for b in [1, 2, 10, 100, 10_000] {
            assert_eq!(reduce(&omega, Budget::new(b).unwrap()), EvalOutcome::BudgetExceeded);
        }
        // hand trace: SII(SII) -> I(SII)(I(SII)) is a single S-step and the
        // head redex persists
        let one_step = i().app(&sii).app(&i().app(&sii));
        assert_eq!(reduce(&one_step, Budget::new(50).unwrap()), EvalOutcome::BudgetExceeded);
    }

    #[test]
    fn successor_on_numerals() {
        let out = apply(&succ(), &numeral(2), Budget::new(200).unwrap());
        assert_eq!(out, EvalOutcome::NormalForm(numeral(3)));
        for k in 0..6 {
            assert_eq!(decode_numeral(&numeral(k)), Some(k));
        }
        assert_eq!(decode_numeral(out.normal_form().unwrap()), Some(3));
    }

    #[test]
    fn constant_tracks() {
        let r = numeral(1);
        let a = numeral(0);
        let b = Budget::new(10).unwrap();
        assert_eq!(apply(&PcaTerm::k().app(&r), &a, b), EvalOutcome::NormalForm(r.clone()));
        assert_eq!(reduce(&constant(&r).app(&a), b), EvalOutcome::NormalForm(r));
    }

    #[test]
    fn pairing_and_projections() {
        let (a, b) = (numeral(0), numeral(2));
        let p = pair().app(&a).app(&b);
        assert_eq!(nf(&fst().app(&p), 100), a);
        assert_eq!(nf(&snd().app(&p), 100), b);
        let x = numeral(1);
        assert_eq!(nf(&compose().app(&succ()).app(&succ()).app(&x), 200), numeral(3));
        let f = fork(&fst(), &fst());
        assert_eq!(nf(&fst().app(&f.app(&p)), 200), a);
    }

    #[test]
    fn combinators_are_normal() {
        for t in [i(), pair(), fst(), snd(), compose(), succ(), numeral(3)] {
            assert!(t.is_normal(), "{t}");
        }
        assert!(!PcaTerm::parse("K K K").unwrap().is_normal());
    }

    #[test]
    fn printer_and_parser() {
        let t = PcaTerm::parse("(S (K S) K)").unwrap();
        assert_eq!(t.to_string(), "S (K S) K");
        assert_eq!(t, compose_b());
        assert!(matches!(PcaTerm::parse("S (K"), Err(PcaError::Parse { .. })));
        assert!(matches!(PcaTerm::parse("S X"), Err(PcaError::Parse { pos: 2, .. })));
        assert!(PcaTerm::parse("").is_err());
    }

    fn compose_b() -> PcaTerm {
        let (s, k) = (PcaTerm::s(), PcaTerm::k());
        s.app(&k.app(&s)).app(&k)
    }

    #[test]
    fn budget_must_be_positive() {
        assert_eq!(Budget::new(0), Err(PcaError::ZeroBudget));
        assert_eq!(Budget::default().max_steps(), 10_000);
    }

    #[test]
    fn enumeration_is_canonical() {
        let ts = enumerate_terms(2);
        assert_eq!(ts.len(), 2 + 4 + 16);
        assert_eq!(ts[0], PcaTerm::k());
        assert_eq!(ts[1], PcaTerm::s());
        assert!(ts.windows(2).all(|w| canonical_cmp(&w[0], &w[1]).is_lt()));
        assert!(ts.contains(&i()));
    }
}
