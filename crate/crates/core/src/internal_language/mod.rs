//! The internal language of `FinSet^n`: types, terms, formulas and
//! sequents over a signature of named objects, arrows and subobjects.
//!
//! Formulas denote subobjects of the context object
//! `⟦x1:A1, …, xn:An⟧ = ((1 × A1) × …) × An`. A sequent is derivable when
//! the meet of its antecedents factors through its consequent.

mod parse;
mod rules;
mod semantics;

pub use parse::{parse, parse_context, parse_formula, parse_sequent, parse_term, parse_type, Parsed};
pub use rules::{ac_witness, eps_rule, AcWitness, EpsConstruction, EpsMode, EpsTermResult};
pub use semantics::{derivable, interpret, term_arrow, Derivation};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_topos::{FinArrow, FinObj, Subobject, ToposCtx, ToposError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LanguageError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: type error: {msg}")]
    Type { line: usize, col: usize, msg: String },
    #[error("ill-typed: {0}")]
    IllTyped(String),
    #[error("symbol `{0}` is already declared")]
    Duplicate(String),
    #[error("symbol `{name}` does not match its declared type: {msg}")]
    BadSymbol { name: String, msg: String },
    #[error("empty type `{0}` rejected: an ε-term into it would make the topos degenerate")]
    EmptyTypeRejected(String),
    #[error("partial ε-terms are closed; context `{0}` is not empty")]
    ModeViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Topos(#[from] ToposError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Base(String),
    Unit,
    Prod(Box<Type>, Box<Type>),
    /// Accepted in signatures and denoted componentwise; no membership
    /// formulas.
    Power(Box<Type>),
}

impl Type {
    pub fn base(name: &str) -> Type {
        Type::Base(name.to_string())
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
    Tuple(Box<Term>, Box<Term>),
    /// `t.1` or `t.2`.
    Proj(Box<Term>, u8),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Term::Tuple(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Term::Proj(t, _) => t.free_vars(out),
        }
    }

    fn subst(&self, x: &str, by: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => by.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst(x, by)).collect()),
            Term::Tuple(a, b) => Term::Tuple(Box::new(a.subst(x, by)), Box::new(b.subst(x, by))),
            Term::Proj(t, i) => Term::Proj(Box::new(t.subst(x, by)), *i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Type, Box<Formula>),
    Forall(String, Type, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, ty: Type, body: Formula) -> Formula {
        Formula::Exists(x.to_string(), ty, Box::new(body))
    }

    pub fn forall(x: &str, ty: Type, body: Formula) -> Formula {
        Formula::Forall(x.to_string(), ty, Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Rel(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Formula::Eq(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(x, _, body) | Formula::Forall(x, _, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    fn all_vars(&self, out: &mut BTreeSet<String>) {
        self.collect_free(out);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            Formula::Exists(x, _, body) | Formula::Forall(x, _, body) => {
                out.insert(x.clone());
                body.all_vars(out);
            }
            _ => {}
        }
    }

    /// Capture-avoiding `self[by/x]`.
    pub fn subst(&self, x: &str, by: &Term) -> Formula {
        let mut by_free = BTreeSet::new();
        by.free_vars(&mut by_free);
        self.subst_inner(x, by, &by_free)
    }

    fn subst_inner(&self, x: &str, by: &Term, by_free: &BTreeSet<String>) -> Formula {
        let rec = |f: &Formula| Box::new(f.subst_inner(x, by, by_free));
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| a.subst(x, by)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.subst(x, by), b.subst(x, by)),
            Formula::And(a, b) => Formula::And(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
            Formula::Implies(a, b) => Formula::Implies(rec(a), rec(b)),
            Formula::Exists(y, ty, body) | Formula::Forall(y, ty, body) => {
                let rebuild = |y: String, body: Formula| match self {
                    Formula::Exists(..) => Formula::Exists(y, ty.clone(), Box::new(body)),
                    _ => Formula::Forall(y, ty.clone(), Box::new(body)),
                };
                if y == x {
                    return self.clone();
                }
                if by_free.contains(y) {
                    let mut taken = by_free.clone();
                    body.all_vars(&mut taken);
                    taken.insert(x.to_string());
                    let fresh = fresh_name(y, &taken);
                    let renamed = body.subst(y, &Term::Var(fresh.clone()));
                    return rebuild(fresh, renamed.subst_inner(x, by, by_free));
                }
                rebuild(y.clone(), body.subst_inner(x, by, by_free))
            }
        }
    }
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    (1..).map(|k| format!("{base}{k}")).find(|n| !taken.contains(n)).expect("unbounded")
}

/// An ordered list of typed variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    vars: Vec<(String, Type)>,
}

impl Context {
    pub fn new(vars: Vec<(String, Type)>) -> Result<Self, LanguageError> {
        for (i, (x, _)) in vars.iter().enumerate() {
            if vars[..i].iter().any(|(y, _)| y == x) {
                return Err(LanguageError::Duplicate(x.clone()));
            }
        }
        Ok(Context { vars })
    }

    pub fn empty() -> Self {
        Context::default()
    }

    pub fn vars(&self) -> &[(String, Type)] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Later entries shadow earlier ones.
    pub(crate) fn lookup(&self, x: &str) -> Option<(usize, &Type)> {
        self.vars.iter().enumerate().rev().find(|(_, (y, _))| y == x).map(|(i, (_, t))| (i, t))
    }

    /// Extension allowing shadowing, used under binders.
    pub fn extended(&self, x: &str, ty: &Type) -> Context {
        let mut vars = self.vars.clone();
        vars.push((x.to_string(), ty.clone()));
        Context { vars }
    }

    pub fn as_terms(&self) -> Vec<Term> {
        self.vars.iter().map(|(x, _)| Term::Var(x.clone())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequent {
    pub context: Context,
    pub antecedents: Vec<Formula>,
    pub consequent: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSymbol {
    pub args: Vec<Type>,
    pub result: Type,
    pub arrow: FinArrow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub args: Vec<Type>,
    pub subobject: Subobject,
}

/// Named objects, arrows and subobjects of one `FinSet^n`. A symbol with
/// argument types `A1, …, Ak` lives on `A1 × … × Ak` (left-nested; `1` when
/// `k = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    topos: ToposCtx,
    types: BTreeMap<String, FinObj>,
    functions: BTreeMap<String, FunctionSymbol>,
    relations: BTreeMap<String, RelationSymbol>,
}

impl Signature {
    pub fn new(topos: ToposCtx) -> Self {
        Signature { topos, types: BTreeMap::new(), functions: BTreeMap::new(), relations: BTreeMap::new() }
    }

    pub fn topos(&self) -> ToposCtx {
        self.topos
    }

    pub fn add_type(&mut self, name: &str, obj: FinObj) -> Result<(), LanguageError> {
        if obj.arity() != self.topos.arity() {
            return Err(ToposError::ArityMismatch { expected: self.topos.arity(), got: obj.arity() }.into());
        }
        if self.types.contains_key(name) {
            return Err(LanguageError::Duplicate(name.to_string()));
        }
        self.types.insert(name.to_string(), obj);
        Ok(())
    }

    fn symbol_free(&self, name: &str) -> Result<(), LanguageError> {
        if self.functions.contains_key(name) || self.relations.contains_key(name) {
            return Err(LanguageError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, args: Vec<Type>, result: Type, arrow: FinArrow) -> Result<(), LanguageError> {
        self.symbol_free(name)?;
        let bad = |msg: String| LanguageError::BadSymbol { name: name.to_string(), msg };
        let dom = self.denote_args(&args)?;
        let cod = self.denote(&result)?;
        if arrow.dom().sizes() != dom.sizes() || arrow.cod() != &cod {
            return Err(bad(format!("expected {} -> {}", dom.shape(), cod.shape())));
        }
        // the declared arrow may carry its own domain labels
        let arrow = FinArrow::new(dom, cod, arrow.maps().to_vec())?;
        self.functions.insert(name.to_string(), FunctionSymbol { args, result, arrow });
        Ok(())
    }

    pub fn add_relation(&mut self, name: &str, args: Vec<Type>, subobject: Subobject) -> Result<(), LanguageError> {
        self.symbol_free(name)?;
        let amb = self.denote_args(&args)?;
        if subobject.ambient().sizes() != amb.sizes() {
            return Err(LanguageError::BadSymbol { name: name.to_string(), msg: format!("expected a subobject of {}", amb.shape()) });
        }
        let subobject = Subobject::new(amb, subobject.masks().to_vec())?;
        self.relations.insert(name.to_string(), RelationSymbol { args, subobject });
        Ok(())
    }

    pub fn type_object(&self, name: &str) -> Option<&FinObj> {
        self.types.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSymbol> {
        self.functions.get(name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSymbol> {
        self.relations.get(name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.types.contains_key(name) || self.functions.contains_key(name) || self.relations.contains_key(name)
    }

    pub fn denote(&self, ty: &Type) -> Result<FinObj, LanguageError> {
        Ok(match ty {
            Type::Base(n) => self.types.get(n).cloned().ok_or_else(|| LanguageError::IllTyped(format!("unknown type `{n}`")))?,
            Type::Unit => FinObj::terminal(self.topos.arity()),
            Type::Prod(a, b) => FinObj::product(&self.denote(a)?, &self.denote(b)?)?,
            Type::Power(a) => power_object(&self.denote(a)?),
        })
    }

    pub fn denote_args(&self, tys: &[Type]) -> Result<FinObj, LanguageError> {
        match tys {
            [] => Ok(FinObj::terminal(self.topos.arity())),
            [first, rest @ ..] => rest.iter().try_fold(self.denote(first)?, |acc, t| Ok(FinObj::product(&acc, &self.denote(t)?)?)),
        }
    }

    pub fn denote_context(&self, ctx: &Context) -> Result<FinObj, LanguageError> {
        ctx.vars
            .iter()
            .try_fold(FinObj::terminal(self.topos.arity()), |acc, (_, t)| Ok(FinObj::product(&acc, &self.denote(t)?)?))
    }

    /// The type of `t` in `ctx`.
    pub fn type_of(&self, ctx: &Context, t: &Term) -> Result<Type, LanguageError> {
        let ill = |m: String| LanguageError::IllTyped(m);
        match t {
            Term::Var(x) => ctx.lookup(x).map(|(_, ty)| ty.clone()).ok_or_else(|| ill(format!("unbound variable `{x}`"))),
            Term::App(f, args) => {
                let sym = self.functions.get(f).ok_or_else(|| ill(format!("unknown function `{f}`")))?;
                if sym.args.len() != args.len() {
                    return Err(ill(format!("`{f}` takes {} arguments", sym.args.len())));
                }
                for (a, want) in args.iter().zip(&sym.args) {
                    let got = self.type_of(ctx, a)?;
                    if &got != want {
                        return Err(ill(format!("argument `{a}` of `{f}` has type {got}, expected {want}")));
                    }
                }
                Ok(sym.result.clone())
            }
            Term::Tuple(a, b) => Ok(Type::prod(self.type_of(ctx, a)?, self.type_of(ctx, b)?)),
            Term::Proj(s, i) => match self.type_of(ctx, s)? {
                Type::Prod(a, b) => Ok(if *i == 1 { *a } else { *b }),
                other => Err(ill(format!("projection from non-product type {other}"))),
            },
        }
    }

    pub fn check_formula(&self, ctx: &Context, f: &Formula) -> Result<(), LanguageError> {
        let ill = |m: String| LanguageError::IllTyped(m);
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Rel(r, args) => {
                let sym = self.relations.get(r).ok_or_else(|| ill(format!("unknown relation `{r}`")))?;
                if sym.args.len() != args.len() {
                    return Err(ill(format!("`{r}` takes {} arguments", sym.args.len())));
                }
                for (a, want) in args.iter().zip(&sym.args) {
                    let got = self.type_of(ctx, a)?;
                    if &got != want {
                        return Err(ill(format!("argument `{a}` of `{r}` has type {got}, expected {want}")));
                    }
                }
                Ok(())
            }
            Formula::Eq(a, b) => {
                let (ta, tb) = (self.type_of(ctx, a)?, self.type_of(ctx, b)?);
                if ta != tb {
                    return Err(ill(format!("`{a} = {b}` compares {ta} with {tb}")));
                }
                Ok(())
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                self.check_formula(ctx, a)?;
                self.check_formula(ctx, b)
            }
            Formula::Exists(x, ty, body) | Formula::Forall(x, ty, body) => {
                self.denote(ty)?;
                self.check_formula(&ctx.extended(x, ty), body)
            }
        }
    }

    pub fn check_sequent(&self, s: &Sequent) -> Result<(), LanguageError> {
        for (_, t) in &s.context.vars {
            self.denote(t)?;
        }
        for a in &s.antecedents {
            self.check_formula(&s.context, a)?;
        }
        self.check_formula(&s.context, &s.consequent)
    }
}

/// Componentwise power set, subsets ordered by bit pattern.
fn power_object(a: &FinObj) -> FinObj {
    let components = a
        .components()
        .iter()
        .map(|c| {
            (0u64..1 << c.len())
                .map(|bits| {
                    let members: Vec<&str> =
                        c.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, e)| e.as_str()).collect();
                    format!("{{{}}}", members.join(","))
                })
                .collect()
        })
        .collect();
    FinObj::new(components).expect("distinct subsets")
}

/// A signature plus the ε-symbols registered while checking rules.
#[derive(Clone, Debug)]
pub struct Session {
    pub signature: Signature,
    counter: usize,
}

impl Session {
    pub fn new(signature: Signature) -> Self {
        Session { signature, counter: 0 }
    }

    pub(crate) fn fresh_symbol(&mut self) -> String {
        loop {
            self.counter += 1;
            let name = format!("eps{}", self.counter);
            if !self.signature.has_symbol(&name) {
                return name;
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(n) => write!(f, "{n}"),
            Type::Unit => write!(f, "1"),
            Type::Prod(a, b) => match **b {
                Type::Prod(..) => write!(f, "{a}*({b})"),
                _ => write!(f, "{a}*{b}"),
            },
            Type::Power(a) => write!(f, "P({a})"),
        }
    }
}

fn comma_list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(g, args) => write!(f, "{g}({})", comma_list(args)),
            Term::Tuple(a, b) => write!(f, "({a}, {b})"),
            Term::Proj(t, i) => write!(f, "{t}.{i}"),
        }
    }
}

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let (own, open) = match self {
            Formula::Implies(..) => (1, prec > 1),
            Formula::Or(..) => (2, prec > 2),
            Formula::And(..) => (3, prec > 3),
            Formula::Exists(..) | Formula::Forall(..) => (0, prec > 0),
            _ => (4, false),
        };
        if open {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::False => write!(f, "false")?,
            Formula::Rel(r, args) => write!(f, "{r}({})", comma_list(args))?,
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Implies(a, b) => {
                a.fmt_prec(f, own + 1)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, own)?;
            }
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.fmt_prec(f, own)?;
                write!(f, "{}", if own == 2 { " | " } else { " & " })?;
                b.fmt_prec(f, own + 1)?;
            }
            Formula::Exists(x, ty, body) => {
                write!(f, "exists {x}:{ty}. ")?;
                body.fmt_prec(f, 0)?;
            }
            Formula::Forall(x, ty, body) => {
                write!(f, "forall {x}:{ty}. ")?;
                body.fmt_prec(f, 0)?;
            }
        }
        if open {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vars.iter().map(|(x, t)| format!("{x}:{t}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.context.is_empty() {
            write!(f, "{} ", self.context)?;
        }
        write!(f, "| ")?;
        if !self.antecedents.is_empty() {
            write!(f, "{} ", comma_list(&self.antecedents))?;
        }
        write!(f, "|- {}", self.consequent)
    }
}
