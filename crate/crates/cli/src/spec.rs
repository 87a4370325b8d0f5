//! Spec files: one statement per line, `#` starts a comment.
//!
//! ```text
//! set budget|depth|bound = N
//! topos arity=N                                    (before any object; default 1)
//! term NAME = PCA                                  (K S I pair fst snd compose succ nK, earlier terms)
//! carrier NAME = e1 e2 ...
//! predicate NAME on CARRIER = e: SET; ...          SET := all | [t, ...]; missing entries are []
//! per NAME on CARRIER = (e,f): SET; ...
//! prop NAME on PER = e: SET; ...
//! map NAME : PER -> PER = e->f, ...
//! object NAME = ([x, ...], ...)                    (one list per component; also a type)
//! arrow NAME : TYPE -> TYPE = ([x->y, ...], ...)
//! subobject NAME of TYPE = ([x, ...], ...)
//! relation NAME : T1, ..., Tk = SUBOBJECT          (name or literal over T1 × ... × Tk)
//! function NAME : T1, ..., Tk -> T = ARROW         (name or literal)
//! assert reduces PCA -> PCA
//! assert leq P Q | equal P Q
//! assert covers PER | epi MAP | hilbertian PROP | pullback PROP along MAP
//! assert epi|mono|iso|split ARROW | hilbertian SUBOBJECT
//! assert epsilon-topos|ac|partial-epsilon|characterization [bound=N]
//! assert epsilon SUBOBJECT over TYPE, TYPE
//! assert derivable SEQUENT
//! assert eps full|partial CTX | x:TYPE. FORMULA
//! assert choice a:A, b:B | FORMULA
//! assert eps-suite [bound=N] [mode=full|partial]
//! ```

use std::collections::{BTreeMap, HashMap};

use epswb_core::finite_topos::{FinArrow, FinObj, Subobject, ToposCtx};
use epswb_core::internal_language::{
    parse_context, parse_formula, parse_sequent, parse_type, Context, EpsMode, Formula, LanguageError, Sequent,
    Signature, Type,
};
use epswb_core::pca::{self, reduce, Budget, PcaError, PcaTerm};
use epswb_core::realizability::{Carrier, Predicate, RealizerSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings {
    pub budget: Option<u64>,
    pub depth: Option<usize>,
    pub bound: Option<usize>,
}

/// Eff objects, certified in file order before any assertion runs.
#[derive(Clone, Debug)]
pub enum Decl {
    Per { name: String, carrier: Carrier, rho: Predicate },
    Prop { name: String, per: String, values: Vec<RealizerSet> },
    Map { name: String, src: String, tgt: String, f: Vec<usize> },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Per { name, .. } | Decl::Prop { name, .. } | Decl::Map { name, .. } => name,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrowProperty {
    Epi,
    Mono,
    Iso,
    Split,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToposCheck {
    EpsilonTopos,
    Ac,
    PartialEpsilon,
    Characterization,
}

#[derive(Clone, Debug)]
pub enum Check {
    Reduces { term: PcaTerm, expected: PcaTerm },
    Leq { phi: Predicate, psi: Predicate },
    Equal { phi: Predicate, psi: Predicate },
    Covers { per: String },
    EffEpi { map: String },
    EffHilbertian { prop: String },
    Pullback { prop: String, map: String },
    Arrow { property: ArrowProperty, arrow: FinArrow },
    SubHilbertian { sub: Subobject },
    Topos { check: ToposCheck, bound: Option<usize> },
    Epsilon { gamma: FinObj, a: FinObj, phi: Subobject },
    Derivable { sequent: Sequent },
    Eps { mode: EpsMode, ctx: Context, x: String, ty: Type, psi: Formula },
    Choice { a: (String, Type), b: (String, Type), f: Formula },
    EpsSuite { bound: Option<usize>, mode: EpsMode },
}

#[derive(Clone, Debug)]
pub enum Stmt {
    Decl(Decl),
    Check { kind: String, check: Check },
}

#[derive(Clone, Debug)]
pub struct Item {
    pub line: usize,
    pub stmt: Stmt,
}

#[derive(Clone, Debug)]
pub struct SpecFile {
    pub settings: Settings,
    pub topos: ToposCtx,
    pub signature: Signature,
    pub items: Vec<Item>,
}

#[derive(Clone, Debug)]
enum Binding {
    Term(PcaTerm),
    Carrier(Carrier),
    Predicate(Predicate),
    Per(Carrier),
    Prop,
    Map,
    Object,
    Arrow(FinArrow),
    Subobject(Subobject),
    Symbol,
}

impl Binding {
    fn what(&self) -> &'static str {
        match self {
            Binding::Term(_) => "term",
            Binding::Carrier(_) => "carrier",
            Binding::Predicate(_) => "predicate",
            Binding::Per(_) => "per",
            Binding::Prop => "prop",
            Binding::Map => "map",
            Binding::Object => "object",
            Binding::Arrow(_) => "arrow",
            Binding::Subobject(_) => "subobject",
            Binding::Symbol => "symbol",
        }
    }
}

/// A position in one line.
struct Cur<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

type Res<T> = Result<T, SpecError>;

impl<'a> Cur<'a> {
    fn err_at(&self, pos: usize, msg: impl Into<String>) -> SpecError {
        SpecError::Parse { line: self.line, col: pos + 1, msg: msg.into() }
    }

    fn err(&self, msg: impl Into<String>) -> SpecError {
        self.err_at(self.pos, msg)
    }

    fn ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn at_end(&mut self) -> bool {
        self.ws();
        self.pos >= self.src.len()
    }

    fn peek(&mut self, tok: &str) -> bool {
        self.ws();
        self.src[self.pos..].starts_with(tok)
    }

    fn eat(&mut self, tok: &str) -> bool {
        let hit = self.peek(tok);
        if hit {
            self.pos += tok.len();
        }
        hit
    }

    fn expect(&mut self, tok: &str) -> Res<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    /// Letters, digits, `_`, and `-` when followed by a letter.
    fn word(&mut self) -> Option<&'a str> {
        self.ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut i = start;
        while i < bytes.len() {
            let c = bytes[i];
            let ok = c.is_ascii_alphanumeric()
                || c == b'_'
                || (c == b'-' && i > start && bytes.get(i + 1).is_some_and(|d| d.is_ascii_alphabetic()));
            if !ok {
                break;
            }
            i += 1;
        }
        (i > start).then(|| {
            self.pos = i;
            &self.src[start..i]
        })
    }

    fn ident(&mut self, what: &str) -> Res<&'a str> {
        self.word().ok_or_else(|| self.err(format!("expected {what}")))
    }

    fn number(&mut self) -> Res<u64> {
        let at = self.pos;
        let w = self.ident("a number")?;
        w.parse().map_err(|_| self.err_at(at, format!("`{w}` is not a number")))
    }

    /// Raw text up to the first top-level occurrence of one of `stops`
    /// (or the end). Returns the start offset and the trimmed text.
    fn until(&mut self, stops: &[&str]) -> (usize, &'a str) {
        self.ws();
        let start = self.pos;
        let mut depth = 0i32;
        let mut i = start;
        while i < self.src.len() {
            let rest = &self.src[i..];
            if depth == 0 && stops.iter().any(|s| rest.starts_with(s)) {
                break;
            }
            match rest.as_bytes()[0] {
                b'(' | b'[' => depth += 1,
                b')' | b']' => depth -= 1,
                _ => {}
            }
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
        self.pos = i;
        (start, self.src[start..i].trim_end())
    }

    /// An element label: a word or a parenthesized pair of labels.
    fn label(&mut self) -> Res<String> {
        if self.eat("(") {
            let a = self.label()?;
            self.expect(",")?;
            let b = self.label()?;
            self.expect(")")?;
            return Ok(format!("({a},{b})"));
        }
        Ok(self.ident("an element")?.to_string())
    }
}

fn lang_err(cur: &Cur, offset: usize, e: LanguageError) -> SpecError {
    match e {
        LanguageError::Syntax { line: 1, col, msg } | LanguageError::Type { line: 1, col, msg } => {
            cur.err_at(offset + col - 1, msg)
        }
        other => cur.err_at(offset, other.to_string()),
    }
}

fn pca_err(cur: &Cur, offset: usize, e: PcaError) -> SpecError {
    match e {
        PcaError::Parse { pos, msg } => cur.err_at(offset + pos, msg),
        other => cur.err_at(offset, other.to_string()),
    }
}

pub fn read(path: &std::path::Path) -> Result<SpecFile, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

/// Parses and resolves a whole file. Nothing is evaluated beyond
/// normalizing literal realizers.
pub fn parse(text: &str) -> Result<SpecFile, SpecError> {
    let mut p = FileParser {
        settings: Settings::default(),
        topos: ToposCtx::new(1).expect("arity 1"),
        topos_fixed: false,
        signature: Signature::new(ToposCtx::new(1).expect("arity 1")),
        names: HashMap::new(),
        items: Vec::new(),
    };
    for (k, raw) in text.lines().enumerate() {
        let src = raw.split('#').next().unwrap_or("");
        let mut cur = Cur { src, pos: 0, line: k + 1 };
        if cur.at_end() {
            continue;
        }
        p.statement(&mut cur)?;
        if !cur.at_end() {
            return Err(cur.err("unexpected trailing input"));
        }
    }
    Ok(SpecFile { settings: p.settings, topos: p.topos, signature: p.signature, items: p.items })
}

struct FileParser {
    settings: Settings,
    topos: ToposCtx,
    topos_fixed: bool,
    signature: Signature,
    names: HashMap<String, Binding>,
    items: Vec<Item>,
}

impl FileParser {
    fn bind(&mut self, cur: &Cur, at: usize, name: &str, b: Binding) -> Res<()> {
        if self.names.contains_key(name) {
            return Err(cur.err_at(at, format!("`{name}` is already defined")));
        }
        self.names.insert(name.to_string(), b);
        Ok(())
    }

    fn lookup(&self, cur: &mut Cur, want: &str) -> Res<(String, Binding)> {
        let name = cur.ident(&format!("a {want} name"))?;
        let at = cur.pos - name.len();
        let b = self.names.get(name).ok_or_else(|| cur.err_at(at, format!("unknown name `{name}`")))?;
        if b.what() != want {
            return Err(cur.err_at(at, format!("`{name}` is a {}, not a {want}", b.what())));
        }
        Ok((name.to_string(), b.clone()))
    }

    fn push(&mut self, line: usize, stmt: Stmt) {
        self.items.push(Item { line, stmt });
    }

    fn statement(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let kw = cur.ident("a statement")?;
        match kw {
            "set" => self.set(cur),
            "topos" => self.topos(cur),
            "term" => self.term_decl(cur),
            "carrier" => self.carrier(cur),
            "predicate" => self.predicate(cur),
            "per" => self.per(cur),
            "prop" => self.prop(cur),
            "map" => self.map(cur),
            "object" => self.object(cur),
            "arrow" => self.arrow(cur),
            "subobject" => self.subobject(cur),
            "relation" => self.relation(cur),
            "function" => self.function(cur),
            "assert" => self.assertion(cur),
            other => Err(cur.err_at(at, format!("unknown statement `{other}`"))),
        }
    }

    fn set(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let key = cur.ident("a setting")?;
        cur.eat("=");
        let n = cur.number()?;
        match key {
            "budget" if n > 0 => self.settings.budget = Some(n),
            "budget" => return Err(cur.err("the budget must be positive")),
            "depth" => self.settings.depth = Some(n as usize),
            "bound" => self.settings.bound = Some(n as usize),
            other => return Err(cur.err_at(at, format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    fn topos(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        if self.topos_fixed {
            return Err(cur.err_at(at, "the topos must be declared once, before any object"));
        }
        cur.expect("arity")?;
        cur.expect("=")?;
        let n = cur.number()? as usize;
        self.topos = ToposCtx::new(n).map_err(|e| cur.err_at(at, e.to_string()))?;
        self.signature = Signature::new(self.topos);
        self.topos_fixed = true;
        Ok(())
    }

    fn pca_term(&self, cur: &mut Cur, stops: &[&str]) -> Res<PcaTerm> {
        let (start, text) = cur.until(stops);
        if text.is_empty() {
            return Err(cur.err_at(start, "expected a term"));
        }
        let lookup = |w: &str| -> Option<PcaTerm> {
            match w {
                "I" => Some(pca::i()),
                "pair" => Some(pca::pair()),
                "fst" => Some(pca::fst()),
                "snd" => Some(pca::snd()),
                "compose" => Some(pca::compose()),
                "succ" => Some(pca::succ()),
                _ => match self.names.get(w) {
                    Some(Binding::Term(t)) => Some(t.clone()),
                    _ => w.strip_prefix('n').and_then(|k| k.parse().ok()).map(pca::numeral),
                },
            }
        };
        pca::parse_with(text, &lookup).map_err(|e| pca_err(cur, start, e))
    }

    fn term_decl(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("=")?;
        let t = self.pca_term(cur, &[])?;
        self.bind(cur, at, &name, Binding::Term(t))
    }

    fn realizer_set(&self, cur: &mut Cur, budget: Budget) -> Res<RealizerSet> {
        if cur.eat("all") {
            return Ok(RealizerSet::All);
        }
        cur.expect("[")?;
        let mut terms = Vec::new();
        while !cur.eat("]") {
            if !terms.is_empty() {
                cur.expect(",")?;
            }
            let at = cur.pos;
            let t = self.pca_term(cur, &[",", "]"])?;
            let nf = reduce(&t, budget)
                .normal_form()
                .cloned()
                .ok_or_else(|| cur.err_at(at, format!("`{t}` has no normal form within {} steps", budget.max_steps())))?;
            terms.push(nf);
            if cur.at_end() {
                return Err(cur.err("expected `]`"));
            }
        }
        Ok(RealizerSet::of(&terms))
    }

    /// `label: SET; ...` over `carrier`, unlisted elements empty.
    fn entries(&self, cur: &mut Cur, carrier: &Carrier) -> Res<Vec<RealizerSet>> {
        let budget = Budget::new(self.settings.budget.unwrap_or(Budget::DEFAULT_STEPS)).expect("positive");
        let mut values = vec![None; carrier.len()];
        loop {
            if cur.at_end() {
                break;
            }
            let at = cur.pos;
            let label = cur.label()?;
            let i = carrier.index_of(&label).map_err(|_| cur.err_at(at, format!("`{label}` is not in the carrier")))?;
            if values[i].is_some() {
                return Err(cur.err_at(at, format!("`{label}` is given twice")));
            }
            cur.expect(":")?;
            values[i] = Some(self.realizer_set(cur, budget)?);
            if !cur.eat(";") {
                break;
            }
        }
        Ok(values.into_iter().map(|v| v.unwrap_or_else(RealizerSet::empty)).collect())
    }

    fn carrier(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("=")?;
        let mut elems = Vec::new();
        while !cur.at_end() {
            elems.push(cur.label()?);
        }
        let c = Carrier::new(elems).map_err(|e| cur.err(e.to_string()))?;
        self.bind(cur, at, &name, Binding::Carrier(c))
    }

    fn predicate(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("on")?;
        let (_, Binding::Carrier(c)) = self.lookup(cur, "carrier")? else { unreachable!() };
        cur.expect("=")?;
        let values = self.entries(cur, &c)?;
        let pred = Predicate::new(c, values).expect("sized");
        self.bind(cur, at, &name, Binding::Predicate(pred))
    }

    fn per(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("on")?;
        let (_, Binding::Carrier(c)) = self.lookup(cur, "carrier")? else { unreachable!() };
        cur.expect("=")?;
        let square = Carrier::product(&c, &c);
        let rho = Predicate::new(square.clone(), self.entries(cur, &square)?).expect("sized");
        self.bind(cur, at, &name, Binding::Per(c.clone()))?;
        self.push(cur.line, Stmt::Decl(Decl::Per { name, carrier: c, rho }));
        Ok(())
    }

    fn prop(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("on")?;
        let (per, Binding::Per(c)) = self.lookup(cur, "per")? else { unreachable!() };
        cur.expect("=")?;
        let values = self.entries(cur, &c)?;
        self.bind(cur, at, &name, Binding::Prop)?;
        self.push(cur.line, Stmt::Decl(Decl::Prop { name, per, values }));
        Ok(())
    }

    fn map(&mut self, cur: &mut Cur) -> Res<()> {
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect(":")?;
        let (src, Binding::Per(sc)) = self.lookup(cur, "per")? else { unreachable!() };
        cur.expect("->")?;
        let (tgt, Binding::Per(tc)) = self.lookup(cur, "per")? else { unreachable!() };
        cur.expect("=")?;
        let mut f = vec![None; sc.len()];
        loop {
            let x_at = cur.pos;
            let x = cur.label()?;
            let i = sc.index_of(&x).map_err(|_| cur.err_at(x_at, format!("`{x}` is not in the source")))?;
            cur.expect("->")?;
            let y_at = cur.pos;
            let y = cur.label()?;
            let j = tc.index_of(&y).map_err(|_| cur.err_at(y_at, format!("`{y}` is not in the target")))?;
            if f[i].replace(j).is_some() {
                return Err(cur.err_at(x_at, format!("`{x}` is mapped twice")));
            }
            if !cur.eat(",") {
                break;
            }
        }
        let f = f
            .into_iter()
            .enumerate()
            .map(|(i, y)| y.ok_or_else(|| cur.err(format!("`{}` is not mapped", sc.elems()[i]))))
            .collect::<Res<Vec<_>>>()?;
        self.bind(cur, at, &name, Binding::Map)?;
        self.push(cur.line, Stmt::Decl(Decl::Map { name, src, tgt, f }));
        Ok(())
    }

    fn ty(&mut self, cur: &mut Cur, stops: &[&str]) -> Res<(Type, FinObj)> {
        let (start, text) = cur.until(stops);
        let ty = parse_type(&self.signature, text).map_err(|e| lang_err(cur, start, e))?;
        let obj = self.signature.denote(&ty).map_err(|e| lang_err(cur, start, e))?;
        Ok((ty, obj))
    }

    /// `(LIST, ...)` with one list per component.
    fn components<T>(&self, cur: &mut Cur, mut item: impl FnMut(&mut Cur) -> Res<T>) -> Res<Vec<Vec<T>>> {
        let at = cur.pos;
        cur.expect("(")?;
        let mut out = Vec::new();
        loop {
            cur.expect("[")?;
            let mut comp = Vec::new();
            while !cur.eat("]") {
                if !comp.is_empty() {
                    cur.expect(",")?;
                }
                comp.push(item(cur)?);
            }
            out.push(comp);
            if !cur.eat(",") {
                break;
            }
        }
        cur.expect(")")?;
        if out.len() != self.topos.arity() {
            return Err(cur.err_at(at, format!("expected {} components, found {}", self.topos.arity(), out.len())));
        }
        Ok(out)
    }

    fn fix_topos(&mut self) {
        self.topos_fixed = true;
    }

    fn object(&mut self, cur: &mut Cur) -> Res<()> {
        self.fix_topos();
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("=")?;
        let lit_at = cur.pos;
        let comps = self.components(cur, |c| c.label())?;
        let obj = FinObj::new(comps).map_err(|e| cur.err_at(lit_at, e.to_string()))?;
        self.bind(cur, at, &name, Binding::Object)?;
        self.signature.add_type(&name, obj).map_err(|e| lang_err(cur, at, e))
    }

    fn subobject_literal(&self, cur: &mut Cur, ambient: &FinObj) -> Res<Subobject> {
        let at = cur.pos;
        if !cur.peek("(") {
            let (_, Binding::Subobject(s)) = self.lookup(cur, "subobject")? else { unreachable!() };
            if s.ambient() != ambient {
                return Err(cur.err_at(at, format!("`{}` lives in {}, expected {}", cur.src[at..cur.pos].trim(), s.ambient(), ambient)));
            }
            return Ok(s);
        }
        let labels = self.components(cur, |c| c.label())?;
        Subobject::from_labels(ambient, &labels).map_err(|e| cur.err_at(at, e.to_string()))
    }

    fn arrow_literal(&self, cur: &mut Cur, dom: &FinObj, cod: &FinObj) -> Res<FinArrow> {
        let at = cur.pos;
        if !cur.peek("(") {
            let (_, Binding::Arrow(f)) = self.lookup(cur, "arrow")? else { unreachable!() };
            if f.dom().sizes() != dom.sizes() || f.cod() != cod {
                return Err(cur.err_at(at, "arrow has the wrong domain or codomain"));
            }
            return FinArrow::new(dom.clone(), cod.clone(), f.maps().to_vec()).map_err(|e| cur.err_at(at, e.to_string()));
        }
        let pairs = self.components(cur, |c| {
            let x = c.label()?;
            c.expect("->")?;
            Ok((x, c.label()?))
        })?;
        FinArrow::from_pairs(dom.clone(), cod.clone(), &pairs).map_err(|e| cur.err_at(at, e.to_string()))
    }

    fn arrow(&mut self, cur: &mut Cur) -> Res<()> {
        self.fix_topos();
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect(":")?;
        let (_, dom) = self.ty(cur, &["->"])?;
        cur.expect("->")?;
        let (_, cod) = self.ty(cur, &["="])?;
        cur.expect("=")?;
        let f = self.arrow_literal(cur, &dom, &cod)?;
        self.bind(cur, at, &name, Binding::Arrow(f))
    }

    fn subobject(&mut self, cur: &mut Cur) -> Res<()> {
        self.fix_topos();
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect("of")?;
        let (_, ambient) = self.ty(cur, &["="])?;
        cur.expect("=")?;
        let s = self.subobject_literal(cur, &ambient)?;
        self.bind(cur, at, &name, Binding::Subobject(s))
    }

    fn arg_types(&mut self, cur: &mut Cur, stops: &[&str]) -> Res<Vec<Type>> {
        let mut tys = Vec::new();
        loop {
            let mut all = vec![","];
            all.extend_from_slice(stops);
            tys.push(self.ty(cur, &all)?.0);
            if !cur.eat(",") {
                return Ok(tys);
            }
        }
    }

    fn relation(&mut self, cur: &mut Cur) -> Res<()> {
        self.fix_topos();
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect(":")?;
        let args = self.arg_types(cur, &["="])?;
        cur.expect("=")?;
        let ambient = self.signature.denote_args(&args).map_err(|e| lang_err(cur, at, e))?;
        let s = self.subobject_literal(cur, &ambient)?;
        self.bind(cur, at, &name, Binding::Symbol)?;
        self.signature.add_relation(&name, args, s).map_err(|e| lang_err(cur, at, e))
    }

    fn function(&mut self, cur: &mut Cur) -> Res<()> {
        self.fix_topos();
        let at = cur.pos;
        let name = cur.ident("a name")?.to_string();
        cur.expect(":")?;
        let args = if cur.peek("->") { Vec::new() } else { self.arg_types(cur, &["->"])? };
        cur.expect("->")?;
        let (result, cod) = self.ty(cur, &["="])?;
        cur.expect("=")?;
        let dom = self.signature.denote_args(&args).map_err(|e| lang_err(cur, at, e))?;
        let f = self.arrow_literal(cur, &dom, &cod)?;
        self.bind(cur, at, &name, Binding::Symbol)?;
        self.signature.add_function(&name, args, result, f).map_err(|e| lang_err(cur, at, e))
    }

    fn options(&self, cur: &mut Cur) -> Res<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        while !cur.at_end() {
            let at = cur.pos;
            let key = cur.ident("an option")?;
            cur.expect("=")?;
            let value = cur.ident("a value")?;
            if !matches!(key, "bound" | "mode") {
                return Err(cur.err_at(at, format!("unknown option `{key}`")));
            }
            out.insert(key.to_string(), value.to_string());
        }
        Ok(out)
    }

    fn bound(&self, cur: &Cur, opts: &BTreeMap<String, String>) -> Res<Option<usize>> {
        opts.get("bound")
            .map(|v| v.parse().map_err(|_| cur.err(format!("bad bound `{v}`"))))
            .transpose()
    }

    fn mode(&self, cur: &mut Cur) -> Res<EpsMode> {
        let at = cur.pos;
        match cur.ident("`full` or `partial`")? {
            "full" => Ok(EpsMode::Full),
            "partial" => Ok(EpsMode::Partial),
            other => Err(cur.err_at(at, format!("unknown mode `{other}`"))),
        }
    }

    fn context_before_bar(&mut self, cur: &mut Cur) -> Res<Context> {
        let (start, text) = cur.until(&["|"]);
        let ctx = parse_context(&self.signature, text).map_err(|e| lang_err(cur, start, e))?;
        cur.expect("|")?;
        Ok(ctx)
    }

    fn formula_rest(&mut self, cur: &mut Cur, ctx: &Context) -> Res<Formula> {
        let (start, text) = cur.until(&[]);
        parse_formula(&self.signature, ctx, text).map_err(|e| lang_err(cur, start, e))
    }

    fn assertion(&mut self, cur: &mut Cur) -> Res<()> {
        self.fix_topos();
        let at = cur.pos;
        let kind = cur.ident("an assertion")?.to_string();
        let check = match kind.as_str() {
            "reduces" => {
                let term = self.pca_term(cur, &["->"])?;
                cur.expect("->")?;
                Check::Reduces { term, expected: self.pca_term(cur, &[])? }
            }
            "leq" | "equal" => {
                let (_, Binding::Predicate(phi)) = self.lookup(cur, "predicate")? else { unreachable!() };
                let q_at = cur.pos;
                let (_, Binding::Predicate(psi)) = self.lookup(cur, "predicate")? else { unreachable!() };
                if phi.carrier() != psi.carrier() {
                    return Err(cur.err_at(q_at, "predicates live on different carriers"));
                }
                if kind == "leq" {
                    Check::Leq { phi, psi }
                } else {
                    Check::Equal { phi, psi }
                }
            }
            "covers" => Check::Covers { per: self.lookup(cur, "per")?.0 },
            "pullback" => {
                let prop = self.lookup(cur, "prop")?.0;
                cur.expect("along")?;
                Check::Pullback { prop, map: self.lookup(cur, "map")?.0 }
            }
            "epi" | "mono" | "iso" | "split" | "hilbertian" => {
                let n_at = cur.pos;
                let name = cur.ident("a name")?;
                let property = match kind.as_str() {
                    "epi" => ArrowProperty::Epi,
                    "mono" => ArrowProperty::Mono,
                    "iso" => ArrowProperty::Iso,
                    _ => ArrowProperty::Split,
                };
                match (kind.as_str(), self.names.get(name)) {
                    ("epi", Some(Binding::Map)) => Check::EffEpi { map: name.to_string() },
                    ("hilbertian", Some(Binding::Prop)) => Check::EffHilbertian { prop: name.to_string() },
                    ("hilbertian", Some(Binding::Subobject(s))) => Check::SubHilbertian { sub: s.clone() },
                    (k, Some(Binding::Arrow(f))) if k != "hilbertian" => Check::Arrow { property, arrow: f.clone() },
                    (_, Some(b)) => return Err(cur.err_at(n_at, format!("`{kind}` does not apply to a {}", b.what()))),
                    (_, None) => return Err(cur.err_at(n_at, format!("unknown name `{name}`"))),
                }
            }
            "epsilon-topos" | "ac" | "partial-epsilon" | "characterization" => {
                let check = match kind.as_str() {
                    "epsilon-topos" => ToposCheck::EpsilonTopos,
                    "ac" => ToposCheck::Ac,
                    "partial-epsilon" => ToposCheck::PartialEpsilon,
                    _ => ToposCheck::Characterization,
                };
                let opts = self.options(cur)?;
                if opts.contains_key("mode") {
                    return Err(cur.err_at(at, "`mode` applies to eps-suite only"));
                }
                Check::Topos { check, bound: self.bound(cur, &opts)? }
            }
            "epsilon" => {
                let (_, Binding::Subobject(phi)) = self.lookup(cur, "subobject")? else { unreachable!() };
                cur.expect("over")?;
                let (_, gamma) = self.ty(cur, &[","])?;
                cur.expect(",")?;
                let (_, a) = self.ty(cur, &[])?;
                let ga = FinObj::product(&gamma, &a).map_err(|e| cur.err(e.to_string()))?;
                if phi.ambient() != &ga {
                    return Err(cur.err(format!("the subobject lives in {}, not in {}", phi.ambient(), ga)));
                }
                Check::Epsilon { gamma, a, phi }
            }
            "derivable" => {
                let (start, text) = cur.until(&[]);
                let sequent = parse_sequent(&self.signature, text).map_err(|e| lang_err(cur, start, e))?;
                Check::Derivable { sequent }
            }
            "eps" => {
                let mode = self.mode(cur)?;
                let ctx = self.context_before_bar(cur)?;
                let x = cur.ident("a variable")?.to_string();
                cur.expect(":")?;
                let (ty, _) = self.ty(cur, &["."])?;
                cur.expect(".")?;
                let psi = self.formula_rest(cur, &ctx.extended(&x, &ty))?;
                Check::Eps { mode, ctx, x, ty, psi }
            }
            "choice" => {
                let c_at = cur.pos;
                let ctx = self.context_before_bar(cur)?;
                let [a, b] = ctx.vars() else {
                    return Err(cur.err_at(c_at, "expected exactly two variables `a:A, b:B`"));
                };
                let (a, b) = (a.clone(), b.clone());
                let f = self.formula_rest(cur, &ctx)?;
                Check::Choice { a, b, f }
            }
            "eps-suite" => {
                let opts = self.options(cur)?;
                let mode = match opts.get("mode").map(String::as_str) {
                    None | Some("full") => EpsMode::Full,
                    Some("partial") => EpsMode::Partial,
                    Some(other) => return Err(cur.err(format!("unknown mode `{other}`"))),
                };
                Check::EpsSuite { bound: self.bound(cur, &opts)?, mode }
            }
            other => return Err(cur.err_at(at, format!("unknown assertion `{other}`"))),
        };
        self.push(cur.line, Stmt::Check { kind, check });
        Ok(())
    }
}
