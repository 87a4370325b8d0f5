//! Concrete syntax. Type checking happens while parsing, so errors point
//! at the offending token.
//!
//! ```text
//! type    := prod ; prod := atom ('*' atom)* ; atom := NAME | '1' | 'P' '(' type ')' | '(' type ')'
//! term    := primary ('.' ('1'|'2'))*
//! primary := NAME | NAME '(' terms ')' | '(' term ',' term ')' | '(' term ')'
//! formula := quant | imp ; imp := or ('->' imp)? ; or := and ('|' and)* ; and := unit ('&' unit)*
//! quant   := ('exists'|'forall') NAME ':' type '.' formula
//! unit    := 'true' | 'false' | REL '(' terms ')' | term '=' term | '(' formula ')' | quant
//! sequent := [ctx '|'] [formula (',' formula)*] '|-' formula
//! ```

use super::{Context, Formula, LanguageError, Sequent, Signature, Term, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Num(u32),
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Bar,
    Turnstile,
    Amp,
    Arrow,
    Eq,
    Star,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, LanguageError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '&' => Tok::Amp,
            '=' => Tok::Eq,
            '*' => Tok::Star,
            '|' if bytes.get(i + 1) == Some(&b'-') => {
                i += 1;
                Tok::Turnstile
            }
            '|' => Tok::Bar,
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            c if c.is_ascii_digit() => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..=i].parse().map_err(|_| syntax(src, start, "number too large"))?;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_' || bytes[i + 1] == b'\'') {
                    i += 1;
                }
                Tok::Name(src[start..=i].to_string())
            }
            _ => return Err(syntax(src, start, &format!("unexpected character `{c}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |k| k + 1) + 1;
    (line, col)
}

fn syntax(src: &str, pos: usize, msg: &str) -> LanguageError {
    let (line, col) = line_col(src, pos);
    LanguageError::Syntax { line, col, msg: msg.to_string() }
}

const KEYWORDS: [&str; 4] = ["true", "false", "exists", "forall"];

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
}

type R<T> = Result<T, LanguageError>;

impl<'a> Parser<'a> {
    fn new(sig: &'a Signature, src: &'a str) -> R<Self> {
        Ok(Parser { src, toks: lex(src)?, pos: 0, sig })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |t| t.1)
    }

    fn err(&self, msg: &str) -> LanguageError {
        syntax(self.src, self.offset(), msg)
    }

    fn type_err_at(&self, at: usize, e: LanguageError) -> LanguageError {
        let (line, col) = line_col(self.src, at);
        let msg = match e {
            LanguageError::IllTyped(m) => m,
            other => other.to_string(),
        };
        LanguageError::Type { line, col, msg }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> R<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn name(&mut self) -> R<String> {
        match self.peek() {
            Some(Tok::Name(n)) if !KEYWORDS.contains(&n.as_str()) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn finish(&self) -> R<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn ty(&mut self) -> R<Type> {
        let mut t = self.ty_atom()?;
        while self.eat(&Tok::Star) {
            t = Type::prod(t, self.ty_atom()?);
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> R<Type> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(1)) => {
                self.pos += 1;
                Ok(Type::Unit)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Name(n)) if n == "P" && self.peek_at(1) == Some(&Tok::LParen) => {
                self.pos += 2;
                let t = self.ty()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Type::Power(Box::new(t)))
            }
            Some(Tok::Name(_)) => {
                let n = self.name()?;
                let t = Type::Base(n);
                self.sig.denote(&t).map_err(|e| self.type_err_at(at, e))?;
                Ok(t)
            }
            _ => Err(self.err("expected a type")),
        }
    }

    fn context(&mut self) -> R<Context> {
        let mut vars = Vec::new();
        loop {
            let at = self.offset();
            let x = self.name()?;
            self.expect(&Tok::Colon, "`:`")?;
            let t = self.ty()?;
            if vars.iter().any(|(y, _): &(String, Type)| *y == x) {
                return Err(self.type_err_at(at, LanguageError::IllTyped(format!("variable `{x}` declared twice"))));
            }
            vars.push((x, t));
            if !self.eat(&Tok::Comma) {
                return Ok(Context { vars });
            }
        }
    }

    fn terms_in_parens(&mut self, ctx: &Context) -> R<Vec<Term>> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term(ctx)?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(&Tok::Comma, "`,` or `)`")?;
        }
    }

    /// Parses a term and checks it has a type in `ctx`.
    fn term(&mut self, ctx: &Context) -> R<Term> {
        let at = self.offset();
        let mut t = self.term_primary(ctx)?;
        while self.peek() == Some(&Tok::Dot) && matches!(self.peek_at(1), Some(Tok::Num(1 | 2))) {
            let Some(Tok::Num(i)) = self.peek_at(1).cloned() else { unreachable!() };
            self.pos += 2;
            t = Term::Proj(Box::new(t), i as u8);
            self.sig.type_of(ctx, &t).map_err(|e| self.type_err_at(at, e))?;
        }
        Ok(t)
    }

    fn term_primary(&mut self, ctx: &Context) -> R<Term> {
        let at = self.offset();
        if self.eat(&Tok::LParen) {
            let a = self.term(ctx)?;
            if self.eat(&Tok::RParen) {
                return Ok(a);
            }
            self.expect(&Tok::Comma, "`,` or `)`")?;
            let b = self.term(ctx)?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(Term::Tuple(Box::new(a), Box::new(b)));
        }
        let n = self.name()?;
        let t = if self.peek() == Some(&Tok::LParen) {
            Term::App(n, self.terms_in_parens(ctx)?)
        } else {
            Term::Var(n)
        };
        self.sig.type_of(ctx, &t).map_err(|e| self.type_err_at(at, e))?;
        Ok(t)
    }

    fn formula(&mut self, ctx: &Context) -> R<Formula> {
        if let Some(Tok::Name(k)) = self.peek() {
            if k == "exists" || k == "forall" {
                return self.quantified(ctx);
            }
        }
        let a = self.disjunction(ctx)?;
        if self.eat(&Tok::Arrow) {
            return Ok(Formula::implies(a, self.formula(ctx)?));
        }
        Ok(a)
    }

    fn quantified(&mut self, ctx: &Context) -> R<Formula> {
        let Some(Tok::Name(k)) = self.peek().cloned() else { unreachable!() };
        self.pos += 1;
        let x = self.name()?;
        self.expect(&Tok::Colon, "`:`")?;
        let ty = self.ty()?;
        self.expect(&Tok::Dot, "`.`")?;
        let body = self.formula(&ctx.extended(&x, &ty))?;
        Ok(if k == "exists" { Formula::exists(&x, ty, body) } else { Formula::forall(&x, ty, body) })
    }

    fn disjunction(&mut self, ctx: &Context) -> R<Formula> {
        let mut f = self.conjunction(ctx)?;
        // a `|` directly followed by `-` was lexed as a turnstile already
        while self.eat(&Tok::Bar) {
            f = Formula::or(f, self.conjunction(ctx)?);
        }
        Ok(f)
    }

    fn conjunction(&mut self, ctx: &Context) -> R<Formula> {
        let mut f = self.unit(ctx)?;
        while self.eat(&Tok::Amp) {
            f = Formula::and(f, self.unit(ctx)?);
        }
        Ok(f)
    }

    fn unit(&mut self, ctx: &Context) -> R<Formula> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Name(k)) if k == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Name(k)) if k == "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Name(k)) if k == "exists" || k == "forall" => self.quantified(ctx),
            Some(Tok::Name(r)) if self.sig.relation(&r).is_some() => {
                self.pos += 1;
                let args = self.terms_in_parens(ctx)?;
                let f = Formula::Rel(r, args);
                self.sig.check_formula(ctx, &f).map_err(|e| self.type_err_at(at, e))?;
                Ok(f)
            }
            Some(Tok::LParen) => {
                let save = self.pos;
                self.pos += 1;
                if let Ok(f) = self.formula(ctx) {
                    if self.eat(&Tok::RParen) && self.peek() != Some(&Tok::Eq) && self.peek() != Some(&Tok::Dot) {
                        return Ok(f);
                    }
                }
                self.pos = save;
                self.equation(ctx)
            }
            _ => self.equation(ctx),
        }
    }

    fn equation(&mut self, ctx: &Context) -> R<Formula> {
        let at = self.offset();
        let a = self.term(ctx)?;
        self.expect(&Tok::Eq, "`=`")?;
        let b = self.term(ctx)?;
        let f = Formula::Eq(a, b);
        self.sig.check_formula(ctx, &f).map_err(|e| self.type_err_at(at, e))?;
        Ok(f)
    }

    fn sequent(&mut self) -> R<Sequent> {
        let has_context = matches!(self.peek(), Some(Tok::Name(_))) && self.peek_at(1) == Some(&Tok::Colon);
        let context = if has_context { self.context()? } else { Context::empty() };
        if has_context {
            self.expect(&Tok::Bar, "`|` after the context")?;
        } else {
            self.eat(&Tok::Bar);
        }
        let mut antecedents = Vec::new();
        if !self.eat(&Tok::Turnstile) {
            loop {
                antecedents.push(self.formula(&context)?);
                if self.eat(&Tok::Turnstile) {
                    break;
                }
                self.expect(&Tok::Comma, "`,` or `|-`")?;
            }
        }
        let consequent = self.formula(&context)?;
        Ok(Sequent { context, antecedents, consequent })
    }
}

pub fn parse_type(sig: &Signature, text: &str) -> Result<Type, LanguageError> {
    let mut p = Parser::new(sig, text)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

/// Comma-separated `x:A` declarations; blank text is the empty context.
pub fn parse_context(sig: &Signature, text: &str) -> Result<Context, LanguageError> {
    let mut p = Parser::new(sig, text)?;
    if p.at_end() {
        return Ok(Context::empty());
    }
    let c = p.context()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_term(sig: &Signature, ctx: &Context, text: &str) -> Result<Term, LanguageError> {
    let mut p = Parser::new(sig, text)?;
    let t = p.term(ctx)?;
    p.finish()?;
    Ok(t)
}

pub fn parse_formula(sig: &Signature, ctx: &Context, text: &str) -> Result<Formula, LanguageError> {
    let mut p = Parser::new(sig, text)?;
    let f = p.formula(ctx)?;
    p.finish()?;
    Ok(f)
}

pub fn parse_sequent(sig: &Signature, text: &str) -> Result<Sequent, LanguageError> {
    let mut p = Parser::new(sig, text)?;
    let s = p.sequent()?;
    p.finish()?;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parsed {
    Sequent(Sequent),
    Formula(Formula),
    Term(Term),
}

/// A sequent if the text contains `|-`, otherwise a closed formula, otherwise
/// a closed term.
pub fn parse(sig: &Signature, text: &str) -> Result<Parsed, LanguageError> {
    if lex(text)?.iter().any(|(t, _)| *t == Tok::Turnstile) {
        return parse_sequent(sig, text).map(Parsed::Sequent);
    }
    let ctx = Context::empty();
    match parse_formula(sig, &ctx, text) {
        Ok(f) => Ok(Parsed::Formula(f)),
        Err(e) => parse_term(sig, &ctx, text).map(Parsed::Term).map_err(|_| e),
    }
}
