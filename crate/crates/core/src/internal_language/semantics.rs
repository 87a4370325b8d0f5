//! Subobject semantics.

use serde::{Deserialize, Serialize};

use super::{Context, Formula, LanguageError, Sequent, Signature, Term};
use crate::finite_topos::{complement, image, preimage, FinArrow, FinObj, Subobject};

/// `⟦t⟧ : ⟦ctx⟧ → ⟦type of t⟧`.
pub fn term_arrow(sig: &Signature, ctx: &Context, t: &Term) -> Result<FinArrow, LanguageError> {
    let gamma = sig.denote_context(ctx)?;
    match t {
        Term::Var(x) => {
            let (k, _) = ctx.lookup(x).ok_or_else(|| LanguageError::IllTyped(format!("unbound variable `{x}`")))?;
            variable_arrow(sig, ctx, k)
        }
        Term::App(f, args) => {
            sig.type_of(ctx, t)?;
            let sym = sig.function(f).expect("checked");
            args_arrow(sig, ctx, &gamma, args)?.then(&sym.arrow).map_err(Into::into)
        }
        Term::Tuple(a, b) => Ok(FinArrow::pair(&term_arrow(sig, ctx, a)?, &term_arrow(sig, ctx, b)?)?),
        Term::Proj(s, i) => {
            let inner = term_arrow(sig, ctx, s)?;
            let super::Type::Prod(a, b) = sig.type_of(ctx, s)? else {
                return Err(LanguageError::IllTyped(format!("projection from `{s}`")));
            };
            let (p1, p2) = FinArrow::projections(&sig.denote(&a)?, &sig.denote(&b)?)?;
            Ok(inner.then(if *i == 1 { &p1 } else { &p2 })?)
        }
    }
}

/// Projection of `((1 × A1) × …) × An` onto `A(k+1)`.
fn variable_arrow(sig: &Signature, ctx: &Context, k: usize) -> Result<FinArrow, LanguageError> {
    let n = ctx.len();
    let mut arrow = FinArrow::identity(&sig.denote_context(ctx)?);
    for j in (k + 1..n).rev() {
        let prefix = Context { vars: ctx.vars[..j].to_vec() };
        let (p1, _) = FinArrow::projections(&sig.denote_context(&prefix)?, &sig.denote(&ctx.vars[j].1)?)?;
        arrow = arrow.then(&p1)?;
    }
    let prefix = Context { vars: ctx.vars[..k].to_vec() };
    let (_, p2) = FinArrow::projections(&sig.denote_context(&prefix)?, &sig.denote(&ctx.vars[k].1)?)?;
    Ok(arrow.then(&p2)?)
}

/// `⟨t1, …, tk⟩ : Γ → A1 × … × Ak` (left-nested, `!` when `k = 0`).
fn args_arrow(sig: &Signature, ctx: &Context, gamma: &FinObj, args: &[Term]) -> Result<FinArrow, LanguageError> {
    match args {
        [] => Ok(FinArrow::to_terminal(gamma)),
        [first, rest @ ..] => rest.iter().try_fold(term_arrow(sig, ctx, first)?, |acc, t| {
            Ok(FinArrow::pair(&acc, &term_arrow(sig, ctx, t)?)?)
        }),
    }
}

/// `⟦φ⟧ ↣ ⟦ctx⟧`.
pub fn interpret(sig: &Signature, ctx: &Context, phi: &Formula) -> Result<Subobject, LanguageError> {
    sig.check_formula(ctx, phi)?;
    interpret_checked(sig, ctx, phi)
}

fn interpret_checked(sig: &Signature, ctx: &Context, phi: &Formula) -> Result<Subobject, LanguageError> {
    let gamma = sig.denote_context(ctx)?;
    Ok(match phi {
        Formula::True => Subobject::full(&gamma),
        Formula::False => Subobject::empty(&gamma),
        Formula::Rel(r, args) => {
            let sym = sig.relation(r).expect("checked");
            preimage(&args_arrow(sig, ctx, &gamma, args)?, &sym.subobject)?
        }
        Formula::Eq(a, b) => {
            let (fa, fb) = (term_arrow(sig, ctx, a)?, term_arrow(sig, ctx, b)?);
            let masks = (0..gamma.arity())
                .map(|i| (0..gamma.sizes()[i]).map(|g| fa.apply(i, g) == fb.apply(i, g)).collect())
                .collect();
            Subobject::new(gamma, masks)?
        }
        Formula::And(a, b) => interpret_checked(sig, ctx, a)?.intersection(&interpret_checked(sig, ctx, b)?)?,
        Formula::Or(a, b) => interpret_checked(sig, ctx, a)?.union(&interpret_checked(sig, ctx, b)?)?,
        Formula::Implies(a, b) => interpret_checked(sig, ctx, a)?.implies(&interpret_checked(sig, ctx, b)?)?,
        Formula::Exists(x, ty, body) => exists_image(sig, &gamma, ty, &interpret_checked(sig, &ctx.extended(x, ty), body)?)?,
        Formula::Forall(x, ty, body) => {
            let inner = complement(&interpret_checked(sig, &ctx.extended(x, ty), body)?);
            complement(&exists_image(sig, &gamma, ty, &inner)?)
        }
    })
}

/// Image of `s ↣ Γ × A` along `π_Γ`.
fn exists_image(sig: &Signature, gamma: &FinObj, ty: &super::Type, s: &Subobject) -> Result<Subobject, LanguageError> {
    let (p1, _) = FinArrow::projections(gamma, &sig.denote(ty)?)?;
    let im = image(&s.inclusion().then(&p1)?);
    Ok(Subobject::new(gamma.clone(), im.masks().to_vec())?)
}

/// Outcome of the factoring test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub holds: bool,
    pub antecedent: Subobject,
    pub consequent: Subobject,
    /// The arrow through which the antecedent's inclusion factors.
    pub factoring: Option<FinArrow>,
}

pub fn derivable(sig: &Signature, s: &Sequent) -> Result<Derivation, LanguageError> {
    sig.check_sequent(s)?;
    let gamma = sig.denote_context(&s.context)?;
    let antecedent = s.antecedents.iter().try_fold(Subobject::full(&gamma), |acc, a| {
        Ok::<_, LanguageError>(acc.intersection(&interpret_checked(sig, &s.context, a)?)?)
    })?;
    let consequent = interpret_checked(sig, &s.context, &s.consequent)?;
    let holds = antecedent.is_subset(&consequent)?;
    let factoring = if holds {
        let maps = (0..gamma.arity())
            .map(|i| {
                let members = consequent.members(i);
                antecedent.members(i).iter().map(|g| members.binary_search(g).expect("subset")).collect()
            })
            .collect();
        Some(FinArrow::new(antecedent.object(), consequent.object(), maps)?)
    } else {
        None
    };
    Ok(Derivation { holds, antecedent, consequent, factoring })
}
