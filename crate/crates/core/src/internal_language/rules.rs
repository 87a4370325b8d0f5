//! The ε-form and ε-I rules, full and partial, and the derivation of AC.

use serde::{Deserialize, Serialize};

use super::{derivable, interpret, Context, Formula, LanguageError, Sequent, Session, Term, Type};
use crate::finite_topos::{
    check_hilbertian_instance, classify, synthesize_epsilon_full, EpsilonResult, FinArrow, HilbertianOutcome,
    HilbertianWitness, Subobject, ToposError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsMode {
    /// ε-terms may depend on the context.
    Full,
    /// Closed ε-terms only.
    Partial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsConstruction {
    Full(Box<EpsilonResult>),
    Partial(HilbertianWitness),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsTermResult {
    /// The fresh function symbol now in the session's signature.
    pub symbol: String,
    /// Its denotation `⟦Γ⟧ → ⟦A⟧`.
    pub term: FinArrow,
    /// `Γ | ∃x:A. ψ ⊢ ψ[ε(Γ)/x]`.
    pub sequent: Sequent,
    pub valid: bool,
    pub construction: EpsConstruction,
}

/// Builds `ε^x_ψ` for `Γ, x:A | ψ`, registers it and checks ε-I.
pub fn eps_rule(
    session: &mut Session,
    ctx: &Context,
    x: &str,
    a: &Type,
    psi: &Formula,
    mode: EpsMode,
) -> Result<EpsTermResult, LanguageError> {
    let sig = &session.signature;
    let inner = ctx.extended(x, a);
    sig.check_formula(&inner, psi)?;
    let a_obj = sig.denote(a)?;
    if a_obj.is_initial() {
        return Err(LanguageError::EmptyTypeRejected(a.to_string()));
    }
    if mode == EpsMode::Partial && !ctx.is_empty() {
        return Err(LanguageError::ModeViolation(ctx.to_string()));
    }
    if mode == EpsMode::Full {
        for (_, t) in ctx.vars() {
            if sig.denote(t)?.is_initial() {
                return Err(LanguageError::EmptyTypeRejected(t.to_string()));
            }
        }
    }
    if !classify(&FinArrow::to_terminal(&a_obj)).epi {
        return Err(LanguageError::PreconditionViolated(format!("{a} -> 1 is not epic")));
    }
    let phi = interpret(sig, &inner, psi)?;
    let arg_types: Vec<Type> = ctx.vars().iter().map(|(_, t)| t.clone()).collect();
    let dom = sig.denote_args(&arg_types)?;
    let (maps, construction) = match mode {
        EpsMode::Partial => {
            // 1 × A and A share their indexing
            let p = Subobject::new(a_obj.clone(), phi.masks().to_vec())?;
            match check_hilbertian_instance(&p)? {
                HilbertianOutcome::Witness(w) => (w.eps.maps().to_vec(), EpsConstruction::Partial(w)),
                HilbertianOutcome::Fail { tried } => {
                    return Err(LanguageError::PreconditionViolated(format!("none of {tried} points is an ε-term")))
                }
            }
        }
        EpsMode::Full => {
            let gamma = sig.denote_context(ctx)?;
            let r = synthesize_epsilon_full(&gamma, &a_obj, &phi).map_err(|e| match e {
                ToposError::EmptyType { .. } => LanguageError::EmptyTypeRejected(a.to_string()),
                other => other.into(),
            })?;
            (r.eps.maps().to_vec(), EpsConstruction::Full(Box::new(r)))
        }
    };
    let term = FinArrow::new(dom, a_obj, maps)?;
    let symbol = session.fresh_symbol();
    session.signature.add_function(&symbol, arg_types, a.clone(), term.clone())?;
    let eps_term = Term::App(symbol.clone(), ctx.as_terms());
    let sequent = Sequent {
        context: ctx.clone(),
        antecedents: vec![Formula::exists(x, a.clone(), psi.clone())],
        consequent: psi.subst(x, &eps_term),
    };
    let valid = derivable(&session.signature, &sequent)?.holds;
    Ok(EpsTermResult { symbol, term, sequent, valid, construction })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcWitness {
    pub eps: EpsTermResult,
    /// `⊢ ∀a:A. (∃b:B. F) → F[ε(a)/b]`.
    pub sequent: Sequent,
    pub valid: bool,
}

/// Derives choice for `a:A, b:B | F` from a full ε-term for `F`.
pub fn ac_witness(
    session: &mut Session,
    (a, a_ty): (&str, &Type),
    (b, b_ty): (&str, &Type),
    f: &Formula,
) -> Result<AcWitness, LanguageError> {
    let ctx = Context::new(vec![(a.to_string(), a_ty.clone())])?;
    let eps = eps_rule(session, &ctx, b, b_ty, f, EpsMode::Full)?;
    let chosen = f.subst(b, &Term::App(eps.symbol.clone(), vec![Term::var(a)]));
    let body = Formula::implies(Formula::exists(b, b_ty.clone(), f.clone()), chosen);
    let sequent = Sequent {
        context: Context::empty(),
        antecedents: Vec::new(),
        consequent: Formula::forall(a, a_ty.clone(), body),
    };
    let valid = derivable(&session.signature, &sequent)?.holds;
    Ok(AcWitness { eps, sequent, valid })
}
