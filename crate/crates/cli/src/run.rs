//! Evaluation of a parsed spec file.

use std::collections::HashMap;
use std::time::Instant;

use epswb_core::eff::{
    bang, compare_pullback_along_graph, compare_with_image, graph, is_epi, make_per, make_prop, synthesize_epsilon,
    terminal, CertificateRecord, EffConfig, EffError, EpiOutcome, FunctionalRelation, Per, StrictRelationalProp,
};
use epswb_core::finite_topos::{
    characterization_sweep, check_epsilon_topos, check_hilbertian_instance, check_partial_epsilon, classify,
    find_section, objects_up_to, subobjects, synthesize_epsilon_full, CheckOutcome, FinArrow, FinObj,
    HilbertianOutcome, ToposCtx,
};
use epswb_core::internal_language::{
    ac_witness, derivable, eps_rule, Context, EpsMode, Formula, LanguageError, Session, Signature, Term, Type,
};
use epswb_core::pca::{reduce, Budget, EvalOutcome};
use epswb_core::realizability::{search_track, Predicate, RealizabilityError, SearchOutcome, Track, ValidityOutcome};
use epswb_core::Exec;
use serde_json::json;

use crate::report::{Record, Report, Verdict};
use crate::spec::{ArrowProperty, Check, Decl, SpecFile, Stmt, ToposCheck};

pub const DEFAULT_BOUND: usize = 3;

/// Command-line overrides; unset fields fall back to the file, then to
/// the defaults.
#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub budget: Option<u64>,
    pub depth: Option<usize>,
    pub bound: Option<usize>,
    pub exec: Exec,
}

struct Ctx<'a> {
    cfg: EffConfig,
    bound: usize,
    topos: ToposCtx,
    signature: &'a Signature,
    pers: HashMap<String, Per>,
    props: HashMap<String, StrictRelationalProp>,
    maps: HashMap<String, (FunctionalRelation, Vec<usize>, String)>,
}

type Outcome = (Verdict, Option<String>, Option<serde_json::Value>);

fn holds(w: impl Into<String>) -> Outcome {
    (Verdict::Holds, Some(w.into()), None)
}

fn fails(w: impl Into<String>) -> Outcome {
    (Verdict::Fails, Some(w.into()), None)
}

fn undetermined(w: impl Into<String>) -> Outcome {
    (Verdict::Undetermined, Some(w.into()), None)
}

fn certs(records: &[CertificateRecord]) -> serde_json::Value {
    serde_json::to_value(records).expect("plain data")
}

fn track_cert(obligation: &str, t: &Track) -> serde_json::Value {
    json!([{ "obligation": obligation, "track": t.witness.to_string(), "budget": t.budget.max_steps() }])
}

/// Definite refutations fail; anything inconclusive is undetermined.
fn eff_outcome(e: &EffError) -> Outcome {
    match e {
        EffError::Uncertified { outcome: ValidityOutcome::Refuted(w), obligation } => {
            fails(format!("`{obligation}` refuted at {w}"))
        }
        EffError::Uncertified { obligation, .. } => undetermined(format!("no certificate for `{obligation}`")),
        other => undetermined(other.to_string()),
    }
}

pub fn run(spec: &SpecFile, opts: &Options) -> Report {
    let budget = opts.budget.or(spec.settings.budget).unwrap_or(Budget::DEFAULT_STEPS).max(1);
    let cfg = EffConfig {
        depth: opts.depth.or(spec.settings.depth).unwrap_or(EffConfig::default().depth),
        budget: Budget::new(budget).expect("positive"),
        exec: opts.exec,
    };
    let mut ctx = Ctx {
        cfg,
        bound: opts.bound.or(spec.settings.bound).unwrap_or(DEFAULT_BOUND),
        topos: spec.topos,
        signature: &spec.signature,
        pers: HashMap::new(),
        props: HashMap::new(),
        maps: HashMap::new(),
    };
    let mut records: Vec<(usize, Record)> = Vec::new();
    let mut checks = Vec::new();
    for item in &spec.items {
        match &item.stmt {
            Stmt::Decl(d) => {
                let start = Instant::now();
                let (verdict, witness, certificate) = ctx.declare(d);
                let record = Record {
                    id: format!("line-{}", item.line),
                    kind: decl_kind(d).into(),
                    verdict,
                    witness,
                    certificate,
                    millis: start.elapsed().as_millis() as u64,
                };
                records.push((item.line, record));
            }
            Stmt::Check { kind, check } => checks.push((item.line, kind, check)),
        }
    }
    let ctx = &ctx;
    let results = opts.exec.map(&checks, |(line, kind, check)| {
        let start = Instant::now();
        let (verdict, witness, certificate) = ctx.check(check);
        let record = Record {
            id: format!("line-{line}"),
            kind: kind.to_string(),
            verdict,
            witness,
            certificate,
            millis: start.elapsed().as_millis() as u64,
        };
        (*line, record)
    });
    records.extend(results);
    records.sort_by_key(|(line, _)| *line);
    Report { records: records.into_iter().map(|(_, r)| r).collect() }
}

fn decl_kind(d: &Decl) -> &'static str {
    match d {
        Decl::Per { .. } => "per",
        Decl::Prop { .. } => "prop",
        Decl::Map { .. } => "map",
    }
}

impl Ctx<'_> {
    fn declare(&mut self, d: &Decl) -> Outcome {
        let cfg = self.cfg;
        match d {
            Decl::Per { name, carrier, rho } => match make_per(carrier, rho.clone(), &cfg) {
                Ok(per) => {
                    let c = certs(&per.certificates());
                    self.pers.insert(name.clone(), per);
                    (Verdict::Holds, Some(format!("{name} is a PER")), Some(c))
                }
                Err(e) => eff_outcome(&e),
            },
            Decl::Prop { name, per, values } => {
                let Some(base) = self.pers.get(per) else {
                    return undetermined(format!("`{per}` was not certified"));
                };
                let pred = Predicate::new(base.carrier().clone(), values.clone()).expect("sized by the parser");
                match make_prop(base, pred, &cfg) {
                    Ok(p) => {
                        let c = certs(&p.certificates());
                        self.props.insert(name.clone(), p);
                        (Verdict::Holds, Some(format!("{name} is strict and relational")), Some(c))
                    }
                    Err(e) => eff_outcome(&e),
                }
            }
            Decl::Map { name, src, tgt, f } => {
                let (Some(s), Some(t)) = (self.pers.get(src), self.pers.get(tgt)) else {
                    return undetermined(format!("`{src}` or `{tgt}` was not certified"));
                };
                match graph(f, s, t, &cfg) {
                    Ok(g) => {
                        let c = certs(&g.certificates());
                        self.maps.insert(name.clone(), (g, f.clone(), src.clone()));
                        (Verdict::Holds, Some(format!("{name} is a morphism")), Some(c))
                    }
                    Err(e) => eff_outcome(&e),
                }
            }
        }
    }

    fn check(&self, c: &Check) -> Outcome {
        let cfg = &self.cfg;
        match c {
            Check::Reduces { term, expected } => {
                match (reduce(term, cfg.budget), reduce(expected, cfg.budget)) {
                    (EvalOutcome::NormalForm(a), EvalOutcome::NormalForm(b)) if a == b => holds(format!("{a}")),
                    (EvalOutcome::NormalForm(a), EvalOutcome::NormalForm(b)) => fails(format!("{a} is not {b}")),
                    _ => undetermined(format!("no normal form within {} steps", cfg.budget.max_steps())),
                }
            }
            Check::Leq { phi, psi } => self.leq(phi, psi, "leq"),
            Check::Equal { phi, psi } => {
                let there = self.leq(phi, psi, "leq");
                let back = self.leq(psi, phi, "geq");
                match (&there.0, &back.0) {
                    (Verdict::Holds, Verdict::Holds) => {
                        let mut c = there.2.unwrap_or_default();
                        if let (Some(a), Some(b)) = (c.as_array_mut(), back.2) {
                            a.extend(b.as_array().cloned().unwrap_or_default());
                        }
                        (Verdict::Holds, Some("equal in the poset reflection".into()), Some(c))
                    }
                    (Verdict::Fails, _) => there,
                    (_, Verdict::Fails) => back,
                    (Verdict::Undetermined, _) => there,
                    _ => back,
                }
            }
            Check::Covers { per } => match self.pers.get(per) {
                None => undetermined(format!("`{per}` was not certified")),
                Some(p) => match bang(p, cfg) {
                    Ok(b) => self.epi(&b),
                    Err(e) => eff_outcome(&e),
                },
            },
            Check::EffEpi { map } => match self.maps.get(map) {
                None => undetermined(format!("`{map}` was not certified")),
                Some((g, _, _)) => self.epi(g),
            },
            Check::EffHilbertian { prop } => match self.props.get(prop) {
                None => undetermined(format!("`{prop}` was not certified")),
                Some(p) => self.eff_hilbertian(p),
            },
            Check::Pullback { prop, map } => {
                let (Some(p), Some((g, f, src))) = (self.props.get(prop), self.maps.get(map)) else {
                    return undetermined(format!("`{prop}` or `{map}` was not certified"));
                };
                if g.target() != p.base() {
                    return fails(format!("`{map}` does not land in the base of `{prop}`"));
                }
                let source = self.pers.get(src).expect("declared");
                match compare_pullback_along_graph(p, f, source, cfg) {
                    Ok(cmp) => match cmp.equality {
                        Some(eq) => {
                            let on_point = source.same_object(&terminal());
                            let form = if on_point { "P∘f" } else { "P∘f ∧ ρ" };
                            let c = json!([
                                { "obligation": "pullback.forward", "track": eq.forward.witness.to_string(), "budget": eq.forward.budget.max_steps() },
                                { "obligation": "pullback.backward", "track": eq.backward.witness.to_string(), "budget": eq.backward.budget.max_steps() },
                            ]);
                            (Verdict::Holds, Some(format!("pullback ≐ {form}: {}", cmp.expected)), Some(c))
                        }
                        None => undetermined(format!("no tracks for pullback ≐ {}", cmp.expected)),
                    },
                    Err(e) => eff_outcome(&e),
                }
            }
            Check::Arrow { property, arrow } => self.arrow(*property, arrow),
            Check::SubHilbertian { sub } => match check_hilbertian_instance(sub) {
                Ok(HilbertianOutcome::Witness(w)) => holds(format!("ε = {}", w.eps)),
                Ok(HilbertianOutcome::Fail { tried }) => fails(format!("none of {tried} points works")),
                Err(e) => fails(e.to_string()),
            },
            Check::Topos { check, bound } => self.topos_check(*check, bound.unwrap_or(self.bound)),
            Check::Epsilon { gamma, a, phi } => match synthesize_epsilon_full(gamma, a, phi) {
                Ok(r) if r.triangle_commutes && r.square_is_pullback => holds(format!("ε = {}", r.eps)),
                Ok(r) => fails(format!("ε = {} does not give a pullback square", r.eps)),
                Err(e) => fails(e.to_string()),
            },
            Check::Derivable { sequent } => match derivable(self.signature, sequent) {
                Ok(d) if d.holds => holds(format!("{sequent}")),
                Ok(d) => {
                    let missing = d.antecedent.implies(&d.consequent).map(|s| epswb_core::finite_topos::complement(&s));
                    fails(format!("{sequent}: counterexamples {}", missing.map(|m| m.to_string()).unwrap_or_default()))
                }
                Err(e) => fails(e.to_string()),
            },
            Check::Eps { mode, ctx, x, ty, psi } => {
                let mut session = Session::new(self.signature.clone());
                match eps_rule(&mut session, ctx, x, ty, psi, *mode) {
                    Ok(r) if r.valid => holds(format!("{} = {}; {}", r.symbol, r.term, r.sequent)),
                    Ok(r) => fails(format!("{} not derivable", r.sequent)),
                    Err(e) => fails(e.to_string()),
                }
            }
            Check::Choice { a, b, f } => {
                let mut session = Session::new(self.signature.clone());
                match ac_witness(&mut session, (&a.0, &a.1), (&b.0, &b.1), f) {
                    Ok(w) if w.valid => holds(format!("{} = {}; {}", w.eps.symbol, w.eps.term, w.sequent)),
                    Ok(w) => fails(format!("{} not derivable", w.sequent)),
                    Err(e) => fails(e.to_string()),
                }
            }
            Check::EpsSuite { bound, mode } => self.eps_suite(bound.unwrap_or(self.bound), *mode),
        }
    }

    fn leq(&self, phi: &Predicate, psi: &Predicate, obligation: &str) -> Outcome {
        match search_track(phi, psi, self.cfg.depth, self.cfg.budget) {
            Ok(SearchOutcome::Found(t)) => (Verdict::Holds, Some(format!("tracked by {}", t.witness)), Some(track_cert(obligation, &t))),
            Ok(SearchOutcome::Refuted { element }) => fails(format!("no track can exist: {element}")),
            Ok(SearchOutcome::NotFound { undecided }) => {
                undetermined(format!("no track at depth {} ({undecided} undecided candidates)", self.cfg.depth))
            }
            Err(RealizabilityError::CarrierMismatch) => fails("predicates live on different carriers"),
            Err(e) => fails(e.to_string()),
        }
    }

    fn epi(&self, f: &FunctionalRelation) -> Outcome {
        match is_epi(f, &self.cfg) {
            EpiOutcome::Epi(t) => (Verdict::Holds, Some(format!("tracked by {}", t.witness)), Some(track_cert("epi", &t))),
            EpiOutcome::NotEpi { element } => fails(format!("nothing covers {element}")),
            EpiOutcome::NotFound => undetermined(format!("no epi track at depth {}", self.cfg.depth)),
        }
    }

    fn eff_hilbertian(&self, p: &StrictRelationalProp) -> Outcome {
        match bang(p.base(), &self.cfg).map(|b| is_epi(&b, &self.cfg)) {
            Ok(EpiOutcome::NotEpi { element }) => return fails(format!("the arrow to 1 is not epic at {element}")),
            Ok(EpiOutcome::NotFound) => return undetermined("the arrow to 1 is not shown epic"),
            Ok(EpiOutcome::Epi(_)) => {}
            Err(e) => return eff_outcome(&e),
        }
        match synthesize_epsilon(p, &self.cfg) {
            Ok(cert) if cert.recheck() => {
                let image = match compare_with_image(&cert, p, &self.cfg) {
                    Ok(Some(_)) => ", equal to the image of the restriction",
                    _ => "",
                };
                let c = certs(&cert.certificates());
                (Verdict::Holds, Some(format!("ε = Γ({}), P(ε) ≐ {}{image}", cert.point_label, cert.union)), Some(c))
            }
            Ok(_) => undetermined("certificate failed re-verification"),
            Err(e) => eff_outcome(&e),
        }
    }

    fn arrow(&self, property: ArrowProperty, f: &FinArrow) -> Outcome {
        let c = classify(f);
        let (ok, name) = match property {
            ArrowProperty::Epi => (c.epi, "epic"),
            ArrowProperty::Mono => (c.mono, "monic"),
            ArrowProperty::Iso => (c.iso, "an iso"),
            ArrowProperty::Split => match find_section(f) {
                Some(s) => return holds(format!("section {s}")),
                None => (false, "split"),
            },
        };
        if ok {
            holds(format!("{f} is {name}"))
        } else {
            fails(format!("{f} is not {name}"))
        }
    }

    fn topos_check(&self, check: ToposCheck, bound: usize) -> Outcome {
        let counter = |o: &CheckOutcome| match o {
            CheckOutcome::Holds { checked } => Ok(*checked),
            CheckOutcome::Counterexample { object, arrow } => {
                Err(format!("{} : {} -> {} is not epic or split ({arrow})", object.shape(), arrow.dom().shape(), arrow.cod().shape()))
            }
        };
        let exec = self.cfg.exec;
        match check {
            ToposCheck::EpsilonTopos => {
                let v = check_epsilon_topos(self.topos, bound, exec);
                match (counter(&v.ac), counter(&v.epi_to_terminal)) {
                    (Ok(n), Ok(m)) => holds(format!("bound {bound}: {n} epis split, {m} objects checked")),
                    (Err(w), _) => fails(format!("AC: {w}")),
                    (Ok(_), Err(_)) => {
                        let CheckOutcome::Counterexample { object, arrow } = &v.epi_to_terminal else { unreachable!() };
                        fails(format!("{} -> {} is not epic", object.shape(), arrow.cod().shape()))
                    }
                }
            }
            ToposCheck::Ac => match counter(&check_epsilon_topos(self.topos, bound, exec).ac) {
                Ok(n) => holds(format!("bound {bound}: {n} epis split")),
                Err(w) => fails(w),
            },
            ToposCheck::PartialEpsilon => match check_partial_epsilon(self.topos, bound, exec) {
                CheckOutcome::Holds { checked } => holds(format!("bound {bound}: {checked} objects checked")),
                CheckOutcome::Counterexample { object, arrow } => {
                    fails(format!("{} -> {} is not epic", object.shape(), arrow.cod().shape()))
                }
            },
            ToposCheck::Characterization => {
                let r = characterization_sweep(self.topos, bound, exec);
                match r.failures.first() {
                    None => holds(format!("bound {bound}: {} pullback squares", r.instances)),
                    Some(f) => fails(format!(
                        "{} of {} fail, first Γ={} A={}: {}",
                        r.failures.len(),
                        r.instances,
                        f.gamma.shape(),
                        f.a.shape(),
                        f.reason
                    )),
                }
            }
        }
    }

    fn eps_suite(&self, bound: usize, mode: EpsMode) -> Outcome {
        let objs = objects_up_to(self.topos.arity(), bound);
        let covering: Vec<&FinObj> =
            objs.iter().filter(|a| !a.is_initial() && classify(&FinArrow::to_terminal(a)).epi).collect();
        let gammas: Vec<Option<&FinObj>> = match mode {
            EpsMode::Full => objs.iter().filter(|g| !g.is_initial()).map(Some).collect(),
            EpsMode::Partial => vec![None],
        };
        let mut checked = 0;
        for g in &gammas {
            for a in &covering {
                let ambient = match g {
                    Some(g) => FinObj::product(g, a).expect("same arity"),
                    None => (*a).clone(),
                };
                for phi in subobjects(&ambient) {
                    let mut sig = Signature::new(self.topos);
                    sig.add_type("A", (*a).clone()).expect("fresh");
                    let (ctx, args, vars) = match g {
                        Some(g) => {
                            sig.add_type("G", (*g).clone()).expect("fresh");
                            let ctx = Context::new(vec![("g".into(), Type::base("G"))]).expect("one variable");
                            (ctx, vec![Type::base("G"), Type::base("A")], vec![Term::var("g"), Term::var("x")])
                        }
                        None => (Context::empty(), vec![Type::base("A")], vec![Term::var("x")]),
                    };
                    sig.add_relation("phi", args, phi).expect("sized");
                    let psi = Formula::Rel("phi".into(), vars);
                    let mut session = Session::new(sig);
                    match eps_rule(&mut session, &ctx, "x", &Type::base("A"), &psi, mode) {
                        Ok(r) if r.valid => checked += 1,
                        Ok(r) => return fails(format!("{} not derivable", r.sequent)),
                        Err(LanguageError::EmptyTypeRejected(_)) => {}
                        Err(e) => return fails(e.to_string()),
                    }
                }
            }
        }
        holds(format!("bound {bound}: {checked} ε-I instances valid"))
    }
}
