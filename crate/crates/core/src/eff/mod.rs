//! The effective topos at desk scale: objects are finite carriers with a
//! realizer-valued partial equivalence relation, morphisms are functional
//! relations, subobjects are strict relational propositions.
//!
//! Every constructed value carries the tracks that certify its defining
//! sentences. Certificates are searched for once, stored, and can be
//! re-checked with `recheck`.

pub mod suite;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::pca::{Budget, PcaTerm};
use crate::realizability::{
    meet_sets, poset_equal_with, search_cases, valid_with, Carrier, PosetCertificate, Predicate, RealizabilityError,
    RealizerSet, SearchOutcome, Sentence, Track, ValidityOutcome,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EffError {
    #[error("no certificate for `{obligation}`: {outcome:?}")]
    Uncertified { obligation: String, outcome: ValidityOutcome },
    #[error("the arrow to the terminal object is not shown epic: {0}")]
    NotEpi(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Realizability(#[from] RealizabilityError),
}

/// Search parameters shared by all certification steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EffConfig {
    pub depth: usize,
    pub budget: Budget,
    pub exec: Exec,
}

impl Default for EffConfig {
    fn default() -> Self {
        EffConfig { depth: 4, budget: Budget::default(), exec: Exec::default() }
    }
}

/// One exported certificate: which sentence, which track, which budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub obligation: String,
    pub track: PcaTerm,
    pub budget: u64,
}

fn record(obligation: &str, t: &Track) -> CertificateRecord {
    CertificateRecord { obligation: obligation.into(), track: t.witness.clone(), budget: t.budget.max_steps() }
}

fn certify(obligation: &str, s: &Sentence, cfg: &EffConfig, hints: &[PcaTerm]) -> Result<Track, EffError> {
    match valid_with(s, cfg.depth, cfg.budget, hints, cfg.exec) {
        ValidityOutcome::Valid(c) => Ok(Track { witness: c.realizer, budget: cfg.budget }),
        outcome => Err(EffError::Uncertified { obligation: obligation.into(), outcome }),
    }
}

fn rechecks(s: &Sentence, t: &Track) -> bool {
    s.realized_by(&t.witness, t.budget).holds()
}

fn atom(s: &RealizerSet) -> Sentence {
    Sentence::atom(s.clone())
}

/// `(A, ρ)` with certified symmetry and transitivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Per {
    carrier: Carrier,
    rho: Predicate,
    pub cert_sym: Track,
    pub cert_trans: Track,
}

impl Per {
    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    /// The relation as a predicate on `A × A`.
    pub fn relation(&self) -> &Predicate {
        &self.rho
    }

    pub fn rho(&self, x: usize, y: usize) -> &RealizerSet {
        self.rho.at(x * self.carrier.len() + y)
    }

    /// `x ↦ ρ(x,x)`.
    pub fn diagonal(&self) -> Predicate {
        Predicate::from_fn(&self.carrier, |x| self.rho(x, x).clone())
    }

    /// Same carrier and relation, certificates aside.
    pub fn same_object(&self, other: &Per) -> bool {
        self.carrier == other.carrier && self.rho == other.rho
    }

    fn sym_sentence(carrier: &Carrier, rho: &Predicate) -> Sentence {
        let n = carrier.len();
        Sentence::inter_over(carrier, |x| {
            Sentence::inter_over(carrier, |y| Sentence::implies(atom(rho.at(x * n + y)), atom(rho.at(y * n + x))))
        })
    }

    fn trans_sentence(carrier: &Carrier, rho: &Predicate) -> Sentence {
        let n = carrier.len();
        Sentence::inter_over(carrier, |x| {
            Sentence::inter_over(carrier, |y| {
                Sentence::inter_over(carrier, |z| {
                    Sentence::implies(
                        Sentence::and(atom(rho.at(x * n + y)), atom(rho.at(y * n + z))),
                        atom(rho.at(x * n + z)),
                    )
                })
            })
        })
    }

    pub fn certificates(&self) -> Vec<CertificateRecord> {
        vec![record("per.sym", &self.cert_sym), record("per.trans", &self.cert_trans)]
    }

    pub fn recheck(&self) -> bool {
        rechecks(&Self::sym_sentence(&self.carrier, &self.rho), &self.cert_sym)
            && rechecks(&Self::trans_sentence(&self.carrier, &self.rho), &self.cert_trans)
    }

    fn hints(&self) -> Vec<PcaTerm> {
        vec![self.cert_sym.witness.clone(), self.cert_trans.witness.clone()]
    }
}

/// Certifies `rho` (a predicate on `carrier × carrier`) as a partial
/// equivalence relation.
pub fn make_per(carrier: &Carrier, rho: Predicate, cfg: &EffConfig) -> Result<Per, EffError> {
    if rho.carrier() != &Carrier::product(carrier, carrier) {
        return Err(EffError::Shape("relation must live on carrier × carrier".into()));
    }
    let cert_sym = certify("per.sym", &Per::sym_sentence(carrier, &rho), cfg, &[])?;
    let cert_trans = certify("per.trans", &Per::trans_sentence(carrier, &rho), cfg, &[])?;
    Ok(Per { carrier: carrier.clone(), rho, cert_sym, cert_trans })
}

/// `(1, ⊤₁ₓ₁)`.
pub fn terminal() -> Per {
    let one = Carrier::point();
    let rho = Predicate::top(&Carrier::product(&one, &one));
    make_per(&one, rho, &EffConfig::default()).expect("the top relation on a point is a PER")
}

/// A morphism representative `F : (A,ρ) → (B,σ)` with its four certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalRelation {
    source: Per,
    target: Per,
    rel: Predicate,
    pub cert_strict: Track,
    pub cert_relational: Track,
    pub cert_single_valued: Track,
    pub cert_total: Track,
    /// For graphs of functions: the track of `⋂⋂ ρ(x,y) → σ(f x, f y)`.
    pub cert_compat: Option<Track>,
}

impl FunctionalRelation {
    pub fn source(&self) -> &Per {
        &self.source
    }

    pub fn target(&self) -> &Per {
        &self.target
    }

    /// The relation as a predicate on `A × B`.
    pub fn relation(&self) -> &Predicate {
        &self.rel
    }

    pub fn at(&self, a: usize, b: usize) -> &RealizerSet {
        self.rel.at(a * self.target.carrier.len() + b)
    }

    fn sentences(src: &Per, tgt: &Per, rel: &Predicate) -> [Sentence; 4] {
        let (a_c, b_c) = (&src.carrier, &tgt.carrier);
        let m = b_c.len();
        let f = |a: usize, b: usize| atom(rel.at(a * m + b));
        let strict = Sentence::inter_over(a_c, |a| {
            Sentence::inter_over(b_c, |b| {
                Sentence::implies(f(a, b), Sentence::and(atom(src.rho(a, a)), atom(tgt.rho(b, b))))
            })
        });
        let relational = Sentence::inter_over(a_c, |a| {
            Sentence::inter_over(a_c, |a2| {
                Sentence::inter_over(b_c, |b| {
                    Sentence::inter_over(b_c, |b2| {
                        Sentence::implies(
                            Sentence::and(Sentence::and(f(a, b), atom(src.rho(a, a2))), atom(tgt.rho(b, b2))),
                            f(a2, b2),
                        )
                    })
                })
            })
        });
        let single_valued = Sentence::inter_over(a_c, |a| {
            Sentence::inter_over(b_c, |b| {
                Sentence::inter_over(b_c, |b2| {
                    Sentence::implies(Sentence::and(f(a, b), f(a, b2)), atom(tgt.rho(b, b2)))
                })
            })
        });
        let total = Sentence::inter_over(a_c, |a| {
            Sentence::implies(atom(src.rho(a, a)), Sentence::union_over(b_c, |b| f(a, b)))
        });
        [strict, relational, single_valued, total]
    }

    pub fn certificates(&self) -> Vec<CertificateRecord> {
        let mut v = vec![
            record("fr.strict", &self.cert_strict),
            record("fr.relational", &self.cert_relational),
            record("fr.single_valued", &self.cert_single_valued),
            record("fr.total", &self.cert_total),
        ];
        if let Some(c) = &self.cert_compat {
            v.push(record("graph.compat", c));
        }
        v
    }

    pub fn recheck(&self) -> bool {
        let [s0, s1, s2, s3] = Self::sentences(&self.source, &self.target, &self.rel);
        rechecks(&s0, &self.cert_strict)
            && rechecks(&s1, &self.cert_relational)
            && rechecks(&s2, &self.cert_single_valued)
            && rechecks(&s3, &self.cert_total)
            && self.source.recheck()
            && self.target.recheck()
    }

    fn hints(&self) -> Vec<PcaTerm> {
        let mut h = vec![
            self.cert_strict.witness.clone(),
            self.cert_relational.witness.clone(),
            self.cert_single_valued.witness.clone(),
            self.cert_total.witness.clone(),
        ];
        h.extend(self.cert_compat.iter().map(|t| t.witness.clone()));
        h
    }
}

/// Certifies `rel` (a predicate on `A × B`) as a functional relation.
pub fn make_functional(src: &Per, tgt: &Per, rel: Predicate, cfg: &EffConfig) -> Result<FunctionalRelation, EffError> {
    make_functional_with(src, tgt, rel, cfg, &[], None)
}

fn make_functional_with(
    src: &Per,
    tgt: &Per,
    rel: Predicate,
    cfg: &EffConfig,
    extra_hints: &[PcaTerm],
    cert_compat: Option<Track>,
) -> Result<FunctionalRelation, EffError> {
    if rel.carrier() != &Carrier::product(&src.carrier, &tgt.carrier) {
        return Err(EffError::Shape("functional relation must live on source × target".into()));
    }
    let mut hints = extra_hints.to_vec();
    hints.extend(src.hints());
    hints.extend(tgt.hints());
    let [s0, s1, s2, s3] = FunctionalRelation::sentences(src, tgt, &rel);
    Ok(FunctionalRelation {
        cert_strict: certify("fr.strict", &s0, cfg, &hints)?,
        cert_relational: certify("fr.relational", &s1, cfg, &hints)?,
        cert_single_valued: certify("fr.single_valued", &s2, cfg, &hints)?,
        cert_total: certify("fr.total", &s3, cfg, &hints)?,
        cert_compat,
        source: src.clone(),
        target: tgt.clone(),
        rel,
    })
}

/// The unique arrow `(A,ρ) → 1`, `(x,⋆) ↦ ρ(x,x)`.
pub fn bang(p: &Per, cfg: &EffConfig) -> Result<FunctionalRelation, EffError> {
    let one = terminal();
    let rel = Predicate::from_fn(&Carrier::product(&p.carrier, &one.carrier), |x| p.rho(x, x).clone());
    make_functional(p, &one, rel, cfg)
}

/// A strict relational proposition over a PER: a subobject in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictRelationalProp {
    base: Per,
    pred: Predicate,
    pub cert_strict: Track,
    pub cert_rel: Track,
}

impl StrictRelationalProp {
    pub fn base(&self) -> &Per {
        &self.base
    }

    pub fn predicate(&self) -> &Predicate {
        &self.pred
    }

    fn sentences(base: &Per, pred: &Predicate) -> [Sentence; 2] {
        let c = &base.carrier;
        let strict = Sentence::inter_over(c, |x| Sentence::implies(atom(pred.at(x)), atom(base.rho(x, x))));
        let rel = Sentence::inter_over(c, |x| {
            Sentence::inter_over(c, |y| {
                Sentence::implies(Sentence::and(atom(base.rho(x, y)), atom(pred.at(x))), atom(pred.at(y)))
            })
        });
        [strict, rel]
    }

    pub fn certificates(&self) -> Vec<CertificateRecord> {
        vec![record("prop.strict", &self.cert_strict), record("prop.relational", &self.cert_rel)]
    }

    pub fn recheck(&self) -> bool {
        let [s0, s1] = Self::sentences(&self.base, &self.pred);
        rechecks(&s0, &self.cert_strict) && rechecks(&s1, &self.cert_rel) && self.base.recheck()
    }

    fn hints(&self) -> Vec<PcaTerm> {
        vec![self.cert_strict.witness.clone(), self.cert_rel.witness.clone()]
    }
}

pub fn make_prop(base: &Per, pred: Predicate, cfg: &EffConfig) -> Result<StrictRelationalProp, EffError> {
    make_prop_with(base, pred, cfg, &[])
}

fn make_prop_with(
    base: &Per,
    pred: Predicate,
    cfg: &EffConfig,
    extra_hints: &[PcaTerm],
) -> Result<StrictRelationalProp, EffError> {
    if pred.carrier() != &base.carrier {
        return Err(EffError::Shape("proposition must live on the PER's carrier".into()));
    }
    let mut hints = extra_hints.to_vec();
    hints.extend(base.hints());
    let [s0, s1] = StrictRelationalProp::sentences(base, &pred);
    Ok(StrictRelationalProp {
        cert_strict: certify("prop.strict", &s0, cfg, &hints)?,
        cert_rel: certify("prop.relational", &s1, cfg, &hints)?,
        base: base.clone(),
        pred,
    })
}

/// `ρ_P(x,y) = ρ(x,y) ∧ P(x)` together with the inclusion `(A,ρ_P) ↣ (A,ρ)`,
/// taken as the graph of the identity.
pub fn restrict_mono(p: &StrictRelationalProp, cfg: &EffConfig) -> Result<(Per, FunctionalRelation), EffError> {
    let base = &p.base;
    let n = base.carrier.len();
    let rho_p = Predicate::from_fn(base.rho.carrier(), |i| meet_sets(base.rho.at(i), p.pred.at(i / n)));
    let mut hints = restriction_candidates(base, p);
    hints.extend(p.hints());
    let restricted = make_per_with(&base.carrier, rho_p, cfg, &hints)?;
    let id: Vec<usize> = (0..n).collect();
    let inclusion = graph(&id, &restricted, base, cfg)?;
    Ok((restricted, inclusion))
}

/// Tracks for symmetry and transitivity of `ρ_P` assembled from the
/// certificates of `ρ` and `P`.
fn restriction_candidates(base: &Per, p: &StrictRelationalProp) -> Vec<PcaTerm> {
    use crate::pca::{abstract_closed, app, Lam::*};
    let con = |t: &PcaTerm| Con(t.clone());
    let (fst, snd, pair) = (con(&crate::pca::fst()), con(&crate::pca::snd()), con(&crate::pca::pair()));
    let sym = abstract_closed(
        &[0],
        app(
            app(pair.clone(), app(con(&base.cert_sym.witness), app(fst.clone(), Var(0)))),
            app(con(&p.cert_rel.witness), Var(0)),
        ),
    );
    let left = app(fst.clone(), Var(0));
    let right = app(snd.clone(), Var(0));
    let rr = app(app(pair.clone(), app(fst.clone(), left.clone())), app(fst.clone(), right));
    let trans = abstract_closed(
        &[0],
        app(app(pair, app(con(&base.cert_trans.witness), rr)), app(snd, left)),
    );
    vec![sym, trans]
}

fn make_per_with(carrier: &Carrier, rho: Predicate, cfg: &EffConfig, hints: &[PcaTerm]) -> Result<Per, EffError> {
    if rho.carrier() != &Carrier::product(carrier, carrier) {
        return Err(EffError::Shape("relation must live on carrier × carrier".into()));
    }
    let cert_sym = certify("per.sym", &Per::sym_sentence(carrier, &rho), cfg, hints)?;
    let cert_trans = certify("per.trans", &Per::trans_sentence(carrier, &rho), cfg, hints)?;
    Ok(Per { carrier: carrier.clone(), rho, cert_sym, cert_trans })
}

/// The mono part of `(A,ρ) ↠ (U,ξ) ↣ 1`: `⋆ ↦ ⋃ₓ ρ(x,x)`.
pub fn image_point(p: &Per, cfg: &EffConfig) -> Result<StrictRelationalProp, EffError> {
    let u = (0..p.carrier.len()).fold(RealizerSet::empty(), |acc, x| acc.union(p.rho(x, x)));
    make_prop(&terminal(), Predicate::constant(&Carrier::point(), u), cfg)
}

/// The graph `Γ(f)(x,b) = σ(f(x),b) ∧ ρ(x,x)` of a function between carriers
/// whose compatibility `⋂⋂ ρ(x,y) → σ(f x, f y)` is certified first.
pub fn graph(f: &[usize], src: &Per, tgt: &Per, cfg: &EffConfig) -> Result<FunctionalRelation, EffError> {
    let (n, m) = (src.carrier.len(), tgt.carrier.len());
    if f.len() != n || f.iter().any(|&y| y >= m) {
        return Err(EffError::Shape("function does not map source carrier into target carrier".into()));
    }
    let compat_s = Sentence::inter_over(&src.carrier, |x| {
        Sentence::inter_over(&src.carrier, |y| Sentence::implies(atom(src.rho(x, y)), atom(tgt.rho(f[x], f[y]))))
    });
    let compat = certify("graph.compat", &compat_s, cfg, &[])?;
    let rel = Predicate::from_fn(&Carrier::product(&src.carrier, &tgt.carrier), |i| {
        let (x, b) = (i / m, i % m);
        meet_sets(tgt.rho(f[x], b), src.rho(x, x))
    });
    let hints = [compat.witness.clone()];
    make_functional_with(src, tgt, rel, cfg, &hints, Some(compat))
}

/// The point `1 → (A,ρ)` at element `a`, i.e. `Γ(⋆ ↦ a)`.
pub fn point(p: &Per, a: usize, cfg: &EffConfig) -> Result<FunctionalRelation, EffError> {
    graph(&[a], &terminal(), p, cfg)
}

pub fn identity(p: &Per, cfg: &EffConfig) -> Result<FunctionalRelation, EffError> {
    let id: Vec<usize> = (0..p.carrier.len()).collect();
    graph(&id, p, p, cfg)
}

/// `(G∘F)(a,c) = ⋃_b F(a,b) ∧ G(b,c)`.
pub fn compose(f: &FunctionalRelation, g: &FunctionalRelation, cfg: &EffConfig) -> Result<FunctionalRelation, EffError> {
    if !f.target.same_object(&g.source) {
        return Err(EffError::Shape("composite of non-adjacent morphisms".into()));
    }
    let (nb, nc) = (g.source.carrier.len(), g.target.carrier.len());
    let rel = Predicate::from_fn(&Carrier::product(&f.source.carrier, &g.target.carrier), |i| {
        let (a, c) = (i / nc, i % nc);
        (0..nb).fold(RealizerSet::empty(), |acc, b| acc.union(&meet_sets(f.at(a, b), g.at(b, c))))
    });
    let mut hints = f.hints();
    hints.extend(g.hints());
    make_functional_with(&f.source, &g.target, rel, cfg, &hints, None)
}

/// Pullback of the mono represented by `p` along `f`:
/// `Q(a) = ⋃_b F(a,b) ∧ P(b)`.
pub fn pullback_mono(
    p: &StrictRelationalProp,
    f: &FunctionalRelation,
    cfg: &EffConfig,
) -> Result<StrictRelationalProp, EffError> {
    if !p.base.same_object(&f.target) {
        return Err(EffError::Shape("proposition does not live on the codomain".into()));
    }
    let nb = f.target.carrier.len();
    let q = Predicate::from_fn(&f.source.carrier, |a| {
        (0..nb).fold(RealizerSet::empty(), |acc, b| acc.union(&meet_sets(f.at(a, b), p.pred.at(b))))
    });
    let mut hints = f.hints();
    hints.extend(p.hints());
    make_prop_with(&f.source, q, cfg, &hints)
}

/// Outcome of the epi test `⋂_b [σ(b,b) → ⋃_a E(a,b)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpiOutcome {
    Epi(Track),
    NotFound,
    /// Finite refutation: some inhabited `σ(b,b)` faces an empty union.
    NotEpi { element: String },
}

pub fn is_epi(f: &FunctionalRelation, cfg: &EffConfig) -> EpiOutcome {
    let (src, tgt) = (&f.source, &f.target);
    let s = Sentence::inter_over(&tgt.carrier, |b| {
        Sentence::implies(atom(tgt.rho(b, b)), Sentence::union_over(&src.carrier, |a| atom(f.at(a, b))))
    });
    let cases = s.track_cases().expect("implication-free sides");
    match search_cases(&cases, cfg.depth, cfg.budget, &f.hints(), cfg.exec) {
        SearchOutcome::Found(t) => EpiOutcome::Epi(t),
        SearchOutcome::Refuted { element } => EpiOutcome::NotEpi { element },
        SearchOutcome::NotFound { .. } => EpiOutcome::NotFound,
    }
}

/// A point `ε : 1 → (A,ρ)` with `P(ε) ≐ ⋃ₐ P(a)` certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonCertificate {
    /// Index of the chosen element in the base carrier.
    pub point: usize,
    pub point_label: String,
    /// Whether `⋃ₐ P(a)` was empty (then any inhabited point is chosen).
    pub empty_union: bool,
    pub epsilon: FunctionalRelation,
    pub epi_track: Track,
    /// The pullback of `P` along `ε`, a proposition over the terminal object.
    pub pulled_back: StrictRelationalProp,
    /// `⋆ ↦ ⋃ₐ P(a)`.
    pub union: Predicate,
    pub equality: PosetCertificate,
}

impl EpsilonCertificate {
    pub fn recheck(&self) -> bool {
        self.epsilon.recheck()
            && self.pulled_back.recheck()
            && self.equality.recheck(self.pulled_back.predicate(), &self.union).unwrap_or(false)
    }

    pub fn certificates(&self) -> Vec<CertificateRecord> {
        let mut v = self.epsilon.certificates();
        v.push(record("bang.epi", &self.epi_track));
        v.extend(self.pulled_back.certificates());
        v.push(record("eps.forward", &self.equality.forward));
        v.push(record("eps.backward", &self.equality.backward));
        v
    }
}

/// Synthesises an ε-term for `p` over `(A,ρ)`, given that `(A,ρ) → 1` is
/// epic: the first `q` with `P(q)` inhabited when `⋃ₐ P(a)` is inhabited,
/// otherwise the first `a` with `ρ(a,a)` inhabited.
pub fn synthesize_epsilon(p: &StrictRelationalProp, cfg: &EffConfig) -> Result<EpsilonCertificate, EffError> {
    let base = &p.base;
    let to_one = bang(base, cfg)?;
    let epi_track = match is_epi(&to_one, cfg) {
        EpiOutcome::Epi(t) => t,
        EpiOutcome::NotEpi { element } => return Err(EffError::NotEpi(format!("empty union at {element}"))),
        EpiOutcome::NotFound => return Err(EffError::NotEpi("no certificate found".into())),
    };
    let n = base.carrier.len();
    let union = (0..n).fold(RealizerSet::empty(), |acc, a| acc.union(p.pred.at(a)));
    let empty_union = !union.is_inhabited();
    let chosen = if empty_union {
        (0..n).find(|&a| base.rho(a, a).is_inhabited())
    } else {
        (0..n).find(|&a| p.pred.at(a).is_inhabited())
    }
    .ok_or_else(|| EffError::NotEpi("no inhabited element".into()))?;
    let epsilon = point(base, chosen, cfg)?;
    let pulled_back = pullback_mono(p, &epsilon, cfg)?;
    let union_pred = Predicate::constant(&Carrier::point(), union);
    let mut hints = epsilon.hints();
    hints.extend(p.hints());
    let equality = poset_equal_with(pulled_back.predicate(), &union_pred, cfg.depth, cfg.budget, &hints, cfg.exec)?
        .ok_or_else(|| EffError::Uncertified {
            obligation: "eps.equality".into(),
            outcome: ValidityOutcome::NotValidFound,
        })?;
    Ok(EpsilonCertificate {
        point: chosen,
        point_label: base.carrier.elems()[chosen].clone(),
        empty_union,
        epsilon,
        epi_track,
        pulled_back,
        union: union_pred,
        equality,
    })
}

/// Pullback of `P` along `Γ(f)` compared with `P∘f ∧ ρ`, or with `P∘f`
/// alone when the source is terminal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackComparison {
    pub pulled_back: StrictRelationalProp,
    pub expected: Predicate,
    pub equality: Option<PosetCertificate>,
}

pub fn compare_pullback_along_graph(
    p: &StrictRelationalProp,
    f: &[usize],
    src: &Per,
    cfg: &EffConfig,
) -> Result<PullbackComparison, EffError> {
    let g = graph(f, src, &p.base, cfg)?;
    let pulled_back = pullback_mono(p, &g, cfg)?;
    let on_point = src.same_object(&terminal());
    let expected = Predicate::from_fn(&src.carrier, |a| {
        if on_point {
            p.pred.at(f[a]).clone()
        } else {
            meet_sets(p.pred.at(f[a]), src.rho(a, a))
        }
    });
    let mut hints = pullback_candidates(p, on_point);
    hints.extend(g.hints());
    hints.extend(p.hints());
    let equality = poset_equal_with(pulled_back.predicate(), &expected, cfg.depth, cfg.budget, &hints, cfg.exec)?;
    Ok(PullbackComparison { pulled_back, expected, equality })
}

/// `Q ≤ P∘f ∧ ρ` and back, built from the certificates of `σ` and `P`.
/// A realizer of `Q(a)` is `pair (pair s r) p` with `s ∈ σ(f a, b)`,
/// `r ∈ ρ(a,a)`, `p ∈ P(b)`.
fn pullback_candidates(p: &StrictRelationalProp, on_point: bool) -> Vec<PcaTerm> {
    use crate::pca::{abstract_closed, app, Lam, Lam::*};
    let con = |t: &PcaTerm| Con(t.clone());
    let (fst, snd, pair) = (con(&crate::pca::fst()), con(&crate::pca::snd()), con(&crate::pca::pair()));
    let z = Var(0);
    let s = app(fst.clone(), app(fst.clone(), z.clone()));
    let pb = app(snd.clone(), z.clone());
    let flipped = app(con(&p.base.cert_sym.witness), s);
    let pfa = app(con(&p.cert_rel.witness), app(app(pair.clone(), flipped), pb));
    let strict = |x: Lam| app(con(&p.cert_strict.witness), x);
    if on_point {
        let forward = abstract_closed(&[0], pfa);
        let back = app(app(pair.clone(), app(app(pair.clone(), strict(z.clone())), Con(PcaTerm::k()))), z);
        vec![forward, abstract_closed(&[0], back)]
    } else {
        let r = app(snd.clone(), app(fst.clone(), z.clone()));
        let forward = abstract_closed(&[0], app(app(pair.clone(), pfa), r));
        let w_p = app(fst, z.clone());
        let w_r = app(snd, z);
        let back = app(app(pair.clone(), app(app(pair, strict(w_p.clone())), w_r)), w_p);
        vec![forward, abstract_closed(&[0], back)]
    }
}

/// The pullback along ε compared with the image of the restricted PER
/// `(A,ρ_P) → 1`.
pub fn compare_with_image(
    cert: &EpsilonCertificate,
    p: &StrictRelationalProp,
    cfg: &EffConfig,
) -> Result<Option<PosetCertificate>, EffError> {
    let (restricted, _) = restrict_mono(p, cfg)?;
    let image = image_point(&restricted, cfg)?;
    Ok(poset_equal_with(cert.pulled_back.predicate(), image.predicate(), cfg.depth, cfg.budget, &[], cfg.exec)?)
}
