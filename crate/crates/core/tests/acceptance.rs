//! Acceptance gate. One PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails. Every bound, budget, seed and time limit is a constant
//! below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use epswb_core::eff::suite::{certify_instance, class_pers, functions, hilbertian_candidates, numerals, prop_values, ClassPer};
use epswb_core::eff::{
    compare_pullback_along_graph, compare_with_image, make_prop, synthesize_epsilon, terminal, EffConfig, EffError, Per,
    StrictRelationalProp,
};
use epswb_core::finite_topos::{
    characterization_sweep, check_epsilon_topos, classify, objects_up_to, subobjects, CheckOutcome, FinObj, Subobject,
    ToposCtx,
};
use epswb_core::internal_language::{
    ac_witness, derivable, eps_rule, Context, EpsMode, Formula, LanguageError, Sequent, Session, Signature, Term, Type,
};
use epswb_core::pca::{self, apply, reduce, Budget, EvalOutcome, PcaTerm};
use epswb_core::realizability::{
    meet, pair_nf, search_track, verify_track, Carrier, Predicate, RealizerSet, ValidityOutcome,
};
use epswb_core::Exec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// 1
const SETS_BOUND: usize = 3;
const SETS_LIMIT: Duration = Duration::from_secs(10);
// 2
const PRODUCT_BOUND: usize = 2;
const PRODUCT_WITNESS_OBJECT: &str = "(1,∅)";
const PRODUCT_WITNESS_TARGET: &str = "(1,1)";
// 3
const SWEEP_BOUND: usize = 3;
const SWEEP_LIMIT: Duration = Duration::from_secs(60);
// 4, 5
const DEPTH: usize = 4;
const BUDGET_STEPS: u64 = 10_000;
const HILBERTIAN_MAX_CARRIER: usize = 3;
const HILBERTIAN_MIN_INSTANCES: usize = 50;
const LEMMA_EXHAUSTIVE_MAX: usize = 2;
const LEMMA_MAX: usize = 3;
const LEMMA_SAMPLES: usize = 600;
const LEMMA_SEED: u64 = 0x1e33a;
// 6
const RANDOM_PREDICATES: usize = 200;
const RANDOM_TERMS: usize = 500;
const RANDOM_LAWS: usize = 500;
const PREORDER_SEED: u64 = 6;
const TERM_LEAVES: usize = 14;
// 7
const PROP_MAX_COMPONENT: usize = 3;
const PROP_EXHAUSTIVE_INTERPRETATIONS: usize = 64;
const PROP_SAMPLED_INTERPRETATIONS: usize = 64;
const PROP_SEED: u64 = 7;
const PARTIAL_MAX_ARITY: usize = 2;
// 8
const AC_MAX: usize = 2;

type Criterion = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("sets is an epsilon-topos", sets_epsilon_topos),
        ("sets x sets counterexample", product_counterexample),
        ("characterization coherence", characterization),
        ("hilbertian eff", hilbertian_eff),
        ("pullback along a graph", pullback_along_graph),
        ("realizability preorder laws", preorder_laws),
        ("internal-language soundness", internal_language),
        ("choice from epsilon", choice),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.2}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({secs:.2}s)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg() -> EffConfig {
    EffConfig { depth: DEPTH, budget: Budget::new(BUDGET_STEPS).unwrap(), exec: Exec::default() }
}

fn binom(n: u64, k: u64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Surjections from an n-set onto a k-set, by inclusion-exclusion.
fn surjections(n: u32, k: u32) -> i64 {
    (0..=k).map(|j| (-1i64).pow(j) * binom(k as u64, j as u64) * ((k - j) as i64).pow(n)).sum()
}

fn sets_epsilon_topos() -> Result<String, String> {
    let start = Instant::now();
    let v = check_epsilon_topos(ToposCtx::new(1).unwrap(), SETS_BOUND, Exec::default());
    let elapsed = start.elapsed();
    ensure(v.holds(), || format!("{v:?}"))?;
    let expected: i64 = (0..=SETS_BOUND as u32).flat_map(|n| (0..=SETS_BOUND as u32).map(move |k| surjections(n, k))).sum();
    let CheckOutcome::Holds { checked } = v.ac else { unreachable!() };
    ensure(checked as i64 == expected, || format!("{checked} epis sectioned, expected {expected}"))?;
    ensure(elapsed < SETS_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} epis all split, every nonempty set covers 1"))
}

fn product_counterexample() -> Result<String, String> {
    let v = check_epsilon_topos(ToposCtx::new(2).unwrap(), PRODUCT_BOUND, Exec::default());
    ensure(v.ac.holds(), || format!("AC fails: {:?}", v.ac))?;
    let CheckOutcome::Counterexample { object, arrow } = &v.epi_to_terminal else {
        return Err("no counterexample to epi-to-terminal".into());
    };
    ensure(object.shape() == PRODUCT_WITNESS_OBJECT, || format!("witness object {}", object.shape()))?;
    ensure(arrow.cod().shape() == PRODUCT_WITNESS_TARGET, || format!("witness target {}", arrow.cod().shape()))?;
    ensure(!classify(arrow).epi, || "witness arrow is epic".into())?;
    Ok(format!("AC holds, {} -> {} is not epic", object.shape(), arrow.cod().shape()))
}

fn characterization() -> Result<String, String> {
    let start = Instant::now();
    let r = characterization_sweep(ToposCtx::new(1).unwrap(), SWEEP_BOUND, Exec::default());
    let elapsed = start.elapsed();
    // subobjects of Γ × A for |Γ| in 0..=b, |A| in 1..=b
    let expected: usize =
        (0..=SWEEP_BOUND).flat_map(|g| (1..=SWEEP_BOUND).map(move |a| 1usize << (g * a))).sum();
    ensure(r.failures.is_empty(), || format!("{} failures, first {:?}", r.failures.len(), r.failures[0]))?;
    ensure(r.instances == expected, || format!("{} instances, expected {expected}", r.instances))?;
    ensure(elapsed < SWEEP_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{} monos, every square a pullback", r.instances))
}

fn hilbertian_eff() -> Result<String, String> {
    let cfg = cfg();
    let options = [numerals(&[0]), numerals(&[1, 2])];
    let candidates = hilbertian_candidates(HILBERTIAN_MAX_CARRIER, &options);
    let mut undetermined = Vec::new();
    let mut certified = 0;
    for (shape, values) in &candidates {
        let outcome = certify_instance(shape, values, &cfg).and_then(|inst| {
            let cert = synthesize_epsilon(&inst.prop, &cfg)?;
            let image = compare_with_image(&cert, &inst.prop, &cfg)?;
            Ok((cert, image))
        });
        match outcome {
            Ok((cert, Some(_))) if cert.recheck() => certified += 1,
            Ok((cert, image)) => undetermined.push(format!("{shape:?}: recheck {} image {}", cert.recheck(), image.is_some())),
            Err(e) => undetermined.push(format!("{shape:?} {values:?}: {e}")),
        }
    }
    ensure(undetermined.is_empty(), || format!("{} undetermined, first {}", undetermined.len(), undetermined[0]))?;
    ensure(certified >= HILBERTIAN_MIN_INSTANCES, || format!("only {certified} instances"))?;
    Ok(format!("{certified} instances, epsilon certified and re-verified in each"))
}

#[derive(Default)]
struct LemmaTally {
    lemma: usize,
    corollary: usize,
    not_morphisms: usize,
    failures: Vec<String>,
}

impl LemmaTally {
    fn record(&mut self, p: &StrictRelationalProp, f: &[usize], src: &Per, on_point: bool, cfg: &EffConfig) {
        match compare_pullback_along_graph(p, f, src, cfg) {
            Ok(c) => {
                let along = Predicate::from_fn(src.carrier(), |a| p.predicate().at(f[a]).clone());
                let oracle = if on_point { along } else { meet(&along, &src.diagonal()).unwrap() };
                let ok = c.expected == oracle
                    && c.equality.as_ref().is_some_and(|e| e.recheck(c.pulled_back.predicate(), &oracle).unwrap_or(false));
                if !ok {
                    self.failures.push(format!("f={f:?} over {:?}: {:?}", src.carrier().elems(), c.equality.is_some()));
                }
                if on_point {
                    self.corollary += 1;
                } else {
                    self.lemma += 1;
                }
            }
            // f is not a morphism of PERs, and provably so
            Err(EffError::Uncertified { outcome: ValidityOutcome::Refuted(_), .. }) => self.not_morphisms += 1,
            Err(e) => self.failures.push(format!("f={f:?} src {:?} tgt {:?}: {e}", src.relation().values(), p.base().relation().values())),
        }
    }
}

fn certify_all(shapes: &[ClassPer], cfg: &EffConfig) -> Result<Vec<(Per, Vec<StrictRelationalProp>)>, String> {
    shapes
        .iter()
        .map(|s| {
            let per = s.certify(cfg).map_err(|e| format!("{s:?}: {e}"))?;
            let props = prop_values(s)
                .iter()
                .map(|v| make_prop(&per, s.block_predicate(v), cfg).map_err(|e| format!("{s:?} {v:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((per, props))
        })
        .collect()
}

fn pullback_along_graph() -> Result<String, String> {
    let cfg = cfg();
    let alphabet = [numerals(&[0]), numerals(&[1]), numerals(&[0, 1])];
    let shapes = class_pers(LEMMA_MAX, &alphabet);
    let pers = certify_all(&shapes, &cfg)?;
    let size = |i: usize| shapes[i].blocks.len();
    let mut t = LemmaTally::default();

    let small: Vec<usize> = (0..shapes.len()).filter(|&i| size(i) <= LEMMA_EXHAUSTIVE_MAX).collect();
    for &b in &small {
        for p in &pers[b].1 {
            for &a in &small {
                for f in functions(size(a), size(b)) {
                    t.record(p, &f, &pers[a].0, false, &cfg);
                }
            }
        }
    }
    let exhaustive = t.lemma + t.not_morphisms;

    let mut rng = ChaCha8Rng::seed_from_u64(LEMMA_SEED);
    let all: Vec<usize> = (0..shapes.len()).collect();
    let mut sampled = 0;
    while sampled < LEMMA_SAMPLES {
        let (&a, &b) = (all.choose(&mut rng).unwrap(), all.choose(&mut rng).unwrap());
        if size(a).max(size(b)) <= LEMMA_EXHAUSTIVE_MAX {
            continue;
        }
        let p = pers[b].1.choose(&mut rng).unwrap();
        let f: Vec<usize> = (0..size(a)).map(|_| rng.gen_range(0..size(b))).collect();
        t.record(p, &f, &pers[a].0, false, &cfg);
        sampled += 1;
    }

    let one = terminal();
    for (b, (_, props)) in pers.iter().enumerate() {
        for p in props {
            for f in functions(1, size(b)) {
                t.record(p, &f, &one, true, &cfg);
            }
        }
    }

    ensure(t.failures.is_empty(), || format!("{} failures, first {}", t.failures.len(), t.failures[0]))?;
    ensure(t.lemma > 0 && t.corollary > 0, || "empty suite".into())?;
    Ok(format!(
        "{exhaustive} exhaustive + {sampled} sampled graph instances ({} refuted as non-morphisms), {} along points; all equal",
        t.not_morphisms, t.corollary
    ))
}

fn random_set(rng: &mut ChaCha8Rng, pool: &[PcaTerm]) -> RealizerSet {
    if rng.gen_ratio(1, 8) {
        return RealizerSet::All;
    }
    let n = rng.gen_range(0..=3);
    RealizerSet::of(pool.choose_multiple(rng, n))
}

fn map_set(s: &RealizerSet, f: impl Fn(&PcaTerm) -> PcaTerm, extra: RealizerSet) -> RealizerSet {
    match s {
        RealizerSet::All => RealizerSet::All,
        RealizerSet::Finite(xs) => RealizerSet::of(&xs.iter().map(f).collect::<Vec<_>>()).union(&extra),
    }
}

fn random_term(rng: &mut ChaCha8Rng, leaves: usize) -> PcaTerm {
    if leaves <= 1 {
        return if rng.gen_bool(0.5) { PcaTerm::k() } else { PcaTerm::s() };
    }
    let left = rng.gen_range(1..leaves);
    random_term(rng, left).app(&random_term(rng, leaves - left))
}

fn nf(t: &PcaTerm, budget: Budget) -> Option<PcaTerm> {
    reduce(t, budget).normal_form().cloned()
}

fn preorder_laws() -> Result<String, String> {
    let budget = Budget::new(BUDGET_STEPS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(PREORDER_SEED);
    let pool: Vec<PcaTerm> = (0..4).map(pca::numeral).chain([PcaTerm::k(), PcaTerm::s()]).collect();

    // reflexivity and transitivity
    let (e1, e2) = (pca::succ(), pca::pair().app(&pca::numeral(0)));
    let composite = pca::compose().app(&e2).app(&e1);
    let mut searched = 0;
    for n in 0..RANDOM_PREDICATES {
        let c = Carrier::new((0..rng.gen_range(1..=4)).map(|i| format!("x{i}"))).unwrap();
        let phi = Predicate::from_fn(&c, |_| random_set(&mut rng, &pool));
        let psi = Predicate::from_fn(&c, |i| {
            let extra = random_set(&mut rng, &pool);
            map_set(phi.at(i), |r| nf(&e1.app(r), budget).unwrap(), extra)
        });
        let chi = Predicate::from_fn(&c, |i| {
            let extra = random_set(&mut rng, &pool);
            map_set(psi.at(i), |r| pair_nf(&pca::numeral(0), r), extra)
        });
        let holds = |a: &Predicate, b: &Predicate, e: &PcaTerm| verify_track(a, b, e, budget).unwrap().holds();
        ensure(holds(&phi, &phi, &pca::i()), || format!("I does not track {phi:?} <= itself"))?;
        ensure(holds(&phi, &psi, &e1) && holds(&psi, &chi, &e2), || format!("generated tracks fail at {n}"))?;
        ensure(holds(&phi, &chi, &composite), || format!("composite fails on {phi:?}"))?;
        let (s1, s2) = (search_track(&phi, &psi, DEPTH, budget).unwrap(), search_track(&psi, &chi, DEPTH, budget).unwrap());
        if let (Some(t1), Some(t2)) = (s1.track(), s2.track()) {
            let c = pca::compose().app(&t2.witness).app(&t1.witness);
            ensure(holds(&phi, &chi, &c), || format!("composite of searched tracks fails on {phi:?}"))?;
            searched += 1;
        }
    }

    // budget monotonicity
    for _ in 0..RANDOM_TERMS {
        let leaves = rng.gen_range(1..=TERM_LEAVES);
        let t = random_term(&mut rng, leaves);
        let b1 = rng.gen_range(1..200u64);
        let b2 = b1 + rng.gen_range(1..200u64);
        let (r1, r2) = (reduce(&t, Budget::new(b1).unwrap()), reduce(&t, Budget::new(b2).unwrap()));
        let ok = match (&r1, &r2) {
            (EvalOutcome::NormalForm(x), EvalOutcome::NormalForm(y)) => x == y,
            (EvalOutcome::NormalForm(_), EvalOutcome::BudgetExceeded) => false,
            _ => true,
        };
        ensure(ok, || format!("{t}: {r1:?} at {b1} but {r2:?} at {b2}"))?;
    }

    // combinator laws on normalizing arguments
    let normal: Vec<PcaTerm> = std::iter::from_fn(|| {
        let leaves = rng.gen_range(1..=6);
        Some(random_term(&mut rng, leaves))
    })
        .filter_map(|t| nf(&t, budget))
        .take(64)
        .collect();
    let mut laws = 0;
    while laws < RANDOM_LAWS {
        let (x, y, z) = (normal.choose(&mut rng).unwrap(), normal.choose(&mut rng).unwrap(), normal.choose(&mut rng).unwrap());
        let pairs = [
            (PcaTerm::k().app(x).app(y), x.clone()),
            (PcaTerm::s().app(x).app(y).app(z), x.app(z).app(&y.app(z))),
            (pca::i().app(x), x.clone()),
            (pca::fst().app(&pca::pair().app(x).app(y)), x.clone()),
            (pca::snd().app(&pca::pair().app(x).app(y)), y.clone()),
            (pca::compose().app(x).app(y).app(z), x.app(&y.app(z))),
            (pca::constant(x).app(y), x.clone()),
        ];
        for (lhs, rhs) in &pairs {
            // the right side normalizing within the budget forces the left to within a few more steps
            if let Some(r) = nf(rhs, budget) {
                let l = nf(lhs, Budget::new(BUDGET_STEPS + 16).unwrap());
                ensure(l.as_ref() == Some(&r), || format!("{lhs} gives {l:?}, {rhs} gives {r}"))?;
                laws += 1;
            }
        }
    }
    let succ_ok = (0..8).all(|k| apply(&pca::succ(), &pca::numeral(k), budget).normal_form() == Some(&pca::numeral(k + 1)));
    ensure(succ_ok, || "succ does not step numerals".into())?;
    Ok(format!(
        "{RANDOM_PREDICATES} predicates ({searched} with searched tracks), {RANDOM_TERMS} terms, {laws} law instances"
    ))
}

#[derive(Clone, Debug)]
enum Prop {
    T,
    F,
    P(usize),
    Q(usize),
    R(usize, usize),
    Eq(usize, usize),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Imp(Box<Prop>, Box<Prop>),
}

struct Interp {
    a: usize,
    b: usize,
    p: Vec<bool>,
    q: Vec<bool>,
    r: Vec<bool>,
}

impl Prop {
    fn eval(&self, it: &Interp, env: &[usize]) -> bool {
        match self {
            Prop::T => true,
            Prop::F => false,
            Prop::P(v) => it.p[env[*v]],
            Prop::Q(v) => it.q[env[*v]],
            Prop::R(u, v) => it.r[env[*u] * it.b + env[*v]],
            Prop::Eq(u, v) => env[*u] == env[*v],
            Prop::And(x, y) => x.eval(it, env) && y.eval(it, env),
            Prop::Or(x, y) => x.eval(it, env) || y.eval(it, env),
            Prop::Imp(x, y) => !x.eval(it, env) || y.eval(it, env),
        }
    }

    fn formula(&self, names: &[&str]) -> Formula {
        let v = |i: &usize| Term::var(names[*i]);
        match self {
            Prop::T => Formula::True,
            Prop::F => Formula::False,
            Prop::P(i) => Formula::Rel("p".into(), vec![v(i)]),
            Prop::Q(i) => Formula::Rel("q".into(), vec![v(i)]),
            Prop::R(i, j) => Formula::Rel("r".into(), vec![v(i), v(j)]),
            Prop::Eq(i, j) => Formula::Eq(v(i), v(j)),
            Prop::And(x, y) => Formula::and(x.formula(names), y.formula(names)),
            Prop::Or(x, y) => Formula::or(x.formula(names), y.formula(names)),
            Prop::Imp(x, y) => Formula::implies(x.formula(names), y.formula(names)),
        }
    }
}

/// Atoms and every binary combination of two atoms.
fn prop_suite(atoms: &[Prop]) -> Vec<Prop> {
    let mut out = atoms.to_vec();
    for x in atoms {
        for y in atoms {
            let (bx, by) = (Box::new(x.clone()), Box::new(y.clone()));
            out.push(Prop::And(bx.clone(), by.clone()));
            out.push(Prop::Or(bx.clone(), by.clone()));
            out.push(Prop::Imp(bx, by));
        }
    }
    out
}

fn bits(n: usize, code: usize) -> Vec<bool> {
    (0..n).map(|i| code >> i & 1 == 1).collect()
}

fn signature(it: &Interp) -> Signature {
    let mut sig = Signature::new(ToposCtx::new(1).unwrap());
    let (ao, bo) = (FinObj::with_prefix(&[it.a], "a"), FinObj::with_prefix(&[it.b], "b"));
    let ab = FinObj::product(&ao, &bo).unwrap();
    sig.add_type("A", ao.clone()).unwrap();
    sig.add_type("B", bo.clone()).unwrap();
    sig.add_relation("p", vec![Type::base("A")], Subobject::new(ao, vec![it.p.clone()]).unwrap()).unwrap();
    sig.add_relation("q", vec![Type::base("B")], Subobject::new(bo, vec![it.q.clone()]).unwrap()).unwrap();
    sig.add_relation("r", vec![Type::base("A"), Type::base("B")], Subobject::new(ab, vec![it.r.clone()]).unwrap())
        .unwrap();
    sig
}

/// Contexts `[]`, `[x:A]`, `[x:A, y:B]`, `[x:A, y:A]` with their atoms.
type Vars = Vec<(&'static str, &'static str)>;

fn contexts() -> Vec<(Vars, Vec<Prop>)> {
    use Prop::*;
    vec![
        (vec![], vec![T, F]),
        (vec![("x", "A")], vec![T, F, P(0), Eq(0, 0)]),
        (vec![("x", "A"), ("y", "B")], vec![F, P(0), Q(1), R(0, 1)]),
        (vec![("x", "A"), ("y", "A")], vec![F, P(0), P(1), Eq(0, 1)]),
    ]
}

fn check_propositional(it: &Interp) -> Result<usize, String> {
    let sig = signature(it);
    let mut n = 0;
    for (vars, atoms) in contexts() {
        let ctx = Context::new(vars.iter().map(|(x, t)| (x.to_string(), Type::base(t))).collect()).unwrap();
        let names: Vec<&str> = vars.iter().map(|(x, _)| *x).collect();
        let sizes: Vec<usize> = vars.iter().map(|(_, t)| if *t == "A" { it.a } else { it.b }).collect();
        let envs: Vec<Vec<usize>> = sizes.iter().fold(vec![vec![]], |acc, &s| {
            acc.into_iter().flat_map(|e| (0..s).map(move |v| [e.clone(), vec![v]].concat())).collect()
        });
        let suite = prop_suite(&atoms);
        let formulas: Vec<Formula> = suite.iter().map(|p| p.formula(&names)).collect();
        // every consequent under no antecedent and under each atom
        let mut check = |ants: &[usize], cons: usize| -> Result<(), String> {
            let oracle = envs.iter().all(|e| !ants.iter().all(|&i| suite[i].eval(it, e)) || suite[cons].eval(it, e));
            let s = Sequent {
                context: ctx.clone(),
                antecedents: ants.iter().map(|&i| formulas[i].clone()).collect(),
                consequent: formulas[cons].clone(),
            };
            let got = derivable(&sig, &s).map_err(|e| e.to_string())?.holds;
            n += 1;
            ensure(got == oracle, || format!("{s}: derivable {got}, oracle {oracle} (a={}, b={})", it.a, it.b))
        };
        for cons in 0..suite.len() {
            check(&[], cons)?;
            for ant in 0..atoms.len() {
                check(&[ant], cons)?;
            }
        }
        check(&(0..atoms.len()).collect::<Vec<_>>(), 0)?;
    }
    Ok(n)
}

fn internal_language() -> Result<String, String> {
    // propositional suite
    let mut rng = ChaCha8Rng::seed_from_u64(PROP_SEED);
    let (mut sequents, mut interps) = (0, 0);
    for a in 0..=PROP_MAX_COMPONENT {
        for b in 0..=PROP_MAX_COMPONENT {
            let width = a + b + a * b;
            let codes: Vec<usize> = if 1 << width <= PROP_EXHAUSTIVE_INTERPRETATIONS {
                (0..1 << width).collect()
            } else {
                (0..PROP_SAMPLED_INTERPRETATIONS).map(|_| rng.gen_range(0..1usize << width)).collect()
            };
            for code in codes {
                let it = Interp { a, b, p: bits(a, code), q: bits(b, code >> a), r: bits(a * b, code >> (a + b)) };
                sequents += check_propositional(&it)?;
                interps += 1;
            }
        }
    }

    // full ε-I over the characterization suite
    let mut full = 0;
    for g in objects_up_to(1, SWEEP_BOUND) {
        for a in objects_up_to(1, SWEEP_BOUND).into_iter().filter(|a| !a.is_initial()) {
            for phi in subobjects(&FinObj::product(&g, &a).unwrap()) {
                let mut sig = Signature::new(ToposCtx::new(1).unwrap());
                sig.add_type("G", g.clone()).unwrap();
                sig.add_type("A", a.clone()).unwrap();
                sig.add_relation("phi", vec![Type::base("G"), Type::base("A")], phi).unwrap();
                let mut session = Session::new(sig);
                let ctx = Context::new(vec![("g".into(), Type::base("G"))]).unwrap();
                let psi = Formula::Rel("phi".into(), vec![Term::var("g"), Term::var("x")]);
                match eps_rule(&mut session, &ctx, "x", &Type::base("A"), &psi, EpsMode::Full) {
                    Ok(r) => {
                        ensure(r.valid, || format!("ε-I fails: {}", r.sequent))?;
                        full += 1;
                    }
                    Err(LanguageError::EmptyTypeRejected(_)) if g.is_initial() => {}
                    Err(e) => return Err(format!("G={g} A={a}: {e}")),
                }
            }
        }
    }

    // partial ε-I over closed instances
    let mut partial = 0;
    for arity in 1..=PARTIAL_MAX_ARITY {
        for a in objects_up_to(arity, SWEEP_BOUND) {
            for p in subobjects(&a) {
                let mut sig = Signature::new(ToposCtx::new(arity).unwrap());
                sig.add_type("A", a.clone()).unwrap();
                sig.add_relation("p", vec![Type::base("A")], p).unwrap();
                let mut session = Session::new(sig);
                let psi = Formula::Rel("p".into(), vec![Term::var("x")]);
                let result = eps_rule(&mut session, &Context::empty(), "x", &Type::base("A"), &psi, EpsMode::Partial);
                let covers = classify(&epswb_core::finite_topos::FinArrow::to_terminal(&a)).epi;
                match result {
                    Ok(r) => {
                        ensure(r.valid, || format!("partial ε-I fails: {}", r.sequent))?;
                        partial += 1;
                    }
                    Err(LanguageError::EmptyTypeRejected(_)) if a.is_initial() => {}
                    Err(LanguageError::PreconditionViolated(_)) if !covers && !a.is_initial() => {}
                    Err(e) => return Err(format!("A={a}: {e}")),
                }
                ensure(session.signature.function("eps1").is_none_or(|f| !f.arrow.cod().is_initial()), || {
                    format!("an arrow into the initial object was registered for A={a}")
                })?;
            }
        }
    }

    // empty-type requests
    let mut sig = Signature::new(ToposCtx::new(1).unwrap());
    sig.add_type("E", FinObj::of_sizes(&[0])).unwrap();
    sig.add_type("A", FinObj::of_sizes(&[2])).unwrap();
    let mut session = Session::new(sig);
    let e_ctx = Context::new(vec![("z".into(), Type::base("E"))]).unwrap();
    let rejected = [
        eps_rule(&mut session, &Context::empty(), "x", &Type::base("E"), &Formula::True, EpsMode::Partial),
        eps_rule(&mut session, &Context::empty(), "x", &Type::base("E"), &Formula::True, EpsMode::Full),
        eps_rule(&mut session, &e_ctx, "x", &Type::base("A"), &Formula::True, EpsMode::Full),
        eps_rule(&mut session, &Context::empty(), "x", &Type::prod(Type::base("A"), Type::base("E")), &Formula::True, EpsMode::Full),
    ];
    ensure(rejected.iter().all(|r| matches!(r, Err(LanguageError::EmptyTypeRejected(_)))), || format!("{rejected:?}"))?;
    ensure(!session.signature.has_symbol("eps1"), || "a symbol was registered".into())?;

    Ok(format!(
        "{sequents} sequents over {interps} interpretations agree; ε-I valid in {full} full and {partial} partial instances; empty types rejected"
    ))
}

fn choice() -> Result<String, String> {
    let mut n = 0;
    for a in 1..=AC_MAX {
        for b in 1..=AC_MAX {
            for code in 0..1usize << (a * b) {
                let (ao, bo) = (FinObj::with_prefix(&[a], "a"), FinObj::with_prefix(&[b], "b"));
                let ab = FinObj::product(&ao, &bo).unwrap();
                let mut sig = Signature::new(ToposCtx::new(1).unwrap());
                sig.add_type("A", ao).unwrap();
                sig.add_type("B", bo).unwrap();
                sig.add_relation("F", vec![Type::base("A"), Type::base("B")], Subobject::new(ab, vec![bits(a * b, code)]).unwrap())
                    .unwrap();
                let mut session = Session::new(sig);
                let f = Formula::Rel("F".into(), vec![Term::var("a"), Term::var("b")]);
                let w = ac_witness(&mut session, ("a", &Type::base("A")), ("b", &Type::base("B")), &f)
                    .map_err(|e| format!("|A|={a} |B|={b} F={code:b}: {e}"))?;
                ensure(w.valid && w.eps.valid, || format!("{} not derivable", w.sequent))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} relations, choice sequent derivable for each"))
}
