//! ε-terms in `FinSet^n`: the Hilbertian condition, the ε-topos
//! conditions, and the explicit construction of `ε_φ : Γ → A`.

use serde::{Deserialize, Serialize};

use super::{
    arrows, classify, complement, epi_mono_factorize, find_section, image, points, pullback, subobjects, FinArrow,
    FinObj, Subobject, ToposCtx, ToposError,
};
use crate::exec::Exec;

/// Objects with every component of size `≤ bound`, grouped in shells by
/// largest component, each shell in descending lexicographic order of the
/// size vector: `(0,0), (1,1), (1,0), (0,1), (2,2), …`.
pub fn objects_up_to(arity: usize, bound: usize) -> Vec<FinObj> {
    let mut out = Vec::new();
    for shell in 0..=bound {
        let mut sizes: Vec<Vec<usize>> = (0..arity)
            .fold(vec![Vec::new()], |acc, _| {
                acc.into_iter()
                    .flat_map(|v| {
                        (0..=shell).map(move |k| {
                            let mut w = v.clone();
                            w.push(k);
                            w
                        })
                    })
                    .collect()
            })
            .into_iter()
            .filter(|v: &Vec<usize>| v.iter().max() == Some(&shell))
            .collect();
        sizes.sort_by(|a, b| b.cmp(a));
        out.extend(sizes.iter().map(|s| FinObj::of_sizes(s)));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckOutcome {
    Holds { checked: usize },
    Counterexample { object: FinObj, arrow: FinArrow },
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds { .. })
    }

    fn from_results(results: Vec<Result<usize, (FinObj, FinArrow)>>) -> Self {
        let mut checked = 0;
        for r in results {
            match r {
                Ok(n) => checked += n,
                Err((object, arrow)) => return CheckOutcome::Counterexample { object, arrow },
            }
        }
        CheckOutcome::Holds { checked }
    }
}

/// Both ε-topos conditions, checked separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonToposVerdict {
    pub arity: usize,
    pub bound: usize,
    /// Every epi has a section.
    pub ac: CheckOutcome,
    /// Every non-initial `A` has `A → 1` epic.
    pub epi_to_terminal: CheckOutcome,
}

impl EpsilonToposVerdict {
    pub fn holds(&self) -> bool {
        self.ac.holds() && self.epi_to_terminal.holds()
    }
}

fn check_ac(ctx: ToposCtx, bound: usize, exec: Exec) -> CheckOutcome {
    let objs = objects_up_to(ctx.arity(), bound);
    let pairs: Vec<(&FinObj, &FinObj)> = objs.iter().flat_map(|a| objs.iter().map(move |b| (a, b))).collect();
    CheckOutcome::from_results(exec.map(&pairs, |(a, b)| {
        let mut n = 0;
        for e in arrows(a, b).into_iter().filter(|e| classify(e).epi) {
            let ok = find_section(&e).is_some_and(|s| s.then(&e).ok() == Some(FinArrow::identity(b)));
            if !ok {
                return Err(((*a).clone(), e));
            }
            n += 1;
        }
        Ok(n)
    }))
}

fn check_initial_or_epic(ctx: ToposCtx, bound: usize, exec: Exec) -> CheckOutcome {
    let objs = objects_up_to(ctx.arity(), bound);
    CheckOutcome::from_results(exec.map(&objs, |a| {
        let bang = FinArrow::to_terminal(a);
        if a.is_initial() || classify(&bang).epi {
            Ok(1)
        } else {
            Err((a.clone(), bang))
        }
    }))
}

pub fn check_epsilon_topos(ctx: ToposCtx, bound: usize, exec: Exec) -> EpsilonToposVerdict {
    EpsilonToposVerdict {
        arity: ctx.arity(),
        bound,
        ac: check_ac(ctx, bound, exec),
        epi_to_terminal: check_initial_or_epic(ctx, bound, exec),
    }
}

/// Every object is initial or has an epic arrow to `1`.
pub fn check_partial_epsilon(ctx: ToposCtx, bound: usize, exec: Exec) -> CheckOutcome {
    check_initial_or_epic(ctx, bound, exec)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertianWitness {
    pub eps: FinArrow,
    /// The pullback of `p` along `eps`, as a subobject of `1`.
    pub pulled_back: Subobject,
    /// The image of `X → 1` where `X` is the domain of `p`.
    pub image: Subobject,
    /// Points tried before `eps`, inclusive.
    pub tried: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HilbertianOutcome {
    Witness(HilbertianWitness),
    Fail { tried: usize },
}

/// Searches the points `1 → A` in order for one along which `p` pulls
/// back to the image of `X → 1`. Requires `A → 1` epic.
pub fn check_hilbertian_instance(p: &Subobject) -> Result<HilbertianOutcome, ToposError> {
    let a = p.ambient();
    if !classify(&FinArrow::to_terminal(a)).epi {
        return Err(ToposError::Precondition(format!("{} -> 1 is not epic", a.shape())));
    }
    let target = image(&FinArrow::to_terminal(&p.object()));
    let incl = p.inclusion();
    let candidates = points(a);
    for (k, eps) in candidates.iter().enumerate() {
        let pb = pullback(&incl, eps)?;
        let pulled_back = image(&pb.p2);
        if pulled_back == target {
            return Ok(HilbertianOutcome::Witness(HilbertianWitness {
                eps: eps.clone(),
                pulled_back,
                image: target,
                tried: k + 1,
            }));
        }
    }
    Ok(HilbertianOutcome::Fail { tried: candidates.len() })
}

/// The data of the construction of `ε_φ` together with its checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub eps: FinArrow,
    /// `U = Im(π_Γ ∘ φ) ↣ Γ`.
    pub image: Subobject,
    /// Section `s : U → X` of the epi part of `π_Γ ∘ φ`.
    pub section: FinArrow,
    /// `Y`, the complement of `U` in `Γ`.
    pub complement: Subobject,
    /// The least point `a : 1 → Γ × A`, when `Γ × A → 1` is epic.
    pub point: Option<FinArrow>,
    /// `[φ s, a !_Y] : Γ → Γ × A`.
    pub copair: FinArrow,
    pub triangle_commutes: bool,
    pub square_is_pullback: bool,
}

/// Builds `ε_φ = π_A ∘ [φ s, a !_Y]` for `φ ↣ Γ × A` and checks that
/// `⟨id_Γ, ε_φ⟩` pulls `φ` back to `U`.
///
/// Rejects an initial `A`, and an `A` with an empty component where `Γ` is
/// inhabited: no arrow `Γ → A` exists then.
pub fn synthesize_epsilon_full(gamma: &FinObj, a: &FinObj, phi: &Subobject) -> Result<EpsilonResult, ToposError> {
    let ga = FinObj::product(gamma, a)?;
    if phi.ambient() != &ga {
        return Err(ToposError::Mismatch(format!("φ must be a subobject of {}", ga.shape())));
    }
    let blocked = gamma.sizes().iter().zip(a.sizes()).any(|(&g, n)| g > 0 && n == 0);
    if a.is_initial() || blocked {
        return Err(ToposError::EmptyType { object: a.shape() });
    }
    let (pi_g, pi_a) = FinArrow::projections(gamma, a)?;
    let incl = phi.inclusion();
    let pg_phi = incl.then(&pi_g)?;
    let (q, m) = epi_mono_factorize(&pg_phi);
    let s = find_section(&q).expect("epi part has a section");
    let u = image(&pg_phi);
    let y = complement(&u);
    let point = (!ga.has_empty_component()).then(|| FinArrow::point(&ga, &vec![0; ga.arity()])).transpose()?;
    let phi_s = s.then(&incl)?;

    let mut maps = Vec::with_capacity(gamma.arity());
    for i in 0..gamma.arity() {
        let members = u.members(i);
        let row = (0..gamma.sizes()[i])
            .map(|g| match members.binary_search(&g) {
                Ok(k) => phi_s.apply(i, k),
                // on Y: a ∘ !_Y, the least pair in this component
                Err(_) => point.as_ref().map_or(0, |p| p.apply(i, 0)),
            })
            .collect();
        maps.push(row);
    }
    let copair = FinArrow::new(gamma.clone(), ga.clone(), maps)?;
    let eps = copair.then(&pi_a)?;

    let id_eps = FinArrow::pair(&FinArrow::identity(gamma), &eps)?;
    let triangle_commutes = s.then(&incl)? == m.then(&id_eps)?;
    let square_is_pullback = triangle_commutes && is_pullback_square(&m, &s, &id_eps, &incl)?;
    Ok(EpsilonResult {
        eps,
        image: u,
        section: s,
        complement: y,
        point,
        copair,
        triangle_commutes,
        square_is_pullback,
    })
}

/// Whether the commuting square `left : P → G`, `top : P → X` over the
/// cospan `h : G → Z ← X : k` is a pullback. Cones are checked
/// exhaustively on generators (one element in one component); the result
/// is cross-checked against the canonical pullback.
fn is_pullback_square(left: &FinArrow, top: &FinArrow, h: &FinArrow, k: &FinArrow) -> Result<bool, ToposError> {
    for i in 0..h.dom().arity() {
        for g in 0..h.dom().sizes()[i] {
            for x in 0..k.dom().sizes()[i] {
                if h.apply(i, g) != k.apply(i, x) {
                    continue;
                }
                let mediators = (0..left.dom().sizes()[i])
                    .filter(|&p| left.apply(i, p) == g && top.apply(i, p) == x)
                    .count();
                if mediators != 1 {
                    return Ok(false);
                }
            }
        }
    }
    let canonical = pullback(h, k)?;
    let Some(u) = canonical.mediate(left, top) else { return Ok(false) };
    Ok(classify(&u).iso)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub gamma: FinObj,
    pub a: FinObj,
    pub phi: Subobject,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub instances: usize,
    pub failures: Vec<SweepFailure>,
}

/// Runs [`synthesize_epsilon_full`] on every `φ ↣ Γ × A` with components
/// `≤ bound`, `A` non-initial. Failures are listed in enumeration order.
pub fn characterization_sweep(ctx: ToposCtx, bound: usize, exec: Exec) -> SweepReport {
    let objs = objects_up_to(ctx.arity(), bound);
    let pairs: Vec<(&FinObj, &FinObj)> = objs
        .iter()
        .flat_map(|g| objs.iter().filter(|a| !a.is_initial()).map(move |a| (g, a)))
        .collect();
    let per_pair = exec.map(&pairs, |(gamma, a)| {
        let ga = FinObj::product(gamma, a).expect("same arity");
        let mut failures = Vec::new();
        let subs = subobjects(&ga);
        for phi in &subs {
            let reason = match synthesize_epsilon_full(gamma, a, phi) {
                Ok(r) if r.square_is_pullback => continue,
                Ok(r) if !r.triangle_commutes => "triangle does not commute".to_string(),
                Ok(_) => "square is not a pullback".to_string(),
                Err(e) => e.to_string(),
            };
            failures.push(SweepFailure { gamma: (*gamma).clone(), a: (*a).clone(), phi: phi.clone(), reason });
        }
        (subs.len(), failures)
    });
    let mut report = SweepReport { instances: 0, failures: Vec::new() };
    for (n, f) in per_pair {
        report.instances += n;
        report.failures.extend(f);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize) -> ToposCtx {
        ToposCtx::new(n).unwrap()
    }

    #[test]
    fn object_order_puts_one_empty_first_among_violators() {
        let objs = objects_up_to(2, 1);
        let shapes: Vec<String> = objs.iter().map(FinObj::shape).collect();
        assert_eq!(shapes, ["(∅,∅)", "(1,1)", "(1,∅)", "(∅,1)"]);
        assert_eq!(objects_up_to(1, 3).len(), 4);
        assert_eq!(objects_up_to(3, 2).len(), 27);
    }

    #[test]
    fn sets_is_an_epsilon_topos() {
        for bound in 1..=3 {
            assert!(check_epsilon_topos(ctx(1), bound, Exec::Sequential).holds());
        }
        assert!(check_partial_epsilon(ctx(1), 3, Exec::Sequential).holds());
    }

    #[test]
    fn products_of_sets_are_not() {
        let v = check_epsilon_topos(ctx(2), 1, Exec::Sequential);
        assert!(v.ac.holds());
        match &v.epi_to_terminal {
            CheckOutcome::Counterexample { object, arrow } => {
                assert_eq!(object.shape(), "(1,∅)");
                assert_eq!(arrow.cod().shape(), "(1,1)");
            }
            other => panic!("{other:?}"),
        }
        match check_partial_epsilon(ctx(3), 1, Exec::Sequential) {
            CheckOutcome::Counterexample { object, .. } => assert_eq!(object.shape(), "(1,1,∅)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hilbertian_instances() {
        let a = FinObj::with_prefix(&[3], "a");
        let full = check_hilbertian_instance(&Subobject::full(&a)).unwrap();
        let HilbertianOutcome::Witness(w) = full else { panic!() };
        assert_eq!(w.eps.maps(), &[vec![0]]);
        assert!(w.image.is_full());

        let empty = check_hilbertian_instance(&Subobject::empty(&a)).unwrap();
        let HilbertianOutcome::Witness(w) = empty else { panic!() };
        assert_eq!((w.eps.maps(), w.image.is_empty()), (&[vec![0]][..], true));

        let b = FinObj::new(vec![vec!["a0".into()], vec!["b0".into(), "b1".into()]]).unwrap();
        let p = Subobject::from_labels(&b, &[vec!["a0".into()], vec!["b1".into()]]).unwrap();
        let HilbertianOutcome::Witness(w) = check_hilbertian_instance(&p).unwrap() else { panic!() };
        assert_eq!(w.eps.maps(), &[vec![0], vec![1]]);
        assert_eq!(w.tried, 2);

        let c = FinObj::of_sizes(&[1, 0]);
        assert!(matches!(check_hilbertian_instance(&Subobject::full(&c)), Err(ToposError::Precondition(_))));
    }

    #[test]
    fn epsilon_full_follows_the_construction() {
        let g = FinObj::with_prefix(&[2], "g");
        let a = FinObj::with_prefix(&[2], "a");
        let ga = FinObj::product(&g, &a).unwrap();
        let phi = Subobject::from_labels(&ga, &[vec!["(g0,a1)".into()]]).unwrap();
        let r = synthesize_epsilon_full(&g, &a, &phi).unwrap();
        assert_eq!(r.eps.maps(), &[vec![1, 0]]);
        assert!(r.triangle_commutes && r.square_is_pullback);
        assert_eq!(r.complement.members(0), vec![1]);

        let full = synthesize_epsilon_full(&g, &a, &Subobject::full(&ga)).unwrap();
        assert_eq!(full.eps.maps(), &[vec![0, 0]]);
        assert!(full.image.is_full() && full.square_is_pullback);

        let none = synthesize_epsilon_full(&g, &a, &Subobject::empty(&ga)).unwrap();
        assert!(none.image.is_empty() && none.square_is_pullback);
    }

    #[test]
    fn empty_types_are_rejected() {
        let g = FinObj::of_sizes(&[2]);
        let zero = FinObj::of_sizes(&[0]);
        let gz = FinObj::product(&g, &zero).unwrap();
        assert!(matches!(
            synthesize_epsilon_full(&g, &zero, &Subobject::full(&gz)),
            Err(ToposError::EmptyType { .. })
        ));
        let g2 = FinObj::of_sizes(&[1, 1]);
        let a2 = FinObj::of_sizes(&[1, 0]);
        let p = Subobject::empty(&FinObj::product(&g2, &a2).unwrap());
        assert!(matches!(synthesize_epsilon_full(&g2, &a2, &p), Err(ToposError::EmptyType { .. })));
    }

    #[test]
    fn characterization_coheres_at_small_bounds() {
        for (n, bound) in [(1, 2), (2, 1), (3, 1)] {
            let verdict = check_epsilon_topos(ctx(n), bound, Exec::Sequential);
            let sweep = characterization_sweep(ctx(n), bound, Exec::Parallel);
            assert!(sweep.instances > 0);
            assert_eq!(verdict.holds(), sweep.failures.is_empty(), "arity {n}");
        }
    }
}
