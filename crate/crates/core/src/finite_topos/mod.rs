//! The topos `FinSet^n` of `n`-tuples of finite sets, restricted to what the
//! ε-constructions need: images, pullbacks, complements, sections.
//!
//! Everything is computed componentwise. Subobjects are stored as
//! componentwise subsets, so isomorphic subobjects compare equal.

mod epsilon;

pub use epsilon::{
    characterization_sweep, check_epsilon_topos, check_hilbertian_instance, check_partial_epsilon, objects_up_to,
    synthesize_epsilon_full, CheckOutcome, EpsilonResult, EpsilonToposVerdict, HilbertianOutcome, HilbertianWitness,
    SweepFailure, SweepReport,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToposError {
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("expected {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("component {component}: {msg}")]
    NotAFunction { component: usize, msg: String },
    #[error("arrows do not compose: {0}")]
    Mismatch(String),
    #[error("empty type {object}: no arrow into it from a non-initial object")]
    EmptyType { object: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// The ambient topos `FinSet^arity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToposCtx {
    arity: usize,
}

impl ToposCtx {
    pub fn new(arity: usize) -> Result<Self, ToposError> {
        if arity == 0 {
            return Err(ToposError::ZeroArity);
        }
        Ok(ToposCtx { arity })
    }

    pub fn arity(self) -> usize {
        self.arity
    }

    pub fn terminal(self) -> FinObj {
        FinObj::terminal(self.arity)
    }

    pub fn initial(self) -> FinObj {
        FinObj::of_sizes(&vec![0; self.arity])
    }
}

/// An `n`-tuple of finite ordered sets of labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinObj {
    components: Vec<Vec<String>>,
}

impl FinObj {
    pub fn new(components: Vec<Vec<String>>) -> Result<Self, ToposError> {
        for c in &components {
            for (i, e) in c.iter().enumerate() {
                if c[..i].contains(e) {
                    return Err(ToposError::DuplicateElement(e.clone()));
                }
            }
        }
        Ok(FinObj { components })
    }

    /// Labels `x0, x1, …` in every component.
    pub fn of_sizes(sizes: &[usize]) -> Self {
        Self::with_prefix(sizes, "x")
    }

    pub fn with_prefix(sizes: &[usize], prefix: &str) -> Self {
        FinObj { components: sizes.iter().map(|&n| (0..n).map(|i| format!("{prefix}{i}")).collect()).collect() }
    }

    pub fn terminal(arity: usize) -> Self {
        FinObj { components: vec![vec!["*".to_string()]; arity] }
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<String>] {
        &self.components
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    /// All components empty.
    pub fn is_initial(&self) -> bool {
        self.components.iter().all(Vec::is_empty)
    }

    /// Some component empty: then no arrow `1 → A` exists.
    pub fn has_empty_component(&self) -> bool {
        self.components.iter().any(Vec::is_empty)
    }

    pub fn index_of(&self, component: usize, label: &str) -> Result<usize, ToposError> {
        self.components[component]
            .iter()
            .position(|e| e == label)
            .ok_or_else(|| ToposError::UnknownElement(label.to_string()))
    }

    /// Componentwise product, pairs `(x,y)` at index `i·|B| + j`.
    pub fn product(a: &FinObj, b: &FinObj) -> Result<FinObj, ToposError> {
        same_arity(a.arity(), b.arity())?;
        let components = a
            .components
            .iter()
            .zip(&b.components)
            .map(|(xs, ys)| xs.iter().flat_map(|x| ys.iter().map(move |y| format!("({x},{y})"))).collect())
            .collect();
        Ok(FinObj { components })
    }

    /// Size vector with `∅` for empty components, e.g. `(1,∅)`.
    pub fn shape(&self) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| if c.is_empty() { "∅".to_string() } else { c.len().to_string() })
            .collect();
        format!("({})", parts.join(","))
    }
}

impl fmt::Display for FinObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| format!("[{}]", c.join(","))).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn same_arity(expected: usize, got: usize) -> Result<(), ToposError> {
    if expected == got {
        Ok(())
    } else {
        Err(ToposError::ArityMismatch { expected, got })
    }
}

/// Componentwise total functions `dom_i → cod_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinArrow {
    dom: FinObj,
    cod: FinObj,
    maps: Vec<Vec<usize>>,
}

/// Result of [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub mono: bool,
    pub epi: bool,
    pub iso: bool,
}

impl FinArrow {
    pub fn new(dom: FinObj, cod: FinObj, maps: Vec<Vec<usize>>) -> Result<Self, ToposError> {
        same_arity(dom.arity(), cod.arity())?;
        same_arity(dom.arity(), maps.len())?;
        for (i, m) in maps.iter().enumerate() {
            if m.len() != dom.components[i].len() {
                return Err(ToposError::NotAFunction { component: i, msg: "not total".into() });
            }
            if let Some(&y) = m.iter().find(|&&y| y >= cod.components[i].len()) {
                return Err(ToposError::NotAFunction { component: i, msg: format!("value {y} out of range") });
            }
        }
        Ok(FinArrow { dom, cod, maps })
    }

    /// Builds an arrow from per-component label pairs `(x, y)`.
    pub fn from_pairs(dom: FinObj, cod: FinObj, pairs: &[Vec<(String, String)>]) -> Result<Self, ToposError> {
        same_arity(dom.arity(), pairs.len())?;
        let mut maps = Vec::with_capacity(pairs.len());
        for (i, ps) in pairs.iter().enumerate() {
            let mut m: Vec<Option<usize>> = vec![None; dom.components[i].len()];
            for (x, y) in ps {
                let (xi, yi) = (dom.index_of(i, x)?, cod.index_of(i, y)?);
                if m[xi].is_some_and(|old| old != yi) {
                    return Err(ToposError::NotAFunction { component: i, msg: format!("`{x}` has two images") });
                }
                m[xi] = Some(yi);
            }
            let total: Option<Vec<usize>> = m.into_iter().collect();
            maps.push(total.ok_or(ToposError::NotAFunction { component: i, msg: "not total".into() })?);
        }
        FinArrow::new(dom, cod, maps)
    }

    pub fn identity(a: &FinObj) -> Self {
        FinArrow { dom: a.clone(), cod: a.clone(), maps: a.sizes().iter().map(|&n| (0..n).collect()).collect() }
    }

    /// The unique arrow `A → 1`.
    pub fn to_terminal(a: &FinObj) -> Self {
        FinArrow { dom: a.clone(), cod: FinObj::terminal(a.arity()), maps: a.sizes().iter().map(|&n| vec![0; n]).collect() }
    }

    pub fn dom(&self) -> &FinObj {
        &self.dom
    }

    pub fn cod(&self) -> &FinObj {
        &self.cod
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn apply(&self, component: usize, x: usize) -> usize {
        self.maps[component][x]
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &FinArrow) -> Result<FinArrow, ToposError> {
        if self.cod != g.dom {
            return Err(ToposError::Mismatch(format!("codomain {} vs domain {}", self.cod, g.dom)));
        }
        let maps = self.maps.iter().zip(&g.maps).map(|(f, g)| f.iter().map(|&x| g[x]).collect()).collect();
        Ok(FinArrow { dom: self.dom.clone(), cod: g.cod.clone(), maps })
    }

    /// `⟨f, g⟩ : X → B × C`.
    pub fn pair(f: &FinArrow, g: &FinArrow) -> Result<FinArrow, ToposError> {
        if f.dom != g.dom {
            return Err(ToposError::Mismatch("pairing arrows with different domains".into()));
        }
        let cod = FinObj::product(&f.cod, &g.cod)?;
        let maps = (0..f.dom.arity())
            .map(|i| {
                let m = g.cod.components[i].len();
                f.maps[i].iter().zip(&g.maps[i]).map(|(&x, &y)| x * m + y).collect()
            })
            .collect();
        Ok(FinArrow { dom: f.dom.clone(), cod, maps })
    }

    /// Projections `A × B → A` and `A × B → B`.
    pub fn projections(a: &FinObj, b: &FinObj) -> Result<(FinArrow, FinArrow), ToposError> {
        let ab = FinObj::product(a, b)?;
        let m = b.sizes();
        let p1 = ab.sizes().iter().enumerate().map(|(i, &n)| (0..n).map(|k| k / m[i]).collect()).collect();
        let p2 = ab.sizes().iter().enumerate().map(|(i, &n)| (0..n).map(|k| k % m[i]).collect()).collect();
        Ok((
            FinArrow { dom: ab.clone(), cod: a.clone(), maps: p1 },
            FinArrow { dom: ab, cod: b.clone(), maps: p2 },
        ))
    }

    /// The arrow `1 → A` picking `indices[i]` in component `i`.
    pub fn point(a: &FinObj, indices: &[usize]) -> Result<FinArrow, ToposError> {
        FinArrow::new(FinObj::terminal(a.arity()), a.clone(), indices.iter().map(|&i| vec![i]).collect())
    }
}

impl fmt::Display for FinArrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let ps: Vec<String> = m
                    .iter()
                    .enumerate()
                    .map(|(x, &y)| format!("{}->{}", self.dom.components[i][x], self.cod.components[i][y]))
                    .collect();
                format!("[{}]", ps.join(","))
            })
            .collect();
        write!(f, "{} -> {} : ({})", self.dom.shape(), self.cod.shape(), parts.join(", "))
    }
}

pub fn classify(f: &FinArrow) -> Classification {
    let mut mono = true;
    let mut epi = true;
    for (i, m) in f.maps.iter().enumerate() {
        let mut hit = vec![0usize; f.cod.components[i].len()];
        for &y in m {
            hit[y] += 1;
        }
        mono &= hit.iter().all(|&h| h <= 1);
        epi &= hit.iter().all(|&h| h >= 1);
    }
    Classification { mono, epi, iso: mono && epi }
}

/// A subobject as componentwise membership masks over its ambient object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subobject {
    ambient: FinObj,
    masks: Vec<Vec<bool>>,
}

impl Subobject {
    pub fn new(ambient: FinObj, masks: Vec<Vec<bool>>) -> Result<Self, ToposError> {
        same_arity(ambient.arity(), masks.len())?;
        for (i, m) in masks.iter().enumerate() {
            if m.len() != ambient.components[i].len() {
                return Err(ToposError::NotAFunction { component: i, msg: "mask length".into() });
            }
        }
        Ok(Subobject { ambient, masks })
    }

    pub fn from_labels(ambient: &FinObj, labels: &[Vec<String>]) -> Result<Self, ToposError> {
        same_arity(ambient.arity(), labels.len())?;
        let mut s = Subobject::empty(ambient);
        for (i, ls) in labels.iter().enumerate() {
            for l in ls {
                s.masks[i][ambient.index_of(i, l)?] = true;
            }
        }
        Ok(s)
    }

    pub fn full(ambient: &FinObj) -> Self {
        Subobject { ambient: ambient.clone(), masks: ambient.sizes().iter().map(|&n| vec![true; n]).collect() }
    }

    pub fn empty(ambient: &FinObj) -> Self {
        Subobject { ambient: ambient.clone(), masks: ambient.sizes().iter().map(|&n| vec![false; n]).collect() }
    }

    pub fn ambient(&self) -> &FinObj {
        &self.ambient
    }

    pub fn masks(&self) -> &[Vec<bool>] {
        &self.masks
    }

    pub fn contains(&self, component: usize, x: usize) -> bool {
        self.masks[component][x]
    }

    /// Indices of members of a component, in order.
    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.masks[component].len()).filter(|&x| self.masks[component][x]).collect()
    }

    /// The domain of the mono: the members with their ambient labels.
    pub fn object(&self) -> FinObj {
        let components = (0..self.ambient.arity())
            .map(|i| self.members(i).into_iter().map(|x| self.ambient.components[i][x].clone()).collect())
            .collect();
        FinObj { components }
    }

    pub fn inclusion(&self) -> FinArrow {
        FinArrow {
            dom: self.object(),
            cod: self.ambient.clone(),
            maps: (0..self.ambient.arity()).map(|i| self.members(i)).collect(),
        }
    }

    fn zip_with(&self, other: &Subobject, op: impl Fn(bool, bool) -> bool) -> Result<Subobject, ToposError> {
        if self.ambient != other.ambient {
            return Err(ToposError::Mismatch("subobjects of different objects".into()));
        }
        let masks = self
            .masks
            .iter()
            .zip(&other.masks)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect())
            .collect();
        Ok(Subobject { ambient: self.ambient.clone(), masks })
    }

    pub fn intersection(&self, other: &Subobject) -> Result<Subobject, ToposError> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Subobject) -> Result<Subobject, ToposError> {
        self.zip_with(other, |a, b| a || b)
    }

    /// `¬self ∪ other`, the implication of the Boolean subobject lattice.
    pub fn implies(&self, other: &Subobject) -> Result<Subobject, ToposError> {
        self.zip_with(other, |a, b| !a || b)
    }

    pub fn is_subset(&self, other: &Subobject) -> Result<bool, ToposError> {
        Ok(self.implies(other)?.is_full())
    }

    pub fn is_full(&self) -> bool {
        self.masks.iter().flatten().all(|&b| b)
    }

    pub fn is_empty(&self) -> bool {
        self.masks.iter().flatten().all(|&b| !b)
    }

    /// Membership of a global element `1 → ambient`.
    pub fn contains_point(&self, p: &FinArrow) -> bool {
        p.maps.iter().enumerate().all(|(i, m)| self.masks[i][m[0]])
    }
}

impl fmt::Display for Subobject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.object())
    }
}

pub fn complement(m: &Subobject) -> Subobject {
    Subobject {
        ambient: m.ambient.clone(),
        masks: m.masks.iter().map(|c| c.iter().map(|b| !b).collect()).collect(),
    }
}

/// The image of `f` as a subobject of its codomain.
pub fn image(f: &FinArrow) -> Subobject {
    let mut s = Subobject::empty(&f.cod);
    for (i, m) in f.maps.iter().enumerate() {
        for &y in m {
            s.masks[i][y] = true;
        }
    }
    s
}

/// `f⁻¹(s)` as a subobject of the domain.
pub fn preimage(f: &FinArrow, s: &Subobject) -> Result<Subobject, ToposError> {
    if f.cod != s.ambient {
        return Err(ToposError::Mismatch("preimage along an arrow into a different object".into()));
    }
    let masks = f.maps.iter().enumerate().map(|(i, m)| m.iter().map(|&y| s.masks[i][y]).collect()).collect();
    Ok(Subobject { ambient: f.dom.clone(), masks })
}

/// `f = m ∘ e` with `e` epi onto the image and `m` its inclusion.
pub fn epi_mono_factorize(f: &FinArrow) -> (FinArrow, FinArrow) {
    let im = image(f);
    let m = im.inclusion();
    let maps = f
        .maps
        .iter()
        .enumerate()
        .map(|(i, fm)| {
            let members = im.members(i);
            fm.iter().map(|y| members.binary_search(y).expect("in image")).collect()
        })
        .collect();
    (FinArrow { dom: f.dom.clone(), cod: im.object(), maps }, m)
}

/// The canonical pullback of a cospan `f : X → Z ← Y : g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pullback {
    pub object: FinObj,
    pub p1: FinArrow,
    pub p2: FinArrow,
}

impl Pullback {
    /// The unique `u : W → P` with `p1 ∘ u = a` and `p2 ∘ u = b`, when
    /// `(a, b)` is a cone.
    pub fn mediate(&self, a: &FinArrow, b: &FinArrow) -> Option<FinArrow> {
        if a.dom != b.dom || a.cod != self.p1.cod || b.cod != self.p2.cod {
            return None;
        }
        let mut maps = Vec::with_capacity(a.maps.len());
        for i in 0..a.maps.len() {
            let mut m = Vec::with_capacity(a.maps[i].len());
            for (&x, &y) in a.maps[i].iter().zip(&b.maps[i]) {
                m.push((0..self.p1.maps[i].len()).find(|&k| self.p1.maps[i][k] == x && self.p2.maps[i][k] == y)?);
            }
            maps.push(m);
        }
        Some(FinArrow { dom: a.dom.clone(), cod: self.object.clone(), maps })
    }
}

pub fn pullback(f: &FinArrow, g: &FinArrow) -> Result<Pullback, ToposError> {
    if f.cod != g.cod {
        return Err(ToposError::Mismatch("pullback of arrows with different codomains".into()));
    }
    let arity = f.dom.arity();
    let mut components = Vec::with_capacity(arity);
    let (mut m1, mut m2) = (Vec::with_capacity(arity), Vec::with_capacity(arity));
    for i in 0..arity {
        let (mut labels, mut l, mut r) = (Vec::new(), Vec::new(), Vec::new());
        for (x, &fx) in f.maps[i].iter().enumerate() {
            for (y, &gy) in g.maps[i].iter().enumerate() {
                if fx == gy {
                    labels.push(format!("({},{})", f.dom.components[i][x], g.dom.components[i][y]));
                    l.push(x);
                    r.push(y);
                }
            }
        }
        components.push(labels);
        m1.push(l);
        m2.push(r);
    }
    let object = FinObj { components };
    Ok(Pullback {
        p1: FinArrow { dom: object.clone(), cod: f.dom.clone(), maps: m1 },
        p2: FinArrow { dom: object.clone(), cod: g.dom.clone(), maps: m2 },
        object,
    })
}

/// The section of `e` picking least preimages, or `None` when `e` is not
/// epi.
pub fn find_section(e: &FinArrow) -> Option<FinArrow> {
    let maps: Option<Vec<Vec<usize>>> = e
        .maps
        .iter()
        .enumerate()
        .map(|(i, m)| (0..e.cod.components[i].len()).map(|y| m.iter().position(|&v| v == y)).collect())
        .collect();
    Some(FinArrow { dom: e.cod.clone(), cod: e.dom.clone(), maps: maps? })
}

/// All arrows `a → b`, lexicographic in the value tables.
pub fn arrows(a: &FinObj, b: &FinObj) -> Vec<FinArrow> {
    let per_component: Vec<Vec<Vec<usize>>> = a
        .sizes()
        .iter()
        .zip(b.sizes())
        .map(|(&n, m)| {
            (0..n).fold(vec![Vec::new()], |acc, _| {
                acc.into_iter()
                    .flat_map(|v| {
                        (0..m).map(move |y| {
                            let mut w = v.clone();
                            w.push(y);
                            w
                        })
                    })
                    .collect()
            })
        })
        .collect();
    per_component
        .iter()
        .fold(vec![Vec::new()], |acc: Vec<Vec<Vec<usize>>>, choices| {
            acc.into_iter()
                .flat_map(|v| {
                    choices.iter().map(move |c| {
                        let mut w = v.clone();
                        w.push(c.clone());
                        w
                    })
                })
                .collect()
        })
        .into_iter()
        .map(|maps| FinArrow { dom: a.clone(), cod: b.clone(), maps })
        .collect()
}

/// All subobjects of `a`, by increasing bit pattern (component 0 least
/// significant).
pub fn subobjects(a: &FinObj) -> Vec<Subobject> {
    let sizes = a.sizes();
    let total: usize = sizes.iter().sum();
    (0u64..1 << total)
        .map(|bits| {
            let mut k = 0;
            let masks = sizes
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| {
                            let b = bits >> k & 1 == 1;
                            k += 1;
                            b
                        })
                        .collect()
                })
                .collect();
            Subobject { ambient: a.clone(), masks }
        })
        .collect()
}

/// Global elements `1 → a`, lexicographic with component 0 most
/// significant.
pub fn points(a: &FinObj) -> Vec<FinArrow> {
    arrows(&FinObj::terminal(a.arity()), a)
}
