//! Instance generators over small carriers.
//!
//! PERs are generated from partial partitions: an element outside every
//! block has `ρ(x,x) = ∅`, elements of one block share a realizer set and
//! elements of different blocks are unrelated. Propositions are constant on
//! blocks. Generated values are only kept once certified.

use serde::{Deserialize, Serialize};

use super::{make_per, make_prop, EffConfig, EffError, Per, StrictRelationalProp};
use crate::pca::numeral;
use crate::realizability::{Carrier, Predicate, RealizerSet};

pub fn carrier(n: usize) -> Carrier {
    Carrier::new((0..n).map(|i| format!("a{i}"))).expect("distinct labels")
}

/// Numeral sets `{n_k : k ∈ ks}`.
pub fn numerals(ks: &[u32]) -> RealizerSet {
    RealizerSet::of(&ks.iter().map(|&k| numeral(k)).collect::<Vec<_>>())
}

/// All partial partitions of `0..n` as block labels in first-occurrence
/// order (`None` = outside every block).
pub fn partial_partitions(n: usize) -> Vec<Vec<Option<usize>>> {
    fn go(i: usize, n: usize, used: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for choice in std::iter::once(None).chain((0..=used).map(Some)) {
            cur.push(choice);
            let next = if choice == Some(used) { used + 1 } else { used };
            go(i + 1, n, next, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, 0, &mut Vec::new(), &mut out);
    out
}

fn block_count(blocks: &[Option<usize>]) -> usize {
    blocks.iter().flatten().map(|b| b + 1).max().unwrap_or(0)
}

/// All assignments of one option per block.
fn per_block<T: Clone>(k: usize, options: &[T]) -> Vec<Vec<T>> {
    (0..k).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|v| {
                options.iter().map(move |o| {
                    let mut w = v.clone();
                    w.push(o.clone());
                    w
                })
            })
            .collect()
    })
}

/// Description of a class-structured PER.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPer {
    pub blocks: Vec<Option<usize>>,
    pub class_sets: Vec<RealizerSet>,
}

impl ClassPer {
    pub fn relation(&self) -> Predicate {
        let c = carrier(self.blocks.len());
        let n = c.len();
        Predicate::from_fn(&Carrier::product(&c, &c), |i| match (self.blocks[i / n], self.blocks[i % n]) {
            (Some(a), Some(b)) if a == b => self.class_sets[a].clone(),
            _ => RealizerSet::empty(),
        })
    }

    /// A predicate constant on blocks, `∅` outside them.
    pub fn block_predicate(&self, values: &[RealizerSet]) -> Predicate {
        Predicate::from_fn(&carrier(self.blocks.len()), |x| match self.blocks[x] {
            Some(b) => values[b].clone(),
            None => RealizerSet::empty(),
        })
    }

    pub fn certify(&self, cfg: &EffConfig) -> Result<Per, EffError> {
        make_per(&carrier(self.blocks.len()), self.relation(), cfg)
    }
}

/// Class PERs on `1..=max_n` elements with each block's set drawn from
/// `options`.
pub fn class_pers(max_n: usize, options: &[RealizerSet]) -> Vec<ClassPer> {
    (1..=max_n)
        .flat_map(partial_partitions)
        .flat_map(|blocks| {
            per_block(block_count(&blocks), options)
                .into_iter()
                .map(move |class_sets| ClassPer { blocks: blocks.clone(), class_sets })
        })
        .collect()
}

/// Block-constant proposition values for a class PER: per block `∅`, the
/// block's set, or its least element.
pub fn prop_values(per: &ClassPer) -> Vec<Vec<RealizerSet>> {
    let opts: Vec<Vec<RealizerSet>> = per
        .class_sets
        .iter()
        .map(|r| {
            let mut o = vec![RealizerSet::empty(), r.clone()];
            if let Some(least) = r.as_finite().and_then(|s| s.iter().next()) {
                let single = RealizerSet::of([least]);
                if !o.contains(&single) {
                    o.push(single);
                }
            }
            o
        })
        .collect();
    opts.iter().fold(vec![Vec::new()], |acc, o| {
        acc.into_iter()
            .flat_map(|v| {
                o.iter().map(move |x| {
                    let mut w = v.clone();
                    w.push(x.clone());
                    w
                })
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertianInstance {
    pub shape: ClassPer,
    pub per: Per,
    pub prop: StrictRelationalProp,
}

/// Candidate inputs for ε-synthesis: class PERs with at least one block
/// (so the arrow to `1` is epic), block sets from `options`, and every
/// block-constant proposition.
pub fn hilbertian_candidates(max_n: usize, options: &[RealizerSet]) -> Vec<(ClassPer, Vec<RealizerSet>)> {
    class_pers(max_n, options)
        .into_iter()
        .filter(|p| block_count(&p.blocks) > 0)
        .flat_map(|p| prop_values(&p).into_iter().map(move |v| (p.clone(), v)))
        .collect()
}

pub fn certify_instance(shape: &ClassPer, values: &[RealizerSet], cfg: &EffConfig) -> Result<HilbertianInstance, EffError> {
    let per = shape.certify(cfg)?;
    let prop = make_prop(&per, shape.block_predicate(values), cfg)?;
    Ok(HilbertianInstance { shape: shape.clone(), per, prop })
}

/// All maps `0..n → 0..m` in lexicographic order.
pub fn functions(n: usize, m: usize) -> Vec<Vec<usize>> {
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
}
