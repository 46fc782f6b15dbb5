//! `Mod` and `Form` over the groupoid `𝕊` of subsets of `S`, the syntactic
//! category, unit and counit, and the `Sem_S` conditions.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{build_model_groupoid, build_s_groupoid, mod_on_interpretation, GroupoidMorphism, ModelGroupoid, TopGroupoid};
use crate::logic::{FormulaInContext, Interpretation, Theory};
use crate::models::ModelClass;
use crate::sheaves::definable_sheaf;
use crate::sheaves::EquivariantSheaf;
use crate::topology::PointSet;

pub mod counit;
pub mod form;
pub mod sem;
pub mod syntactic;
pub mod unit;

pub use counit::{compare, counit, CounitReport};
pub use form::{form_functor, form_functor_levels, form_on_morphism, FormArrow, FormMap, PowerLevel, RelationCategory};
pub use sem::{check_sem_conditions, check_strong_fullness, coherent_check, discrete_counterexample};
pub use syntactic::{syntactic_category, SynArrow, SynObject, TheoryCategory};
pub use unit::{check_triangle_identities, form_models, form_signature, unit, TriangleReport, UnitData};

/// Outcome of a check: `Inconclusive` when only a search bound or
/// headroom stands in the way.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// A topological groupoid with a morphism to `𝕊`.
#[derive(Clone, Debug)]
pub struct GroupoidOverS {
    pub g: TopGroupoid,
    pub f: GroupoidMorphism,
    pub s: Arc<ModelGroupoid>,
}

impl GroupoidOverS {
    pub fn new(g: TopGroupoid, f: GroupoidMorphism, s: Arc<ModelGroupoid>) -> Result<Self> {
        f.verify(&g, &s.g)?;
        Ok(GroupoidOverS { g, f, s })
    }

    pub fn n(&self) -> usize {
        self.s.mc.n
    }

    /// Underlying set of `f0(x)`, as its blocks.
    pub fn carrier(&self, x: usize) -> &[Vec<usize>] {
        self.s.mc.models[self.f.f0[x]].blocks()
    }
}

/// `Mod(T)` with the forgetful morphism to `𝕊`, and the model groupoid it
/// came from.
pub fn mod_functor(t: &Theory, n: usize, limit: u64) -> Result<(GroupoidOverS, ModelGroupoid)> {
    let s = Arc::new(build_s_groupoid(n)?);
    let mg = build_model_groupoid(ModelClass::build(t, n, limit)?)?;
    let forget = Interpretation::from_equality(t);
    let f = mod_on_interpretation(&forget, &mg, &s)?;
    Ok((GroupoidOverS::new(mg.g.clone(), f, s)?, mg))
}

/// `T_S` is exposed through the model class: a sequent is in `T_S` iff it
/// holds in every model, so `entails` over the returned class decides it.
/// The interpretation `T -> T_S` is the identity on syntax.
pub fn semantic_quotient(t: &Theory, n: usize, limit: u64) -> Result<(ModelClass, Interpretation)> {
    let mc = ModelClass::build(t, n, limit)?;
    Ok((mc, Interpretation::identity(t)))
}

/// Pullback of a sheaf along a groupoid morphism, with the invariants
/// re-checked.
pub fn pullback_sheaf(
    src: &TopGroupoid,
    mor: &GroupoidMorphism,
    base: &TopGroupoid,
    sheaf: &EquivariantSheaf,
) -> Result<(EquivariantSheaf, Vec<(usize, usize)>)> {
    mor.verify(src, base)?;
    let (out, pairs) = sheaf.pullback(src, mor)?;
    if !out.check(src).all() {
        return Err(Error::Invariant("pullback sheaf fails its checks".into()));
    }
    Ok((out, pairs))
}

/// The generic object `𝒰^k` over `𝕊` pulled back to `g`: points are pairs
/// `(x, t)` with `t` a `k`-tuple of blocks of `f0(x)`.
pub fn power_sheaf(g: &GroupoidOverS, k: usize) -> Result<(EquivariantSheaf, Vec<(usize, Vec<usize>)>)> {
    let u = definable_sheaf(&g.s, &FormulaInContext::top(k))?;
    let (sheaf, pairs) = pullback_sheaf(&g.g, &g.f, &g.s.g, &u.sheaf)?;
    let points = pairs.into_iter().map(|(x, p)| (x, u.points[p].1.clone())).collect();
    Ok((sheaf, points))
}

/// Least stable open set containing `p`.
pub fn stable_open_generator(g: &TopGroupoid, sheaf: &EquivariantSheaf, p: usize) -> PointSet {
    let mut s = sheaf.space.empty_set();
    s.insert(p);
    loop {
        let next = sheaf.space.open_hull(&sheaf.stabilize(g, &s));
        if next == s {
            return s;
        }
        s = next;
    }
}

/// All stable open sets, as unions of the least stable opens around points,
/// sorted by size and then by elements.
pub fn stable_open_lattice(g: &TopGroupoid, sheaf: &EquivariantSheaf, limit: usize) -> Result<Vec<PointSet>> {
    let mut gens: Vec<PointSet> = Vec::new();
    let mut seen_gen = HashSet::new();
    for p in 0..sheaf.len() {
        let s = stable_open_generator(g, sheaf, p);
        if seen_gen.insert(s.clone()) {
            gens.push(s);
        }
    }
    let mut seen: HashSet<PointSet> = HashSet::new();
    let mut queue = VecDeque::new();
    let empty = sheaf.space.empty_set();
    seen.insert(empty.clone());
    queue.push_back(empty);
    while let Some(o) = queue.pop_front() {
        for gen in &gens {
            if gen.is_subset(&o) {
                continue;
            }
            let mut next = o.clone();
            next.union_with(gen);
            if seen.insert(next.clone()) {
                if seen.len() > limit {
                    return Err(Error::LimitExceeded {
                        what: "stable-open lattice".into(),
                        estimate: format!("> {limit}"),
                        limit: limit as u64,
                    });
                }
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<PointSet> = seen.into_iter().collect();
    out.sort_by_cached_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
    Ok(out)
}

/// Position of each set in a sorted list.
pub(crate) fn index_sets(sets: &[PointSet]) -> HashMap<PointSet, usize> {
    sets.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect()
}

/// Context length needed to interpret every symbol of `t` in `Form`.
pub fn effective_k(t: &Theory, kmax: usize) -> usize {
    let rel = t.sig.rels.iter().map(|s| s.arity).max().unwrap_or(0);
    let fun = t.sig.funs.iter().map(|s| s.arity + 1).max().unwrap_or(0);
    kmax.max(rel).max(fun)
}
