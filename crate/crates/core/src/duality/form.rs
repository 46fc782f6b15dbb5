use std::collections::HashMap;

use serde::Serialize;

use super::{index_sets, power_sheaf, stable_open_lattice, GroupoidOverS};
use crate::error::{Error, Result};
use crate::groupoid::GroupoidMorphism;
use crate::sheaves::EquivariantSheaf;
use crate::topology::{set_of, PointSet};

/// `U_G^k` with its stable open sets.
#[derive(Clone, Debug)]
pub struct PowerLevel {
    pub k: usize,
    pub sheaf: EquivariantSheaf,
    pub points: Vec<(usize, Vec<usize>)>,
    pub opens: Vec<PointSet>,
    index: HashMap<(usize, Vec<usize>), usize>,
    open_index: HashMap<PointSet, usize>,
}

impl PowerLevel {
    pub fn build(g: &GroupoidOverS, k: usize, limit: usize) -> Result<PowerLevel> {
        let (sheaf, points) = power_sheaf(g, k)?;
        let opens = stable_open_lattice(&g.g, &sheaf, limit)?;
        let index = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let open_index = index_sets(&opens);
        Ok(PowerLevel { k, sheaf, points, opens, index, open_index })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, x: usize, t: &[usize]) -> Option<usize> {
        self.index.get(&(x, t.to_vec())).copied()
    }

    pub fn open_index(&self, s: &PointSet) -> Option<usize> {
        self.open_index.get(s).copied()
    }

    /// Set of the listed points; `None` if one is missing.
    pub fn set(&self, pts: impl IntoIterator<Item = (usize, Vec<usize>)>) -> Option<PointSet> {
        let idx: Option<Vec<usize>> = pts.into_iter().map(|p| self.index.get(&p).copied()).collect();
        Some(set_of(self.len(), idx?))
    }
}

/// An arrow `A -> B` of `Form(G)`: a stable open functional graph inside
/// `U^{k+l}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormArrow {
    pub src: (usize, usize),
    pub tgt: (usize, usize),
    /// Index into the stable opens of level `k + l`.
    pub graph: usize,
    pub inclusion: bool,
    pub identity: bool,
}

/// `Form(G)` at context lengths up to `kmax`; levels up to `2 kmax` hold the
/// graphs of arrows.
#[derive(Clone, Debug)]
pub struct RelationCategory {
    pub base: GroupoidOverS,
    pub kmax: usize,
    pub levels: Vec<PowerLevel>,
    pub arrows: Vec<FormArrow>,
    arrow_index: HashMap<((usize, usize), (usize, usize), usize), usize>,
}

impl RelationCategory {
    pub fn objects(&self, k: usize) -> &[PointSet] {
        &self.levels[k].opens
    }

    pub fn object_counts(&self) -> Vec<usize> {
        (0..=self.kmax).map(|k| self.levels[k].opens.len()).collect()
    }

    pub fn graph(&self, a: &FormArrow) -> &PointSet {
        &self.levels[a.src.0 + a.tgt.0].opens[a.graph]
    }

    pub fn find_arrow(&self, src: (usize, usize), tgt: (usize, usize), graph: usize) -> Option<usize> {
        self.arrow_index.get(&(src, tgt, graph)).copied()
    }

    /// Relational composite of `first: A -> B` and `second: B -> C`.
    pub fn compose(&self, second: usize, first: usize) -> Result<usize> {
        let (f, g) = (&self.arrows[first], &self.arrows[second]);
        if f.tgt != g.src {
            return Err(Error::Precondition("arrows are not composable".into()));
        }
        let (k, l, m) = (f.src.0, f.tgt.0, g.tgt.0);
        let lf = &self.levels[k + l];
        let lg = &self.levels[l + m];
        let mut next: HashMap<(usize, Vec<usize>), Vec<usize>> = HashMap::new();
        for p in self.graph(g).ones() {
            let (x, t) = &lg.points[p];
            next.insert((*x, t[..l].to_vec()), t[l..].to_vec());
        }
        let mut out = Vec::new();
        for p in self.graph(f).ones() {
            let (x, t) = &lf.points[p];
            if let Some(z) = next.get(&(*x, t[k..].to_vec())) {
                let mut u = t[..k].to_vec();
                u.extend_from_slice(z);
                out.push((*x, u));
            }
        }
        let level = &self.levels[k + m];
        let set = level.set(out).ok_or_else(|| Error::Invariant("composite leaves U^k".into()))?;
        let graph = level.open_index(&set).ok_or_else(|| Error::Invariant("composite graph is not stable open".into()))?;
        self.find_arrow(f.src, g.tgt, graph)
            .ok_or_else(|| Error::Invariant("composite is not an arrow".into()))
    }

    pub fn identity(&self, obj: (usize, usize)) -> usize {
        let (k, i) = obj;
        let graph = diagonal(&self.levels[2 * k], &self.levels[k], &self.levels[k].opens[i]);
        let g = self.levels[2 * k].open_index(&graph).expect("identity graph is stable open");
        self.find_arrow(obj, obj, g).expect("identity is an arrow")
    }
}

/// `{(x, t, t) : (x, t) ∈ a}` inside `U^{2k}`.
fn diagonal(up: &PowerLevel, level: &PowerLevel, a: &PointSet) -> PointSet {
    let pts = a.ones().map(|p| {
        let (x, t) = &level.points[p];
        let mut tt = t.clone();
        tt.extend_from_slice(t);
        (*x, tt)
    });
    up.set(pts).expect("diagonal points exist")
}

pub const DEFAULT_LATTICE_LIMIT: usize = 1 << 20;

/// Builds `Form(G)` for context lengths up to `kmax`.
pub fn form_functor(g: &GroupoidOverS, kmax: usize, limit: usize) -> Result<RelationCategory> {
    form_functor_levels(g, kmax, 2 * kmax, limit)
}

/// As [`form_functor`], with stable opens computed up to `U^top` for
/// `top >= 2 kmax`.
pub fn form_functor_levels(g: &GroupoidOverS, kmax: usize, top: usize, limit: usize) -> Result<RelationCategory> {
    let top = top.max(2 * kmax);
    let levels = (0..=top).map(|k| PowerLevel::build(g, k, limit)).collect::<Result<Vec<_>>>()?;
    let mut arrows = Vec::new();
    for k in 0..=kmax {
        for l in 0..=kmax {
            let up = &levels[k + l];
            for (ri, r) in up.opens.iter().enumerate() {
                let mut value: HashMap<(usize, Vec<usize>), Vec<usize>> = HashMap::new();
                let mut functional = true;
                for p in r.ones() {
                    let (x, t) = &up.points[p];
                    if value.insert((*x, t[..k].to_vec()), t[k..].to_vec()).is_some() {
                        functional = false;
                        break;
                    }
                }
                if !functional {
                    continue;
                }
                let dom = levels[k].set(value.keys().cloned()).expect("projection lands in U^k");
                let Some(src) = levels[k].open_index(&dom) else { continue };
                let img = levels[l].set(value.iter().map(|((x, _), t2)| (*x, t2.clone()))).expect("projection lands in U^l");
                let diag_like = k == l && value.iter().all(|((_, t1), t2)| t1 == t2);
                for (j, b) in levels[l].opens.iter().enumerate() {
                    if img.is_subset(b) {
                        arrows.push(FormArrow {
                            src: (k, src),
                            tgt: (l, j),
                            graph: ri,
                            inclusion: diag_like,
                            identity: diag_like && src == j,
                        });
                    }
                }
            }
        }
    }
    arrows.sort_by_key(|a| (a.src, a.tgt, a.graph));
    let arrow_index = arrows.iter().enumerate().map(|(i, a)| ((a.src, a.tgt, a.graph), i)).collect();
    Ok(RelationCategory { base: g.clone(), kmax, levels, arrows, arrow_index })
}

/// Action of `Form` on a morphism `h: G' -> G` over `𝕊`: stable opens pull
/// back along `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormMap {
    /// `objects[k][i]` is the image of stable open `i` of `U^k`, for every
    /// computed level.
    pub objects: Vec<Vec<usize>>,
    pub arrows: Vec<usize>,
}

pub fn form_on_morphism(h: &GroupoidMorphism, from: &RelationCategory, to: &RelationCategory) -> Result<FormMap> {
    h.verify(&to.base.g, &from.base.g)?;
    if (0..to.base.g.num_objects()).any(|y| from.base.f.f0[h.f0[y]] != to.base.f.f0[y]) {
        return Err(Error::Precondition("morphism does not commute with the maps to S".into()));
    }
    if from.kmax != to.kmax || from.levels.len() != to.levels.len() {
        return Err(Error::Precondition("bounds differ".into()));
    }
    let pull = |k: usize, s: &PointSet| -> Result<usize> {
        let (lf, lt) = (&from.levels[k], &to.levels[k]);
        let set = set_of(
            lt.len(),
            (0..lt.len()).filter(|&p| {
                let (y, t) = &lt.points[p];
                lf.point(h.f0[*y], t).is_some_and(|q| s.contains(q))
            }),
        );
        lt.open_index(&set).ok_or_else(|| Error::Invariant("pullback is not stable open".into()))
    };
    let mut levels = Vec::new();
    for k in 0..from.levels.len() {
        levels.push(from.levels[k].opens.iter().map(|s| pull(k, s)).collect::<Result<Vec<_>>>()?);
    }
    let mut arrows = Vec::new();
    for a in &from.arrows {
        let graph = levels[a.src.0 + a.tgt.0][a.graph];
        let src = (a.src.0, levels[a.src.0][a.src.1]);
        let tgt = (a.tgt.0, levels[a.tgt.0][a.tgt.1]);
        arrows.push(
            to.find_arrow(src, tgt, graph)
                .ok_or_else(|| Error::Invariant("pulled-back graph is not an arrow".into()))?,
        );
    }
    Ok(FormMap { objects: levels, arrows })
}
