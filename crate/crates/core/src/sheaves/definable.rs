use std::collections::HashMap;

use serde::Serialize;

use super::EquivariantSheaf;
use crate::error::{Error, Result};
use crate::groupoid::ModelGroupoid;
use crate::logic::{Formula, FormulaInContext};
use crate::models::{eval_formula, holds_at, star_extension, all_tuples};
use crate::topology::{set_of, BasicOpenM, FinSpace, PointSet};

/// `<<x|φ>>`: pairs `(M, [a])` with `[a]` in the extension of `φ` in `M`,
/// ordered by model and then tuple, with the logical topology and the
/// application action.
#[derive(Clone, Debug)]
pub struct DefinableSheaf {
    pub formula: FormulaInContext,
    pub points: Vec<(usize, Vec<usize>)>,
    pub sheaf: EquivariantSheaf,
    index: HashMap<(usize, Vec<usize>), usize>,
}

/// Builds `<<x|φ>>`. The subbasis consists of the preimages of the object
/// subbasis and the sets `<x_i = b>` of points whose `i`-th class is `[b]`;
/// these generate the topology of the sets `<[x,y|ψ], b>`.
pub fn definable_sheaf(mg: &ModelGroupoid, f: &FormulaInContext) -> Result<DefinableSheaf> {
    let (mc, g) = (&mg.mc, &mg.g);
    f.check(&mc.sig)?;
    let formula = f.canonical_form();
    let k = formula.arity();
    let mut points = Vec::new();
    for (m, model) in mc.models.iter().enumerate() {
        for t in eval_formula(model, &formula)? {
            points.push((m, t));
        }
    }
    let index: HashMap<(usize, Vec<usize>), usize> =
        points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let np = points.len();
    let mut sub = Vec::new();
    for (name, s) in g.objects.subbasis() {
        sub.push((format!("r^-1{name}"), set_of(np, (0..np).filter(|&p| s.contains(points[p].0)))));
    }
    for i in 0..k {
        for b in 0..mc.n {
            let s = set_of(
                np,
                (0..np).filter(|&p| {
                    let (m, t) = &points[p];
                    mc.models[*m].block_of(b) == Some(t[i])
                }),
            );
            sub.push((format!("<x{i}={b}>"), s));
        }
    }
    let space = FinSpace::new(np, sub);
    let proj = points.iter().map(|p| p.0).collect();
    let sheaf = EquivariantSheaf::new(g, space, proj, |a, p| {
        let (_, t) = &points[p];
        let iso = &mc.isos[a];
        let moved: Vec<usize> = t.iter().map(|&b| iso.perm[b]).collect();
        index[&(iso.cod, moved)]
    })?;
    Ok(DefinableSheaf { formula, points, sheaf, index })
}

impl DefinableSheaf {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, model: usize, tuple: &[usize]) -> Option<usize> {
        self.index.get(&(model, tuple.to_vec())).copied()
    }

    /// `θ(f, p)`: transport the tuple along the isomorphism.
    pub fn act_theta(&self, f: usize, p: usize) -> Result<usize> {
        self.sheaf
            .act(f, p)
            .ok_or_else(|| Error::Precondition(format!("point {p} is not over the domain of arrow {f}")))
    }

    /// The section `s_a`, defined on `<[x|φ], a>`.
    pub fn section(&self, mg: &ModelGroupoid, params: &[usize]) -> Result<Vec<Option<usize>>> {
        if params.len() != self.formula.arity() {
            return Err(Error::Precondition("parameter list does not match the context".into()));
        }
        if params.iter().any(|&a| a >= mg.mc.n) {
            return Err(Error::Precondition("parameter outside S".into()));
        }
        Ok(mg
            .mc
            .models
            .iter()
            .enumerate()
            .map(|(m, model)| model.classes(params).and_then(|t| self.point(m, &t)))
            .collect())
    }

    pub fn section_image(&self, mg: &ModelGroupoid, params: &[usize]) -> Result<PointSet> {
        Ok(set_of(self.len(), self.section(mg, params)?.into_iter().flatten()))
    }

    /// `<[x,y|ψ], b>`: points `(M,[a])` with `[b]` defined and `φ ∧ ψ`
    /// holding at `([a],[b])`.
    pub fn basic_open(&self, mg: &ModelGroupoid, psi: &FormulaInContext, b: &[usize]) -> Result<PointSet> {
        let k = self.formula.arity();
        if psi.arity() != k + b.len() {
            return Err(Error::IllFormed("context must extend the sheaf's context by the parameters".into()));
        }
        psi.check(&mg.mc.sig)?;
        let mut out = PointSet::with_capacity(self.len());
        for (p, (m, t)) in self.points.iter().enumerate() {
            let model = &mg.mc.models[*m];
            if let Some(cls) = model.classes(b) {
                let all: Vec<usize> = t.iter().chain(&cls).copied().collect();
                if holds_at(model, &psi.ctx, &psi.body, &all)? {
                    out.insert(p);
                }
            }
        }
        Ok(out)
    }

    /// `<[y | ∃x. φ ∧ ψ], b>`, the expected projection of `<[x,y|ψ], b>`.
    pub fn projected_basic_open(&self, psi: &FormulaInContext, b: &[usize]) -> Result<BasicOpenM> {
        let k = self.formula.arity();
        let l = b.len();
        // Context y is 0..l; x is bound as l..l+k.
        let xs: Vec<usize> = (l..l + k).collect();
        let mut all = xs.clone();
        all.extend(0..l);
        let body = Formula::and(self.formula.instantiate(&xs), psi.instantiate(&all));
        BasicOpenM::new(FormulaInContext::canonical(l, Formula::exists_all(&xs, body)), b.to_vec())
    }

    /// The sub-sheaf `<<x | φ ∧ γ>>` as a set of points.
    pub fn subset_for(&self, mg: &ModelGroupoid, gamma: &FormulaInContext) -> Result<PointSet> {
        if gamma.arity() != self.formula.arity() {
            return Err(Error::IllFormed("context length differs from the sheaf's".into()));
        }
        gamma.check(&mg.mc.sig)?;
        let mut out = PointSet::with_capacity(self.len());
        for (p, (m, t)) in self.points.iter().enumerate() {
            if holds_at(&mg.mc.models[*m], &gamma.ctx, &gamma.body, t)? {
                out.insert(p);
            }
        }
        Ok(out)
    }
}

/// The stabilization of `<[x,y|ψ], a>` compared with `<<x | φ ∧ ∃y ψ>>`.
///
/// For each point `(M,[b])` of the definable set, each witness `[c]` is
/// tried in order: if `[a]` already names `[c]` the identity serves,
/// otherwise the star construction supplies `f: N -> M` with
/// `f([a]) = [c]`, and `(N, f^-1[b])` must lie in the basic set and map to
/// the point. Points where every witness runs out of headroom are gated.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizationReport {
    #[serde(skip)]
    pub basic: PointSet,
    #[serde(skip)]
    pub stabilized: PointSet,
    #[serde(skip)]
    pub definable: PointSet,
    #[serde(skip)]
    pub witnessed: PointSet,
    #[serde(skip)]
    pub gated: PointSet,
    pub failures: Vec<usize>,
}

impl StabilizationReport {
    /// Orbit closure and the definable set agree.
    pub fn exact(&self) -> bool {
        self.stabilized == self.definable
    }

    pub fn is_gated(&self) -> bool {
        !self.gated.is_clear()
    }

    /// Everything the construction promises: no failed witness, the orbit
    /// closure inside the definable set, and every witnessed point in the
    /// orbit closure.
    pub fn consistent(&self) -> bool {
        self.failures.is_empty() && self.stabilized.is_subset(&self.definable) && self.witnessed.is_subset(&self.stabilized)
    }
}

pub fn stabilization_report(
    mg: &ModelGroupoid,
    ds: &DefinableSheaf,
    psi: &FormulaInContext,
    a: &[usize],
) -> Result<StabilizationReport> {
    let (mc, g) = (&mg.mc, &mg.g);
    let k = ds.formula.arity();
    let l = a.len();
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != l {
        return Err(Error::Precondition("parameters must be distinct".into()));
    }
    let basic = ds.basic_open(mg, psi, a)?;
    let stabilized = ds.sheaf.stabilize(g, &basic);
    let ys: Vec<usize> = (k..k + l).collect();
    let exists = Formula::exists_all(&ys, psi.canonical_form().body);
    let definable = ds.subset_for(mg, &FormulaInContext::canonical(k, exists))?;
    let mut witnessed = PointSet::with_capacity(ds.len());
    let mut gated = PointSet::with_capacity(ds.len());
    let mut failures = Vec::new();
    for p in definable.ones() {
        let (m, b) = &ds.points[p];
        let model = &mc.models[*m];
        let mut outcome = None;
        for c in all_tuples(model.num_blocks(), l) {
            let all: Vec<usize> = b.iter().chain(&c).copied().collect();
            if !holds_at(model, &psi.ctx, &psi.body, &all)? {
                continue;
            }
            // The identity works when [a] already names [c].
            if model.classes(a).as_deref() == Some(&c[..]) {
                outcome = Some(basic.contains(p));
                break;
            }
            let reps: Vec<usize> = c.iter().map(|&blk| model.blocks()[blk][0]).collect();
            match star_extension(model, &mc.sig, &reps, a) {
                Ok((target, perm)) => {
                    let nn = mc
                        .index_of(&target)
                        .ok_or_else(|| Error::Invariant("star construction left the class".into()))?;
                    let to_n = mc
                        .iso_index(*m, nn, &perm)
                        .ok_or_else(|| Error::Invariant("star construction is not an iso".into()))?;
                    let moved: Vec<usize> = b.iter().map(|&x| perm[x]).collect();
                    let q = ds.point(nn, &moved).ok_or_else(|| Error::Invariant("transported point missing".into()))?;
                    let back = mc.inverse(to_n);
                    outcome = Some(basic.contains(q) && ds.sheaf.act(back, q) == Some(p));
                    break;
                }
                Err(Error::Headroom(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        match outcome {
            Some(true) => {
                witnessed.insert(p);
            }
            Some(false) => failures.push(p),
            None => {
                gated.insert(p);
            }
        }
    }
    Ok(StabilizationReport { basic, stabilized, definable, witnessed, gated, failures })
}
