use std::collections::{BTreeMap, BTreeSet};

use super::{set_of, CPFilter, FinSpace, PointSet};
use crate::error::{Error, Result};
use crate::logic::{print_in_context, Formula, FormulaInContext, Term};
use crate::models::{all_tuples, holds_at, ModelClass, Profile, Structure, TupleSpace};

/// `⟨[x|φ], a⟩`: the models in which every `a[i]` is defined and the tuple
/// of their classes satisfies `φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicOpenM {
    pub formula: FormulaInContext,
    pub params: Vec<usize>,
}

impl BasicOpenM {
    pub fn new(formula: FormulaInContext, params: Vec<usize>) -> Result<Self> {
        if formula.arity() != params.len() {
            return Err(Error::IllFormed(format!(
                "context of length {} with {} parameter(s)",
                formula.arity(),
                params.len()
            )));
        }
        Ok(Self { formula: formula.canonical_form(), params })
    }

    pub fn trivial() -> Self {
        Self { formula: FormulaInContext::top(0), params: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.params.is_empty() && self.formula.body == Formula::Top
    }

    pub fn describe(&self, mc: &ModelClass) -> String {
        format!("<{}, {:?}>", print_in_context(&mc.sig, &self.formula), self.params)
    }

    /// The intersection of basic opens as one basic open: contexts are
    /// concatenated and the bodies conjoined.
    pub fn conjoin(parts: &[BasicOpenM]) -> BasicOpenM {
        let mut body = Formula::Top;
        let mut params = Vec::new();
        for p in parts {
            let vars: Vec<usize> = (params.len()..params.len() + p.params.len()).collect();
            body = Formula::and(body, p.formula.instantiate(&vars));
            params.extend(&p.params);
        }
        BasicOpenM { formula: FormulaInContext::canonical(params.len(), body), params }
    }

    /// The same set with each parameter listed once, in order of first
    /// occurrence; repeated positions are identified in the formula.
    pub fn distinct(&self) -> BasicOpenM {
        let mut params: Vec<usize> = Vec::new();
        let mut vars = Vec::with_capacity(self.params.len());
        for &a in &self.params {
            let i = params.iter().position(|&b| b == a).unwrap_or_else(|| {
                params.push(a);
                params.len() - 1
            });
            vars.push(i);
        }
        let body = self.formula.instantiate(&vars);
        BasicOpenM { formula: FormulaInContext::canonical(params.len(), body), params }
    }

    /// Parameters that actually constrain the set: all of them, since
    /// `<[x|φ], a>` requires each `a[i]` to be defined.
    pub fn elements(&self) -> BTreeSet<usize> {
        self.params.iter().copied().collect()
    }
}

/// A basic open of isomorphisms: domain condition, preservation pairs
/// `b ↦ c`, codomain condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicOpenI {
    pub dom: BasicOpenM,
    pub pres: Vec<(usize, usize)>,
    pub cod: BasicOpenM,
}

impl BasicOpenI {
    pub fn trivial() -> Self {
        Self { dom: BasicOpenM::trivial(), pres: Vec::new(), cod: BasicOpenM::trivial() }
    }

    pub fn preservation(pres: Vec<(usize, usize)>) -> Self {
        Self { dom: BasicOpenM::trivial(), pres, cod: BasicOpenM::trivial() }
    }
}

fn check_params(mc: &ModelClass, params: &[usize]) -> Result<()> {
    match params.iter().find(|&&a| a >= mc.n) {
        Some(a) => Err(Error::Precondition(format!("parameter {a} outside S"))),
        None => Ok(()),
    }
}

pub fn basic_open_points(mc: &ModelClass, b: &BasicOpenM) -> Result<PointSet> {
    if b.formula.arity() != b.params.len() {
        return Err(Error::IllFormed("arity mismatch in basic open".into()));
    }
    check_params(mc, &b.params)?;
    b.formula.check(&mc.sig)?;
    let mut out = PointSet::with_capacity(mc.len());
    for (i, m) in mc.models.iter().enumerate() {
        if let Some(cls) = m.classes(&b.params) {
            if holds_at(m, &b.formula.ctx, &b.formula.body, &cls)? {
                out.insert(i);
            }
        }
    }
    Ok(out)
}

/// `⟨[x|φ], a⟩` read off a precomputed extension of `φ`.
pub fn points_from_profile(mc: &ModelClass, space: &TupleSpace, profile: &Profile, params: &[usize]) -> PointSet {
    let mut out = PointSet::with_capacity(mc.len());
    for (i, m) in mc.models.iter().enumerate() {
        if let Some(cls) = m.classes(params) {
            if profile.contains(space.point(i, &cls)) {
                out.insert(i);
            }
        }
    }
    out
}

/// `⟨a ↦ b⟩`: isomorphisms defined at `a` and `b` sending `[a]` to `[b]`.
pub fn preservation_set(mc: &ModelClass, a: usize, b: usize) -> PointSet {
    let mut out = PointSet::with_capacity(mc.isos.len());
    for (i, f) in mc.isos.iter().enumerate() {
        if let (Some(x), Some(y)) = (mc.models[f.dom].block_of(a), mc.models[f.cod].block_of(b)) {
            if f.perm[x] == y {
                out.insert(i);
            }
        }
    }
    out
}

pub fn basic_open_arrows(mc: &ModelClass, v: &BasicOpenI) -> Result<PointSet> {
    let dom = basic_open_points(mc, &v.dom)?;
    let cod = basic_open_points(mc, &v.cod)?;
    for &(a, b) in &v.pres {
        check_params(mc, &[a, b])?;
    }
    let mut out = set_of(
        mc.isos.len(),
        (0..mc.isos.len()).filter(|&i| dom.contains(mc.isos[i].dom) && cod.contains(mc.isos[i].cod)),
    );
    for &(a, b) in &v.pres {
        out.intersect_with(&preservation_set(mc, a, b));
    }
    Ok(out)
}

/// The positive diagram of a model as a basic open: parameters are the
/// domain in increasing order, the body lists every atomic fact. This is the
/// least open containing the model.
pub fn model_diagram(mc: &ModelClass, m: usize) -> BasicOpenM {
    let model = &mc.models[m];
    let dom = model.domain().to_vec();
    let pos = |e: usize| dom.iter().position(|&x| x == e).expect("element in domain");
    let rep = |b: usize| pos(model.blocks()[b][0]);
    let mut facts = Vec::new();
    for &e in &dom {
        let r = rep(model.block_of(e).expect("in domain"));
        if r != pos(e) {
            facts.push(Formula::var_eq(r, pos(e)));
        }
    }
    for (r, sym) in mc.sig.rels.iter().enumerate() {
        for t in all_tuples(model.num_blocks(), sym.arity) {
            if model.has(r, &t) {
                facts.push(Formula::Rel(r, t.iter().map(|&b| Term::Var(rep(b))).collect()));
            }
        }
    }
    for (f, sym) in mc.sig.funs.iter().enumerate() {
        for t in all_tuples(model.num_blocks(), sym.arity) {
            let app = Term::App(f, t.iter().map(|&b| Term::Var(rep(b))).collect());
            facts.push(Formula::Eq(app, Term::Var(rep(model.apply(f, &t)))));
        }
    }
    BasicOpenM { formula: FormulaInContext::canonical(dom.len(), Formula::and_all(facts)), params: dom }
}

/// The least open containing an isomorphism, as a basic open.
pub fn arrow_diagram(mc: &ModelClass, f: usize) -> BasicOpenI {
    let iso = &mc.isos[f];
    let (m, n) = (&mc.models[iso.dom], &mc.models[iso.cod]);
    let mut pres = Vec::new();
    for &a in m.domain() {
        for &b in n.domain() {
            if iso.perm[m.block_of(a).expect("in domain")] == n.block_of(b).expect("in domain") {
                pres.push((a, b));
            }
        }
    }
    BasicOpenI { dom: model_diagram(mc, iso.dom), pres, cod: model_diagram(mc, iso.cod) }
}

fn filter_models(mc: &ModelClass, pred: impl Fn(&Structure) -> bool) -> PointSet {
    set_of(mc.len(), (0..mc.len()).filter(|&i| pred(&mc.models[i])))
}

/// Subbasis of the logical topology on models: `<a>`, `<=,a,b>` for
/// `a < b`, `<R,a..>` and `<f(a..)=b>`.
pub fn object_space(mc: &ModelClass) -> FinSpace {
    let n = mc.n;
    let mut sub = Vec::new();
    for a in 0..n {
        sub.push((format!("<{a}>"), filter_models(mc, |m| m.block_of(a).is_some())));
    }
    for a in 0..n {
        for b in a + 1..n {
            let s = filter_models(mc, |m| matches!((m.block_of(a), m.block_of(b)), (Some(x), Some(y)) if x == y));
            sub.push((format!("<=,{a},{b}>"), s));
        }
    }
    for (r, sym) in mc.sig.rels.iter().enumerate() {
        for t in all_tuples(n, sym.arity) {
            let s = filter_models(mc, |m| m.classes(&t).is_some_and(|c| m.has(r, &c)));
            let args: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            let name = if t.is_empty() {
                format!("<{}>", sym.name)
            } else {
                format!("<{},{}>", sym.name, args.join(","))
            };
            sub.push((name, s));
        }
    }
    for (f, sym) in mc.sig.funs.iter().enumerate() {
        for t in all_tuples(n, sym.arity) {
            for b in 0..n {
                let s = filter_models(mc, |m| match (m.classes(&t), m.block_of(b)) {
                    (Some(c), Some(y)) => m.apply(f, &c) == y,
                    _ => false,
                });
                let args: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                sub.push((format!("<{}({})={b}>", sym.name, args.join(",")), s));
            }
        }
    }
    FinSpace::new(mc.len(), sub)
}

/// Subbasis on isomorphisms: domain and codomain preimages of the object
/// subbasis, plus every `<a|->b>`.
pub fn arrow_space(mc: &ModelClass, objects: &FinSpace) -> FinSpace {
    let na = mc.isos.len();
    let mut sub = Vec::new();
    for (name, s) in objects.subbasis() {
        sub.push((
            format!("d^-1{name}"),
            set_of(na, (0..na).filter(|&i| s.contains(mc.isos[i].dom))),
        ));
    }
    for (name, s) in objects.subbasis() {
        sub.push((
            format!("c^-1{name}"),
            set_of(na, (0..na).filter(|&i| s.contains(mc.isos[i].cod))),
        ));
    }
    for a in 0..mc.n {
        for b in 0..mc.n {
            sub.push((format!("<{a}|->{b}>"), preservation_set(mc, a, b)));
        }
    }
    FinSpace::new(na, sub)
}

fn atom(mc: &ModelClass, body: Formula, params: &[usize]) -> Result<PointSet> {
    basic_open_points(mc, &BasicOpenM::new(FormulaInContext::canonical(params.len(), body), params.to_vec())?)
}

/// Read a structure off a completely prime filter: the domain is the set of
/// `a` with `<[x|⊤],a>` in the filter, classes come from `<[x,y|x=y],a,b>`,
/// and each relation and function from the corresponding atomic basic opens.
pub fn filter_to_model(mc: &ModelClass, space: &FinSpace, f: &CPFilter) -> Result<Structure> {
    let prime = f.generator.ones().any(|q| f.generator.is_subset(space.nbhd(q)));
    if !space.is_open(&f.generator) || f.generator.is_clear() || !prime {
        return Err(Error::Precondition("filter is not completely prime".into()));
    }
    let n = mc.n;
    let inf = |s: &PointSet| f.contains(space, s);
    let domain: Vec<usize> = (0..n)
        .filter(|&a| atom(mc, Formula::Top, &[a]).map(|s| inf(&s)).unwrap_or(false))
        .collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &a in &domain {
        let mut placed = false;
        for blk in blocks.iter_mut() {
            if inf(&atom(mc, Formula::var_eq(0, 1), &[blk[0], a])?) {
                blk.push(a);
                placed = true;
                break;
            }
        }
        if !placed {
            blocks.push(vec![a]);
        }
    }
    let nb = blocks.len();
    let reps = |t: &[usize]| t.iter().map(|&b| blocks[b][0]).collect::<Vec<_>>();
    let mut rels = Vec::new();
    for (r, sym) in mc.sig.rels.iter().enumerate() {
        let mut tuples = BTreeSet::new();
        for t in all_tuples(nb, sym.arity) {
            let args = (0..sym.arity).map(Term::Var).collect();
            if inf(&atom(mc, Formula::Rel(r, args), &reps(&t))?) {
                tuples.insert(t);
            }
        }
        rels.push(tuples);
    }
    let mut funs = Vec::new();
    for (fi, sym) in mc.sig.funs.iter().enumerate() {
        let mut table = BTreeMap::new();
        for t in all_tuples(nb, sym.arity) {
            let app = Term::App(fi, (0..sym.arity).map(Term::Var).collect());
            let body = Formula::Eq(app, Term::Var(sym.arity));
            let mut vals = Vec::new();
            for y in 0..nb {
                let mut ps = reps(&t);
                ps.push(blocks[y][0]);
                if inf(&atom(mc, body.clone(), &ps)?) {
                    vals.push(y);
                }
            }
            if vals.len() != 1 {
                return Err(Error::Invariant(format!("`{}` has {} values in the filter", sym.name, vals.len())));
            }
            table.insert(t, vals[0]);
        }
        funs.push(table);
    }
    Structure::build(n, &mc.sig, blocks, &rels, &funs)
}
