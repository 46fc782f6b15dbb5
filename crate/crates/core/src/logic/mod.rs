//! Signatures, terms, geometric formulas, sequents and theories.
//!
//! Variables are plain integers. A formula-in-context is canonical when its
//! context is `x0..x{k-1}` and its binders are numbered `xk, xk+1, ...` in
//! left-to-right preorder, so alpha-equivalent inputs compare equal.

mod interp;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub use interp::Interpretation;
pub use parse::{parse_formula_in_context, parse_theory};
pub use print::{print_formula, print_in_context, print_term, print_theory};

pub type Var = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Single-sorted signature. Constants are 0-ary function symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    pub rels: Vec<Symbol>,
    pub funs: Vec<Symbol>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rel_index(&self, name: &str) -> Option<usize> {
        self.rels.iter().position(|s| s.name == name)
    }

    pub fn fun_index(&self, name: &str) -> Option<usize> {
        self.funs.iter().position(|s| s.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.rel_index(name).is_some() || self.fun_index(name).is_some()
    }

    pub fn add_rel(&mut self, name: &str, arity: usize) -> Result<usize> {
        if self.contains(name) {
            return Err(Error::SignatureMismatch(format!("duplicate symbol `{name}`")));
        }
        self.rels.push(Symbol { name: name.to_string(), arity });
        Ok(self.rels.len() - 1)
    }

    pub fn add_fun(&mut self, name: &str, arity: usize) -> Result<usize> {
        if self.contains(name) {
            return Err(Error::SignatureMismatch(format!("duplicate symbol `{name}`")));
        }
        self.funs.push(Symbol { name: name.to_string(), arity });
        Ok(self.funs.len() - 1)
    }

    pub fn max_arity(&self) -> usize {
        let r = self.rels.iter().map(|s| s.arity).max().unwrap_or(0);
        let f = self.funs.iter().map(|s| s.arity + 1).max().unwrap_or(0);
        r.max(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(usize, Vec<Term>),
}

impl Term {
    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, args) => args.iter().for_each(|t| t.vars_into(out)),
        }
    }

    fn max_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    fn check(&self, sig: &Signature) -> Result<()> {
        if let Term::App(f, args) = self {
            let sym = sig
                .funs
                .get(*f)
                .ok_or_else(|| Error::SignatureMismatch(format!("unknown function #{f}")))?;
            if sym.arity != args.len() {
                return Err(Error::SignatureMismatch(format!(
                    "`{}` expects {} argument(s), got {}",
                    sym.name,
                    sym.arity,
                    args.len()
                )));
            }
            args.iter().try_for_each(|t| t.check(sig))?;
        }
        Ok(())
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(*map.get(v).unwrap_or(v)),
            Term::App(f, args) => Term::App(*f, args.iter().map(|t| t.rename(map)).collect()),
        }
    }

    fn subst(&self, sigma: &BTreeMap<Var, Term>) -> Result<Term> {
        match self {
            Term::Var(v) => sigma.get(v).cloned().ok_or(Error::Unassigned(*v)),
            Term::App(f, args) => Ok(Term::App(
                *f,
                args.iter().map(|t| t.subst(sigma)).collect::<Result<_>>()?,
            )),
        }
    }
}

/// Geometric formula with finitary disjunction; `Or(vec![])` is falsity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Eq(Term, Term),
    Rel(usize, Vec<Term>),
    And(Box<Formula>, Box<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn bot() -> Formula {
        Formula::Or(Vec::new())
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Formula::Or(v) if v.is_empty())
    }

    pub fn var_eq(a: Var, b: Var) -> Formula {
        Formula::Eq(Term::Var(a), Term::Var(b))
    }

    /// Conjunction that drops `Top` operands.
    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::Top, b) => b,
            (a, Formula::Top) => a,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().fold(Formula::Top, Formula::and)
    }

    pub fn or2(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![a, b])
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn exists_all(vars: &[Var], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, &v| Formula::exists(v, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.free_into(&mut out, &mut Vec::new());
        out
    }

    fn free_into(&self, out: &mut BTreeSet<Var>, bound: &mut Vec<Var>) {
        let add = |t: &Term, out: &mut BTreeSet<Var>| {
            let mut vs = BTreeSet::new();
            t.vars_into(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::Top => {}
            Formula::Eq(s, t) => {
                add(s, out);
                add(t, out);
            }
            Formula::Rel(_, ts) => ts.iter().for_each(|t| add(t, out)),
            Formula::And(a, b) => {
                a.free_into(out, bound);
                b.free_into(out, bound);
            }
            Formula::Or(fs) => fs.iter().for_each(|f| f.free_into(out, bound)),
            Formula::Exists(v, f) => {
                bound.push(*v);
                f.free_into(out, bound);
                bound.pop();
            }
        }
    }

    /// Largest variable index occurring anywhere, bound or free.
    pub fn max_var(&self) -> Option<Var> {
        match self {
            Formula::Top => None,
            Formula::Eq(s, t) => s.max_var().max(t.max_var()),
            Formula::Rel(_, ts) => ts.iter().filter_map(Term::max_var).max(),
            Formula::And(a, b) => a.max_var().max(b.max_var()),
            Formula::Or(fs) => fs.iter().filter_map(Formula::max_var).max(),
            Formula::Exists(v, f) => Some(*v).max(f.max_var()),
        }
    }

    /// Nesting depth of connectives; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::And(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Or(fs) if fs.is_empty() => 0,
            Formula::Or(fs) => 1 + fs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Exists(_, f) => 1 + f.depth(),
        }
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Formula::Top => Ok(()),
            Formula::Eq(s, t) => {
                s.check(sig)?;
                t.check(sig)
            }
            Formula::Rel(r, ts) => {
                let sym = sig
                    .rels
                    .get(*r)
                    .ok_or_else(|| Error::SignatureMismatch(format!("unknown relation #{r}")))?;
                if sym.arity != ts.len() {
                    return Err(Error::SignatureMismatch(format!(
                        "`{}` expects {} argument(s), got {}",
                        sym.name,
                        sym.arity,
                        ts.len()
                    )));
                }
                ts.iter().try_for_each(|t| t.check(sig))
            }
            Formula::And(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
            Formula::Or(fs) => fs.iter().try_for_each(|f| f.check(sig)),
            Formula::Exists(_, f) => f.check(sig),
        }
    }

    /// Rename free occurrences through `map`; binders are renumbered from
    /// `next` upward in preorder.
    fn canon(&self, map: &mut BTreeMap<Var, Var>, next: &mut Var) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Eq(s, t) => Formula::Eq(s.rename(map), t.rename(map)),
            Formula::Rel(r, ts) => Formula::Rel(*r, ts.iter().map(|t| t.rename(map)).collect()),
            Formula::And(a, b) => {
                let a = a.canon(map, next);
                let b = b.canon(map, next);
                Formula::And(Box::new(a), Box::new(b))
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.canon(map, next)).collect()),
            Formula::Exists(v, f) => {
                let fresh = *next;
                *next += 1;
                let saved = map.insert(*v, fresh);
                let body = f.canon(map, next);
                match saved {
                    Some(old) => map.insert(*v, old),
                    None => map.remove(v),
                };
                Formula::Exists(fresh, Box::new(body))
            }
        }
    }
}

/// Capture-avoiding simultaneous substitution. Every free variable of `f`
/// must be assigned.
pub fn substitute(f: &Formula, assignment: &BTreeMap<Var, Term>) -> Result<Formula> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !assignment.contains_key(v)) {
        return Err(Error::Unassigned(v));
    }
    let mut next = f.max_var().map_or(0, |v| v + 1);
    for t in assignment.values() {
        if let Some(m) = t.max_var() {
            next = next.max(m + 1);
        }
    }
    subst_rec(f, assignment, &mut next)
}

fn subst_rec(f: &Formula, sigma: &BTreeMap<Var, Term>, next: &mut Var) -> Result<Formula> {
    Ok(match f {
        Formula::Top => Formula::Top,
        Formula::Eq(s, t) => Formula::Eq(s.subst(sigma)?, t.subst(sigma)?),
        Formula::Rel(r, ts) => {
            Formula::Rel(*r, ts.iter().map(|t| t.subst(sigma)).collect::<Result<_>>()?)
        }
        Formula::And(a, b) => Formula::And(
            Box::new(subst_rec(a, sigma, next)?),
            Box::new(subst_rec(b, sigma, next)?),
        ),
        Formula::Or(fs) => Formula::Or(
            fs.iter()
                .map(|g| subst_rec(g, sigma, next))
                .collect::<Result<_>>()?,
        ),
        Formula::Exists(v, body) => {
            let mut captured = BTreeSet::new();
            for w in body.free_vars() {
                if w != *v {
                    if let Some(t) = sigma.get(&w) {
                        t.vars_into(&mut captured);
                    }
                }
            }
            let target = if captured.contains(v) {
                let fresh = *next;
                *next += 1;
                fresh
            } else {
                *v
            };
            let mut inner = sigma.clone();
            inner.insert(*v, Term::Var(target));
            Formula::Exists(target, Box::new(subst_rec(body, &inner, next)?))
        }
    })
}

/// A formula together with an ordered context of distinct variables that
/// covers its free variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaInContext {
    pub ctx: Vec<Var>,
    pub body: Formula,
}

impl FormulaInContext {
    pub fn new(ctx: Vec<Var>, body: Formula) -> Result<Self> {
        let set: BTreeSet<Var> = ctx.iter().copied().collect();
        if set.len() != ctx.len() {
            return Err(Error::IllFormed("context variables are not distinct".into()));
        }
        if let Some(v) = body.free_vars().into_iter().find(|v| !set.contains(v)) {
            return Err(Error::IllFormed(format!("x{v} is free but not in the context")));
        }
        Ok(Self { ctx, body })
    }

    /// Canonical formula in context `x0..x{k-1}`; panics if `body` has a free
    /// variable outside `0..k`.
    pub fn canonical(k: usize, body: Formula) -> Self {
        Self::new((0..k).collect(), body)
            .expect("free variables within context")
            .canonical_form()
    }

    pub fn top(k: usize) -> Self {
        Self::canonical(k, Formula::Top)
    }

    pub fn bot(k: usize) -> Self {
        Self::canonical(k, Formula::bot())
    }

    pub fn arity(&self) -> usize {
        self.ctx.len()
    }

    pub fn canonical_form(&self) -> Self {
        let mut map: BTreeMap<Var, Var> =
            self.ctx.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut next = self.ctx.len();
        let body = self.body.canon(&mut map, &mut next);
        Self { ctx: (0..self.ctx.len()).collect(), body }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical_form()
    }

    /// Body with the context variables replaced by `vars` (capture-avoiding).
    pub fn instantiate(&self, vars: &[Var]) -> Formula {
        assert_eq!(vars.len(), self.ctx.len(), "instantiate: arity");
        let sigma = self
            .ctx
            .iter()
            .zip(vars)
            .map(|(&v, &w)| (v, Term::Var(w)))
            .collect();
        substitute(&self.body, &sigma).expect("context covers free variables")
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        self.body.check(sig)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub ctx: Vec<Var>,
    pub ante: Formula,
    pub succ: Formula,
}

impl Sequent {
    pub fn new(ctx: Vec<Var>, ante: Formula, succ: Formula) -> Result<Self> {
        FormulaInContext::new(ctx.clone(), ante.clone())?;
        FormulaInContext::new(ctx.clone(), succ.clone())?;
        Ok(Self { ctx, ante, succ })
    }

    pub fn canonical_form(&self) -> Self {
        let a = FormulaInContext { ctx: self.ctx.clone(), body: self.ante.clone() }.canonical_form();
        let s = FormulaInContext { ctx: self.ctx.clone(), body: self.succ.clone() }.canonical_form();
        Self { ctx: a.ctx, ante: a.body, succ: s.body }
    }

    pub fn arity(&self) -> usize {
        self.ctx.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Theory {
    pub sig: Signature,
    pub axioms: Vec<Sequent>,
}

impl Theory {
    pub fn new(sig: Signature, axioms: Vec<Sequent>) -> Result<Self> {
        for ax in &axioms {
            ax.ante.check(&sig)?;
            ax.succ.check(&sig)?;
        }
        Ok(Self { sig, axioms: axioms.iter().map(Sequent::canonical_form).collect() })
    }

    /// The empty theory of pure equality.
    pub fn equality() -> Self {
        Self::default()
    }

    /// The theory with the single axiom `top |- [] bot`.
    pub fn inconsistent() -> Self {
        Self {
            sig: Signature::new(),
            axioms: vec![Sequent { ctx: vec![], ante: Formula::Top, succ: Formula::bot() }],
        }
    }

    /// One binary relation `E` with the symmetry axiom.
    pub fn symmetric_relation() -> Self {
        parse_theory("rel E/2\naxiom E(x,y) |- [x,y] E(y,x)").expect("builtin theory parses")
    }
}
