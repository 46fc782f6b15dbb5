use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use fixedbitset::FixedBitSet;

use super::{all_tuples, holds_at, tuple_at, tuple_count, tuple_index, ModelClass};
use crate::error::{Error, Result};
use crate::logic::{Formula, FormulaInContext, Term};

/// Extension of a formula across a whole class, as a bitset over a
/// [`TupleSpace`].
pub type Profile = FixedBitSet;

/// All pairs `(model, block tuple of length k)`, numbered model by model and
/// lexicographically within a model.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    pub k: usize,
    offsets: Vec<usize>,
    nbs: Vec<usize>,
    total: usize,
}

impl TupleSpace {
    pub fn new(mc: &ModelClass, k: usize) -> TupleSpace {
        let mut offsets = Vec::with_capacity(mc.models.len());
        let mut nbs = Vec::with_capacity(mc.models.len());
        let mut total = 0;
        for m in &mc.models {
            offsets.push(total);
            nbs.push(m.num_blocks());
            total += tuple_count(m.num_blocks(), k);
        }
        TupleSpace { k, offsets, nbs, total }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn point(&self, model: usize, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        self.offsets[model] + tuple_index(self.nbs[model], tuple)
    }

    pub fn decode(&self, p: usize) -> (usize, Vec<usize>) {
        // Models without tuples share an offset with their successor, so the
        // last model starting at or before `p` is the one containing it.
        let m = self.offsets.partition_point(|&o| o <= p) - 1;
        (m, tuple_at(self.nbs[m], self.k, p - self.offsets[m]))
    }

    /// Points lying over model `m`.
    pub fn fibre(&self, m: usize) -> std::ops::Range<usize> {
        self.offsets[m]..self.offsets[m] + tuple_count(self.nbs[m], self.k)
    }

    pub fn model_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn empty_set(&self) -> Profile {
        FixedBitSet::with_capacity(self.total)
    }

    /// Extension of a formula in context of length `k`, by direct evaluation.
    pub fn profile(&self, mc: &ModelClass, f: &FormulaInContext) -> Result<Profile> {
        if f.arity() != self.k {
            return Err(Error::IllFormed("context length differs from tuple space".into()));
        }
        f.check(&mc.sig)?;
        let mut out = self.empty_set();
        for (mi, m) in mc.models.iter().enumerate() {
            for t in all_tuples(m.num_blocks(), self.k) {
                if holds_at(m, &f.ctx, &f.body, &t)? {
                    out.insert(self.point(mi, &t));
                }
            }
        }
        Ok(out)
    }

    /// Extension of `∃ x_k. φ` from the extension of `φ` one level up.
    pub fn project(&self, up: &TupleSpace, p: &Profile) -> Profile {
        let mut out = self.empty_set();
        for m in 0..self.offsets.len() {
            let nb = self.nbs[m];
            for t in 0..tuple_count(nb, self.k) {
                let base = up.offsets[m] + t * nb;
                if (base..base + nb).any(|i| p.contains(i)) {
                    out.insert(self.offsets[m] + t);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SearchEntry {
    pub formula: FormulaInContext,
    pub profile: Profile,
}

/// Bounded enumeration of formulas up to semantic equivalence over a model
/// class. Level `(k, d)` holds one representative per extension among
/// formulas in context `x0..x{k-1}` of connective depth at most `d`, first
/// found wins.
pub struct FormulaSearch<'a> {
    mc: &'a ModelClass,
    spaces: HashMap<usize, Rc<TupleSpace>>,
    levels: HashMap<(usize, usize), Rc<Vec<SearchEntry>>>,
    pub pair_limit: usize,
}

impl<'a> FormulaSearch<'a> {
    pub fn new(mc: &'a ModelClass) -> Self {
        FormulaSearch { mc, spaces: HashMap::new(), levels: HashMap::new(), pair_limit: 50_000_000 }
    }

    pub fn class(&self) -> &'a ModelClass {
        self.mc
    }

    pub fn space(&mut self, k: usize) -> Rc<TupleSpace> {
        let mc = self.mc;
        self.spaces.entry(k).or_insert_with(|| Rc::new(TupleSpace::new(mc, k))).clone()
    }

    fn atoms(&self, k: usize) -> Vec<Formula> {
        let sig = &self.mc.sig;
        let mut out = vec![Formula::Top, Formula::bot()];
        for i in 0..k {
            for j in i + 1..k {
                out.push(Formula::var_eq(i, j));
            }
        }
        for (r, s) in sig.rels.iter().enumerate() {
            for t in all_tuples(k, s.arity) {
                out.push(Formula::Rel(r, t.into_iter().map(Term::Var).collect()));
            }
        }
        for (f, s) in sig.funs.iter().enumerate() {
            for t in all_tuples(k, s.arity) {
                for w in 0..k {
                    let app = Term::App(f, t.iter().copied().map(Term::Var).collect());
                    out.push(Formula::Eq(app, Term::Var(w)));
                }
            }
        }
        out
    }

    /// Representatives of every extension reachable at context length `k`
    /// and depth `d`.
    pub fn level(&mut self, k: usize, d: usize) -> Result<Rc<Vec<SearchEntry>>> {
        if let Some(l) = self.levels.get(&(k, d)) {
            return Ok(l.clone());
        }
        let space = self.space(k);
        let mut seen: HashSet<Profile> = HashSet::new();
        let mut out: Vec<SearchEntry> = Vec::new();
        let mut push = |f: Formula, p: Profile, out: &mut Vec<SearchEntry>| {
            if seen.insert(p.clone()) {
                out.push(SearchEntry { formula: FormulaInContext::canonical(k, f), profile: p });
            }
        };
        if d == 0 {
            for a in self.atoms(k) {
                let fic = FormulaInContext::canonical(k, a.clone());
                let p = space.profile(self.mc, &fic)?;
                push(a, p, &mut out);
            }
        } else {
            let prev = self.level(k, d - 1)?;
            let pairs = prev.len() * prev.len();
            if pairs > self.pair_limit {
                return Err(Error::LimitExceeded {
                    what: format!("formula search at k={k}, depth={d}"),
                    estimate: pairs.to_string(),
                    limit: self.pair_limit as u64,
                });
            }
            for e in prev.iter() {
                push(e.formula.body.clone(), e.profile.clone(), &mut out);
            }
            for (i, a) in prev.iter().enumerate() {
                for b in &prev[i..] {
                    let mut p = a.profile.clone();
                    p.intersect_with(&b.profile);
                    push(Formula::And(Box::new(a.formula.body.clone()), Box::new(b.formula.body.clone())), p, &mut out);
                }
            }
            for (i, a) in prev.iter().enumerate() {
                for b in &prev[i..] {
                    let mut p = a.profile.clone();
                    p.union_with(&b.profile);
                    push(Formula::or2(a.formula.body.clone(), b.formula.body.clone()), p, &mut out);
                }
            }
            let up_space = self.space(k + 1);
            let up = self.level(k + 1, d - 1)?;
            for e in up.iter() {
                let p = space.project(&up_space, &e.profile);
                push(Formula::exists(k, e.formula.body.clone()), p, &mut out);
            }
        }
        let rc = Rc::new(out);
        self.levels.insert((k, d), rc.clone());
        Ok(rc)
    }
}
