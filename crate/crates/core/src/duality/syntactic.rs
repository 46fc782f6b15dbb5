use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::logic::{Formula, FormulaInContext, Sequent, Var};
use crate::models::{entails, FormulaSearch, ModelClass, Profile, TupleSpace};

/// An object class `[x|φ]` with its extension over the model class.
#[derive(Clone, Debug)]
pub struct SynObject {
    pub formula: FormulaInContext,
    pub profile: Profile,
}

/// An arrow class `[x,y|σ]: [x|φ] -> [y|ψ]`.
#[derive(Clone, Debug)]
pub struct SynArrow {
    pub src: (usize, usize),
    pub tgt: (usize, usize),
    pub formula: FormulaInContext,
    pub profile: Profile,
    pub inclusion: bool,
    pub identity: bool,
}

/// The syntactic category of `T_S` at context length `<= kmax` and formula
/// depth `<= depth`.
#[derive(Clone, Debug)]
pub struct TheoryCategory {
    pub mc: ModelClass,
    pub kmax: usize,
    pub depth: usize,
    pub objects: Vec<Vec<SynObject>>,
    pub arrows: Vec<SynArrow>,
    /// Every object has exactly one inclusion into `[x|⊤]` of its length.
    pub inclusions_unique: bool,
    spaces: Vec<TupleSpace>,
    arrow_index: HashMap<((usize, usize), (usize, usize), Profile), usize>,
}

fn ctx(n: usize) -> Vec<Var> {
    (0..n).collect()
}

fn range(a: usize, b: usize) -> Vec<Var> {
    (a..b).collect()
}

/// `σ(x,y) ∧ σ(x,y') ⊢ y = y'`.
pub fn functionality_sequent(sigma: &FormulaInContext, k: usize, l: usize) -> Result<Sequent> {
    let mut second = range(0, k);
    second.extend(k + l..k + 2 * l);
    let ante = Formula::and(sigma.instantiate(&range(0, k + l)), sigma.instantiate(&second));
    let succ = Formula::and_all((0..l).map(|i| Formula::var_eq(k + i, k + l + i)));
    Sequent::new(ctx(k + 2 * l), ante, succ)
}

/// `φ(x) ⊢ ∃y σ(x,y)`.
pub fn totality_sequent(phi: &FormulaInContext, sigma: &FormulaInContext, k: usize, l: usize) -> Result<Sequent> {
    let succ = Formula::exists_all(&range(k, k + l), sigma.instantiate(&range(0, k + l)));
    Sequent::new(ctx(k), phi.instantiate(&range(0, k)), succ)
}

/// `φ(x) ∧ ψ(y)` in context `x, y`.
pub fn product_formula(phi: &FormulaInContext, psi: &FormulaInContext, k: usize, l: usize) -> FormulaInContext {
    FormulaInContext::canonical(k + l, Formula::and(phi.instantiate(&range(0, k)), psi.instantiate(&range(k, k + l))))
}

/// `φ(x) ∧ x = y` in context `x, y`.
pub fn inclusion_formula(phi: &FormulaInContext, k: usize) -> FormulaInContext {
    let eqs = Formula::and_all((0..k).map(|i| Formula::var_eq(i, k + i)));
    FormulaInContext::canonical(2 * k, Formula::and(phi.instantiate(&range(0, k)), eqs))
}

/// `∃y (σ(x,y) ∧ τ(y,z))` in context `x, z`.
pub fn composite_formula(sigma: &FormulaInContext, tau: &FormulaInContext, k: usize, l: usize, m: usize) -> FormulaInContext {
    let ys = range(k + m, k + m + l);
    let mut xs = range(0, k);
    xs.extend(&ys);
    let mut yz = ys.clone();
    yz.extend(k..k + m);
    let body = Formula::exists_all(&ys, Formula::and(sigma.instantiate(&xs), tau.instantiate(&yz)));
    FormulaInContext::canonical(k + m, body)
}

pub fn syntactic_category(mc: &ModelClass, kmax: usize, depth: usize) -> Result<TheoryCategory> {
    let mut search = FormulaSearch::new(mc);
    let mut objects = Vec::new();
    for k in 0..=kmax {
        let level = search.level(k, depth)?;
        objects.push(
            level
                .iter()
                .map(|e| SynObject { formula: e.formula.clone(), profile: e.profile.clone() })
                .collect::<Vec<_>>(),
        );
    }
    let spaces: Vec<TupleSpace> = (0..=2 * kmax).map(|k| TupleSpace::new(mc, k)).collect();
    let mut arrows = Vec::new();
    for k in 0..=kmax {
        for l in 0..=kmax {
            let candidates = search.level(k + l, depth)?;
            let space = &spaces[k + l];
            for (i, a) in objects[k].iter().enumerate() {
                for (j, b) in objects[l].iter().enumerate() {
                    let prod = product_formula(&a.formula, &b.formula, k, l);
                    let prod_profile = space.profile(mc, &prod)?;
                    let incl = if k == l { Some(space.profile(mc, &inclusion_formula(&a.formula, k))?) } else { None };
                    for c in candidates.iter() {
                        if !c.profile.is_subset(&prod_profile) {
                            continue;
                        }
                        let sigma = &c.formula;
                        let inside = Sequent::new(ctx(k + l), sigma.body.clone(), prod.body.clone())?;
                        if !entails(mc, &inside)?
                            || !entails(mc, &totality_sequent(&a.formula, sigma, k, l)?)?
                            || !entails(mc, &functionality_sequent(sigma, k, l)?)?
                        {
                            continue;
                        }
                        let inclusion = incl.as_ref() == Some(&c.profile);
                        arrows.push(SynArrow {
                            src: (k, i),
                            tgt: (l, j),
                            formula: sigma.clone(),
                            profile: c.profile.clone(),
                            inclusion,
                            identity: inclusion && i == j,
                        });
                    }
                }
            }
        }
    }
    let arrow_index: HashMap<_, _> =
        arrows.iter().enumerate().map(|(n, a)| ((a.src, a.tgt, a.profile.clone()), n)).collect();
    let inclusions_unique = (0..=kmax).all(|k| {
        let top = objects[k].iter().position(|o| o.profile.count_ones(..) == spaces[k].len());
        top.is_some_and(|t| {
            (0..objects[k].len())
                .all(|i| arrows.iter().filter(|a| a.inclusion && a.src == (k, i) && a.tgt == (k, t)).count() == 1)
        })
    });
    Ok(TheoryCategory { mc: mc.clone(), kmax, depth, objects, arrows, inclusions_unique, spaces, arrow_index })
}

impl TheoryCategory {
    pub fn object_counts(&self) -> Vec<usize> {
        self.objects.iter().map(Vec::len).collect()
    }

    pub fn space(&self, k: usize) -> &TupleSpace {
        &self.spaces[k]
    }

    pub fn find_arrow(&self, src: (usize, usize), tgt: (usize, usize), profile: &Profile) -> Option<usize> {
        self.arrow_index.get(&(src, tgt, profile.clone())).copied()
    }

    /// Composite formula of `first` then `second`, and its class if the
    /// search reached it.
    pub fn compose(&self, second: usize, first: usize) -> Result<(FormulaInContext, Option<usize>)> {
        let (f, g) = (&self.arrows[first], &self.arrows[second]);
        if f.tgt != g.src {
            return Err(Error::Precondition("arrows are not composable".into()));
        }
        let (k, l, m) = (f.src.0, f.tgt.0, g.tgt.0);
        let comp = composite_formula(&f.formula, &g.formula, k, l, m);
        let p = self.spaces[k + m].profile(&self.mc, &comp)?;
        Ok((comp, self.find_arrow(f.src, g.tgt, &p)))
    }
}
