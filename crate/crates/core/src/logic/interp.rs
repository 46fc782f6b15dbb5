use std::collections::BTreeMap;

use super::{Formula, FormulaInContext, Sequent, Term, Theory, Var};
use crate::error::{Error, Result};

/// Translation of a source theory into a target theory: relation symbols go
/// to formulas of the same arity, function symbols `f/n` to formulas of
/// arity `n + 1` read as graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub source: Theory,
    pub target: Theory,
    pub rels: Vec<FormulaInContext>,
    pub funs: Vec<FormulaInContext>,
}

impl Interpretation {
    pub fn new(
        source: Theory,
        target: Theory,
        rels: Vec<FormulaInContext>,
        funs: Vec<FormulaInContext>,
    ) -> Result<Self> {
        if rels.len() != source.sig.rels.len() || funs.len() != source.sig.funs.len() {
            return Err(Error::SignatureMismatch(
                "interpretation must map every source symbol".into(),
            ));
        }
        for (sym, img) in source.sig.rels.iter().zip(&rels) {
            if img.arity() != sym.arity {
                return Err(Error::SignatureMismatch(format!(
                    "image of `{}` has arity {}, expected {}",
                    sym.name,
                    img.arity(),
                    sym.arity
                )));
            }
            img.check(&target.sig)?;
        }
        for (sym, img) in source.sig.funs.iter().zip(&funs) {
            if img.arity() != sym.arity + 1 {
                return Err(Error::SignatureMismatch(format!(
                    "graph of `{}` has arity {}, expected {}",
                    sym.name,
                    img.arity(),
                    sym.arity + 1
                )));
            }
            img.check(&target.sig)?;
        }
        Ok(Self {
            source,
            target,
            rels: rels.iter().map(FormulaInContext::canonical_form).collect(),
            funs: funs.iter().map(FormulaInContext::canonical_form).collect(),
        })
    }

    /// The identity interpretation of a theory in itself.
    pub fn identity(t: &Theory) -> Self {
        let rels = t
            .sig
            .rels
            .iter()
            .enumerate()
            .map(|(i, s)| {
                FormulaInContext::canonical(s.arity, Formula::Rel(i, (0..s.arity).map(Term::Var).collect()))
            })
            .collect();
        let funs = t
            .sig
            .funs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let app = Term::App(i, (0..s.arity).map(Term::Var).collect());
                FormulaInContext::canonical(s.arity + 1, Formula::Eq(app, Term::Var(s.arity)))
            })
            .collect();
        Self { source: t.clone(), target: t.clone(), rels, funs }
    }

    /// The unique interpretation of the empty theory of equality.
    pub fn from_equality(target: &Theory) -> Self {
        Self {
            source: Theory::equality(),
            target: target.clone(),
            rels: Vec::new(),
            funs: Vec::new(),
        }
    }

    /// Translate a source formula into the target signature. Terms are
    /// unfolded through the function graphs.
    pub fn translate(&self, f: &Formula) -> Formula {
        let mut next = f.max_var().map_or(0, |v| v + 1);
        self.tr(f, &mut next)
    }

    pub fn translate_in_context(&self, f: &FormulaInContext) -> FormulaInContext {
        FormulaInContext { ctx: f.ctx.clone(), body: self.translate(&f.body) }.canonical_form()
    }

    pub fn translate_sequent(&self, s: &Sequent) -> Sequent {
        let mut next = s.ante.max_var().max(s.succ.max_var()).map_or(0, |v| v + 1);
        next = next.max(s.ctx.iter().max().map_or(0, |v| v + 1));
        Sequent {
            ctx: s.ctx.clone(),
            ante: self.tr(&s.ante, &mut next),
            succ: self.tr(&s.succ, &mut next),
        }
        .canonical_form()
    }

    fn fresh(next: &mut Var) -> Var {
        let v = *next;
        *next += 1;
        v
    }

    fn inst(img: &FormulaInContext, vars: &[Var], next: &mut Var) -> Formula {
        let sigma: BTreeMap<Var, Term> =
            img.ctx.iter().zip(vars).map(|(&c, &v)| (c, Term::Var(v))).collect();
        let out = super::substitute(&img.body, &sigma).expect("image context covers its body");
        if let Some(m) = out.max_var() {
            *next = (*next).max(m + 1);
        }
        out
    }

    /// `t = y` in the target language.
    fn flatten(&self, t: &Term, y: Var, next: &mut Var) -> Formula {
        match t {
            Term::Var(x) => Formula::var_eq(*x, y),
            Term::App(f, args) => {
                let (vars, conds) = self.args(args, next);
                let mut all = vars.clone();
                all.push(y);
                let graph = Self::inst(&self.funs[*f], &all, next);
                let fresh: Vec<Var> = vars.iter().copied().filter(|v| !is_arg_var(args, *v)).collect();
                Formula::exists_all(&fresh, Formula::and(Formula::and_all(conds), graph))
            }
        }
    }

    /// Variables standing for `args`, with the conditions defining the
    /// fresh ones.
    fn args(&self, args: &[Term], next: &mut Var) -> (Vec<Var>, Vec<Formula>) {
        let mut vars = Vec::new();
        let mut conds = Vec::new();
        for a in args {
            match a {
                Term::Var(x) => vars.push(*x),
                _ => {
                    let v = Self::fresh(next);
                    vars.push(v);
                    conds.push(self.flatten(a, v, next));
                }
            }
        }
        (vars, conds)
    }

    fn tr(&self, f: &Formula, next: &mut Var) -> Formula {
        match f {
            Formula::Top => Formula::Top,
            Formula::Eq(Term::Var(a), Term::Var(b)) => Formula::var_eq(*a, *b),
            Formula::Eq(s, t) => {
                let y = Self::fresh(next);
                let a = self.flatten(s, y, next);
                let b = self.flatten(t, y, next);
                Formula::exists(y, Formula::and(a, b))
            }
            Formula::Rel(r, ts) => {
                let (vars, conds) = self.args(ts, next);
                let atom = Self::inst(&self.rels[*r], &vars, next);
                let fresh: Vec<Var> = vars.iter().copied().filter(|v| !is_arg_var(ts, *v)).collect();
                Formula::exists_all(&fresh, Formula::and(Formula::and_all(conds), atom))
            }
            Formula::And(a, b) => Formula::And(Box::new(self.tr(a, next)), Box::new(self.tr(b, next))),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| self.tr(g, next)).collect()),
            Formula::Exists(v, body) => Formula::exists(*v, self.tr(body, next)),
        }
    }
}

fn is_arg_var(args: &[Term], v: Var) -> bool {
    args.contains(&Term::Var(v))
}
