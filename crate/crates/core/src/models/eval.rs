use super::{all_tuples, Structure};
use crate::error::{Error, Result};
use crate::logic::{Formula, FormulaInContext, Sequent, Signature, Term, Theory, Var};

fn term(m: &Structure, t: &Term, env: &[Option<usize>]) -> Result<usize> {
    match t {
        Term::Var(v) => env.get(*v).copied().flatten().ok_or(Error::Unassigned(*v)),
        Term::App(f, args) => {
            let vals = args.iter().map(|a| term(m, a, env)).collect::<Result<Vec<_>>>()?;
            Ok(m.apply(*f, &vals))
        }
    }
}

fn holds(m: &Structure, f: &Formula, env: &mut Vec<Option<usize>>) -> Result<bool> {
    Ok(match f {
        Formula::Top => true,
        Formula::Eq(s, t) => term(m, s, env)? == term(m, t, env)?,
        Formula::Rel(r, ts) => {
            let vals = ts.iter().map(|a| term(m, a, env)).collect::<Result<Vec<_>>>()?;
            m.has(*r, &vals)
        }
        Formula::And(a, b) => holds(m, a, env)? && holds(m, b, env)?,
        Formula::Or(fs) => {
            for g in fs {
                if holds(m, g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(v, body) => {
            if env.len() <= *v {
                env.resize(*v + 1, None);
            }
            let saved = env[*v];
            let mut found = false;
            for b in 0..m.num_blocks() {
                env[*v] = Some(b);
                if holds(m, body, env)? {
                    found = true;
                    break;
                }
            }
            env[*v] = saved;
            found
        }
    })
}

fn check_sig(m: &Structure, f: &Formula) -> Result<()> {
    let sig = Signature {
        rels: m
            .rel_arities()
            .iter()
            .enumerate()
            .map(|(i, &a)| crate::logic::Symbol { name: format!("#{i}"), arity: a })
            .collect(),
        funs: m
            .fun_arities()
            .iter()
            .enumerate()
            .map(|(i, &a)| crate::logic::Symbol { name: format!("#{i}"), arity: a })
            .collect(),
    };
    f.check(&sig)
}

/// Whether `body` holds when the context variables take the given blocks.
pub fn holds_at(m: &Structure, ctx: &[Var], body: &Formula, blocks: &[usize]) -> Result<bool> {
    let width = ctx
        .iter()
        .copied()
        .chain(body.max_var())
        .max()
        .map_or(0, |v| v + 1);
    let mut env = vec![None; width];
    for (&v, &b) in ctx.iter().zip(blocks) {
        env[v] = Some(b);
    }
    holds(m, body, &mut env)
}

/// The extension of a formula-in-context: all block tuples satisfying it,
/// in lexicographic order. The empty context yields `[]` or `[()]`.
pub fn eval_formula(m: &Structure, f: &FormulaInContext) -> Result<Vec<Vec<usize>>> {
    check_sig(m, &f.body)?;
    let mut out = Vec::new();
    for t in all_tuples(m.num_blocks(), f.arity()) {
        if holds_at(m, &f.ctx, &f.body, &t)? {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn sequent_holds(m: &Structure, s: &Sequent) -> Result<bool> {
    check_sig(m, &s.ante)?;
    check_sig(m, &s.succ)?;
    for t in all_tuples(m.num_blocks(), s.arity()) {
        if holds_at(m, &s.ctx, &s.ante, &t)? && !holds_at(m, &s.ctx, &s.succ, &t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_model(m: &Structure, t: &Theory) -> bool {
    m.matches(&t.sig) && t.axioms.iter().all(|ax| sequent_holds(m, ax).unwrap_or(false))
}
