use super::{Formula, FormulaInContext, Signature, Term, Theory};

pub fn print_term(sig: &Signature, t: &Term) -> String {
    match t {
        Term::Var(v) => format!("x{v}"),
        Term::App(f, args) => {
            let name = &sig.funs[*f].name;
            if args.is_empty() {
                name.clone()
            } else {
                let inner: Vec<String> = args.iter().map(|a| print_term(sig, a)).collect();
                format!("{name}({})", inner.join(","))
            }
        }
    }
}

fn is_compound(f: &Formula) -> bool {
    match f {
        Formula::And(..) | Formula::Exists(..) => true,
        Formula::Or(fs) => !fs.is_empty(),
        _ => false,
    }
}

fn wrap(sig: &Signature, f: &Formula) -> String {
    if is_compound(f) {
        format!("({})", print_formula(sig, f))
    } else {
        print_formula(sig, f)
    }
}

/// Concrete syntax accepted by the theory parser.
pub fn print_formula(sig: &Signature, f: &Formula) -> String {
    match f {
        Formula::Top => "top".into(),
        Formula::Or(fs) if fs.is_empty() => "bot".into(),
        Formula::Eq(s, t) => format!("{} = {}", print_term(sig, s), print_term(sig, t)),
        Formula::Rel(r, ts) => {
            let name = &sig.rels[*r].name;
            let inner: Vec<String> = ts.iter().map(|t| print_term(sig, t)).collect();
            format!("{name}({})", inner.join(","))
        }
        Formula::And(a, b) => {
            let left = if matches!(**a, Formula::And(..)) {
                print_formula(sig, a)
            } else {
                wrap(sig, a)
            };
            format!("{left} & {}", wrap(sig, b))
        }
        Formula::Or(fs) => {
            let parts: Vec<String> = fs.iter().map(|g| wrap(sig, g)).collect();
            parts.join(" \\/ ")
        }
        Formula::Exists(v, body) => format!("exists x{v}. {}", print_formula(sig, body)),
    }
}

pub fn print_in_context(sig: &Signature, f: &FormulaInContext) -> String {
    let ctx: Vec<String> = f.ctx.iter().map(|v| format!("x{v}")).collect();
    format!("[{} | {}]", ctx.join(","), print_formula(sig, &f.body))
}

pub fn print_theory(t: &Theory) -> String {
    let mut out = String::new();
    for s in &t.sig.rels {
        out.push_str(&format!("rel {}/{}\n", s.name, s.arity));
    }
    for s in &t.sig.funs {
        out.push_str(&format!("fun {}/{}\n", s.name, s.arity));
    }
    for ax in &t.axioms {
        let ctx: Vec<String> = ax.ctx.iter().map(|v| format!("x{v}")).collect();
        out.push_str(&format!(
            "axiom {} |- [{}] {}\n",
            print_formula(&t.sig, &ax.ante),
            ctx.join(","),
            print_formula(&t.sig, &ax.succ)
        ));
    }
    out
}
