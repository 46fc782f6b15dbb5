//! Line-oriented theory files:
//!
//! ```text
//! rel NAME/ARITY
//! fun NAME/ARITY
//! axiom PHI |- [x,y,...] PSI
//! ```
//!
//! `#` starts a comment. Formulas use `top`, `bot`, `t = s`, `R(t,...)`,
//! `&`, `\/`, `exists x. PHI` and parentheses; `&` binds tighter than `\/`
//! and a quantifier body extends as far right as possible.

use super::{Formula, FormulaInContext, Sequent, Signature, Term, Theory, Var};
use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Slash,
    Eq,
    And,
    Or,
    Turnstile,
    Pipe,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

fn lex_line(text: &str, line: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let push = |tok, out: &mut Vec<Spanned>| out.push(Spanned { tok, line, col });
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            push(Tok::Ident(chars[start..i].iter().collect()), &mut out);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| syntax(line, col, "number too large"))?;
            push(Tok::Num(n), &mut out);
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('|', Some('-')) => (Tok::Turnstile, 2),
            ('\\', Some('/')) => (Tok::Or, 2),
            ('|', _) => (Tok::Pipe, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('/', _) => (Tok::Slash, 1),
            ('=', _) => (Tok::Eq, 1),
            ('&', _) => (Tok::And, 1),
            _ => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
        };
        push(tok, &mut out);
        i += len;
    }
    Ok(out)
}

struct FormulaParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    sig: &'a Signature,
    scope: Vec<(String, Var)>,
    next_var: Var,
    line: usize,
    end_col: usize,
}

impl<'a> FormulaParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or((self.line, self.end_col), |s| (s.line, s.col))
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(Spanned { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s.clone(), *line, *col))
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn lookup(&self, name: &str) -> Option<Var> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let first = self.conj()?;
        if self.peek() != Some(&Tok::Or) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            items.push(self.conj()?);
        }
        Ok(Formula::Or(items))
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.disj()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(s)) if s == "top" => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Ident(s)) if s == "bot" => {
                self.pos += 1;
                Ok(Formula::bot())
            }
            Some(Tok::Ident(s)) if s == "exists" => {
                self.pos += 1;
                let (name, line, col) = self.ident()?;
                if self.sig.contains(&name) || is_keyword(&name) {
                    return Err(syntax(line, col, format!("`{name}` cannot be bound")));
                }
                self.expect(Tok::Dot, "`.` after bound variable")?;
                let v = self.next_var;
                self.next_var += 1;
                self.scope.push((name, v));
                let body = self.disj()?;
                self.scope.pop();
                Ok(Formula::exists(v, body))
            }
            Some(Tok::Ident(s)) if self.sig.rel_index(s).is_some() => {
                let (name, line, col) = self.ident()?;
                let r = self.sig.rel_index(&name).unwrap();
                let args = if self.peek() == Some(&Tok::LParen) {
                    self.args()?
                } else {
                    Vec::new()
                };
                let expected = self.sig.rels[r].arity;
                if args.len() != expected {
                    return Err(ParseError::Arity { line, col, name, expected, found: args.len() });
                }
                Ok(Formula::Rel(r, args))
            }
            Some(_) => {
                let lhs = self.term()?;
                self.expect(Tok::Eq, "`=` or a relation")?;
                let rhs = self.term()?;
                Ok(Formula::Eq(lhs, rhs))
            }
            None => Err(self.err("unexpected end of formula")),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected `,` or `)`")),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (name, line, col) = self.ident()?;
        if is_keyword(&name) {
            return Err(syntax(line, col, format!("unexpected keyword `{name}`")));
        }
        if let Some(f) = self.sig.fun_index(&name) {
            let args = if self.peek() == Some(&Tok::LParen) {
                self.args()?
            } else {
                Vec::new()
            };
            let expected = self.sig.funs[f].arity;
            if args.len() != expected {
                return Err(ParseError::Arity { line, col, name, expected, found: args.len() });
            }
            return Ok(Term::App(f, args));
        }
        if self.sig.rel_index(&name).is_some() {
            return Err(syntax(line, col, format!("relation `{name}` used as a term")));
        }
        if self.peek() == Some(&Tok::LParen) {
            return Err(syntax(line, col, format!("unknown function `{name}`")));
        }
        self.lookup(&name)
            .map(Term::Var)
            .ok_or(ParseError::Unbound { line, col, name })
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "top" | "bot" | "exists" | "rel" | "fun" | "axiom")
}

fn parse_decl(toks: &[Spanned], sig: &mut Signature, is_rel: bool) -> Result<(), ParseError> {
    let kw = &toks[0];
    let (name, nl, nc) = match toks.get(1) {
        Some(Spanned { tok: Tok::Ident(s), line, col }) => (s.clone(), *line, *col),
        Some(s) => return Err(syntax(s.line, s.col, "expected symbol name")),
        None => return Err(syntax(kw.line, kw.col + 3, "expected symbol name")),
    };
    if is_keyword(&name) {
        return Err(syntax(nl, nc, format!("`{name}` is reserved")));
    }
    match toks.get(2) {
        Some(Spanned { tok: Tok::Slash, .. }) => {}
        Some(s) => return Err(syntax(s.line, s.col, "expected `/ARITY`")),
        None => return Err(syntax(nl, nc + name.len(), "expected `/ARITY`")),
    }
    let arity = match toks.get(3) {
        Some(Spanned { tok: Tok::Num(n), .. }) => *n,
        Some(s) => return Err(syntax(s.line, s.col, "expected arity")),
        None => return Err(syntax(nl, nc + name.len() + 1, "expected arity")),
    };
    if let Some(s) = toks.get(4) {
        return Err(syntax(s.line, s.col, "trailing input after declaration"));
    }
    if sig.contains(&name) {
        return Err(ParseError::Duplicate { line: nl, col: nc, name });
    }
    if is_rel {
        sig.add_rel(&name, arity).expect("checked above");
    } else {
        sig.add_fun(&name, arity).expect("checked above");
    }
    Ok(())
}

/// Parses `[x,y,...]` starting at `pos`; returns the names and the position
/// after `]`.
fn parse_context(
    toks: &[Spanned],
    mut pos: usize,
    sig: &Signature,
    line: usize,
    end_col: usize,
) -> Result<(Vec<String>, usize), ParseError> {
    let at = |p: usize| toks.get(p).map_or((line, end_col), |s| (s.line, s.col));
    if toks.get(pos).map(|s| &s.tok) != Some(&Tok::LBrack) {
        let (l, c) = at(pos);
        return Err(syntax(l, c, "expected `[` context"));
    }
    pos += 1;
    let mut ctx_names: Vec<String> = Vec::new();
    if toks.get(pos).map(|s| &s.tok) == Some(&Tok::RBrack) {
        return Ok((ctx_names, pos + 1));
    }
    loop {
        match toks.get(pos) {
            Some(Spanned { tok: Tok::Ident(s), line: l, col: c }) => {
                if sig.contains(s) || is_keyword(s) {
                    return Err(syntax(*l, *c, format!("`{s}` cannot be a context variable")));
                }
                if ctx_names.contains(s) {
                    return Err(syntax(*l, *c, format!("variable `{s}` repeated in context")));
                }
                ctx_names.push(s.clone());
                pos += 1;
            }
            _ => {
                let (l, c) = at(pos);
                return Err(syntax(l, c, "expected context variable"));
            }
        }
        match toks.get(pos).map(|s| &s.tok) {
            Some(Tok::Comma) => pos += 1,
            Some(Tok::RBrack) => return Ok((ctx_names, pos + 1)),
            _ => {
                let (l, c) = at(pos);
                return Err(syntax(l, c, "expected `,` or `]`"));
            }
        }
    }
}

fn parse_axiom(toks: &[Spanned], sig: &Signature, line: usize, end_col: usize) -> Result<Sequent, ParseError> {
    let ts = toks
        .iter()
        .position(|s| s.tok == Tok::Turnstile)
        .ok_or_else(|| syntax(line, toks[0].col, "axiom needs `|-`"))?;
    let (ctx_names, pos) = parse_context(toks, ts + 1, sig, line, end_col)?;
    let k = ctx_names.len();
    let scope: Vec<(String, Var)> = ctx_names.into_iter().zip(0..).collect();
    let mut next_var = k;
    let run = |slice: &[Spanned], next_var: &mut Var, end: usize| -> Result<Formula, ParseError> {
        if slice.is_empty() {
            return Err(syntax(line, end, "empty formula"));
        }
        let mut p = FormulaParser {
            toks: slice,
            pos: 0,
            sig,
            scope: scope.clone(),
            next_var: *next_var,
            line,
            end_col: end,
        };
        let f = p.disj()?;
        if p.pos != slice.len() {
            return Err(p.err("unexpected token"));
        }
        *next_var = p.next_var;
        Ok(f)
    };
    let ante = run(&toks[1..ts], &mut next_var, toks[ts].col)?;
    let succ = run(&toks[pos..], &mut next_var, end_col)?;
    let seq = Sequent { ctx: (0..k).collect(), ante, succ };
    Ok(seq.canonical_form())
}

/// Parse a theory file. Formulas come back in canonical form.
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    let mut sig = Signature::new();
    let mut axioms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex_line(raw, line)?;
        let Some(first) = toks.first() else { continue };
        match &first.tok {
            Tok::Ident(kw) if kw == "rel" || kw == "fun" => {
                parse_decl(&toks, &mut sig, kw == "rel")?;
            }
            Tok::Ident(kw) if kw == "axiom" => {
                axioms.push(parse_axiom(&toks, &sig, line, raw.chars().count() + 1)?);
            }
            _ => return Err(syntax(line, first.col, "expected `rel`, `fun` or `axiom`")),
        }
    }
    Ok(Theory { sig, axioms })
}

/// Parse a formula in context over `sig`, written either `[x,y] E(x,y)` or
/// in the printed form `[x,y | E(x,y)]`.
pub fn parse_formula_in_context(sig: &Signature, text: &str) -> Result<FormulaInContext, ParseError> {
    let mut toks = lex_line(text, 1)?;
    if let Some(pipe) = toks.iter().position(|t| t.tok == Tok::Pipe) {
        if toks.first().map(|t| &t.tok) != Some(&Tok::LBrack) || toks.last().map(|t| &t.tok) != Some(&Tok::RBrack) {
            let at = &toks[pipe];
            return Err(syntax(at.line, at.col, "`|` form must be `[x,... | FORMULA]`"));
        }
        toks.pop();
        toks[pipe].tok = Tok::RBrack;
    }
    let end_col = text.chars().count() + 1;
    let (names, pos) = parse_context(&toks, 0, sig, 1, end_col)?;
    let k = names.len();
    let rest = &toks[pos..];
    if rest.is_empty() {
        return Err(syntax(1, end_col, "empty formula"));
    }
    let mut p = FormulaParser {
        toks: rest,
        pos: 0,
        sig,
        scope: names.into_iter().zip(0..).collect(),
        next_var: k,
        line: 1,
        end_col,
    };
    let body = p.disj()?;
    if p.pos != rest.len() {
        return Err(p.err("unexpected token"));
    }
    Ok(FormulaInContext { ctx: (0..k).collect(), body }.canonical_form())
}
