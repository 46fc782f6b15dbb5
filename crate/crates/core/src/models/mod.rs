//! Structures on quotients of subsets of `S = {0..n-1}`, their enumeration,
//! evaluation of formulas, isomorphisms and model classes.

mod class;
mod eval;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::Signature;

pub use class::{
    entails, reduct, star_extension, validate_interpretation, Iso, ModelClass, DEFAULT_LIMIT,
};
pub use eval::{eval_formula, holds_at, is_model, sequent_holds};
pub use search::{FormulaSearch, Profile, SearchEntry, TupleSpace};

/// Number of tuples of length `len` over `nb` blocks.
pub fn tuple_count(nb: usize, len: usize) -> usize {
    nb.pow(len as u32)
}

/// Position of a block tuple in lexicographic order, last entry least
/// significant.
pub fn tuple_index(nb: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &b| acc * nb + b)
}

pub fn tuple_at(nb: usize, len: usize, mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % nb.max(1);
        idx /= nb.max(1);
    }
    out
}

/// All tuples of length `len` over `0..nb` in lexicographic order.
pub fn all_tuples(nb: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..tuple_count(nb, len)).map(move |i| tuple_at(nb, len, i))
}

/// A structure whose carrier is a partition of a subset of `S`. Blocks are
/// sorted by their least element, which serves as the block key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    n: usize,
    domain: Vec<usize>,
    block_of: Vec<Option<usize>>,
    blocks: Vec<Vec<usize>>,
    rel_arity: Vec<usize>,
    fun_arity: Vec<usize>,
    rels: Vec<FixedBitSet>,
    funs: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct StructureJson {
    domain: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    rels: BTreeMap<String, Vec<Vec<usize>>>,
    funs: BTreeMap<String, Vec<(Vec<usize>, usize)>>,
}

impl Structure {
    /// Build a structure from blocks given in any order. Relation tuples and
    /// function tables refer to positions in `blocks`.
    pub fn build(
        n: usize,
        sig: &Signature,
        blocks: Vec<Vec<usize>>,
        rel_tuples: &[BTreeSet<Vec<usize>>],
        fun_tables: &[BTreeMap<Vec<usize>, usize>],
    ) -> Result<Structure> {
        let mut block_of = vec![None; n];
        let mut keyed: Vec<(Vec<usize>, usize)> = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            let mut b = b.clone();
            b.sort_unstable();
            b.dedup();
            if b.is_empty() {
                return Err(Error::IllFormed("empty block".into()));
            }
            for &e in &b {
                if e >= n {
                    return Err(Error::IllFormed(format!("element {e} outside S")));
                }
                if block_of[e].is_some() {
                    return Err(Error::IllFormed(format!("element {e} in two blocks")));
                }
                block_of[e] = Some(usize::MAX);
            }
            keyed.push((b, i));
        }
        keyed.sort();
        let nb = keyed.len();
        let mut renum = vec![0; nb];
        for (new, (b, old)) in keyed.iter().enumerate() {
            renum[*old] = new;
            for &e in b {
                block_of[e] = Some(new);
            }
        }
        let domain: Vec<usize> = (0..n).filter(|&e| block_of[e].is_some()).collect();
        let blocks: Vec<Vec<usize>> = keyed.into_iter().map(|(b, _)| b).collect();
        if rel_tuples.len() != sig.rels.len() || fun_tables.len() != sig.funs.len() {
            return Err(Error::SignatureMismatch("interpretation count".into()));
        }
        let mut rels = Vec::new();
        for (sym, tuples) in sig.rels.iter().zip(rel_tuples) {
            let mut bits = FixedBitSet::with_capacity(tuple_count(nb, sym.arity));
            for t in tuples {
                if t.len() != sym.arity || t.iter().any(|&b| b >= nb) {
                    return Err(Error::IllFormed(format!("bad tuple for `{}`", sym.name)));
                }
                let mapped: Vec<usize> = t.iter().map(|&b| renum[b]).collect();
                bits.insert(tuple_index(nb, &mapped));
            }
            rels.push(bits);
        }
        let mut funs = Vec::new();
        for (sym, table) in sig.funs.iter().zip(fun_tables) {
            let mut out = vec![usize::MAX; tuple_count(nb, sym.arity)];
            for (t, &v) in table {
                if t.len() != sym.arity || t.iter().any(|&b| b >= nb) || v >= nb {
                    return Err(Error::IllFormed(format!("bad entry for `{}`", sym.name)));
                }
                let mapped: Vec<usize> = t.iter().map(|&b| renum[b]).collect();
                out[tuple_index(nb, &mapped)] = renum[v];
            }
            if out.contains(&usize::MAX) {
                return Err(Error::IllFormed(format!("`{}` is not total", sym.name)));
            }
            funs.push(out);
        }
        Ok(Structure {
            n,
            domain,
            block_of,
            blocks,
            rel_arity: sig.rels.iter().map(|s| s.arity).collect(),
            fun_arity: sig.funs.iter().map(|s| s.arity).collect(),
            rels,
            funs,
        })
    }

    /// Size of the index set.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block containing the element `e` of `S`, if `e` is in the domain.
    pub fn block_of(&self, e: usize) -> Option<usize> {
        self.block_of.get(e).copied().flatten()
    }

    /// Blocks of a tuple of elements, if all are defined.
    pub fn classes(&self, elems: &[usize]) -> Option<Vec<usize>> {
        elems.iter().map(|&e| self.block_of(e)).collect()
    }

    pub fn key(&self, block: usize) -> usize {
        self.blocks[block][0]
    }

    pub fn rel_arities(&self) -> &[usize] {
        &self.rel_arity
    }

    pub fn fun_arities(&self) -> &[usize] {
        &self.fun_arity
    }

    pub fn has(&self, r: usize, t: &[usize]) -> bool {
        self.rels[r].contains(tuple_index(self.num_blocks(), t))
    }

    pub fn apply(&self, f: usize, t: &[usize]) -> usize {
        self.funs[f][tuple_index(self.num_blocks(), t)]
    }

    pub fn rel_tuples(&self, r: usize) -> BTreeSet<Vec<usize>> {
        let nb = self.num_blocks();
        self.rels[r].ones().map(|i| tuple_at(nb, self.rel_arity[r], i)).collect()
    }

    pub fn fun_table(&self, f: usize) -> BTreeMap<Vec<usize>, usize> {
        let nb = self.num_blocks();
        self.funs[f]
            .iter()
            .enumerate()
            .map(|(i, &v)| (tuple_at(nb, self.fun_arity[f], i), v))
            .collect()
    }

    pub fn matches(&self, sig: &Signature) -> bool {
        self.rel_arity.len() == sig.rels.len()
            && self.fun_arity.len() == sig.funs.len()
            && sig.rels.iter().zip(&self.rel_arity).all(|(s, &a)| s.arity == a)
            && sig.funs.iter().zip(&self.fun_arity).all(|(s, &a)| s.arity == a)
    }

    /// Same carrier, relations and functions transported along a bijection
    /// of blocks onto the blocks of a partition `target_blocks`.
    pub fn transport(&self, sig: &Signature, target_blocks: Vec<Vec<usize>>) -> Result<Structure> {
        let rels: Vec<BTreeSet<Vec<usize>>> = (0..sig.rels.len()).map(|r| self.rel_tuples(r)).collect();
        let funs: Vec<BTreeMap<Vec<usize>, usize>> = (0..sig.funs.len()).map(|f| self.fun_table(f)).collect();
        Structure::build(self.n, sig, target_blocks, &rels, &funs)
    }

    /// Canonical JSON: domain, blocks, then relation and function tables
    /// keyed by symbol name. Blocks inside tuples are written by their key.
    pub fn to_json(&self, sig: &Signature) -> String {
        serde_json::to_string(&self.json_repr(sig)).expect("serializable")
    }

    pub fn to_json_value(&self, sig: &Signature) -> serde_json::Value {
        serde_json::to_value(self.json_repr(sig)).expect("serializable")
    }

    fn json_repr(&self, sig: &Signature) -> StructureJson {
        let key = |t: &[usize]| t.iter().map(|&b| self.key(b)).collect::<Vec<_>>();
        StructureJson {
            domain: self.domain.clone(),
            blocks: self.blocks.clone(),
            rels: sig
                .rels
                .iter()
                .enumerate()
                .map(|(r, s)| (s.name.clone(), self.rel_tuples(r).iter().map(|t| key(t)).collect()))
                .collect(),
            funs: sig
                .funs
                .iter()
                .enumerate()
                .map(|(f, s)| {
                    let rows = self.fun_table(f).iter().map(|(t, &v)| (key(t), self.key(v))).collect();
                    (s.name.clone(), rows)
                })
                .collect(),
        }
    }

    /// Short human-readable label such as `{0}{1|2}`.
    pub fn label(&self) -> String {
        if self.blocks.is_empty() {
            return "{}".into();
        }
        self.blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("|")))
            .collect()
    }
}

/// Set partitions of `m` items as restricted growth strings, in
/// lexicographic order.
pub fn restricted_growth_strings(m: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        let hi = if cur.is_empty() { 0 } else { max + 1 };
        for v in 0..=hi {
            cur.push(v);
            go(m, cur, max.max(v), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, &mut Vec::new(), 0, &mut out);
    out
}

fn stirling2(m: usize, k: usize) -> f64 {
    let mut t = vec![vec![0f64; k + 1]; m + 1];
    t[0][0] = 1.0;
    for i in 1..=m {
        for j in 1..=k.min(i) {
            t[i][j] = j as f64 * t[i - 1][j] + t[i - 1][j - 1];
        }
    }
    t[m][k]
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of interpretations of `sig` on a carrier with `nb` blocks.
fn interpretations(sig: &Signature, nb: usize) -> f64 {
    let r: f64 = sig.rels.iter().map(|s| 2f64.powf(nb.pow(s.arity as u32) as f64)).product();
    let f: f64 = sig
        .funs
        .iter()
        .map(|s| (nb as f64).powf(nb.pow(s.arity as u32) as f64))
        .product();
    r * f
}

/// Exact count (as a float) of structures over `S = {0..n-1}`.
pub fn estimate_structures(sig: &Signature, n: usize) -> f64 {
    let mut total = 0.0;
    for m in 0..=n {
        for nb in 0..=m {
            let parts = if m == 0 && nb == 0 { 1.0 } else { stirling2(m, nb) };
            total += binom(n, m) * parts * interpretations(sig, nb);
        }
    }
    total
}

/// Every structure over `S = {0..n-1}`: subsets in binary order, partitions
/// in restricted-growth order, relations as bitmasks (first symbol
/// outermost), then function tables lexicographically.
pub fn enumerate_structures(sig: &Signature, n: usize, limit: u64) -> Result<Vec<Structure>> {
    let est = estimate_structures(sig, n);
    if est > limit as f64 {
        return Err(Error::LimitExceeded {
            what: format!("structures over |S|={n}"),
            estimate: format!("{est:.3e}"),
            limit,
        });
    }
    let mut out = Vec::with_capacity(est as usize);
    for mask in 0u64..(1u64 << n) {
        let dom: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        for rgs in restricted_growth_strings(dom.len()) {
            let nb = rgs.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); nb];
            let mut block_of = vec![None; n];
            for (&e, &b) in dom.iter().zip(&rgs) {
                blocks[b].push(e);
                block_of[e] = Some(b);
            }
            let mut radices: Vec<u64> = Vec::new();
            for s in &sig.rels {
                let cells = tuple_count(nb, s.arity);
                if cells >= 64 {
                    return Err(Error::LimitExceeded {
                        what: format!("relation `{}` on {nb} blocks", s.name),
                        estimate: format!("2^{cells}"),
                        limit,
                    });
                }
                radices.push(1u64 << cells);
            }
            let fun_cells: Vec<usize> = sig.funs.iter().map(|s| tuple_count(nb, s.arity)).collect();
            for &cells in &fun_cells {
                radices.extend(std::iter::repeat_n(nb as u64, cells));
            }
            if radices.contains(&0) {
                continue;
            }
            let mut digits = vec![0u64; radices.len()];
            loop {
                let rels = sig
                    .rels
                    .iter()
                    .zip(&digits)
                    .map(|(s, &mask)| {
                        let mut bits = FixedBitSet::with_capacity(tuple_count(nb, s.arity));
                        (0..bits.len()).filter(|i| mask >> i & 1 == 1).for_each(|i| bits.insert(i));
                        bits
                    })
                    .collect();
                let mut funs = Vec::new();
                let mut pos = sig.rels.len();
                for &cells in &fun_cells {
                    funs.push(digits[pos..pos + cells].iter().map(|&d| d as usize).collect());
                    pos += cells;
                }
                out.push(Structure {
                    n,
                    domain: dom.clone(),
                    block_of: block_of.clone(),
                    blocks: blocks.clone(),
                    rel_arity: sig.rels.iter().map(|s| s.arity).collect(),
                    fun_arity: sig.funs.iter().map(|s| s.arity).collect(),
                    rels,
                    funs,
                });
                if !advance(&mut digits, &radices) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Mixed-radix increment, last digit fastest. Returns false on wrap-around.
fn advance(digits: &mut [u64], radices: &[u64]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Block bijections from `m` to `n` that preserve and reflect relations and
/// commute with functions. `perm[i]` is the image of block `i`.
pub fn isomorphisms(m: &Structure, n: &Structure) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    let nb = m.num_blocks();
    if nb != n.num_blocks() || m.rel_arity != n.rel_arity || m.fun_arity != n.fun_arity {
        return Vec::new();
    }
    (0..nb)
        .permutations(nb)
        .filter(|p| is_isomorphism(m, n, p))
        .collect()
}

pub fn is_isomorphism(m: &Structure, n: &Structure, perm: &[usize]) -> bool {
    let nb = m.num_blocks();
    let img = |t: &[usize]| t.iter().map(|&b| perm[b]).collect::<Vec<_>>();
    for (r, &ar) in m.rel_arity.iter().enumerate() {
        for t in all_tuples(nb, ar) {
            if m.has(r, &t) != n.has(r, &img(&t)) {
                return false;
            }
        }
    }
    for (f, &ar) in m.fun_arity.iter().enumerate() {
        for t in all_tuples(nb, ar) {
            if perm[m.apply(f, &t)] != n.apply(f, &img(&t)) {
                return false;
            }
        }
    }
    true
}
