use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use super::{all_tuples, enumerate_structures, eval_formula, is_model, isomorphisms, sequent_holds, Structure};
use crate::error::{Error, Result};
use crate::logic::{Interpretation, Sequent, Signature, Theory};

/// Default cap on the number of structures enumerated.
pub const DEFAULT_LIMIT: u64 = 2_000_000;

/// An isomorphism between two models of a class; `perm[i]` is the image of
/// block `i` of the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iso {
    pub dom: usize,
    pub cod: usize,
    pub perm: Vec<usize>,
}

/// All models of a theory over `S = {0..n-1}` and all isomorphisms between
/// them, sorted by `(dom, cod, perm)`.
#[derive(Clone, Debug)]
pub struct ModelClass {
    pub sig: Signature,
    pub theory: Option<Theory>,
    pub n: usize,
    pub models: Vec<Structure>,
    pub isos: Vec<Iso>,
    index: HashMap<Structure, usize>,
    pairs: HashMap<(usize, usize), Range<usize>>,
    identities: Vec<usize>,
}

impl ModelClass {
    pub fn build(theory: &Theory, n: usize, limit: u64) -> Result<ModelClass> {
        if n == 0 {
            return Err(Error::Precondition("index set must be nonempty".into()));
        }
        let all = enumerate_structures(&theory.sig, n, limit)?;
        let models = all.into_iter().filter(|m| is_model(m, theory)).collect();
        let mut mc = Self::from_models(theory.sig.clone(), n, models)?;
        mc.theory = Some(theory.clone());
        Ok(mc)
    }

    /// A class given by an explicit list of structures, which should be
    /// closed under isomorphism within `S`.
    pub fn from_models(sig: Signature, n: usize, models: Vec<Structure>) -> Result<ModelClass> {
        let mut index = HashMap::new();
        for (i, m) in models.iter().enumerate() {
            if !m.matches(&sig) || m.n() != n {
                return Err(Error::SignatureMismatch(format!("structure {i} does not fit")));
            }
            if index.insert(m.clone(), i).is_some() {
                return Err(Error::IllFormed(format!("structure {i} listed twice")));
            }
        }
        let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, m) in models.iter().enumerate() {
            by_size.entry(m.num_blocks()).or_default().push(i);
        }
        let mut isos = Vec::new();
        for (i, m) in models.iter().enumerate() {
            for &j in &by_size[&m.num_blocks()] {
                for perm in isomorphisms(m, &models[j]) {
                    isos.push(Iso { dom: i, cod: j, perm });
                }
            }
        }
        isos.sort();
        let mut pairs: HashMap<(usize, usize), Range<usize>> = HashMap::new();
        let mut start = 0;
        while start < isos.len() {
            let key = (isos[start].dom, isos[start].cod);
            let mut end = start;
            while end < isos.len() && (isos[end].dom, isos[end].cod) == key {
                end += 1;
            }
            pairs.insert(key, start..end);
            start = end;
        }
        let identities = (0..models.len())
            .map(|i| {
                let id: Vec<usize> = (0..models[i].num_blocks()).collect();
                let r = pairs[&(i, i)].clone();
                r.start + isos[r].binary_search_by(|f| f.perm.cmp(&id)).expect("identity is an iso")
            })
            .collect();
        Ok(ModelClass { sig, theory: None, n, models, isos, index, pairs, identities })
    }

    pub fn index_of(&self, m: &Structure) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn arrows_between(&self, dom: usize, cod: usize) -> Range<usize> {
        self.pairs.get(&(dom, cod)).cloned().unwrap_or(0..0)
    }

    pub fn iso_index(&self, dom: usize, cod: usize, perm: &[usize]) -> Option<usize> {
        let r = self.arrows_between(dom, cod);
        let start = r.start;
        self.isos[r]
            .binary_search_by(|f| f.perm.as_slice().cmp(perm))
            .ok()
            .map(|i| start + i)
    }

    pub fn identity(&self, m: usize) -> usize {
        self.identities[m]
    }

    pub fn inverse(&self, f: usize) -> usize {
        let iso = &self.isos[f];
        let mut inv = vec![0; iso.perm.len()];
        for (i, &j) in iso.perm.iter().enumerate() {
            inv[j] = i;
        }
        self.iso_index(iso.cod, iso.dom, &inv).expect("inverse is listed")
    }

    /// `g ∘ f`, defined when `cod f = dom g`.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        let (fi, gi) = (&self.isos[f], &self.isos[g]);
        if fi.cod != gi.dom {
            return None;
        }
        let perm: Vec<usize> = fi.perm.iter().map(|&b| gi.perm[b]).collect();
        Some(self.iso_index(fi.dom, gi.cod, &perm).expect("composite is listed"))
    }

    /// Image of a domain block under an iso.
    pub fn apply_iso(&self, f: usize, block: usize) -> usize {
        self.isos[f].perm[block]
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Whether the sequent holds in every model of the class.
pub fn entails(mc: &ModelClass, s: &Sequent) -> Result<bool> {
    for m in &mc.models {
        if !sequent_holds(m, s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Check that every function graph of `f` is total and single-valued and
/// every translated source axiom holds, across all models of `target`.
pub fn validate_interpretation(f: &Interpretation, target: &ModelClass) -> Result<()> {
    for (sym, img) in f.source.sig.funs.iter().zip(&f.funs) {
        for m in &target.models {
            let ext: BTreeSet<Vec<usize>> = eval_formula(m, img)?.into_iter().collect();
            for t in all_tuples(m.num_blocks(), sym.arity) {
                let hits = (0..m.num_blocks())
                    .filter(|&y| {
                        let mut full = t.clone();
                        full.push(y);
                        ext.contains(&full)
                    })
                    .count();
                if hits != 1 {
                    return Err(Error::NotFunctional(format!(
                        "graph of `{}` has {hits} values at {t:?} in {}",
                        sym.name,
                        m.label()
                    )));
                }
            }
        }
    }
    for ax in &f.source.axioms {
        if !entails(target, &f.translate_sequent(ax))? {
            return Err(Error::Invariant("a translated axiom fails in the target".into()));
        }
    }
    Ok(())
}

/// The source-signature structure on the same carrier, with symbols read
/// through the interpretation.
pub fn reduct(m: &Structure, f: &Interpretation) -> Result<Structure> {
    let sig = &f.source.sig;
    let mut rels = Vec::new();
    for img in &f.rels {
        rels.push(eval_formula(m, img)?.into_iter().collect::<BTreeSet<_>>());
    }
    let mut funs = Vec::new();
    for (sym, img) in sig.funs.iter().zip(&f.funs) {
        let mut table = BTreeMap::new();
        for mut t in eval_formula(m, img)? {
            let y = t.pop().expect("graph has arity >= 1");
            if table.insert(t.clone(), y).is_some() {
                return Err(Error::NotFunctional(format!("`{}` at {t:?}", sym.name)));
            }
        }
        if table.len() != super::tuple_count(m.num_blocks(), sym.arity) {
            return Err(Error::NotFunctional(format!("`{}` is not total", sym.name)));
        }
        funs.push(table);
    }
    Structure::build(m.n(), sig, m.blocks().to_vec(), &rels, &funs)
}

/// A model `N` with carrier all of `S` and an isomorphism `M -> N` sending
/// the class of `a[i]` to the class of `b[i]`.
///
/// The surjection `S -> blocks(M)` sends `b[i]` to `[a[i]]`, then each block
/// not yet hit to the least unused element, then everything else to block 0.
pub fn star_extension(m: &Structure, sig: &Signature, a: &[usize], b: &[usize]) -> Result<(Structure, Vec<usize>)> {
    if a.len() != b.len() {
        return Err(Error::Precondition("tuples differ in length".into()));
    }
    let distinct: BTreeSet<usize> = b.iter().copied().collect();
    if distinct.len() != b.len() {
        return Err(Error::Precondition("target tuple has repeated entries".into()));
    }
    let n = m.n();
    if let Some(&e) = b.iter().find(|&&e| e >= n) {
        return Err(Error::Precondition(format!("element {e} outside S")));
    }
    let classes = m
        .classes(a)
        .ok_or_else(|| Error::Precondition("source tuple not defined in the model".into()))?;
    let nb = m.num_blocks();
    let mut assign: Vec<Option<usize>> = vec![None; n];
    for (&e, &c) in b.iter().zip(&classes) {
        assign[e] = Some(c);
    }
    let hit: BTreeSet<usize> = classes.iter().copied().collect();
    let free_elems: Vec<usize> = (0..n).filter(|&e| assign[e].is_none()).collect();
    let mut free = free_elems.into_iter();
    for blk in (0..nb).filter(|blk| !hit.contains(blk)) {
        match free.next() {
            Some(e) => assign[e] = Some(blk),
            None => {
                return Err(Error::Headroom(format!(
                    "{} blocks to cover with {} free elements",
                    nb - hit.len(),
                    n - b.len()
                )))
            }
        }
    }
    if nb == 0 {
        return Err(Error::Headroom("no surjection onto an empty carrier".into()));
    }
    let mut fibres = vec![Vec::new(); nb];
    for e in 0..n {
        fibres[assign[e].unwrap_or(0)].push(e);
    }
    let target = m.transport(sig, fibres.clone())?;
    let perm = fibres
        .iter()
        .map(|fib| target.block_of(fib[0]).expect("fibre lies in the carrier"))
        .collect();
    Ok((target, perm))
}
