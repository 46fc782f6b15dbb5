use std::collections::{BTreeMap, BTreeSet, HashSet};

use itertools::Itertools;
use serde::Serialize;

use super::form::{form_functor_levels, RelationCategory, DEFAULT_LATTICE_LIMIT};
use super::{effective_k, mod_functor, power_sheaf, GroupoidOverS, Verdict};
use crate::error::{Error, Result};
use crate::groupoid::{build_model_groupoid, mod_on_interpretation, GroupoidMorphism, ModelGroupoid};
use crate::logic::{Formula, FormulaInContext, Interpretation, Signature, Term, Theory};
use crate::models::{all_tuples, ModelClass, Structure};
use crate::topology::{basic_open_points, set_of, BasicOpenM};

/// One relation symbol `R{k}_{i}` of arity `k` per stable open `i` of `U^k`,
/// for every level of `form`.
pub fn form_signature(form: &RelationCategory) -> (Signature, Vec<(usize, usize)>) {
    let mut sig = Signature::new();
    let mut symbols = Vec::new();
    for (k, level) in form.levels.iter().enumerate() {
        for i in 0..level.opens.len() {
            sig.add_rel(&format!("R{k}_{i}"), k).expect("fresh names");
            symbols.push((k, i));
        }
    }
    (sig, symbols)
}

/// `M_x`: carrier `f0(x)`, each `R{k}_{i}` read off the fibre of the open
/// over `x`.
pub fn fibre_model(form: &RelationCategory, sig: &Signature, symbols: &[(usize, usize)], x: usize) -> Result<Structure> {
    let blocks = form.base.carrier(x).to_vec();
    let nb = blocks.len();
    let rels: Vec<BTreeSet<Vec<usize>>> = symbols
        .iter()
        .map(|&(k, i)| {
            let level = &form.levels[k];
            all_tuples(nb, k)
                .filter(|t| level.point(x, t).is_some_and(|p| level.opens[i].contains(p)))
                .collect()
        })
        .collect();
    Structure::build(form.base.n(), sig, blocks, &rels, &[])
}

/// Block subsets `A` of `m` onto which `m` has a homomorphic retraction.
fn retract_carriers(m: &Structure, sig: &Signature) -> Vec<Vec<usize>> {
    let nb = m.num_blocks();
    if nb == 0 {
        return vec![Vec::new()];
    }
    let tuples: Vec<BTreeSet<Vec<usize>>> = (0..sig.rels.len()).map(|r| m.rel_tuples(r)).collect();
    let mut out = Vec::new();
    for size in 1..=nb {
        for a in (0..nb).combinations(size) {
            let rest: Vec<usize> = (0..nb).filter(|b| !a.contains(b)).collect();
            let found = std::iter::repeat_n(a.iter().copied(), rest.len())
                .multi_cartesian_product()
                .any(|choice| {
                    let mut g: Vec<usize> = (0..nb).collect();
                    for (&b, &v) in rest.iter().zip(&choice) {
                        g[b] = v;
                    }
                    tuples.iter().all(|ts| ts.iter().all(|t| ts.contains(&t.iter().map(|&b| g[b]).collect::<Vec<_>>())))
                });
            if found || rest.is_empty() {
                out.push(a);
            }
        }
    }
    out
}

/// Induced substructure on a set of blocks.
fn induced(m: &Structure, sig: &Signature, a: &[usize]) -> Result<Structure> {
    let mut pos = vec![usize::MAX; m.num_blocks()];
    for (i, &b) in a.iter().enumerate() {
        pos[b] = i;
    }
    let rels: Vec<BTreeSet<Vec<usize>>> = (0..sig.rels.len())
        .map(|r| {
            m.rel_tuples(r)
                .into_iter()
                .filter(|t| t.iter().all(|&b| pos[b] != usize::MAX))
                .map(|t| t.iter().map(|&b| pos[b]).collect())
                .collect()
        })
        .collect();
    let blocks = a.iter().map(|&b| m.blocks()[b].clone()).collect();
    Structure::build(m.n(), sig, blocks, &rels, &[])
}

/// `Mod(Form(G))` over `S`: every relabelling inside `S` of a retract of
/// some `M_x`.
pub fn form_models(form: &RelationCategory, sig: &Signature, symbols: &[(usize, usize)]) -> Result<ModelClass> {
    let s = &form.base.s.mc;
    let mut seen: HashSet<Structure> = HashSet::new();
    let mut types: Vec<Structure> = Vec::new();
    for x in 0..form.base.g.num_objects() {
        let m = fibre_model(form, sig, symbols, x)?;
        for a in retract_carriers(&m, sig) {
            let r = induced(&m, sig, &a)?;
            if seen.insert(r.clone()) {
                types.push(r);
            }
        }
    }
    let mut all: HashSet<Structure> = HashSet::new();
    for r in &types {
        let nb = r.num_blocks();
        for carrier in s.models.iter().filter(|c| c.num_blocks() == nb) {
            for perm in (0..nb).permutations(nb) {
                let target = perm.iter().map(|&j| carrier.blocks()[j].clone()).collect();
                all.insert(r.transport(sig, target)?);
            }
        }
    }
    let bare = Signature::new();
    let mut keyed = all
        .into_iter()
        .map(|m| {
            let set = Structure::build(m.n(), &bare, m.blocks().to_vec(), &[], &[])?;
            let carrier = s.index_of(&set).ok_or_else(|| Error::Invariant("carrier is not in S".into()))?;
            let rels: Vec<BTreeSet<Vec<usize>>> = (0..sig.rels.len()).map(|r| m.rel_tuples(r)).collect();
            Ok(((carrier, rels), m))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    ModelClass::from_models(sig.clone(), s.n, keyed.into_iter().map(|(_, m)| m).collect())
}

/// `η_G: G -> Mod(Form(G))` together with its target.
#[derive(Clone, Debug)]
pub struct UnitData {
    pub sig: Signature,
    pub symbols: Vec<(usize, usize)>,
    pub target: ModelGroupoid,
    pub target_over_s: GroupoidOverS,
    pub eta: GroupoidMorphism,
}

pub fn unit(form: &RelationCategory) -> Result<UnitData> {
    let (sig, symbols) = form_signature(form);
    let mc = form_models(form, &sig, &symbols)?;
    let target = build_model_groupoid(mc)?;
    let g = &form.base;
    let mut f0 = Vec::new();
    for x in 0..g.g.num_objects() {
        let m = fibre_model(form, &sig, &symbols, x)?;
        f0.push(target.mc.index_of(&m).ok_or_else(|| Error::Invariant("M_x is missing".into()))?);
    }
    let mut f1 = Vec::new();
    for a in 0..g.g.num_arrows() {
        let perm = &g.s.mc.isos[g.f.f1[a]].perm;
        f1.push(
            target
                .mc
                .iso_index(f0[g.g.d[a]], f0[g.g.c[a]], perm)
                .ok_or_else(|| Error::Invariant("f1(a) is not an iso of fibre models".into()))?,
        );
    }
    let eta = GroupoidMorphism { f0, f1 };
    eta.verify(&g.g, &target.g)?;
    let forget = Interpretation::from_equality(&Theory::new(sig.clone(), vec![])?);
    let f = mod_on_interpretation(&forget, &target, &g.s)?;
    let target_over_s = GroupoidOverS::new(target.g.clone(), f, g.s.clone())?;
    Ok(UnitData { sig, symbols, target, target_over_s, eta })
}

/// Both triangle identities, with the unit's continuity certificate.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleReport {
    pub kmax: usize,
    pub levels: usize,
    pub form_objects: Vec<usize>,
    pub form_arrows: usize,
    pub form_models: usize,
    pub unit_over_s: bool,
    /// `η0^-1 <[x|R], a> = {x : (x,[a]) ∈ O}` for every symbol and tuple.
    pub preimages_checked: usize,
    pub preimages_ok: bool,
    /// `ε_{Form G}` lands in stable opens and functional graphs.
    pub counit_well_defined: bool,
    /// `Form(η) ∘ ε_{Form G} = 1`.
    pub form_triangle: bool,
    /// `Mod(ε_T) ∘ η_{Mod T} = 1`; absent when no theory is given.
    pub mod_triangle: Option<bool>,
    pub mod_triangle_error: Option<String>,
    pub verdict: Verdict,
}

fn form_triangle(form: &RelationCategory, u: &UnitData) -> Result<(bool, bool, usize, bool)> {
    let g = &form.base;
    let t = &u.target_over_s;
    let mc = &u.target.mc;
    let mut well_defined = true;
    let mut triangle = true;
    let mut checked = 0;
    let mut pre_ok = true;
    for (sym, &(k, i)) in u.symbols.iter().enumerate() {
        let (sheaf, points) = power_sheaf(t, k)?;
        let ext = set_of(points.len(), (0..points.len()).filter(|&p| mc.models[points[p].0].has(sym, &points[p].1)));
        well_defined &= sheaf.space.is_open(&ext) && sheaf.is_stable(&t.g, &ext);
        let level = &form.levels[k];
        let back = set_of(
            level.len(),
            (0..level.len()).filter(|&p| {
                let (x, tup) = &level.points[p];
                mc.models[u.eta.f0[*x]].has(sym, tup)
            }),
        );
        triangle &= back == level.opens[i];
        let formula = FormulaInContext::canonical(k, Formula::Rel(sym, (0..k).map(Term::Var).collect()));
        for a in all_tuples(g.n(), k) {
            let basic = basic_open_points(mc, &BasicOpenM::new(formula.clone(), a.clone())?)?;
            let pre = set_of(g.g.num_objects(), (0..g.g.num_objects()).filter(|&x| basic.contains(u.eta.f0[x])));
            let direct = set_of(
                g.g.num_objects(),
                (0..g.g.num_objects()).filter(|&x| {
                    let s = &g.s.mc.models[g.f.f0[x]];
                    s.classes(&a).is_some_and(|cls| level.point(x, &cls).is_some_and(|p| level.opens[i].contains(p)))
                }),
            );
            pre_ok &= pre == direct && g.g.objects.is_open(&pre);
            checked += 1;
        }
    }
    for arrow in &form.arrows {
        let (k, l) = (arrow.src.0, arrow.tgt.0);
        let sym = |lvl: usize, idx: usize| u.symbols.iter().position(|&s| s == (lvl, idx)).expect("symbol");
        let (ra, rb, rg) = (sym(k, arrow.src.1), sym(l, arrow.tgt.1), sym(k + l, arrow.graph));
        for m in &mc.models {
            let mut value: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for t in m.rel_tuples(rg) {
                let (x, y) = t.split_at(k);
                well_defined &= m.has(ra, x) && m.has(rb, y);
                well_defined &= value.insert(x.to_vec(), y.to_vec()).is_none();
            }
            well_defined &= m.rel_tuples(ra).iter().all(|x| value.contains_key(x));
        }
    }
    Ok((well_defined, triangle, checked, pre_ok))
}

/// `ε_T: T -> T_B` sending each symbol to the relation symbol of its
/// extension.
pub fn theory_counit(t: &Theory, mg: &ModelGroupoid, form: &RelationCategory, u: &UnitData) -> Result<Interpretation> {
    let target = Theory::new(u.sig.clone(), vec![])?;
    let lookup = |f: &FormulaInContext| -> Result<FormulaInContext> {
        let k = f.arity();
        if k >= form.levels.len() {
            return Err(Error::Precondition(format!("Form has no level {k}")));
        }
        let level = &form.levels[k];
        let mut pts = Vec::new();
        for (x, m) in mg.mc.models.iter().enumerate() {
            for tup in crate::models::eval_formula(m, f)? {
                pts.push((x, tup));
            }
        }
        let set = level.set(pts).ok_or_else(|| Error::Invariant("extension leaves U^k".into()))?;
        let i = level.open_index(&set).ok_or_else(|| Error::Invariant("extension is not stable open".into()))?;
        let sym = u.symbols.iter().position(|&s| s == (k, i)).expect("symbol");
        Ok(FormulaInContext::canonical(k, Formula::Rel(sym, (0..k).map(Term::Var).collect())))
    };
    let id = Interpretation::identity(t);
    let rels = id.rels.iter().map(lookup).collect::<Result<Vec<_>>>()?;
    let funs = id.funs.iter().map(lookup).collect::<Result<Vec<_>>>()?;
    Interpretation::new(t.clone(), target, rels, funs)
}

fn verdict(r: &TriangleReport) -> Verdict {
    let ok = r.unit_over_s && r.preimages_ok && r.counit_well_defined && r.form_triangle && r.mod_triangle != Some(false);
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Triangle identities for a groupoid over `S`; `theory` adds the second
/// identity when `form.base` is `Mod(T)` built from `mg`.
pub fn triangles_for(form: &RelationCategory, theory: Option<(&Theory, &ModelGroupoid)>) -> Result<TriangleReport> {
    let u = unit(form)?;
    let g = &form.base;
    let unit_over_s = (0..g.g.num_objects()).all(|x| u.target_over_s.f.f0[u.eta.f0[x]] == g.f.f0[x])
        && (0..g.g.num_arrows()).all(|a| u.target_over_s.f.f1[u.eta.f1[a]] == g.f.f1[a]);
    let (counit_well_defined, form_triangle, preimages_checked, preimages_ok) = form_triangle(form, &u)?;
    let (mut mod_triangle, mut mod_triangle_error) = (None, None);
    if let Some((t, mg)) = theory {
        let outcome = theory_counit(t, mg, form, &u)
            .and_then(|eps| mod_on_interpretation(&eps, &u.target, mg))
            .map(|back| back.compose(&u.eta) == GroupoidMorphism::identity(&mg.g));
        match outcome {
            Ok(b) => mod_triangle = Some(b),
            Err(e) => {
                mod_triangle = Some(false);
                mod_triangle_error = Some(e.to_string());
            }
        }
    }
    let mut r = TriangleReport {
        kmax: form.kmax,
        levels: form.levels.len(),
        form_objects: form.object_counts(),
        form_arrows: form.arrows.len(),
        form_models: u.target.mc.len(),
        unit_over_s,
        preimages_checked,
        preimages_ok,
        counit_well_defined,
        form_triangle,
        mod_triangle,
        mod_triangle_error,
        verdict: Verdict::Fail,
    };
    r.verdict = verdict(&r);
    Ok(r)
}

/// Both triangle identities for `Mod(T)`, with `Form` computed far enough
/// up to interpret every symbol of `T`.
pub fn check_triangle_identities(t: &Theory, n: usize, kmax: usize, limit: u64) -> Result<TriangleReport> {
    let (g, mg) = mod_functor(t, n, limit)?;
    let form = form_functor_levels(&g, kmax, effective_k(t, kmax).max(2 * kmax), DEFAULT_LATTICE_LIMIT)?;
    triangles_for(&form, Some((t, &mg)))
}
