use serde::Serialize;

use super::form::RelationCategory;
use super::syntactic::TheoryCategory;
use super::{form_functor, mod_functor, syntactic_category, Verdict};
use crate::error::{Error, Result};
use crate::logic::{FormulaInContext, Theory};
use crate::models::Profile;
use crate::sheaves::definable_sheaf;
use crate::sheaves::is_sheaf_isomorphism;
use crate::topology::PointSet;

/// `ε_T: C_T -> Form(Mod(T))` at the given bounds, with its certificate.
#[derive(Clone, Debug, Serialize)]
pub struct CounitReport {
    pub kmax: usize,
    pub depth: usize,
    pub syntactic_objects: Vec<usize>,
    pub form_objects: Vec<usize>,
    /// `object_map[k][i]`: index of `ε[x|φ_i]` among the stable opens of
    /// `U^k`.
    pub object_map: Vec<Vec<usize>>,
    pub objects_injective: bool,
    /// Stable opens no formula up to the depth bound reaches.
    pub unmatched_objects: Vec<(usize, usize)>,
    pub syntactic_arrows: usize,
    pub form_arrows: usize,
    pub arrow_map: Vec<usize>,
    pub arrows_injective: bool,
    pub unmatched_arrows: Vec<usize>,
    pub inclusions_preserved: bool,
    pub identities_preserved: bool,
    pub composites_checked: usize,
    pub functorial: bool,
    /// `U^k` over `Mod(T)` is `<<x|⊤>>` for each `k`.
    pub pullback_square: bool,
    pub verdict: Verdict,
}

impl CounitReport {
    pub fn bijective(&self) -> bool {
        self.objects_injective && self.arrows_injective && self.unmatched_objects.is_empty() && self.unmatched_arrows.is_empty()
    }
}

fn profile_to_set(cat: &TheoryCategory, form: &RelationCategory, k: usize, p: &Profile) -> Result<PointSet> {
    let space = cat.space(k);
    form.levels[k]
        .set(p.ones().map(|i| space.decode(i)))
        .ok_or_else(|| Error::Invariant("extension leaves U^k".into()))
}

fn open_of(cat: &TheoryCategory, form: &RelationCategory, k: usize, p: &Profile) -> Result<usize> {
    let s = profile_to_set(cat, form, k, p)?;
    form.levels[k]
        .open_index(&s)
        .ok_or_else(|| Error::Invariant(format!("an extension at k={k} is not stable open")))
}

/// Compares a syntactic category with `Form(Mod(T))` built over the same
/// model class.
pub fn compare(cat: &TheoryCategory, form: &RelationCategory) -> Result<CounitReport> {
    if cat.kmax != form.kmax {
        return Err(Error::Precondition(format!("bounds mismatch: kmax {} vs {}", cat.kmax, form.kmax)));
    }
    if form.base.g.num_objects() != cat.mc.len() {
        return Err(Error::Precondition("Form side is not built over the same models".into()));
    }
    let kmax = cat.kmax;
    let mut object_map = Vec::new();
    let mut objects_injective = true;
    let mut unmatched_objects = Vec::new();
    for k in 0..=kmax {
        let row = cat.objects[k].iter().map(|o| open_of(cat, form, k, &o.profile)).collect::<Result<Vec<_>>>()?;
        let mut hit = vec![false; form.objects(k).len()];
        for &j in &row {
            objects_injective &= !hit[j];
            hit[j] = true;
        }
        unmatched_objects.extend(hit.iter().enumerate().filter(|(_, &h)| !h).map(|(j, _)| (k, j)));
        object_map.push(row);
    }
    let mut arrow_map = Vec::new();
    let mut inclusions_preserved = true;
    let mut identities_preserved = true;
    for a in &cat.arrows {
        let graph = open_of(cat, form, a.src.0 + a.tgt.0, &a.profile)?;
        let src = (a.src.0, object_map[a.src.0][a.src.1]);
        let tgt = (a.tgt.0, object_map[a.tgt.0][a.tgt.1]);
        let j = form
            .find_arrow(src, tgt, graph)
            .ok_or_else(|| Error::Invariant("image of a syntactic arrow is not functional".into()))?;
        inclusions_preserved &= form.arrows[j].inclusion == a.inclusion;
        identities_preserved &= form.arrows[j].identity == a.identity;
        arrow_map.push(j);
    }
    let mut hit = vec![false; form.arrows.len()];
    let mut arrows_injective = true;
    for &j in &arrow_map {
        arrows_injective &= !hit[j];
        hit[j] = true;
    }
    let unmatched_arrows: Vec<usize> = hit.iter().enumerate().filter(|(_, &h)| !h).map(|(j, _)| j).collect();
    let mut composites_checked = 0;
    let mut functorial = true;
    for (fi, f) in cat.arrows.iter().enumerate() {
        for (gi, g) in cat.arrows.iter().enumerate() {
            if f.tgt != g.src {
                continue;
            }
            let (comp, class) = cat.compose(gi, fi)?;
            let k = f.src.0 + g.tgt.0;
            let p = cat.space(k).profile(&cat.mc, &comp)?;
            let graph = open_of(cat, form, k, &p)?;
            let expected = form.compose(arrow_map[gi], arrow_map[fi])?;
            functorial &= form.arrows[expected].graph == graph;
            if let Some(c) = class {
                functorial &= arrow_map[c] == expected;
            }
            composites_checked += 1;
        }
    }
    let mut pullback_square = true;
    let mg = crate::groupoid::ModelGroupoid { mc: cat.mc.clone(), g: form.base.g.clone() };
    for k in 0..=kmax {
        let def = definable_sheaf(&mg, &FormulaInContext::top(k))?;
        let level = &form.levels[k];
        let map: Option<Vec<usize>> = def.points.iter().map(|(m, t)| level.point(*m, t)).collect();
        pullback_square &= map.is_some_and(|map: Vec<usize>| is_sheaf_isomorphism(&form.base.g, &def.sheaf, &level.sheaf, &map));
    }
    let sound = objects_injective
        && arrows_injective
        && inclusions_preserved
        && identities_preserved
        && functorial
        && pullback_square;
    // A missing inclusion means the search never built `φ ∧ x = y`.
    let complete = unmatched_objects.is_empty() && unmatched_arrows.is_empty() && cat.inclusions_unique;
    let verdict = match (sound, complete) {
        (false, _) => Verdict::Fail,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Inconclusive,
    };
    Ok(CounitReport {
        kmax,
        depth: cat.depth,
        syntactic_objects: cat.object_counts(),
        form_objects: form.object_counts(),
        object_map,
        objects_injective,
        unmatched_objects,
        syntactic_arrows: cat.arrows.len(),
        form_arrows: form.arrows.len(),
        arrow_map,
        arrows_injective,
        unmatched_arrows,
        inclusions_preserved,
        identities_preserved,
        composites_checked,
        functorial,
        pullback_square,
        verdict,
    })
}

/// Builds both sides for `T` and compares them.
pub fn counit(t: &Theory, n: usize, kmax: usize, depth: usize, limit: u64) -> Result<(CounitReport, TheoryCategory, RelationCategory)> {
    let (g, mg) = mod_functor(t, n, limit)?;
    let form = form_functor(&g, kmax, super::form::DEFAULT_LATTICE_LIMIT)?;
    let cat = syntactic_category(&mg.mc, kmax, depth)?;
    let report = compare(&cat, &form)?;
    Ok((report, cat, form))
}
