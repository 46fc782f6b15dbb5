use std::collections::{BTreeSet, HashMap};

use super::{GroupoidMorphism, TopGroupoid};
use crate::error::{Error, Result};
use crate::logic::{Formula, FormulaInContext, Interpretation, Theory};
use crate::models::{reduct, star_extension, ModelClass};
use crate::topology::{
    arrow_space, basic_open_arrows, basic_open_points, object_space, preservation_set, set_of, BasicOpenI,
    BasicOpenM, PointSet,
};

/// The groupoid of models and isomorphisms of a model class, with the
/// logical topologies.
#[derive(Clone, Debug)]
pub struct ModelGroupoid {
    pub mc: ModelClass,
    pub g: TopGroupoid,
}

pub fn build_model_groupoid(mc: ModelClass) -> Result<ModelGroupoid> {
    let objects = object_space(&mc);
    let arrows = arrow_space(&mc, &objects);
    let d = mc.isos.iter().map(|f| f.dom).collect();
    let c = mc.isos.iter().map(|f| f.cod).collect();
    let e = (0..mc.len()).map(|m| mc.identity(m)).collect();
    let inv = (0..mc.isos.len()).map(|f| mc.inverse(f)).collect();
    let mut comp = HashMap::new();
    for g in 0..mc.isos.len() {
        for m in 0..mc.len() {
            for f in mc.arrows_between(m, mc.isos[g].dom) {
                comp.insert((g, f), mc.compose(g, f).expect("composable"));
            }
        }
    }
    let g = TopGroupoid::new(objects, arrows, d, c, e, inv, comp)?;
    Ok(ModelGroupoid { mc, g })
}

/// The groupoid of sets over `S = {0..n-1}`: models of the empty theory.
pub fn build_s_groupoid(n: usize) -> Result<ModelGroupoid> {
    build_model_groupoid(ModelClass::build(&Theory::equality(), n, crate::models::DEFAULT_LIMIT)?)
}

/// Preimages of `<a|->b>` under inverse, identity and composition, with the
/// three expected descriptions compared as point sets.
#[derive(Clone, Debug)]
pub struct PreimageReport {
    pub a: usize,
    pub b: usize,
    pub inverse: PointSet,
    pub identity: PointSet,
    pub composition: BTreeSet<(usize, usize)>,
    pub inverse_ok: bool,
    pub identity_ok: bool,
    pub composition_ok: bool,
}

impl PreimageReport {
    pub fn all_ok(&self) -> bool {
        self.inverse_ok && self.identity_ok && self.composition_ok
    }
}

pub fn structure_map_preimages(mg: &ModelGroupoid, a: usize, b: usize) -> Result<PreimageReport> {
    let (mc, g) = (&mg.mc, &mg.g);
    if a >= mc.n || b >= mc.n {
        return Err(Error::Precondition("elements outside S".into()));
    }
    let ab = preservation_set(mc, a, b);
    let inverse = crate::topology::preimage(&g.inv, &ab, g.num_arrows());
    let inverse_ok = inverse == preservation_set(mc, b, a);
    let identity = crate::topology::preimage(&g.e, &ab, g.num_objects());
    let eq = BasicOpenM::new(FormulaInContext::canonical(2, Formula::var_eq(0, 1)), vec![a, b])?;
    let identity_ok = identity == basic_open_points(mc, &eq)?;
    let composition: BTreeSet<(usize, usize)> =
        g.comp.iter().filter(|(_, &gf)| ab.contains(gf)).map(|(&k, _)| k).collect();
    let mut expected = BTreeSet::new();
    for c in 0..mc.n {
        let cb = preservation_set(mc, c, b);
        let ac = preservation_set(mc, a, c);
        for &(x, y) in g.comp.keys() {
            if cb.contains(x) && ac.contains(y) {
                expected.insert((x, y));
            }
        }
    }
    let composition_ok = composition == expected;
    Ok(PreimageReport { a, b, inverse, identity, composition, inverse_ok, identity_ok, composition_ok })
}

/// `d(V)` together with a covering by basic opens of models, one per model
/// of `d(V)`, each certified by explicit witnesses.
#[derive(Clone, Debug)]
pub struct OpenImage {
    pub image: PointSet,
    pub certificate: Vec<BasicOpenM>,
    pub union: PointSet,
    /// Models of a certificate set for which no witness could be built for
    /// lack of spare elements of `S`.
    pub gated: BTreeSet<usize>,
    /// Models of a certificate set whose witness arrow fell outside `V`.
    pub failures: BTreeSet<usize>,
}

impl OpenImage {
    pub fn exact(&self) -> bool {
        self.union == self.image && self.failures.is_empty()
    }

    pub fn is_gated(&self) -> bool {
        !self.gated.is_empty()
    }
}

/// The image of a basic open of arrows under the domain map.
///
/// For each model `M` of the image, take the first arrow `f: M -> N` in `V`
/// and pull the codomain condition back along it: `d_j` becomes an element
/// `k_j` of `[f^-1 d_j]`, reusing `b_i` when `d_j = c_i`. The resulting set
/// `<[x,z,w | φ(x) ∧ ψ(z) ∧ (w_i = w_l when c_i = c_l)], a, k, b>` contains
/// `M`; every model in it gets a witness arrow in `V` from the star
/// construction.
pub fn open_image_d(mg: &ModelGroupoid, v: &BasicOpenI) -> Result<OpenImage> {
    let (mc, g) = (&mg.mc, &mg.g);
    let arrows = basic_open_arrows(mc, v)?;
    let image = g.d_image(&arrows);
    let (a, dd) = (&v.dom.params, &v.cod.params);
    let bs: Vec<usize> = v.pres.iter().map(|p| p.0).collect();
    let cs: Vec<usize> = v.pres.iter().map(|p| p.1).collect();
    let (la, ld, lb) = (a.len(), dd.len(), bs.len());
    let xs: Vec<usize> = (0..la).collect();
    let zs: Vec<usize> = (la..la + ld).collect();
    let ws: Vec<usize> = (la + ld..la + ld + lb).collect();
    let mut body = Formula::and(v.dom.formula.instantiate(&xs), v.cod.formula.instantiate(&zs));
    for i in 0..lb {
        if let Some(l) = (0..i).find(|&l| cs[l] == cs[i]) {
            body = Formula::and(body, Formula::var_eq(ws[l], ws[i]));
        }
    }
    let theta = FormulaInContext::canonical(la + ld + lb, body);
    // Distinct target elements with the position supplying their source.
    let mut targets: Vec<usize> = Vec::new();
    let mut slots: Vec<(bool, usize)> = Vec::new();
    for (j, &e) in dd.iter().enumerate() {
        if !targets.contains(&e) {
            targets.push(e);
            slots.push((true, j));
        }
    }
    for (i, &e) in cs.iter().enumerate() {
        if !targets.contains(&e) {
            targets.push(e);
            slots.push((false, i));
        }
    }
    let mut certificate: Vec<BasicOpenM> = Vec::new();
    let mut union = PointSet::with_capacity(mc.len());
    let mut gated = BTreeSet::new();
    let mut failures = BTreeSet::new();
    let mut checked: BTreeSet<usize> = BTreeSet::new();
    for m in image.ones() {
        let f = arrows.ones().find(|&f| g.d[f] == m).expect("m is in the image");
        let iso = &mc.isos[f];
        let (mm, nn) = (&mc.models[m], &mc.models[iso.cod]);
        let mut inv = vec![0; iso.perm.len()];
        for (x, &y) in iso.perm.iter().enumerate() {
            inv[y] = x;
        }
        let mut k = Vec::with_capacity(ld);
        for (j, &e) in dd.iter().enumerate() {
            let kj = if let Some(i) = cs.iter().position(|&c| c == e) {
                bs[i]
            } else if let Some(l) = (0..j).find(|&l| dd[l] == e) {
                k[l]
            } else {
                let blk = inv[nn.block_of(e).expect("codomain condition holds")];
                mm.blocks()[blk][0]
            };
            k.push(kj);
        }
        let params: Vec<usize> = a.iter().chain(&k).chain(&bs).copied().collect();
        let cert = BasicOpenM { formula: theta.clone(), params };
        if certificate.contains(&cert) {
            continue;
        }
        let set = basic_open_points(mc, &cert)?;
        if !set.contains(m) {
            return Err(Error::Invariant(format!("certificate misses its own model {m}")));
        }
        for kk in set.ones() {
            if !checked.insert(kk) {
                continue;
            }
            let sources: Vec<usize> =
                slots.iter().map(|&(is_d, i)| if is_d { k[i] } else { bs[i] }).collect();
            match star_extension(&mc.models[kk], &mc.sig, &sources, &targets) {
                Ok((target, perm)) => {
                    let cod = mc
                        .index_of(&target)
                        .ok_or_else(|| Error::Invariant("star construction left the class".into()))?;
                    let w = mc
                        .iso_index(kk, cod, &perm)
                        .ok_or_else(|| Error::Invariant("star construction is not an iso".into()))?;
                    if !arrows.contains(w) {
                        failures.insert(kk);
                    }
                }
                Err(Error::Headroom(_)) => {
                    gated.insert(kk);
                }
                Err(e) => return Err(e),
            }
        }
        union.union_with(&set);
        certificate.push(cert);
    }
    Ok(OpenImage { image, certificate, union, gated, failures })
}

/// The morphism `M_{T'} -> M_T` induced by an interpretation of `T` in
/// `T'`: reducts on objects, the same block bijections on arrows.
pub fn mod_on_interpretation(
    f: &Interpretation,
    target: &ModelGroupoid,
    source: &ModelGroupoid,
) -> Result<GroupoidMorphism> {
    let mut f0 = Vec::with_capacity(target.mc.len());
    for m in &target.mc.models {
        let r = reduct(m, f)?;
        f0.push(
            source
                .mc
                .index_of(&r)
                .ok_or_else(|| Error::Invariant(format!("reduct of {} is not a model", m.label())))?,
        );
    }
    let mut f1 = Vec::with_capacity(target.mc.isos.len());
    for iso in &target.mc.isos {
        f1.push(
            source
                .mc
                .iso_index(f0[iso.dom], f0[iso.cod], &iso.perm)
                .ok_or_else(|| Error::Invariant("reduct of an iso is not an iso".into()))?,
        );
    }
    let mor = GroupoidMorphism { f0, f1 };
    mor.verify(&target.g, &source.g)?;
    Ok(mor)
}

/// `f0^-1 <[x|φ], a> = <[x|F(φ)], a>` for one basic open.
pub fn translation_preimage_holds(
    f: &Interpretation,
    mor: &GroupoidMorphism,
    target: &ModelGroupoid,
    source: &ModelGroupoid,
    b: &BasicOpenM,
) -> Result<bool> {
    let pts = basic_open_points(&source.mc, b)?;
    let pre = set_of(target.mc.len(), (0..target.mc.len()).filter(|&m| pts.contains(mor.f0[m])));
    let translated = BasicOpenM::new(f.translate_in_context(&b.formula), b.params.clone())?;
    Ok(pre == basic_open_points(&target.mc, &translated)?)
}
