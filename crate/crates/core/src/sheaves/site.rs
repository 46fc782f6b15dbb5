use super::{check_morphism, definable_sheaf, unions_that_are_open, DefinableSheaf, EquivariantSheaf, MorphismChecks};
use crate::error::{Error, Result};
use crate::groupoid::{ModelGroupoid, TopGroupoid};
use crate::logic::{Formula, FormulaInContext};
use crate::models::ModelClass;
use crate::topology::{basic_open_arrows, basic_open_points, set_of, BasicOpenI, BasicOpenM, PointSet};

/// `<G,U,N>`: the sheaf `d^-1(U)/~_N` over the objects, projected by the
/// codomain and acted on by composition. Classes are numbered by their
/// least member.
#[derive(Clone, Debug)]
pub struct MoerdijkSite {
    pub n: PointSet,
    pub u: PointSet,
    pub classes: Vec<Vec<usize>>,
    class_of: Vec<Option<usize>>,
    pub sheaf: EquivariantSheaf,
}

/// Open, closed under inverses and closed under composition.
pub fn is_open_subgroupoid(g: &TopGroupoid, n: &PointSet) -> bool {
    subgroupoid_violation(g, n).is_none()
}

fn subgroupoid_violation(g: &TopGroupoid, n: &PointSet) -> Option<String> {
    if !g.arrows.is_open(n) {
        return Some("N is not open".into());
    }
    if let Some(f) = n.ones().find(|&f| !n.contains(g.inv[f])) {
        return Some(format!("N is not closed under inverses at arrow {f}"));
    }
    for h in n.ones() {
        for &f in g.arrows_into(g.d[h]) {
            if n.contains(f) && !n.contains(g.comp[&(h, f)]) {
                return Some(format!("N is not closed under composition at ({h}, {f})"));
            }
        }
    }
    None
}

pub fn moerdijk_sheaf(g: &TopGroupoid, n: &PointSet) -> Result<MoerdijkSite> {
    let mut n = n.clone();
    n.grow(g.num_arrows());
    if let Some(msg) = subgroupoid_violation(g, &n) {
        return Err(Error::Precondition(msg));
    }
    let u = g.d_image(&n);
    if g.c_image(&n) != u {
        return Err(Error::Invariant("d(N) and c(N) differ".into()));
    }
    let domain = g.d_preimage(&u);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![None; g.num_arrows()];
    for f in domain.ones() {
        let found = classes.iter().position(|cls| {
            let r = cls[0];
            g.c[r] == g.c[f] && n.contains(g.comp[&(g.inv[r], f)])
        });
        let k = found.unwrap_or_else(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[k].push(f);
        class_of[f] = Some(k);
    }
    let (sub, amap) = g.arrows.subspace(&domain);
    let q: Vec<usize> = amap.iter().map(|&f| class_of[f].expect("in domain")).collect();
    let space = sub.quotient(&q, classes.len());
    let proj = classes.iter().map(|cls| g.c[cls[0]]).collect();
    let sheaf = EquivariantSheaf::new(g, space, proj, |h, k| {
        class_of[g.comp[&(h, classes[k][0])]].expect("composite stays in the domain")
    })?;
    Ok(MoerdijkSite { n, u, classes, class_of, sheaf })
}

impl MoerdijkSite {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, f: usize) -> Option<usize> {
        self.class_of[f]
    }

    /// `e: U -> d^-1(U)/~_N`, `x ↦ [1_x]`.
    pub fn unit_section(&self, g: &TopGroupoid) -> Vec<Option<usize>> {
        (0..g.num_objects()).map(|x| if self.u.contains(x) { self.class_of[g.e[x]] } else { None }).collect()
    }
}

/// Every open subgroupoid `N`, as arrow sets in the order of the open-set
/// lattice.
pub fn open_subgroupoids(g: &TopGroupoid, limit: usize) -> Result<Vec<PointSet>> {
    Ok(g.arrows.opens(limit)?.into_iter().filter(|n| is_open_subgroupoid(g, n)).collect())
}

/// An open `V ⊆ U` closed under `N`, with the matching sub-sheaf
/// `d^-1(V)/~`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableOpen {
    pub v: PointSet,
    pub subsheaf: PointSet,
}

pub fn stable_opens(g: &TopGroupoid, site: &MoerdijkSite, limit: usize) -> Result<Vec<StableOpen>> {
    // N-orbits inside U: N is a subgroupoid, so these partition U.
    let mut seen = g.objects.empty_set();
    let mut orbits = Vec::new();
    for x in site.u.ones() {
        if seen.contains(x) {
            continue;
        }
        let o = set_of(g.num_objects(), g.arrows_out_of(x).iter().filter(|&&f| site.n.contains(f)).map(|&f| g.c[f]));
        seen.union_with(&o);
        orbits.push(o);
    }
    let vs = unions_that_are_open(&orbits, &g.objects, limit, "N-stable opens")?;
    Ok(vs
        .into_iter()
        .map(|v| {
            let subsheaf =
                set_of(site.len(), (0..site.len()).filter(|&k| v.contains(g.d[site.classes[k][0]])));
            StableOpen { v, subsheaf }
        })
        .collect())
}

/// The subsheaves computed from stable opens are exactly the stable open
/// subsets of the site sheaf, with no two stable opens giving the same one.
pub fn subobject_correspondence(g: &TopGroupoid, site: &MoerdijkSite, limit: usize) -> Result<bool> {
    let ours = stable_opens(g, site, limit)?;
    let mut from_v: Vec<PointSet> = ours.iter().map(|s| s.subsheaf.clone()).collect();
    from_v.sort_by_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
    let direct = site.sheaf.stable_opens(g, limit)?;
    let distinct = {
        let mut d = from_v.clone();
        d.dedup();
        d.len() == from_v.len()
    };
    Ok(distinct && from_v == direct)
}

/// A section `s: U -> R` lifted to `ŝ: <G,U,N_s> -> R`.
#[derive(Clone, Debug)]
pub struct LiftedSection {
    pub n_s: PointSet,
    pub site: MoerdijkSite,
    /// `ŝ` on classes.
    pub map: Vec<usize>,
    pub well_defined: bool,
    /// `s = ŝ ∘ e`.
    pub factors: bool,
    pub checks: MorphismChecks,
    pub injective: bool,
    pub image: PointSet,
    pub inverse_continuous: bool,
}

impl LiftedSection {
    pub fn surjective(&self) -> bool {
        self.image.count_ones(..) == self.image.len()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.well_defined
            && self.factors
            && self.checks.all()
            && self.injective
            && self.surjective()
            && self.inverse_continuous
    }
}

pub fn lift_section(
    g: &TopGroupoid,
    sheaf: &EquivariantSheaf,
    u: &PointSet,
    s: &[Option<usize>],
) -> Result<LiftedSection> {
    if s.len() != g.num_objects() || !g.objects.is_open(u) {
        return Err(Error::Precondition("section must be given on an open set of objects".into()));
    }
    for x in 0..g.num_objects() {
        match s[x] {
            Some(p) if !u.contains(x) || sheaf.proj[p] != x => {
                return Err(Error::Precondition(format!("not a section at object {x}")))
            }
            None if u.contains(x) => return Err(Error::Precondition(format!("section undefined at {x}"))),
            _ => {}
        }
    }
    for x in u.ones() {
        let target = sheaf.space.nbhd(s[x].expect("defined"));
        if g.objects.nbhd(x).ones().any(|y| u.contains(y) && !target.contains(s[y].expect("defined on U"))) {
            return Err(Error::Precondition(format!("section is not continuous at {x}")));
        }
    }
    let n_s = set_of(
        g.num_arrows(),
        (0..g.num_arrows()).filter(|&f| {
            u.contains(g.d[f]) && u.contains(g.c[f]) && sheaf.act(f, s[g.d[f]].expect("on U")) == s[g.c[f]]
        }),
    );
    let site = moerdijk_sheaf(g, &n_s)?;
    let lift = |f: usize| sheaf.act(f, s[g.d[f]].expect("on U")).expect("over the domain");
    let map: Vec<usize> = site.classes.iter().map(|cls| lift(cls[0])).collect();
    let well_defined = site.classes.iter().enumerate().all(|(k, cls)| cls.iter().all(|&f| lift(f) == map[k]));
    let factors = u.ones().all(|x| site.class(g.e[x]).map(|k| map[k]) == s[x]);
    let checks = check_morphism(g, &site.sheaf, sheaf, &map);
    let image = set_of(sheaf.len(), map.iter().copied());
    let injective = image.count_ones(..) == map.len();
    let inverse_continuous = injective && {
        let mut inv = vec![usize::MAX; sheaf.len()];
        for (k, &p) in map.iter().enumerate() {
            inv[p] = k;
        }
        image.ones().all(|p| {
            sheaf.space.nbhd(p).ones().all(|q| !image.contains(q) || site.sheaf.space.nbhd(inv[p]).contains(inv[q]))
        })
    };
    Ok(LiftedSection { n_s, site, map, well_defined, factors, checks, injective, image, inverse_continuous })
}

fn contains_identity(mc: &ModelClass, v: &BasicOpenI, m: usize) -> Result<bool> {
    Ok(basic_open_arrows(mc, v)?.contains(mc.identity(m)))
}

fn is_symmetric(v: &BasicOpenI) -> bool {
    let distinct = v.dom.elements().len() == v.dom.params.len();
    let pres: Vec<(usize, usize)> = v.dom.params.iter().map(|&a| (a, a)).collect();
    distinct && v.dom == v.cod && v.pres == pres
}

/// A neighbourhood of `1_M` of the form `(<[x|φ],a> / a ↦ a / <[x|φ],a>)`
/// inside `v`, with `a` distinct. Domain and codomain conditions are merged,
/// every mentioned element is preserved, and each `b ↦ c` with `b ≠ c`
/// becomes `b ↦ b`, `c ↦ c` and the equation `b = c` on both sides.
pub fn rewrite_symmetric(mc: &ModelClass, v: &BasicOpenI, m: usize) -> Result<BasicOpenI> {
    if m >= mc.len() || !contains_identity(mc, v, m)? {
        return Err(Error::Precondition("the identity of M is not in the neighbourhood".into()));
    }
    if is_symmetric(v) {
        return Ok(v.clone());
    }
    let mut parts = vec![v.dom.clone(), v.cod.clone()];
    for &(b, c) in &v.pres {
        if b == c {
            parts.push(BasicOpenM::new(FormulaInContext::top(1), vec![b])?);
        } else {
            parts.push(BasicOpenM::new(FormulaInContext::canonical(2, Formula::var_eq(0, 1)), vec![b, c])?);
        }
    }
    let cond = BasicOpenM::conjoin(&parts).distinct();
    let pres = cond.params.iter().map(|&a| (a, a)).collect();
    let w = BasicOpenI { dom: cond.clone(), pres, cod: cond };
    let (inner, outer) = (basic_open_arrows(mc, &w)?, basic_open_arrows(mc, v)?);
    if !inner.contains(mc.identity(m)) || !inner.is_subset(&outer) {
        return Err(Error::Invariant("rewritten neighbourhood escapes the original".into()));
    }
    Ok(w)
}

/// The subbasic conditions satisfied by `1_M`, as removable pieces.
#[derive(Clone, Debug)]
enum Piece {
    Dom(BasicOpenM),
    Pres(usize, usize),
    Cod(BasicOpenM),
}

fn atoms_of_model(mc: &ModelClass, m: usize) -> Vec<BasicOpenM> {
    let model = &mc.models[m];
    let mut out = Vec::new();
    let atom = |k: usize, body: Formula, params: Vec<usize>| BasicOpenM {
        formula: FormulaInContext::canonical(k, body),
        params,
    };
    for &a in model.domain() {
        out.push(atom(1, Formula::Top, vec![a]));
    }
    for &a in model.domain() {
        for &b in model.domain().iter().filter(|&&b| b > a) {
            if model.block_of(a) == model.block_of(b) {
                out.push(atom(2, Formula::var_eq(0, 1), vec![a, b]));
            }
        }
    }
    let reps: Vec<usize> = model.blocks().iter().map(|b| b[0]).collect();
    for (r, sym) in mc.sig.rels.iter().enumerate() {
        for t in crate::models::all_tuples(model.num_blocks(), sym.arity) {
            if model.has(r, &t) {
                let args = (0..sym.arity).map(crate::logic::Term::Var).collect();
                out.push(atom(sym.arity, Formula::Rel(r, args), t.iter().map(|&b| reps[b]).collect()));
            }
        }
    }
    for (f, sym) in mc.sig.funs.iter().enumerate() {
        for t in crate::models::all_tuples(model.num_blocks(), sym.arity) {
            let app = crate::logic::Term::App(f, (0..sym.arity).map(crate::logic::Term::Var).collect());
            let body = Formula::Eq(app, crate::logic::Term::Var(sym.arity));
            let mut params: Vec<usize> = t.iter().map(|&b| reps[b]).collect();
            params.push(reps[model.apply(f, &t)]);
            out.push(atom(sym.arity + 1, body, params));
        }
    }
    out
}

fn assemble(pieces: &[Piece]) -> BasicOpenI {
    let dom: Vec<BasicOpenM> =
        pieces.iter().filter_map(|p| if let Piece::Dom(b) = p { Some(b.clone()) } else { None }).collect();
    let cod: Vec<BasicOpenM> =
        pieces.iter().filter_map(|p| if let Piece::Cod(b) = p { Some(b.clone()) } else { None }).collect();
    let pres = pieces.iter().filter_map(|p| if let Piece::Pres(a, b) = p { Some((*a, *b)) } else { None }).collect();
    BasicOpenI { dom: BasicOpenM::conjoin(&dom), pres, cod: BasicOpenM::conjoin(&cod) }
}

/// A covering of one element of a site object by a definable sheaf.
#[derive(Clone, Debug)]
pub struct DensityCertificate {
    pub element: usize,
    pub model: usize,
    /// A basic neighbourhood of `1_M` inside `N`, shrunk greedily.
    pub neighbourhood: BasicOpenI,
    pub symmetric: BasicOpenI,
    pub sheaf: DefinableSheaf,
    /// The morphism from the definable sheaf to the site sheaf.
    pub map: Vec<usize>,
    /// A point of the definable sheaf sent to the element.
    pub point: usize,
    pub checks: MorphismChecks,
}

#[derive(Clone, Debug)]
pub enum DensityOutcome {
    Certified(Box<DensityCertificate>),
    Gated { element: usize, model: usize, reason: String },
}

pub fn density_certificate(mg: &ModelGroupoid, site: &MoerdijkSite, element: usize) -> Result<DensityOutcome> {
    let (mc, g) = (&mg.mc, &mg.g);
    let f = *site
        .classes
        .get(element)
        .and_then(|c| c.first())
        .ok_or_else(|| Error::Precondition(format!("no element {element} in the site object")))?;
    let m = g.d[f];
    let inside = |pieces: &[Piece]| -> Result<bool> {
        Ok(basic_open_arrows(mc, &assemble(pieces))?.is_subset(&site.n))
    };
    let mut pieces: Vec<Piece> = Vec::new();
    for a in 0..mc.n {
        for b in 0..mc.n {
            if crate::topology::preservation_set(mc, a, b).contains(mc.identity(m)) {
                pieces.push(Piece::Pres(a, b));
            }
        }
    }
    pieces.extend(atoms_of_model(mc, m).into_iter().map(Piece::Dom));
    pieces.extend(atoms_of_model(mc, m).into_iter().map(Piece::Cod));
    if !inside(&pieces)? {
        return Err(Error::Invariant("N is not a neighbourhood of the identity".into()));
    }
    // Drop pieces from the back so that codomain and domain atoms go
    // first and preserved pairs on large elements before small ones.
    for i in (0..pieces.len()).rev() {
        let mut trial = pieces.clone();
        trial.remove(i);
        if inside(&trial)? {
            pieces = trial;
        }
    }
    let neighbourhood = assemble(&pieces);
    let symmetric = rewrite_symmetric(mc, &neighbourhood, m)?;
    let v = &symmetric.dom;
    let sheaf = definable_sheaf(mg, &v.formula)?;
    let u = basic_open_points(mc, v)?;
    let lifted = lift_section(g, &sheaf.sheaf, &u, &sheaf.section(mg, &v.params)?)?;
    let w = basic_open_arrows(mc, &symmetric)?;
    if lifted.n_s != w {
        return Err(Error::Invariant("N_s differs from the symmetric neighbourhood".into()));
    }
    if !(lifted.well_defined && lifted.injective && lifted.checks.all()) {
        return Err(Error::Invariant("lifted section is not an embedding".into()));
    }
    if !lifted.surjective() {
        let missing = lifted.image.len() - lifted.image.count_ones(..);
        return Ok(DensityOutcome::Gated {
            element,
            model: m,
            reason: format!(
                "lift of the section misses {missing} of {} points of the definable sheaf",
                lifted.image.len()
            ),
        });
    }
    let mut inv = vec![usize::MAX; sheaf.len()];
    for (k, &p) in lifted.map.iter().enumerate() {
        inv[p] = k;
    }
    // ê sends [g]_W to [g]_N; W ⊆ N makes this independent of the member.
    let map: Vec<usize> = (0..sheaf.len())
        .map(|p| {
            let rep = lifted.site.classes[inv[p]][0];
            site.class(rep).expect("W-classes lie over V ⊆ U")
        })
        .collect();
    let point = lifted.map[lifted.site.class(f).expect("d(f) lies in V")];
    if map[point] != element {
        return Err(Error::Invariant("density certificate misses its element".into()));
    }
    let checks = check_morphism(g, &sheaf.sheaf, &site.sheaf, &map);
    Ok(DensityOutcome::Certified(Box::new(DensityCertificate {
        element,
        model: m,
        neighbourhood,
        symmetric,
        sheaf,
        map,
        point,
        checks,
    })))
}
