use itertools::Itertools;
use serde::Serialize;

use super::{mod_functor, GroupoidOverS, Verdict};
use crate::error::{Error, Result};
use crate::groupoid::GroupoidMorphism;
use crate::logic::Theory;
use crate::models::DEFAULT_LIMIT;
use crate::sheaves::open_subgroupoids;
use crate::topology::{full_set, preimage, preservation_set, set_of, PointSet};

/// An `𝕊`-arrow `h` into `f0(y)` with no lift ending at `y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FullnessWitness {
    pub y: usize,
    pub h: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongFullness {
    pub holds: bool,
    pub pairs_checked: usize,
    pub witness: Option<FullnessWitness>,
}

/// For every object `y` and `𝕊`-arrow `h` with `c(h) = f0(y)`, looks for `g`
/// with `c(g) = y` and `f1(g) = h`.
pub fn check_strong_fullness(g: &GroupoidOverS) -> StrongFullness {
    let mut pairs_checked = 0;
    for y in 0..g.g.num_objects() {
        for &h in g.s.g.arrows_into(g.f.f0[y]) {
            pairs_checked += 1;
            if !g.g.arrows_into(y).iter().any(|&a| g.f.f1[a] == h) {
                return StrongFullness { holds: false, pairs_checked, witness: Some(FullnessWitness { y, h }) };
            }
        }
    }
    StrongFullness { holds: true, pairs_checked, witness: None }
}

/// `f0^-1 <a>`: objects whose underlying set contains every `a[i]`.
pub fn objects_defined_at(g: &GroupoidOverS, a: &[usize]) -> PointSet {
    set_of(
        g.g.num_objects(),
        (0..g.g.num_objects()).filter(|&x| g.s.mc.models[g.f.f0[x]].classes(a).is_some()),
    )
}

/// `f1^-1 <a ↦ a>`.
pub fn arrows_fixing(g: &GroupoidOverS, a: &[usize]) -> PointSet {
    let mut s = full_set(g.s.g.num_arrows());
    for &e in a {
        s.intersect_with(&preservation_set(&g.s.mc, e, e));
    }
    preimage(&g.f.f1, &s, g.g.num_arrows())
}

/// Neighbourhood `W` and tuple `a` witnessing condition ii at `(N, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemCertificate {
    pub n: Vec<usize>,
    pub x: usize,
    pub w: Vec<usize>,
    pub a: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemFailure {
    pub n: Vec<usize>,
    pub x: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemReport {
    pub strong_fullness: StrongFullness,
    /// `d` and `c` are open maps; at finite `S` this can fail for lack of
    /// fresh elements and is reported, not required.
    pub open_groupoid: bool,
    pub subgroupoids: usize,
    /// `None` when strong fullness already fails.
    pub condition_ii: Option<bool>,
    pub certificates: Vec<SemCertificate>,
    pub failures: Vec<SemFailure>,
    pub verdict: Verdict,
}

/// Condition ii at one `(N, x)`. `W` is the least open around `x`: any
/// admissible `W` contains it, and shrinking `W` only shrinks the arrow set
/// that must lie in `N`. `a` is the shortest distinct tuple, then the least
/// in lexicographic order.
fn condition_ii_at(g: &GroupoidOverS, n: &PointSet, dn: &PointSet, x: usize) -> std::result::Result<SemCertificate, String> {
    let w = g.g.objects.nbhd(x);
    if !w.is_subset(dn) {
        return Err("least neighbourhood of x leaves d(N)".into());
    }
    let inside = g.g.d_preimage(w);
    let mut inside_c = g.g.c_preimage(w);
    inside_c.intersect_with(&inside);
    let dom = g.s.mc.models[g.f.f0[x]].domain().to_vec();
    for len in 0..=dom.len() {
        for a in dom.iter().copied().permutations(len) {
            let mut arrows = arrows_fixing(g, &a);
            arrows.intersect_with(&inside_c);
            if arrows.is_subset(n) {
                return Ok(SemCertificate { n: n.ones().collect(), x, w: w.ones().collect(), a });
            }
        }
    }
    Err("no tuple of elements of f0(x) works".into())
}

pub fn check_sem_conditions(g: &GroupoidOverS, limit: usize) -> Result<SemReport> {
    let strong_fullness = check_strong_fullness(g);
    let open_groupoid = g.g.is_open();
    if !strong_fullness.holds {
        return Ok(SemReport {
            strong_fullness,
            open_groupoid,
            subgroupoids: 0,
            condition_ii: None,
            certificates: Vec::new(),
            failures: Vec::new(),
            verdict: Verdict::Fail,
        });
    }
    let subs = open_subgroupoids(&g.g, limit)?;
    let mut certificates = Vec::new();
    let mut failures = Vec::new();
    for n in &subs {
        let dn = g.g.d_image(n);
        for x in dn.ones() {
            match condition_ii_at(g, n, &dn, x) {
                Ok(c) => certificates.push(c),
                Err(reason) => failures.push(SemFailure { n: n.ones().collect(), x, reason }),
            }
        }
    }
    let condition_ii = failures.is_empty();
    let verdict = match (condition_ii, open_groupoid) {
        (false, _) => Verdict::Fail,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Inconclusive,
    };
    Ok(SemReport {
        strong_fullness,
        open_groupoid,
        subgroupoids: subs.len(),
        condition_ii: Some(condition_ii),
        certificates,
        failures,
        verdict,
    })
}

/// The frame of `f1^-1<a ↦ a>`-stable opens inside `f0^-1<a>`.
#[derive(Clone, Debug, Serialize)]
pub struct FrameReport {
    pub k: usize,
    pub a: Vec<usize>,
    pub size: usize,
    pub closed_under_meets: bool,
    pub closed_under_joins: bool,
    /// Every element of a finite frame is compact.
    pub compact_elements: usize,
    pub degenerate: bool,
}

/// Pullback of each frame element along the arrows from `<b>` fixing `b`
/// into `<a>`, with `b` the first `k` entries of `a`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub from: usize,
    pub to: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `(element of the lower frame, its pullback)`.
    pub pullbacks: Vec<(Vec<usize>, Vec<usize>)>,
    pub lands_in_frame: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherentReport {
    pub frames: Vec<FrameReport>,
    pub projections: Vec<ProjectionReport>,
    pub verdict: Verdict,
}

/// Stable opens of `f0^-1<a>` under `f1^-1<a ↦ a>`.
pub fn stable_frame(g: &GroupoidOverS, a: &[usize], limit: usize) -> Result<Vec<PointSet>> {
    let u = objects_defined_at(g, a);
    let arrows = arrows_fixing(g, a);
    Ok(g.g
        .objects
        .opens(limit)?
        .into_iter()
        .filter(|v| v.is_subset(&u) && arrows.ones().all(|h| !v.contains(g.g.d[h]) || v.contains(g.g.c[h])))
        .collect())
}

/// `{x ∈ f0^-1<a> : ∃h. f1(h) ∈ T, c(h) = x, d(h) ∈ s}` with
/// `T = (<b> / b ↦ b / <a>)`.
pub fn projection_pullback(g: &GroupoidOverS, a: &[usize], b: &[usize], s: &PointSet) -> PointSet {
    let over_a = objects_defined_at(g, a);
    let over_b = objects_defined_at(g, b);
    let fixing = arrows_fixing(g, b);
    set_of(
        g.g.num_objects(),
        over_a.ones().filter(|&x| {
            g.g.arrows_into(x)
                .iter()
                .any(|&h| fixing.contains(h) && over_b.contains(g.g.d[h]) && s.contains(g.g.d[h]))
        }),
    )
}

pub fn coherent_check(g: &GroupoidOverS, kmax: usize, limit: usize) -> Result<CoherentReport> {
    let top = kmax.min(g.n());
    let mut frames = Vec::new();
    let mut lattices = Vec::new();
    for k in 0..=top {
        let a: Vec<usize> = (0..k).collect();
        let frame = stable_frame(g, &a, limit)?;
        let has = |s: &PointSet| frame.contains(s);
        let mut meets = true;
        let mut joins = true;
        for (i, p) in frame.iter().enumerate() {
            for q in &frame[i..] {
                let mut m = p.clone();
                m.intersect_with(q);
                meets &= has(&m);
                let mut j = p.clone();
                j.union_with(q);
                joins &= has(&j);
            }
        }
        frames.push(FrameReport {
            k,
            a: a.clone(),
            size: frame.len(),
            closed_under_meets: meets,
            closed_under_joins: joins,
            compact_elements: frame.len(),
            degenerate: true,
        });
        lattices.push(frame);
    }
    let mut projections = Vec::new();
    for k in 0..top {
        let a: Vec<usize> = (0..=k).collect();
        let b: Vec<usize> = (0..k).collect();
        let mut pullbacks = Vec::new();
        let mut lands = true;
        for s in &lattices[k] {
            let x = projection_pullback(g, &a, &b, s);
            lands &= lattices[k + 1].contains(&x);
            pullbacks.push((s.ones().collect(), x.ones().collect()));
        }
        projections.push(ProjectionReport { from: k, to: k + 1, a, b, pullbacks, lands_in_frame: lands });
    }
    let ok = frames.iter().all(|f| f.closed_under_meets && f.closed_under_joins)
        && projections.iter().all(|p| p.lands_in_frame);
    Ok(CoherentReport { frames, projections, verdict: if ok { Verdict::Pass } else { Verdict::Fail } })
}

/// Two isomorphic one-element sets of `Mod(T_=)` with identity arrows only.
pub fn discrete_counterexample(n: usize) -> Result<GroupoidOverS> {
    if n < 2 {
        return Err(Error::Precondition("needs |S| >= 2".into()));
    }
    let (full, _) = mod_functor(&Theory::equality(), n, DEFAULT_LIMIT)?;
    let mc = &full.s.mc;
    let single = |e: usize| {
        (0..mc.len())
            .find(|&m| mc.models[m].domain() == [e] && mc.models[m].num_blocks() == 1)
            .expect("singleton set")
    };
    let objs = set_of(full.g.num_objects(), [single(0), single(1)]);
    let arrows = set_of(full.g.num_arrows(), objs.ones().map(|x| full.g.e[x]));
    let (g, omap, amap) = full.g.restrict(&objs, &arrows)?;
    let f = GroupoidMorphism {
        f0: omap.iter().map(|&x| full.f.f0[x]).collect(),
        f1: amap.iter().map(|&h| full.f.f1[h]).collect(),
    };
    GroupoidOverS::new(g, f, full.s.clone())
}
