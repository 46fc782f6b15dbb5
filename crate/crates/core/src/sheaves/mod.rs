//! Equivariant sheaves over finite groupoids: the general structure, the
//! definable sheaves `<<x|φ>>` with the application action, and the
//! Moerdijk site objects `<G,U,N>`.

mod definable;
mod site;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{GroupoidMorphism, TopGroupoid};
use crate::topology::{image, set_of, FinSpace, PointSet};

pub use definable::{definable_sheaf, stabilization_report, DefinableSheaf, StabilizationReport};
pub use site::{
    density_certificate, is_open_subgroupoid, lift_section, moerdijk_sheaf, open_subgroupoids, rewrite_symmetric,
    stable_opens, subobject_correspondence, DensityCertificate, DensityOutcome, LiftedSection, MoerdijkSite,
    StableOpen,
};

/// A sheaf over the object space of a groupoid with an action of the
/// arrows. `action[f][i]` is the image of the `i`-th point over `d(f)`.
#[derive(Clone, Debug)]
pub struct EquivariantSheaf {
    pub space: FinSpace,
    pub proj: Vec<usize>,
    fibres: Vec<Vec<usize>>,
    pos: Vec<usize>,
    dom: Vec<usize>,
    action: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SheafChecks {
    pub projection_continuous: bool,
    pub local_homeomorphism: bool,
    pub action_over_codomain: bool,
    pub unit: bool,
    pub composition: bool,
    pub action_continuous: bool,
}

impl SheafChecks {
    pub fn all(&self) -> bool {
        self.projection_continuous
            && self.local_homeomorphism
            && self.action_over_codomain
            && self.unit
            && self.composition
            && self.action_continuous
    }
}

impl EquivariantSheaf {
    pub fn new(
        g: &TopGroupoid,
        space: FinSpace,
        proj: Vec<usize>,
        act: impl Fn(usize, usize) -> usize,
    ) -> Result<EquivariantSheaf> {
        if proj.len() != space.len() || proj.iter().any(|&x| x >= g.num_objects()) {
            return Err(Error::Invariant("projection does not land in the objects".into()));
        }
        let mut fibres = vec![Vec::new(); g.num_objects()];
        let mut pos = vec![0; proj.len()];
        for (p, &x) in proj.iter().enumerate() {
            pos[p] = fibres[x].len();
            fibres[x].push(p);
        }
        let mut action = Vec::with_capacity(g.num_arrows());
        for f in 0..g.num_arrows() {
            let row: Vec<usize> = fibres[g.d[f]].iter().map(|&p| act(f, p)).collect();
            if row.iter().any(|&q| q >= proj.len()) {
                return Err(Error::Invariant(format!("action of arrow {f} leaves the sheaf")));
            }
            action.push(row);
        }
        Ok(EquivariantSheaf { space, proj, fibres, pos, dom: g.d.clone(), action })
    }

    /// One point over each object, acted on by moving along arrows.
    pub fn terminal(g: &TopGroupoid) -> EquivariantSheaf {
        let proj = (0..g.num_objects()).collect();
        EquivariantSheaf::new(g, g.objects.clone(), proj, |f, _| g.c[f]).expect("terminal sheaf")
    }

    pub fn len(&self) -> usize {
        self.proj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proj.is_empty()
    }

    pub fn fibre(&self, x: usize) -> &[usize] {
        &self.fibres[x]
    }

    /// `ρ(f, p)`, or `None` when `p` is not over `d(f)`.
    pub fn act(&self, f: usize, p: usize) -> Option<usize> {
        (self.proj[p] == self.dom[f]).then(|| self.action[f][self.pos[p]])
    }

    fn act_unchecked(&self, f: usize, p: usize) -> usize {
        self.action[f][self.pos[p]]
    }

    pub fn check(&self, g: &TopGroupoid) -> SheafChecks {
        let n = self.len();
        let projection_continuous = self.space.is_continuous(&self.proj, &g.objects);
        let local_homeomorphism = (0..n).all(|p| {
            let u = self.space.nbhd(p);
            let img = image(&self.proj, u, g.num_objects());
            img.count_ones(..) == u.count_ones(..) && img == *g.objects.nbhd(self.proj[p])
        });
        let mut action_over_codomain = true;
        for f in 0..g.num_arrows() {
            for &p in &self.fibres[g.d[f]] {
                if self.proj[self.act_unchecked(f, p)] != g.c[f] {
                    action_over_codomain = false;
                }
            }
        }
        let unit = (0..n).all(|p| self.act_unchecked(g.e[self.proj[p]], p) == p);
        let mut composition = action_over_codomain;
        if composition {
            for (&(h, f), &hf) in &g.comp {
                for &p in &self.fibres[g.d[f]] {
                    if self.act_unchecked(hf, p) != self.act_unchecked(h, self.act_unchecked(f, p)) {
                        composition = false;
                    }
                }
            }
        }
        let mut action_continuous = true;
        'outer: for f in 0..g.num_arrows() {
            for &p in &self.fibres[g.d[f]] {
                let target = self.space.nbhd(self.act_unchecked(f, p));
                for f2 in g.arrows.nbhd(f).ones() {
                    for &p2 in &self.fibres[g.d[f2]] {
                        if self.space.nbhd(p).contains(p2) && !target.contains(self.act_unchecked(f2, p2)) {
                            action_continuous = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        SheafChecks { projection_continuous, local_homeomorphism, action_over_codomain, unit, composition, action_continuous }
    }

    pub fn orbit(&self, g: &TopGroupoid, p: usize) -> PointSet {
        set_of(self.len(), g.arrows_out_of(self.proj[p]).iter().map(|&f| self.act_unchecked(f, p)))
    }

    /// Least stable superset, by closing under the action.
    pub fn stabilize(&self, g: &TopGroupoid, s: &PointSet) -> PointSet {
        let mut out = s.clone();
        out.grow(self.len());
        let mut queue: VecDeque<usize> = s.ones().collect();
        while let Some(p) = queue.pop_front() {
            for &f in g.arrows_out_of(self.proj[p]) {
                let q = self.act_unchecked(f, p);
                if !out.put(q) {
                    queue.push_back(q);
                }
            }
        }
        out
    }

    pub fn is_stable(&self, g: &TopGroupoid, s: &PointSet) -> bool {
        self.stabilize(g, s) == *s
    }

    pub fn orbits(&self, g: &TopGroupoid) -> Vec<PointSet> {
        let mut seen = self.space.empty_set();
        let mut out = Vec::new();
        for p in 0..self.len() {
            if !seen.contains(p) {
                let o = self.orbit(g, p);
                seen.union_with(&o);
                out.push(o);
            }
        }
        out
    }

    /// Open stable subsets, which are the unions of orbits that are open.
    pub fn stable_opens(&self, g: &TopGroupoid, limit: usize) -> Result<Vec<PointSet>> {
        unions_that_are_open(&self.orbits(g), &self.space, limit, "stable open subsets")
    }

    /// Pullback along a groupoid morphism `mor: src -> base`. Points are
    /// pairs `(x, p)` with `r(p) = f0(x)`, ordered by `x`, then `p`.
    pub fn pullback(&self, src: &TopGroupoid, mor: &GroupoidMorphism) -> Result<(EquivariantSheaf, Vec<(usize, usize)>)> {
        let mut pairs = Vec::new();
        for x in 0..src.num_objects() {
            for &p in &self.fibres[mor.f0[x]] {
                pairs.push((x, p));
            }
        }
        let index: std::collections::HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let nbhd = pairs
            .iter()
            .map(|&(x, p)| {
                set_of(
                    pairs.len(),
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(_, &(x2, p2))| src.objects.nbhd(x).contains(x2) && self.space.nbhd(p).contains(p2))
                        .map(|(i, _)| i),
                )
            })
            .collect();
        let space = FinSpace::from_nbhds(nbhd)?;
        let proj = pairs.iter().map(|&(x, _)| x).collect();
        let sheaf = EquivariantSheaf::new(src, space, proj, |h, i| {
            let (_, p) = pairs[i];
            index[&(src.c[h], self.act_unchecked(mor.f1[h], p))]
        })?;
        Ok((sheaf, pairs))
    }
}

pub(crate) fn unions_that_are_open(
    pieces: &[PointSet],
    space: &FinSpace,
    limit: usize,
    what: &str,
) -> Result<Vec<PointSet>> {
    let m = pieces.len();
    if m >= 63 || (1u64 << m) > limit as u64 {
        return Err(Error::LimitExceeded {
            what: what.into(),
            estimate: format!("2^{m}"),
            limit: limit as u64,
        });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1 << m) {
        let mut s = space.empty_set();
        for (i, piece) in pieces.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.union_with(piece);
            }
        }
        if space.is_open(&s) {
            out.push(s);
        }
    }
    out.sort_by_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MorphismChecks {
    pub over_base: bool,
    pub equivariant: bool,
    pub continuous: bool,
}

impl MorphismChecks {
    pub fn all(&self) -> bool {
        self.over_base && self.equivariant && self.continuous
    }
}

/// Checks that `map` is a morphism of equivariant sheaves `a -> b`.
pub fn check_morphism(g: &TopGroupoid, a: &EquivariantSheaf, b: &EquivariantSheaf, map: &[usize]) -> MorphismChecks {
    if map.len() != a.len() || map.iter().any(|&q| q >= b.len()) {
        return MorphismChecks::default();
    }
    let over_base = (0..a.len()).all(|p| b.proj[map[p]] == a.proj[p]);
    let equivariant = over_base
        && (0..g.num_arrows())
            .all(|f| a.fibre(g.d[f]).iter().all(|&p| map[a.act_unchecked(f, p)] == b.act_unchecked(f, map[p])));
    let continuous = a.space.is_continuous(map, &b.space);
    MorphismChecks { over_base, equivariant, continuous }
}

/// A bijective morphism whose inverse is continuous.
pub fn is_sheaf_isomorphism(g: &TopGroupoid, a: &EquivariantSheaf, b: &EquivariantSheaf, map: &[usize]) -> bool {
    if !check_morphism(g, a, b, map).all() || a.len() != b.len() {
        return false;
    }
    let mut inv = vec![usize::MAX; b.len()];
    for (p, &q) in map.iter().enumerate() {
        if inv[q] != usize::MAX {
            return false;
        }
        inv[q] = p;
    }
    b.space.is_continuous(&inv, &a.space)
}
