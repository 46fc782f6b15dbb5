//! Finite topological groupoids, the groupoid of models and isomorphisms,
//! and morphisms between groupoids.

mod model;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::topology::{FinSpace, PointSet};

pub use model::{
    build_model_groupoid, build_s_groupoid, mod_on_interpretation, open_image_d, structure_map_preimages,
    translation_preimage_holds,
    ModelGroupoid, OpenImage, PreimageReport,
};

/// Objects, arrows and the structure maps as explicit tables. `comp` holds
/// `g ∘ f` keyed by `(g, f)` for every pair with `d(g) = c(f)`.
#[derive(Clone, Debug)]
pub struct TopGroupoid {
    pub objects: FinSpace,
    pub arrows: FinSpace,
    pub d: Vec<usize>,
    pub c: Vec<usize>,
    pub e: Vec<usize>,
    pub inv: Vec<usize>,
    pub comp: HashMap<(usize, usize), usize>,
    into: Vec<Vec<usize>>,
    out_of: Vec<Vec<usize>>,
}

fn invariant(msg: String) -> Error {
    Error::Invariant(msg)
}

impl TopGroupoid {
    pub fn new(
        objects: FinSpace,
        arrows: FinSpace,
        d: Vec<usize>,
        c: Vec<usize>,
        e: Vec<usize>,
        inv: Vec<usize>,
        comp: HashMap<(usize, usize), usize>,
    ) -> Result<TopGroupoid> {
        let (no, na) = (objects.len(), arrows.len());
        if d.len() != na || c.len() != na || inv.len() != na || e.len() != no {
            return Err(invariant("structure map sizes".into()));
        }
        if d.iter().chain(&c).any(|&x| x >= no) || e.iter().chain(&inv).any(|&x| x >= na) {
            return Err(invariant("structure map out of range".into()));
        }
        let mut into = vec![Vec::new(); no];
        let mut out_of = vec![Vec::new(); no];
        for f in 0..na {
            into[c[f]].push(f);
            out_of[d[f]].push(f);
        }
        Ok(TopGroupoid { objects, arrows, d, c, e, inv, comp, into, out_of })
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrows_into(&self, x: usize) -> &[usize] {
        &self.into[x]
    }

    pub fn arrows_out_of(&self, x: usize) -> &[usize] {
        &self.out_of[x]
    }

    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.comp.get(&(g, f)).copied()
    }

    /// Composable pairs `(g, f)` in lexicographic order.
    pub fn composable_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for g in 0..self.num_arrows() {
            for &f in &self.into[self.d[g]] {
                out.push((g, f));
            }
        }
        out
    }

    /// Unit, inverse and associativity laws, checked exhaustively.
    pub fn verify_axioms(&self) -> Result<()> {
        for x in 0..self.num_objects() {
            let ex = self.e[x];
            if self.d[ex] != x || self.c[ex] != x {
                return Err(invariant(format!("d e / c e differ from identity at object {x}")));
            }
        }
        for f in 0..self.num_arrows() {
            let i = self.inv[f];
            if self.inv[i] != f {
                return Err(invariant(format!("inverse not involutive at arrow {f}")));
            }
            if self.d[i] != self.c[f] || self.c[i] != self.d[f] {
                return Err(invariant(format!("inverse swaps ends wrongly at arrow {f}")));
            }
        }
        let mut count = 0;
        for g in 0..self.num_arrows() {
            for &f in &self.into[self.d[g]] {
                count += 1;
                let gf = self
                    .compose(g, f)
                    .ok_or_else(|| invariant(format!("composite of {g} and {f} missing")))?;
                if self.d[gf] != self.d[f] || self.c[gf] != self.c[g] {
                    return Err(invariant(format!("ends of {g} o {f}")));
                }
            }
        }
        if count != self.comp.len() {
            return Err(invariant("composition defined on non-composable pairs".into()));
        }
        for f in 0..self.num_arrows() {
            let (df, cf) = (self.d[f], self.c[f]);
            if self.compose(self.e[cf], f) != Some(f) || self.compose(f, self.e[df]) != Some(f) {
                return Err(invariant(format!("unit law fails at arrow {f}")));
            }
            if self.compose(self.inv[f], f) != Some(self.e[df]) || self.compose(f, self.inv[f]) != Some(self.e[cf]) {
                return Err(invariant(format!("inverse law fails at arrow {f}")));
            }
        }
        for g in 0..self.num_arrows() {
            for &f in &self.into[self.d[g]] {
                let gf = self.comp[&(g, f)];
                for &h in &self.out_of[self.c[g]] {
                    let hg = self.comp[&(h, g)];
                    if self.comp[&(h, gf)] != self.comp[&(hg, f)] {
                        return Err(invariant(format!("associativity fails at ({h}, {g}, {f})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_d_continuous(&self) -> bool {
        self.arrows.is_continuous(&self.d, &self.objects)
    }

    pub fn is_c_continuous(&self) -> bool {
        self.arrows.is_continuous(&self.c, &self.objects)
    }

    pub fn is_e_continuous(&self) -> bool {
        self.objects.is_continuous(&self.e, &self.arrows)
    }

    pub fn is_inv_continuous(&self) -> bool {
        self.arrows.is_continuous(&self.inv, &self.arrows)
    }

    /// Continuity of composition on the fibred product of composable pairs,
    /// by monotonicity: pairs in the neighbourhood of `(g, f)` must compose
    /// into the neighbourhood of `g ∘ f`.
    pub fn is_comp_continuous(&self) -> bool {
        for g in 0..self.num_arrows() {
            for &f in &self.into[self.d[g]] {
                let target = self.arrows.nbhd(self.comp[&(g, f)]);
                for g2 in self.arrows.nbhd(g).ones() {
                    for &f2 in &self.into[self.d[g2]] {
                        if self.arrows.nbhd(f).contains(f2) && !target.contains(self.comp[&(g2, f2)]) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn is_open(&self) -> bool {
        self.arrows.is_open_map(&self.d, &self.objects) && self.arrows.is_open_map(&self.c, &self.objects)
    }

    pub fn identities(&self) -> PointSet {
        crate::topology::set_of(self.num_arrows(), self.e.iter().copied())
    }

    /// Arrows with both ends in `objs`.
    pub fn arrows_over(&self, objs: &PointSet) -> PointSet {
        crate::topology::set_of(
            self.num_arrows(),
            (0..self.num_arrows()).filter(|&f| objs.contains(self.d[f]) && objs.contains(self.c[f])),
        )
    }

    /// `{ d(f) : f ∈ s }`.
    pub fn d_image(&self, s: &PointSet) -> PointSet {
        crate::topology::image(&self.d, s, self.num_objects())
    }

    pub fn c_image(&self, s: &PointSet) -> PointSet {
        crate::topology::image(&self.c, s, self.num_objects())
    }

    pub fn d_preimage(&self, s: &PointSet) -> PointSet {
        crate::topology::preimage(&self.d, s, self.num_arrows())
    }

    pub fn c_preimage(&self, s: &PointSet) -> PointSet {
        crate::topology::preimage(&self.c, s, self.num_arrows())
    }

    /// Sub-groupoid on a set of arrows closed under the structure maps, with
    /// subspace topologies. Returns the groupoid and the maps from its
    /// object and arrow indices to the old ones.
    pub fn restrict(&self, objs: &PointSet, arrows: &PointSet) -> Result<(TopGroupoid, Vec<usize>, Vec<usize>)> {
        let (ospace, omap) = self.objects.subspace(objs);
        let (aspace, amap) = self.arrows.subspace(arrows);
        let mut opos = vec![usize::MAX; self.num_objects()];
        for (i, &x) in omap.iter().enumerate() {
            opos[x] = i;
        }
        let mut apos = vec![usize::MAX; self.num_arrows()];
        for (i, &f) in amap.iter().enumerate() {
            apos[f] = i;
        }
        let look = |v: usize, pos: &[usize]| -> Result<usize> {
            match pos[v] {
                usize::MAX => Err(invariant("sub-groupoid not closed".into())),
                p => Ok(p),
            }
        };
        let d = amap.iter().map(|&f| look(self.d[f], &opos)).collect::<Result<_>>()?;
        let c = amap.iter().map(|&f| look(self.c[f], &opos)).collect::<Result<_>>()?;
        let e = omap.iter().map(|&x| look(self.e[x], &apos)).collect::<Result<_>>()?;
        let inv = amap.iter().map(|&f| look(self.inv[f], &apos)).collect::<Result<_>>()?;
        let mut comp = HashMap::new();
        for &g in &amap {
            for &f in &self.into[self.d[g]] {
                if arrows.contains(f) {
                    comp.insert((apos[g], apos[f]), look(self.comp[&(g, f)], &apos)?);
                }
            }
        }
        Ok((TopGroupoid::new(ospace, aspace, d, c, e, inv, comp)?, omap, amap))
    }
}

/// A continuous functor between topological groupoids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidMorphism {
    pub f0: Vec<usize>,
    pub f1: Vec<usize>,
}

impl GroupoidMorphism {
    pub fn identity(g: &TopGroupoid) -> Self {
        Self { f0: (0..g.num_objects()).collect(), f1: (0..g.num_arrows()).collect() }
    }

    pub fn compose(&self, first: &GroupoidMorphism) -> GroupoidMorphism {
        GroupoidMorphism {
            f0: first.f0.iter().map(|&x| self.f0[x]).collect(),
            f1: first.f1.iter().map(|&x| self.f1[x]).collect(),
        }
    }

    /// Functoriality and continuity of both components.
    pub fn verify(&self, src: &TopGroupoid, tgt: &TopGroupoid) -> Result<()> {
        self.verify_functor(src, tgt)?;
        if !src.objects.is_continuous(&self.f0, &tgt.objects) {
            return Err(invariant("object map is not continuous".into()));
        }
        if !src.arrows.is_continuous(&self.f1, &tgt.arrows) {
            return Err(invariant("arrow map is not continuous".into()));
        }
        Ok(())
    }

    pub fn verify_functor(&self, src: &TopGroupoid, tgt: &TopGroupoid) -> Result<()> {
        if self.f0.len() != src.num_objects() || self.f1.len() != src.num_arrows() {
            return Err(invariant("morphism table sizes".into()));
        }
        for f in 0..src.num_arrows() {
            let h = self.f1[f];
            if tgt.d[h] != self.f0[src.d[f]] || tgt.c[h] != self.f0[src.c[f]] {
                return Err(invariant(format!("arrow {f} does not commute with d/c")));
            }
            if tgt.inv[h] != self.f1[src.inv[f]] {
                return Err(invariant(format!("arrow {f} does not commute with inverse")));
            }
        }
        for x in 0..src.num_objects() {
            if tgt.e[self.f0[x]] != self.f1[src.e[x]] {
                return Err(invariant(format!("object {x} does not commute with identity")));
            }
        }
        for (&(g, f), &gf) in &src.comp {
            if tgt.compose(self.f1[g], self.f1[f]) != Some(self.f1[gf]) {
                return Err(invariant(format!("composite of {g} and {f} not preserved")));
            }
        }
        Ok(())
    }
}
