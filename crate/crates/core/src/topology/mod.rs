//! Finite topological spaces, stored through the minimal open
//! neighbourhood of each point, and the logical topologies on models and
//! isomorphisms.

mod logical;

use std::collections::{HashSet, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

pub use logical::{
    arrow_diagram, arrow_space, basic_open_arrows, basic_open_points, filter_to_model, model_diagram, object_space,
    points_from_profile, preservation_set, BasicOpenI, BasicOpenM,
};

pub type PointSet = FixedBitSet;

pub fn set_of(n: usize, items: impl IntoIterator<Item = usize>) -> PointSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.extend(items);
    s
}

pub fn full_set(n: usize) -> PointSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

/// A finite space given by a named subbasis. The empty intersection is the
/// whole space.
#[derive(Clone, Debug)]
pub struct FinSpace {
    n: usize,
    names: Vec<String>,
    subbasis: Vec<PointSet>,
    nbhd: Vec<PointSet>,
}

impl FinSpace {
    pub fn new(n: usize, subbasis: Vec<(String, PointSet)>) -> FinSpace {
        let (names, subbasis): (Vec<String>, Vec<PointSet>) = subbasis
            .into_iter()
            .map(|(name, mut s)| {
                s.grow(n);
                (name, s)
            })
            .unzip();
        let nbhd = (0..n)
            .map(|p| {
                let mut u = full_set(n);
                for s in subbasis.iter().filter(|s| s.contains(p)) {
                    u.intersect_with(s);
                }
                u
            })
            .collect();
        FinSpace { n, names, subbasis, nbhd }
    }

    /// A space given directly by minimal neighbourhoods, which must satisfy
    /// `p ∈ U_p` and `q ∈ U_p ⇒ U_q ⊆ U_p`.
    pub fn from_nbhds(nbhd: Vec<PointSet>) -> Result<FinSpace> {
        let n = nbhd.len();
        for (p, u) in nbhd.iter().enumerate() {
            if !u.contains(p) || u.len() != n {
                return Err(Error::Invariant(format!("U_{p} does not contain {p}")));
            }
            if u.ones().any(|q| !nbhd[q].is_subset(u)) {
                return Err(Error::Invariant(format!("U_{p} is not open")));
            }
        }
        let names = (0..n).map(|p| format!("U{p}")).collect();
        Ok(FinSpace { n, names, subbasis: nbhd.clone(), nbhd })
    }

    pub fn discrete(n: usize) -> FinSpace {
        FinSpace::from_nbhds((0..n).map(|p| set_of(n, [p])).collect()).expect("discrete")
    }

    pub fn indiscrete(n: usize) -> FinSpace {
        FinSpace::from_nbhds(vec![full_set(n); n]).expect("indiscrete")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn subbasis(&self) -> impl Iterator<Item = (&str, &PointSet)> {
        self.names.iter().map(String::as_str).zip(&self.subbasis)
    }

    pub fn empty_set(&self) -> PointSet {
        FixedBitSet::with_capacity(self.n)
    }

    pub fn full(&self) -> PointSet {
        full_set(self.n)
    }

    /// Least open set containing `p`.
    pub fn nbhd(&self, p: usize) -> &PointSet {
        &self.nbhd[p]
    }

    pub fn is_open(&self, s: &PointSet) -> bool {
        s.ones().all(|p| self.nbhd[p].is_subset(s))
    }

    /// Least open superset.
    pub fn open_hull(&self, s: &PointSet) -> PointSet {
        let mut out = self.empty_set();
        for p in s.ones() {
            out.union_with(&self.nbhd[p]);
        }
        out
    }

    /// Largest open subset.
    pub fn interior(&self, s: &PointSet) -> PointSet {
        set_of(self.n, s.ones().filter(|&p| self.nbhd[p].is_subset(s)))
    }

    pub fn is_t0(&self) -> bool {
        let distinct: HashSet<&PointSet> = self.nbhd.iter().collect();
        distinct.len() == self.n
    }

    /// All open sets, as unions of minimal neighbourhoods, sorted.
    pub fn opens(&self, limit: usize) -> Result<Vec<PointSet>> {
        let mut seen: HashSet<PointSet> = HashSet::new();
        let mut queue = VecDeque::new();
        let empty = self.empty_set();
        seen.insert(empty.clone());
        queue.push_back(empty);
        while let Some(o) = queue.pop_front() {
            for p in 0..self.n {
                if o.contains(p) {
                    continue;
                }
                let mut next = o.clone();
                next.union_with(&self.nbhd[p]);
                if seen.insert(next.clone()) {
                    if seen.len() > limit {
                        return Err(Error::LimitExceeded {
                            what: "open-set lattice".into(),
                            estimate: format!("> {limit}"),
                            limit: limit as u64,
                        });
                    }
                    queue.push_back(next);
                }
            }
        }
        let mut out: Vec<PointSet> = seen.into_iter().collect();
        out.sort_by(|a, b| (a.count_ones(..), a.ones().collect::<Vec<_>>()).cmp(&(b.count_ones(..), b.ones().collect())));
        Ok(out)
    }

    /// Continuity of `f: self -> target`, via monotonicity on minimal
    /// neighbourhoods (exact for finite spaces).
    pub fn is_continuous(&self, f: &[usize], target: &FinSpace) -> bool {
        (0..self.n).all(|p| self.nbhd[p].ones().all(|q| target.nbhd[f[p]].contains(f[q])))
    }

    /// Continuity checked literally: the preimage of every subbasic set of
    /// the target is open.
    pub fn is_continuous_by_preimages(&self, f: &[usize], target: &FinSpace) -> bool {
        target.subbasis.iter().all(|s| self.is_open(&preimage(f, s, self.n)))
    }

    /// Whether `f` sends open sets to open sets.
    pub fn is_open_map(&self, f: &[usize], target: &FinSpace) -> bool {
        (0..self.n).all(|p| target.is_open(&image(f, &self.nbhd[p], target.n)))
    }

    /// Induced topology on `subset`; points are renumbered in increasing
    /// order and the returned vector maps new indices to old ones.
    pub fn subspace(&self, subset: &PointSet) -> (FinSpace, Vec<usize>) {
        let pts: Vec<usize> = subset.ones().collect();
        let mut pos = vec![usize::MAX; self.n];
        for (i, &p) in pts.iter().enumerate() {
            pos[p] = i;
        }
        let nbhd = pts
            .iter()
            .map(|&p| set_of(pts.len(), self.nbhd[p].ones().filter(|&q| subset.contains(q)).map(|q| pos[q])))
            .collect();
        (FinSpace::from_nbhds(nbhd).expect("subspace"), pts)
    }

    /// Quotient by the map `q` onto `0..classes`.
    pub fn quotient(&self, q: &[usize], classes: usize) -> FinSpace {
        let nbhd = (0..classes)
            .map(|c| {
                let mut v = set_of(classes, [c]);
                loop {
                    let hull = self.open_hull(&preimage(q, &v, self.n));
                    let next = image(q, &hull, classes);
                    if next == v {
                        break v;
                    }
                    v = next;
                }
            })
            .collect();
        FinSpace::from_nbhds(nbhd).expect("quotient")
    }
}

pub fn preimage(f: &[usize], s: &PointSet, n: usize) -> PointSet {
    set_of(n, (0..f.len()).filter(|&p| s.contains(f[p])))
}

pub fn image(f: &[usize], s: &PointSet, n: usize) -> PointSet {
    set_of(n, s.ones().map(|p| f[p]))
}

/// Fibred product `A ×_B C` over given pairs, with the product topology
/// restricted to the pairs.
pub fn fibred_product(a: &FinSpace, c: &FinSpace, pairs: &[(usize, usize)]) -> FinSpace {
    let nbhd = pairs
        .iter()
        .map(|&(x, y)| {
            set_of(
                pairs.len(),
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(_, &(x2, y2))| a.nbhd(x).contains(x2) && c.nbhd(y).contains(y2))
                    .map(|(i, _)| i),
            )
        })
        .collect();
    FinSpace::from_nbhds(nbhd).expect("product")
}

/// A completely prime filter of a finite frame, which is principal: it
/// consists of the opens containing `generator`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CPFilter {
    pub generator: PointSet,
}

impl CPFilter {
    pub fn contains(&self, space: &FinSpace, s: &PointSet) -> bool {
        space.is_open(s) && self.generator.is_subset(s)
    }

    pub fn neighbourhood(space: &FinSpace, p: usize) -> CPFilter {
        CPFilter { generator: space.nbhd(p).clone() }
    }
}

/// All completely prime filters. Every filter of a finite frame is the
/// up-set of its least member `O`; it is completely prime exactly when `O`
/// is nonempty and not covered by the opens that do not contain it.
pub fn cp_filters(space: &FinSpace, limit: usize) -> Result<Vec<CPFilter>> {
    let opens = space.opens(limit)?;
    let mut out = Vec::new();
    for o in &opens {
        if o.is_clear() {
            continue;
        }
        let mut cover = space.empty_set();
        for a in opens.iter().filter(|a| !o.is_subset(a)) {
            cover.union_with(a);
        }
        if !o.is_subset(&cover) {
            out.push(CPFilter { generator: o.clone() });
        }
    }
    Ok(out)
}
