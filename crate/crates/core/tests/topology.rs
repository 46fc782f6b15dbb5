use std::collections::BTreeSet;

use geodual::logic::{Formula, FormulaInContext, Theory};
use geodual::models::{all_tuples, FormulaSearch, ModelClass, DEFAULT_LIMIT};
use geodual::topology::{
    arrow_diagram, arrow_space, basic_open_arrows, model_diagram, basic_open_points, cp_filters, filter_to_model, full_set, object_space,
    points_from_profile, set_of, BasicOpenI, BasicOpenM, CPFilter, FinSpace, PointSet,
};

fn class(t: &Theory, n: usize) -> ModelClass {
    ModelClass::build(t, n, DEFAULT_LIMIT).unwrap()
}

fn find(mc: &ModelClass, label: &str) -> usize {
    mc.models.iter().position(|m| m.label() == label).unwrap()
}

fn pts(mc: &ModelClass, labels: &[&str]) -> PointSet {
    set_of(mc.len(), labels.iter().map(|l| find(mc, l)))
}

fn bo(k: usize, body: Formula, params: Vec<usize>) -> BasicOpenM {
    BasicOpenM::new(FormulaInContext::canonical(k, body), params).unwrap()
}

/// Lattice of opens by brute force: close the subbasis under finite
/// intersections, then take every union of basic sets.
fn lattice_oracle(space: &FinSpace) -> BTreeSet<Vec<usize>> {
    let n = space.len();
    let mut basis: BTreeSet<Vec<usize>> = BTreeSet::new();
    basis.insert((0..n).collect());
    loop {
        let mut grown = basis.clone();
        for (_, s) in space.subbasis() {
            for b in &basis {
                grown.insert(b.iter().copied().filter(|&p| s.contains(p)).collect());
            }
        }
        if grown == basis {
            break;
        }
        basis = grown;
    }
    let basis: Vec<Vec<usize>> = basis.into_iter().collect();
    let mut opens: BTreeSet<Vec<usize>> = BTreeSet::new();
    opens.insert(Vec::new());
    loop {
        let mut grown = opens.clone();
        for o in &opens {
            for b in &basis {
                let u: BTreeSet<usize> = o.iter().chain(b).copied().collect();
                grown.insert(u.into_iter().collect());
            }
        }
        if grown == opens {
            break;
        }
        opens = grown;
    }
    opens
}

/// Completely prime filters by brute force over all families of opens.
fn cp_filter_oracle(space: &FinSpace) -> BTreeSet<Vec<Vec<usize>>> {
    let opens: Vec<Vec<usize>> = lattice_oracle(space).into_iter().collect();
    let n = opens.len();
    assert!(n <= 16, "oracle is exponential");
    let as_set = |v: &Vec<usize>| v.iter().copied().collect::<BTreeSet<usize>>();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let fam: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let has = |s: &BTreeSet<usize>| fam.iter().any(|&i| as_set(&opens[i]) == *s);
        let whole: BTreeSet<usize> = (0..space.len()).collect();
        if !has(&whole) || has(&BTreeSet::new()) {
            continue;
        }
        let mut ok = true;
        for &i in &fam {
            for (j, o) in opens.iter().enumerate() {
                if as_set(&opens[i]).is_subset(&as_set(o)) && mask >> j & 1 == 0 {
                    ok = false;
                }
            }
            for &j in &fam {
                let meet: BTreeSet<usize> = as_set(&opens[i]).intersection(&as_set(&opens[j])).copied().collect();
                if !has(&meet) {
                    ok = false;
                }
            }
        }
        // Completely prime: any family of opens whose union is in the filter
        // has a member in the filter.
        for sub in 0u32..(1 << n) {
            if !ok {
                break;
            }
            let union: BTreeSet<usize> =
                (0..n).filter(|j| sub >> j & 1 == 1).flat_map(|j| opens[j].clone()).collect();
            if has(&union) && !(0..n).any(|j| sub >> j & 1 == 1 && mask >> j & 1 == 1) {
                ok = false;
            }
        }
        if ok {
            out.insert(fam.iter().map(|&i| opens[i].clone()).collect());
        }
    }
    out
}

fn filter_family(space: &FinSpace, f: &CPFilter) -> Vec<Vec<usize>> {
    lattice_oracle(space)
        .into_iter()
        .filter(|o| f.contains(space, &set_of(space.len(), o.iter().copied())))
        .collect()
}

#[test]
fn small_lattices() {
    let trivial = FinSpace::new(2, vec![("empty".into(), PointSet::with_capacity(2))]);
    assert_eq!(trivial.opens(100).unwrap().len(), 2);
    let disc = FinSpace::new(2, vec![("a".into(), set_of(2, [0])), ("b".into(), set_of(2, [1]))]);
    assert_eq!(disc.opens(100).unwrap().len(), 4);
    assert_eq!(cp_filters(&disc, 100).unwrap().len(), 2);
    assert_eq!(cp_filters(&FinSpace::indiscrete(2), 100).unwrap().len(), 1);
}

#[test]
fn lattice_matches_oracle() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        for n in 1..=2 {
            let mc = class(&t, n);
            let space = object_space(&mc);
            let ours: BTreeSet<Vec<usize>> =
                space.opens(100_000).unwrap().iter().map(|o| o.ones().collect()).collect();
            if mc.len() <= 12 {
                assert_eq!(ours, lattice_oracle(&space));
            }
            for o in space.opens(100_000).unwrap() {
                assert!(space.is_open(&o));
            }
        }
    }
}

#[test]
fn equality_points_and_lattice() {
    let mc = class(&Theory::equality(), 2);
    let top0 = bo(1, Formula::Top, vec![0]);
    assert_eq!(basic_open_points(&mc, &top0).unwrap(), pts(&mc, &["{0}", "{0}{1}", "{0|1}"]));
    let eq = bo(2, Formula::var_eq(0, 1), vec![0, 1]);
    assert_eq!(basic_open_points(&mc, &eq).unwrap(), pts(&mc, &["{0|1}"]));
    assert_eq!(basic_open_points(&mc, &BasicOpenM::trivial()).unwrap(), full_set(5));
    let space = object_space(&mc);
    assert!(space.is_open(&pts(&mc, &["{0|1}"])));
    assert!(space.is_t0());
    assert!(BasicOpenM::new(FormulaInContext::top(1), vec![]).is_err());
}

#[test]
fn arrow_basic_opens() {
    let mc = class(&Theory::equality(), 2);
    let v = BasicOpenI::preservation(vec![(0, 0)]);
    let got = basic_open_arrows(&mc, &v).unwrap();
    let want = set_of(
        mc.isos.len(),
        (0..mc.isos.len()).filter(|&i| {
            let f = &mc.isos[i];
            let (m, n) = (&mc.models[f.dom], &mc.models[f.cod]);
            matches!((m.block_of(0), n.block_of(0)), (Some(x), Some(y)) if f.perm[x] == y)
        }),
    );
    assert_eq!(got, want);
    assert_eq!(basic_open_arrows(&mc, &BasicOpenI::trivial()).unwrap(), full_set(12));
    let v = BasicOpenI { dom: bo(1, Formula::Top, vec![0]), pres: vec![(0, 1)], cod: bo(1, Formula::Top, vec![1]) };
    let got = basic_open_arrows(&mc, &v).unwrap();
    for i in 0..mc.isos.len() {
        let f = &mc.isos[i];
        let (m, n) = (&mc.models[f.dom], &mc.models[f.cod]);
        let expect = matches!((m.block_of(0), n.block_of(1)), (Some(x), Some(y)) if f.perm[x] == y);
        assert_eq!(got.contains(i), expect);
    }
}

#[test]
fn cp_filters_match_oracle_and_points() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let mc = class(&t, if t.sig.rels.is_empty() { 2 } else { 1 });
        let space = object_space(&mc);
        let filters = cp_filters(&space, 100_000).unwrap();
        let ours: BTreeSet<Vec<Vec<usize>>> = filters.iter().map(|f| filter_family(&space, f)).collect();
        assert_eq!(ours, cp_filter_oracle(&space));
        assert_eq!(filters.len(), mc.len());
    }
}

#[test]
fn sobriety_round_trip() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let mc = class(&t, 2);
        let space = object_space(&mc);
        assert!(space.is_t0());
        let filters = cp_filters(&space, 1_000_000).unwrap();
        assert_eq!(filters.len(), mc.len());
        for (i, m) in mc.models.iter().enumerate() {
            let nf = CPFilter::neighbourhood(&space, i);
            assert!(filters.contains(&nf));
            assert_eq!(filter_to_model(&mc, &space, &nf).unwrap(), *m);
        }
        for f in &filters {
            let m = filter_to_model(&mc, &space, f).unwrap();
            let idx = mc.index_of(&m).unwrap();
            assert_eq!(CPFilter::neighbourhood(&space, idx), *f);
        }
    }
}

#[test]
fn filter_examples() {
    let mc = class(&Theory::equality(), 2);
    let space = object_space(&mc);
    for l in ["{0}", "{0|1}", "{}"] {
        let f = CPFilter::neighbourhood(&space, find(&mc, l));
        assert_eq!(filter_to_model(&mc, &space, &f).unwrap().label(), l);
    }
}

#[test]
fn geometric_basic_opens_are_open_and_horn_suffices() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let mc = class(&t, 2);
        let space = object_space(&mc);
        let mut search = FormulaSearch::new(&mc);
        let mut horn_sub = Vec::new();
        for k in 0..=2 {
            let sp = search.space(k);
            for e in search.level(k, 2).unwrap().iter() {
                for a in all_tuples(mc.n, k) {
                    let set = points_from_profile(&mc, &sp, &e.profile, &a);
                    assert!(space.is_open(&set), "{:?} {a:?}", e.formula);
                    assert_eq!(set, basic_open_points(&mc, &BasicOpenM::new(e.formula.clone(), a.clone()).unwrap()).unwrap());
                    if is_horn(&e.formula.body) {
                        horn_sub.push((format!("{:?}", e.formula), set));
                    }
                }
            }
        }
        let horn = FinSpace::new(mc.len(), horn_sub);
        let a: BTreeSet<Vec<usize>> = horn.opens(100_000).unwrap().iter().map(|o| o.ones().collect()).collect();
        let b: BTreeSet<Vec<usize>> = space.opens(100_000).unwrap().iter().map(|o| o.ones().collect()).collect();
        assert_eq!(a, b);
    }
}

fn is_horn(f: &Formula) -> bool {
    match f {
        Formula::Top | Formula::Eq(..) | Formula::Rel(..) => true,
        Formula::And(a, b) => is_horn(a) && is_horn(b),
        _ => false,
    }
}

#[test]
fn arrow_space_subbasis_names() {
    let mc = class(&Theory::equality(), 2);
    let objects = object_space(&mc);
    let names: Vec<&str> = objects.subbasis().map(|(n, _)| n).collect();
    assert_eq!(names, ["<0>", "<1>", "<=,0,1>"]);
    let arrows = arrow_space(&mc, &objects);
    assert_eq!(arrows.subbasis().count(), 3 + 3 + 4);
}

#[test]
fn subspace_and_quotient() {
    let disc = FinSpace::discrete(4);
    let q = disc.quotient(&[0, 0, 1, 1], 2);
    assert!(q.is_t0());
    assert_eq!(q.opens(10).unwrap().len(), 4);
    let sierpinski = FinSpace::new(2, vec![("open".into(), set_of(2, [1]))]);
    let (sub, map) = sierpinski.subspace(&set_of(2, [1]));
    assert_eq!(map, vec![1]);
    assert_eq!(sub.opens(10).unwrap().len(), 2);
    let merged = sierpinski.quotient(&[0, 0], 1);
    assert_eq!(merged.len(), 1);
}

#[test]
fn diagrams_are_minimal_neighbourhoods() {
    for t in [Theory::equality(), Theory::symmetric_relation(), geodual::logic::parse_theory("fun s/1").unwrap()] {
        let mc = class(&t, 2);
        let objects = object_space(&mc);
        let arrows = arrow_space(&mc, &objects);
        for m in 0..mc.len() {
            assert_eq!(&basic_open_points(&mc, &model_diagram(&mc, m)).unwrap(), objects.nbhd(m));
        }
        for f in 0..mc.isos.len() {
            assert_eq!(&basic_open_arrows(&mc, &arrow_diagram(&mc, f)).unwrap(), arrows.nbhd(f));
        }
    }
}
