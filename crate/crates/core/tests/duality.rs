use std::collections::{BTreeSet, HashMap, HashSet};

use geodual::duality::form::DEFAULT_LATTICE_LIMIT;
use geodual::duality::sem::{arrows_fixing, objects_defined_at, projection_pullback, stable_frame, SemCertificate};
use geodual::duality::syntactic::{composite_formula, product_formula};
use geodual::duality::unit::{fibre_model, theory_counit, triangles_for};
use geodual::duality::*;
use geodual::groupoid::{mod_on_interpretation, GroupoidMorphism, ModelGroupoid};
use geodual::logic::{Formula, FormulaInContext, Interpretation, Sequent, Signature, Term, Theory};
use geodual::models::{all_tuples, entails, enumerate_structures, eval_formula, ModelClass, Structure, DEFAULT_LIMIT};
use geodual::sheaves::{definable_sheaf, is_sheaf_isomorphism, open_subgroupoids, EquivariantSheaf};
use geodual::topology::{set_of, PointSet};
use itertools::Itertools;
use proptest::prelude::*;

fn over(t: &Theory, n: usize) -> (GroupoidOverS, ModelGroupoid) {
    mod_functor(t, n, DEFAULT_LIMIT).unwrap()
}

fn form(g: &GroupoidOverS, kmax: usize) -> RelationCategory {
    form_functor(g, kmax, DEFAULT_LATTICE_LIMIT).unwrap()
}

fn label_index(mc: &ModelClass, label: &str) -> usize {
    mc.models.iter().position(|m| m.label() == label).unwrap()
}

/// `Mod(T_=)` cut down to one object and its identity.
fn single_object(label: &str) -> GroupoidOverS {
    let (full, _) = over(&Theory::equality(), 2);
    let x = label_index(&full.s.mc, label);
    let objs = set_of(full.g.num_objects(), [x]);
    let arrows = set_of(full.g.num_arrows(), [full.g.e[x]]);
    let (g, omap, amap) = full.g.restrict(&objs, &arrows).unwrap();
    let f = GroupoidMorphism {
        f0: omap.iter().map(|&x| full.f.f0[x]).collect(),
        f1: amap.iter().map(|&h| full.f.f1[h]).collect(),
    };
    GroupoidOverS::new(g, f, full.s.clone()).unwrap()
}

fn sets_sorted(mut v: Vec<PointSet>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = v.drain(..).map(|s| s.ones().collect()).collect();
    out.sort();
    out
}

#[test]
fn mod_functor_examples() {
    let (g, mg) = over(&Theory::equality(), 2);
    assert_eq!(mg.mc.len(), 5);
    assert_eq!(g.f.f0, (0..5).collect::<Vec<_>>());
    assert_eq!(g.f.f1, (0..g.g.num_arrows()).collect::<Vec<_>>());

    let (g, _) = over(&Theory::inconsistent(), 2);
    assert_eq!((g.g.num_objects(), g.g.num_arrows()), (0, 0));

    let (g, mg) = over(&Theory::symmetric_relation(), 2);
    for x in 0..g.g.num_objects() {
        assert_eq!(g.s.mc.models[g.f.f0[x]].blocks(), mg.mc.models[x].blocks());
    }
    assert!(check_strong_fullness(&g).holds);
}

#[test]
fn semantic_quotient_examples() {
    let t = Theory::symmetric_relation();
    let (mc, eta) = semantic_quotient(&t, 2, DEFAULT_LIMIT).unwrap();
    assert_eq!(mc.models, ModelClass::build(&t, 2, DEFAULT_LIMIT).unwrap().models);
    assert_eq!(eta, Interpretation::identity(&t));
    for ax in &t.axioms {
        assert!(entails(&mc, ax).unwrap());
    }
    let (bot, _) = semantic_quotient(&Theory::inconsistent(), 2, DEFAULT_LIMIT).unwrap();
    assert!(bot.is_empty());
    let everything = Sequent::new(vec![0, 1], Formula::Top, Formula::var_eq(0, 1)).unwrap();
    assert!(entails(&bot, &everything).unwrap());
    assert!(entails(&bot, &Sequent::new(vec![], Formula::Top, Formula::bot()).unwrap()).unwrap());
}

#[test]
fn pullback_along_identity_and_of_empty() {
    let (g, _) = over(&Theory::symmetric_relation(), 2);
    let u = definable_sheaf(&g.s, &FormulaInContext::top(1)).unwrap();
    let id = GroupoidMorphism::identity(&g.s.g);
    let (same, pairs) = pullback_sheaf(&g.s.g, &id, &g.s.g, &u.sheaf).unwrap();
    let map: Vec<usize> = (0..u.len()).map(|p| pairs.iter().position(|&(x, q)| x == u.sheaf.proj[p] && q == p).unwrap()).collect();
    assert!(is_sheaf_isomorphism(&g.s.g, &u.sheaf, &same, &map));

    let empty = definable_sheaf(&g.s, &FormulaInContext::bot(1)).unwrap();
    let (pulled, _) = pullback_sheaf(&g.g, &g.f, &g.s.g, &empty.sheaf).unwrap();
    assert!(pulled.is_empty());
}

/// `U^k` over `Mod(T)` against `<<x|⊤>>`, point by point and open by open.
#[test]
fn pullback_square_is_the_definable_sheaf() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let (g, mg) = over(&t, 2);
        for k in 0..=2 {
            let (u, points) = power_sheaf(&g, k).unwrap();
            let def = definable_sheaf(&mg, &FormulaInContext::top(k)).unwrap();
            let pos: HashMap<&(usize, Vec<usize>), usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
            let map: Vec<usize> = def.points.iter().map(|p| pos[p]).collect();
            assert_eq!(map.len(), u.len());
            for p in 0..def.len() {
                let img = set_of(u.len(), def.sheaf.space.nbhd(p).ones().map(|q| map[q]));
                assert_eq!(&img, u.space.nbhd(map[p]));
            }
            if k <= 1 {
                for s in def.sheaf.space.opens(1 << 16).unwrap() {
                    let img = set_of(u.len(), s.ones().map(|p| map[p]));
                    assert!(u.space.is_open(&img));
                }
                for s in u.space.opens(1 << 16).unwrap() {
                    let pre = set_of(def.len(), (0..def.len()).filter(|&p| s.contains(map[p])));
                    assert!(def.sheaf.space.is_open(&pre));
                }
            }
            assert!(is_sheaf_isomorphism(&g.g, &def.sheaf, &u, &map));
        }
    }
}

#[test]
fn stable_open_lattice_matches_orbit_unions() {
    for t in [Theory::equality(), Theory::symmetric_relation(), Theory::inconsistent()] {
        let (g, _) = over(&t, 2);
        for k in 0..=2 {
            let (u, _) = power_sheaf(&g, k).unwrap();
            let ours = stable_open_lattice(&g.g, &u, 1 << 20).unwrap();
            let oracle = u.stable_opens(&g.g, 1 << 22).unwrap();
            assert_eq!(sets_sorted(ours), sets_sorted(oracle));
        }
    }
}

#[test]
fn form_examples() {
    let (g, _) = over(&Theory::equality(), 2);
    let f = form(&g, 1);
    assert_eq!(f.object_counts(), vec![3, 2]);
    assert_eq!(f.levels[2].opens.len(), 3);
    assert_eq!(f.arrows.len(), 16);
    let (u0, _) = power_sheaf(&g, 0).unwrap();
    assert_eq!(u0.len(), g.g.num_objects());
    let opens0: Vec<PointSet> = g
        .g
        .objects
        .opens(1 << 10)
        .unwrap()
        .into_iter()
        .filter(|s| (0..g.g.num_arrows()).all(|h| !s.contains(g.g.d[h]) || s.contains(g.g.c[h])))
        .collect();
    assert_eq!(sets_sorted(f.objects(0).to_vec()), sets_sorted(opens0));

    let (empty, _) = over(&Theory::inconsistent(), 2);
    let e = form(&empty, 2);
    assert_eq!(e.object_counts(), vec![1, 1, 1]);
    assert_eq!(e.arrows.len(), 9);
    assert!(e.arrows.iter().all(|a| a.identity == (a.src == a.tgt)));
}

/// Arrows of `Form(G)` recomputed from the orbit-union lattice by filtering
/// for fibrewise functional graphs.
fn arrow_oracle(f: &RelationCategory) -> BTreeSet<((usize, usize), (usize, usize), Vec<usize>)> {
    let g = &f.base;
    let mut out = BTreeSet::new();
    for k in 0..=f.kmax {
        for l in 0..=f.kmax {
            let up = &f.levels[k + l];
            for r in up.sheaf.stable_opens(&g.g, 1 << 22).unwrap() {
                for (i, a) in f.levels[k].opens.iter().enumerate() {
                    for (j, b) in f.levels[l].opens.iter().enumerate() {
                        let ok = a.ones().all(|p| {
                            let (x, t) = &f.levels[k].points[p];
                            let values: Vec<&Vec<usize>> = r
                                .ones()
                                .map(|q| &up.points[q])
                                .filter(|(y, u)| y == x && &u[..k] == t.as_slice())
                                .map(|(_, u)| u)
                                .collect();
                            values.len() == 1
                        }) && r.ones().all(|q| {
                            let (x, u) = &up.points[q];
                            f.levels[k].point(*x, &u[..k]).is_some_and(|p| a.contains(p))
                                && f.levels[l].point(*x, &u[k..]).is_some_and(|p| b.contains(p))
                        });
                        if ok {
                            out.insert(((k, i), (l, j), r.ones().collect()));
                        }
                    }
                }
            }
        }
    }
    out
}

#[test]
fn form_arrows_match_oracle() {
    for t in [Theory::equality(), Theory::symmetric_relation(), Theory::inconsistent()] {
        let (g, _) = over(&t, 2);
        let f = form(&g, 1);
        let ours: BTreeSet<_> = f.arrows.iter().map(|a| (a.src, a.tgt, f.graph(a).ones().collect::<Vec<_>>())).collect();
        assert_eq!(ours, arrow_oracle(&f));
    }
}

#[test]
fn form_identities_and_inclusions() {
    let (g, _) = over(&Theory::symmetric_relation(), 2);
    let f = form(&g, 1);
    for k in 0..=1 {
        for i in 0..f.objects(k).len() {
            let id = f.identity((k, i));
            assert!(f.arrows[id].identity);
            for (j, a) in f.arrows.iter().enumerate() {
                if a.src == (k, i) {
                    assert_eq!(f.compose(j, id).unwrap(), j);
                }
                if a.tgt == (k, i) {
                    assert_eq!(f.compose(id, j).unwrap(), j);
                }
            }
        }
    }
    for a in &f.arrows {
        let sub = f.objects(a.src.0)[a.src.1].is_subset(&f.objects(a.tgt.0)[a.tgt.1]);
        if a.inclusion {
            assert!(a.src.0 == a.tgt.0 && sub);
        }
    }
}

#[test]
fn syntactic_examples() {
    let (_, mg) = over(&Theory::equality(), 2);
    let cat = syntactic_category(&mg.mc, 1, 3).unwrap();
    assert_eq!(cat.object_counts(), vec![3, 2]);
    let space0 = cat.space(0);
    let sizes: BTreeSet<usize> = cat.objects[0].iter().map(|o| o.profile.count_ones(..)).collect();
    assert_eq!(sizes, BTreeSet::from([0, 4, 5]));
    assert_eq!(space0.len(), 5);
    let exists = fic(0, Formula::exists(0, Formula::Top));
    let p = space0.profile(&mg.mc, &exists).unwrap();
    assert!(cat.objects[0].iter().any(|o| o.profile == p));
    assert!(cat.inclusions_unique);
    for k in 0..=1 {
        for i in 0..cat.objects[k].len() {
            assert_eq!(cat.arrows.iter().filter(|a| a.identity && a.src == (k, i)).count(), 1);
        }
    }

    let (_, bot) = over(&Theory::inconsistent(), 2);
    let cat = syntactic_category(&bot.mc, 2, 2).unwrap();
    assert_eq!(cat.object_counts(), vec![1, 1, 1]);
    for k in 0..=2 {
        let top = Sequent::new((0..k).collect(), Formula::Top, Formula::bot()).unwrap();
        assert!(entails(&bot.mc, &top).unwrap());
        for l in 0..=2 {
            assert_eq!(cat.arrows.iter().filter(|a| a.src.0 == k && a.tgt.0 == l).count(), 1);
        }
    }
}

fn fic(k: usize, body: Formula) -> FormulaInContext {
    FormulaInContext::canonical(k, body)
}

/// Functional and total on extensions, evaluated model by model.
#[test]
fn syntactic_arrows_are_functional_on_extensions() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let (_, mg) = over(&t, 2);
        let cat = syntactic_category(&mg.mc, 1, 3).unwrap();
        let mut expected = 0;
        for k in 0..=1 {
            for l in 0..=1 {
                let cands: HashSet<Vec<Vec<Vec<usize>>>> = {
                    let mut search = geodual::models::FormulaSearch::new(&mg.mc);
                    search
                        .level(k + l, 3)
                        .unwrap()
                        .iter()
                        .map(|e| mg.mc.models.iter().map(|m| eval_formula(m, &e.formula).unwrap()).collect())
                        .collect()
                };
                for a in &cat.objects[k] {
                    for b in &cat.objects[l] {
                        for ext in &cands {
                            let ok = mg.mc.models.iter().zip(ext).all(|(m, rel)| {
                                let dom = eval_formula(m, &a.formula).unwrap();
                                let cod: BTreeSet<Vec<usize>> = eval_formula(m, &b.formula).unwrap().into_iter().collect();
                                rel.iter().all(|t| dom.contains(&t[..k].to_vec()) && cod.contains(&t[k..].to_vec()))
                                    && dom.iter().all(|x| rel.iter().filter(|t| &t[..k] == x.as_slice()).count() == 1)
                            });
                            expected += ok as usize;
                        }
                    }
                }
            }
        }
        assert_eq!(cat.arrows.len(), expected);
        for a in &cat.arrows {
            let (k, l) = (a.src.0, a.tgt.0);
            let prod = product_formula(&cat.objects[k][a.src.1].formula, &cat.objects[l][a.tgt.1].formula, k, l);
            assert!(a.profile.is_subset(&cat.space(k + l).profile(&mg.mc, &prod).unwrap()));
        }
    }
}

#[test]
fn counit_examples() {
    let (r, cat, f) = counit(&Theory::equality(), 2, 1, 3, DEFAULT_LIMIT).unwrap();
    assert_eq!(r.syntactic_objects, vec![3, 2]);
    assert_eq!(r.form_objects, vec![3, 2]);
    assert_eq!((r.syntactic_arrows, r.form_arrows), (16, 16));
    assert!(r.bijective() && r.functorial && r.pullback_square);
    assert_eq!(r.verdict, Verdict::Pass);
    let bot = cat.objects[1].iter().position(|o| o.profile.count_ones(..) == 0).unwrap();
    assert_eq!(f.objects(1)[r.object_map[1][bot]].count_ones(..), 0);

    let (r, _, _) = counit(&Theory::inconsistent(), 2, 1, 2, DEFAULT_LIMIT).unwrap();
    assert_eq!(r.object_map, vec![vec![0], vec![0]]);
    assert_eq!(r.arrow_map, vec![0, 1, 2, 3]);
    assert_eq!(r.verdict, Verdict::Pass);

    let (r, _, _) = counit(&Theory::symmetric_relation(), 2, 1, 3, DEFAULT_LIMIT).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.syntactic_objects, r.form_objects);
}

#[test]
fn counit_reports_shallow_search() {
    let (r, cat, _) = counit(&Theory::symmetric_relation(), 2, 1, 0, DEFAULT_LIMIT).unwrap();
    assert!(!cat.inclusions_unique);
    assert!(r.objects_injective && r.functorial);
    assert!(!r.unmatched_objects.is_empty());
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn counit_rejects_mismatched_bounds() {
    let (g, mg) = over(&Theory::equality(), 2);
    let cat = syntactic_category(&mg.mc, 1, 2).unwrap();
    assert!(compare(&cat, &form(&g, 0)).is_err());
}

/// Composites in `C_T` computed by formula and in `Form` by relations agree.
#[test]
fn counit_is_functorial_on_every_composable_pair() {
    let (_, cat, f) = counit(&Theory::symmetric_relation(), 2, 1, 3, DEFAULT_LIMIT).unwrap();
    let r = compare(&cat, &f).unwrap();
    let pairs = cat.arrows.iter().cartesian_product(cat.arrows.iter()).filter(|(a, b)| a.tgt == b.src).count();
    assert_eq!(r.composites_checked, pairs);
    let (fi, gi) = (0..cat.arrows.len())
        .cartesian_product(0..cat.arrows.len())
        .find(|&(i, j)| cat.arrows[i].tgt == cat.arrows[j].src && cat.arrows[i].src.0 == 1 && cat.arrows[j].tgt.0 == 1)
        .unwrap();
    let (a, b) = (&cat.arrows[fi], &cat.arrows[gi]);
    let comp = composite_formula(&a.formula, &b.formula, 1, a.tgt.0, 1);
    let mg = &cat.mc;
    for (m, model) in mg.models.iter().enumerate() {
        let ra = eval_formula(model, &a.formula).unwrap();
        let rb = eval_formula(model, &b.formula).unwrap();
        let l = a.tgt.0;
        let mut direct: Vec<Vec<usize>> = ra
            .iter()
            .flat_map(|s| rb.iter().filter(move |t| t[..l] == s[1..]).map(move |t| vec![s[0], t[l]]))
            .collect();
        direct.sort();
        direct.dedup();
        assert_eq!(eval_formula(&mg.models[m], &comp).unwrap(), direct);
    }
}

/// `ε_{T'} ∘ F = Form(Mod F) ∘ ε_T` for the inclusion of `T_=` into
/// symmetric `E`.
#[test]
fn counit_is_natural() {
    let (te, ts) = (Theory::equality(), Theory::symmetric_relation());
    let (_, cat_e, form_e) = counit(&te, 2, 1, 3, DEFAULT_LIMIT).unwrap();
    let (_, cat_s, form_s) = counit(&ts, 2, 1, 3, DEFAULT_LIMIT).unwrap();
    let (re, rs) = (compare(&cat_e, &form_e).unwrap(), compare(&cat_s, &form_s).unwrap());
    let (ge, mge) = over(&te, 2);
    let (_, mgs) = over(&ts, 2);
    let f = Interpretation::from_equality(&ts);
    let mod_f = mod_on_interpretation(&f, &mgs, &mge).unwrap();
    assert_eq!(ge.g.num_objects(), mge.mc.len());
    let pulled = form_on_morphism(&mod_f, &form_e, &form_s).unwrap();
    for k in 0..=1 {
        for (i, o) in cat_e.objects[k].iter().enumerate() {
            let translated = f.translate_in_context(&o.formula);
            let p = cat_s.space(k).profile(&cat_s.mc, &translated).unwrap();
            let j = cat_s.objects[k].iter().position(|x| x.profile == p).unwrap();
            assert_eq!(rs.object_map[k][j], pulled.objects[k][re.object_map[k][i]]);
        }
    }
    for (i, a) in cat_e.arrows.iter().enumerate() {
        let translated = f.translate_in_context(&a.formula);
        let p = cat_s.space(a.src.0 + a.tgt.0).profile(&cat_s.mc, &translated).unwrap();
        let src = cat_s.objects[a.src.0].iter().position(|x| x.profile == cat_s.space(a.src.0).profile(&cat_s.mc, &f.translate_in_context(&cat_e.objects[a.src.0][a.src.1].formula)).unwrap()).unwrap();
        let tgt = cat_s.objects[a.tgt.0].iter().position(|x| x.profile == cat_s.space(a.tgt.0).profile(&cat_s.mc, &f.translate_in_context(&cat_e.objects[a.tgt.0][a.tgt.1].formula)).unwrap()).unwrap();
        let j = cat_s.find_arrow((a.src.0, src), (a.tgt.0, tgt), &p).unwrap();
        assert_eq!(rs.arrow_map[j], pulled.arrows[re.arrow_map[i]]);
    }
}

/// The axioms of a finite-limit, image and union preserving functor out of
/// `Form(G)`, checked on relation extensions: lattice operations, pullback
/// and image along every map of contexts.
fn coherent_functor_oracle(f: &RelationCategory, symbols: &[(usize, usize)], m: &Structure) -> bool {
    let nb = m.num_blocks();
    let sym: HashMap<(usize, usize), usize> = symbols.iter().enumerate().map(|(s, &o)| (o, s)).collect();
    let ext = |k: usize, i: usize| -> BTreeSet<Vec<usize>> { m.rel_tuples(sym[&(k, i)]) };
    let top = f.levels.len() - 1;
    for k in 0..=top {
        let level = &f.levels[k];
        let all: BTreeSet<Vec<usize>> = all_tuples(nb, k).collect();
        for (i, o) in level.opens.iter().enumerate() {
            if o.count_ones(..) == 0 && !ext(k, i).is_empty() {
                return false;
            }
            if o.count_ones(..) == level.len() && ext(k, i) != all {
                return false;
            }
            for (j, p) in level.opens.iter().enumerate() {
                let mut meet = o.clone();
                meet.intersect_with(p);
                let mut join = o.clone();
                join.union_with(p);
                let (mi, ji) = (level.open_index(&meet).unwrap(), level.open_index(&join).unwrap());
                let (a, b) = (ext(k, i), ext(k, j));
                if ext(k, mi) != a.intersection(&b).cloned().collect() || ext(k, ji) != a.union(&b).cloned().collect() {
                    return false;
                }
            }
        }
        for k2 in 0..=top {
            let l2 = &f.levels[k2];
            for sigma in std::iter::repeat(0..k.max(1)).take(k2).multi_cartesian_product() {
                if k == 0 && k2 > 0 {
                    continue;
                }
                let along = |t: &[usize]| -> Vec<usize> { sigma.iter().map(|&s| t[s]).collect() };
                for (i, o) in level.opens.iter().enumerate() {
                    let img = l2.set(o.ones().map(|p| {
                        let (x, t) = &level.points[p];
                        (*x, along(t))
                    }));
                    if let Some(j) = img.and_then(|s| l2.open_index(&s)) {
                        let want: BTreeSet<Vec<usize>> = ext(k, i).iter().map(|t| along(t)).collect();
                        if ext(k2, j) != want {
                            return false;
                        }
                    }
                }
                for (j, p) in l2.opens.iter().enumerate() {
                    let back = set_of(
                        level.len(),
                        (0..level.len()).filter(|&q| {
                            let (x, t) = &level.points[q];
                            l2.point(*x, &along(t)).is_some_and(|r| p.contains(r))
                        }),
                    );
                    let i = level.open_index(&back).unwrap();
                    let want: BTreeSet<Vec<usize>> = all.iter().filter(|t| ext(k2, j).contains(&along(t))).cloned().collect();
                    if ext(k, i) != want {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[test]
fn form_models_match_functor_oracle() {
    for g in [over(&Theory::equality(), 2).0, single_object("{0}")] {
        let f = form(&g, 1);
        let (sig, symbols) = form_signature(&f);
        let ours = form_models(&f, &sig, &symbols).unwrap();
        let all = enumerate_structures(&sig, 2, 4_000_000).unwrap();
        let oracle: HashSet<Structure> = all.into_iter().filter(|m| coherent_functor_oracle(&f, &symbols, m)).collect();
        let ours_set: HashSet<Structure> = ours.models.iter().cloned().collect();
        assert_eq!(ours_set, oracle);
    }
}

#[test]
fn unit_examples() {
    let (empty, _) = over(&Theory::inconsistent(), 2);
    let u = unit(&form(&empty, 1)).unwrap();
    assert!(u.eta.f0.is_empty() && u.eta.f1.is_empty());
    assert!(u.target.mc.is_empty());

    let g = single_object("{0}");
    let f = form(&g, 1);
    assert_eq!(f.object_counts(), vec![2, 2]);
    let u = unit(&f).unwrap();
    let m = &u.target.mc.models[u.eta.f0[0]];
    assert_eq!(m.domain(), &[0]);
    for (s, &(k, i)) in u.symbols.iter().enumerate() {
        let level = &f.levels[k];
        for t in all_tuples(1, k) {
            assert_eq!(m.has(s, &t), level.opens[i].contains(level.point(0, &t).unwrap()));
        }
    }
    assert_eq!(fibre_model(&f, &u.sig, &u.symbols, 0).unwrap(), *m);
}

#[test]
fn unit_is_a_morphism_over_s() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let (g, _) = over(&t, 2);
        let f = form(&g, 1);
        let u = unit(&f).unwrap();
        u.eta.verify(&g.g, &u.target.g).unwrap();
        for a in 0..g.g.num_arrows() {
            assert_eq!(u.target.mc.isos[u.eta.f1[a]].perm, g.s.mc.isos[g.f.f1[a]].perm);
        }
        let image: BTreeSet<usize> = u.eta.f0.iter().copied().collect();
        assert_eq!(image.len(), g.g.num_objects());
    }
}

/// `η_G ∘ h = Mod(Form h) ∘ η_{G'}` for `h` the forgetful morphism
/// `Mod(symE) -> Mod(T_=)`.
#[test]
fn unit_is_natural() {
    let (ge, mge) = over(&Theory::equality(), 2);
    let (gs, mgs) = over(&Theory::symmetric_relation(), 2);
    let h = mod_on_interpretation(&Interpretation::from_equality(&Theory::symmetric_relation()), &mgs, &mge).unwrap();
    let (fe, fs) = (form(&ge, 1), form(&gs, 1));
    let (ue, us) = (unit(&fe).unwrap(), unit(&fs).unwrap());
    let map = form_on_morphism(&h, &fe, &fs).unwrap();
    let rels = ue
        .symbols
        .iter()
        .map(|&(k, i)| {
            let j = map.objects[k][i];
            let s = us.symbols.iter().position(|&x| x == (k, j)).unwrap();
            fic(k, Formula::Rel(s, (0..k).map(Term::Var).collect()))
        })
        .collect();
    let interp = Interpretation::new(
        Theory::new(ue.sig.clone(), vec![]).unwrap(),
        Theory::new(us.sig.clone(), vec![]).unwrap(),
        rels,
        vec![],
    )
    .unwrap();
    let mod_form_h = mod_on_interpretation(&interp, &us.target, &ue.target).unwrap();
    assert_eq!(mod_form_h.compose(&us.eta), ue.eta.compose(&h));
}

#[test]
fn triangle_identities() {
    for t in [Theory::equality(), Theory::symmetric_relation(), Theory::inconsistent()] {
        let r = check_triangle_identities(&t, 2, 1, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.mod_triangle, Some(true));
        assert!(r.form_triangle && r.counit_well_defined && r.preimages_ok);
    }
    let r = triangles_for(&form(&single_object("{0|1}"), 1), None).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.mod_triangle, None);
}

/// The interpretation `ε_T` sends `E` to the relation symbol whose fibres are
/// the extension of `E`.
#[test]
fn theory_counit_reads_extensions() {
    let t = Theory::symmetric_relation();
    let (g, mg) = over(&t, 2);
    let f = form_functor_levels(&g, 1, 2, DEFAULT_LATTICE_LIMIT).unwrap();
    let u = unit(&f).unwrap();
    let eps = theory_counit(&t, &mg, &f, &u).unwrap();
    let Formula::Rel(s, _) = &eps.rels[0].body else { panic!("relation image") };
    for (x, m) in mg.mc.models.iter().enumerate() {
        let fm = &u.target.mc.models[u.eta.f0[x]];
        assert_eq!(fm.rel_tuples(*s), m.rel_tuples(0));
    }
}

/// Lifts searched over the raw iso list.
fn fullness_oracle(g: &GroupoidOverS) -> Option<(usize, usize)> {
    for y in 0..g.g.num_objects() {
        for (h, iso) in g.s.mc.isos.iter().enumerate() {
            if iso.cod == g.f.f0[y] && !(0..g.g.num_arrows()).any(|a| g.g.c[a] == y && g.f.f1[a] == h) {
                return Some((y, h));
            }
        }
    }
    None
}

#[test]
fn strong_fullness_examples() {
    for t in [Theory::equality(), Theory::symmetric_relation(), Theory::inconsistent()] {
        let (g, _) = over(&t, 2);
        let r = check_strong_fullness(&g);
        assert!(r.holds && r.witness.is_none());
        assert_eq!(fullness_oracle(&g), None);
    }
    let d = discrete_counterexample(2).unwrap();
    let r = check_strong_fullness(&d);
    let w = r.witness.clone().unwrap();
    assert!(!r.holds);
    assert_eq!(fullness_oracle(&d), Some((w.y, w.h)));
    assert_eq!(d.s.mc.isos[w.h].cod, d.f.f0[w.y]);
    assert_ne!(d.s.mc.isos[w.h].dom, d.s.mc.isos[w.h].cod);

    let s = check_sem_conditions(&d, 1 << 16).unwrap();
    assert_eq!(s.condition_ii, None);
    assert_eq!(s.verdict, Verdict::Fail);
}

/// Each certificate re-checked from the iso list, and no shorter tuple
/// works.
fn verify_certificate(g: &GroupoidOverS, c: &SemCertificate) -> bool {
    let n = set_of(g.g.num_arrows(), c.n.iter().copied());
    let w = set_of(g.g.num_objects(), c.w.iter().copied());
    let dn = g.g.d_image(&n);
    let distinct = c.a.iter().collect::<BTreeSet<_>>().len() == c.a.len();
    let defined = w.ones().all(|y| c.a.iter().all(|e| g.s.mc.models[g.f.f0[y]].domain().contains(e)));
    let fixes = |a: usize, tuple: &[usize]| {
        let iso = &g.s.mc.isos[g.f.f1[a]];
        let (dm, cm) = (&g.s.mc.models[iso.dom], &g.s.mc.models[iso.cod]);
        tuple.iter().all(|&e| match (dm.block_of(e), cm.block_of(e)) {
            (Some(b), Some(b2)) => iso.perm[b] == b2,
            _ => false,
        })
    };
    let inside = |tuple: &[usize]| {
        (0..g.g.num_arrows()).all(|a| !(w.contains(g.g.d[a]) && w.contains(g.g.c[a]) && fixes(a, tuple)) || n.contains(a))
    };
    let dom = g.s.mc.models[g.f.f0[c.x]].domain().to_vec();
    let shorter = (0..c.a.len()).any(|len| dom.iter().copied().permutations(len).any(|t: Vec<usize>| inside(&t)));
    g.g.objects.is_open(&w) && w.contains(c.x) && w.is_subset(&dn) && distinct && defined && inside(&c.a) && !shorter
}

#[test]
fn sem_conditions_for_models() {
    for t in [Theory::equality(), Theory::symmetric_relation()] {
        let (g, _) = over(&t, 2);
        let r = check_sem_conditions(&g, 1 << 22).unwrap();
        assert!(r.strong_fullness.holds);
        assert_eq!(r.condition_ii, Some(true));
        assert!(!r.open_groupoid);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let subs = open_subgroupoids(&g.g, 1 << 22).unwrap();
        assert_eq!(r.subgroupoids, subs.len());
        let pairs: usize = subs.iter().map(|n| g.g.d_image(n).count_ones(..)).sum();
        assert_eq!(r.certificates.len(), pairs);
        assert!(r.certificates.iter().all(|c| verify_certificate(&g, c)));
        let all: Vec<usize> = (0..g.g.num_arrows()).collect();
        assert!(r.certificates.iter().filter(|c| c.n == all).all(|c| c.a.is_empty()));
    }
}

/// Frames recomputed by scanning every subset of objects.
fn frame_oracle(g: &GroupoidOverS, a: &[usize]) -> Vec<Vec<usize>> {
    let n = g.g.num_objects();
    let mut out = Vec::new();
    for mask in 0u64..(1 << n) {
        let v = set_of(n, (0..n).filter(|&x| mask >> x & 1 == 1));
        let inside = v.ones().all(|x| a.iter().all(|e| g.s.mc.models[g.f.f0[x]].domain().contains(e)));
        let stable = (0..g.g.num_arrows()).all(|h| {
            let iso = &g.s.mc.isos[g.f.f1[h]];
            let fixes = a.iter().all(|&e| {
                let (dm, cm) = (&g.s.mc.models[iso.dom], &g.s.mc.models[iso.cod]);
                matches!((dm.block_of(e), cm.block_of(e)), (Some(b), Some(b2)) if iso.perm[b] == b2)
            });
            !fixes || !v.contains(g.g.d[h]) || v.contains(g.g.c[h])
        });
        if inside && stable && g.g.objects.is_open(&v) {
            out.push(v.ones().collect());
        }
    }
    out.sort();
    out
}

#[test]
fn coherent_conditions() {
    for t in [Theory::equality(), Theory::symmetric_relation(), Theory::inconsistent()] {
        let (g, _) = over(&t, 2);
        let r = coherent_check(&g, 1, 1 << 20).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        for fr in &r.frames {
            assert!(fr.degenerate && fr.compact_elements == fr.size);
            let ours = sets_sorted(stable_frame(&g, &fr.a, 1 << 20).unwrap());
            assert_eq!(ours, frame_oracle(&g, &fr.a));
            assert_eq!(fr.size, ours.len());
        }
        let (u1, pts) = power_sheaf(&g, 1).unwrap();
        let proj = &r.projections[0];
        for (s, x) in &proj.pullbacks {
            let s_set = set_of(g.g.num_objects(), s.iter().copied());
            let pulled = set_of(u1.len(), (0..u1.len()).filter(|&p| s_set.contains(pts[p].0)));
            let oracle: Vec<usize> = objects_defined_at(&g, &[0])
                .ones()
                .filter(|&y| {
                    let cls = g.s.mc.models[g.f.f0[y]].block_of(0).unwrap();
                    let p = pts.iter().position(|q| q.0 == y && q.1 == vec![cls]).unwrap();
                    pulled.contains(p)
                })
                .collect();
            assert_eq!(x, &oracle);
            assert_eq!(projection_pullback(&g, &[0], &[], &s_set).ones().collect::<Vec<_>>(), oracle);
        }
        let _: &EquivariantSheaf = &u1;
    }
}

#[test]
fn arrows_fixing_matches_iso_list() {
    let (g, _) = over(&Theory::symmetric_relation(), 2);
    for a in [vec![], vec![0], vec![1], vec![0, 1]] {
        let ours = arrows_fixing(&g, &a);
        for h in 0..g.g.num_arrows() {
            let iso = &g.s.mc.isos[g.f.f1[h]];
            let (dm, cm) = (&g.s.mc.models[iso.dom], &g.s.mc.models[iso.cod]);
            let fixes = a.iter().all(|&e| matches!((dm.block_of(e), cm.block_of(e)), (Some(b), Some(b2)) if iso.perm[b] == b2));
            assert_eq!(ours.contains(h), fixes);
        }
    }
}

fn symmetric_form() -> &'static RelationCategory {
    use std::sync::OnceLock;
    static FORM: OnceLock<RelationCategory> = OnceLock::new();
    FORM.get_or_init(|| form(&over(&Theory::symmetric_relation(), 2).0, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn least_stable_open_is_a_union_of_generators(bits in proptest::collection::vec(any::<bool>(), 64)) {
        let f = symmetric_form();
        let level = &f.levels[1];
        let x = set_of(level.len(), (0..level.len()).filter(|&p| bits[p % bits.len()]));
        let mut hull = level.sheaf.space.empty_set();
        for p in x.ones() {
            hull.union_with(&stable_open_generator(&f.base.g, &level.sheaf, p));
        }
        let least = level.opens.iter().filter(|o| x.is_subset(o)).min_by_key(|o| o.count_ones(..)).unwrap();
        prop_assert_eq!(&hull, least);
        prop_assert!(level.opens.iter().filter(|o| x.is_subset(o)).all(|o| least.is_subset(o)));
    }

    #[test]
    fn form_composition_is_associative(i in 0usize..10_000, j in 0usize..10_000, k in 0usize..10_000) {
        let f = symmetric_form();
        let a = i % f.arrows.len();
        let outs: Vec<usize> = (0..f.arrows.len()).filter(|&b| f.arrows[b].src == f.arrows[a].tgt).collect();
        let b = outs[j % outs.len()];
        let outs2: Vec<usize> = (0..f.arrows.len()).filter(|&c| f.arrows[c].src == f.arrows[b].tgt).collect();
        let c = outs2[k % outs2.len()];
        let left = f.compose(c, f.compose(b, a).unwrap()).unwrap();
        let right = f.compose(f.compose(c, b).unwrap(), a).unwrap();
        prop_assert_eq!(left, right);
    }
}

#[test]
fn form_signature_names() {
    let (g, _) = over(&Theory::equality(), 2);
    let (sig, symbols) = form_signature(&form(&g, 1));
    let names: Vec<&str> = sig.rels.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["R0_0", "R0_1", "R0_2", "R1_0", "R1_1", "R2_0", "R2_1", "R2_2"]);
    assert_eq!(symbols.len(), 8);
    let _ = Signature::new();
}
