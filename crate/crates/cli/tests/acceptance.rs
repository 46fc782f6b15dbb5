//! The twelve acceptance criteria, each timed against its budget. One line
//! per criterion is printed; the test fails if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use geodual::duality::{
    check_sem_conditions, check_strong_fullness, coherent_check, counit, discrete_counterexample, mod_functor, Verdict,
};
use geodual::groupoid::{build_model_groupoid, ModelGroupoid, TopGroupoid};
use geodual::logic::Theory;
use geodual::models::{ModelClass, DEFAULT_LIMIT};
use geodual::report::{run_suite, RunConfig, Suite, SuiteReport};
use geodual::topology::{FinSpace, PointSet};

fn theory_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../theories").join(name)
}

fn theories() -> [(&'static str, Theory); 2] {
    [("T_=", Theory::equality()), ("symE", Theory::symmetric_relation())]
}

fn cfg(n: usize, depth: usize) -> RunConfig {
    RunConfig { index_size: n, depth, ..RunConfig::default() }
}

fn groupoid(t: &Theory, n: usize) -> ModelGroupoid {
    build_model_groupoid(ModelClass::build(t, n, DEFAULT_LIMIT).unwrap()).unwrap()
}

/// `f` is continuous iff it maps each minimal neighbourhood into the
/// minimal neighbourhood of the image.
fn continuous(src: &FinSpace, f: &[usize], tgt: &FinSpace) -> bool {
    (0..src.len()).all(|p| src.nbhd(p).ones().all(|q| tgt.nbhd(f[p]).contains(f[q])))
}

/// Groupoid laws and continuity of every structure map, read off the raw
/// tables.
fn groupoid_laws(g: &TopGroupoid) -> Result<(), String> {
    let comp = |a: usize, b: usize| g.comp.get(&(a, b)).copied();
    for f in 0..g.d.len() {
        let (d, c) = (g.d[f], g.c[f]);
        if g.d[g.e[d]] != d || g.c[g.e[d]] != d {
            return Err(format!("identity at {d}"));
        }
        if comp(f, g.e[d]) != Some(f) || comp(g.e[c], f) != Some(f) {
            return Err(format!("unit law at {f}"));
        }
        if comp(g.inv[f], f) != Some(g.e[d]) || comp(f, g.inv[f]) != Some(g.e[c]) {
            return Err(format!("inverse law at {f}"));
        }
        for h in (0..g.d.len()).filter(|&h| g.d[h] == c) {
            for k in (0..g.d.len()).filter(|&k| g.d[k] == g.c[h]) {
                let left = comp(k, h).and_then(|kh| comp(kh, f));
                let right = comp(h, f).and_then(|hf| comp(k, hf));
                if left.is_none() || left != right {
                    return Err(format!("associativity at ({k},{h},{f})"));
                }
            }
        }
    }
    if g.comp.len() != (0..g.d.len()).map(|f| g.d.iter().filter(|&&x| x == g.c[f]).count()).sum::<usize>() {
        return Err("composition is not total on composable pairs".into());
    }
    let checks = [
        ("d", continuous(&g.arrows, &g.d, &g.objects)),
        ("c", continuous(&g.arrows, &g.c, &g.objects)),
        ("e", continuous(&g.objects, &g.e, &g.arrows)),
        ("inverse", continuous(&g.arrows, &g.inv, &g.arrows)),
    ];
    if let Some((name, _)) = checks.iter().find(|c| !c.1) {
        return Err(format!("{name} is not continuous"));
    }
    for (&(a, b), &ab) in &g.comp {
        for x in g.arrows.nbhd(a).ones() {
            for y in g.arrows.nbhd(b).ones() {
                if let Some(xy) = comp(x, y) {
                    if !g.arrows.nbhd(ab).contains(xy) {
                        return Err(format!("composition is not continuous at ({a},{b})"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The three preimage identities by direct inspection of each isomorphism.
fn preimages_by_hand(mg: &ModelGroupoid, a: usize, b: usize) -> Result<(), String> {
    let mc = &mg.mc;
    let sends = |f: usize, x: usize, y: usize| {
        let iso = &mc.isos[f];
        match (mc.models[iso.dom].block_of(x), mc.models[iso.cod].block_of(y)) {
            (Some(p), Some(q)) => iso.perm[p] == q,
            _ => false,
        }
    };
    let r = geodual::groupoid::structure_map_preimages(mg, a, b).map_err(|e| e.to_string())?;
    let inverse: BTreeSet<usize> = (0..mc.isos.len()).filter(|&f| sends(f, b, a)).collect();
    if r.inverse.ones().collect::<BTreeSet<_>>() != inverse || !r.inverse_ok {
        return Err(format!("inverse at ({a},{b})"));
    }
    let identity: BTreeSet<usize> = (0..mc.len())
        .filter(|&m| match (mc.models[m].block_of(a), mc.models[m].block_of(b)) {
            (Some(p), Some(q)) => p == q,
            _ => false,
        })
        .collect();
    if r.identity.ones().collect::<BTreeSet<_>>() != identity || !r.identity_ok {
        return Err(format!("identity at ({a},{b})"));
    }
    let composition: BTreeSet<(usize, usize)> = mg
        .g
        .comp
        .keys()
        .copied()
        .filter(|&(x, y)| (0..mc.n).any(|c| sends(x, c, b) && sends(y, a, c)))
        .collect();
    let direct: BTreeSet<(usize, usize)> = mg.g.comp.iter().filter(|(_, &xy)| sends(xy, a, b)).map(|(&k, _)| k).collect();
    if composition != direct || r.composition != direct || !r.composition_ok {
        return Err(format!("composition at ({a},{b})"));
    }
    Ok(())
}

fn passed(r: &SuiteReport) -> bool {
    r.verdict == Verdict::Pass
}

fn no_failures(r: &SuiteReport) -> bool {
    r.failed == 0 && r.verdict != Verdict::Fail
}

fn summary(r: &SuiteReport) -> String {
    format!("{} n={}: {:?} checked {} gated {} failed {}", r.suite, r.index_size, r.verdict, r.checked, r.gated, r.failed)
}

fn c1() -> Result<String, String> {
    let mut notes = Vec::new();
    for (name, t) in theories() {
        for n in 1..=3 {
            let mg = groupoid(&t, n);
            groupoid_laws(&mg.g).map_err(|e| format!("{name} n={n}: {e}"))?;
            let r = run_suite(Suite::Algebra, &t, &cfg(n, 2)).map_err(|e| e.to_string())?;
            if !passed(&r) {
                return Err(format!("{name}: {}", summary(&r)));
            }
            notes.push(format!("{name}/{n}: {}o {}a", mg.g.num_objects(), mg.g.num_arrows()));
        }
    }
    Ok(notes.join(", "))
}

fn c2() -> Result<String, String> {
    let mut pairs = 0;
    for (name, t) in theories() {
        for n in 1..=3 {
            let mg = groupoid(&t, n);
            for a in 0..n {
                for b in 0..n {
                    preimages_by_hand(&mg, a, b).map_err(|e| format!("{name} n={n}: {e}"))?;
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} (a,b) pairs"))
}

fn c3() -> Result<String, String> {
    let r = run_suite(Suite::Sobriety, &Theory::equality(), &cfg(2, 2)).map_err(|e| e.to_string())?;
    if !passed(&r) || r.details["t0"] != true || r.details["filters"] != r.details["models"] {
        return Err(summary(&r));
    }
    // The CLI must not exit 0 unless the space is T0.
    for file in ["empty.thy", "symE.thy", "pointed.thy"] {
        let out = Command::new(env!("CARGO_BIN_EXE_geodual"))
            .args(["topology", "--index-size", "2", "--format", "json"])
            .arg(theory_path(file))
            .output()
            .map_err(|e| e.to_string())?;
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let t0 = v["result"]["t0"] == true;
        if out.status.code() == Some(0) && !t0 {
            return Err(format!("{file}: exit 0 without T0"));
        }
        if !t0 && out.status.code() != Some(2) {
            return Err(format!("{file}: non-T0 space not flagged"));
        }
    }
    Ok(format!("{} filters = {} models", r.details["filters"], r.details["models"]))
}

fn c4() -> Result<String, String> {
    let mut checked = 0;
    for (_, t) in theories() {
        for n in 1..=3 {
            let r = run_suite(Suite::Star, &t, &cfg(n, 2)).map_err(|e| e.to_string())?;
            if !passed(&r) {
                return Err(summary(&r));
            }
            checked += r.checked;
        }
    }
    Ok(format!("{checked} constructions"))
}

fn c5() -> Result<String, String> {
    let (mut checked, mut gated) = (0, 0);
    for (_, t) in theories() {
        for n in 1..=2 {
            let r = run_suite(Suite::Openness, &t, &cfg(n, 2)).map_err(|e| e.to_string())?;
            // Every non-open image must be among the gated instances.
            let not_open = r.details["images_not_open"].as_u64().unwrap_or(u64::MAX) as usize;
            if !no_failures(&r) || not_open > r.gated {
                return Err(summary(&r));
            }
            checked += r.checked;
            gated += r.gated;
        }
    }
    Ok(format!("{checked} basic opens, {gated} gated"))
}

fn c6() -> Result<String, String> {
    let (mut checked, mut gated) = (0, 0);
    for (_, t) in theories() {
        for n in 1..=2 {
            let r = run_suite(Suite::Stabilization, &t, &cfg(n, 2)).map_err(|e| e.to_string())?;
            if !no_failures(&r) {
                return Err(summary(&r));
            }
            checked += r.checked;
            gated += r.gated;
        }
    }
    Ok(format!("{} exact with headroom, {gated} without", checked - gated))
}

fn c7() -> Result<String, String> {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, t) in theories() {
        let r = run_suite(Suite::Definables, &t, &cfg(2, 2)).map_err(|e| e.to_string())?;
        ok &= passed(&r);
        notes.push(format!("{name}: {} of {} isomorphisms, {} not surjective", r.checked - r.gated - r.failed, r.checked, r.details["not_surjective"]));
        if let Some(g) = r.gated_examples.first() {
            notes.push(format!("e.g. {g}"));
        }
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn c8() -> Result<String, String> {
    let config = RunConfig { n_limit: 10_000, ..cfg(2, 2) };
    let r = run_suite(Suite::Density, &Theory::equality(), &config).map_err(|e| e.to_string())?;
    if !no_failures(&r) || r.checked == 0 {
        return Err(summary(&r));
    }
    Ok(format!("{} elements: {} certified, {} gated", r.checked, r.checked - r.gated, r.gated))
}

/// Stable opens of `U^k` by trying every subset of points.
fn stable_open_count(mg: &ModelGroupoid, space: &FinSpace, points: &[(usize, Vec<usize>)]) -> usize {
    let np = points.len();
    assert!(np < 20);
    let index = |m: usize, t: &[usize]| points.iter().position(|(x, u)| *x == m && u == t).unwrap();
    let mut count = 0;
    for mask in 0u32..(1 << np) {
        let s: PointSet = geodual::topology::set_of(np, (0..np).filter(|i| mask >> i & 1 == 1));
        let stable = s.ones().all(|p| {
            let (m, t) = &points[p];
            mg.mc.isos.iter().filter(|f| f.dom == *m).all(|f| {
                let moved: Vec<usize> = t.iter().map(|&b| f.perm[b]).collect();
                s.contains(index(f.cod, &moved))
            })
        });
        if stable && space.is_open(&s) {
            count += 1;
        }
    }
    count
}

fn c9() -> Result<String, String> {
    let t = Theory::equality();
    let (r, _, form) = counit(&t, 2, 1, 3, DEFAULT_LIMIT).map_err(|e| e.to_string())?;
    let baseline = vec![3, 2];
    if r.syntactic_objects != baseline || r.form_objects != baseline || !r.bijective() || r.verdict != Verdict::Pass {
        return Err(format!("counit {:?} <-> {:?}, verdict {:?}", r.syntactic_objects, r.form_objects, r.verdict));
    }
    let mg = groupoid(&t, 2);
    for k in 0..=1 {
        let level = &form.levels[k];
        let oracle = stable_open_count(&mg, &level.sheaf.space, &level.points);
        if oracle != baseline[k] {
            return Err(format!("brute-force count at k={k} is {oracle}"));
        }
    }
    let tri = run_suite(Suite::Triangles, &t, &RunConfig { kmax: 1, ..cfg(2, 3) }).map_err(|e| e.to_string())?;
    if !passed(&tri) || tri.details["form_triangle"] != true || tri.details["mod_triangle"] != true {
        return Err(summary(&tri));
    }
    Ok(format!("objects {:?}, arrows {} <-> {}, both triangles hold", baseline, r.syntactic_arrows, r.form_arrows))
}

fn c10() -> Result<String, String> {
    let mut notes = Vec::new();
    for (name, t) in theories() {
        let (g, _) = mod_functor(&t, 2, DEFAULT_LIMIT).map_err(|e| e.to_string())?;
        let r = check_sem_conditions(&g, 1 << 20).map_err(|e| e.to_string())?;
        if !r.strong_fullness.holds || r.condition_ii != Some(true) {
            return Err(format!("{name}: strong fullness {} condition ii {:?}", r.strong_fullness.holds, r.condition_ii));
        }
        notes.push(format!("{name}: {} subgroupoids certified", r.subgroupoids));
    }
    let d = discrete_counterexample(2).map_err(|e| e.to_string())?;
    let sf = check_strong_fullness(&d);
    let Some(w) = sf.witness.filter(|_| !sf.holds) else {
        return Err("discrete groupoid passes strong fullness".into());
    };
    // The witness arrow ends at f0(y) and nothing over it ends at y.
    if d.s.g.c[w.h] != d.f.f0[w.y] || d.g.arrows_into(w.y).iter().any(|&a| d.f.f1[a] == w.h) {
        return Err("witness does not refute strong fullness".into());
    }
    notes.push(format!("discrete counterexample fails at y={} h={}", w.y, w.h));
    Ok(notes.join("; "))
}

fn c11() -> Result<String, String> {
    let (g, mg) = mod_functor(&Theory::equality(), 2, DEFAULT_LIMIT).map_err(|e| e.to_string())?;
    let r = coherent_check(&g, 1, 1 << 20).map_err(|e| e.to_string())?;
    if !r.frames.iter().all(|f| f.degenerate && f.compact_elements == f.size) || r.verdict != Verdict::Pass {
        return Err("frame degeneracy not reported".into());
    }
    let mc = &mg.mc;
    let no = mc.len();
    let defined = |m: usize, a: &[usize]| a.iter().all(|&e| mc.models[m].block_of(e).is_some());
    let fixes = |f: usize, a: &[usize]| {
        let iso = &mc.isos[f];
        a.iter().all(|&e| match (mc.models[iso.dom].block_of(e), mc.models[iso.cod].block_of(e)) {
            (Some(p), Some(q)) => iso.perm[p] == q,
            _ => false,
        })
    };
    let frame = |a: &[usize]| -> BTreeSet<Vec<usize>> {
        (0u32..1 << no)
            .map(|mask| (0..no).filter(|i| mask >> i & 1 == 1).collect::<Vec<usize>>())
            .filter(|s| {
                s.iter().all(|&x| defined(x, a) && mg.g.objects.nbhd(x).ones().all(|y| s.contains(&y)))
                    && (0..mc.isos.len()).all(|f| !fixes(f, a) || !s.contains(&mc.isos[f].dom) || s.contains(&mc.isos[f].cod))
            })
            .collect()
    };
    let (f0, f1) = (frame(&[]), frame(&[0]));
    let proj = &r.projections[0];
    if proj.from != 0 || proj.to != 1 || proj.pullbacks.len() != f0.len() {
        return Err("0->1 projection missing".into());
    }
    for (s, got) in &proj.pullbacks {
        let want: Vec<usize> = (0..no)
            .filter(|&x| defined(x, &[0]))
            .filter(|&x| (0..mc.isos.len()).any(|h| mc.isos[h].cod == x && s.contains(&mc.isos[h].dom)))
            .collect();
        if *got != want || !f1.contains(&want) || !f0.contains(s) {
            return Err(format!("pullback of {s:?}: {got:?} vs {want:?}"));
        }
    }
    Ok(format!("frames {}/{}, degeneracy reported, {} pullbacks match", f0.len(), f1.len(), proj.pullbacks.len()))
}

fn c12() -> Result<String, String> {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_geodual"))
            .args(["report", "--index-size", "2", "--kmax", "1", "--depth", "3"])
            .arg(theory_path("empty.thy"))
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    if a.stdout.is_empty() || a.stdout != b.stdout || a.status.code() != b.status.code() {
        return Err("reports differ".into());
    }
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    if v["schema"] != 1 {
        return Err("schema version missing".into());
    }
    Ok(format!("{} identical bytes, exit {:?}", a.stdout.len(), a.status.code()))
}

#[test]
fn acceptance_criteria() {
    type Check = fn() -> Result<String, String>;
    let criteria: [(&str, Check, u64); 12] = [
        ("groupoid algebra", c1, 5),
        ("preimage identities", c2, 10),
        ("sobriety", c3, 10),
        ("star construction", c4, 30),
        ("openness of d", c5, 60),
        ("stabilization", c6, 60),
        ("definable sheaves as site objects", c7, 60),
        ("density", c8, 120),
        ("duality round trip", c9, 60),
        ("Sem_S membership", c10, 60),
        ("coherent conditions", c11, 10),
        ("determinism", c12, 60),
    ];
    // Starts the criterion lines on a fresh line after the test harness.
    println!();
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let (tag, msg) = match &outcome {
            Ok(m) if in_time => ("PASS", m.clone()),
            Ok(m) => ("FAIL", format!("over budget: {m}")),
            Err(m) => ("FAIL", m.clone()),
        };
        println!("[{tag}] {:>2} {name} ({:.2}s / {budget}s): {msg}", i + 1, took.as_secs_f64());
        if tag == "FAIL" {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
