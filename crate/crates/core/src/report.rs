//! Named property suites and the versioned JSON report.
//!
//! Each suite runs one family of exhaustive checks over a theory at a fixed
//! index-set size and returns counts, a verdict and a few example failures.
//! Reports hold no timings, so identical inputs give identical bytes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::Serialize;
use serde_json::{json, Value};

use crate::duality::form::DEFAULT_LATTICE_LIMIT;
use crate::duality::{check_sem_conditions, check_triangle_identities, coherent_check, counit, discrete_counterexample, mod_functor, Verdict};
use crate::duality::check_strong_fullness;
use crate::error::{Error, Result};
use crate::groupoid::{build_model_groupoid, open_image_d, structure_map_preimages, ModelGroupoid};
use crate::logic::{print_in_context, print_theory, Formula, FormulaInContext, Theory};
use crate::models::{all_tuples, star_extension, FormulaSearch, ModelClass, DEFAULT_LIMIT};
use crate::sheaves::{
    definable_sheaf, density_certificate, lift_section, moerdijk_sheaf, open_subgroupoids, stabilization_report,
    DensityOutcome,
};
use crate::topology::{basic_open_arrows, basic_open_points, cp_filters, filter_to_model, object_space, BasicOpenI, BasicOpenM, CPFilter};

pub const SCHEMA_VERSION: u32 = 1;

/// Examples kept per suite when instances fail or are gated.
const MAX_EXAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub index_size: usize,
    pub kmax: usize,
    pub depth: usize,
    /// Cap on enumerated structures.
    pub limit: u64,
    /// Cap on enumerated open sets, open subgroupoids and lattices.
    pub n_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { index_size: 2, kmax: 1, depth: 2, limit: DEFAULT_LIMIT, n_limit: DEFAULT_LATTICE_LIMIT }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.index_size == 0 || self.limit == 0 || self.n_limit == 0 {
            return Err(Error::Precondition("index size and limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Algebra,
    Preimages,
    Sobriety,
    Star,
    Openness,
    Stabilization,
    Definables,
    Density,
    Counit,
    Triangles,
    Sem,
    Coherent,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Algebra,
        Suite::Preimages,
        Suite::Sobriety,
        Suite::Star,
        Suite::Openness,
        Suite::Stabilization,
        Suite::Definables,
        Suite::Density,
        Suite::Counit,
        Suite::Triangles,
        Suite::Sem,
        Suite::Coherent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Preimages => "preimages",
            Suite::Sobriety => "sobriety",
            Suite::Star => "star",
            Suite::Openness => "openness",
            Suite::Stabilization => "stabilization",
            Suite::Definables => "definables",
            Suite::Density => "density",
            Suite::Counit => "counit",
            Suite::Triangles => "triangles",
            Suite::Sem => "sem",
            Suite::Coherent => "coherent",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown suite `{s}`; expected one of {}", Suite::ALL.iter().join(", "))))
    }
}

/// Outcome of one suite. `gated` counts instances that could not be decided
/// for lack of spare elements of `S`.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub index_size: usize,
    pub verdict: Verdict,
    pub checked: usize,
    pub gated: usize,
    pub failed: usize,
    pub failures: Vec<String>,
    pub gated_examples: Vec<String>,
    pub details: Value,
}

/// Tallies instances and keeps the first few failures and gates.
#[derive(Default)]
struct Tally {
    checked: usize,
    gated: usize,
    failed: usize,
    failures: Vec<String>,
    gated_examples: Vec<String>,
}

impl Tally {
    fn ok(&mut self) {
        self.checked += 1;
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.failed += 1;
        if self.failures.len() < MAX_EXAMPLES {
            self.failures.push(what());
        }
    }

    fn gate(&mut self, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.gated += 1;
        if self.gated_examples.len() < MAX_EXAMPLES {
            self.gated_examples.push(what());
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.ok()
        } else {
            self.fail(what)
        }
    }

    /// Fail on any failure, otherwise inconclusive on any gate.
    fn verdict(&self) -> Verdict {
        if self.failed > 0 {
            Verdict::Fail
        } else if self.gated > 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    fn finish(self, suite: Suite, n: usize, verdict: Verdict, details: Value) -> SuiteReport {
        SuiteReport {
            suite: suite.name().into(),
            index_size: n,
            verdict,
            checked: self.checked,
            gated: self.gated,
            failed: self.failed,
            failures: self.failures,
            gated_examples: self.gated_examples,
            details,
        }
    }
}

fn model_groupoid(t: &Theory, cfg: &RunConfig) -> Result<ModelGroupoid> {
    build_model_groupoid(ModelClass::build(t, cfg.index_size, cfg.limit)?)
}

fn distinct_tuples(n: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).permutations(len)
}

/// Formula classes in context `k` up to connective depth `d`.
fn formulas(search: &mut FormulaSearch, k: usize, d: usize) -> Result<Vec<FormulaInContext>> {
    Ok(search.level(k, d)?.iter().map(|e| e.formula.clone()).collect())
}

/// Groupoid axioms and continuity of every structure map.
pub fn algebra_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mg = model_groupoid(t, cfg)?;
    let g = &mg.g;
    let mut tally = Tally::default();
    let axioms = g.verify_axioms();
    tally.check(axioms.is_ok(), || format!("axioms: {}", axioms.as_ref().err().map(|e| e.to_string()).unwrap_or_default()));
    let checks = [
        ("d continuous", g.is_d_continuous() && g.arrows.is_continuous_by_preimages(&g.d, &g.objects)),
        ("c continuous", g.is_c_continuous() && g.arrows.is_continuous_by_preimages(&g.c, &g.objects)),
        ("e continuous", g.is_e_continuous() && g.objects.is_continuous_by_preimages(&g.e, &g.arrows)),
        ("inverse continuous", g.is_inv_continuous() && g.arrows.is_continuous_by_preimages(&g.inv, &g.arrows)),
        ("composition continuous", g.is_comp_continuous()),
    ];
    for (name, ok) in checks {
        tally.check(ok, || name.to_string());
    }
    let details = json!({
        "objects": g.num_objects(),
        "arrows": g.num_arrows(),
        "composable_pairs": g.comp.len(),
        "open_groupoid": g.is_open(),
    });
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Algebra, cfg.index_size, verdict, details))
}

/// Preimages of `<a|->b>` under inverse, identity and composition for all
/// `(a, b)`.
pub fn preimage_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mg = model_groupoid(t, cfg)?;
    let n = cfg.index_size;
    let mut tally = Tally::default();
    for a in 0..n {
        for b in 0..n {
            let r = structure_map_preimages(&mg, a, b)?;
            tally.check(r.inverse_ok, || format!("inverse at ({a},{b})"));
            tally.check(r.identity_ok, || format!("identity at ({a},{b})"));
            tally.check(r.composition_ok, || format!("composition at ({a},{b})"));
        }
    }
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Preimages, n, verdict, json!({ "pairs": n * n })))
}

/// Completely prime filters of the object space against models. A space
/// that is not T0 is a truncation artifact and makes the suite
/// inconclusive.
pub fn sobriety_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mc = ModelClass::build(t, cfg.index_size, cfg.limit)?;
    let space = object_space(&mc);
    let mut tally = Tally::default();
    let t0 = space.is_t0();
    if !t0 {
        tally.gate(|| "object space is not T0 at this index size".into());
    }
    let filters = cp_filters(&space, cfg.n_limit)?;
    tally.check(filters.len() == mc.len(), || format!("{} filters for {} models", filters.len(), mc.len()));
    for (i, m) in mc.models.iter().enumerate() {
        let nf = CPFilter::neighbourhood(&space, i);
        tally.check(filters.contains(&nf), || format!("neighbourhood filter of {} missing", m.label()));
        let back = filter_to_model(&mc, &space, &nf);
        tally.check(back.as_ref().ok() == Some(m), || format!("{} does not round-trip", m.label()));
    }
    for f in &filters {
        let back = filter_to_model(&mc, &space, f)?;
        let ok = mc.index_of(&back).is_some_and(|i| CPFilter::neighbourhood(&space, i) == *f);
        tally.check(ok, || format!("filter generated by {:?} does not round-trip", f.generator.ones().collect::<Vec<_>>()));
    }
    let details = json!({ "models": mc.len(), "filters": filters.len(), "t0": t0 });
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Sobriety, cfg.index_size, verdict, details))
}

/// The star construction for every model, every tuple `a` of length at most
/// `kmax.max(2)` defined in it, and every distinct `b`. Tuples without
/// headroom are outside the claim and counted separately.
pub fn star_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mc = ModelClass::build(t, cfg.index_size, cfg.limit)?;
    let n = cfg.index_size;
    let mut tally = Tally::default();
    let mut without_headroom = 0;
    for m in &mc.models {
        for len in 0..=cfg.kmax.max(2).min(n) {
            for a in all_tuples(n, len) {
                let Some(ca) = m.classes(&a) else { continue };
                let hit: BTreeSet<usize> = ca.iter().copied().collect();
                let headroom = m.num_blocks() > 0 && m.num_blocks() - hit.len() <= n - len;
                for b in distinct_tuples(n, len) {
                    match star_extension(m, &t.sig, &a, &b) {
                        Ok((target, f)) => {
                            let ok = mc.index_of(&target).is_some()
                                && crate::models::is_isomorphism(m, &target, &f)
                                && a.iter().zip(&b).all(|(x, y)| Some(f[m.block_of(*x).expect("defined")]) == target.block_of(*y));
                            tally.check(ok, || format!("{} a={a:?} b={b:?}", m.label()));
                        }
                        Err(Error::Headroom(_)) if !headroom => without_headroom += 1,
                        Err(e) => tally.fail(|| format!("{} a={a:?} b={b:?}: {e}", m.label())),
                    }
                }
            }
        }
    }
    let details = json!({ "models": mc.len(), "without_headroom": without_headroom });
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Star, n, verdict, details))
}

/// Basic opens `<[x|φ],a>` with `φ` a formula class up to the depth bound,
/// `x` of length at most 2 and `a` distinct.
fn basic_opens_m(search: &mut FormulaSearch, n: usize, depth: usize) -> Result<Vec<BasicOpenM>> {
    let mut out = Vec::new();
    for k in 0..=2.min(n) {
        for f in formulas(search, k, depth)? {
            for a in distinct_tuples(n, k) {
                out.push(BasicOpenM::new(f.clone(), a)?);
            }
        }
    }
    Ok(out)
}

/// `d(V)` against its certificate union for every basic open `V` of arrows
/// built from the basic opens of models and every set of preservation
/// conditions.
pub fn openness_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mg = model_groupoid(t, cfg)?;
    let n = cfg.index_size;
    let mut search = FormulaSearch::new(&mg.mc);
    let conds = basic_opens_m(&mut search, n, cfg.depth)?;
    let pairs: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).collect();
    let mut tally = Tally::default();
    let mut not_open = 0;
    for dom in &conds {
        for cod in &conds {
            for pres in pairs.iter().copied().powerset() {
                let v = BasicOpenI { dom: dom.clone(), pres, cod: cod.clone() };
                let img = open_image_d(&mg, &v)?;
                let arrows = basic_open_arrows(&mg.mc, &v)?;
                let direct = mg.g.d_image(&arrows);
                let open = mg.g.objects.is_open(&img.image);
                not_open += usize::from(!open);
                let describe = || format!("{} / {:?} / {}", v.dom.describe(&mg.mc), v.pres, v.cod.describe(&mg.mc));
                if img.image != direct || !img.failures.is_empty() || (!open && !img.is_gated()) {
                    tally.fail(describe);
                } else if img.is_gated() {
                    tally.gate(describe);
                } else {
                    tally.check(img.exact(), describe);
                }
            }
        }
    }
    let details = json!({ "model_conditions": conds.len(), "images_not_open": not_open });
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Openness, n, verdict, details))
}

/// Orbit closure of `<[x,y|ψ],a>` inside `<<x|φ>>` against
/// `<<x|φ ∧ ∃y ψ>>`, for `φ` in context at most `kmax` and `ψ` extending
/// it by at most two variables.
pub fn stabilization_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mg = model_groupoid(t, cfg)?;
    let n = cfg.index_size;
    let mut search = FormulaSearch::new(&mg.mc);
    let mut tally = Tally::default();
    for k in 0..=cfg.kmax {
        for phi in formulas(&mut search, k, cfg.depth)? {
            let ds = definable_sheaf(&mg, &phi)?;
            for l in 0..=2.min(n) {
                let psis = formulas(&mut search, k + l, cfg.depth)?;
                for psi in &psis {
                    for a in distinct_tuples(n, l) {
                        let r = stabilization_report(&mg, &ds, psi, &a)?;
                        let describe = || {
                            format!("φ={} ψ={} a={a:?}", print_in_context(&mg.mc.sig, &phi), print_in_context(&mg.mc.sig, psi))
                        };
                        if !r.consistent() || (!r.exact() && !r.is_gated()) {
                            tally.fail(describe);
                        } else if r.exact() {
                            tally.ok();
                        } else {
                            tally.gate(describe);
                        }
                    }
                }
            }
        }
    }
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Stabilization, n, verdict, json!({})))
}

/// `ŝ: <G,U,N_s> -> <<x|φ>>` for the section `s_a` over `U = <[x|φ],a>`,
/// for every formula class in context at most 2 and distinct `a`. A missing
/// point of the image is gated when the stabilization witness search ran
/// out of spare elements there.
pub fn definables_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mg = model_groupoid(t, cfg)?;
    let n = cfg.index_size;
    let mut search = FormulaSearch::new(&mg.mc);
    let mut tally = Tally::default();
    let mut not_surjective = 0;
    for k in 0..=2.min(n) {
        for phi in formulas(&mut search, k, cfg.depth)? {
            let ds = definable_sheaf(&mg, &phi)?;
            for a in distinct_tuples(n, k) {
                let u = basic_open_points(&mg.mc, &BasicOpenM::new(phi.clone(), a.clone())?)?;
                let lifted = lift_section(&mg.g, &ds.sheaf, &u, &ds.section(&mg, &a)?)?;
                let describe = || format!("φ={} a={a:?}", print_in_context(&mg.mc.sig, &phi));
                if lifted.is_isomorphism() {
                    tally.ok();
                    continue;
                }
                let others_ok = lifted.well_defined
                    && lifted.factors
                    && lifted.checks.all()
                    && lifted.injective
                    && lifted.inverse_continuous;
                if !others_ok {
                    tally.fail(describe);
                    continue;
                }
                not_surjective += 1;
                let eqs = Formula::and_all((0..k).map(|i| Formula::var_eq(i, k + i)));
                let r = stabilization_report(&mg, &ds, &FormulaInContext::canonical(2 * k, eqs), &a)?;
                let mut missing = ds.sheaf.space.full();
                missing.difference_with(&lifted.image);
                if r.consistent() && missing.is_subset(&r.gated) {
                    tally.gate(describe);
                } else {
                    tally.fail(describe);
                }
            }
        }
    }
    let details = json!({ "not_surjective": not_surjective });
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Definables, n, verdict, details))
}

/// A density certificate or a headroom gate for every element of every site
/// object `<G,U,N>`.
pub fn density_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let mg = model_groupoid(t, cfg)?;
    let subs = open_subgroupoids(&mg.g, cfg.n_limit)?;
    let mut tally = Tally::default();
    for (i, n) in subs.iter().enumerate() {
        let site = moerdijk_sheaf(&mg.g, n)?;
        for element in 0..site.len() {
            match density_certificate(&mg, &site, element)? {
                DensityOutcome::Certified(c) => {
                    let w = basic_open_arrows(&mg.mc, &c.symmetric)?;
                    let ok = c.checks.all()
                        && c.map[c.point] == element
                        && w.contains(mg.mc.identity(c.model))
                        && w.is_subset(n);
                    tally.check(ok, || format!("subgroupoid {i} element {element}"));
                }
                DensityOutcome::Gated { model, reason, .. } => {
                    tally.gate(|| format!("subgroupoid {i} element {element} at {}: {reason}", mg.mc.models[model].label()))
                }
            }
        }
    }
    let details = json!({ "subgroupoids": subs.len() });
    let verdict = tally.verdict();
    Ok(tally.finish(Suite::Density, cfg.index_size, verdict, details))
}

pub fn counit_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let (r, _, _) = counit(t, cfg.index_size, cfg.kmax, cfg.depth, cfg.limit)?;
    let mut tally = Tally::default();
    tally.check(r.objects_injective, || "objects not injective".into());
    tally.check(r.arrows_injective, || "arrows not injective".into());
    tally.check(r.inclusions_preserved, || "inclusions not preserved".into());
    tally.check(r.identities_preserved, || "identities not preserved".into());
    tally.check(r.functorial, || "not functorial".into());
    tally.check(r.pullback_square, || "pullback square fails".into());
    if !r.unmatched_objects.is_empty() || !r.unmatched_arrows.is_empty() {
        tally.gate(|| {
            format!(
                "{} object(s) and {} arrow(s) unreached at depth {}",
                r.unmatched_objects.len(),
                r.unmatched_arrows.len(),
                r.depth
            )
        });
    }
    let verdict = r.verdict;
    Ok(tally.finish(Suite::Counit, cfg.index_size, verdict, serde_json::to_value(&r).expect("serializable")))
}

pub fn triangle_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let r = check_triangle_identities(t, cfg.index_size, cfg.kmax, cfg.limit)?;
    let mut tally = Tally::default();
    tally.check(r.unit_over_s, || "unit is not over S".into());
    tally.check(r.preimages_ok, || "unit preimages differ".into());
    tally.check(r.counit_well_defined, || "counit of Form G is not well defined".into());
    tally.check(r.form_triangle, || "Form triangle fails".into());
    tally.check(r.mod_triangle == Some(true), || {
        format!("Mod triangle fails: {}", r.mod_triangle_error.clone().unwrap_or_default())
    });
    let verdict = r.verdict;
    Ok(tally.finish(Suite::Triangles, cfg.index_size, verdict, serde_json::to_value(&r).expect("serializable")))
}

/// Strong fullness and condition ii for `Mod(T)`, plus the discrete
/// counterexample, which must fail strong fullness.
pub fn sem_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let (g, _) = mod_functor(t, cfg.index_size, cfg.limit)?;
    let r = check_sem_conditions(&g, cfg.n_limit)?;
    let mut tally = Tally::default();
    tally.check(r.strong_fullness.holds, || format!("strong fullness fails: {:?}", r.strong_fullness.witness));
    if r.condition_ii.is_some() {
        tally.check(r.condition_ii == Some(true), || format!("condition ii fails at {} place(s)", r.failures.len()));
    }
    if !r.open_groupoid {
        tally.gate(|| "the groupoid is not open at this index size".into());
    }
    let counterexample = if cfg.index_size >= 2 {
        let d = discrete_counterexample(cfg.index_size)?;
        let sf = check_strong_fullness(&d);
        tally.check(!sf.holds && sf.witness.is_some(), || "discrete counterexample passes strong fullness".into());
        serde_json::to_value(&sf).expect("serializable")
    } else {
        Value::Null
    };
    let details = json!({
        "strong_fullness": r.strong_fullness,
        "open_groupoid": r.open_groupoid,
        "subgroupoids": r.subgroupoids,
        "condition_ii": r.condition_ii,
        "certificates": r.certificates.len(),
        "failures": r.failures,
        "discrete_counterexample": counterexample,
    });
    let verdict = match (tally.failed, r.verdict) {
        (0, v) => v,
        _ => Verdict::Fail,
    };
    Ok(tally.finish(Suite::Sem, cfg.index_size, verdict, details))
}

pub fn coherent_suite(t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    let (g, _) = mod_functor(t, cfg.index_size, cfg.limit)?;
    let r = coherent_check(&g, cfg.kmax, cfg.n_limit)?;
    let mut tally = Tally::default();
    for f in &r.frames {
        tally.check(f.closed_under_meets && f.closed_under_joins, || format!("frame at k={} is not a lattice", f.k));
    }
    for p in &r.projections {
        tally.check(p.lands_in_frame, || format!("projection {}->{} leaves the frame", p.from, p.to));
    }
    let verdict = r.verdict;
    Ok(tally.finish(Suite::Coherent, cfg.index_size, verdict, serde_json::to_value(&r).expect("serializable")))
}

pub fn run_suite(suite: Suite, t: &Theory, cfg: &RunConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    match suite {
        Suite::Algebra => algebra_suite(t, cfg),
        Suite::Preimages => preimage_suite(t, cfg),
        Suite::Sobriety => sobriety_suite(t, cfg),
        Suite::Star => star_suite(t, cfg),
        Suite::Openness => openness_suite(t, cfg),
        Suite::Stabilization => stabilization_suite(t, cfg),
        Suite::Definables => definables_suite(t, cfg),
        Suite::Density => density_suite(t, cfg),
        Suite::Counit => counit_suite(t, cfg),
        Suite::Triangles => triangle_suite(t, cfg),
        Suite::Sem => sem_suite(t, cfg),
        Suite::Coherent => coherent_suite(t, cfg),
    }
}

/// Fail beats inconclusive beats pass.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    verdicts.into_iter().fold(Verdict::Pass, |acc, v| match (acc, v) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
        _ => Verdict::Pass,
    })
}

/// Process exit code for a verdict: 0 pass, 1 fail, 2 inconclusive only.
pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 2,
    }
}

/// Wraps a payload with the schema version, the configuration and the
/// theory, as a value whose maps are sorted by key.
pub fn envelope(command: &str, t: &Theory, cfg: &RunConfig, verdict: Verdict, payload: Value) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "theory": print_theory(t),
        "verdict": verdict,
        "result": payload,
    })
}

/// Every suite over one theory.
pub fn full_report(t: &Theory, cfg: &RunConfig, suites: &[Suite]) -> Result<(Verdict, Value)> {
    let mut reports = Vec::new();
    for &s in suites {
        reports.push(run_suite(s, t, cfg)?);
    }
    let verdict = combine(reports.iter().map(|r| r.verdict));
    let payload = serde_json::to_value(&reports).expect("serializable");
    Ok((verdict, envelope("report", t, cfg, verdict, payload)))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
