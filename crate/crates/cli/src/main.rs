use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geodual::duality::{check_triangle_identities, counit, Verdict};
use geodual::groupoid::build_model_groupoid;
use geodual::logic::{parse_formula_in_context, parse_theory, print_in_context, Theory};
use geodual::models::{ModelClass, DEFAULT_LIMIT};
use geodual::report::{
    combine, envelope, exit_code, full_report, run_suite, to_json_string, RunConfig, Suite, SuiteReport,
};
use geodual::sheaves::{definable_sheaf, moerdijk_sheaf, open_subgroupoids};
use geodual::topology::object_space;
use geodual::{Error, ParseError};
use serde_json::{json, Value};

const DEFAULT_N_LIMIT: usize = 1 << 20;

/// Exit codes for errors, kept apart from the verdict codes 0, 1 and 2.
const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_LIMIT: u8 = 5;
const EXIT_OTHER: u8 = 6;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "geodual", version, about = "Finite-scale checks of the syntax-semantics duality for geometric theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Size of the index set S = {0..N-1}.
    #[arg(long, default_value_t = 2)]
    index_size: usize,
    /// Largest context length.
    #[arg(long, default_value_t = 1)]
    kmax: usize,
    /// Formula depth bound.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Cap on enumerated structures.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: u64,
    /// Cap on enumerated open sets and open subgroupoids.
    #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
    n_limit: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig { index_size: self.index_size, kmax: self.kmax, depth: self.depth, limit: self.limit, n_limit: self.n_limit }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the models and isomorphisms of a theory.
    Models {
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Logical topology on models and the sobriety round trip.
    Topology {
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Groupoid axioms, continuity and preimage identities.
    Groupoid {
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The definable sheaf of a formula in context, e.g. `[x,y] E(x,y)`.
    Sheaf {
        formula: String,
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Site objects for every open subgroupoid and their density certificates.
    Site {
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Counit comparison and triangle identities.
    Dualize {
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run one named suite.
    Check {
        /// Suite name; may also be given with `--suite`.
        name: Option<String>,
        theory: Option<PathBuf>,
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Full JSON report over every suite, or the ones named with `--suite`.
    Report {
        theory: PathBuf,
        #[arg(long)]
        suite: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, ParseError),
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn report(&self) -> u8 {
        let (kind, msg, code) = match self {
            Failure::Io(p, e) => ("io", format!("{}: {e}", p.display()), EXIT_IO),
            Failure::Parse(p, e) => ("parse", format!("{}: {e}", p.display()), EXIT_PARSE),
            Failure::Core(Error::Parse(e)) => ("parse", e.to_string(), EXIT_PARSE),
            Failure::Core(e @ Error::LimitExceeded { .. }) => ("limit", e.to_string(), EXIT_LIMIT),
            Failure::Core(e) => ("error", e.to_string(), EXIT_OTHER),
            Failure::Usage(m) => ("usage", m.clone(), EXIT_USAGE),
        };
        eprintln!("geodual: {kind}: {msg}");
        code
    }
}

type Outcome = Result<(Verdict, Value, String), Failure>;

fn load(path: &Path) -> Result<Theory, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
    parse_theory(&text).map_err(|e| Failure::Parse(path.to_path_buf(), e))
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn suite_text(r: &SuiteReport) -> String {
    let mut out = format!(
        "{}: {} (checked {}, gated {}, failed {})\n",
        r.suite,
        verdict_word(r.verdict),
        r.checked,
        r.gated,
        r.failed
    );
    for f in &r.failures {
        out.push_str(&format!("  failure: {f}\n"));
    }
    for g in &r.gated_examples {
        out.push_str(&format!("  gated: {g}\n"));
    }
    out
}

fn suites(reports: &[SuiteReport]) -> (Verdict, Value, String) {
    let verdict = combine(reports.iter().map(|r| r.verdict));
    let text = reports.iter().map(suite_text).collect();
    (verdict, serde_json::to_value(reports).expect("serializable"), text)
}

fn models(t: &Theory, cfg: &RunConfig) -> Outcome {
    let mc = ModelClass::build(t, cfg.index_size, cfg.limit)?;
    let mut text = format!("models: {}\nisomorphisms: {}\n", mc.len(), mc.isos.len());
    for m in &mc.models {
        text.push_str(&format!("  {}\n", m.label()));
    }
    let payload = json!({
        "models": mc.len(),
        "isomorphisms": mc.isos.len(),
        "structures": mc.models.iter().map(|m| m.to_json_value(&mc.sig)).collect::<Vec<_>>(),
    });
    Ok((Verdict::Pass, payload, text))
}

fn topology(t: &Theory, cfg: &RunConfig) -> Outcome {
    let mc = ModelClass::build(t, cfg.index_size, cfg.limit)?;
    let space = object_space(&mc);
    let opens = space.opens(cfg.n_limit)?.len();
    let sob = run_suite(Suite::Sobriety, t, cfg)?;
    let text = format!("points: {}\nopen sets: {}\nt0: {}\n{}", space.len(), opens, space.is_t0(), suite_text(&sob));
    let payload = json!({ "points": space.len(), "opens": opens, "t0": space.is_t0(), "sobriety": sob });
    Ok((sob.verdict, payload, text))
}

fn groupoid(t: &Theory, cfg: &RunConfig) -> Outcome {
    let reports = vec![run_suite(Suite::Algebra, t, cfg)?, run_suite(Suite::Preimages, t, cfg)?];
    let (verdict, value, text) = suites(&reports);
    let mg = build_model_groupoid(ModelClass::build(t, cfg.index_size, cfg.limit)?)?;
    let open = mg.g.is_open();
    let text = format!(
        "objects: {}\narrows: {}\nopen: {}\n{}",
        mg.g.num_objects(),
        mg.g.num_arrows(),
        open,
        text
    );
    Ok((verdict, json!({ "open_groupoid": open, "suites": value }), text))
}

fn sheaf(t: &Theory, formula: &str, cfg: &RunConfig) -> Outcome {
    let f = parse_formula_in_context(&t.sig, formula).map_err(|e| Failure::Parse(PathBuf::from("<formula>"), e))?;
    let mg = build_model_groupoid(ModelClass::build(t, cfg.index_size, cfg.limit)?)?;
    let ds = definable_sheaf(&mg, &f)?;
    let checks = ds.sheaf.check(&mg.g);
    let verdict = if checks.all() { Verdict::Pass } else { Verdict::Fail };
    let orbits = ds.sheaf.orbits(&mg.g).len();
    let fibres: Vec<usize> = (0..mg.g.num_objects()).map(|x| ds.sheaf.fibre(x).len()).collect();
    let printed = print_in_context(&t.sig, &ds.formula);
    let text = format!(
        "formula: {printed}\npoints: {}\norbits: {orbits}\nchecks: {}\n",
        ds.len(),
        verdict_word(verdict)
    );
    let payload = json!({ "formula": printed, "points": ds.len(), "orbits": orbits, "fibres": fibres, "checks": checks });
    Ok((verdict, payload, text))
}

fn site(t: &Theory, cfg: &RunConfig) -> Outcome {
    let mg = build_model_groupoid(ModelClass::build(t, cfg.index_size, cfg.limit)?)?;
    let subs = open_subgroupoids(&mg.g, cfg.n_limit)?;
    let mut sizes = Vec::new();
    for n in &subs {
        sizes.push(moerdijk_sheaf(&mg.g, n)?.len());
    }
    let density = run_suite(Suite::Density, t, cfg)?;
    let text = format!("open subgroupoids: {}\nsite elements: {}\n{}", subs.len(), sizes.iter().sum::<usize>(), suite_text(&density));
    let payload = json!({ "subgroupoids": subs.len(), "site_sizes": sizes, "density": density });
    Ok((density.verdict, payload, text))
}

fn dualize(t: &Theory, cfg: &RunConfig) -> Outcome {
    let (c, _, _) = counit(t, cfg.index_size, cfg.kmax, cfg.depth, cfg.limit)?;
    let tri = check_triangle_identities(t, cfg.index_size, cfg.kmax, cfg.limit)?;
    let verdict = combine([c.verdict, tri.verdict]);
    let mut text = String::new();
    for (k, (a, b)) in c.syntactic_objects.iter().zip(&c.form_objects).enumerate() {
        text.push_str(&format!("objects k={k}: {a} <-> {b}\n"));
    }
    text.push_str(&format!("arrows: {} <-> {}\n", c.syntactic_arrows, c.form_arrows));
    text.push_str(&format!("counit: {}\n", verdict_word(c.verdict)));
    text.push_str(&format!("triangles: {}\n", verdict_word(tri.verdict)));
    Ok((verdict, json!({ "counit": c, "triangles": tri }), text))
}

fn parse_suite(name: &str) -> Result<Suite, Failure> {
    name.parse().map_err(|e: Error| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (name, theory_path, common, outcome) = match cli.command {
        Command::Models { theory, common } => {
            let o = models(&load(&theory)?, &common.config());
            ("models", theory, common, o)
        }
        Command::Topology { theory, common } => {
            let o = topology(&load(&theory)?, &common.config());
            ("topology", theory, common, o)
        }
        Command::Groupoid { theory, common } => {
            let o = groupoid(&load(&theory)?, &common.config());
            ("groupoid", theory, common, o)
        }
        Command::Sheaf { formula, theory, common } => {
            let o = sheaf(&load(&theory)?, &formula, &common.config());
            ("sheaf", theory, common, o)
        }
        Command::Site { theory, common } => {
            let o = site(&load(&theory)?, &common.config());
            ("site", theory, common, o)
        }
        Command::Dualize { theory, common } => {
            let o = dualize(&load(&theory)?, &common.config());
            ("dualize", theory, common, o)
        }
        Command::Check { name, theory, suite, common } => {
            // `check --suite NAME FILE` leaves the file in the first slot.
            let (suite_name, theory) = match (suite, name, theory) {
                (Some(s), Some(f), None) => (s, PathBuf::from(f)),
                (None, Some(s), Some(f)) => (s, f),
                _ => return Err(Failure::Usage("expected `check SUITE FILE` or `check --suite SUITE FILE`".into())),
            };
            let s = parse_suite(&suite_name)?;
            let t = load(&theory)?;
            let o = run_suite(s, &t, &common.config()).map_err(Failure::from).map(|r| {
                let text = suite_text(&r);
                (r.verdict, serde_json::to_value(&r).expect("serializable"), text)
            });
            ("check", theory, common, o)
        }
        Command::Report { theory, suite, common } => {
            let chosen = if suite.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suite.iter().map(|s| parse_suite(s)).collect::<Result<Vec<_>, _>>()?
            };
            let t = load(&theory)?;
            let cfg = common.config();
            let (verdict, value) = full_report(&t, &cfg, &chosen)?;
            print!("{}", to_json_string(&value));
            return Ok(exit_code(verdict) as u8);
        }
    };
    let (verdict, payload, text) = outcome?;
    let t = load(&theory_path)?;
    match common.format {
        Format::Json => print!("{}", to_json_string(&envelope(name, &t, &common.config(), verdict, payload))),
        Format::Text => {
            print!("{text}");
            println!("verdict: {}", verdict_word(verdict));
        }
    }
    Ok(exit_code(verdict) as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => ExitCode::from(f.report()),
    }
}
