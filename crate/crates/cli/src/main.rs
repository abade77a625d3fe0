//! Batch front-end for the fusion library: lattice inspection, rule
//! application and pignistic projection over JSON model/bba files.

mod tables;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dsmt::{
    classical_pt, decide, dempster_combine, dsm_classic_combine, dsm_hybrid_combine, gpt,
    gpt_coefficients, pt_coefficients, singleton_candidates, verify_axioms, Error, FusionReport,
    LoadOptions, MassFunction, Model, ModelRef, PignisticDist,
};

use tables::{emit, lattice_table, TableKind, ALL_TABLES};

#[derive(Parser)]
#[command(
    name = "dsmt",
    version,
    about = "Evidence fusion over hyper-power sets",
    arg_required_else_help = true
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Dempster,
    DsmClassic,
    DsmHybrid,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Tables,
    Axioms,
}

#[derive(Args)]
struct ModelArgs {
    /// Frame size for the built-in models
    #[arg(long)]
    n: Option<u8>,
    /// "free", "shafer", or a path to a model file
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Source bba file
    #[arg(long)]
    bba: PathBuf,
    /// Restrict the report to these elements
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    /// Also print the weight fractions per target
    #[arg(long)]
    coefficients: bool,
    /// Also verify the probability axioms on the result
    #[arg(long)]
    check_axioms: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Print the model's element classes with region counts
    Lattice {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Region count of one element under a model
    Cardinality {
        #[command(flatten)]
        model: ModelArgs,
        /// Element expression, e.g. "(t1^t2)vt3"
        #[arg(long)]
        element: String,
    },
    /// Combine two or more bba files under one rule
    Combine {
        #[arg(long, value_enum)]
        rule: Rule,
        #[command(flatten)]
        model: ModelArgs,
        /// bba files, at least two
        #[arg(required = true, num_args = 2..)]
        bbas: Vec<PathBuf>,
        /// Write the combined bba here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print conflict and routing details to stderr
        #[arg(long)]
        report: bool,
    },
    /// Betting probabilities through the generalized transformation
    Gpt(ProjectArgs),
    /// Betting probabilities through the classical transformation
    Pt(ProjectArgs),
    /// Verify the probability axioms over random sources
    CheckAxioms {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        samples: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Diff the reference tables against committed fixtures
    Golden {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Rewrite the fixture files from current output
        #[arg(long, hide = true)]
        bless: bool,
    },
}

enum CliError {
    Core(Error),
    Msg(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Msg(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            // a fully conflicting combination is a domain failure, not
            // bad input
            CliError::Core(Error::FullContradiction) => 3,
            _ => 2,
        }
    }
}

fn msg(s: impl Into<String>) -> CliError {
    CliError::Msg(s.into())
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Resolves --model/--n. `None` means "take the model from the bba file".
fn load_model(args: &ModelArgs) -> CliResult<Option<ModelRef>> {
    let model = match args.model.as_deref() {
        None => match args.n {
            Some(n) => Some(Model::free(n)?),
            None => None,
        },
        Some("free") => {
            let n = args.n.ok_or_else(|| msg("--model free needs --n"))?;
            Some(Model::free(n)?)
        }
        Some("shafer") => {
            let n = args.n.ok_or_else(|| msg("--model shafer needs --n"))?;
            Some(Model::shafer(n)?)
        }
        Some(path) => {
            let m = Model::load(Path::new(path))?;
            if let Some(n) = args.n {
                if n != m.n() {
                    return Err(msg(format!(
                        "--n {n} does not match the {}-atom model in {path}",
                        m.n()
                    )));
                }
            }
            Some(m)
        }
    };
    Ok(model.map(Arc::new))
}

fn require_model(args: &ModelArgs) -> CliResult<ModelRef> {
    load_model(args)?.ok_or_else(|| msg("a model is required: pass --n and/or --model"))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.verb {
        Verb::Lattice { model } => {
            let model = require_model(&model)?;
            log::debug!("lattice over {model:?}");
            match cli.format {
                Format::Table => print!("{}", lattice_table(&model)),
                Format::Json => {
                    let rows: Vec<serde_json::Value> = std::iter::once(serde_json::json!({
                        "class": serde_json::Value::Null,
                        "element": "empty",
                        "cardinality": 0,
                    }))
                    .chain(model.survivors().iter().map(|s| {
                        serde_json::json!({
                            "class": s.index,
                            "element": s.representative.to_string(),
                            "cardinality": s.cardinality(),
                        })
                    }))
                    .collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&rows).expect("plain data")
                    );
                }
            }
            Ok(())
        }
        Verb::Cardinality { model, element } => {
            let model = require_model(&model)?;
            let e = model.parse(&element)?;
            let card = model.cardinality(e);
            match cli.format {
                Format::Table => println!("{e} {card}"),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "element": e.to_string(), "cardinality": card })
                ),
            }
            Ok(())
        }
        Verb::Combine {
            rule,
            model,
            bbas,
            out,
            report,
        } => run_combine(cli.format, rule, &model, &bbas, out.as_deref(), report),
        Verb::Gpt(args) => run_project(cli.format, &args, false),
        Verb::Pt(args) => run_project(cli.format, &args, true),
        Verb::CheckAxioms {
            model,
            samples,
            seed,
        } => run_check_axioms(cli.format, &model, samples, seed),
        Verb::Golden { suite, bless } => run_golden(suite, bless),
    }
}

fn load_sources(
    model_args: &ModelArgs,
    paths: &[PathBuf],
    options: LoadOptions,
) -> CliResult<Vec<MassFunction>> {
    let fallback = load_model(model_args)?;
    let mut sources = Vec::with_capacity(paths.len());
    for path in paths {
        let m = MassFunction::load(path, fallback.clone(), options)?;
        sources.push(m);
    }
    Ok(sources)
}

fn run_combine(
    format: Format,
    rule: Rule,
    model_args: &ModelArgs,
    paths: &[PathBuf],
    out: Option<&Path>,
    report: bool,
) -> CliResult<()> {
    // the hybrid rule is the one place where mass on emptied elements is
    // meaningful input: it is what gets rerouted
    let options = match rule {
        Rule::Dempster => LoadOptions::default(),
        Rule::DsmClassic | Rule::DsmHybrid => LoadOptions::lenient(),
    };
    let sources = load_sources(model_args, paths, options)?;
    log::debug!("combining {} sources", sources.len());
    let result: FusionReport = match rule {
        Rule::Dempster => dempster_combine(&sources)?,
        Rule::DsmClassic => dsm_classic_combine(&sources)?,
        Rule::DsmHybrid => dsm_hybrid_combine(&sources)?,
    };
    if let Some(k) = result.conflict {
        eprintln!("conflict: {k}");
    }
    if report {
        if let Some(breakdown) = &result.breakdown {
            eprintln!("{:<22} {:<22} {:<22} s3", "element", "s1", "s2");
            for b in breakdown {
                eprintln!(
                    "{:<22} {:<22} {:<22} {}",
                    b.element.to_string(),
                    b.s1,
                    b.s2,
                    b.s3
                );
            }
        }
    }
    let body = result.combined.to_file_body();
    let json = serde_json::to_string_pretty(&body).expect("plain data");
    match out {
        Some(path) => std::fs::write(path, json + "\n").map_err(Error::from)?,
        None => match format {
            Format::Json => println!("{json}"),
            Format::Table => {
                println!("{:<22} mass", "element");
                for (e, m) in result.combined.focal_elements() {
                    println!("{:<22} {}", e.to_string(), m);
                }
            }
        },
    }
    Ok(())
}

fn run_project(format: Format, args: &ProjectArgs, classical: bool) -> CliResult<()> {
    let fallback = load_model(&args.model)?;
    let m = MassFunction::load(&args.bba, fallback, LoadOptions::default())?;
    let model = Arc::clone(m.model());
    let p: PignisticDist = if classical {
        classical_pt(&m)?
    } else {
        gpt(&m)?
    };
    let targets: Vec<(String, dsmt::Element)> = if args.targets.is_empty() {
        p.entries()
            .iter()
            .map(|(e, _)| (e.to_string(), *e))
            .collect()
    } else {
        let mut list = Vec::with_capacity(args.targets.len());
        for t in &args.targets {
            list.push((t.clone(), model.parse(t)?));
        }
        list
    };
    let decision = decide(&p, &singleton_candidates(&model))?;
    let axioms = args.check_axioms.then(|| verify_axioms(&p, 1e-9));
    match format {
        Format::Table => {
            println!("{:<22} probability", "element");
            for (name, e) in &targets {
                println!("{:<22} {}", name, p.value(*e));
            }
            if args.coefficients {
                for (name, e) in &targets {
                    let table = if classical {
                        pt_coefficients(*e, &model)?
                    } else {
                        gpt_coefficients(*e, &model)
                    };
                    println!("weights toward {name}");
                    for row in &table.rows {
                        println!("  {:<20} {}", row.source.to_string(), row.fraction());
                    }
                }
            }
            if let Some(report) = &axioms {
                for check in &report.checks {
                    println!(
                        "axiom {:<26} {} (max deviation {})",
                        check.name,
                        if check.pass { "ok" } else { "BROKEN" },
                        check.max_deviation
                    );
                }
            }
            print!(
                "decision: {} (probability {})",
                decision.element, decision.probability
            );
            if decision.is_tie() {
                let tied: Vec<String> = decision.tied_with.iter().map(|e| e.to_string()).collect();
                print!(" tied with {}", tied.join(", "));
            }
            println!();
        }
        Format::Json => {
            let mut doc = serde_json::Map::new();
            let probs: serde_json::Map<String, serde_json::Value> = targets
                .iter()
                .map(|(name, e)| (name.clone(), p.value(*e).into()))
                .collect();
            doc.insert("probabilities".into(), probs.into());
            if args.coefficients {
                let mut coeffs = serde_json::Map::new();
                for (name, e) in &targets {
                    let table = if classical {
                        pt_coefficients(*e, &model)?
                    } else {
                        gpt_coefficients(*e, &model)
                    };
                    let rows: Vec<serde_json::Value> = table
                        .rows
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "source": r.source.to_string(),
                                "fraction": r.fraction(),
                            })
                        })
                        .collect();
                    coeffs.insert(name.clone(), rows.into());
                }
                doc.insert("coefficients".into(), coeffs.into());
            }
            if let Some(report) = &axioms {
                let checks: Vec<serde_json::Value> = report
                    .checks
                    .iter()
                    .map(|c| {
                        serde_json::json!({
                            "name": c.name,
                            "pass": c.pass,
                            "max_deviation": c.max_deviation,
                        })
                    })
                    .collect();
                doc.insert(
                    "axioms".into(),
                    serde_json::json!({ "pass": report.all_pass(), "checks": checks }),
                );
            }
            let tied: Vec<String> = decision.tied_with.iter().map(|e| e.to_string()).collect();
            doc.insert(
                "decision".into(),
                serde_json::json!({
                    "element": decision.element.to_string(),
                    "probability": decision.probability,
                    "tied_with": tied,
                }),
            );
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("plain data")
            );
        }
    }
    if let Some(report) = &axioms {
        if !report.all_pass() {
            return Err(msg("probability axioms violated"));
        }
    }
    Ok(())
}

fn run_check_axioms(
    format: Format,
    model_args: &ModelArgs,
    samples: u32,
    seed: u64,
) -> CliResult<()> {
    let model = require_model(model_args)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // worst deviation seen per axiom, across all sampled sources
    let mut worst: Vec<(&'static str, f64, bool)> = Vec::new();
    for _ in 0..samples {
        let m = MassFunction::random(&model, &mut rng);
        let p = gpt(&m)?;
        let report = verify_axioms(&p, 1e-9);
        for (i, check) in report.checks.iter().enumerate() {
            match worst.get_mut(i) {
                Some(slot) => {
                    slot.1 = slot.1.max(check.max_deviation);
                    slot.2 &= check.pass;
                }
                None => worst.push((check.name, check.max_deviation, check.pass)),
            }
        }
    }
    let all_pass = worst.iter().all(|&(_, _, pass)| pass);
    match format {
        Format::Table => {
            println!("{samples} random sources on {model:?}");
            for (name, dev, pass) in &worst {
                println!(
                    "axiom {:<26} {} (worst deviation {dev})",
                    name,
                    if *pass { "ok" } else { "BROKEN" }
                );
            }
        }
        Format::Json => {
            let checks: Vec<serde_json::Value> = worst
                .iter()
                .map(|(name, dev, pass)| {
                    serde_json::json!({ "name": name, "pass": pass, "worst_deviation": dev })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({ "samples": samples, "seed": seed, "pass": all_pass, "checks": checks })
            );
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(msg("probability axioms violated"))
    }
}

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run_golden(suite: Suite, bless: bool) -> CliResult<()> {
    match suite {
        Suite::Tables => {
            if bless {
                for kind in ALL_TABLES {
                    let path = fixtures_dir().join(format!("{}.txt", kind.name()));
                    std::fs::write(&path, emit(kind)).map_err(Error::from)?;
                    println!("wrote {}", path.display());
                }
                return Ok(());
            }
            let mut failed = Vec::new();
            for kind in ALL_TABLES {
                let want = kind.fixture();
                let got = emit(kind);
                if got == want {
                    println!("table {:<18} ok", kind.name());
                } else {
                    println!("table {:<18} DIFF", kind.name());
                    report_diff(kind, want, &got);
                    failed.push(kind.name());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(msg(format!("tables differ: {}", failed.join(", "))))
            }
        }
        Suite::Axioms => {
            let cases: [(&str, ModelRef); 6] = [
                ("free-2", Arc::new(Model::free(2)?)),
                ("free-3", Arc::new(Model::free(3)?)),
                ("shafer-2", Arc::new(Model::shafer(2)?)),
                ("shafer-3", Arc::new(Model::shafer(3)?)),
                ("hybrid-3", Arc::new(Model::build(3, &["t1^t3", "t2^t3"])?)),
                ("hybrid-2", Arc::new(Model::build(2, &["t1"])?)),
            ];
            let mut broken = Vec::new();
            for (name, model) in cases {
                let mut rng = ChaCha8Rng::seed_from_u64(0xA110);
                let mut worst = 0.0f64;
                let mut pass = true;
                for _ in 0..200 {
                    let m = MassFunction::random(&model, &mut rng);
                    let report = verify_axioms(&gpt(&m)?, 1e-9);
                    worst = worst.max(report.worst());
                    pass &= report.all_pass();
                }
                println!(
                    "axioms {:<10} {} (worst deviation {worst})",
                    name,
                    if pass { "ok" } else { "BROKEN" }
                );
                if !pass {
                    broken.push(name);
                }
            }
            if broken.is_empty() {
                Ok(())
            } else {
                Err(msg(format!("axioms broken on: {}", broken.join(", "))))
            }
        }
    }
}

fn report_diff(kind: TableKind, want: &str, got: &str) {
    for (i, (w, g)) in want.lines().zip(got.lines()).enumerate() {
        if w != g {
            eprintln!("{}: line {} differs", kind.name(), i + 1);
            eprintln!("  fixture: {w}");
            eprintln!("  current: {g}");
            return;
        }
    }
    eprintln!(
        "{}: line count differs (fixture {}, current {})",
        kind.name(),
        want.lines().count(),
        got.lines().count()
    );
}
