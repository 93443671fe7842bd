//! `henkin`: run staged constructions, audit and replay their logs, and
//! query the finitary analyses.
//!
//! Exit codes: 0 success, 1 audit or analysis failure (report printed),
//! 2 usage, parse or IO error.

mod omit;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use num_bigint::BigUint;
use clap::{Args, Parser, Subcommand};

use henkin_core::analysis::{self, RankValue, TermFamily};
use henkin_core::fmac::{self, Fmac, Node, PointPrefix};
use henkin_core::logic::{parse_formula, FiniteStructure};
use henkin_core::oracle;
use henkin_core::providers::provider_by_name;
use henkin_core::scheduler::{self, AuditMode, AuditOptions, ConstructionLog, RunConfig};

/// Fixed default so runs without --seed are reproducible.
const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "henkin", version, about = "Staged Henkin constructions over finite maximal antichains")]
struct Cli {
    /// Suppress progress lines; reports are always printed.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a construction and write its log.
    Construct(ConstructArgs),
    /// Quotient structure on the symbols over the given points at a stage.
    Materialize {
        #[arg(long)]
        log: PathBuf,
        /// Step index (0-based) to replay through.
        #[arg(long)]
        stage: usize,
        /// Comma-separated point prefixes, e.g. 00,01.
        #[arg(long)]
        points: String,
    },
    /// Replay a log and run one audit, or all applicable ones.
    Audit {
        #[arg(long)]
        log: PathBuf,
        /// An audit name or `all`.
        #[arg(long, default_value = "all")]
        mode: String,
        /// Require y-symbol witnesses for non-empty supports.
        #[arg(long)]
        strict_y: bool,
        /// Sampling seed for the atomic and exchange audits.
        #[arg(long, env = "HENKIN_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Antichain utilities.
    #[command(subcommand)]
    Fmac(FmacCmd),
    /// Finitary analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
}

#[derive(Args)]
struct ConstructArgs {
    /// pure-set, random-graph, unary-generic or vector-f2.
    #[arg(long)]
    provider: String,
    #[arg(long)]
    rounds: usize,
    #[arg(long, env = "HENKIN_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Types to omit: `unary PREFIX BOUND` lines, or δ formulas grouped under `type`.
    #[arg(long)]
    omit: Option<PathBuf>,
    /// Also commit to the full atomic type of every window tuple.
    #[arg(long)]
    atomic: bool,
    /// Largest template arity.
    #[arg(long, default_value_t = 2)]
    arity: usize,
    /// Henkin lag; the provider's default if omitted.
    #[arg(long)]
    lag: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum FmacCmd {
    /// Check that a node list is a finite maximal antichain.
    Validate { nodes: String },
    /// Does every node of A have an extension in B?
    Covers { a: String, b: String },
    /// Count, and with --list print, the liftings from A to B.
    Liftings {
        a: String,
        b: String,
        #[arg(long)]
        list: bool,
    },
    /// Split A at a node.
    Split { a: String, node: String },
    /// The node of A below a point prefix.
    Project { a: String, prefix: String },
    /// A chain of single splittings from A to B.
    Factor { a: String, b: String },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Similarity threshold of a formula and its verification.
    Sim {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Boxes on which a formula is decided true at the end of a round.
    Clopen {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        formula: String,
        /// Round number.
        #[arg(long)]
        stage: usize,
        /// Also print the exact measure.
        #[arg(long)]
        measure: bool,
    },
    /// Splitting rank of a set in a finite structure.
    Sprk {
        #[arg(long = "struct")]
        structure: PathBuf,
        /// Comma-separated element names.
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 8)]
        cap: usize,
    },
    /// E_n classes of distinct n-tuples.
    En {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long)]
        terms: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Γ instantiated over 2^depth, optionally searched for in a structure.
    Gamma {
        #[arg(long)]
        terms: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        search_struct: Option<PathBuf>,
        /// Search node budget.
        #[arg(long, default_value_t = 1_000_000)]
        bound: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_log(path: &Path) -> Result<ConstructionLog> {
    ConstructionLog::parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn read_structure(path: &Path) -> Result<FiniteStructure> {
    FiniteStructure::parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn fm(s: &str) -> Result<Fmac> {
    s.parse().map_err(|e| anyhow!("{s}: {e}"))
}

fn node(s: &str) -> Result<Node> {
    s.parse().map_err(|e| anyhow!("{s}: {e}"))
}

fn progress(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", msg.as_ref());
    }
}

fn verdict(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

fn construct(a: ConstructArgs, quiet: bool) -> Result<u8> {
    let mut p = provider_by_name(&a.provider, a.seed).map_err(|e| anyhow!("{e}"))?;
    let mut cfg = RunConfig::new(a.rounds, a.seed);
    cfg.arity = a.arity;
    cfg.lag = a.lag;
    cfg.atomic = a.atomic;
    if let Some(path) = &a.omit {
        cfg.omit = omit::parse(&read(path)?, p.signature()).with_context(|| format!("{}", path.display()))?;
    }
    // fail on an unwritable path before the run
    fs::write(&a.out, "").with_context(|| format!("cannot write {}", a.out.display()))?;
    progress(quiet, format!("constructing {} for {} rounds, seed {}", a.provider, a.rounds, a.seed));
    let (log, failure) = match scheduler::run(p.as_mut(), &cfg) {
        Ok(log) => (log, None),
        Err(e) => (*e.log.clone(), Some(e)),
    };
    fs::write(&a.out, log.to_text()).with_context(|| format!("cannot write {}", a.out.display()))?;
    match failure {
        None => {
            let f = log.final_fmac().map(|f| f.to_string()).unwrap_or_default();
            println!("construct ok steps {} fmac {f}", log.step_count());
            Ok(0)
        }
        Some(e) => {
            println!("construct FAIL {e}");
            println!("partial log with {} steps written to {}", log.step_count(), a.out.display());
            Ok(1)
        }
    }
}

fn materialize(log: &Path, stage: usize, points: &str) -> Result<u8> {
    let log = read_log(log)?;
    let pts = points
        .split(',')
        .map(|p| p.trim().parse::<PointPrefix>().map_err(|e| anyhow!("{p}: {e}")))
        .collect::<Result<Vec<_>>>()?;
    let q = scheduler::materialize(&log, stage, &pts)?;
    print!("{}", q.structure.to_text());
    for (v, e) in &q.class_of {
        println!("# {v} = {}", q.structure.name(*e));
    }
    for u in &q.undecided {
        println!("# undecided {u}");
    }
    for s in &q.skipped {
        println!("# skipped {s}");
    }
    Ok(0)
}

fn audit(log: &Path, mode: &str, strict_y: bool, seed: u64, quiet: bool) -> Result<u8> {
    let log = read_log(log)?;
    let closure = oracle::by_name(&log.header.provider, log.header.seed)
        .map_err(|e| anyhow!("{e}"))?
        .as_closure()
        .is_some();
    let modes = match mode {
        "all" => AuditMode::applicable(&log, closure),
        m => vec![AuditMode::parse(m).ok_or_else(|| {
            let names: Vec<&str> = AuditMode::ALL.iter().map(|m| m.as_str()).collect();
            anyhow!("unknown audit mode {m:?}; expected all or one of {}", names.join(", "))
        })?],
    };
    let opts = AuditOptions { strict_y, seed, ..AuditOptions::default() };
    let mut ok = true;
    for m in modes {
        progress(quiet, format!("auditing {}", m.as_str()));
        let r = scheduler::audit(&log, m, &opts)?;
        ok &= r.passed();
        println!("{r}");
    }
    Ok(verdict(ok))
}

fn fmac_cmd(c: FmacCmd) -> Result<u8> {
    match c {
        FmacCmd::Validate { nodes } => {
            let ns = nodes.split(',').map(|s| node(s.trim())).collect::<Result<Vec<_>>>()?;
            match Fmac::validate(ns) {
                Ok(f) => println!("valid {f}"),
                Err(e) => {
                    println!("invalid {e}");
                    return Ok(1);
                }
            }
        }
        FmacCmd::Covers { a, b } => {
            let ok = fmac::covers(&fm(&a)?, &fm(&b)?);
            println!("{ok}");
            return Ok(verdict(ok));
        }
        FmacCmd::Liftings { a, b, list } => {
            let (a, b) = (fm(&a)?, fm(&b)?);
            println!("count {}", fmac::lifting_count(&a, &b)?);
            if list {
                for h in fmac::enumerate_liftings(&a, &b)? {
                    println!("{h}");
                }
            }
        }
        FmacCmd::Split { a, node: n } => {
            let (g, h0, h1) = fmac::split_at(&fm(&a)?, &node(&n)?)?;
            println!("fmac {g}\nh0 {h0}\nh1 {h1}");
        }
        FmacCmd::Project { a, prefix } => {
            let p: PointPrefix = prefix.parse().map_err(|e| anyhow!("{prefix}: {e}"))?;
            println!("{}", fmac::project(&fm(&a)?, &p)?);
        }
        FmacCmd::Factor { a, b } => {
            for (f, n) in fmac::factor_cover(&fm(&a)?, &fm(&b)?)? {
                println!("split {n} -> {f}");
            }
        }
    }
    Ok(0)
}

fn analyze(c: AnalyzeCmd) -> Result<u8> {
    match c {
        AnalyzeCmd::Sim { log, formula } => {
            let log = read_log(&log)?;
            let f = parse_formula(&formula, &log.header.full_signature())?;
            let r = analysis::similarity_threshold(&log, &f)?;
            println!("{r}");
            Ok(verdict(r.passed()))
        }
        AnalyzeCmd::Clopen { log, formula, stage, measure } => {
            let log = read_log(&log)?;
            let f = parse_formula(&formula, &log.header.full_signature())?;
            let s = match analysis::clopen_decomposition(&log, &f, stage) {
                Ok(s) => s,
                Err(e @ analysis::AnalysisError::Undecided { .. }) => {
                    println!("undecided {e}");
                    return Ok(1);
                }
                Err(e) => return Err(e.into()),
            };
            print!("{s}");
            if measure {
                println!("measure {}", analysis::measure(&s));
                println!("truncation-total {}", analysis::truncation_total(s.arity, s.index_bound));
            }
            Ok(0)
        }
        AnalyzeCmd::Sprk { structure, set, cap } => {
            let m = read_structure(&structure)?;
            let b = set
                .split(',')
                .map(|e| m.elem(e.trim()).ok_or_else(|| anyhow!("no element {e:?} in the structure")))
                .collect::<Result<Vec<_>>>()?;
            match analysis::sprk(&m, &b, cap) {
                Ok(r) => {
                    print!("{}", r.to_text(&m));
                    Ok(verdict(r.value != RankValue::BaseFail))
                }
                Err(e @ analysis::AnalysisError::CapTooSmall(_)) => {
                    println!("rank unknown: {e}");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        AnalyzeCmd::En { structure, terms, n } => {
            let m = read_structure(&structure)?;
            let fam = TermFamily::parse(&read(&terms)?)?;
            let p = analysis::en_partition(&m, &fam, n)?;
            print!("{}", p.to_text(&m));
            Ok(verdict(num_within(&p)))
        }
        AnalyzeCmd::Gamma { terms, depth, search_struct, bound } => {
            let fam = TermFamily::parse(&read(&terms)?)?;
            let g = analysis::gamma_instantiate(&fam, depth);
            println!("formulas {}", g.len());
            for f in &g {
                println!("{f}");
            }
            let Some(path) = search_struct else { return Ok(0) };
            let m = read_structure(&path)?;
            match analysis::splitting_chain_search(&m, &fam, depth, bound) {
                Ok(Some(r)) => {
                    print!("found\n{}", r.to_text(&m));
                    let bad = analysis::check_gamma(&m, &g, &r.assignment)?;
                    println!("gamma {}", if bad.is_none() { "pass" } else { "FAIL" });
                    Ok(verdict(bad.is_none()))
                }
                Ok(None) => {
                    println!("not-found");
                    Ok(1)
                }
                Err(e @ analysis::AnalysisError::SearchSpaceExceeded(_)) => {
                    println!("not-found {e}");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn num_within(p: &analysis::EnPartition) -> bool {
    BigUint::from(p.classes.len()) <= p.bound
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Construct(a) => construct(a, cli.quiet),
        Cmd::Materialize { log, stage, points } => materialize(&log, stage, &points),
        Cmd::Audit { log, mode, strict_y, seed } => audit(&log, &mode, strict_y, seed, cli.quiet),
        Cmd::Fmac(c) => fmac_cmd(c),
        Cmd::Analyze(c) => analyze(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
