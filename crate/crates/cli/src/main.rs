//! `homramsey` — counting, coarsening and witness search for ordered
//! partitions, with an embedded SAT solver and DIMACS interop.

mod record;

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use homramsey_core::machinery::{
    b_to_t, compute_i0_n, s_approx, Approximation, GroundedApproximation, PartitionPrefix,
};
use homramsey_core::partition::{
    coarsenings_hom, count_all, count_hom, enumerate_all, enumerate_hom, OrderedPartition,
};
use homramsey_core::ramsey::{
    build_instance, search_drt, search_hdr, verify_coloring, BuildLimits, Coloring, Engine,
    InstanceParams, Mode, Outcome, RamseyInstance, SearchOptions, SearchReport, VerifyOutcome,
};
use homramsey_core::sat::to_dimacs;

use record::{persist, RunRecord};

const SOLVER_ENV: &str = "HOMRAMSEY_SOLVER";

#[derive(Parser)]
#[command(
    name = "homramsey",
    version,
    about = "Counting, coarsening and monochromatic-free coloring search over ordered partitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count k-partitions of {1..n}
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Homogeneous partitions only (classes of equal size)
        #[arg(long)]
        hom: bool,
    },
    /// List k-partitions of {1..n} in lexicographic order
    Enum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        hom: bool,
        /// Stop after this many partitions
        #[arg(long)]
        limit: Option<u64>,
    },
    /// List the homogeneous k-coarsenings of a partition
    Coarsen {
        /// Partition as a comma-separated label string, e.g. 1,2,3,4
        #[arg(long)]
        u: String,
        #[arg(long)]
        k: usize,
    },
    /// Approximation-calculus helpers
    Machinery {
        #[command(subcommand)]
        command: MachineryCommand,
    },
    /// Build a coarsening hypergraph and emit it as JSON
    Edges {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        hom: bool,
        #[arg(long, default_value_t = 2)]
        colors: u32,
        /// Output path ("-" for stdout, the default)
        #[arg(long)]
        out: Option<String>,
    },
    /// Encode bad-coloring existence as DIMACS CNF
    Encode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        colors: u32,
        #[arg(long)]
        hom: bool,
        /// Write the CNF here instead of stdout
        #[arg(long)]
        dimacs: Option<PathBuf>,
        /// Do not pin the first vertex to color 1
        #[arg(long)]
        no_symbreak: bool,
    },
    /// Scan candidate n for one admitting no bad coloring
    Search(SearchArgs),
    /// Check a coloring against freshly regenerated coarsening sets
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        colors: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Hom)]
        mode: ModeArg,
        /// File holding the coloring as a JSON array or comma-separated list
        #[arg(long)]
        coloring: PathBuf,
    },
}

#[derive(Subcommand)]
enum MachineryCommand {
    /// i-th approximation of a k-class prefix
    S {
        /// Prefix as a comma-separated label string
        #[arg(long)]
        x: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: usize,
    },
    /// Extension/restriction roundtrip for a base approximation and a partition
    Bij {
        /// Grounded approximation as JSON, e.g. [[1],[2]]
        #[arg(long)]
        a: String,
        /// Homogeneous partition as a label string
        #[arg(long)]
        t: String,
    },
    /// Depth at which the approximation excess becomes divisible by m
    I0 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    colors: u32,
    #[arg(long)]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Hom)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    /// Also try n = m before the proper candidates
    #[arg(long)]
    include_m: bool,
    /// Keep scanning past the first witness
    #[arg(long)]
    scan_all: bool,
    /// Accept external UNSAT verdicts without internal confirmation
    #[arg(long)]
    trust_external: bool,
    /// Do not pin the first vertex to color 1 in SAT encodings
    #[arg(long)]
    no_symbreak: bool,
    /// Append the run record here as JSON lines ("-" for stdout)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Hom,
    General,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Hom => Mode::Homogeneous,
            ModeArg::General => Mode::General,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Auto,
    Exhaustive,
    SatInternal,
    SatExternal,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Count { n, k, hom } => {
            let count = if hom {
                count_hom(n, k)?
            } else {
                count_all(n, k)?
            };
            println!("{count}");
        }
        Command::Enum { n, k, hom, limit } => {
            let iter: Box<dyn Iterator<Item = OrderedPartition>> = if hom {
                Box::new(enumerate_hom(n, k)?)
            } else {
                Box::new(enumerate_all(n, k)?)
            };
            let limit = limit.unwrap_or(u64::MAX);
            for p in iter.take(limit as usize) {
                println!("{p}");
            }
        }
        Command::Coarsen { u, k } => {
            let u: OrderedPartition = u.parse()?;
            for t in coarsenings_hom(&u, k)? {
                println!("{t}");
            }
        }
        Command::Machinery { command } => run_machinery(command)?,
        Command::Edges {
            n,
            k,
            m,
            hom,
            colors,
            out,
        } => {
            let mode = if hom {
                Mode::Homogeneous
            } else {
                Mode::General
            };
            let params = InstanceParams {
                n,
                k,
                m,
                colors,
                mode,
            };
            let inst = build_instance(params, &BuildLimits::default())?;
            let json = instance_json(&inst);
            match out.as_deref() {
                None | Some("-") => println!("{json}"),
                Some(path) => {
                    fs::write(path, format!("{json}\n"))
                        .with_context(|| format!("writing {path}"))?;
                    println!(
                        "wrote {path}: {} vertices, {} edges",
                        inst.vertices().len(),
                        inst.edges().len()
                    );
                }
            }
        }
        Command::Encode {
            n,
            k,
            m,
            colors,
            hom,
            dimacs,
            no_symbreak,
        } => {
            let mode = if hom {
                Mode::Homogeneous
            } else {
                Mode::General
            };
            let params = InstanceParams {
                n,
                k,
                m,
                colors,
                mode,
            };
            let inst = build_instance(params, &BuildLimits::default())?;
            let formula = homramsey_core::ramsey::encode_sat(&inst, !no_symbreak);
            let text = to_dimacs(&formula, &dimacs_comments(&inst, !no_symbreak));
            match dimacs {
                None => print!("{text}"),
                Some(path) => {
                    fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!(
                        "wrote {}: {} vars, {} clauses",
                        path.display(),
                        formula.num_vars(),
                        formula.num_clauses()
                    );
                }
            }
        }
        Command::Search(args) => run_search(args)?,
        Command::Verify {
            n,
            k,
            m,
            colors,
            mode,
            coloring,
        } => {
            let mode: Mode = mode.into();
            let params = InstanceParams {
                n,
                k,
                m,
                colors,
                mode,
            };
            let inst = build_instance(params, &BuildLimits::default())?;
            let text = fs::read_to_string(&coloring)
                .with_context(|| format!("reading {}", coloring.display()))?;
            let coloring = parse_coloring(&text)?;
            match verify_coloring(&inst, &coloring)? {
                VerifyOutcome::Ok => match mode {
                    Mode::Homogeneous => println!("OK: no monochromatic (u)^k_hom"),
                    Mode::General => println!("OK: no monochromatic (u)^k"),
                },
                VerifyOutcome::Violation { u_rank, color } => {
                    println!("Violation: u rank {u_rank} is monochromatic in color {color}");
                }
            }
        }
    }
    Ok(())
}

fn run_machinery(command: MachineryCommand) -> Result<()> {
    match command {
        MachineryCommand::S { x, k, i } => {
            let labels = homramsey_core::partition::parse_labels(&x)?;
            let prefix = PartitionPrefix::finite(labels, k)?;
            println!("{}", s_approx(&prefix, i)?);
        }
        MachineryCommand::Bij { a, t } => {
            let a = GroundedApproximation::try_from(Approximation::from_json(&a)?)?;
            let t: OrderedPartition = t.parse()?;
            let b = homramsey_core::machinery::t_to_b(&t, &a)?;
            println!("b={b}");
            println!("t={}", b_to_t(&b, &a)?);
        }
        MachineryCommand::I0 { k, m } => {
            // a concrete prefix only fixes the base; the depth is the same
            // for every k-class prefix
            let pattern: Vec<u32> = (0..k * 2).map(|i| i % k + 1).collect();
            let prefix = PartitionPrefix::finite(pattern, k)?;
            let (i0, n) = compute_i0_n(&prefix, m)?;
            println!("i0={i0} n={n}");
        }
    }
    Ok(())
}

fn run_search(args: SearchArgs) -> Result<()> {
    let engine = match args.engine {
        EngineArg::Auto => Engine::Auto,
        EngineArg::Exhaustive => Engine::Exhaustive,
        EngineArg::SatInternal => Engine::SatInternal,
        EngineArg::SatExternal => {
            let path = std::env::var(SOLVER_ENV).map_err(|_| {
                anyhow!("--engine sat-external needs the {SOLVER_ENV} environment variable")
            })?;
            Engine::SatExternal {
                solver: PathBuf::from(path),
            }
        }
    };
    let solver_id = match &engine {
        Engine::SatExternal { solver } => solver.display().to_string(),
        _ => "builtin-dpll".to_string(),
    };
    let opts = SearchOptions {
        engine,
        include_m: args.include_m,
        scan_all: args.scan_all,
        trust_external: args.trust_external,
        symmetry_break: !args.no_symbreak,
        ..SearchOptions::default()
    };
    let mode: Mode = args.mode.into();
    let report = match mode {
        Mode::Homogeneous => search_hdr(args.k, args.m, args.colors, args.max_n, &opts)?,
        Mode::General => search_drt(args.k, args.m, args.colors, args.max_n, &opts)?,
    };
    print_report(&report);
    if let Some(path) = &args.out {
        let params = serde_json::json!({
            "k": args.k,
            "m": args.m,
            "colors": args.colors,
            "max_n": args.max_n,
            "mode": mode,
            "include_m": args.include_m,
            "scan_all": args.scan_all,
            "symmetry_break": !args.no_symbreak,
        });
        let record = RunRecord::new(
            "search",
            params,
            report.engine.clone(),
            solver_id,
            report.clone(),
        );
        persist(&record, path)?;
    }
    Ok(())
}

fn print_report(report: &SearchReport) {
    for outcome in &report.outcomes {
        let status = match &outcome.outcome {
            Outcome::BadColoring { verified, .. } => {
                if *verified {
                    "bad coloring found (verified)".to_string()
                } else {
                    "bad coloring found (FAILED VERIFICATION)".to_string()
                }
            }
            Outcome::NoBadColoring { method } => format!("no bad coloring ({method})"),
            Outcome::ResourceLimit { kind } => format!("resource limit ({kind})"),
        };
        println!(
            "n={}: {status} [{} vertices, {} edges, {} ms]",
            outcome.n, outcome.vertices, outcome.edges, outcome.elapsed_ms
        );
    }
    match report.witness_n {
        Some(n) => println!("witness: n={n}"),
        None => println!("witness: none up to n={}", report.max_n),
    }
}

fn instance_json(inst: &RamseyInstance) -> String {
    let p = inst.params();
    serde_json::json!({
        "n": p.n,
        "k": p.k,
        "m": p.m,
        "colors": p.colors,
        "mode": p.mode,
        "vertices": inst.vertices().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "edges": inst.edges(),
        "edge_sources": inst.edge_sources(),
    })
    .to_string()
}

fn dimacs_comments(inst: &RamseyInstance, symmetry_break: bool) -> Vec<String> {
    let p = inst.params();
    let colors = p.colors as usize;
    let mut comments = vec![format!(
        "homramsey instance n={} k={} m={} colors={} mode={} symbreak={}",
        p.n,
        p.k,
        p.m,
        p.colors,
        p.mode,
        if symmetry_break { "on" } else { "off" }
    )];
    if colors == 2 {
        comments.push("variables: vertex v (0-based rank) is variable v+1; true = color 1".into());
    } else {
        comments.push(format!(
            "variables: vertex v (0-based rank) with color c (1-based) is variable v*{colors}+c"
        ));
    }
    for (rank, vertex) in inst.vertices().iter().enumerate() {
        if colors == 2 {
            comments.push(format!("vertex {rank} = {vertex} var {}", rank + 1));
        } else {
            comments.push(format!(
                "vertex {rank} = {vertex} vars {}..{}",
                rank * colors + 1,
                rank * colors + colors
            ));
        }
    }
    comments
}

fn parse_coloring(text: &str) -> Result<Coloring> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        let colors: Vec<u32> =
            serde_json::from_str(trimmed).context("parsing coloring as a JSON array")?;
        return Ok(Coloring(colors));
    }
    let colors = trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<u32>()
                .with_context(|| format!("parsing coloring token {tok:?}"))
        })
        .collect::<Result<Vec<u32>>>()?;
    if colors.is_empty() {
        bail!("coloring file is empty");
    }
    Ok(Coloring(colors))
}
