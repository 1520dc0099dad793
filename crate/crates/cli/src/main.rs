//! `tirscan` — batch crypto-API misuse analysis over TIR programs.
//!
//! Exit codes: 0 no findings, 1 findings at or above `--fail-on`, 2 error.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tirscan_core::bench::{self, BenchConfig};
use tirscan_core::callgraph::build_call_graph;
use tirscan_core::ir::{parse_program_named, Program};
use tirscan_core::report::{emit_json, emit_text, list_rules, run, Inputs, RunConfig};
use tirscan_core::rules::Severity;
use tirscan_core::slice::{inter_backward_slices, SlicerConfig, SlicingCriterion};

#[derive(Parser)]
#[command(name = "tirscan", version, about = "Crypto API misuse analyzer for TIR programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze TIR files or a subproject manifest.
    Analyze(AnalyzeArgs),
    /// Run the benchmark corpus and print the score report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// TIR input files (alternative to --manifest).
    files: Vec<PathBuf>,

    /// Subproject manifest describing the dependency DAG.
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Rule subset, e.g. `1,4-7,16`.
    #[arg(long, value_name = "LIST")]
    rules: Option<String>,

    /// Orthogonal-invocation exploration depth.
    #[arg(long, default_value_t = 1)]
    depth: u32,

    /// Disable the refinement passes (report raw candidates).
    #[arg(long)]
    no_refine: bool,

    /// Print per-pass removal counts.
    #[arg(long)]
    refine_breakdown: bool,

    /// Parallel root analyses bound.
    #[arg(long, env = "ANALYZER_JOBS")]
    jobs: Option<usize>,

    /// Per-root time budget in seconds; expired roots report partial results.
    #[arg(long, value_name = "SECONDS")]
    budget: Option<u64>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Severity threshold for exit code 1.
    #[arg(long, value_enum, default_value_t = FailOn::L)]
    fail_on: FailOn,

    /// Also check checkClientTrusted implementations (rule 5).
    #[arg(long)]
    client_trusted: bool,

    /// Dump the call graph (one line per resolved edge) and exit.
    #[arg(long)]
    dump_callgraph: bool,

    /// Dump stitched slices for a criterion, `<owner>#<method>#<argIndex>`.
    #[arg(long, value_name = "CRITERION")]
    dump_slice: Option<String>,

    /// Print the rule registry and exit.
    #[arg(long)]
    list_rules: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Corpus directory (contains `basic/` and `advanced/`).
    corpus: PathBuf,

    #[arg(long, default_value_t = 1)]
    depth: u32,

    #[arg(long, value_name = "LIST")]
    rules: Option<String>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[arg(long, env = "ANALYZER_JOBS")]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FailOn {
    H,
    M,
    L,
}

impl From<FailOn> for Severity {
    fn from(f: FailOn) -> Severity {
        match f {
            FailOn::H => Severity::H,
            FailOn::M => Severity::M,
            FailOn::L => Severity::L,
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Analyze(args) => analyze(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn analyze(args: AnalyzeArgs) -> ExitCode {
    if args.list_rules {
        print!("{}", list_rules());
        return ExitCode::SUCCESS;
    }
    let rules = match parse_rule_list(args.rules.as_deref()) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let inputs = match (&args.manifest, args.files.is_empty()) {
        (Some(m), _) => Inputs::Manifest(m.clone()),
        (None, false) => Inputs::Files(args.files.clone()),
        (None, true) => return fail("no inputs: pass TIR files or --manifest"),
    };

    if args.dump_callgraph || args.dump_slice.is_some() {
        return dump_mode(&args, &inputs);
    }

    let config = RunConfig {
        inputs,
        rules,
        depth: args.depth,
        refinements: !args.no_refine,
        jobs: args.jobs,
        budget: args.budget.map(Duration::from_secs),
        fail_on: args.fail_on.into(),
        check_client_trusted: args.client_trusted,
    };
    match run(&config) {
        Ok(report) => {
            match args.format {
                Format::Text => print!("{}", emit_text(&report, args.refine_breakdown)),
                Format::Json => print!("{}", emit_json(&report)),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => fail(e),
    }
}

/// Debug dumps work on the merged program of the plain-file inputs.
fn dump_mode(args: &AnalyzeArgs, inputs: &Inputs) -> ExitCode {
    let program = match load_program(inputs) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let graph = build_call_graph(&program);
    if args.dump_callgraph {
        print!("{}", graph.dump());
    }
    if let Some(spec) = &args.dump_slice {
        let parts: Vec<&str> = spec.split('#').collect();
        let [owner, name, index] = parts.as_slice() else {
            return fail("criterion must be <owner>#<method>#<argIndex>");
        };
        let Ok(index) = index.parse::<usize>() else {
            return fail("argIndex must be a number");
        };
        let cfg = SlicerConfig::with_depth(args.depth);
        let mut found = false;
        for (site_idx, site) in graph.sites.iter().enumerate() {
            let _ = site_idx;
            if site.callee.owner == *owner && site.callee.name == *name {
                let criterion = SlicingCriterion::InterParam {
                    caller: site.caller.clone(),
                    instruction_index: site.instruction_index,
                    param_indices: BTreeSet::from([index]),
                };
                for (i, slice) in
                    inter_backward_slices(&graph, &program, &criterion, &cfg).iter().enumerate()
                {
                    println!("criterion {} @{}:{} chain {}", site.callee, site.caller, site.line, i);
                    print!("{}", slice.dump());
                }
                found = true;
            }
        }
        if !found {
            eprintln!("no call sites of {owner}#{name}");
        }
    }
    ExitCode::SUCCESS
}

fn load_program(inputs: &Inputs) -> Result<Program, String> {
    match inputs {
        Inputs::Files(files) => {
            let mut program = Program::default();
            for file in files {
                let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
                let parsed =
                    parse_program_named(&text, &file.to_string_lossy()).map_err(|e| e.to_string())?;
                program.merge(parsed)?;
            }
            Ok(program)
        }
        Inputs::Manifest(path) => {
            let manifest = tirscan_core::project::parse_manifest(path).map_err(|e| e.to_string())?;
            let dag = tirscan_core::project::build_dag(&manifest).map_err(|e| e.to_string())?;
            let mut program = Program::default();
            for root in tirscan_core::project::root_subprojects(&manifest, &dag) {
                let p = tirscan_core::project::classes_for_root(&manifest, &dag, &root)
                    .map_err(|e| e.to_string())?;
                for (name, class) in p.classes {
                    program.classes.entry(name).or_insert(class);
                }
            }
            Ok(program)
        }
    }
}

fn run_bench(args: BenchArgs) -> ExitCode {
    let rules = match parse_rule_list(args.rules.as_deref()) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let config = BenchConfig { rules, depth: args.depth, refinements: true, jobs: args.jobs };
    match bench::run_bench(&args.corpus, &config) {
        Ok(report) => {
            match args.format {
                Format::Text => print!("{}", bench::emit_text(&report)),
                Format::Json => print!("{}", bench::emit_json(&report)),
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

/// `1,4-7,16` → {1,4,5,6,7,16}; empty means all rules.
fn parse_rule_list(list: Option<&str>) -> Result<BTreeSet<u8>, String> {
    let Some(list) = list else {
        return Ok((1..=16).collect());
    };
    let mut rules = BTreeSet::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u8 = a.trim().parse().map_err(|_| format!("bad rule `{part}`"))?;
                let b: u8 = b.trim().parse().map_err(|_| format!("bad rule `{part}`"))?;
                if a > b || a < 1 || b > 16 {
                    return Err(format!("bad rule range `{part}`"));
                }
                rules.extend(a..=b);
            }
            None => {
                let r: u8 = part.parse().map_err(|_| format!("bad rule `{part}`"))?;
                if !(1..=16).contains(&r) {
                    return Err(format!("rule `{r}` out of range 1..=16"));
                }
                rules.insert(r);
            }
        }
    }
    if rules.is_empty() {
        return Err("empty rule list".into());
    }
    Ok(rules)
}

