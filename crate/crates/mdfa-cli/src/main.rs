//! Command-line front end: JSON instances in, a JSON result on standard
//! output, exit codes for scripting.
//!
//! Exit codes: 0 = satisfied / exists / success, 1 = violated / does not
//! exist, 2 = undecided (a resource cap fired), 64 = usage error,
//! 65 = input file error.

mod files;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mdfa::allocate::{
    allocate_n_agents, allocate_two_agents, allocate_two_agents_identical, AllocError,
    AllocatorResult,
};
use mdfa::decide::{exists_strong_with, exists_weak_with, DecideError, DeciderLimits, Decision};
use mdfa::generators::{
    diagonal_instance, hadamard_instance, no_strong_sef1_instance, no_weak_sef1_instance,
    random_instance, reduce_3dm, reduce_mnae3sat, reduce_partition, NaeFormula, PartitionSource,
    ThreeDmSource,
};
use mdfa::oracle::{
    oracle_exists_with, oracle_verify_strong_with, oracle_verify_weak_with, OracleBudget,
    OracleError, OracleOptions,
};
use mdfa::verify::{verify_strong_with, verify_weak, SearchLimits, VerifyError, VerifyOutcome};
use mdfa::{Allocation, FairnessQuery, Instance, Notion};

use files::{Answer, Counters, QueryEcho, ResultFile};

const EXIT_UNDECIDED: i32 = 2;
const EXIT_USAGE: i32 = 64;
const EXIT_PARSE: i32 = 65;

#[derive(Parser)]
#[command(
    name = "mdfa",
    version,
    about = "Verify, decide, and construct multi-dimensionally fair allocations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for random generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the oracle's allocation scan.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Cap on decider dynamic-program states; exceeding it reports
    /// "undecided" instead of an answer.
    #[arg(long, global = true)]
    state_cap: Option<u64>,
    /// Cap on exhaustive-search steps (verifier search nodes, oracle scans);
    /// exceeding it reports "undecided".
    #[arg(long, global = true)]
    node_cap: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check one allocation file against a fairness query.
    Verify {
        instance: PathBuf,
        allocation: PathBuf,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long)]
        c: usize,
    },
    /// Decide whether any allocation satisfies the query.
    Exists {
        instance: PathBuf,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long)]
        c: usize,
        /// "dp" runs the layered decision procedure, "oracle" scans every
        /// allocation; they must agree.
        #[arg(long, value_enum, default_value_t = EngineArg::Dp)]
        engine: EngineArg,
    },
    /// Construct an allocation with a proven strong guarantee; the result
    /// is re-verified before the command reports success.
    Allocate {
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// Write instance files for the bundled constructions and reductions.
    #[command(subcommand)]
    Generate(GenerateKind),
    /// Exhaustive scans, kept deliberately independent of the solver path.
    #[command(subcommand)]
    Oracle(OracleProbe),
}

#[derive(Clone, Copy, ValueEnum)]
enum NotionArg {
    Weak,
    Strong,
}

impl NotionArg {
    fn notion(self) -> Notion {
        match self {
            NotionArg::Weak => Notion::Weak,
            NotionArg::Strong => Notion::Strong,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EngineArg {
    Dp,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    TwoAgent,
    TwoAgentIdentical,
    NAgent,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Three items over three dimensions; no weak sEF1 allocation exists.
    NoWeakSef1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three items over two dimensions; weak sEF1 holds somewhere but
    /// strong sEF1 nowhere.
    NoStrongSef1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 2c+1 unit items, one per dimension; strong sEFc is impossible.
    Diagonal {
        #[arg(long)]
        c: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary rows of an orthogonal design; weak sEFc is impossible.
    Hadamard {
        #[arg(long)]
        c: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random instance (values uniform in 0..=v-max).
    Random {
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        dimensions: usize,
        #[arg(long, default_value_t = 9)]
        v_max: u64,
        #[arg(long)]
        identical: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a number-partitioning input; a strong sEF1 allocation exists
    /// iff the weights split into two equal halves.
    ReducePartition {
        /// Comma-separated weights, e.g. --a 3,1,1,1. Their sum must be even.
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a monotone not-all-equal 3-SAT formula; a weak sEF1 allocation
    /// exists iff some assignment splits every clause.
    ReduceMnae3sat {
        /// Number of variables; clause entries index into 0..vars.
        #[arg(long)]
        vars: usize,
        /// Repeatable: one clause as three comma-separated variable indices.
        #[arg(long = "clause", required = true)]
        clauses: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a three-dimensional matching input; the emitted allocation
    /// verifies as strong sEFc at c = triplets - ground iff a perfect
    /// matching exists.
    #[command(name = "reduce-3dm")]
    Reduce3dm {
        /// Ground-set size of each of the three classes.
        #[arg(long)]
        ground: usize,
        /// Repeatable: one triplet as three comma-separated element indices.
        #[arg(long = "triplet", required = true)]
        triplets: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the fixed allocation to check with `verify`.
        #[arg(long)]
        allocation_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleProbe {
    /// Scan every allocation for one satisfying the query.
    Exists {
        instance: PathBuf,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long)]
        c: usize,
    },
    /// Check one allocation by enumerating removal subsets.
    Verify {
        instance: PathBuf,
        allocation: PathBuf,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long)]
        c: usize,
    },
}

enum Failure {
    Usage(String),
    Parse(String),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            EXIT_PARSE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    if cli.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let decider_limits = DeciderLimits {
        max_states: cli.state_cap.unwrap_or(DeciderLimits::default().max_states),
        ..DeciderLimits::default()
    };
    let search_limits = SearchLimits {
        node_budget: cli.node_cap.unwrap_or(SearchLimits::default().node_budget),
    };
    let oracle_budget = OracleBudget {
        max_allocations: cli.node_cap.unwrap_or(OracleBudget::default().max_allocations),
        max_subsets_per_pair: cli.node_cap.unwrap_or(OracleBudget::default().max_subsets_per_pair),
    };
    match cli.command {
        Command::Verify { instance, allocation, notion, c } => {
            let inst = load_instance(&instance)?;
            let alloc = load_allocation(&allocation, &inst)?;
            Ok(cmd_verify(&inst, &alloc, notion.notion(), c, &search_limits))
        }
        Command::Exists { instance, notion, c, engine } => {
            let inst = load_instance(&instance)?;
            Ok(match engine {
                EngineArg::Dp => cmd_exists_dp(&inst, notion.notion(), c, &decider_limits),
                EngineArg::Oracle => cmd_exists_oracle(
                    &inst,
                    notion.notion(),
                    c,
                    &oracle_budget,
                    cli.threads,
                    "exists",
                ),
            })
        }
        Command::Allocate { instance, method } => {
            let inst = load_instance(&instance)?;
            cmd_allocate(&inst, method)
        }
        Command::Generate(kind) => cmd_generate(kind, cli.seed),
        Command::Oracle(OracleProbe::Exists { instance, notion, c }) => {
            let inst = load_instance(&instance)?;
            Ok(cmd_exists_oracle(
                &inst,
                notion.notion(),
                c,
                &oracle_budget,
                cli.threads,
                "oracle-exists",
            ))
        }
        Command::Oracle(OracleProbe::Verify { instance, allocation, notion, c }) => {
            let inst = load_instance(&instance)?;
            let alloc = load_allocation(&allocation, &inst)?;
            Ok(cmd_oracle_verify(&inst, &alloc, notion.notion(), c, &oracle_budget))
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let file: files::InstanceFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    files::to_instance(&file).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_allocation(path: &Path, inst: &Instance) -> Result<Allocation, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let file: files::AllocationFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    if file.bundles.len() != inst.agents() {
        return Err(Failure::Parse(format!(
            "{}: {} bundles for {} agents",
            path.display(),
            file.bundles.len(),
            inst.agents()
        )));
    }
    let alloc = Allocation::new(file.bundles);
    inst.check_allocation(&alloc)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok(alloc)
}

fn emit(result: &ResultFile) {
    print_stdout(&serde_json::to_string_pretty(result).expect("result serializes"));
}

/// Prints one line, dying quietly with the conventional code when the
/// consumer closes the pipe early.
fn print_stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").and_then(|()| out.flush()).is_err() {
        std::process::exit(141);
    }
}

fn base_result(query: QueryEcho, answer: Answer, started: Instant) -> ResultFile {
    ResultFile {
        query,
        answer,
        allocation: None,
        witness: None,
        violations: None,
        guarantee_c: None,
        trace: None,
        note: None,
        counters: Counters::default(),
        timing_ms: started.elapsed().as_millis(),
    }
}

fn notion_echo(command: &str, notion: Notion, c: usize) -> QueryEcho {
    QueryEcho {
        command: command.into(),
        notion: Some(notion.to_string()),
        c: Some(c),
        engine: None,
        method: None,
    }
}

fn cmd_verify(
    inst: &Instance,
    alloc: &Allocation,
    notion: Notion,
    c: usize,
    limits: &SearchLimits,
) -> i32 {
    let started = Instant::now();
    let echo = notion_echo("verify", notion, c);
    let outcome = match notion {
        Notion::Weak => verify_weak(inst, alloc, c),
        Notion::Strong => verify_strong_with(inst, alloc, c, limits),
    };
    match outcome {
        Ok(v) => {
            let mut result = base_result(
                echo,
                if v.satisfied() { Answer::Yes } else { Answer::No },
                started,
            );
            result.counters.search_nodes = Some(v.nodes_visited);
            match &v.outcome {
                VerifyOutcome::Satisfied(w) => result.witness = Some(files::witness_file(w)),
                VerifyOutcome::Violated(r) => result.violations = Some(files::violations_file(r)),
            }
            emit(&result);
            if v.satisfied() {
                0
            } else {
                1
            }
        }
        Err(VerifyError::NodeBudgetExceeded { visited }) => {
            let mut result = base_result(echo, Answer::Undecided, started);
            result.counters.search_nodes = Some(visited);
            result.note = Some(format!("search node cap exceeded after {visited} nodes"));
            emit(&result);
            EXIT_UNDECIDED
        }
        Err(VerifyError::Instance(e)) => unreachable!("allocation was validated on load: {e}"),
    }
}

fn cmd_exists_dp(inst: &Instance, notion: Notion, c: usize, limits: &DeciderLimits) -> i32 {
    let started = Instant::now();
    let mut echo = notion_echo("exists", notion, c);
    echo.engine = Some("dp".into());
    let run = match notion {
        Notion::Weak => exists_weak_with(inst, c, limits),
        Notion::Strong => exists_strong_with(inst, c, limits),
    };
    match run {
        Ok(decided) => {
            let found = matches!(decided.decision, Decision::Exists(_));
            let mut result =
                base_result(echo, if found { Answer::Yes } else { Answer::No }, started);
            result.counters.dp_states = Some(decided.states);
            if notion == Notion::Strong {
                result.counters.families = Some(decided.families);
            }
            if let Decision::Exists(alloc) = decided.decision {
                result.allocation = Some(alloc.bundles().to_vec());
            }
            emit(&result);
            if found {
                0
            } else {
                1
            }
        }
        Err(DecideError::StateCap { states }) => {
            let mut result = base_result(echo, Answer::Undecided, started);
            result.counters.dp_states = Some(states);
            result.note = Some(format!("state cap exceeded after {states} states"));
            emit(&result);
            EXIT_UNDECIDED
        }
        Err(DecideError::FamilyCap { families }) => {
            let mut result = base_result(echo, Answer::Undecided, started);
            result.counters.families = Some(families);
            result.note = Some(format!("family cap exceeded after {families} families"));
            emit(&result);
            EXIT_UNDECIDED
        }
        Err(DecideError::PrefixOutOfRange { .. }) => {
            unreachable!("deciders take no prefix")
        }
    }
}

fn cmd_exists_oracle(
    inst: &Instance,
    notion: Notion,
    c: usize,
    budget: &OracleBudget,
    threads: usize,
    command: &str,
) -> i32 {
    let started = Instant::now();
    let mut echo = notion_echo(command, notion, c);
    if command == "exists" {
        echo.engine = Some("oracle".into());
    }
    let query = FairnessQuery { notion, c };
    let options = OracleOptions { workers: threads, symmetry_reduction: false };
    match oracle_exists_with(inst, query, budget, &options) {
        Ok(outcome) => {
            let found = outcome.found.is_some();
            let mut result =
                base_result(echo, if found { Answer::Yes } else { Answer::No }, started);
            result.counters.scanned_allocations = Some(outcome.scanned);
            if let Some(alloc) = outcome.found {
                result.allocation = Some(alloc.bundles().to_vec());
            }
            emit(&result);
            if found {
                0
            } else {
                1
            }
        }
        Err(OracleError::AllocationBudget { scanned }) => {
            let mut result = base_result(echo, Answer::Undecided, started);
            result.counters.scanned_allocations = Some(scanned);
            result.note = Some(format!("allocation cap exceeded after {scanned} scans"));
            emit(&result);
            EXIT_UNDECIDED
        }
        Err(OracleError::SubsetBudget { bundle_size }) => {
            let mut result = base_result(echo, Answer::Undecided, started);
            result.note =
                Some(format!("subset cap exceeded on a bundle of {bundle_size} items"));
            emit(&result);
            EXIT_UNDECIDED
        }
        Err(OracleError::SymmetryNeedsIdentical) => {
            unreachable!("symmetry reduction is never requested here")
        }
    }
}

fn cmd_oracle_verify(
    inst: &Instance,
    alloc: &Allocation,
    notion: Notion,
    c: usize,
    budget: &OracleBudget,
) -> i32 {
    let started = Instant::now();
    let echo = notion_echo("oracle-verify", notion, c);
    let outcome = match notion {
        Notion::Weak => oracle_verify_weak_with(inst, alloc, c, budget),
        Notion::Strong => oracle_verify_strong_with(inst, alloc, c, budget),
    };
    match outcome {
        Ok(ok) => {
            let result = base_result(echo, if ok { Answer::Yes } else { Answer::No }, started);
            emit(&result);
            if ok {
                0
            } else {
                1
            }
        }
        Err(OracleError::SubsetBudget { bundle_size }) => {
            let mut result = base_result(echo, Answer::Undecided, started);
            result.note =
                Some(format!("subset cap exceeded on a bundle of {bundle_size} items"));
            emit(&result);
            EXIT_UNDECIDED
        }
        Err(e) => unreachable!("subset scans raise only subset caps: {e}"),
    }
}

fn cmd_allocate(inst: &Instance, method: MethodArg) -> Result<i32, Failure> {
    let started = Instant::now();
    let (name, run): (&str, fn(&Instance) -> Result<AllocatorResult, AllocError>) = match method {
        MethodArg::TwoAgent => ("two-agent", allocate_two_agents),
        MethodArg::TwoAgentIdentical => ("two-agent-identical", allocate_two_agents_identical),
        MethodArg::NAgent => ("n-agent", allocate_n_agents),
    };
    let res = match run(inst) {
        Ok(res) => res,
        Err(AllocError::WrongAgentCount { expected, actual }) => {
            return Err(Failure::Usage(format!(
                "method {name} needs {expected} agents, instance has {actual}"
            )));
        }
        Err(AllocError::NotIdentical) => {
            return Err(Failure::Usage(format!(
                "method {name} needs identical valuations"
            )));
        }
        Err(AllocError::Lp(e)) => panic!("relaxation failed on a feasible polytope: {e}"),
    };
    let echo = QueryEcho {
        command: "allocate".into(),
        notion: Some(Notion::Strong.to_string()),
        c: Some(res.trace.guarantee_c),
        engine: None,
        method: Some(name.into()),
    };
    // the guarantee is proven, but check it anyway before reporting success
    let check = verify_strong_with(inst, &res.allocation, res.trace.guarantee_c, &SearchLimits {
        node_budget: u64::MAX,
    })
    .expect("self-check cannot exhaust an unbounded budget");
    let mut result = base_result(
        echo,
        if check.satisfied() { Answer::Yes } else { Answer::No },
        started,
    );
    result.allocation = Some(res.allocation.bundles().to_vec());
    result.guarantee_c = Some(res.trace.guarantee_c);
    result.trace = Some(files::trace_file(&res.trace));
    result.counters.search_nodes = Some(check.nodes_visited);
    match &check.outcome {
        VerifyOutcome::Satisfied(w) => result.witness = Some(files::witness_file(w)),
        VerifyOutcome::Violated(r) => result.violations = Some(files::violations_file(r)),
    }
    emit(&result);
    Ok(if check.satisfied() { 0 } else { 1 })
}

fn cmd_generate(kind: GenerateKind, seed: u64) -> Result<i32, Failure> {
    match kind {
        GenerateKind::NoWeakSef1 { out } => write_instance(&no_weak_sef1_instance(), out.as_deref()),
        GenerateKind::NoStrongSef1 { out } => {
            write_instance(&no_strong_sef1_instance(), out.as_deref())
        }
        GenerateKind::Diagonal { c, out } => write_instance(&diagonal_instance(c), out.as_deref()),
        GenerateKind::Hadamard { c, out } => write_instance(&hadamard_instance(c), out.as_deref()),
        GenerateKind::Random { agents, items, dimensions, v_max, identical, out } => {
            if agents == 0 || dimensions == 0 {
                return Err(Failure::Usage(
                    "random instances need at least one agent and one dimension".into(),
                ));
            }
            let inst = random_instance(seed, agents, items, dimensions, v_max, identical);
            write_instance(&inst, out.as_deref())
        }
        GenerateKind::ReducePartition { a, out } => {
            let (inst, query) = reduce_partition(&PartitionSource { weights: a })
                .map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("query: {} c={}", query.notion, query.c);
            write_instance(&inst, out.as_deref())
        }
        GenerateKind::ReduceMnae3sat { vars, clauses, out } => {
            let clauses = clauses
                .iter()
                .map(|raw| parse_triple(raw, "--clause"))
                .collect::<Result<Vec<_>, _>>()?;
            let (inst, query) = reduce_mnae3sat(&NaeFormula { num_vars: vars, clauses })
                .map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("query: {} c={}", query.notion, query.c);
            write_instance(&inst, out.as_deref())
        }
        GenerateKind::Reduce3dm { ground, triplets, out, allocation_out } => {
            let triplets = triplets
                .iter()
                .map(|raw| parse_triple(raw, "--triplet"))
                .collect::<Result<Vec<_>, _>>()?;
            let (inst, alloc, c) = reduce_3dm(&ThreeDmSource { ground, triplets })
                .map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("query: strong c={c} against the emitted allocation");
            if let Some(path) = allocation_out {
                let file = files::AllocationFile { bundles: alloc.bundles().to_vec() };
                write_json(&file, &path)?;
            }
            write_instance(&inst, out.as_deref())
        }
    }
}

fn parse_triple(raw: &str, what: &str) -> Result<[usize; 3], Failure> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!(
            "{what} {raw:?}: expected three comma-separated indices"
        )));
    }
    let mut out = [0usize; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .parse()
            .map_err(|_| Failure::Usage(format!("{what} {raw:?}: {part:?} is not an index")))?;
    }
    Ok(out)
}

fn write_instance(inst: &Instance, out: Option<&Path>) -> Result<i32, Failure> {
    let file = files::from_instance(inst);
    match out {
        Some(path) => write_json(&file, path)?,
        None => print_stdout(&serde_json::to_string_pretty(&file).expect("instance serializes")),
    }
    Ok(0)
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, text + "\n")
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}
