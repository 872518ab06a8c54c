//! Command-line front end: run allocators over instances, generate seeded
//! instances, play adversaries, search game values, and re-audit traces.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use fairstream::adversaries::{
    builtin_adversary, builtin_gate, builtin_names, dump_tree, solve_game, FairGate, GameQuery,
    Metric,
};
use fairstream::algorithms::AlgorithmKind;
use fairstream::audit::Budget;
use fairstream::core::Direction;
use fairstream::harness::{
    generate, play, read_decisions, read_instance, run_generated_batch, run_stream,
    write_instance, write_report_csv, Bounds, Driver, GenClass, GenSpec, RunOptions, Target,
};
use fairstream::rational::{parse_q, Q};

#[derive(Parser)]
#[command(name = "fairstream", version, about = "Online fair-allocation engine: run, audit, and certify")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an allocator (or a decision override file) over an instance and
    /// audit every round.
    Run(RunArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Play a named adversary against a builtin algorithm or external command.
    Adversary(AdversaryArgs),
    /// Exhaustively solve a named adversary's game value.
    Search(SearchArgs),
    /// Re-audit a recorded decision trace against an instance.
    Audit(AuditArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Instance file (JSONL). Mutually exclusive with --gen-class.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Builtin algorithm name.
    #[arg(long, default_value = "marginal_greedy")]
    algorithm: String,
    /// Relax marginal-greedy's class check to any positive marginal.
    #[arg(long)]
    relaxed: bool,
    /// Decision override file: replay these decisions instead of the algorithm.
    #[arg(long)]
    decisions: Option<PathBuf>,
    /// Batch mode: generator class (see `gen --class`) instead of an instance.
    #[arg(long)]
    gen_class: Option<String>,
    #[command(flatten)]
    gen_params: GenParams,
    /// Batch mode: number of consecutive seeds to run, starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Assert a minimum summary EF1 ratio (goods), e.g. "1/2".
    #[arg(long)]
    assert_ef1_min: Option<String>,
    /// Assert a minimum summary share ratio (goods).
    #[arg(long)]
    assert_mms_min: Option<String>,
    /// Assert a minimum summary welfare ratio (goods).
    #[arg(long)]
    assert_usw_min: Option<String>,
    /// Assert a maximum summary EF1 ratio (chores).
    #[arg(long)]
    assert_ef1_max: Option<String>,
    /// Assert a maximum summary share ratio (chores).
    #[arg(long)]
    assert_mms_max: Option<String>,
    /// Assert a maximum summary social-cost ratio (chores).
    #[arg(long)]
    assert_usc_max: Option<String>,
    /// Require non-wastefulness at every audited round (goods).
    #[arg(long)]
    require_nw: bool,
    /// Require completeness at every audited round (chores).
    #[arg(long)]
    require_complete: bool,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the per-round CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Include wall-clock timings in the report (breaks byte stability).
    #[arg(long)]
    timings: bool,
    /// Enumeration budget override (also FAIRSTREAM_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct GenParams {
    #[arg(long, default_value = "goods")]
    direction: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    deadline: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Low level for bivalued/trivalued classes.
    #[arg(long, default_value = "1")]
    a: String,
    /// High level for bivalued/trivalued classes.
    #[arg(long, default_value = "5")]
    b: String,
    /// Top level for the trivalued class.
    #[arg(long, default_value = "10")]
    z: String,
    /// Category count for matroid classes.
    #[arg(long, default_value_t = 4)]
    categories: usize,
    /// Value ceiling for the monotone class.
    #[arg(long, default_value_t = 9)]
    max_value: i64,
    /// Draw the binary agents' rows independently (binbi class).
    #[arg(long)]
    independent_binary: bool,
}

#[derive(Args)]
struct GenArgs {
    /// One of: binary, bivalued, trivalued, partition-matroid,
    /// supermod-complement, binbi, monotone.
    #[arg(long)]
    class: String,
    #[command(flatten)]
    params: GenParams,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    /// Builtin adversary name (see `search --list`).
    #[arg(long)]
    name: String,
    /// Epsilon parameter as a rational, e.g. "1/10".
    #[arg(long, default_value = "1/10")]
    epsilon: String,
    /// Builtin target algorithm.
    #[arg(long)]
    target_algorithm: Option<String>,
    #[arg(long)]
    relaxed: bool,
    /// External target command (program plus arguments).
    #[arg(long, num_args = 1.., value_name = "CMD")]
    target_cmd: Option<Vec<String>>,
    /// Reply timeout for external targets, in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    /// Metric for the certified game value printed alongside.
    #[arg(long, default_value = "ef1")]
    metric: String,
}

#[derive(Args)]
struct SearchArgs {
    /// Builtin adversary name.
    #[arg(long, required_unless_present = "list")]
    name: Option<String>,
    #[arg(long, default_value = "1/10")]
    epsilon: String,
    #[arg(long, default_value = "ef1")]
    metric: String,
    /// Apply the construction's fairness gate (efficiency certificates).
    #[arg(long)]
    gated: bool,
    /// Dump the full game tree as JSON.
    #[arg(long)]
    dump_tree: Option<PathBuf>,
    /// List builtin adversary names and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Recorded decision trace to re-audit.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match cli.command {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Adversary(args) => cmd_adversary(args),
        Cmd::Search(args) => cmd_search(args),
        Cmd::Audit(args) => cmd_audit(args),
    }
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    match s {
        "goods" => Ok(Direction::Goods),
        "chores" => Ok(Direction::Chores),
        other => Err(format!("unknown direction `{other}` (goods|chores)")),
    }
}

fn parse_class(name: &str, p: &GenParams) -> Result<GenClass, Box<dyn std::error::Error>> {
    Ok(match name {
        "binary" => GenClass::Binary,
        "bivalued" => GenClass::Bivalued {
            a: parse_q(&p.a)?,
            b: parse_q(&p.b)?,
        },
        "trivalued" => GenClass::Trivalued {
            a: parse_q(&p.a)?,
            b: parse_q(&p.b)?,
            z: parse_q(&p.z)?,
        },
        "partition-matroid" | "supermod-complement" => GenClass::PartitionMatroid {
            categories: p.categories,
        },
        "binbi" => GenClass::BinaryPlusBivalued {
            a: parse_q(&p.a)?,
            b: parse_q(&p.b)?,
            identical: !p.independent_binary,
        },
        "monotone" => GenClass::MonotoneAdditive {
            max_value: p.max_value,
        },
        other => return Err(format!("unknown generator class `{other}`").into()),
    })
}

fn parse_bounds(args: &RunArgs) -> Result<Bounds, Box<dyn std::error::Error>> {
    let opt = |s: &Option<String>| -> Result<Option<Q>, Box<dyn std::error::Error>> {
        Ok(match s {
            Some(text) => Some(parse_q(text)?),
            None => None,
        })
    };
    Ok(Bounds {
        ef1_min: opt(&args.assert_ef1_min)?,
        mms_min: opt(&args.assert_mms_min)?,
        welfare_min: opt(&args.assert_usw_min)?,
        ef1_max: opt(&args.assert_ef1_max)?,
        mms_max: opt(&args.assert_mms_max)?,
        welfare_max: opt(&args.assert_usc_max)?,
        require_nw: args.require_nw,
        require_complete: args.require_complete,
        base_rounds_exact_ef1: false,
    })
}

fn budget_of(explicit: Option<u64>) -> Budget {
    explicit.map(Budget).unwrap_or_else(Budget::from_env)
}

fn algorithm_kind(name: &str, relaxed: bool) -> Result<AlgorithmKind, String> {
    AlgorithmKind::from_name(name, relaxed)
        .ok_or_else(|| format!("unknown algorithm `{name}`"))
}

fn cmd_run(args: RunArgs) -> Result<bool, Box<dyn std::error::Error>> {
    let opts = RunOptions {
        budget: budget_of(args.budget),
        bounds: parse_bounds(&args)?,
        timings: args.timings,
    };
    if let Some(class_name) = &args.gen_class {
        // batch over generated instances
        let class = parse_class(class_name, &args.gen_params)?;
        let direction = parse_direction(&args.gen_params.direction)?;
        let kind = algorithm_kind(&args.algorithm, args.relaxed)?;
        let specs: Vec<GenSpec> = (0..args.seeds)
            .map(|k| GenSpec {
                class: class.clone(),
                direction,
                n: args.gen_params.n,
                t: args.gen_params.t,
                deadline: args.gen_params.deadline,
                seed: args.gen_params.seed + k,
            })
            .collect();
        let batch = run_generated_batch(&specs, kind, &opts)?;
        println!("{}", serde_json::to_string_pretty(&batch)?);
        return Ok(batch.failed == 0);
    }

    let path = args
        .instance
        .as_ref()
        .ok_or("run needs --instance or --gen-class")?;
    let stream = read_instance(BufReader::new(File::open(path)?))?;
    let script = match &args.decisions {
        Some(p) => Some(read_decisions(BufReader::new(File::open(p)?))?),
        None => None,
    };
    let report = match &script {
        Some(ds) => run_stream(&stream, Driver::Scripted(ds), &opts)?,
        None => {
            let kind = algorithm_kind(&args.algorithm, args.relaxed)?;
            run_stream(&stream, Driver::Algorithm(kind), &opts)?
        }
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &args.json {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            writeln!(f, "{json}")?;
        }
        None => println!("{json}"),
    }
    if let Some(p) = &args.csv {
        write_report_csv(&report, BufWriter::new(File::create(p)?))?;
    }
    if !report.ok() {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
    }
    Ok(report.ok())
}

fn cmd_gen(args: GenArgs) -> Result<bool, Box<dyn std::error::Error>> {
    let class = parse_class(&args.class, &args.params)?;
    let spec = GenSpec {
        class: class.clone(),
        direction: parse_direction(&args.params.direction)?,
        n: args.params.n,
        t: args.params.t,
        deadline: args.params.deadline,
        seed: args.params.seed,
    };
    let stream = generate(&spec);
    match &args.output {
        Some(p) => write_instance(&stream, Some(class.label()), BufWriter::new(File::create(p)?))?,
        None => {
            let mut buf = Vec::new();
            write_instance(&stream, Some(class.label()), &mut buf)?;
            print!("{}", String::from_utf8(buf).unwrap());
        }
    }
    Ok(true)
}

fn cmd_adversary(args: AdversaryArgs) -> Result<bool, Box<dyn std::error::Error>> {
    let eps = parse_q(&args.epsilon)?;
    let adv = builtin_adversary(&args.name, &eps)?;
    let metric = Metric::from_name(&args.metric).ok_or("unknown metric")?;
    let target = if let Some(cmd) = &args.target_cmd {
        Target::External {
            command: cmd,
            timeout: Duration::from_millis(args.timeout_ms),
        }
    } else {
        let name = args
            .target_algorithm
            .as_ref()
            .ok_or("adversary needs --target-algorithm or --target-cmd")?;
        Target::Builtin(algorithm_kind(name, args.relaxed)?)
    };
    let outcome = play(adv.as_ref(), target, Budget::from_env())?;
    let game = solve_game(adv.as_ref(), &query_for(&args.name, metric))?;
    let combined = serde_json::json!({ "play": outcome, "game": game });
    println!("{}", serde_json::to_string_pretty(&combined)?);
    Ok(true)
}

fn query_for(name: &str, metric: Metric) -> GameQuery {
    match builtin_gate(name) {
        Some(gate) => GameQuery::with_gate(metric, gate),
        None => GameQuery::new(metric),
    }
}

fn cmd_search(args: SearchArgs) -> Result<bool, Box<dyn std::error::Error>> {
    if args.list {
        for name in builtin_names() {
            println!("{name}");
        }
        return Ok(true);
    }
    let name = args.name.as_deref().unwrap();
    let eps = parse_q(&args.epsilon)?;
    let adv = builtin_adversary(name, &eps)?;
    let metric = Metric::from_name(&args.metric).ok_or("unknown metric")?;
    let query = if args.gated {
        match builtin_gate(name) {
            Some(gate) => GameQuery::with_gate(metric, gate),
            None => GameQuery::with_gate(metric, FairGate::Satisfied),
        }
    } else {
        query_for(name, metric)
    };
    let value = solve_game(adv.as_ref(), &query)?;
    if let Some(path) = &args.dump_tree {
        let tree = dump_tree(adv.as_ref(), &mut Vec::new());
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &tree)?;
    }
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(true)
}

fn cmd_audit(args: AuditArgs) -> Result<bool, Box<dyn std::error::Error>> {
    let stream = read_instance(BufReader::new(File::open(&args.instance)?))?;
    let trace = read_decisions(BufReader::new(File::open(&args.trace)?))?;
    let opts = RunOptions {
        budget: budget_of(args.budget),
        ..Default::default()
    };
    let report = run_stream(&stream, Driver::Scripted(&trace), &opts)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.json {
        Some(p) => writeln!(BufWriter::new(File::create(p)?), "{json}")?,
        None => println!("{json}"),
    }
    Ok(report.ok())
}
