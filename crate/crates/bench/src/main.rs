use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdsched::baselines::{full_duplex_bound, hd_fd_ratio, naive_schedule, simple_random_schedule};
use hdsched::cutgraph::CutEvaluator;
use hdsched::grouping::{
    auto_decomposition, build_clique_graph, check_p1_exhaustive, check_sufficient_conditions, heuristic_grouping,
    layered_decomposition, layered_grouping, line_two_hop_decomposition, line_two_hop_grouping, tree_decompose,
    NodeGrouping, TreeDecomposition,
};
use hdsched::io::{network_from_json, network_to_json, schedule_from_json, GroupScheduleDoc, ScheduleDoc};
use hdsched::net::{gen_five_relay, gen_layered, gen_line_two_hop, GainDist, Network};
use hdsched::opt::{
    solve_problem1, solve_problem2, solve_problem3, ObjectiveSpec, ScheduleOut, SolveOptions, SolveResult,
};
use hdsched::sfm::{min_cut, CutObjective, SeparationMethod, DEFAULT_EPS};
use hdsched_bench::{
    ratio_instances, run_duty_curve, run_ratio_curve, run_timing, ExperimentKind, ExperimentSpec, VERSION,
};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "hdsched", version = VERSION, about = "Half-duplex relay schedules from the cut-set bound")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network.
    Gen(GenArgs),
    /// Optimize a schedule.
    Solve(SolveArgs),
    /// Minimum cut under a stored schedule or the full-duplex bound.
    Mincut(MincutArgs),
    /// Build and verify a node grouping and its tree decomposition.
    Group(GroupArgs),
    /// Compare optimized, naive, and simple-random schedules against full duplex.
    Compare(CompareArgs),
    /// Run an experiment sweep.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Layered,
    Line,
    FiveRelay,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gain {
    Unit,
    Gaussian,
    Complex,
    Adt,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = Family::Layered)]
    family: Family,
    /// Layer widths including source and destination, e.g. 1,2,2,1.
    #[arg(long, value_delimiter = ',', default_value = "1,2,2,1")]
    widths: Vec<usize>,
    /// Node count for the two-hop line.
    #[arg(long, default_value_t = 6)]
    nodes: usize,
    #[arg(long, value_enum, default_value_t = Gain::Complex)]
    gain: Gain,
    #[arg(long = "P", default_value_t = 10.0)]
    power: f64,
    /// Field size for ADT gains.
    #[arg(long, default_value_t = 2)]
    field: u64,
    /// Vector length for ADT gains.
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Rate,
    Duty,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupingChoice {
    Auto,
    Heuristic,
    Layered,
    Line,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Brute,
    MinNorm,
}

impl From<Method> for SeparationMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => SeparationMethod::Auto,
            Method::Brute => SeparationMethod::Brute,
            Method::MinNorm => SeparationMethod::MinNorm,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    problem: u8,
    #[arg(long, value_enum, default_value_t = Objective::Rate)]
    objective: Objective,
    #[arg(long, default_value_t = 0.0)]
    c_min: f64,
    #[arg(long, value_enum, default_value_t = GroupingChoice::Auto)]
    grouping: GroupingChoice,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    separation: Method,
    #[arg(long, default_value_t = hdsched::opt::SEPARATION_TOL)]
    separation_tol: f64,
    #[arg(long)]
    fix_endpoints: bool,
}

#[derive(Args)]
struct MincutArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, conflicts_with = "full_duplex", required_unless_present = "full_duplex")]
    schedule: Option<PathBuf>,
    #[arg(long)]
    full_duplex: bool,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(Args)]
struct GroupArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = GroupingChoice::Heuristic)]
    grouping: GroupingChoice,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Timing,
    Duty,
    Ratio,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    kind: BenchKind,
    /// JSON experiment spec; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<usize>>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long = "P", value_delimiter = ',')]
    powers: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
}

enum Failure {
    Usage(String),
    Solver(hdsched::Error),
}

impl From<hdsched::Error> for Failure {
    fn from(e: hdsched::Error) -> Self {
        Failure::Solver(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_network(path: &Path) -> CliResult<Network> {
    network_from_json(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

struct Output {
    format: Format,
    out: Option<PathBuf>,
}

impl Output {
    fn write_text(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::Usage(e.to_string()))
            }
        }
    }

    fn json(&self, value: &serde_json::Value) -> CliResult<()> {
        self.write_text(&(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
    }

    /// Rows as CSV or, for the JSON format, as an object with the rows under `rows`.
    fn rows<T: Serialize>(&self, rows: &[T], meta: serde_json::Value) -> CliResult<()> {
        match self.format {
            Format::Json => {
                let mut v = meta;
                v["rows"] = serde_json::to_value(rows).expect("serializable");
                self.json(&v)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r).map_err(|e| Failure::Usage(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
                self.write_text(&String::from_utf8(bytes).expect("utf-8"))
            }
        }
    }
}

fn decomposition(net: &Network, choice: GroupingChoice) -> CliResult<TreeDecomposition> {
    Ok(match choice {
        GroupingChoice::Auto => auto_decomposition(net)?,
        GroupingChoice::Heuristic => tree_decompose(&build_clique_graph(net, &heuristic_grouping(net)))?,
        GroupingChoice::Layered => layered_decomposition(net)?,
        GroupingChoice::Line => line_two_hop_decomposition(net)?,
    })
}

fn solve_result_json(r: &SolveResult, wall_ms: f64) -> serde_json::Value {
    let schedule = match &r.schedule {
        ScheduleOut::Joint(q) => json!({ "joint": ScheduleDoc::from(q) }),
        ScheduleOut::Grouped(gs) => json!({ "grouped": GroupScheduleDoc::from(gs) }),
    };
    json!({
        "rate": r.rate,
        "t_tot": r.t_tot,
        "schedule": schedule,
        "active_cuts": r.active_cuts.iter().map(|c| c.omega().to_vec()).collect::<Vec<_>>(),
        "iterations": r.iterations,
        "status": r.status,
        "min_cut_value": r.min_cut_value,
        "wall_ms": wall_ms,
    })
}

fn cmd_gen(args: &GenArgs, seed: u64, out: &Output) -> CliResult<()> {
    let dist = match args.gain {
        Gain::Unit => GainDist::Unit,
        Gain::Gaussian => GainDist::Gaussian(args.power),
        Gain::Complex => GainDist::ComplexGaussian(args.power),
        Gain::Adt => GainDist::AdtShift { p: args.field, k: args.k },
    };
    let made = match args.family {
        Family::Layered => gen_layered(&args.widths, dist, seed),
        Family::Line => gen_line_two_hop(args.nodes, dist, seed),
        Family::FiveRelay => gen_five_relay(dist, seed),
    };
    let net = made.map_err(|e| Failure::Usage(e.to_string()))?;
    eprintln!("seed: {seed}");
    out.write_text(&(network_to_json(&net) + "\n"))
}

fn cmd_solve(args: &SolveArgs, out: &Output) -> CliResult<()> {
    let net = load_network(&args.input)?;
    let obj = match args.objective {
        Objective::Rate => ObjectiveSpec { c_min: args.c_min, ..ObjectiveSpec::RATE_MAX },
        Objective::Duty => ObjectiveSpec::duty_min(args.c_min),
    };
    let opts = SolveOptions {
        separation: args.separation.into(),
        separation_tol: args.separation_tol,
        fix_endpoints: args.fix_endpoints,
        ..Default::default()
    };
    let start = Instant::now();
    let r = match args.problem {
        1 if matches!(args.objective, Objective::Rate) && args.c_min == 0.0 => solve_problem1(&net, &opts)?,
        1 | 2 => solve_problem2(&net, obj, &opts)?,
        _ => solve_problem3(&net, &decomposition(&net, args.grouping)?, obj, &opts)?,
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match out.format {
        Format::Json => {
            let mut v = solve_result_json(&r, wall_ms);
            v["problem"] = json!(args.problem);
            out.json(&v)
        }
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                problem: u8,
                rate: f64,
                t_tot: f64,
                iterations: usize,
                status: hdsched::opt::SolveStatus,
                min_cut_value: f64,
                wall_ms: f64,
            }
            out.rows(
                &[Row {
                    problem: args.problem,
                    rate: r.rate,
                    t_tot: r.t_tot,
                    iterations: r.iterations,
                    status: r.status,
                    min_cut_value: r.min_cut_value,
                    wall_ms,
                }],
                json!({}),
            )
        }
    }
}

fn cmd_mincut(args: &MincutArgs, out: &Output) -> CliResult<()> {
    let net = load_network(&args.input)?;
    let eval = CutEvaluator::new(&net);
    let r = match &args.schedule {
        Some(path) => {
            let q = schedule_from_json(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            if q.num_nodes() != net.num_nodes() {
                return Err(Failure::Usage("schedule and network sizes differ".into()));
            }
            min_cut(&CutObjective::joint(&eval, &q), args.method.into(), args.eps)?
        }
        None => min_cut(&CutObjective::full_duplex(&eval), args.method.into(), args.eps)?,
    };
    let v = json!({
        "omega": r.cut.omega().to_vec(),
        "value": r.value,
        "method": r.method,
        "certificate_gap": r.certificate_gap,
    });
    match out.format {
        Format::Json => out.json(&v),
        Format::Csv => out.rows(&[json!({"value": r.value, "method": r.method, "certificate_gap": r.certificate_gap})], json!({})),
    }
}

fn cmd_group(args: &GroupArgs, out: &Output) -> CliResult<()> {
    let net = load_network(&args.input)?;
    let grouping: NodeGrouping = match args.grouping {
        GroupingChoice::Heuristic | GroupingChoice::Auto => heuristic_grouping(&net),
        GroupingChoice::Layered => layered_grouping(&net)?,
        GroupingChoice::Line => line_two_hop_grouping(&net)?,
    };
    let td = decomposition(&net, args.grouping)?;
    let (sufficient, violations) = check_sufficient_conditions(&net, &grouping);
    let p1 = check_p1_exhaustive(&net, &grouping).ok();
    let td_p1 = check_p1_exhaustive(&net, &td.grouping()).ok();
    let verified = td.verify(&build_clique_graph(&net, &grouping));
    let v = json!({
        "groups": grouping.groups().iter().map(|g| g.to_vec()).collect::<Vec<_>>(),
        "sufficient_conditions": sufficient,
        "violations": violations,
        "p1_exhaustive": p1,
        "bags": td.bags.iter().map(|b| b.to_vec()).collect::<Vec<_>>(),
        "tree_edges": td.tree_edges,
        "width": td.width(),
        "decomposition_valid": verified.is_ok(),
        "decomposition_error": verified.err(),
        "bags_p1_exhaustive": td_p1,
    });
    out.json(&v)
}

fn cmd_compare(args: &CompareArgs, seed: u64, out: &Output) -> CliResult<()> {
    let net = load_network(&args.input)?;
    let fd = full_duplex_bound(&net)?;
    let opt = solve_problem3(&net, &auto_decomposition(&net)?, ObjectiveSpec::RATE_MAX, &SolveOptions::default())?;
    let optimized = opt.min_cut_value.min(opt.rate) / fd;
    let naive = naive_schedule(&net).and_then(|q| hd_fd_ratio(&net, &q)).ok();
    let simple = simple_random_schedule(&net, seed).and_then(|q| hd_fd_ratio(&net, &q)).ok();
    #[derive(Serialize)]
    struct Row {
        scheduler: &'static str,
        ratio: Option<f64>,
        seed: u64,
    }
    let rows = [
        Row { scheduler: "optimized", ratio: Some(optimized), seed },
        Row { scheduler: "naive", ratio: naive, seed },
        Row { scheduler: "simple_random", ratio: simple, seed },
    ];
    out.rows(&rows, json!({ "full_duplex": fd, "seed": seed, "version": VERSION }))
}

fn cmd_bench(args: &BenchArgs, seed: Option<u64>, out: &Output) -> CliResult<()> {
    let mut spec = match &args.config {
        Some(p) => serde_json::from_str::<ExperimentSpec>(&read(p)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => ExperimentSpec::default(),
    };
    spec.kind = match args.kind {
        BenchKind::Timing => ExperimentKind::Timing,
        BenchKind::Duty => ExperimentKind::DutyCurve,
        BenchKind::Ratio => ExperimentKind::RatioCurve,
    };
    if let Some(l) = &args.layers {
        spec.layers = l.clone();
    }
    if let Some(w) = args.width {
        spec.width = w;
    }
    if let Some(p) = &args.powers {
        spec.powers = p.clone();
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(g) = args.grid_points {
        spec.grid_points = g;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate().map_err(Failure::Usage)?;
    let meta = json!({ "spec": spec, "version": VERSION });
    match args.kind {
        BenchKind::Timing => out.rows(&run_timing(&spec), meta),
        BenchKind::Duty => out.rows(&run_duty_curve(&spec), meta),
        BenchKind::Ratio => match out.format {
            Format::Csv => out.rows(&run_ratio_curve(&spec)?, meta),
            Format::Json => {
                let mut v = meta;
                v["instances"] = serde_json::to_value(ratio_instances(&spec)?).expect("serializable");
                out.rows(&run_ratio_curve(&spec)?, v)
            }
        },
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let out = Output { format: cli.format, out: cli.out.clone() };
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed, &out),
        Command::Solve(a) => cmd_solve(a, &out),
        Command::Mincut(a) => cmd_mincut(a, &out),
        Command::Group(a) => cmd_group(a, &out),
        Command::Compare(a) => cmd_compare(a, seed, &out),
        Command::Bench(a) => cmd_bench(a, cli.seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e}");
            ExitCode::from(2)
        }
    }
}
