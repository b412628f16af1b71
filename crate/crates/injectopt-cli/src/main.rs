//! Command-line driver around the injectopt library.
//!
//! Exit codes: 0 success, 2 bad configuration or malformed input data,
//! 3 filesystem failures, 4 solver failures, 5 failed verification.

mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use injectopt::analysis::{
    cost_of_diversity, default_grid, frontier, scale_probabilities, AnalysisError, FrontierRow,
    LabeledFrontier,
};
use injectopt::dynamics::{
    simulate, tail_bound, trajectory_to_csv, verify_theorem1, CheckResult, ConvergenceReport,
    DynamicsError, Schedule,
};
use injectopt::ingest::{
    assignment_to_csv, parse_edges_tsv, parse_tweets_jsonl, run_pipeline, IngestError,
    PipelineConfig, PriorConfig,
};
use injectopt::instances::{
    generate, instance_hash, instance_to_json, read_generator_spec, read_instance,
    GeneratorError, GeneratorSpec, InstanceIoError,
};
use injectopt::io::{read_policy, write_policy, FileError, PolicyFile, PolicyMethod};
use injectopt::lp::{
    build_diversity_lp, build_diversity_lp_substituted, build_engagement_lp, opt_delta_with,
    to_mps, DiversityFormulation, LpError,
};
use injectopt::net::{build_type_matrices, diversity, engagement, InstanceError, NetError};
use injectopt::policies::{optimal_policy, PolicyError};
use injectopt::{Instance, PROBABILITY_CAP};

#[derive(Parser)]
#[command(name = "injectopt", version, about = "Tweet injection optimization toolkit")]
struct Cli {
    /// Worker threads for parallel sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance file.
    Gen(GenArgs),
    /// Build instances from a tweet corpus plus follower edges.
    Ingest(IngestArgs),
    /// Solve for an injection policy (closed form, or LP with --delta).
    Solve(SolveArgs),
    /// Sweep the cost-of-diversity frontier across probability scales.
    Frontier(FrontierArgs),
    /// Simulate the exposure dynamics under a policy.
    Simulate(SimulateArgs),
    /// Check the convergence and bound theorems on instances.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    /// Worst-case family whose cost meets the bound exactly.
    Tight {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        num_types: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded random follower graph with uniform random probabilities.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        num_types: usize,
        #[arg(long = "edge-prob")]
        edge_prob: f64,
        #[arg(long = "p-min", default_value_t = 0.0)]
        p_min: f64,
        #[arg(long = "p-max")]
        p_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empty graph, every probability equal.
    Homogeneous {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        num_types: usize,
        #[arg(long)]
        value: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empty graph with probabilities sampled per user and type.
    Empty {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        num_types: usize,
        #[arg(long = "p-min")]
        p_min: f64,
        #[arg(long = "p-max")]
        p_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read a generator spec from a JSON file.
    FromSpec {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct IngestArgs {
    /// Tweet records, one JSON object per line.
    #[arg(long)]
    tweets: PathBuf,
    /// Follower edges, one "follower<TAB>followee" row per line.
    #[arg(long)]
    edges: PathBuf,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// How many most-frequent hashtags to keep.
    #[arg(long = "top-hashtags", default_value_t = 2000)]
    top_hashtags: usize,
    /// Clustering tie-breaks use this seed; posterior sampling uses seed+1.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Posterior sample matrices to draw.
    #[arg(long, default_value_t = 2)]
    samples: usize,
    #[arg(long = "prior-a", default_value_t = 1.0)]
    prior_a: f64,
    #[arg(long = "prior-b", default_value_t = 100.0)]
    prior_b: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LpFormulationArg {
    Dense,
    Substituted,
}

impl From<LpFormulationArg> for DiversityFormulation {
    fn from(arg: LpFormulationArg) -> Self {
        match arg {
            LpFormulationArg::Dense => DiversityFormulation::Dense,
            LpFormulationArg::Substituted => DiversityFormulation::Substituted,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Minimum per-user, per-type limiting exposure; triggers the LP.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "lp-formulation", value_enum, default_value_t = LpFormulationArg::Dense)]
    lp_formulation: LpFormulationArg,
    /// Write the solved policy as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Export the solved linear program in MPS format.
    #[arg(long)]
    mps: Option<PathBuf>,
}

#[derive(Args)]
struct FrontierArgs {
    /// Instance file; repeat for several probability sources.
    #[arg(long, required = true)]
    instance: Vec<PathBuf>,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Probability scale factors, applied before the cap.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 3.0, 10.0, 30.0])]
    scales: Vec<f64>,
    /// Probabilities are clipped here after scaling.
    #[arg(long, default_value_t = PROBABILITY_CAP)]
    cap: f64,
    /// Grid points: delta = i/(grid*T) for i = 1..=grid.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Also draw the frontier as an SVG chart.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Policy JSON; defaults to the closed-form engagement optimum.
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Write the trajectory as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file to verify; repeatable.
    #[arg(long)]
    instance: Vec<PathBuf>,
    /// Verify this many seeded random instances instead of files.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Diversity floor; defaults to 1/(2T) per instance.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long = "max-n", default_value_t = 30)]
    max_n: usize,
    #[arg(long = "max-t", default_value_t = 4)]
    max_t: usize,
    /// Write the full verification report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Config(String),
    Io(String),
    Solver(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Verify(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Solver(m) | CliError::Verify(m) => m,
        }
    }
}

impl From<InstanceIoError> for CliError {
    fn from(e: InstanceIoError) -> Self {
        match e {
            InstanceIoError::Read { .. } | InstanceIoError::Write { .. } => {
                CliError::Io(e.to_string())
            }
            InstanceIoError::Json(_) | InstanceIoError::Invalid(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Read { .. } | FileError::Write { .. } => CliError::Io(e.to_string()),
            FileError::Json(_) | FileError::Invalid(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Policy(inner) => CliError::Config(inner.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Grid { ref source, .. } => match source {
                LpError::Policy(_) => CliError::Config(e.to_string()),
                _ => CliError::Solver(e.to_string()),
            },
            AnalysisError::Lp(inner) => CliError::from(inner),
            AnalysisError::ZeroBeta
            | AnalysisError::InvalidScale(_)
            | AnalysisError::InvalidCap(_)
            | AnalysisError::Instance(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Lp(inner) => CliError::from(inner),
            DynamicsError::Net(inner) => CliError::from(inner),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()
        {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen(args) => run_gen(args),
        Command::Ingest(args) => run_ingest(args),
        Command::Solve(args) => run_solve(args),
        Command::Frontier(args) => run_frontier(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("failed to read {}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("failed to write {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let (instance, warnings) = read_instance(path)?;
    for w in &warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(instance)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    inputs: BTreeMap<String, String>,
    params: serde_json::Value,
    outputs: BTreeMap<String, String>,
    versions: BTreeMap<String, String>,
}

impl Manifest {
    fn new(command: &str, params: serde_json::Value) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("injectopt".to_string(), env!("CARGO_PKG_VERSION").to_string());
        Manifest {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            params,
            outputs: BTreeMap::new(),
            versions,
        }
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut bytes =
            serde_json::to_vec_pretty(self).expect("manifest serialization cannot fail");
        bytes.push(b'\n');
        write_bytes(&dir.join("manifest.json"), &bytes)
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("failed to create {}: {e}", dir.display())))
}

fn run_gen(args: GenArgs) -> Result<(), CliError> {
    let (spec, out) = match args.kind {
        GenKind::Tight { n, num_types, alpha, beta, out } => {
            (GeneratorSpec::Tightness { n, num_types, alpha, beta }, out)
        }
        GenKind::Random { n, num_types, edge_prob, p_min, p_max, seed, out } => {
            (GeneratorSpec::RandomGraph { n, num_types, edge_prob, p_min, p_max, seed }, out)
        }
        GenKind::Homogeneous { n, num_types, value, out } => {
            (GeneratorSpec::Homogeneous { n, num_types, value }, out)
        }
        GenKind::Empty { n, num_types, p_min, p_max, seed, out } => (
            GeneratorSpec::Empty {
                n,
                num_types,
                p: None,
                p_min: Some(p_min),
                p_max: Some(p_max),
                seed: Some(seed),
            },
            out,
        ),
        GenKind::FromSpec { spec, out } => (read_generator_spec(&spec)?, out),
    };
    let instance = generate(&spec)?;
    write_bytes(&out, &instance_to_json(&instance))?;
    println!(
        "wrote {}: n={} T={} sha256={}",
        out.display(),
        instance.n(),
        instance.num_types(),
        instance_hash(&instance)
    );
    Ok(())
}

fn run_ingest(args: IngestArgs) -> Result<(), CliError> {
    let tweet_bytes = read_bytes(&args.tweets)?;
    let edge_bytes = read_bytes(&args.edges)?;
    let tweets_text = String::from_utf8_lossy(&tweet_bytes);
    let edges_text = String::from_utf8_lossy(&edge_bytes);
    let records = parse_tweets_jsonl(&tweets_text)?;
    let edges = parse_edges_tsv(&edges_text)?;
    let config = PipelineConfig {
        top_hashtags: args.top_hashtags,
        louvain_seed: args.seed,
        prior: PriorConfig {
            a: args.prior_a,
            b: args.prior_b,
            samples: args.samples,
            seed: args.seed.wrapping_add(1),
        },
    };
    let output = run_pipeline(&records, &edges, &config)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }

    ensure_dir(&args.out_dir)?;
    let mut manifest = Manifest::new(
        "ingest",
        serde_json::json!({
            "top_hashtags": args.top_hashtags,
            "seed": args.seed,
            "samples": args.samples,
            "prior_a": args.prior_a,
            "prior_b": args.prior_b,
        }),
    );
    manifest.inputs.insert(args.tweets.display().to_string(), sha256_hex(&tweet_bytes));
    manifest.inputs.insert(args.edges.display().to_string(), sha256_hex(&edge_bytes));

    let mut emit = |name: &str, bytes: &[u8]| -> Result<(), CliError> {
        write_bytes(&args.out_dir.join(name), bytes)?;
        manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    };
    emit("instance_mode.json", &instance_to_json(&output.instance_mode))?;
    for (k, sample) in output.instance_samples.iter().enumerate() {
        emit(&format!("instance_beta_sample_{}.json", k + 1), &instance_to_json(sample))?;
    }
    emit("types.csv", assignment_to_csv(&output.assignment).as_bytes())?;
    manifest.write(&args.out_dir)?;

    println!(
        "ingested {} records: {} users, {} edges, {} hashtag types",
        records.len(),
        output.users.len(),
        output.instance_mode.edges().len(),
        output.assignment.num_types()
    );
    println!("wrote {} files to {}", output.instance_samples.len() + 3, args.out_dir.display());
    Ok(())
}

fn run_solve(args: SolveArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let hash = instance_hash(&instance);
    let (closed_policy, closed_value) = optimal_policy(&instance)?;
    println!("closed-form optimum = {closed_value}");

    let formulation = DiversityFormulation::from(args.lp_formulation);
    let policy_file = match args.delta {
        Some(delta) => {
            let (policy, value) = opt_delta_with(&instance, delta, formulation)?;
            println!("delta = {delta}");
            println!("lp optimum = {value}");
            let cost = cost_of_diversity(&instance, delta)?;
            println!("cost of diversity = {cost}");
            PolicyFile::new(PolicyMethod::Lp, Some(delta), hash.as_str(), &policy)
        }
        None => PolicyFile::new(PolicyMethod::Optimal, None, hash.as_str(), &closed_policy),
    };

    if let Some(mps_path) = &args.mps {
        let lp = match args.delta {
            Some(delta) => match formulation {
                DiversityFormulation::Dense => build_diversity_lp(&instance, delta)?,
                DiversityFormulation::Substituted => {
                    build_diversity_lp_substituted(&instance, delta)?
                }
            },
            None => build_engagement_lp(&instance)?,
        };
        write_bytes(mps_path, to_mps(&lp, "INJECTOPT").as_bytes())?;
        println!("wrote {}", mps_path.display());
    }
    if let Some(out) = &args.out {
        write_policy(&policy_file, out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run_frontier(args: FrontierArgs) -> Result<(), CliError> {
    if args.grid == 0 {
        return Err(CliError::Config("--grid must be at least 1".to_string()));
    }
    ensure_dir(&args.out_dir)?;

    let mut manifest = Manifest::new(
        "frontier",
        serde_json::json!({
            "scales": args.scales,
            "cap": args.cap,
            "grid": args.grid,
            "svg": args.svg,
        }),
    );

    struct Group {
        source: String,
        scale: f64,
        num_types: usize,
        rows: Vec<FrontierRow>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for path in &args.instance {
        let instance = load_instance(path)?;
        manifest.inputs.insert(path.display().to_string(), instance_hash(&instance));
        let source = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let grid = default_grid(instance.num_types(), args.grid);
        for &scale in &args.scales {
            let scaled = scale_probabilities(&instance, scale, args.cap)?;
            let rows = frontier(&scaled, &grid)?;
            groups.push(Group {
                source: source.clone(),
                scale,
                num_types: instance.num_types(),
                rows,
            });
        }
    }

    let labeled: Vec<LabeledFrontier<'_>> = groups
        .iter()
        .map(|g| LabeledFrontier { rows: &g.rows, scale: g.scale, prob_source: &g.source })
        .collect();
    let csv = injectopt::analysis::frontier_to_csv(&labeled);
    write_bytes(&args.out_dir.join("frontier.csv"), csv.as_bytes())?;
    manifest.outputs.insert("frontier.csv".to_string(), sha256_hex(csv.as_bytes()));

    if args.svg {
        let mut series: Vec<svg::Series> = groups
            .iter()
            .map(|g| svg::Series {
                label: format!("{} x{}", g.source, g.scale),
                points: g.rows.iter().map(|r| (r.delta, r.cost)).collect(),
                dashed: false,
            })
            .collect();
        if let Some(first) = groups.first() {
            series.push(svg::Series {
                label: format!("(T-1) delta, T={}", first.num_types),
                points: first.rows.iter().map(|r| (r.delta, r.bound_worst)).collect(),
                dashed: true,
            });
        }
        let chart =
            svg::line_chart("cost of diversity", "delta", "relative engagement cost", &series);
        write_bytes(&args.out_dir.join("frontier.svg"), chart.as_bytes())?;
        manifest.outputs.insert("frontier.svg".to_string(), sha256_hex(chart.as_bytes()));
    }
    manifest.write(&args.out_dir)?;

    println!(
        "wrote frontier for {} source(s) x {} scale(s) x {} grid points to {}",
        args.instance.len(),
        args.scales.len(),
        args.grid,
        args.out_dir.display()
    );
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let hash = instance_hash(&instance);
    let policy = match &args.policy {
        Some(path) => {
            let (file, policy) = read_policy(path)?;
            if file.instance_hash != hash {
                return Err(CliError::Config(format!(
                    "policy {} was solved for instance {}, not {}",
                    path.display(),
                    file.instance_hash,
                    hash
                )));
            }
            if policy.num_types() != instance.num_types() || policy.n() != instance.n() {
                return Err(CliError::Config(format!(
                    "policy shape ({}, {}) does not match instance ({}, {})",
                    policy.num_types(),
                    policy.n(),
                    instance.num_types(),
                    instance.n()
                )));
            }
            policy
        }
        None => optimal_policy(&instance)?.0,
    };

    let matrices = build_type_matrices(&instance);
    let trajectory = simulate(&matrices, &Schedule::constant(policy, args.steps))?;
    let last = trajectory.final_state();
    let bound = tail_bound(&matrices);
    println!("steps = {}", args.steps);
    println!("final engagement = {}", engagement(last, &instance)?);
    println!("final diversity = {}", diversity(last));
    println!("distance-to-limit bound = {}", bound.after(args.steps));
    if let Some(out) = &args.out {
        write_bytes(out, trajectory_to_csv(&trajectory).as_bytes())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyEntry {
    source: String,
    delta: f64,
    convergence: ConvergenceReport,
    bound_checks: Vec<CheckResult>,
    passed: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    steps: usize,
    instances: Vec<VerifyEntry>,
    passed: bool,
}

/// Worst-case-bound and monotonicity checks over the default delta grid.
/// Each check records the largest excess seen, which must stay within
/// solver tolerance.
fn bound_checks(instance: &Instance) -> Result<Vec<CheckResult>, CliError> {
    let rows = frontier(instance, &default_grid(instance.num_types(), 10))?;
    let max_of = |vals: &mut dyn Iterator<Item = f64>| vals.fold(f64::NEG_INFINITY, f64::max);
    let cost_vs_main = max_of(&mut rows.iter().map(|r| r.cost - r.bound_main));
    let cost_vs_worst = max_of(&mut rows.iter().map(|r| r.cost - r.bound_worst));
    let cost_decrease = max_of(&mut rows.windows(2).map(|w| w[0].cost - w[1].cost));
    let opt_increase = max_of(&mut rows.windows(2).map(|w| w[1].opt_delta - w[0].opt_delta));
    Ok(vec![
        CheckResult::le("cost_below_main_bound", cost_vs_main, 1e-7),
        CheckResult::le("cost_below_worst_case_bound", cost_vs_worst, 1e-7),
        CheckResult::le("cost_nondecreasing_in_delta", cost_decrease, 1e-7),
        CheckResult::le("opt_nonincreasing_in_delta", opt_increase, 1e-7),
    ])
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.instance.is_empty() && args.random.is_none() {
        return Err(CliError::Config(
            "provide at least one --instance or a --random count".to_string(),
        ));
    }
    if !args.instance.is_empty() && args.random.is_some() {
        return Err(CliError::Config(
            "--instance and --random are mutually exclusive".to_string(),
        ));
    }
    if args.max_n < 2 || args.max_t < 2 {
        return Err(CliError::Config("--max-n and --max-t must be at least 2".to_string()));
    }

    let mut sources: Vec<(String, Instance)> = Vec::new();
    if let Some(count) = args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for k in 0..count {
            let n = rng.random_range(2..=args.max_n);
            let num_types = rng.random_range(2..=args.max_t);
            let edge_prob = rng.random_range(0.0..0.8);
            let p_max = rng.random_range(0.05..0.9);
            let seed = rng.random::<u64>();
            let instance = generate(&GeneratorSpec::RandomGraph {
                n,
                num_types,
                edge_prob,
                p_min: 0.0,
                p_max,
                seed,
            })?;
            sources.push((format!("random[{k}] seed={seed}"), instance));
        }
    } else {
        for path in &args.instance {
            sources.push((path.display().to_string(), load_instance(path)?));
        }
    }

    let mut entries = Vec::with_capacity(sources.len());
    for (source, instance) in &sources {
        let delta = args
            .delta
            .unwrap_or_else(|| 1.0 / (2.0 * instance.num_types() as f64));
        let convergence = verify_theorem1(instance, delta, args.steps, None)?;
        let bounds = bound_checks(instance)?;
        let passed = convergence.passed && bounds.iter().all(|c| c.passed);
        if passed {
            println!("ok   {source}");
        } else {
            println!("FAIL {source}");
            for check in convergence.checks.iter().chain(&bounds) {
                if !check.passed {
                    println!(
                        "     {}: measured {} vs bound {} (margin {})",
                        check.name, check.measured, check.bound, check.margin
                    );
                }
            }
        }
        entries.push(VerifyEntry {
            source: source.clone(),
            delta,
            convergence,
            bound_checks: bounds,
            passed,
        });
    }

    let all_passed = entries.iter().all(|e| e.passed);
    let report = VerifyReport { steps: args.steps, instances: entries, passed: all_passed };
    if let Some(out) = &args.out {
        let mut bytes =
            serde_json::to_vec_pretty(&report).expect("report serialization cannot fail");
        bytes.push(b'\n');
        write_bytes(out, &bytes)?;
        println!("wrote {}", out.display());
    }
    println!(
        "verified {} instance(s): {}",
        report.instances.len(),
        if all_passed { "all checks passed" } else { "some checks FAILED" }
    );
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Verify("verification failed".to_string()))
    }
}
