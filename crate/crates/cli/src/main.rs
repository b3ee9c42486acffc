//! `climb`: command-line front end for climb-core.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use climb_core::bench::{self, DiscoveryConfig, DsepConfig, NamedNet, NetConfig, ZeroConfig};
use climb_core::blanket::{climb, SearchOptions};
use climb_core::ci::{CiQuery, TestKind};
use climb_core::data::{dsep_fixture, forward_sample, load_csv, parse_bif, write_csv, BayesNet, SampleSpec};
use climb_core::graph::{climb_orient, orient_cpdag, pc_stable_skeleton, PDag, PDagJson};
use climb_core::{CategoricalTable, Error, Result};

#[derive(Parser)]
#[command(name = "climb", version, about = "Causal discovery on discrete data with stochastic complexity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether X and Y are independent given Z.
    Citest(CitestArgs),
    /// Markov blanket of one target, split into parents, children and spouses.
    Mb(MbArgs),
    /// Stable PC: skeleton plus v-structure and Meek orientation.
    Pc(PcArgs),
    /// Direct every undirected edge of a partial DAG.
    Orient(OrientArgs),
    /// Forward-sample a BIF network.
    Sample(SampleArgs),
    /// Sample the four-node F, D, E, T diamond.
    DsepFixture(FixtureArgs),
    /// Run a benchmark and write `<experiment>.json` and `<experiment>.csv`.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Sci,
    G2,
    Cmi,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row; a `<name>.domains` sidecar is read if present.
    #[arg(long)]
    data: PathBuf,
    /// The file has no header row; columns are named V0, V1, ...
    #[arg(long)]
    no_header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<CategoricalTable> {
        load_csv(&self.data, !self.no_header)
    }
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, value_enum)]
    test: TestArg,
    /// Significance level for g2.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Threshold in bits for cmi.
    #[arg(long, default_value_t = 0.0)]
    cutoff: f64,
}

impl TestArgs {
    fn kind(&self) -> TestKind {
        match self.test {
            TestArg::Sci => TestKind::Sci,
            TestArg::G2 => TestKind::G2 { alpha: self.alpha },
            TestArg::Cmi => TestKind::Cmi { cutoff: self.cutoff },
        }
    }
}

#[derive(Args)]
struct CitestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Conditioning variables, comma-separated or repeated.
    #[arg(long, value_delimiter = ',')]
    z: Vec<String>,
    #[command(flatten)]
    test: TestArgs,
}

#[derive(Args)]
struct MbArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    target: String,
    #[command(flatten)]
    test: TestArgs,
    #[arg(long, default_value_t = 3)]
    max_cond: usize,
    #[arg(long, default_value_t = 20)]
    partition_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PcTest {
    Sci,
    G2,
}

#[derive(Args)]
struct PcArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    test: PcTest,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 3)]
    max_cond: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OrientArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    pdag: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    bif: PathBuf,
    #[arg(short = 'n', long = "n")]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(short = 'n', long = "n")]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Dsep,
    Mb,
    Partition,
    Cmb,
    Discovery,
    ZeroBaseline,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Noise levels, comma-separated; network experiments use the first.
    #[arg(long, value_delimiter = ',')]
    noise: Vec<f64>,
    /// Network files for mb, partition, cmb (first file) and discovery (all).
    #[arg(long, num_args = 1..)]
    bif: Vec<PathBuf>,
    /// External CPDAG (PDag JSON) to orient in the discovery experiment.
    #[arg(long)]
    cpdag: Option<PathBuf>,
    /// Tests compared by the dsep experiment, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    tests: Vec<TestArg>,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    cutoff: f64,
    #[arg(long, default_value_t = 3)]
    max_cond: usize,
    /// Domain sizes of Y for the zero-baseline experiment, comma-separated.
    #[arg(long, value_delimiter = ',')]
    ky: Vec<usize>,
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn names(table: &CategoricalTable, vars: &[usize]) -> Vec<String> {
    vars.iter().map(|&v| table.name(v).to_string()).collect()
}

fn read_net(path: &Path) -> Result<BayesNet> {
    parse_bif(&std::fs::read_to_string(path)?)
}

fn read_pdag(path: &Path) -> Result<PDag> {
    let json: PDagJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    PDag::from_json(&json)
}

fn write_pdag(graph: &PDag, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&graph.to_json())?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn citest(args: &CitestArgs) -> Result<()> {
    let table = args.data.load()?;
    let x = table.require(&args.x)?;
    let y = table.require(&args.y)?;
    let z = args.z.iter().map(|name| table.require(name)).collect::<Result<Vec<_>>>()?;
    let kind = args.test.kind();
    let verdict = kind.build().test(&CiQuery::new(&table, x, y, &z)?);
    print_json(&json!({
        "x": args.x,
        "y": args.y,
        "z": args.z,
        "test": kind.label(),
        "statistic": verdict.statistic,
        "independent": verdict.independent,
        "p_value": verdict.p_value,
    }))
}

fn mb(args: &MbArgs) -> Result<()> {
    let table = args.data.load()?;
    let target = table.require(&args.target)?;
    let opts = SearchOptions { max_cond: args.max_cond, partition_cap: args.partition_cap };
    let found = climb(target, &table, args.test.kind().build().as_ref(), &opts)?;
    print_json(&json!({
        "parents": names(&table, &found.parents),
        "children": names(&table, &found.children),
        "spouses": names(&table, &found.spouses),
        "tests_performed": found.tests_performed,
    }))
}

fn pc(args: &PcArgs) -> Result<()> {
    let table = args.data.load()?;
    let kind = match args.test {
        PcTest::Sci => TestKind::Sci,
        PcTest::G2 => TestKind::G2 { alpha: args.alpha },
    };
    let skeleton = pc_stable_skeleton(&table, kind.build().as_ref(), Some(args.max_cond));
    let cpdag = orient_cpdag(&skeleton.graph, &skeleton.sepsets);
    write_pdag(&cpdag, &args.out)?;
    print_json(&json!({
        "edges": cpdag.n_edges(),
        "undirected": cpdag.n_undirected(),
        "tests_performed": skeleton.tests_performed,
    }))
}

fn orient(args: &OrientArgs) -> Result<()> {
    let table = args.data.load()?;
    let pdag = read_pdag(&args.pdag)?;
    if !pdag.is_acyclic() {
        return Err(Error::Graph("the directed part of the input graph has a cycle".into()));
    }
    let oriented = climb_orient(&pdag, &table)?;
    write_pdag(&oriented.graph, &args.out)?;
    print_json(&json!({
        "edges": oriented.graph.n_edges(),
        "cycle_nodes": oriented.cycle_nodes.iter().map(|&v| oriented.graph.name(v)).collect::<Vec<_>>(),
    }))
}

fn sample(args: &SampleArgs) -> Result<()> {
    let net = read_net(&args.bif)?;
    let table = forward_sample(&net, &SampleSpec::new(args.n, args.noise, args.seed)?)?;
    write_csv(&table, &args.out)
}

fn fixture(args: &FixtureArgs) -> Result<()> {
    let fx = dsep_fixture(&SampleSpec::new(args.n, args.noise, args.seed)?)?;
    write_csv(&fx.table, &args.out)
}

fn net_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "net".into(), |s| s.to_string_lossy().into_owned())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let first_net = || -> Result<(String, BayesNet)> {
        let path = args.bif.first().ok_or_else(|| Error::InvalidQuery("--bif is required for this experiment".into()))?;
        Ok((net_name(path), read_net(path)?))
    };
    let net_config = |name: String| {
        let mut c = NetConfig { net: name, alpha: args.alpha, max_cond: args.max_cond, seed: args.seed, ..Default::default() };
        if !args.sizes.is_empty() {
            c.sizes = args.sizes.clone();
        }
        if let Some(r) = args.replicates {
            c.replicates = r;
        }
        if let Some(&noise) = args.noise.first() {
            c.noise = noise;
        }
        c
    };
    let result = match args.experiment {
        Experiment::Dsep => {
            let mut c = DsepConfig { seed: args.seed, ..Default::default() };
            if !args.sizes.is_empty() {
                c.sizes = args.sizes.clone();
            }
            if !args.noise.is_empty() {
                c.noises = args.noise.clone();
            }
            if let Some(r) = args.replicates {
                c.replicates = r;
            }
            if !args.tests.is_empty() {
                c.tests = args
                    .tests
                    .iter()
                    .map(|&test| TestArgs { test, alpha: args.alpha, cutoff: args.cutoff }.kind())
                    .collect();
            }
            bench::run_dsep_benchmark(&c)?
        }
        Experiment::Mb => {
            let (name, net) = first_net()?;
            bench::run_mb_benchmark(&net, &net_config(name))?
        }
        Experiment::Partition => {
            let (name, net) = first_net()?;
            bench::run_partition_benchmark(&net, &net_config(name))?
        }
        Experiment::Cmb => {
            let (name, net) = first_net()?;
            bench::run_cmb_benchmark(&net, &net_config(name))?
        }
        Experiment::Discovery => {
            if args.bif.is_empty() {
                return Err(Error::InvalidQuery("--bif is required for this experiment".into()));
            }
            let nets = args
                .bif
                .iter()
                .map(|path| Ok(NamedNet { name: net_name(path), net: read_net(path)? }))
                .collect::<Result<Vec<_>>>()?;
            let external = args.cpdag.as_deref().map(read_pdag).transpose()?;
            let mut c = DiscoveryConfig { seed: args.seed, alpha: args.alpha, max_cond: args.max_cond, ..Default::default() };
            if !args.sizes.is_empty() {
                c.sizes = args.sizes.clone();
            }
            if let Some(r) = args.replicates {
                c.replicates = r;
            }
            if let Some(&noise) = args.noise.first() {
                c.noise = noise;
            }
            bench::run_causal_discovery(&nets, external.as_ref(), &c)?
        }
        Experiment::ZeroBaseline => {
            let mut c = ZeroConfig { seed: args.seed, ..Default::default() };
            if !args.sizes.is_empty() {
                c.sizes = args.sizes.clone();
            }
            if !args.ky.is_empty() {
                c.ky = args.ky.clone();
            }
            if let Some(r) = args.replicates {
                c.replicates = r;
            }
            bench::run_zero_baseline(&c)?
        }
    };
    let (json_path, csv_path) = result.write(&args.out_dir)?;
    for note in &result.notes {
        log::warn!("{note}");
    }
    print_json(&json!({ "json": json_path, "csv": csv_path, "rows": result.rows.len(), "notes": result.notes }))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::PartitionCap { .. } | Error::Bif { .. } | Error::Csv(_) | Error::Json(_) | Error::Shape(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Citest(a) => citest(a),
        Command::Mb(a) => mb(a),
        Command::Pc(a) => pc(a),
        Command::Orient(a) => orient(a),
        Command::Sample(a) => sample(a),
        Command::DsepFixture(a) => fixture(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
