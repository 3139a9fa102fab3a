use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use catbart::bench::{self, BenchConfig, DgpId, DgpSpec};
use catbart::data::{load_dataset, read_dataset, ColumnKind, ColumnRange, OutcomeScaling, PredictorSchema};
use catbart::graph::{spanning_tree_count, Network, NetworkSet, SplitStrategy};
use catbart::prior::{
    co_clustering_matrix, draw_prior_tree, induced_level_partition, PartitionTarget, PriorConfig,
};
use catbart::sampler::{predict_ensembles, run_chain, ChainConfig, MoveCounts};
use catbart::tree::{FeatureSpace, RegressionTree, TreeJson};
use catbart::{rng, Error, Result};

#[derive(Parser)]
#[command(name = "catbart", version, about = "Sum-of-trees regression with subset-valued categorical splits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sampler on a CSV dataset.
    Fit(FitArgs),
    /// Predict new rows from a fit directory.
    Predict(PredictArgs),
    /// Network utilities.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Level partitions induced by single prior trees.
    PriorPartitions(PartitionArgs),
    /// Prior co-clustering probabilities of the levels.
    Coclust(PartitionArgs),
    /// Replicated method comparison on a synthetic DGP.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Report vertex and edge counts, connectivity and spanning-tree count.
    Check {
        /// Edge list, two whitespace-separated labels per line.
        #[arg(long)]
        edges: PathBuf,
        /// Take the vertex universe from this schema column instead of the file.
        #[arg(long, requires = "column")]
        schema: Option<PathBuf>,
        #[arg(long)]
        column: Option<String>,
    },
}

#[derive(Args)]
struct PriorArgs {
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Prior sd of f(x); 0.25 by default, 1.5 for probit fits.
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Network edge list as `id=path`; repeatable.
    #[arg(long = "network", value_name = "ID=PATH")]
    networks: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[command(flatten)]
    prior: PriorArgs,
    #[arg(long, default_value = "unif")]
    strategy: SplitStrategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Binary outcome with a probit link.
    #[arg(long)]
    probit: bool,
    #[arg(long, default_value_t = 0)]
    min_leaf: usize,
    /// Skip writing trees.ndjson (the fit then cannot be used by `predict`).
    #[arg(long)]
    no_trees: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    fit_dir: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Encoding {
    /// Rules on the categorical predictor itself.
    Subsets,
    /// Rules on one indicator column per level.
    Onehot,
}

#[derive(Args)]
struct PartitionArgs {
    /// Number of unstructured levels, labelled 1..K.
    #[arg(long, conflicts_with = "network")]
    levels: Option<usize>,
    /// Edge list whose vertices are the levels.
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long, default_value = "unif")]
    strategy: SplitStrategy,
    #[arg(long, value_enum, default_value = "subsets")]
    encoding: Encoding,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dgp: DgpId,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    n_test: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Comma-separated: flex_unif, onehot, target, oracle, gs1..gs4, ase<d>.
    #[arg(long, default_value = "flex_unif,onehot")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    /// Use the imbalanced level probabilities.
    #[arg(long)]
    imbalanced: bool,
    #[arg(long, default_value_t = 5)]
    grid_rows: usize,
    #[arg(long, default_value_t = 10)]
    grid_cols: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Everything `predict` needs to reuse a fit, plus the settings it ran with.
#[derive(Serialize, Deserialize)]
struct FitManifest {
    command: String,
    version: String,
    data: String,
    networks: BTreeMap<String, String>,
    strategy: SplitStrategy,
    schema: PredictorSchema,
    cont_ranges: Vec<ColumnRange>,
    scaling: OutcomeScaling,
    probit: bool,
    n_train: usize,
    n_draws: usize,
    prior: PriorConfig,
    chain: ChainConfig,
    moves: MoveCounts,
}

#[derive(Serialize, Deserialize)]
struct DrawRecord {
    draw: usize,
    sigma: f64,
    trees: Vec<TreeJson>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn prior_config(args: &PriorArgs, probit: bool) -> PriorConfig {
    let base = if probit { PriorConfig::probit() } else { PriorConfig::default() };
    PriorConfig {
        n_trees: args.trees,
        alpha: args.alpha,
        beta: args.beta,
        tau_total: args.tau.unwrap_or(base.tau_total),
        ..base
    }
}

fn load_networks(schema: &PredictorSchema, specs: &[String]) -> Result<(NetworkSet, BTreeMap<String, String>)> {
    let mut set = NetworkSet::new();
    let mut paths = BTreeMap::new();
    for spec in specs {
        let (id, path) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--network expects id=path, got `{spec}`")))?;
        let column = schema
            .columns
            .iter()
            .find(|c| c.kind == ColumnKind::Network && c.network.as_deref() == Some(id))
            .ok_or_else(|| Error::Config(format!("no schema column uses network `{id}`")))?;
        let g = Network::from_edge_list(Path::new(path), column.level_universe())?;
        set.insert(id.to_string(), Arc::new(g));
        paths.insert(id.to_string(), path.to_string());
    }
    Ok((set, paths))
}

fn fit(args: FitArgs) -> Result<()> {
    let data = load_dataset(&args.data, &args.schema)?;
    let (networks, network_paths) = load_networks(&data.schema, &args.networks)?;
    let fs = FeatureSpace::from_dataset(&data, &networks, args.strategy)?;
    let prior = prior_config(&args.prior, args.probit);
    let chain = ChainConfig {
        n_iterations: args.iters,
        n_burnin: args.burnin,
        thin: args.thin,
        min_leaf_size: args.min_leaf,
        seed: args.seed,
        probit: args.probit,
        keep_trees: !args.no_trees,
        record_train_fits: true,
        ..ChainConfig::default()
    };
    log::info!("fitting {} rows with {} trees", data.n(), prior.n_trees);
    let samples = run_chain(&data, &fs, &prior, &chain, None)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;

    let path = args.out.join("samples.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    let mut header = vec!["draw".to_string(), "sigma".to_string()];
    header.extend((1..=data.n()).map(|i| format!("fit_{i}")));
    w.write_record(&header)?;
    for (k, sigma) in samples.sigma.iter().enumerate() {
        let mut rec = vec![k.to_string(), sigma.to_string()];
        rec.extend(samples.train_fits[k].iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    if let Some(ensembles) = &samples.trees {
        let path = args.out.join("trees.ndjson");
        let mut w = create(&path)?;
        for (k, trees) in ensembles.iter().enumerate() {
            let rec = DrawRecord {
                draw: k,
                sigma: samples.sigma[k],
                trees: trees.iter().map(RegressionTree::to_json_value).collect(),
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n").map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
    }

    let manifest = FitManifest {
        command: "fit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        data: args.data.display().to_string(),
        networks: network_paths,
        strategy: args.strategy,
        schema: data.schema.clone(),
        cont_ranges: data.cont_ranges.clone(),
        scaling: samples.scaling,
        probit: samples.probit,
        n_train: data.n(),
        n_draws: samples.n_draws(),
        prior,
        chain,
        moves: samples.moves,
    };
    write_json(&args.out.join("manifest.json"), &manifest)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn predict(args: PredictArgs) -> Result<()> {
    let manifest_path = args.fit_dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    let manifest: FitManifest = serde_json::from_str(&text)?;
    let trees_path = args.fit_dir.join("trees.ndjson");
    let file = File::open(&trees_path).map_err(|e| io_err(&trees_path, e))?;
    let mut ensembles = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_err(&trees_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DrawRecord = serde_json::from_str(&line)?;
        let trees = rec
            .trees
            .iter()
            .map(RegressionTree::from_json_value)
            .collect::<Result<Vec<_>>>()?;
        ensembles.push(trees);
    }
    if ensembles.is_empty() {
        return Err(Error::Invalid("the fit directory holds no draws".into()));
    }
    let file = File::open(&args.data).map_err(|e| io_err(&args.data, e))?;
    let x_new = read_dataset(file, manifest.schema.clone(), Some(&manifest.cont_ranges))?;
    let pred = predict_ensembles(&ensembles, &manifest.scaling, manifest.probit, &x_new)?;

    let norm = Normal::standard();
    let mut w = csv::Writer::from_writer(create(&args.out)?);
    w.write_record(["row", "mean", "q025", "q975"])?;
    for i in 0..x_new.n() {
        let mut col: Vec<f64> = pred
            .draws
            .iter()
            .map(|d| if manifest.probit { norm.cdf(d[i]) } else { d[i] })
            .collect();
        col.sort_by(f64::total_cmp);
        w.write_record([
            (i + 1).to_string(),
            pred.mean[i].to_string(),
            quantile(&col, 0.025).to_string(),
            quantile(&col, 0.975).to_string(),
        ])?;
    }
    w.flush().map_err(|e| io_err(&args.out, e))
}

/// Vertex labels in order of first appearance in an edge list.
fn labels_in_file(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut labels: Vec<String> = Vec::new();
    for tok in text.lines().filter(|l| !l.trim_start().starts_with('#')).flat_map(str::split_whitespace) {
        if !labels.iter().any(|l| l == tok) {
            labels.push(tok.to_string());
        }
    }
    Ok(labels)
}

fn graph_check(edges: &Path, schema: Option<&Path>, column: Option<&str>) -> Result<()> {
    let labels = match (schema, column) {
        (Some(s), Some(c)) => {
            let schema = PredictorSchema::from_path(s)?;
            let spec = schema
                .column(c)
                .ok_or_else(|| Error::Config(format!("schema has no column `{c}`")))?;
            spec.level_universe().to_vec()
        }
        _ => labels_in_file(edges)?,
    };
    let g = Network::from_edge_list(edges, &labels)?;
    let components = g.connected_components();
    println!("vertices: {}", g.n_vertices());
    println!("edges: {}", g.n_edges());
    println!("connected: {}", components.len() == 1);
    println!("components: {}", components.len());
    if components.len() == 1 && g.n_vertices() <= 100 {
        println!("spanning trees: {}", spanning_tree_count(&g));
    }
    Ok(())
}

struct PartitionSetup {
    fs: FeatureSpace,
    target: PartitionTarget,
    names: Vec<String>,
    prior: PriorConfig,
}

fn partition_setup(args: &PartitionArgs) -> Result<PartitionSetup> {
    let prior = PriorConfig {
        n_trees: 1,
        alpha: args.alpha,
        beta: args.beta,
        ..PriorConfig::default()
    };
    let network = match (&args.network, args.levels) {
        (Some(path), _) => {
            let labels = labels_in_file(path)?;
            Some(Arc::new(Network::from_edge_list(path, &labels)?))
        }
        (None, Some(_)) => None,
        (None, None) => return Err(Error::Config("give --levels or --network".into())),
    };
    let names: Vec<String> = match (&network, args.levels) {
        (Some(g), _) => g.labels().to_vec(),
        (None, Some(k)) => (1..=k).map(|i| i.to_string()).collect(),
        _ => unreachable!(),
    };
    if names.is_empty() {
        return Err(Error::Config("at least one level is needed".into()));
    }
    let k = names.len();
    let (fs, target) = match args.encoding {
        Encoding::Onehot => (
            FeatureSpace::continuous(k),
            PartitionTarget::OneHot { first: 0, n_levels: k },
        ),
        Encoding::Subsets => {
            let fs = match network {
                Some(g) => FeatureSpace::default().with_network("levels", g, args.strategy),
                None => {
                    if args.strategy.uses_network() {
                        return Err(Error::Config(format!("{} needs --network", args.strategy)));
                    }
                    FeatureSpace::default().with_categorical("levels", k)
                }
            };
            (fs, PartitionTarget::Categorical { var: 0 })
        }
    };
    fs.validate()?;
    Ok(PartitionSetup {
        fs,
        target,
        names,
        prior,
    })
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn prior_partitions(args: PartitionArgs) -> Result<()> {
    let setup = partition_setup(&args)?;
    let mut rng = rng::stream(args.seed, 0);
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    w.write_record(["draw", "n_blocks", "blocks"])?;
    for d in 0..args.draws {
        let t = draw_prior_tree(&setup.prior, &setup.fs, &mut rng)?;
        let p = induced_level_partition(&t, &setup.fs, setup.target)?;
        w.write_record([d.to_string(), p.blocks.len().to_string(), p.format(&setup.names)])?;
    }
    w.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

fn coclust(args: PartitionArgs) -> Result<()> {
    let setup = partition_setup(&args)?;
    let mut rng = rng::stream(args.seed, 0);
    let m = co_clustering_matrix(&setup.prior, &setup.fs, setup.target, args.draws, &mut rng)?;
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    let mut header = vec!["level".to_string()];
    header.extend(setup.names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in setup.names.iter().zip(&m) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let mut dgp = DgpSpec::new(args.dgp, args.n, args.seed);
    dgp.n_test = args.n_test;
    dgp.grid_rows = args.grid_rows;
    dgp.grid_cols = args.grid_cols;
    if args.imbalanced {
        dgp = dgp.imbalanced();
    }
    let cfg = BenchConfig {
        dgp,
        reps: args.reps,
        methods: bench::parse_methods(&args.methods)?,
        seed: args.seed,
        prior: PriorConfig {
            n_trees: args.trees,
            ..PriorConfig::default()
        },
        chain: ChainConfig {
            n_iterations: args.iters,
            n_burnin: args.burnin,
            record_train_fits: false,
            ..ChainConfig::default()
        },
    };
    let cmp = bench::run_comparison(&cfg)?;
    bench::write_comparison(&cmp, &cfg, &args.out)?;
    for (name, s) in &cmp.summary.methods {
        println!(
            "{name}: mean mse {:.4}, relative to {} {:.3}",
            s.mean.get("mse").copied().unwrap_or(f64::NAN),
            cmp.summary.baseline,
            s.relative_mse
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Graph {
            command: GraphCommand::Check { edges, schema, column },
        } => graph_check(&edges, schema.as_deref(), column.as_deref()),
        Command::PriorPartitions(a) => prior_partitions(a),
        Command::Coclust(a) => coclust(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
