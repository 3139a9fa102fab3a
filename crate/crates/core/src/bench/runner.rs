//! Experiment drivers: per-method fits, the oracle baseline and the
//! replicated comparison with its output files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{oracle_blocks, simulate, DgpSpec, Simulation};
use super::metrics::{regression_metrics, MetricsReport};
use crate::data::{one_hot_encode, target_encode, ColumnRange, ColumnSpec, Dataset, PredictorSchema};
use crate::error::{Error, Result};
use crate::graph::{adjacency_spectral_embedding, NetworkSet, SplitStrategy};
use crate::prior::PriorConfig;
use crate::rng;
use crate::sampler::{run_chain, ChainConfig};
use crate::tree::FeatureSpace;

/// A way of handling the categorical (or network) predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Uniform random level subsets.
    FlexUnif,
    OneHot,
    Target,
    /// Separate continuous-only fits per true level group.
    Oracle,
    /// Graph split with one of `gs1..gs4`.
    Graph(SplitStrategy),
    /// Vertex label replaced by its `d`-dimensional adjacency spectral embedding.
    Ase(usize),
}

impl Method {
    /// Stable number used to derive the method's chain seeds.
    fn code(&self) -> u64 {
        match self {
            Method::FlexUnif => 0,
            Method::OneHot => 1,
            Method::Target => 2,
            Method::Oracle => 3,
            Method::Graph(s) => 4 + SplitStrategy::ALL.iter().position(|x| x == s).unwrap_or(0) as u64,
            Method::Ase(d) => 100 + *d as u64,
        }
    }

    fn needs_network(&self) -> bool {
        matches!(self, Method::Graph(_) | Method::Ase(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::FlexUnif => f.write_str("flex_unif"),
            Method::OneHot => f.write_str("onehot"),
            Method::Target => f.write_str("target"),
            Method::Oracle => f.write_str("oracle"),
            Method::Graph(s) => f.write_str(s.as_str()),
            Method::Ase(d) => write!(f, "ase{d}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "flex_unif" | "unif" => return Ok(Method::FlexUnif),
            "onehot" => return Ok(Method::OneHot),
            "target" => return Ok(Method::Target),
            "oracle" => return Ok(Method::Oracle),
            _ => {}
        }
        if let Some(d) = s.strip_prefix("ase") {
            let d = d.trim_start_matches('_');
            return match d.parse::<usize>() {
                Ok(d) if d > 0 => Ok(Method::Ase(d)),
                _ => Err(Error::Config(format!("bad embedding dimension in `{s}`"))),
            };
        }
        match s.parse::<SplitStrategy>() {
            Ok(st) if st.uses_network() => Ok(Method::Graph(st)),
            _ => Err(Error::Config(format!("unknown method `{s}`"))),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Method, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

/// Settings of a replicated comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Data setting; its `seed` is replaced per replication.
    pub dgp: DgpSpec,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub prior: PriorConfig,
    /// Chain settings; its `seed` is replaced per fit.
    pub chain: ChainConfig,
}

impl BenchConfig {
    /// Rejects method/DGP combinations that cannot run, all at once.
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        self.prior.validate()?;
        self.chain.validate()?;
        if self.reps == 0 {
            return Err(Error::Config("at least one replication is needed".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        let mut problems = Vec::new();
        for m in &self.methods {
            if m.needs_network() && !self.dgp.id.is_network() {
                problems.push(format!("{m} needs a network DGP, not {}", self.dgp.id));
            }
            if *m == Method::Oracle && self.dgp.id.level_dgp().is_none() {
                problems.push(format!("oracle has no true level groups for {}", self.dgp.id));
            }
            if let Method::Ase(d) = m {
                let n_v = self.dgp.grid_rows * self.dgp.grid_cols;
                if *d > n_v {
                    problems.push(format!("{m} exceeds the {n_v} vertices"));
                }
            }
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            problems.push("methods are listed more than once".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Data seed of replication `rep`.
    pub fn data_seed(&self, rep: usize) -> u64 {
        rng::stream(self.seed, 2 * rep as u64).next_u64()
    }

    /// Chain seed of `method` in replication `rep`.
    pub fn chain_seed(&self, rep: usize, method: Method) -> u64 {
        let mut r = rng::stream(self.seed, 2 * rep as u64 + 1);
        r.set_word_pos(16 * method.code() as u128);
        r.next_u64()
    }
}

fn chain_with_seed(cfg: &ChainConfig, seed: u64) -> ChainConfig {
    ChainConfig {
        seed,
        record_train_fits: false,
        keep_trees: false,
        ..cfg.clone()
    }
}

fn fit_predict(
    train: &Dataset,
    test: &Dataset,
    fs: &FeatureSpace,
    prior: &PriorConfig,
    chain: &ChainConfig,
) -> Result<Vec<f64>> {
    let samples = run_chain(train, fs, prior, chain, Some(test))?;
    Ok(samples.test_mean().expect("test data was supplied"))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Replaces the vertex column with `d` embedding coordinates, rescaled to
/// [0, 1] over all vertices.
fn with_embedding(ds: &Dataset, embedding: &nalgebra::DMatrix<f64>) -> Dataset {
    let d = embedding.ncols();
    let mut columns: Vec<ColumnSpec> = ds
        .schema
        .continuous_positions()
        .into_iter()
        .map(|p| ds.schema.columns[p].clone())
        .collect();
    let mut x_cont = ds.x_cont.clone();
    let mut ranges = ds.cont_ranges.clone();
    for k in 0..d {
        let col: Vec<f64> = embedding.column(k).iter().copied().collect();
        let range = ColumnRange::of(&col);
        columns.push(ColumnSpec::continuous(format!("ase{}", k + 1)));
        x_cont.push(ds.x_cat[0].iter().map(|&v| range.rescale(col[v as usize])).collect());
        ranges.push(range);
    }
    let schema = PredictorSchema {
        columns,
        outcome: ds.schema.outcome.clone(),
    };
    Dataset::from_parts(schema, x_cont, Vec::new(), ds.y.clone(), ranges).expect("embedding keeps the row count")
}

/// Fits one continuous-only ensemble per true level group of `dgp{d}` and
/// predicts each test point with its group's ensemble. Returns the test
/// predictions. A group without training rows borrows a model fitted to
/// all training rows.
pub fn oracle_predict(
    d: u8,
    train: &Dataset,
    test: &Dataset,
    prior: &PriorConfig,
    chain: &ChainConfig,
) -> Result<Vec<f64>> {
    if train.p_cat() == 0 || test.p_cat() == 0 {
        return Err(Error::Config("the oracle needs the categorical column".into()));
    }
    let mut pred = vec![f64::NAN; test.n()];
    let mut global: Option<Vec<f64>> = None;
    for (b, block) in oracle_blocks(d).iter().enumerate() {
        let rows_of = |ds: &Dataset| -> Vec<usize> {
            (0..ds.n()).filter(|&i| block.contains(&ds.x_cat[0][i])).collect()
        };
        let test_rows = rows_of(test);
        if test_rows.is_empty() {
            continue;
        }
        let train_rows = rows_of(train);
        let block_pred = if train_rows.is_empty() {
            log::warn!("oracle group {b} has no training rows; using the pooled model");
            if global.is_none() {
                let tr = train.without_categoricals();
                let te = test.without_categoricals();
                let fs = FeatureSpace::from_dataset(&tr, &NetworkSet::new(), SplitStrategy::Unif)?;
                global = Some(fit_predict(&tr, &te, &fs, prior, chain)?);
            }
            let g = global.as_ref().expect("just fitted");
            test_rows.iter().map(|&i| g[i]).collect()
        } else {
            let tr = train.select_rows(&train_rows).without_categoricals();
            let te = test.select_rows(&test_rows).without_categoricals();
            let fs = FeatureSpace::from_dataset(&tr, &NetworkSet::new(), SplitStrategy::Unif)?;
            let cfg = ChainConfig {
                seed: rng::stream(chain.seed, b as u64).next_u64(),
                ..chain.clone()
            };
            fit_predict(&tr, &te, &fs, prior, &cfg)?
        };
        for (&i, p) in test_rows.iter().zip(block_pred) {
            pred[i] = p;
        }
    }
    Ok(pred)
}

/// Oracle baseline metrics for `dgp{d}`; `truth` holds the noise-free test
/// means.
pub fn run_oracle(
    d: u8,
    train: &Dataset,
    test: &Dataset,
    truth: &[f64],
    prior: &PriorConfig,
    chain: &ChainConfig,
) -> Result<MetricsReport> {
    let pred = oracle_predict(d, train, test, prior, chain)?;
    score(train, test, truth, &pred)
}

fn score(train: &Dataset, test: &Dataset, truth: &[f64], pred: &[f64]) -> Result<MetricsReport> {
    let ybar = mean(&train.y);
    let mut report = regression_metrics(truth, pred, ybar)?;
    report.smse = regression_metrics(&test.y, pred, ybar)?.smse;
    Ok(report)
}

/// Test-set predictions of `method` on one simulated replication.
pub fn method_predict(
    method: Method,
    spec: &DgpSpec,
    sim: &Simulation,
    prior: &PriorConfig,
    chain: &ChainConfig,
) -> Result<Vec<f64>> {
    let train = &sim.train.data;
    let test = &sim.test.data;
    let networks = spec.network_set();
    match method {
        Method::FlexUnif | Method::Graph(_) => {
            let strategy = match method {
                Method::Graph(s) => s,
                _ => SplitStrategy::Unif,
            };
            let fs = FeatureSpace::from_dataset(train, &networks, strategy)?;
            fit_predict(train, test, &fs, prior, chain)
        }
        Method::OneHot => {
            let (tr, te) = (one_hot_encode(train), one_hot_encode(test));
            let fs = FeatureSpace::from_dataset(&tr, &networks, SplitStrategy::Unif)?;
            fit_predict(&tr, &te, &fs, prior, chain)
        }
        Method::Target => {
            let tr = target_encode(train, train)?;
            let te = target_encode(train, test)?;
            let fs = FeatureSpace::from_dataset(&tr, &networks, SplitStrategy::Unif)?;
            fit_predict(&tr, &te, &fs, prior, chain)
        }
        Method::Oracle => {
            let d = spec
                .id
                .level_dgp()
                .ok_or_else(|| Error::Config(format!("oracle is undefined for {}", spec.id)))?;
            oracle_predict(d, train, test, prior, chain)
        }
        Method::Ase(d) => {
            let g = spec
                .network()
                .ok_or_else(|| Error::Config(format!("{method} needs a network DGP")))?;
            let emb = adjacency_spectral_embedding(&g, d)?;
            let (tr, te) = (with_embedding(train, &emb), with_embedding(test, &emb));
            let fs = FeatureSpace::from_dataset(&tr, &networks, SplitStrategy::Unif)?;
            fit_predict(&tr, &te, &fs, prior, chain)
        }
    }
}

/// Metrics of one method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub method: Method,
    pub fold: usize,
    pub report: MetricsReport,
}

/// Per-method averages over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub n_folds: usize,
    /// Mean of each metric over folds.
    pub mean: BTreeMap<String, f64>,
    /// Mean over folds of this method's MSE divided by the baseline's.
    pub relative_mse: f64,
    /// Folds in which this method's MSE is below the baseline's.
    pub wins_vs_baseline: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub dgp: String,
    pub baseline: Method,
    pub methods: BTreeMap<String, MethodSummary>,
}

/// All per-fold results of a comparison plus their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub folds: Vec<FoldResult>,
    pub summary: ComparisonSummary,
}

impl Comparison {
    /// Per-fold MSE of `method`, in fold order.
    pub fn mse_of(&self, method: Method) -> Vec<f64> {
        self.folds
            .iter()
            .filter(|f| f.method == method)
            .map(|f| f.report.mse.unwrap_or(f64::NAN))
            .collect()
    }
}

/// The reference method for relative errors: one-hot when present,
/// otherwise the first listed method.
pub fn baseline_method(methods: &[Method]) -> Method {
    if methods.contains(&Method::OneHot) {
        Method::OneHot
    } else {
        methods[0]
    }
}

fn summarize(cfg: &BenchConfig, folds: &[FoldResult]) -> ComparisonSummary {
    let baseline = baseline_method(&cfg.methods);
    let base_mse: Vec<f64> = folds
        .iter()
        .filter(|f| f.method == baseline)
        .map(|f| f.report.mse.unwrap_or(f64::NAN))
        .collect();
    let mut methods = BTreeMap::new();
    for &m in &cfg.methods {
        let rows: Vec<&FoldResult> = folds.iter().filter(|f| f.method == m).collect();
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in &rows {
            for (k, v) in r.report.entries() {
                let e = sums.entry(k.to_string()).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        let mse: Vec<f64> = rows.iter().map(|r| r.report.mse.unwrap_or(f64::NAN)).collect();
        let ratios: Vec<f64> = mse.iter().zip(&base_mse).map(|(a, b)| a / b).collect();
        methods.insert(
            m.to_string(),
            MethodSummary {
                n_folds: rows.len(),
                mean: sums.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect(),
                relative_mse: mean(&ratios),
                wins_vs_baseline: mse.iter().zip(&base_mse).filter(|(a, b)| a < b).count(),
            },
        );
    }
    ComparisonSummary {
        dgp: cfg.dgp.id.to_string(),
        baseline,
        methods,
    }
}

/// Runs every method on `cfg.reps` simulated replications. Replications and
/// methods run in parallel; each job's seed depends only on the master seed,
/// the replication and the method, so results are reproducible.
pub fn run_comparison(cfg: &BenchConfig) -> Result<Comparison> {
    cfg.validate()?;
    let sims: Vec<Simulation> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            simulate(&DgpSpec {
                seed: cfg.data_seed(rep),
                ..cfg.dgp.clone()
            })
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Method)> = (0..cfg.reps)
        .flat_map(|rep| cfg.methods.iter().map(move |&m| (rep, m)))
        .collect();
    let folds: Vec<FoldResult> = jobs
        .into_par_iter()
        .map(|(rep, method)| {
            let sim = &sims[rep];
            let chain = chain_with_seed(&cfg.chain, cfg.chain_seed(rep, method));
            let pred = method_predict(method, &cfg.dgp, sim, &cfg.prior, &chain)?;
            let report = score(&sim.train.data, &sim.test.data, &sim.test.truth, &pred)?;
            log::info!("{} rep {rep} {method}: mse {:.4}", cfg.dgp.id, report.mse.unwrap_or(f64::NAN));
            Ok(FoldResult {
                method,
                fold: rep,
                report,
            })
        })
        .collect::<Result<_>>()?;
    let summary = summarize(cfg, &folds);
    Ok(Comparison { folds, summary })
}

/// Writes `metrics.csv` (method, fold, metric, value), `summary.json` and
/// `manifest.json` into `out_dir`.
pub fn write_comparison(cmp: &Comparison, cfg: &BenchConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join("metrics.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "fold", "metric", "value"])?;
    for f in &cmp.folds {
        for (k, v) in f.report.entries() {
            w.write_record([f.method.to_string(), f.fold.to_string(), k.to_string(), v.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_json(&out_dir.join("summary.json"), &cmp.summary)?;
    let manifest = serde_json::json!({
        "command": "bench",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "data_seeds": (0..cfg.reps).map(|r| cfg.data_seed(r)).collect::<Vec<_>>(),
    });
    write_json(&out_dir.join("manifest.json"), &manifest)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
