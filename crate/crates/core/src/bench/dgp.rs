//! Synthetic data-generating processes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{ColumnRange, ColumnSpec, Dataset, PredictorSchema};
use crate::error::{Error, Result};
use crate::graph::{Network, NetworkSet};
use crate::rng;

/// Level probabilities of the imbalanced setting, for `c0..c9`.
pub const IMBALANCED_LEVEL_PROBS: [f64; 10] = [0.01, 0.1, 0.02, 0.2, 0.15, 0.03, 0.05, 0.15, 0.25, 0.04];

/// Name of the categorical column of the level-grouping DGPs.
pub const LEVEL_COLUMN: &str = "x11";
/// Name of the vertex column of the network DGPs.
pub const VERTEX_COLUMN: &str = "vertex";
/// Network id under which the grid is registered.
pub const GRID_NETWORK: &str = "grid";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DgpId {
    Dgp1,
    Dgp2,
    Dgp3,
    Dgp4,
    NetConstant,
    NetSmooth,
}

impl DgpId {
    pub const ALL: [DgpId; 6] = [
        DgpId::Dgp1,
        DgpId::Dgp2,
        DgpId::Dgp3,
        DgpId::Dgp4,
        DgpId::NetConstant,
        DgpId::NetSmooth,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DgpId::Dgp1 => "dgp1",
            DgpId::Dgp2 => "dgp2",
            DgpId::Dgp3 => "dgp3",
            DgpId::Dgp4 => "dgp4",
            DgpId::NetConstant => "net_constant",
            DgpId::NetSmooth => "net_smooth",
        }
    }

    pub fn is_network(&self) -> bool {
        matches!(self, DgpId::NetConstant | DgpId::NetSmooth)
    }

    /// `Some(d)` for the level-grouping DGPs `dgp1..dgp4`.
    pub fn level_dgp(&self) -> Option<u8> {
        match self {
            DgpId::Dgp1 => Some(1),
            DgpId::Dgp2 => Some(2),
            DgpId::Dgp3 => Some(3),
            DgpId::Dgp4 => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for DgpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DgpId {
    type Err = Error;

    fn from_str(s: &str) -> Result<DgpId> {
        DgpId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown DGP `{s}`")))
    }
}

/// One synthetic experiment setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub id: DgpId,
    /// Training rows.
    pub n: usize,
    pub noise_sd: f64,
    /// Probabilities of `c0..c9` (level-grouping DGPs only).
    pub level_probs: Vec<f64>,
    pub seed: u64,
    /// Grid shape of the network DGPs.
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Share of vertices withheld from training (network DGPs).
    pub holdout_frac: f64,
    /// Test rows.
    pub n_test: usize,
}

impl DgpSpec {
    pub fn new(id: DgpId, n: usize, seed: u64) -> DgpSpec {
        DgpSpec {
            id,
            n,
            noise_sd: 1.0,
            level_probs: vec![0.1; 10],
            seed,
            grid_rows: 5,
            grid_cols: 10,
            holdout_frac: 0.1,
            n_test: 500,
        }
    }

    pub fn imbalanced(mut self) -> DgpSpec {
        self.level_probs = IMBALANCED_LEVEL_PROBS.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("a DGP needs at least one training row".into()));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::Config("noise_sd must be non-negative".into()));
        }
        if self.id.is_network() {
            if self.grid_rows * self.grid_cols < 2 {
                return Err(Error::Config("the grid needs at least two vertices".into()));
            }
            if !(self.holdout_frac >= 0.0 && self.holdout_frac < 1.0) {
                return Err(Error::Config("holdout_frac must lie in [0, 1)".into()));
            }
        } else {
            if self.level_probs.len() != 10 {
                return Err(Error::Config("level_probs needs one entry per level c0..c9".into()));
            }
            if self.level_probs.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::Config("level probabilities must be non-negative".into()));
            }
            let total: f64 = self.level_probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("level probabilities sum to {total}, not 1")));
            }
        }
        Ok(())
    }

    pub fn network(&self) -> Option<Arc<Network>> {
        self.id
            .is_network()
            .then(|| Arc::new(Network::grid(self.grid_rows, self.grid_cols)))
    }

    /// Network map for [`crate::tree::FeatureSpace::from_dataset`].
    pub fn network_set(&self) -> NetworkSet {
        let mut set = NetworkSet::new();
        if let Some(g) = self.network() {
            set.insert(GRID_NETWORK.to_string(), g);
        }
        set
    }

    pub fn schema(&self) -> PredictorSchema {
        let (p, cat) = if self.id.is_network() {
            let g = Network::grid(self.grid_rows, self.grid_cols);
            (2, ColumnSpec::network(VERTEX_COLUMN, g.labels().to_vec(), GRID_NETWORK))
        } else {
            let levels = (0..10).map(|l| format!("c{l}")).collect();
            (10, ColumnSpec::categorical(LEVEL_COLUMN, levels))
        };
        let mut columns: Vec<ColumnSpec> = (1..=p).map(|j| ColumnSpec::continuous(format!("x{j}"))).collect();
        columns.push(cat);
        PredictorSchema {
            columns,
            outcome: "y".into(),
        }
    }
}

/// The basis functions `(f0, f1, f2, f3)` at `x` (only `x[0..5]` is used).
pub fn eval_basis(x: &[f64]) -> (f64, f64, f64, f64) {
    let q = 10.0 * (x[2] - 0.5).powi(2);
    let step = if x[1] > 0.5 { 1.0 } else { 0.0 };
    let f0 = 10.0 * (PI * x[0] * x[1]).sin();
    let f1 = q;
    let f2 = q + 10.0 * x[3] + 5.0 * x[4];
    let f3 = 6.0 * x[0] + (4.0 - 10.0 * step) * (PI * x[0]).sin() - 4.0 * step + 15.0;
    (f0, f1, f2, f3)
}

/// Mean function of `dgp{d}` at continuous predictors `x` and level `c{level}`.
pub fn eval_mu(d: u8, x: &[f64], level: u32) -> f64 {
    let (f0, f1, f2, f3) = eval_basis(x);
    let in_set = |set: &[u32]| if set.contains(&level) { 1.0 } else { 0.0 };
    match d {
        1 => {
            let g = in_set(&[0, 2, 4, 8]);
            (f0 + f1 + f2 - 0.75) * (1.0 - g) + f3 * g
        }
        2 => {
            let g = in_set(&[0]);
            (f0 + f1 + f2 - 0.75) * g + f2 * (1.0 - g)
        }
        3 => {
            f0 * in_set(&[0, 3, 4, 6])
                + f1 * in_set(&[1, 3, 4, 5, 6])
                + f2 * in_set(&[2, 3, 5, 6])
                + f3 * in_set(&[7, 8, 9])
        }
        4 => {
            let l = level as f64;
            (l + 1.0) / 10.0 * (f1 + f2 + f3 - 0.75) + (9.0 - l) / 10.0 * f3
        }
        _ => panic!("no level-grouping DGP {d}"),
    }
}

/// `g0` of the smoothly varying network function.
pub fn network_g0(x: &[f64]) -> f64 {
    let step = if x[1] > 0.5 { 1.0 } else { 0.0 };
    3.0 * x[0] + (2.0 - 5.0 * step) * (PI * x[0]).sin() - 2.0 * step
}

/// `g1` of the smoothly varying network function.
pub fn network_g1(x: &[f64]) -> f64 {
    let mut g = 3.0;
    if x[0] > 0.6 {
        g -= 3.0 * (6.0 * PI * x[0]).cos() * x[0] * x[0];
    }
    if x[0] < 0.25 {
        g -= 10.0 * x[0].sqrt();
    }
    g
}

/// `w g0(x) + (1 - w) g1(x)` for a vertex with weight `w`.
pub fn eval_network_fn(x: &[f64], w: f64) -> f64 {
    w * network_g0(x) + (1.0 - w) * network_g1(x)
}

/// Vertex weights of the smooth DGP: the mean of the normalized row and
/// column coordinates, so 0 in one corner of the grid and 1 in the other.
pub fn grid_weights(rows: usize, cols: usize) -> Vec<f64> {
    let coord = |i: usize, k: usize| if k > 1 { i as f64 / (k - 1) as f64 } else { 0.5 };
    let mut w = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            w.push(0.5 * (coord(r, rows) + coord(c, cols)));
        }
    }
    w
}

/// Vertex values of the piecewise-constant DGP: the grid's four quadrants
/// carry the values 0, 10, -10 and 20.
pub fn grid_constants(rows: usize, cols: usize) -> Vec<f64> {
    const VALUES: [f64; 4] = [0.0, 10.0, -10.0, 20.0];
    let mut v = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let q = 2 * usize::from(2 * r >= rows) + usize::from(2 * c >= cols);
            v.push(VALUES[q]);
        }
    }
    v
}

/// Noise-free mean of `spec` at continuous predictors `x` and level or vertex index `level`.
pub fn mean_function(spec: &DgpSpec, x: &[f64], level: u32) -> f64 {
    match spec.id {
        DgpId::NetConstant => grid_constants(spec.grid_rows, spec.grid_cols)[level as usize],
        DgpId::NetSmooth => eval_network_fn(x, grid_weights(spec.grid_rows, spec.grid_cols)[level as usize]),
        id => eval_mu(id.level_dgp().expect("level DGP"), x, level),
    }
}

/// A generated dataset together with its noise-free means.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub data: Dataset,
    pub truth: Vec<f64>,
}

fn draw_rows<R: Rng + ?Sized>(spec: &DgpSpec, n: usize, levels: &[u32], rng: &mut R) -> Result<Sample> {
    let p = if spec.id.is_network() { 2 } else { 10 };
    let mut x_cont = vec![Vec::with_capacity(n); p];
    let mut cat = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let weighted = if spec.id.is_network() {
        None
    } else {
        Some(WeightedIndex::new(&spec.level_probs).map_err(|e| Error::Config(format!("level probabilities: {e}")))?)
    };
    let mut x = vec![0.0; p];
    for _ in 0..n {
        for (j, v) in x.iter_mut().enumerate() {
            *v = rng.random::<f64>();
            x_cont[j].push(*v);
        }
        let level = match &weighted {
            Some(w) => w.sample(rng) as u32,
            None => levels[rng.random_range(0..levels.len())],
        };
        let mu = mean_function(spec, &x, level);
        let eps: f64 = StandardNormal.sample(rng);
        cat.push(level);
        truth.push(mu);
        y.push(mu + spec.noise_sd * eps);
    }
    let data = Dataset::from_parts(spec.schema(), x_cont, vec![cat], y, vec![ColumnRange::UNIT; p])?;
    Ok(Sample { data, truth })
}

/// `spec.n` rows drawn from the DGP's generative law, seeded by `spec.seed`.
/// Network DGPs draw vertices uniformly from the whole grid.
pub fn generate(spec: &DgpSpec) -> Result<Dataset> {
    spec.validate()?;
    let all: Vec<u32> = (0..(spec.grid_rows * spec.grid_cols) as u32).collect();
    Ok(draw_rows(spec, spec.n, &all, &mut rng::stream(spec.seed, 0))?.data)
}

/// Training and test samples of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub train: Sample,
    pub test: Sample,
    /// Vertices withheld from training (network DGPs); the test rows sit on them.
    pub held_out: Vec<u32>,
}

/// Draws a training set of `spec.n` rows and a test set of `spec.n_test`
/// rows from the same law. For network DGPs a random `holdout_frac` share of
/// the vertices (at least one) is withheld: training rows use the others and
/// test rows use only the withheld ones.
pub fn simulate(spec: &DgpSpec) -> Result<Simulation> {
    spec.validate()?;
    if spec.n_test == 0 {
        return Err(Error::Config("n_test must be positive".into()));
    }
    let mut rng = rng::stream(spec.seed, 1);
    let (train_levels, test_levels, held_out) = if spec.id.is_network() {
        let n_v = spec.grid_rows * spec.grid_cols;
        let mut order: Vec<u32> = (0..n_v as u32).collect();
        order.shuffle(&mut rng);
        let k = ((spec.holdout_frac * n_v as f64).round() as usize).clamp(1, n_v - 1);
        let mut held: Vec<u32> = order[..k].to_vec();
        held.sort_unstable();
        let mut kept: Vec<u32> = order[k..].to_vec();
        kept.sort_unstable();
        (kept, held.clone(), held)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    let train = draw_rows(spec, spec.n, &train_levels, &mut rng)?;
    let test = draw_rows(spec, spec.n_test, &test_levels, &mut rng)?;
    Ok(Simulation { train, test, held_out })
}

/// Level groups of the oracle baseline for `dgp{d}`.
pub fn oracle_blocks(d: u8) -> Vec<Vec<u32>> {
    match d {
        1 => vec![vec![0, 2, 4, 8], vec![1, 3, 5, 6, 7, 9]],
        2 => vec![vec![0], (1..10).collect()],
        3 => {
            let mut b: Vec<Vec<u32>> = (0..7).map(|l| vec![l]).collect();
            b.push(vec![7, 8, 9]);
            b
        }
        4 => (0..10).map(|l| vec![l]).collect(),
        _ => panic!("no level-grouping DGP {d}"),
    }
}
