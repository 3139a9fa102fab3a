use std::sync::Arc;

use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::graph::{Network, NetworkSet, SplitStrategy};

/// What a decision rule may do with one continuous predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct ContFeature {
    pub name: String,
    /// Constant in the training data; never split on.
    pub degenerate: bool,
    /// Optional cutpoint grid on the [0, 1] scale.
    pub grid: Option<Vec<f64>>,
}

/// What a decision rule may do with one categorical predictor.
#[derive(Debug, Clone)]
pub struct CatFeature {
    pub name: String,
    pub n_levels: usize,
    pub network: Option<Arc<Network>>,
    pub strategy: SplitStrategy,
}

impl CatFeature {
    /// The network to partition over, when this column uses a graph split.
    pub fn split_network(&self) -> Option<&Network> {
        if self.strategy.uses_network() {
            self.network.as_deref()
        } else {
            None
        }
    }
}

/// The predictor space seen by the tree prior and the sampler.
#[derive(Debug, Clone, Default)]
pub struct FeatureSpace {
    pub cont: Vec<ContFeature>,
    pub cat: Vec<CatFeature>,
}

impl FeatureSpace {
    /// Builds the feature space of `ds`. Network columns use `strategy`;
    /// plain categorical columns always use uniform subsets.
    pub fn from_dataset(ds: &Dataset, networks: &NetworkSet, strategy: SplitStrategy) -> Result<FeatureSpace> {
        let cont = (0..ds.p_cont())
            .map(|j| ContFeature {
                name: ds.cont_spec(j).name.clone(),
                degenerate: ds.cont_ranges[j].is_degenerate(),
                grid: ds.rescaled_grid(j),
            })
            .collect();
        let mut cat = Vec::with_capacity(ds.p_cat());
        for j in 0..ds.p_cat() {
            let spec = ds.cat_spec(j);
            let n_levels = spec.level_universe().len();
            let (network, strat) = if spec.kind == ColumnKind::Network {
                let id = spec.network.as_deref().unwrap_or_default();
                let g = networks.get(id).cloned().ok_or_else(|| {
                    Error::Config(format!("column `{}` references unknown network `{id}`", spec.name))
                })?;
                if g.labels() != spec.level_universe() {
                    return Err(Error::Schema(format!(
                        "network `{id}` vertices differ from the levels of column `{}`",
                        spec.name
                    )));
                }
                (Some(g), strategy)
            } else {
                (None, SplitStrategy::Unif)
            };
            cat.push(CatFeature {
                name: spec.name.clone(),
                n_levels,
                network,
                strategy: strat,
            });
        }
        let fs = FeatureSpace { cont, cat };
        fs.validate()?;
        Ok(fs)
    }

    /// `p_cont` unconstrained continuous predictors on [0, 1].
    pub fn continuous(p_cont: usize) -> FeatureSpace {
        FeatureSpace {
            cont: (0..p_cont)
                .map(|j| ContFeature {
                    name: format!("x{j}"),
                    degenerate: false,
                    grid: None,
                })
                .collect(),
            cat: Vec::new(),
        }
    }

    pub fn with_categorical(mut self, name: &str, n_levels: usize) -> FeatureSpace {
        self.cat.push(CatFeature {
            name: name.to_string(),
            n_levels,
            network: None,
            strategy: SplitStrategy::Unif,
        });
        self
    }

    pub fn with_network(mut self, name: &str, network: Arc<Network>, strategy: SplitStrategy) -> FeatureSpace {
        self.cat.push(CatFeature {
            name: name.to_string(),
            n_levels: network.n_vertices(),
            network: Some(network),
            strategy,
        });
        self
    }

    pub fn p_cont(&self) -> usize {
        self.cont.len()
    }

    pub fn p_cat(&self) -> usize {
        self.cat.len()
    }

    /// Graph splits need a connected root graph so that every available set
    /// stays connected by induction.
    pub fn validate(&self) -> Result<()> {
        for f in &self.cat {
            if f.n_levels == 0 {
                return Err(Error::Schema(format!("column `{}` has no levels", f.name)));
            }
            if let Some(g) = f.split_network() {
                if g.n_vertices() != f.n_levels {
                    return Err(Error::Schema(format!(
                        "network for column `{}` has {} vertices but the column has {} levels",
                        f.name,
                        g.n_vertices(),
                        f.n_levels
                    )));
                }
                if !g.is_connected() {
                    return Err(Error::Graph(format!(
                        "network for column `{}` is disconnected; {} needs a connected graph",
                        f.name, f.strategy
                    )));
                }
            }
        }
        Ok(())
    }
}
