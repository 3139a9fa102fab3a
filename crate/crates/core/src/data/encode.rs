//! Baseline encodings that turn categorical predictors into continuous ones.

use super::dataset::{ColumnRange, Dataset};
use super::schema::{ColumnSpec, PredictorSchema};
use crate::error::{Error, Result};

fn continuous_only_schema(ds: &Dataset, extra: Vec<ColumnSpec>) -> PredictorSchema {
    let mut columns: Vec<ColumnSpec> = ds
        .schema
        .continuous_positions()
        .into_iter()
        .map(|p| ds.schema.columns[p].clone())
        .collect();
    columns.extend(extra);
    PredictorSchema {
        columns,
        outcome: ds.schema.outcome.clone(),
    }
}

/// Replaces every categorical column with one 0/1 indicator column per level.
///
/// Indicator columns are appended after the original continuous columns, in
/// categorical-column order and then level order. An indicator that is
/// constant in `ds` gets a degenerate range so it is never split on.
pub fn one_hot_encode(ds: &Dataset) -> Dataset {
    if ds.p_cat() == 0 {
        return ds.clone();
    }
    let mut extra = Vec::new();
    let mut x_cont = ds.x_cont.clone();
    let mut ranges = ds.cont_ranges.clone();
    for j in 0..ds.p_cat() {
        let spec = ds.cat_spec(j);
        for (k, level) in spec.level_universe().iter().enumerate() {
            extra.push(ColumnSpec::continuous(format!("{}={}", spec.name, level)));
            let col: Vec<f64> = ds.x_cat[j]
                .iter()
                .map(|&v| if v as usize == k { 1.0 } else { 0.0 })
                .collect();
            let range = ColumnRange::of(&col);
            ranges.push(if range.is_degenerate() {
                range
            } else {
                ColumnRange::UNIT
            });
            x_cont.push(col);
        }
    }
    let schema = continuous_only_schema(ds, extra);
    Dataset::from_parts(schema, x_cont, Vec::new(), ds.y.clone(), ranges)
        .expect("one-hot encoding preserves validity")
}

/// Per-level training means for one categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetEncoding {
    /// Mean training outcome per level; `None` for levels absent in training.
    pub level_means: Vec<Option<f64>>,
    pub global_mean: f64,
    /// Range of the encoded training column, used for rescaling.
    pub range: ColumnRange,
}

impl TargetEncoding {
    pub fn fit(levels: &[u32], y: &[f64], n_levels: usize) -> TargetEncoding {
        let mut sums = vec![0.0; n_levels];
        let mut counts = vec![0usize; n_levels];
        for (&l, &v) in levels.iter().zip(y) {
            sums[l as usize] += v;
            counts[l as usize] += 1;
        }
        let global_mean = y.iter().sum::<f64>() / y.len() as f64;
        let level_means: Vec<Option<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        let encoded: Vec<f64> = levels
            .iter()
            .map(|&l| level_means[l as usize].unwrap_or(global_mean))
            .collect();
        TargetEncoding {
            level_means,
            global_mean,
            range: ColumnRange::of(&encoded),
        }
    }

    /// Encoded value before rescaling.
    pub fn raw(&self, level: u32) -> f64 {
        self.level_means[level as usize].unwrap_or(self.global_mean)
    }

    pub fn encode(&self, level: u32) -> f64 {
        self.range.rescale(self.raw(level))
    }
}

/// Replaces each categorical column of `ds_apply` with the mean training
/// outcome of its level, min-max rescaled by the encoded training column.
/// Levels unseen in training fall back to the global training mean.
pub fn target_encode(ds_train: &Dataset, ds_apply: &Dataset) -> Result<Dataset> {
    if !ds_train.has_outcome() {
        return Err(Error::Invalid("target encoding needs training outcomes".into()));
    }
    if ds_train.schema.columns != ds_apply.schema.columns {
        return Err(Error::Schema(
            "target encoding needs train and apply data with the same schema".into(),
        ));
    }
    let mut extra = Vec::new();
    let mut x_cont = ds_apply.x_cont.clone();
    let mut ranges = ds_apply.cont_ranges.clone();
    for j in 0..ds_train.p_cat() {
        let spec = ds_train.cat_spec(j);
        let enc = TargetEncoding::fit(&ds_train.x_cat[j], &ds_train.y, spec.level_universe().len());
        extra.push(ColumnSpec::continuous(format!("{}_target", spec.name)));
        x_cont.push(ds_apply.x_cat[j].iter().map(|&l| enc.encode(l)).collect());
        ranges.push(enc.range);
    }
    let schema = continuous_only_schema(ds_apply, extra);
    Dataset::from_parts(schema, x_cont, Vec::new(), ds_apply.y.clone(), ranges)
}
