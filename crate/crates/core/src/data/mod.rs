//! Dataset ingestion, predictor schemas, outcome scaling, baseline
//! encodings and fold generation.

mod dataset;
mod encode;
mod folds;
mod scaling;
mod schema;

pub use dataset::{load_dataset, read_dataset, ColumnRange, Dataset, Point, PredictorRow, Row};
pub use encode::{one_hot_encode, target_encode, TargetEncoding};
pub use folds::{make_folds, Fold, FoldScheme};
pub use scaling::OutcomeScaling;
pub use schema::{ColumnKind, ColumnSpec, PredictorSchema};
