use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{ColumnKind, ColumnSpec, PredictorSchema};
use crate::error::{Error, Result};

/// Observed range of a continuous column, used to map it onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub const UNIT: ColumnRange = ColumnRange { min: 0.0, max: 1.0 };

    pub fn of(values: &[f64]) -> ColumnRange {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ColumnRange { min, max }
    }

    /// A column with no spread cannot be split on.
    pub fn is_degenerate(&self) -> bool {
        !(self.max > self.min)
    }

    /// Min-max rescale, clamped to [0, 1]; degenerate ranges map to 0.
    pub fn rescale(&self, v: f64) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        }
    }
}

/// Access to one predictor vector, split into continuous and discrete parts.
pub trait PredictorRow {
    fn cont(&self, j: usize) -> f64;
    fn cat(&self, j: usize) -> u32;
}

/// A row of a [`Dataset`].
#[derive(Clone, Copy)]
pub struct Row<'a> {
    ds: &'a Dataset,
    i: usize,
}

impl PredictorRow for Row<'_> {
    #[inline]
    fn cont(&self, j: usize) -> f64 {
        self.ds.x_cont[j][self.i]
    }

    #[inline]
    fn cat(&self, j: usize) -> u32 {
        self.ds.x_cat[j][self.i]
    }
}

/// A free-standing predictor vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point {
    pub cont: Vec<f64>,
    pub cat: Vec<u32>,
}

impl PredictorRow for Point {
    fn cont(&self, j: usize) -> f64 {
        self.cont[j]
    }

    fn cat(&self, j: usize) -> u32 {
        self.cat[j]
    }
}

/// Column-major predictor matrices plus outcomes.
///
/// Continuous predictors come first in the predictor index space, then the
/// categorical and network predictors, each group in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: PredictorSchema,
    /// `x_cont[j][i]`, rescaled to [0, 1].
    pub x_cont: Vec<Vec<f64>>,
    /// `x_cat[j][i]`, an index into the column's level universe.
    pub x_cat: Vec<Vec<u32>>,
    /// Outcomes; empty for prediction-only data.
    pub y: Vec<f64>,
    /// Original-unit range of each continuous column.
    pub cont_ranges: Vec<ColumnRange>,
    n: usize,
}

impl Dataset {
    /// Assembles a dataset from already-rescaled matrices.
    pub fn from_parts(
        schema: PredictorSchema,
        x_cont: Vec<Vec<f64>>,
        x_cat: Vec<Vec<u32>>,
        y: Vec<f64>,
        cont_ranges: Vec<ColumnRange>,
    ) -> Result<Dataset> {
        schema.validate()?;
        let cont_pos = schema.continuous_positions();
        let cat_pos = schema.discrete_positions();
        if x_cont.len() != cont_pos.len() || x_cat.len() != cat_pos.len() {
            return Err(Error::Schema(format!(
                "schema declares {} continuous / {} discrete columns but data has {} / {}",
                cont_pos.len(),
                cat_pos.len(),
                x_cont.len(),
                x_cat.len()
            )));
        }
        if cont_ranges.len() != x_cont.len() {
            return Err(Error::Schema("one range per continuous column required".into()));
        }
        let n = x_cont
            .first()
            .map(Vec::len)
            .or_else(|| x_cat.first().map(Vec::len))
            .unwrap_or(y.len());
        if n == 0 {
            return Err(Error::Schema("dataset has no rows".into()));
        }
        if x_cont.iter().any(|c| c.len() != n) || x_cat.iter().any(|c| c.len() != n) {
            return Err(Error::Schema("predictor columns have unequal lengths".into()));
        }
        if !y.is_empty() && y.len() != n {
            return Err(Error::Schema(format!(
                "{} outcomes for {} rows",
                y.len(),
                n
            )));
        }
        for (j, col) in x_cont.iter().enumerate() {
            if col.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Schema(format!(
                    "continuous column `{}` has values outside [0, 1]",
                    schema.columns[cont_pos[j]].name
                )));
            }
        }
        for (j, col) in x_cat.iter().enumerate() {
            let spec = &schema.columns[cat_pos[j]];
            let k = spec.level_universe().len() as u32;
            if let Some(bad) = col.iter().find(|&&v| v >= k) {
                return Err(Error::Schema(format!(
                    "column `{}` has level index {bad} outside its universe of {k}",
                    spec.name
                )));
            }
        }
        Ok(Dataset {
            schema,
            x_cont,
            x_cat,
            y,
            cont_ranges,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_cont(&self) -> usize {
        self.x_cont.len()
    }

    pub fn p_cat(&self) -> usize {
        self.x_cat.len()
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        Row { ds: self, i }
    }

    pub fn has_outcome(&self) -> bool {
        !self.y.is_empty()
    }

    /// Schema entry of the `j`-th continuous predictor.
    pub fn cont_spec(&self, j: usize) -> &ColumnSpec {
        let pos = self.schema.continuous_positions()[j];
        &self.schema.columns[pos]
    }

    /// Schema entry of the `j`-th categorical predictor.
    pub fn cat_spec(&self, j: usize) -> &ColumnSpec {
        let pos = self.schema.discrete_positions()[j];
        &self.schema.columns[pos]
    }

    /// Index of the categorical predictor called `name`.
    pub fn cat_index(&self, name: &str) -> Option<usize> {
        self.schema
            .discrete_positions()
            .iter()
            .position(|&p| self.schema.columns[p].name == name)
    }

    /// Cutpoint grid of continuous predictor `j`, mapped onto [0, 1].
    pub fn rescaled_grid(&self, j: usize) -> Option<Vec<f64>> {
        let range = self.cont_ranges[j];
        self.cont_spec(j).cutpoints.as_ref().map(|grid| {
            let mut g: Vec<f64> = grid.iter().map(|&c| range.rescale(c)).collect();
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        })
    }

    /// Subset of rows, keeping the schema and column ranges.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            x_cont: self
                .x_cont
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            x_cat: self
                .x_cat
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            y: if self.y.is_empty() {
                Vec::new()
            } else {
                rows.iter().map(|&i| self.y[i]).collect()
            },
            cont_ranges: self.cont_ranges.clone(),
            n: rows.len(),
        }
    }

    /// Drops every categorical predictor.
    pub fn without_categoricals(&self) -> Dataset {
        let columns = self
            .schema
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Continuous)
            .cloned()
            .collect();
        Dataset {
            schema: PredictorSchema {
                columns,
                outcome: self.schema.outcome.clone(),
            },
            x_cont: self.x_cont.clone(),
            x_cat: Vec::new(),
            y: self.y.clone(),
            cont_ranges: self.cont_ranges.clone(),
            n: self.n,
        }
    }

    /// Writes the dataset as CSV: rescaled continuous values, level labels,
    /// then the outcome column when present.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }

    pub fn write_csv_to<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.schema.columns.iter().map(|c| c.name.as_str()).collect();
        if self.has_outcome() {
            header.push(&self.schema.outcome);
        }
        w.write_record(&header)?;
        let cont_pos = self.schema.continuous_positions();
        let cat_pos = self.schema.discrete_positions();
        let mut slot = vec![(false, 0usize); self.schema.columns.len()];
        for (j, &p) in cont_pos.iter().enumerate() {
            slot[p] = (false, j);
        }
        for (j, &p) in cat_pos.iter().enumerate() {
            slot[p] = (true, j);
        }
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n {
            record.clear();
            for (p, &(discrete, j)) in slot.iter().enumerate() {
                if discrete {
                    let level = self.x_cat[j][i] as usize;
                    record.push(self.schema.columns[p].level_universe()[level].clone());
                } else {
                    record.push(format!("{}", self.x_cont[j][i]));
                }
            }
            if self.has_outcome() {
                record.push(format!("{}", self.y[i]));
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Reads `csv_path` against `schema`, rescaling continuous columns by their
/// observed ranges.
pub fn load_dataset(csv_path: &Path, schema_path: &Path) -> Result<Dataset> {
    let schema = PredictorSchema::from_path(schema_path)?;
    let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    read_dataset(file, schema, None)
}

/// Reads CSV data; continuous columns use `ranges` when given (prediction
/// time), otherwise the observed ranges.
pub fn read_dataset<R: std::io::Read>(
    reader: R,
    schema: PredictorSchema,
    ranges: Option<&[ColumnRange]>,
) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let locate = |name: &str| headers.iter().position(|h| h == name);

    let mut source = Vec::with_capacity(schema.columns.len());
    for col in &schema.columns {
        let idx = locate(&col.name).ok_or_else(|| {
            Error::Schema(format!("column `{}` missing from CSV header", col.name))
        })?;
        source.push(idx);
    }
    let outcome_idx = locate(&schema.outcome);

    let cont_pos = schema.continuous_positions();
    let cat_pos = schema.discrete_positions();
    let mut raw_cont: Vec<Vec<f64>> = vec![Vec::new(); cont_pos.len()];
    let mut x_cat: Vec<Vec<u32>> = vec![Vec::new(); cat_pos.len()];
    let mut y = Vec::new();

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (j, &p) in cont_pos.iter().enumerate() {
            let col = &schema.columns[p];
            let cell = record.get(source[p]).unwrap_or("").trim();
            let value: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::Parse {
                    column: col.name.clone(),
                    row,
                    value: cell.to_string(),
                }
            })?;
            raw_cont[j].push(value);
        }
        for (j, &p) in cat_pos.iter().enumerate() {
            let col = &schema.columns[p];
            let cell = record.get(source[p]).unwrap_or("").trim();
            let level = col.level_index(cell).ok_or_else(|| {
                Error::Schema(format!(
                    "row {row}: value {cell:?} is not a level of column `{}`",
                    col.name
                ))
            })?;
            x_cat[j].push(level as u32);
        }
        if let Some(oi) = outcome_idx {
            let cell = record.get(oi).unwrap_or("").trim();
            let value: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::Parse {
                    column: schema.outcome.clone(),
                    row,
                    value: cell.to_string(),
                }
            })?;
            y.push(value);
        }
    }

    let cont_ranges: Vec<ColumnRange> = match ranges {
        Some(r) => {
            if r.len() != raw_cont.len() {
                return Err(Error::Schema("range count does not match continuous columns".into()));
            }
            r.to_vec()
        }
        None => raw_cont.iter().map(|c| ColumnRange::of(c)).collect(),
    };
    let x_cont = raw_cont
        .iter()
        .zip(&cont_ranges)
        .map(|(col, range)| col.iter().map(|&v| range.rescale(v)).collect())
        .collect();
    Dataset::from_parts(schema, x_cont, x_cat, y, cont_ranges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> PredictorSchema {
        let levels = (1..=10).map(|k| format!("c{k}")).collect();
        PredictorSchema::new(vec![
            ColumnSpec::continuous("x"),
            ColumnSpec::categorical("g", levels),
        ])
        .unwrap()
    }

    #[test]
    fn rescales_continuous_and_indexes_levels() {
        let csv = "x,g,y\n2,c1,0.5\n4,c3,1.5\n6,c10,2.5\n";
        let ds = read_dataset(csv.as_bytes(), schema(), None).unwrap();
        assert_eq!(ds.x_cont[0], vec![0.0, 0.5, 1.0]);
        assert_eq!(ds.x_cat[0], vec![0, 2, 9]);
        assert_eq!(ds.y, vec![0.5, 1.5, 2.5]);
        assert_eq!(ds.cont_ranges[0], ColumnRange { min: 2.0, max: 6.0 });
    }

    #[test]
    fn unknown_level_is_a_schema_violation() {
        let csv = "x,g,y\n2,c99,0.5\n";
        assert!(matches!(
            read_dataset(csv.as_bytes(), schema(), None),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn non_numeric_cell_is_a_parse_error() {
        let csv = "x,g,y\nabc,c1,0.5\n";
        assert!(matches!(
            read_dataset(csv.as_bytes(), schema(), None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn missing_value_is_rejected() {
        let csv = "x,g,y\n,c1,0.5\n";
        assert!(read_dataset(csv.as_bytes(), schema(), None).is_err());
    }

    #[test]
    fn missing_column_is_a_schema_mismatch() {
        let csv = "x,y\n1,0.5\n";
        assert!(matches!(
            read_dataset(csv.as_bytes(), schema(), None),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn constant_column_encodes_to_zero() {
        let csv = "x,g,y\n3,c1,0\n3,c2,1\n";
        let ds = read_dataset(csv.as_bytes(), schema(), None).unwrap();
        assert!(ds.cont_ranges[0].is_degenerate());
        assert_eq!(ds.x_cont[0], vec![0.0, 0.0]);
    }

    #[test]
    fn prediction_ranges_clamp_out_of_range_values() {
        let csv = "x,g\n0,c1\n10,c2\n4,c2\n";
        let ranges = [ColumnRange { min: 2.0, max: 6.0 }];
        let ds = read_dataset(csv.as_bytes(), schema(), Some(&ranges)).unwrap();
        assert_eq!(ds.x_cont[0], vec![0.0, 1.0, 0.5]);
        assert!(!ds.has_outcome());
    }

    #[test]
    fn write_then_reload_is_bit_identical() {
        let csv = "x,g,y\n2,c1,0.1\n4.7,c3,1.25\n6.3,c10,-2.5\n5.1,c2,3\n";
        let ds = read_dataset(csv.as_bytes(), schema(), None).unwrap();
        let mut buf = Vec::new();
        ds.write_csv_to(&mut buf).unwrap();
        let again = read_dataset(buf.as_slice(), schema(), None).unwrap();
        assert_eq!(ds.x_cat, again.x_cat);
        assert_eq!(ds.y, again.y);
        for (a, b) in ds.x_cont[0].iter().zip(&again.x_cont[0]) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
