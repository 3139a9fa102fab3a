use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
    Network,
}

impl ColumnKind {
    pub fn is_discrete(self) -> bool {
        !matches!(self, ColumnKind::Continuous)
    }
}

/// One predictor column as declared in the schema file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Ordered level universe; required for categorical and network columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    /// Optional cutpoint grid, in the column's original units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutpoints: Option<Vec<f64>>,
    /// Identifier of the network whose vertices are this column's levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<String>,
}

impl ColumnSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Continuous,
            levels: None,
            cutpoints: None,
            network: None,
        }
    }

    pub fn categorical(name: impl Into<String>, levels: Vec<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Categorical,
            levels: Some(levels),
            cutpoints: None,
            network: None,
        }
    }

    pub fn network(name: impl Into<String>, levels: Vec<String>, network: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Network,
            levels: Some(levels),
            cutpoints: None,
            network: Some(network.into()),
        }
    }

    /// Level universe of a discrete column (empty for continuous columns).
    pub fn level_universe(&self) -> &[String] {
        self.levels.as_deref().unwrap_or(&[])
    }

    pub fn level_index(&self, value: &str) -> Option<usize> {
        self.level_universe().iter().position(|l| l == value)
    }
}

fn default_outcome() -> String {
    "y".to_string()
}

/// Ordered predictor columns plus the name of the outcome column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSchema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default = "default_outcome")]
    pub outcome: String,
}

impl PredictorSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = PredictorSchema {
            columns,
            outcome: default_outcome(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let schema: PredictorSchema = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for (idx, col) in self.columns.iter().enumerate() {
            if let Some(prev) = seen.insert(col.name.as_str(), idx) {
                return Err(Error::Schema(format!(
                    "column `{}` declared twice (positions {prev} and {idx})",
                    col.name
                )));
            }
            if col.name == self.outcome {
                return Err(Error::Schema(format!(
                    "predictor `{}` shadows the outcome column",
                    col.name
                )));
            }
            match col.kind {
                ColumnKind::Continuous => {
                    if let Some(grid) = &col.cutpoints {
                        if grid.iter().any(|c| !c.is_finite()) {
                            return Err(Error::Schema(format!(
                                "column `{}` has a non-finite cutpoint",
                                col.name
                            )));
                        }
                    }
                }
                ColumnKind::Categorical | ColumnKind::Network => {
                    let levels = col.level_universe();
                    if levels.is_empty() {
                        return Err(Error::Schema(format!(
                            "column `{}` must declare a non-empty level universe",
                            col.name
                        )));
                    }
                    let mut uniq: Vec<&String> = levels.iter().collect();
                    uniq.sort();
                    uniq.dedup();
                    if uniq.len() != levels.len() {
                        return Err(Error::Schema(format!(
                            "column `{}` lists a level twice",
                            col.name
                        )));
                    }
                    if col.kind == ColumnKind::Network && col.network.is_none() {
                        return Err(Error::Schema(format!(
                            "network column `{}` does not name its network",
                            col.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Schema positions of the continuous columns, in order.
    pub fn continuous_positions(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Continuous)
            .map(|(i, _)| i)
            .collect()
    }

    /// Schema positions of the categorical and network columns, in order.
    pub fn discrete_positions(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind.is_discrete())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_format() {
        let text = r#"{"columns":[
            {"name":"x1","kind":"continuous","cutpoints":[0.25,0.5]},
            {"name":"g","kind":"categorical","levels":["a","b"]},
            {"name":"v","kind":"network","levels":["1","2","3"],"network":"grid"}]}"#;
        let schema = PredictorSchema::from_json_str(text).unwrap();
        assert_eq!(schema.columns.len(), 3);
        assert_eq!(schema.outcome, "y");
        assert_eq!(schema.continuous_positions(), vec![0]);
        assert_eq!(schema.discrete_positions(), vec![1, 2]);
        assert_eq!(schema.columns[2].network.as_deref(), Some("grid"));
    }

    #[test]
    fn rejects_empty_universe() {
        let text = r#"{"columns":[{"name":"g","kind":"categorical","levels":[]}]}"#;
        assert!(matches!(
            PredictorSchema::from_json_str(text),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn rejects_network_without_id() {
        let text = r#"{"columns":[{"name":"g","kind":"network","levels":["a"]}]}"#;
        assert!(PredictorSchema::from_json_str(text).is_err());
    }

    #[test]
    fn rejects_duplicate_levels() {
        let text = r#"{"columns":[{"name":"g","kind":"categorical","levels":["a","a"]}]}"#;
        assert!(PredictorSchema::from_json_str(text).is_err());
    }
}
