//! Column schema: maps CSV columns onto roles.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role a CSV column plays. Protected columns must declare a closed
/// category set; stage-outcome columns must appear in the schema's stage
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnRole {
    Id,
    Feature,
    Protected,
    StageOutcome,
    Score,
    Label,
    ReviewerScore,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub role: ColumnRole,
    /// Closed category list; required for protected columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

/// Declared column roles plus the hiring-funnel stage order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSchema {
    /// Stage-outcome columns in funnel order: a pass at stage k requires
    /// a pass at every earlier stage.
    #[serde(default)]
    pub stages: Vec<String>,
    pub columns: BTreeMap<String, ColumnSpec>,
}

impl ColumnSchema {
    /// Validates internal consistency: exactly one id column, protected
    /// columns carry category sets, stage list matches stage-outcome
    /// columns.
    pub fn validate(&self) -> Result<()> {
        let ids: Vec<&String> = self
            .columns
            .iter()
            .filter(|(_, s)| s.role == ColumnRole::Id)
            .map(|(n, _)| n)
            .collect();
        if ids.len() != 1 {
            return Err(Error::InvalidSchema(format!(
                "expected exactly one id column, found {}",
                ids.len()
            )));
        }
        for (name, spec) in &self.columns {
            match spec.role {
                ColumnRole::Protected => {
                    let cats = spec.categories.as_deref().unwrap_or(&[]);
                    if cats.is_empty() {
                        return Err(Error::InvalidSchema(format!(
                            "protected column `{name}` declares no categories"
                        )));
                    }
                    let mut seen = std::collections::BTreeSet::new();
                    for c in cats {
                        if !seen.insert(c) {
                            return Err(Error::InvalidSchema(format!(
                                "protected column `{name}` lists category `{c}` twice"
                            )));
                        }
                    }
                }
                ColumnRole::StageOutcome => {
                    if !self.stages.contains(name) {
                        return Err(Error::InvalidSchema(format!(
                            "stage-outcome column `{name}` missing from the stage sequence"
                        )));
                    }
                }
                _ => {}
            }
        }
        for stage in &self.stages {
            match self.columns.get(stage) {
                Some(spec) if spec.role == ColumnRole::StageOutcome => {}
                _ => {
                    return Err(Error::InvalidSchema(format!(
                        "stage `{stage}` is not declared as a stage-outcome column"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|source| Error::DatasetRead {
            path: path.as_ref().display().to_string(),
            source,
        })?;
        let schema: ColumnSchema = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidSchema(format!("{}: {e}", path.as_ref().display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn id_column(&self) -> &str {
        self.columns
            .iter()
            .find(|(_, s)| s.role == ColumnRole::Id)
            .map(|(n, _)| n.as_str())
            .expect("validated schema has an id column")
    }

    pub fn columns_with_role(&self, role: ColumnRole) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|(_, s)| s.role == role)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn role_of(&self, column: &str) -> Option<ColumnRole> {
        self.columns.get(column).map(|s| s.role)
    }

    /// Declared categories of a protected column.
    pub fn categories_of(&self, column: &str) -> Option<&[String]> {
        self.columns
            .get(column)
            .and_then(|s| s.categories.as_deref())
    }
}
