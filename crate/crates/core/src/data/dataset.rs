//! Candidate records and CSV ingestion.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::schema::{ColumnRole, ColumnSchema};
use crate::error::{Error, Result};

/// One candidate. Missing values are explicit (`None` / absent map key),
/// never imputed. An absent stage outcome means the candidate never
/// reached that stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateRecord {
    pub id: String,
    /// Aligned with `Dataset::feature_names`.
    pub features: Vec<Option<f64>>,
    pub protected: BTreeMap<String, String>,
    pub outcomes: BTreeMap<String, bool>,
    pub score: Option<f64>,
    pub label: Option<bool>,
    pub reviewer_scores: BTreeMap<String, f64>,
}

/// Immutable tabular candidate data: records plus the schema they share.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: ColumnSchema,
    /// Feature columns in CSV header order.
    pub feature_names: Vec<String>,
    pub records: Vec<CandidateRecord>,
}

/// What `load_dataset` observed besides the data itself.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub rows: usize,
    /// CSV columns not declared in the schema; ignored.
    pub ignored_columns: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, enforcing the shared invariants: unique ids,
    /// finite feature values, category labels from the declared sets,
    /// and a monotone funnel (an outcome at stage k requires a pass at
    /// every earlier stage).
    pub fn new(
        schema: ColumnSchema,
        feature_names: Vec<String>,
        records: Vec<CandidateRecord>,
    ) -> Result<Self> {
        schema.validate()?;
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (row, rec) in records.iter().enumerate() {
            if let Some(&first) = seen.get(rec.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: rec.id.clone(),
                    first,
                    second: row,
                });
            }
            seen.insert(&rec.id, row);

            if rec.features.len() != feature_names.len() {
                return Err(Error::InvalidSchema(format!(
                    "record `{}` has {} feature values, schema declares {}",
                    rec.id,
                    rec.features.len(),
                    feature_names.len()
                )));
            }
            for (j, v) in rec.features.iter().enumerate() {
                if let Some(v) = v {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteValue {
                            id: rec.id.clone(),
                            column: feature_names[j].clone(),
                        });
                    }
                }
            }
            if let Some(s) = rec.score {
                if !s.is_finite() {
                    return Err(Error::NonFiniteValue {
                        id: rec.id.clone(),
                        column: "score".into(),
                    });
                }
            }
            for (attr, value) in &rec.protected {
                let declared = schema.categories_of(attr).ok_or_else(|| {
                    Error::InvalidSchema(format!("record `{}` carries undeclared attribute `{attr}`", rec.id))
                })?;
                if !declared.iter().any(|c| c == value) {
                    return Err(Error::UnknownCategory {
                        id: rec.id.clone(),
                        attribute: attr.clone(),
                        value: value.clone(),
                    });
                }
            }
            check_monotone_funnel(&schema.stages, rec)?;
        }
        Ok(Dataset {
            schema,
            feature_names,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Numeric values of a named column (feature or score) per record;
    /// `None` where missing. Reviewer-score columns are addressed by
    /// their column name.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        match self.schema.role_of(name) {
            Some(ColumnRole::Feature) => {
                let j = self
                    .feature_index(name)
                    .ok_or_else(|| Error::UnknownColumn(name.into()))?;
                Ok(self.records.iter().map(|r| r.features[j]).collect())
            }
            Some(ColumnRole::Score) => Ok(self.records.iter().map(|r| r.score).collect()),
            Some(ColumnRole::ReviewerScore) => Ok(self
                .records
                .iter()
                .map(|r| r.reviewer_scores.get(name).copied())
                .collect()),
            _ => Err(Error::UnknownColumn(name.into())),
        }
    }
}

fn check_monotone_funnel(stages: &[String], rec: &CandidateRecord) -> Result<()> {
    for (k, stage) in stages.iter().enumerate() {
        if rec.outcomes.contains_key(stage) {
            for earlier in &stages[..k] {
                if rec.outcomes.get(earlier) != Some(&true) {
                    return Err(Error::NonMonotoneFunnel {
                        id: rec.id.clone(),
                        stage: stage.clone(),
                        earlier: earlier.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

/// Loads a CSV file against a declared schema.
///
/// Every schema column must be present in the header; undeclared CSV
/// columns are ignored and listed in the report. Empty cells are
/// missing values.
pub fn load_dataset(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<(Dataset, LoadReport)> {
    let path_str = path.as_ref().display().to_string();
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::DatasetRead {
                path: path_str.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Csv {
                path: path_str.clone(),
                source: e,
            },
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path_str.clone(),
            source,
        })?
        .iter()
        .map(str::to_owned)
        .collect();

    for column in schema.columns.keys() {
        if !headers.iter().any(|h| h == column) {
            return Err(Error::MissingColumn {
                column: column.clone(),
            });
        }
    }
    let ignored_columns: Vec<String> = headers
        .iter()
        .filter(|h| !schema.columns.contains_key(*h))
        .cloned()
        .collect();

    let col_index: BTreeMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();
    let feature_names: Vec<String> = headers
        .iter()
        .filter(|h| schema.role_of(h) == Some(ColumnRole::Feature))
        .cloned()
        .collect();
    let id_col = schema.id_column().to_owned();

    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row.map_err(|source| Error::Csv {
            path: path_str.clone(),
            source,
        })?;
        let cell = |name: &str| -> &str { row.get(col_index[name]).unwrap_or("").trim() };
        // 1-based and skipping the header, like a spreadsheet shows it.
        let rownum = row_idx + 2;

        let id = cell(&id_col).to_owned();
        if id.is_empty() {
            return Err(Error::UnparseableCell {
                row: rownum,
                column: id_col.clone(),
                value: String::new(),
                expected: "non-empty id",
            });
        }
        let mut rec = CandidateRecord {
            id,
            features: Vec::with_capacity(feature_names.len()),
            ..CandidateRecord::default()
        };

        for name in &feature_names {
            rec.features.push(parse_optional_real(cell(name), rownum, name)?);
        }
        for (name, spec) in &schema.columns {
            let raw = cell(name);
            match spec.role {
                ColumnRole::Id | ColumnRole::Feature => {}
                ColumnRole::Protected => {
                    if !raw.is_empty() {
                        rec.protected.insert(name.clone(), raw.to_owned());
                    }
                }
                ColumnRole::StageOutcome => {
                    if !raw.is_empty() {
                        let b = parse_bool(raw).ok_or_else(|| Error::UnparseableCell {
                            row: rownum,
                            column: name.clone(),
                            value: raw.to_owned(),
                            expected: "boolean (0/1/true/false)",
                        })?;
                        rec.outcomes.insert(name.clone(), b);
                    }
                }
                ColumnRole::Score => rec.score = parse_optional_real(raw, rownum, name)?,
                ColumnRole::Label => {
                    if !raw.is_empty() {
                        let b = parse_bool(raw).ok_or_else(|| Error::UnparseableCell {
                            row: rownum,
                            column: name.clone(),
                            value: raw.to_owned(),
                            expected: "boolean (0/1/true/false)",
                        })?;
                        rec.label = Some(b);
                    }
                }
                ColumnRole::ReviewerScore => {
                    if let Some(v) = parse_optional_real(raw, rownum, name)? {
                        rec.reviewer_scores.insert(name.clone(), v);
                    }
                }
            }
        }
        records.push(rec);
    }

    let rows = records.len();
    let dataset = Dataset::new(schema.clone(), feature_names, records)?;
    Ok((
        dataset,
        LoadReport {
            rows,
            ignored_columns,
        },
    ))
}

fn parse_optional_real(raw: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| Error::UnparseableCell {
        row,
        column: column.to_owned(),
        value: raw.to_owned(),
        expected: "real number",
    })?;
    if !v.is_finite() {
        return Err(Error::UnparseableCell {
            row,
            column: column.to_owned(),
            value: raw.to_owned(),
            expected: "finite real number",
        });
    }
    Ok(Some(v))
}

/// Writes a dataset back to CSV. Finite reals are printed at full
/// precision (shortest round-tripping representation), booleans as 0/1,
/// missing values as empty cells, so save → load is value-identical.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let schema = &dataset.schema;

    let protected_cols = schema.columns_with_role(ColumnRole::Protected);
    let score_cols = schema.columns_with_role(ColumnRole::Score);
    let label_cols = schema.columns_with_role(ColumnRole::Label);
    let reviewer_cols = schema.columns_with_role(ColumnRole::ReviewerScore);

    let mut header: Vec<&str> = vec![schema.id_column()];
    header.extend(dataset.feature_names.iter().map(String::as_str));
    header.extend(protected_cols.iter().copied());
    header.extend(schema.stages.iter().map(String::as_str));
    header.extend(score_cols.iter().copied());
    header.extend(label_cols.iter().copied());
    header.extend(reviewer_cols.iter().copied());
    writer.write_record(&header)?;

    let fmt_real = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let fmt_bool = |v: Option<bool>| match v {
        Some(true) => "1".to_owned(),
        Some(false) => "0".to_owned(),
        None => String::new(),
    };

    for rec in &dataset.records {
        let mut row: Vec<String> = vec![rec.id.clone()];
        row.extend(rec.features.iter().map(|v| fmt_real(*v)));
        row.extend(
            protected_cols
                .iter()
                .map(|c| rec.protected.get(*c).cloned().unwrap_or_default()),
        );
        row.extend(
            schema
                .stages
                .iter()
                .map(|s| fmt_bool(rec.outcomes.get(s).copied())),
        );
        row.extend(score_cols.iter().map(|_| fmt_real(rec.score)));
        row.extend(label_cols.iter().map(|_| fmt_bool(rec.label)));
        row.extend(
            reviewer_cols
                .iter()
                .map(|c| fmt_real(rec.reviewer_scores.get(*c).copied())),
        );
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::ColumnSpec;

    fn small_schema() -> ColumnSchema {
        ColumnSchema {
            stages: vec!["screening".into(), "interview".into()],
            columns: BTreeMap::from([
                (
                    "id".into(),
                    ColumnSpec {
                        role: ColumnRole::Id,
                        categories: None,
                    },
                ),
                (
                    "gender".into(),
                    ColumnSpec {
                        role: ColumnRole::Protected,
                        categories: Some(vec!["F".into(), "M".into()]),
                    },
                ),
                (
                    "score".into(),
                    ColumnSpec {
                        role: ColumnRole::Score,
                        categories: None,
                    },
                ),
                (
                    "screening".into(),
                    ColumnSpec {
                        role: ColumnRole::StageOutcome,
                        categories: None,
                    },
                ),
                (
                    "interview".into(),
                    ColumnSpec {
                        role: ColumnRole::StageOutcome,
                        categories: None,
                    },
                ),
            ]),
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_row_csv() {
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,F,10.5,1,1\n\
             b,M,9.25,1,0\n\
             c,F,3.0,0,\n",
        );
        let (ds, report) = load_dataset(f.path(), &small_schema()).unwrap();
        assert_eq!(report.rows, 3);
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.records[0].protected["gender"], "F");
        assert_eq!(ds.records[1].outcomes["interview"], false);
        assert_eq!(ds.records[2].outcomes.get("interview"), None);
        assert_eq!(ds.records[0].score, Some(10.5));
    }

    #[test]
    fn rejects_non_monotone_funnel() {
        // Passes interview but failed screening.
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,F,1.0,0,1\n",
        );
        let err = load_dataset(f.path(), &small_schema()).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneFunnel { .. }), "{err}");
        // Outcome at interview with screening missing entirely.
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,F,1.0,,1\n",
        );
        let err = load_dataset(f.path(), &small_schema()).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneFunnel { .. }), "{err}");
    }

    #[test]
    fn rejects_duplicate_ids_and_bad_cells() {
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,F,1.0,1,\na,M,2.0,1,\n",
        );
        assert!(matches!(
            load_dataset(f.path(), &small_schema()).unwrap_err(),
            Error::DuplicateId { .. }
        ));
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,F,not-a-number,1,\n",
        );
        let err = load_dataset(f.path(), &small_schema()).unwrap_err();
        match err {
            Error::UnparseableCell { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "score");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_missing_column_and_unknown_category() {
        let f = write_csv("id,score,screening,interview\na,1.0,1,\n");
        assert!(matches!(
            load_dataset(f.path(), &small_schema()).unwrap_err(),
            Error::MissingColumn { .. }
        ));
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,X,1.0,1,\n",
        );
        assert!(matches!(
            load_dataset(f.path(), &small_schema()).unwrap_err(),
            Error::UnknownCategory { .. }
        ));
    }

    #[test]
    fn ignores_undeclared_columns_with_report() {
        let f = write_csv(
            "id,gender,score,screening,interview,notes\n\
             a,F,1.0,1,,hello\n",
        );
        let (ds, report) = load_dataset(f.path(), &small_schema()).unwrap();
        assert_eq!(report.ignored_columns, vec!["notes".to_string()]);
        // Schema closure: nothing downstream can see the ignored column.
        assert!(ds.numeric_column("notes").is_err());
    }

    #[test]
    fn save_load_round_trip_is_value_identical() {
        let f = write_csv(
            "id,gender,score,screening,interview\n\
             a,F,0.1234567890123456789,1,1\n\
             b,M,-7.25e-19,1,0\n\
             c,,,0,\n",
        );
        let (ds, _) = load_dataset(f.path(), &small_schema()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_dataset(&ds, out.path()).unwrap();
        let (ds2, _) = load_dataset(out.path(), &small_schema()).unwrap();
        assert_eq!(ds.records, ds2.records);
    }
}
