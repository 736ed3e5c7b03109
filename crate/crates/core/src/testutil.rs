//! Shared fixtures for unit tests.

use std::collections::BTreeMap;

use crate::data::{CandidateRecord, ColumnRole, ColumnSchema, ColumnSpec, Dataset};

/// Two-group dataset with a two-stage funnel. Group `A` holds the first
/// `n_a` records, `B` the rest. Everyone has a screening outcome; the
/// first `sel_a`/`sel_b` of each group pass. Group A's screening passers
/// additionally carry an `interview` outcome (all passes), so the second
/// stage has applicants only from A.
pub fn two_group_dataset(n_a: usize, n_b: usize, sel_a: usize, sel_b: usize) -> Dataset {
    assert!(sel_a <= n_a && sel_b <= n_b);
    let schema = ColumnSchema {
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
                    categories: Some(vec!["A".into(), "B".into()]),
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
    };
    let mut records = Vec::new();
    for (group, n, sel) in [("A", n_a, sel_a), ("B", n_b, sel_b)] {
        for i in 0..n {
            let passed = i < sel;
            let mut outcomes = BTreeMap::from([("screening".to_string(), passed)]);
            if group == "A" && passed {
                outcomes.insert("interview".to_string(), true);
            }
            records.push(CandidateRecord {
                id: format!("{group}{i}"),
                protected: BTreeMap::from([("gender".to_string(), group.to_string())]),
                outcomes,
                ..CandidateRecord::default()
            });
        }
    }
    Dataset::new(schema, vec![], records).unwrap()
}
