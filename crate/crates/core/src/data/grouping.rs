//! Protected-group derivation, including intersectional crossings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::data::dataset::Dataset;
use crate::error::{Error, Result};

/// Which protected attributes to group by. Attribute names are kept in
/// canonical sorted order so equivalent schemes compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingScheme {
    pub attributes: Vec<String>,
    pub intersectional: bool,
}

impl GroupingScheme {
    /// Single-attribute grouping.
    pub fn single(attribute: impl Into<String>) -> Self {
        GroupingScheme {
            attributes: vec![attribute.into()],
            intersectional: false,
        }
    }

    /// Cross-product grouping over several attributes, the comparison
    /// single-axis audits omit.
    pub fn intersectional(attributes: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let mut attributes: Vec<String> = attributes.into_iter().map(Into::into).collect();
        attributes.sort();
        attributes.dedup();
        GroupingScheme {
            attributes,
            intersectional: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::EmptyScheme);
        }
        if !self.intersectional && self.attributes.len() != 1 {
            return Err(Error::NonIntersectionalMultiAttribute);
        }
        Ok(())
    }

    /// Canonicalized copy: attributes sorted and deduplicated.
    fn canonical(&self) -> GroupingScheme {
        let mut s = self.clone();
        s.attributes.sort();
        s.attributes.dedup();
        s
    }

    /// Human-readable label, e.g. `gender` or `ethnicity×gender`.
    pub fn label(&self) -> String {
        self.attributes.join("×")
    }
}

/// Canonical group identity: one category per scheme attribute, in the
/// scheme's (sorted) attribute order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey(pub Vec<String>);

impl GroupKey {
    pub fn of(parts: impl IntoIterator<Item = impl Into<String>>) -> Self {
        GroupKey(parts.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join("|"))
    }
}

impl Serialize for GroupKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.is_empty() {
            return Err(de::Error::custom("empty group key"));
        }
        Ok(GroupKey(s.split('|').map(str::to_owned).collect()))
    }
}

/// A partition of the records that carry values for every scheme
/// attribute. Records missing an attribute are excluded (and counted),
/// never lumped into an "unknown" pseudo-group; groups below
/// `min_group_size` are flagged, never dropped.
#[derive(Debug, Clone)]
pub struct GroupedView {
    pub scheme: GroupingScheme,
    pub groups: BTreeMap<GroupKey, Vec<usize>>,
    pub min_group_size: usize,
    /// Records excluded for missing one or more scheme attributes.
    pub excluded_missing: usize,
    /// Groups smaller than `min_group_size`.
    pub small_groups: Vec<GroupKey>,
}

impl GroupedView {
    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn is_small(&self, key: &GroupKey) -> bool {
        self.small_groups.contains(key)
    }

    /// All member indices, ascending.
    pub fn eligible_indices(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.groups.values().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn total_eligible(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    /// Group key of each eligible record, in ascending record order.
    /// Pairs positionally with matrices built from `eligible_indices`.
    pub fn membership(&self) -> Vec<(usize, &GroupKey)> {
        let mut pairs: Vec<(usize, &GroupKey)> = self
            .groups
            .iter()
            .flat_map(|(k, idxs)| idxs.iter().map(move |&i| (i, k)))
            .collect();
        pairs.sort_unstable_by_key(|(i, _)| *i);
        pairs
    }
}

/// Partitions the dataset by the scheme's attributes.
pub fn derive_groups(
    dataset: &Dataset,
    scheme: &GroupingScheme,
    min_group_size: usize,
) -> Result<GroupedView> {
    scheme.validate()?;
    let scheme = scheme.canonical();
    for attr in &scheme.attributes {
        if dataset.schema.categories_of(attr).is_none() {
            return Err(Error::UnknownAttribute(attr.clone()));
        }
    }

    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    let mut excluded_missing = 0usize;
    for (i, rec) in dataset.records.iter().enumerate() {
        let values: Option<Vec<String>> = scheme
            .attributes
            .iter()
            .map(|a| rec.protected.get(a).cloned())
            .collect();
        match values {
            Some(parts) => groups.entry(GroupKey(parts)).or_default().push(i),
            None => excluded_missing += 1,
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptyGrouping {
            attributes: scheme.attributes.join(", "),
        });
    }
    let small_groups: Vec<GroupKey> = groups
        .iter()
        .filter(|(_, v)| v.len() < min_group_size)
        .map(|(k, _)| k.clone())
        .collect();
    Ok(GroupedView {
        scheme,
        groups,
        min_group_size,
        excluded_missing,
        small_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{ColumnRole, ColumnSchema, ColumnSpec};
    use crate::data::CandidateRecord;

    fn dataset_with(genders: &[Option<&str>], eths: &[Option<&str>]) -> Dataset {
        let schema = ColumnSchema {
            stages: vec![],
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
                    "ethnicity".into(),
                    ColumnSpec {
                        role: ColumnRole::Protected,
                        categories: Some(
                            ["asian", "black", "hispanic", "middle-eastern", "native-american", "white", "other", "mixed"]
                                .iter()
                                .map(|s| s.to_string())
                                .collect(),
                        ),
                    },
                ),
            ]),
        };
        let records = genders
            .iter()
            .zip(eths)
            .enumerate()
            .map(|(i, (g, e))| {
                let mut protected = BTreeMap::new();
                if let Some(g) = g {
                    protected.insert("gender".to_string(), g.to_string());
                }
                if let Some(e) = e {
                    protected.insert("ethnicity".to_string(), e.to_string());
                }
                CandidateRecord {
                    id: format!("r{i}"),
                    protected,
                    ..CandidateRecord::default()
                }
            })
            .collect();
        Dataset::new(schema, vec![], records).unwrap()
    }

    #[test]
    fn single_attribute_two_groups() {
        let ds = dataset_with(
            &[Some("F"), Some("M"), Some("F"), None],
            &[None, None, None, None],
        );
        let view = derive_groups(&ds, &GroupingScheme::single("gender"), 1).unwrap();
        assert_eq!(view.n_groups(), 2);
        assert_eq!(view.groups[&GroupKey::of(["F"])], vec![0, 2]);
        assert_eq!(view.excluded_missing, 1);
    }

    #[test]
    fn intersectional_cross_product_sixteen_groups() {
        // Binary gender crossed with eight ethnic categories, every
        // combination populated -> 16 groups.
        let cats = [
            "asian", "black", "hispanic", "middle-eastern", "native-american", "white", "other",
            "mixed",
        ];
        let mut genders = Vec::new();
        let mut eths = Vec::new();
        for g in ["F", "M"] {
            for e in cats {
                genders.push(Some(g));
                eths.push(Some(e));
            }
        }
        let ds = dataset_with(&genders, &eths);
        let scheme = GroupingScheme::intersectional(["gender", "ethnicity"]);
        let view = derive_groups(&ds, &scheme, 1).unwrap();
        assert_eq!(view.n_groups(), 16);
        // Canonical key order follows the sorted attribute list.
        assert!(view.groups.contains_key(&GroupKey::of(["asian", "F"])));
    }

    #[test]
    fn small_groups_flagged_not_dropped() {
        let ds = dataset_with(
            &[Some("F"), Some("F"), Some("F"), Some("M")],
            &[None; 4],
        );
        let view = derive_groups(&ds, &GroupingScheme::single("gender"), 10).unwrap();
        assert_eq!(view.n_groups(), 2);
        assert!(view.is_small(&GroupKey::of(["M"])));
        assert!(view.is_small(&GroupKey::of(["F"])));
    }

    #[test]
    fn unknown_attribute_and_empty_result_error() {
        let ds = dataset_with(&[Some("F")], &[None]);
        assert!(matches!(
            derive_groups(&ds, &GroupingScheme::single("age"), 1),
            Err(Error::UnknownAttribute(_))
        ));
        let ds = dataset_with(&[None, None], &[None, None]);
        assert!(matches!(
            derive_groups(&ds, &GroupingScheme::single("gender"), 1),
            Err(Error::EmptyGrouping { .. })
        ));
    }

    #[test]
    fn partition_covers_each_eligible_record_once() {
        let ds = dataset_with(
            &[Some("F"), Some("M"), None, Some("M"), Some("F")],
            &[None; 5],
        );
        let view = derive_groups(&ds, &GroupingScheme::single("gender"), 1).unwrap();
        let indices = view.eligible_indices();
        assert_eq!(indices, vec![0, 1, 3, 4]);
        assert_eq!(view.total_eligible() + view.excluded_missing, ds.len());
    }
}
