//! Iterative feature-removal mitigation: train, audit the 4/5ths rule
//! on the model's selections, remove the most implicated feature,
//! retrain — until the audit passes or the budget runs out.

use serde::{Deserialize, Serialize};

use crate::data::{derive_groups, Dataset, GroupingScheme};
use crate::error::{Error, Result};
use crate::proxy::{flag_proxy_features, ProxyFlagConfig};
use crate::training::model::ScoringModel;
use crate::training::objective::ObjectiveConfig;
use crate::training::train::{audit_selections, select_candidates, train_on_features};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MitigationVerdict {
    /// The initial audit already passed; zero removals.
    Clean,
    /// Removals brought the ratio over the threshold.
    Mitigated,
    /// Budget exhausted (or no removable feature left) without a pass.
    Unmitigated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MitigationStep {
    pub removed_feature: String,
    pub ratio_before: Option<f64>,
    pub ratio_after: Option<f64>,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MitigationTrace {
    pub steps: Vec<MitigationStep>,
    pub verdict: MitigationVerdict,
    pub threshold: f64,
    pub initial_ratio: Option<f64>,
    pub final_ratio: Option<f64>,
    pub initial_accuracy: f64,
    pub final_accuracy: f64,
    /// Features still in the final model.
    pub remaining_features: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct MitigationOutcome {
    pub trace: MitigationTrace,
    pub model: ScoringModel,
}

/// Agreement between selections and ground-truth labels over labeled
/// records.
fn selection_accuracy(dataset: &Dataset, selections: &[bool]) -> f64 {
    let mut n = 0usize;
    let mut agree = 0usize;
    for (rec, &sel) in dataset.records.iter().zip(selections) {
        if let Some(label) = rec.label {
            n += 1;
            agree += (label == sel) as usize;
        }
    }
    if n == 0 {
        0.0
    } else {
        agree as f64 / n as f64
    }
}

/// Runs the removal loop with at most `budget` removals. Exhausting the
/// budget is an outcome (`Unmitigated`), not an error. Every grouped
/// record counts toward the audit regardless of group size.
pub fn mitigate_by_feature_removal(
    dataset: &Dataset,
    scheme: &GroupingScheme,
    config: &ObjectiveConfig,
    budget: usize,
    seed: u64,
) -> Result<MitigationOutcome> {
    if budget == 0 {
        return Err(Error::InvalidConfig("mitigation budget must be >= 1".into()));
    }
    let view = derive_groups(dataset, scheme, 1)?;
    let mut remaining: Vec<String> = dataset.feature_names.clone();

    let evaluate = |features: &[String]| -> Result<(ScoringModel, Option<f64>, f64)> {
        let outcome = train_on_features(dataset, features, scheme, config, seed)?;
        let selections = select_candidates(&outcome.model, dataset, &config.selection_policy)?;
        let ratio = audit_selections(&view, &selections);
        let accuracy = selection_accuracy(dataset, &selections);
        Ok((outcome.model, ratio, accuracy))
    };

    let (mut model, mut ratio, mut accuracy) = evaluate(&remaining)?;
    let initial_ratio = ratio;
    let initial_accuracy = accuracy;
    let passes = |r: Option<f64>| r.is_some_and(|r| r >= config.threshold);

    let mut steps = Vec::new();
    let mut verdict = if passes(ratio) {
        MitigationVerdict::Clean
    } else {
        MitigationVerdict::Unmitigated
    };

    while !passes(ratio) && steps.len() < budget && remaining.len() > 1 {
        // Most implicated feature among those still in play.
        let sub = restrict_features(dataset, &remaining)?;
        let flags = flag_proxy_features(
            &sub,
            scheme,
            &ProxyFlagConfig {
                seed,
                ..ProxyFlagConfig::default()
            },
        )?;
        let target = flags.evidence[0].feature.clone();
        remaining.retain(|f| *f != target);

        let (next_model, next_ratio, next_accuracy) = evaluate(&remaining)?;
        steps.push(MitigationStep {
            removed_feature: target,
            ratio_before: ratio,
            ratio_after: next_ratio,
            accuracy_before: accuracy,
            accuracy_after: next_accuracy,
        });
        model = next_model;
        ratio = next_ratio;
        accuracy = next_accuracy;
        if passes(ratio) {
            verdict = MitigationVerdict::Mitigated;
        }
    }

    Ok(MitigationOutcome {
        trace: MitigationTrace {
            steps,
            verdict,
            threshold: config.threshold,
            initial_ratio,
            final_ratio: ratio,
            initial_accuracy,
            final_accuracy: accuracy,
            remaining_features: remaining,
        },
        model,
    })
}

/// Copy of the dataset keeping only the named feature columns.
pub fn restrict_features(dataset: &Dataset, keep: &[String]) -> Result<Dataset> {
    let keep_idx: Vec<usize> = keep
        .iter()
        .map(|f| {
            dataset
                .feature_index(f)
                .ok_or_else(|| Error::UnknownColumn(f.clone()))
        })
        .collect::<Result<_>>()?;
    let mut schema = dataset.schema.clone();
    schema.columns.retain(|name, spec| {
        spec.role != crate::data::ColumnRole::Feature || keep.contains(name)
    });
    let records = dataset
        .records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.features = keep_idx.iter().map(|&j| r.features[j]).collect();
            r
        })
        .collect();
    Dataset::new(schema, keep.to_vec(), records)
}
