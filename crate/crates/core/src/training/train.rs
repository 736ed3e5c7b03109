//! Gradient-descent training with the fairness-corrected objective and
//! the 4/5ths penalty, plus deterministic candidate selection.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{derive_groups, Dataset, GroupKey, GroupingScheme};
use crate::error::{Error, Result};
use crate::training::model::{ScoringModel, Standardizer};
use crate::training::objective::{
    corrected_loss, margin_cut, selection_ratio_from_flags, soft_penalty_and_slopes,
    standard_loss, top_fraction_count, ObjectiveConfig, ObjectiveMode, SelectionPolicy,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Data loss plus surrogate penalty: what the optimizer descends.
    pub objective: f64,
    pub data_loss: f64,
    pub group_losses: BTreeMap<GroupKey, f64>,
    /// Hard impact ratio of this epoch's selections under the policy.
    pub impact_ratio: Option<f64>,
    /// The true piecewise penalty, evaluated on hard selections. This is
    /// the audit criterion; the surrogate only exists for gradients.
    pub step_penalty: f64,
    pub surrogate_penalty: f64,
    /// Share of the objective magnitude carried by the data term. When
    /// penalty terms crowd each other out, convergence trouble shows up
    /// here first.
    pub data_term_share: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diverged: Option<String>,
    /// Records left out for missing features, labels, or group values.
    pub excluded_records: usize,
    pub n_used: usize,
    pub seed: u64,
}

impl TrainingLog {
    /// One CSV row per epoch.
    pub fn to_csv(&self) -> String {
        let group_keys: Vec<GroupKey> = self
            .epochs
            .first()
            .map(|e| e.group_losses.keys().cloned().collect())
            .unwrap_or_default();
        let mut out = String::from("epoch,objective,data_loss");
        for k in &group_keys {
            out.push_str(&format!(",loss[{k}]"));
        }
        out.push_str(",impact_ratio,step_penalty,surrogate_penalty,data_term_share\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{},{}", e.epoch, e.objective, e.data_loss));
            for k in &group_keys {
                match e.group_losses.get(k) {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push(','),
                }
            }
            out.push_str(&format!(
                ",{},{},{},{}\n",
                e.impact_ratio.map(|r| r.to_string()).unwrap_or_default(),
                e.step_penalty,
                e.surrogate_penalty,
                e.data_term_share
            ));
        }
        out
    }

    pub fn final_epoch(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ScoringModel,
    pub log: TrainingLog,
}

/// Trains on every feature column. See [`train_on_features`].
pub fn train_scorer(
    dataset: &Dataset,
    scheme: &GroupingScheme,
    config: &ObjectiveConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    let features = dataset.feature_names.clone();
    train_on_features(dataset, &features, scheme, config, seed)
}

/// Full-batch gradient descent on E_with_penalty = E_corrected + P(X)
/// (or the standard objective), deterministic given the seed.
///
/// The surrogate penalty drives the gradient; the step penalty and hard
/// impact ratio are evaluated and logged every epoch regardless. A
/// non-finite objective aborts with the last stable parameters and a
/// diagnostic in the log.
pub fn train_on_features(
    dataset: &Dataset,
    features: &[String],
    scheme: &GroupingScheme,
    config: &ObjectiveConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::Training("no features to train on".into()));
    }
    let feature_idx: Vec<usize> = features
        .iter()
        .map(|f| {
            dataset
                .feature_index(f)
                .ok_or_else(|| Error::UnknownColumn(f.clone()))
        })
        .collect::<Result<_>>()?;

    let needs_groups = config.mode == ObjectiveMode::Corrected || config.penalty_cost > 0.0;
    let view = derive_groups(dataset, scheme, 1)?;
    let key_of: BTreeMap<usize, &GroupKey> = view.membership().into_iter().collect();

    // Usable rows: complete features, labeled, and grouped when the
    // objective needs groups.
    let mut raw_rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (i, rec) in dataset.records.iter().enumerate() {
        let Some(label) = rec.label else { continue };
        let row: Option<Vec<f64>> = feature_idx.iter().map(|&j| rec.features[j]).collect();
        let Some(row) = row else { continue };
        let key = key_of.get(&i);
        if needs_groups && key.is_none() {
            continue;
        }
        let dense = raw_rows.len();
        raw_rows.push(row);
        labels.push(label as u8 as f64);
        if let Some(key) = key {
            groups.entry((*key).clone()).or_default().push(dense);
        }
    }
    let n_used = raw_rows.len();
    if n_used < 2 {
        return Err(Error::Training(format!(
            "only {n_used} usable labeled records"
        )));
    }
    let excluded_records = dataset.len() - n_used;

    let (standardization, _constant) = Standardizer::fit(&raw_rows);
    let x: Vec<Vec<f64>> = raw_rows.iter().map(|r| standardization.apply(r)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = features.len();
    let mut model = ScoringModel {
        feature_names: features.to_vec(),
        weights: (0..p).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * 0.01).collect(),
        bias: 0.0,
        link: config.link,
        standardization,
    };

    let mut log = TrainingLog {
        epochs: Vec::new(),
        converged: false,
        diverged: None,
        excluded_records,
        n_used,
        seed,
    };
    let mut prev_objective = f64::INFINITY;
    let mut last_stable: Option<(Vec<f64>, f64)> = None;

    for epoch in 1..=config.max_epochs {
        let (data_loss, mut grad, group_losses) = match config.mode {
            ObjectiveMode::Standard => {
                let (loss, grad) = standard_loss(&model, &x, &labels);
                let terms = if groups.is_empty() {
                    BTreeMap::new()
                } else {
                    // Per-group means for the log only.
                    corrected_loss(&model, &x, &labels, &groups).2
                };
                (loss, grad, terms)
            }
            ObjectiveMode::Corrected => {
                if groups.is_empty() {
                    return Err(Error::Training(
                        "corrected objective requires grouped records".into(),
                    ));
                }
                corrected_loss(&model, &x, &labels, &groups)
            }
        };

        // Hard selections under the policy, for the logged audit.
        let margins: Vec<f64> = x.iter().map(|r| model.margin(r)).collect();
        let hard = hard_selections(&margins, &config.selection_policy, config.link);
        let (impact_ratio, step_penalty) = if groups.is_empty() {
            (None, 0.0)
        } else {
            let ratio = selection_ratio_from_dense(&groups, &hard);
            let step = match ratio {
                Some(r) if r < config.threshold => config.penalty_cost,
                _ => 0.0,
            };
            (ratio, step)
        };

        let mut surrogate_penalty = 0.0;
        let mut objective = data_loss;
        if config.penalty_cost > 0.0 {
            let (value, slopes) = soft_penalty_and_slopes(&margins, &groups, config);
            surrogate_penalty = value;
            objective += value;
            for j in 0..p {
                let add: f64 = slopes
                    .iter()
                    .zip(&x)
                    .map(|(s, row)| s * row[j])
                    .sum();
                grad.weights[j] += add;
            }
            grad.bias += slopes.iter().sum::<f64>();
        }

        let data_term_share = if objective.abs() > 0.0 {
            data_loss.abs() / (data_loss.abs() + surrogate_penalty.abs())
        } else {
            1.0
        };
        log.epochs.push(EpochRecord {
            epoch,
            objective,
            data_loss,
            group_losses,
            impact_ratio,
            step_penalty,
            surrogate_penalty,
            data_term_share,
        });

        if !objective.is_finite() {
            if let Some((w, b)) = last_stable.take() {
                model.weights = w;
                model.bias = b;
            }
            log.diverged = Some(format!("non-finite objective at epoch {epoch}"));
            break;
        }
        last_stable = Some((model.weights.clone(), model.bias));

        if (prev_objective - objective).abs() < config.convergence_tol {
            log.converged = true;
            break;
        }
        prev_objective = objective;

        for (w, g) in model.weights.iter_mut().zip(&grad.weights) {
            *w -= config.learning_rate * g;
        }
        model.bias -= config.learning_rate * grad.bias;
    }

    Ok(TrainOutcome { model, log })
}

fn hard_selections(margins: &[f64], policy: &SelectionPolicy, link: crate::training::Link) -> Vec<bool> {
    let cut = margin_cut(margins, policy, link);
    match policy {
        SelectionPolicy::ScoreThreshold { .. } => margins.iter().map(|&u| u >= cut).collect(),
        SelectionPolicy::TopFraction { q } => {
            let m = margins.len();
            let k = top_fraction_count(*q, m);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                margins[b]
                    .partial_cmp(&margins[a])
                    .unwrap()
                    .then_with(|| a.cmp(&b))
            });
            let mut sel = vec![false; m];
            for &i in order.iter().take(k) {
                sel[i] = true;
            }
            sel
        }
    }
}

fn selection_ratio_from_dense(
    groups: &BTreeMap<GroupKey, Vec<usize>>,
    selections: &[bool],
) -> Option<f64> {
    let rates: Vec<f64> = groups
        .values()
        .filter(|idx| !idx.is_empty())
        .map(|idx| idx.iter().filter(|&&i| selections[i]).count() as f64 / idx.len() as f64)
        .collect();
    if rates.len() < 2 {
        return None;
    }
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some(if max == 0.0 { 1.0 } else { min / max })
}

/// Applies the policy to model scores over the whole dataset. Records
/// that cannot be scored (missing model features) are never selected.
/// Top-fraction ties break by record id order.
pub fn select_candidates(
    model: &ScoringModel,
    dataset: &Dataset,
    policy: &SelectionPolicy,
) -> Result<Vec<bool>> {
    policy.validate()?;
    let scores = model.score_records(dataset)?;
    let mut selected = vec![false; dataset.len()];
    match policy {
        SelectionPolicy::ScoreThreshold { tau } => {
            for (i, s) in scores.iter().enumerate() {
                if let Some(s) = s {
                    selected[i] = *s >= *tau;
                }
            }
        }
        SelectionPolicy::TopFraction { q } => {
            let mut scoreable: Vec<(usize, f64)> = scores
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.map(|s| (i, s)))
                .collect();
            if scoreable.is_empty() {
                return Ok(selected);
            }
            let k = top_fraction_count(*q, scoreable.len());
            scoreable.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap()
                    .then_with(|| dataset.records[a.0].id.cmp(&dataset.records[b.0].id))
            });
            for (i, _) in scoreable.into_iter().take(k) {
                selected[i] = true;
            }
        }
    }
    Ok(selected)
}

/// Audits hard selections against a grouped view: the min/max
/// selection-rate ratio, the same check the trainer logs each epoch.
pub fn audit_selections(view: &crate::data::GroupedView, selections: &[bool]) -> Option<f64> {
    selection_ratio_from_flags(view, selections)
}
