//! Objective functions: the standard global loss, the group-normalized
//! corrected loss E_corrected = E_A + E_B + E_C + ⋯, and the 4/5ths
//! penalty P(X) with cost p_m.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{GroupKey, GroupedView};
use crate::error::{Error, Result};
use crate::numeric::mean;
use crate::training::model::{sigmoid, Link, ScoringModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveMode {
    /// One global mean loss.
    Standard,
    /// Sum of per-group mean losses, so the majority group does not
    /// influence the model more than the rest.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyForm {
    /// p_m if the selections violate the 4/5ths rule, else 0 — the exact
    /// piecewise penalty. Zero gradient almost everywhere.
    Step,
    /// p_m · max(0, threshold − ratio): the minimal differentiable
    /// relaxation; during training the ratio itself is smoothed with
    /// sigmoid-relaxed selection indicators at temperature beta.
    Surrogate,
}

/// How scores become selections. The audited procedures never say; both
/// obvious policies are provided and the configured one is used for
/// training and deployment alike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    /// Select iff score >= tau.
    ScoreThreshold { tau: f64 },
    /// Select the top fraction q of scoreable records, ties broken by
    /// record id order.
    TopFraction { q: f64 },
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            SelectionPolicy::ScoreThreshold { tau } => {
                if tau.is_nan() {
                    return Err(Error::InvalidConfig("selection threshold is NaN".into()));
                }
            }
            SelectionPolicy::TopFraction { q } => {
                if !(*q > 0.0 && *q <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "top-fraction q must be in (0, 1], got {q}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub mode: ObjectiveMode,
    /// p_m: the cost attached to a 4/5ths violation. 0 disables the
    /// penalty entirely.
    pub penalty_cost: f64,
    pub penalty_form: PenaltyForm,
    /// Impact-ratio threshold the penalty guards (0.8).
    pub threshold: f64,
    pub selection_policy: SelectionPolicy,
    /// Temperature of the sigmoid-relaxed selection indicators used for
    /// gradient flow.
    pub surrogate_beta: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub convergence_tol: f64,
    pub link: Link,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            mode: ObjectiveMode::Standard,
            penalty_cost: 0.0,
            penalty_form: PenaltyForm::Surrogate,
            threshold: crate::impact::FOUR_FIFTHS_THRESHOLD,
            selection_policy: SelectionPolicy::TopFraction { q: 0.3 },
            surrogate_beta: 10.0,
            learning_rate: 0.5,
            max_epochs: 300,
            convergence_tol: 1e-9,
            link: Link::Logistic,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.penalty_cost < 0.0 {
            return Err(Error::InvalidConfig("penalty cost must be >= 0".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidConfig("threshold must be in (0, 1]".into()));
        }
        self.selection_policy.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Gradient {
    fn zeros(p: usize) -> Self {
        Gradient {
            weights: vec![0.0; p],
            bias: 0.0,
        }
    }

    fn add(&mut self, other: &Gradient) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        self.bias += other.bias;
    }
}

/// Per-sample loss and d(loss)/d(margin) at margin `u`, label `y`.
fn sample_loss_and_slope(link: Link, u: f64, y: f64) -> (f64, f64) {
    match link {
        Link::Identity => {
            let e = u - y;
            (e * e, 2.0 * e)
        }
        Link::Logistic => {
            let p = sigmoid(u);
            let pc = p.clamp(1e-12, 1.0 - 1e-12);
            let loss = -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
            (loss, p - y)
        }
    }
}

/// Mean loss and gradient over the chosen rows, pairwise-summed so a
/// duplicated block of records leaves the mean bit-identical.
fn mean_loss_and_grad(
    model: &ScoringModel,
    x: &[Vec<f64>],
    labels: &[f64],
    rows: &[usize],
) -> (f64, Gradient) {
    let p = model.weights.len();
    let mut losses = Vec::with_capacity(rows.len());
    let mut slopes = Vec::with_capacity(rows.len());
    for &i in rows {
        let u = model.margin(&x[i]);
        let (loss, slope) = sample_loss_and_slope(model.link, u, labels[i]);
        losses.push(loss);
        slopes.push(slope);
    }
    let mut grad = Gradient::zeros(p);
    for j in 0..p {
        let contrib: Vec<f64> = rows
            .iter()
            .zip(&slopes)
            .map(|(&i, s)| s * x[i][j])
            .collect();
        grad.weights[j] = mean(&contrib);
    }
    grad.bias = mean(&slopes);
    (mean(&losses), grad)
}

/// Global mean loss (MSE under the identity link, mean log-loss under
/// the logistic link) with its exact gradient.
pub fn standard_loss(model: &ScoringModel, x: &[Vec<f64>], labels: &[f64]) -> (f64, Gradient) {
    let rows: Vec<usize> = (0..x.len()).collect();
    mean_loss_and_grad(model, x, labels, &rows)
}

/// E_corrected = Σ_g E_g over per-group mean losses. Normalizing each
/// term by its group size equalizes group influence regardless of group
/// counts. Returns the per-group terms alongside the total.
pub fn corrected_loss(
    model: &ScoringModel,
    x: &[Vec<f64>],
    labels: &[f64],
    groups: &BTreeMap<GroupKey, Vec<usize>>,
) -> (f64, Gradient, BTreeMap<GroupKey, f64>) {
    let p = model.weights.len();
    let mut total = 0.0;
    let mut grad = Gradient::zeros(p);
    let mut terms = BTreeMap::new();
    for (key, rows) in groups {
        if rows.is_empty() {
            continue;
        }
        let (loss, g) = mean_loss_and_grad(model, x, labels, rows);
        total += loss;
        grad.add(&g);
        terms.insert(key.clone(), loss);
    }
    (total, grad, terms)
}

/// Convenience wrapper over a dataset-indexed grouped view: builds the
/// loss from per-record labels, erroring if any grouped record lacks one.
pub fn corrected_loss_over_view(
    model: &ScoringModel,
    x_by_record: &BTreeMap<usize, Vec<f64>>,
    labels: &[Option<bool>],
    view: &GroupedView,
) -> Result<(f64, BTreeMap<GroupKey, f64>)> {
    let missing = view
        .eligible_indices()
        .iter()
        .filter(|&&i| labels[i].is_none())
        .count();
    if missing > 0 {
        return Err(Error::MissingLabels(missing));
    }
    // Re-index into a dense matrix in group order.
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (key, indices) in &view.groups {
        let dense = groups.entry(key.clone()).or_default();
        for &i in indices {
            let row = x_by_record
                .get(&i)
                .ok_or_else(|| Error::Training(format!("record {i} has no feature row")))?;
            dense.push(x.len());
            x.push(row.clone());
            y.push(labels[i].unwrap() as u8 as f64);
        }
    }
    let (loss, _, terms) = corrected_loss(model, &x, &y, &groups);
    Ok((loss, terms))
}

/// Outcome of the penalty evaluation on hard selections.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltyOutcome {
    pub value: f64,
    /// min/max selection-rate ratio the penalty saw; `None` when fewer
    /// than two groups had members.
    pub impact_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Selection rates per group from hard selections, over the view's
/// grouped records.
pub fn selection_ratio_from_flags(view: &GroupedView, selections: &[bool]) -> Option<f64> {
    let rates: Vec<f64> = view
        .groups
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

/// P(X) on hard selections: the step form pays p_m on any violation,
/// the surrogate pays proportionally to the shortfall.
pub fn penalty_term(
    selections: &[bool],
    view: &GroupedView,
    config: &ObjectiveConfig,
) -> PenaltyOutcome {
    match selection_ratio_from_flags(view, selections) {
        None => PenaltyOutcome {
            value: 0.0,
            impact_ratio: None,
            warnings: vec!["fewer than two groups with members; penalty 0".into()],
        },
        Some(ratio) => {
            let value = match config.penalty_form {
                PenaltyForm::Step => {
                    if ratio < config.threshold {
                        config.penalty_cost
                    } else {
                        0.0
                    }
                }
                PenaltyForm::Surrogate => {
                    config.penalty_cost * (config.threshold - ratio).max(0.0)
                }
            };
            PenaltyOutcome {
                value,
                impact_ratio: Some(ratio),
                warnings: vec![],
            }
        }
    }
}

/// Smoothed selection indicators sigma(beta * (u - u_tau)) per row.
pub(crate) fn soft_selections(margins: &[f64], u_tau: f64, beta: f64) -> Vec<f64> {
    margins
        .iter()
        .map(|&u| {
            if u_tau == f64::NEG_INFINITY {
                1.0
            } else if u_tau == f64::INFINITY {
                0.0
            } else {
                sigmoid(beta * (u - u_tau))
            }
        })
        .collect()
}

/// Margin-space cut point for a policy over the given margins. The link
/// is monotone, so a score threshold maps through its inverse and a
/// top-fraction quantile can be taken on margins directly.
pub(crate) fn margin_cut(
    margins: &[f64],
    policy: &SelectionPolicy,
    link: Link,
) -> f64 {
    match policy {
        SelectionPolicy::ScoreThreshold { tau } => match link {
            Link::Identity => *tau,
            Link::Logistic => {
                if *tau <= 0.0 {
                    f64::NEG_INFINITY
                } else if *tau >= 1.0 {
                    f64::INFINITY
                } else {
                    (tau / (1.0 - tau)).ln()
                }
            }
        },
        SelectionPolicy::TopFraction { q } => {
            let m = margins.len();
            if m == 0 {
                return f64::INFINITY;
            }
            let k = top_fraction_count(*q, m);
            let mut sorted = margins.to_vec();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sorted[k - 1]
        }
    }
}

/// Number of records a top-fraction policy selects: q·m rounded to the
/// nearest integer, at least 1.
pub fn top_fraction_count(q: f64, m: usize) -> usize {
    ((q * m as f64).round() as usize).clamp(1, m)
}

/// Surrogate penalty with gradient, on sigmoid-relaxed selection rates.
/// Returns (value, d/d-margin per row). The cut point is treated as a
/// constant of the current epoch.
pub(crate) fn soft_penalty_and_slopes(
    margins: &[f64],
    groups: &BTreeMap<GroupKey, Vec<usize>>,
    config: &ObjectiveConfig,
) -> (f64, Vec<f64>) {
    let n = margins.len();
    let mut slopes = vec![0.0; n];
    if config.penalty_cost == 0.0 {
        return (0.0, slopes);
    }
    let u_tau = margin_cut(margins, &config.selection_policy, config.link);
    let soft = soft_selections(margins, u_tau, config.surrogate_beta);

    let group_rates: Vec<(&GroupKey, f64, &Vec<usize>)> = groups
        .iter()
        .filter(|(_, idx)| !idx.is_empty())
        .map(|(k, idx)| {
            let vals: Vec<f64> = idx.iter().map(|&i| soft[i]).collect();
            (k, mean(&vals), idx)
        })
        .collect();
    if group_rates.len() < 2 {
        return (0.0, slopes);
    }
    let (min_i, max_i) = {
        let mut min_i = 0;
        let mut max_i = 0;
        for (i, g) in group_rates.iter().enumerate() {
            if g.1 < group_rates[min_i].1 {
                min_i = i;
            }
            if g.1 > group_rates[max_i].1 {
                max_i = i;
            }
        }
        (min_i, max_i)
    };
    let m_min = group_rates[min_i].1;
    let m_max = group_rates[max_i].1;
    if m_max <= 0.0 {
        return (0.0, slopes);
    }
    let ratio = m_min / m_max;
    let shortfall = config.threshold - ratio;
    if shortfall <= 0.0 {
        return (0.0, slopes);
    }
    let value = config.penalty_cost * shortfall;
    if min_i == max_i || u_tau.is_infinite() {
        return (value, slopes);
    }
    // d(penalty)/du_i = -p_m * d(ratio)/du_i on the two extreme groups.
    let beta = config.surrogate_beta;
    let (_, _, min_rows) = &group_rates[min_i];
    let (_, _, max_rows) = &group_rates[max_i];
    for &i in min_rows.iter() {
        let s = soft[i];
        let sp = beta * s * (1.0 - s);
        slopes[i] = -config.penalty_cost * sp / (m_max * min_rows.len() as f64);
    }
    for &i in max_rows.iter() {
        let s = soft[i];
        let sp = beta * s * (1.0 - s);
        slopes[i] = config.penalty_cost * m_min * sp / (m_max * m_max * max_rows.len() as f64);
    }
    (value, slopes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::model::Standardizer;

    fn model(weights: Vec<f64>, bias: f64, link: Link) -> ScoringModel {
        let p = weights.len();
        ScoringModel {
            feature_names: (0..p).map(|j| format!("f{j}")).collect(),
            weights,
            bias,
            link,
            standardization: Standardizer {
                means: vec![0.0; p],
                stds: vec![1.0; p],
            },
        }
    }

    #[test]
    fn perfect_predictions_have_zero_loss() {
        let m = model(vec![1.0], 0.0, Link::Identity);
        let x = vec![vec![0.5], vec![-1.25], vec![3.0]];
        let y = vec![0.5, -1.25, 3.0];
        let (loss, grad) = standard_loss(&m, &x, &y);
        assert_eq!(loss, 0.0);
        assert!(grad.weights[0].abs() < 1e-15);
        assert!(grad.bias.abs() < 1e-15);
    }

    #[test]
    fn zero_weight_model_on_centered_labels_gives_label_variance() {
        let m = model(vec![0.0, 0.0], 0.0, Link::Identity);
        let x = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0], vec![7.0, 8.0]];
        let y = vec![-1.5, 0.5, 0.5, 0.5]; // mean 0
        let (loss, _) = standard_loss(&m, &x, &y);
        let variance = crate::numeric::population_variance(&y);
        assert!((loss - variance).abs() < 1e-15);
    }

    #[test]
    fn corrected_loss_single_group_equals_standard() {
        let m = model(vec![0.3, -0.7], 0.1, Link::Logistic);
        let x: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![(i as f64) * 0.3 - 1.0, (i as f64).sin()])
            .collect();
        let y: Vec<f64> = (0..7).map(|i| (i % 2) as f64).collect();
        let groups =
            BTreeMap::from([(GroupKey::of(["all"]), (0..7).collect::<Vec<usize>>())]);
        let (std_loss, std_grad) = standard_loss(&m, &x, &y);
        let (corr, grad, terms) = corrected_loss(&m, &x, &y, &groups);
        assert_eq!(std_loss, corr); // bit-identical: same rows, same order
        assert_eq!(std_grad.weights, grad.weights);
        assert_eq!(terms.len(), 1);
    }

    #[test]
    fn equal_per_sample_losses_make_corrected_twice_the_mean() {
        // Dyadic values keep every mean exact: prediction error 0.5
        // per record -> per-record loss 0.25, per-group mean 0.25,
        // E_corrected = 0.5 regardless of group sizes 3 vs 9.
        let m = model(vec![0.0], 0.5, Link::Identity);
        let x = vec![vec![0.0]; 12];
        let y = vec![0.0; 12];
        let groups = BTreeMap::from([
            (GroupKey::of(["A"]), (0..3).collect::<Vec<usize>>()),
            (GroupKey::of(["B"]), (3..12).collect::<Vec<usize>>()),
        ]);
        let (corr, _, terms) = corrected_loss(&m, &x, &y, &groups);
        assert_eq!(corr, 0.5);
        assert_eq!(terms[&GroupKey::of(["A"])], 0.25);
        assert_eq!(terms[&GroupKey::of(["B"])], 0.25);
    }

    #[test]
    fn penalty_piecewise_branches() {
        // Ratio 0.9: no penalty. Ratio 0.7: step pays p_m, surrogate
        // pays p_m * 0.1.
        let view = crate::training::tests_support::view_two_groups(20, 20);
        let mut selections = vec![false; 40];
        // Group A rate 1.0, group B rate 0.9 -> ratio 0.9.
        for i in 0..20 {
            selections[i] = true;
        }
        for i in 20..38 {
            selections[i] = true;
        }
        let mut config = ObjectiveConfig {
            penalty_cost: 10.0,
            penalty_form: PenaltyForm::Step,
            ..ObjectiveConfig::default()
        };
        let p = penalty_term(&selections, &view, &config);
        assert_eq!(p.value, 0.0);
        assert!((p.impact_ratio.unwrap() - 0.9).abs() < 1e-12);

        // Drop B to rate 0.7.
        for i in 34..40 {
            selections[i] = false;
        }
        let p = penalty_term(&selections, &view, &config);
        assert_eq!(p.value, 10.0);
        config.penalty_form = PenaltyForm::Surrogate;
        let p = penalty_term(&selections, &view, &config);
        assert!((p.value - 10.0 * (0.8 - 0.7)).abs() < 1e-9);
    }

    #[test]
    fn penalty_single_group_is_zero_with_warning() {
        let view = crate::training::tests_support::view_two_groups(10, 0);
        let config = ObjectiveConfig {
            penalty_cost: 5.0,
            ..ObjectiveConfig::default()
        };
        let p = penalty_term(&vec![true; 10], &view, &config);
        assert_eq!(p.value, 0.0);
        assert!(p.impact_ratio.is_none());
        assert!(!p.warnings.is_empty());
    }

    #[test]
    fn top_fraction_count_rounds_to_nearest() {
        assert_eq!(top_fraction_count(0.3, 10), 3);
        assert_eq!(top_fraction_count(1.0, 10), 10);
        assert_eq!(top_fraction_count(0.25, 10), 3); // 2.5 rounds up
        assert_eq!(top_fraction_count(0.01, 10), 1); // floor of 1
    }
}
