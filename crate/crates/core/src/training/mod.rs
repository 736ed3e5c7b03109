//! Fairness-aware model training: group-normalized corrected objectives,
//! the 4/5ths penalty, the feature-removal mitigation loop, and
//! role-profile fit scoring.

mod mitigate;
mod model;
mod objective;
mod profile;
mod train;

pub use mitigate::{
    mitigate_by_feature_removal, restrict_features, MitigationOutcome, MitigationStep,
    MitigationTrace, MitigationVerdict,
};
pub use model::{sigmoid, Link, ScoringModel, Standardizer};
pub use objective::{
    corrected_loss, corrected_loss_over_view, penalty_term, selection_ratio_from_flags,
    standard_loss, top_fraction_count, Gradient, ObjectiveConfig, ObjectiveMode, PenaltyForm,
    PenaltyOutcome, SelectionPolicy,
};
pub use profile::{
    build_role_profile, fit_score, weighted_sum_aggregate, FitScore, RoleProfile,
    RoleProfileConfig, DEFAULT_FIT_THRESHOLD,
};
pub use train::{
    audit_selections, select_candidates, train_on_features, train_scorer, EpochRecord,
    TrainOutcome, TrainingLog,
};

#[cfg(test)]
pub(crate) mod tests_support {
    use std::collections::BTreeMap;

    use crate::data::{GroupKey, GroupedView, GroupingScheme};

    /// A grouped view over record indices 0..n_a+n_b with groups A and B,
    /// built directly (no dataset needed).
    pub fn view_two_groups(n_a: usize, n_b: usize) -> GroupedView {
        let mut groups = BTreeMap::new();
        if n_a > 0 {
            groups.insert(GroupKey::of(["A"]), (0..n_a).collect());
        }
        if n_b > 0 {
            groups.insert(GroupKey::of(["B"]), (n_a..n_a + n_b).collect());
        }
        GroupedView {
            scheme: GroupingScheme::single("gender"),
            groups,
            min_group_size: 1,
            excluded_missing: 0,
            small_groups: vec![],
        }
    }
}
