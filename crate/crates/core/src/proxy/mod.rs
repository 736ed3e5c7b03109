//! Proxy-feature detection: can protected-group structure be recovered
//! from the non-protected features?

mod alignment;
mod association;
mod flags;
mod kmeans;

pub use alignment::{
    adjusted_rand_index, cluster_group_alignment, AlignmentResult, LeakageVerdict,
    DEFAULT_LEAKAGE_THRESHOLD,
};
pub use association::{feature_group_association, AssociationKind, AssociationRow, AssociationTable};
pub use flags::{flag_proxy_features, standardize_columns, ProxyEvidence, ProxyFlagConfig, ProxyFlagReport};
pub use kmeans::{kmeans, Clustering, KMeansConfig};
