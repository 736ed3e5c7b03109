//! The statistical test battery: one-way ANOVA, two-sample Hotelling's
//! T², the F tail, and per-metric multi-group comparison.

mod anova;
mod battery;
mod hotelling;
pub mod special;

pub use anova::{one_way_anova, AnovaResult};
pub use battery::{score_battery, BatteryConfig, BatteryReport, BatteryRow, TestKind, DEFAULT_ALPHA};
pub use hotelling::{hotelling_t2, Hotelling2Result};
pub use special::f_tail;
