//! Component distances, rank statistics and accuracy summaries.

mod accuracy;
mod auc;
mod l2;
mod stats;

pub use accuracy::{accuracy_table, mean_sd, subject_accuracies, AccuracyCell, SelectionOutcome};
pub use auc::roc_auc;
pub use l2::{component_l2, window_mean_series, ComponentWindow, ErpAverager};
pub use stats::{
    bonferroni, kruskal_wallis, midranks, wilcoxon_rank_sum, TestMethod, TestResult,
    EXACT_RANK_SUM_MAX,
};

/// Family-wise significance level used throughout.
pub const ALPHA: f64 = 0.05;
