use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::trial::Condition;

/// Whether the decision after `sequences` sequences of one trial was right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub subject: usize,
    pub condition: Condition,
    pub sequences: usize,
    pub correct: bool,
}

/// Across-subject mean and sample standard deviation of accuracy (percent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub condition: Condition,
    pub sequences: usize,
    pub mean: f64,
    pub sd: f64,
    pub n_subjects: usize,
}

/// Per-subject accuracy (percent) keyed by (condition, sequences), subjects ascending.
pub fn subject_accuracies(outcomes: &[SelectionOutcome]) -> BTreeMap<(Condition, usize), Vec<(usize, f64)>> {
    let mut tally: BTreeMap<(Condition, usize, usize), (usize, usize)> = BTreeMap::new();
    for o in outcomes {
        let e = tally.entry((o.condition, o.sequences, o.subject)).or_default();
        e.0 += o.correct as usize;
        e.1 += 1;
    }
    let mut out: BTreeMap<(Condition, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for ((c, k, s), (hit, n)) in tally {
        out.entry((c, k)).or_default().push((s, 100.0 * hit as f64 / n as f64));
    }
    out
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Mean ± sd accuracy for every (condition, sequence count) present.
pub fn accuracy_table(outcomes: &[SelectionOutcome]) -> Vec<AccuracyCell> {
    subject_accuracies(outcomes)
        .into_iter()
        .map(|((condition, sequences), subj)| {
            let accs: Vec<f64> = subj.iter().map(|s| s.1).collect();
            let (mean, sd) = mean_sd(&accs);
            AccuracyCell {
                condition,
                sequences,
                mean,
                sd,
                n_subjects: accs.len(),
            }
        })
        .collect()
}
