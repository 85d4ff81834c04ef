use std::io::Write;

use serde::{Deserialize, Serialize};

use super::HomeState;
use crate::decoder::{selections_by_sequence, RldaModel};
use crate::error::{Error, Result};
use crate::experiment::{simulate_trial, TrialSeeds};
use crate::seed::derive_seed;
use crate::synth::SubjectProfile;
use crate::timing::TimingConfig;
use crate::trial::{Condition, ObjectId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeStep {
    pub step: usize,
    pub condition: Condition,
    pub intent: ObjectId,
    pub selected: ObjectId,
    pub correct: bool,
}

/// Simulates the user attending to each intended object in turn.
///
/// Every step runs a full trial (all sequences), decodes it and applies the
/// decoded selection to the home. The result depends only on the arguments.
pub fn run_closed_loop(
    initial: &HomeState,
    intents: &[ObjectId],
    model: &RldaModel,
    profile: &SubjectProfile,
    condition: Condition,
    cfg: &TimingConfig,
    seed: u64,
) -> Result<(HomeState, Vec<DecodeStep>)> {
    profile.validate()?;
    let mut state = initial.clone();
    let mut log = Vec::with_capacity(intents.len());
    for (step, &intent) in intents.iter().enumerate() {
        if intent >= cfg.n_objects {
            return Err(Error::InvalidObject {
                id: intent,
                n: cfg.n_objects,
            });
        }
        let seeds = TrialSeeds {
            schedule: derive_seed(seed, &[step as u64, 0]),
            target: intent,
            noise: derive_seed(seed, &[step as u64, 1]),
        };
        let trial = simulate_trial(step as u64, condition, seeds, profile, cfg)?;
        let selected = *selections_by_sequence(model, &trial.features, cfg)?
            .last()
            .ok_or(Error::Empty("trial sequences"))?;
        state.select(selected)?;
        log.push(DecodeStep {
            step,
            condition,
            intent,
            selected,
            correct: selected == intent,
        });
    }
    Ok((state, log))
}

/// CSV with header `step,condition,intent,selected,correct`.
pub fn write_decode_log<W: Write>(mut out: W, log: &[DecodeStep]) -> std::io::Result<()> {
    writeln!(out, "step,condition,intent,selected,correct")?;
    for s in log {
        writeln!(out, "{},{},{},{},{}", s.step, s.condition.id(), s.intent, s.selected, s.correct)?;
    }
    Ok(())
}
