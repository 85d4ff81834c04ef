use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::paradigm::FlashSchedule;

/// Index of a selectable object, `0..n_objects`.
pub type ObjectId = usize;

/// Task performed by the user when the target flashes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Condition {
    /// Attend the flash only.
    ErpOnly = 1,
    /// Attend and imagine saying a meaningless syllable.
    ErpPlusMeaningless = 2,
    /// Attend and imagine saying the target's name.
    ErpPlusMeaningful = 3,
}

impl Condition {
    pub const ALL: [Condition; 3] = [
        Condition::ErpOnly,
        Condition::ErpPlusMeaningless,
        Condition::ErpPlusMeaningful,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    /// Zero-based position, handy for indexing per-condition arrays.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Condition::ErpOnly),
            2 => Ok(Condition::ErpPlusMeaningless),
            3 => Ok(Condition::ErpPlusMeaningful),
            _ => Err(Error::InvalidConfig(vec![format!(
                "condition: expected 1, 2 or 3, got {id}"
            )])),
        }
    }
}

impl TryFrom<u8> for Condition {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Condition::from_id(v)
    }
}

impl From<Condition> for u8 {
    fn from(c: Condition) -> u8 {
        c.id()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Where an epoch came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMeta {
    pub trial_id: u64,
    pub condition: Condition,
    pub sequence_index: usize,
    pub flash_index: usize,
    /// Onset in stream time (ms).
    pub onset_ms: f64,
    pub object_flags: Vec<ObjectId>,
    pub is_target: bool,
}

/// One channels x time window of µV samples around a flash onset.
///
/// Column `j` holds epoch time `epoch_start + j * sample_period`.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub samples: Array2<f64>,
    pub meta: EpochMeta,
}

/// One selection: a schedule, its ground truth and the resulting epochs.
#[derive(Debug, Clone)]
pub struct Trial {
    pub trial_id: u64,
    pub condition: Condition,
    pub true_target: ObjectId,
    pub schedule: FlashSchedule,
    pub epochs: Vec<Epoch>,
}

impl Trial {
    /// Checks target labelling and the two-targets-per-sequence rule.
    pub fn validate(&self, flashes_per_sequence: usize) -> Result<()> {
        let mut per_sequence = vec![0usize; self.epochs.len().div_ceil(flashes_per_sequence)];
        for e in &self.epochs {
            let has = e.meta.object_flags.contains(&self.true_target);
            if has != e.meta.is_target {
                return Err(Error::InvalidSchedule(format!(
                    "epoch {}/{} target flag disagrees with its flash group",
                    e.meta.sequence_index, e.meta.flash_index
                )));
            }
            if has {
                per_sequence[e.meta.sequence_index] += 1;
            }
        }
        if let Some(s) = per_sequence.iter().position(|&n| n != 2) {
            return Err(Error::InvalidSchedule(format!(
                "sequence {s} has {} target epochs, expected 2",
                per_sequence[s]
            )));
        }
        Ok(())
    }
}
