use crate::error::{Error, Result};
use crate::trial::ObjectId;

/// Cumulative classifier evidence per object.
///
/// Each flash adds its epoch score to every object in the flash group; the
/// decision is the argmax, ties going to the lowest object id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBoard {
    pub scores: Vec<f64>,
    pub contributions: Vec<usize>,
    pub flashes_seen: usize,
    flashes_per_sequence: usize,
}

impl ScoreBoard {
    pub fn new(n_objects: usize, flashes_per_sequence: usize) -> Self {
        Self {
            scores: vec![0.0; n_objects],
            contributions: vec![0; n_objects],
            flashes_seen: 0,
            flashes_per_sequence,
        }
    }

    pub fn accumulate(&mut self, score: f64, object_flags: &[ObjectId]) -> Result<()> {
        let n = self.scores.len();
        if let Some(&id) = object_flags.iter().find(|&&o| o >= n) {
            return Err(Error::InvalidObject { id, n });
        }
        for &o in object_flags {
            self.scores[o] += score;
            self.contributions[o] += 1;
        }
        self.flashes_seen += 1;
        Ok(())
    }

    pub fn sequences_seen(&self) -> usize {
        self.flashes_seen / self.flashes_per_sequence
    }

    /// Object with the highest cumulative score.
    pub fn select(&self) -> Result<ObjectId> {
        if self.flashes_seen < self.flashes_per_sequence {
            return Err(Error::NotEnoughEvidence {
                seen: self.flashes_seen,
                required: self.flashes_per_sequence,
            });
        }
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate().skip(1) {
            if s > self.scores[best] {
                best = i;
            }
        }
        Ok(best)
    }
}
