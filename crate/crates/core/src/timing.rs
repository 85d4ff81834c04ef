use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

/// Presentation and epoching parameters. All times in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    pub sample_rate: f64,
    pub stim_duration: f64,
    pub isi: f64,
    pub epoch_start: f64,
    pub epoch_end: f64,
    pub flashes_per_sequence: usize,
    pub sequences_per_trial: usize,
    pub objects_per_flash: usize,
    pub n_objects: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            sample_rate: 100.0,
            stim_duration: 50.0,
            isi: 135.0,
            epoch_start: -200.0,
            epoch_end: 800.0,
            flashes_per_sequence: 12,
            sequences_per_trial: 10,
            objects_per_flash: 6,
            n_objects: 36,
        }
    }
}

fn is_integral(x: f64) -> bool {
    (x - x.round()).abs() < EPS
}

impl TimingConfig {
    /// Checks every structural invariant, returning the config on success.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTiming(m));
        if !(self.sample_rate > 0.0) {
            return bad(format!("sample_rate must be positive, got {}", self.sample_rate));
        }
        if self.stim_duration < 0.0 || self.isi < 0.0 || self.soa() <= 0.0 {
            return bad("stimulus duration and ISI must be non-negative with positive sum".into());
        }
        if !(self.epoch_start < 0.0 && 0.0 < self.epoch_end) {
            return bad(format!(
                "epoch must straddle the onset, got [{}, {})",
                self.epoch_start, self.epoch_end
            ));
        }
        let span = (self.epoch_end - self.epoch_start) * self.sample_rate / 1000.0;
        let base = -self.epoch_start * self.sample_rate / 1000.0;
        if !is_integral(span) || !is_integral(base) {
            return bad("epoch span and baseline must be whole numbers of samples".into());
        }
        if self.objects_per_flash == 0 || self.objects_per_flash > self.n_objects {
            return bad("objects_per_flash must be in 1..=n_objects".into());
        }
        if self.n_objects > 128 {
            return bad(format!("at most 128 objects supported, got {}", self.n_objects));
        }
        if self.flashes_per_sequence * self.objects_per_flash != 2 * self.n_objects {
            return bad(format!(
                "flashes_per_sequence x objects_per_flash = {} must equal 2 x n_objects = {}",
                self.flashes_per_sequence * self.objects_per_flash,
                2 * self.n_objects
            ));
        }
        if !self.n_objects.is_multiple_of(self.objects_per_flash) {
            return bad("n_objects must be divisible by objects_per_flash".into());
        }
        if self.sequences_per_trial == 0 {
            return bad("sequences_per_trial must be at least 1".into());
        }
        Ok(())
    }

    /// Stimulus onset asynchrony.
    pub fn soa(&self) -> f64 {
        self.stim_duration + self.isi
    }

    pub fn sample_period(&self) -> f64 {
        1000.0 / self.sample_rate
    }

    /// Columns in one epoch.
    pub fn epoch_len(&self) -> usize {
        ((self.epoch_end - self.epoch_start) * self.sample_rate / 1000.0).round() as usize
    }

    /// Pre-stimulus columns, i.e. the column index of time 0.
    pub fn baseline_len(&self) -> usize {
        (-self.epoch_start * self.sample_rate / 1000.0).round() as usize
    }

    pub fn flashes_per_trial(&self) -> usize {
        self.flashes_per_sequence * self.sequences_per_trial
    }

    /// Epoch column for an epoch-relative time; non-aligned times round down.
    pub fn ms_to_sample(&self, t: f64) -> Result<usize> {
        if !(t >= self.epoch_start && t < self.epoch_end) {
            return Err(Error::OutOfRange {
                what: "epoch time (ms)",
                value: t,
                min: self.epoch_start,
                max: self.epoch_end,
            });
        }
        let idx = ((t - self.epoch_start) * self.sample_rate / 1000.0 + EPS).floor() as usize;
        Ok(idx.min(self.epoch_len() - 1))
    }

    /// Epoch-relative time of column `idx`.
    pub fn sample_to_ms(&self, idx: usize) -> f64 {
        self.epoch_start + idx as f64 * self.sample_period()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_is_valid() {
        let cfg = TimingConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.soa(), 185.0);
        assert_eq!(cfg.epoch_len(), 100);
        assert_eq!(cfg.baseline_len(), 20);
        assert_eq!(cfg.flashes_per_trial(), 120);
    }

    #[test]
    fn ms_to_sample_examples() {
        let cfg = TimingConfig::default();
        assert_eq!(cfg.ms_to_sample(-200.0).unwrap(), 0);
        assert_eq!(cfg.ms_to_sample(0.0).unwrap(), 20);
        assert_eq!(cfg.ms_to_sample(600.0).unwrap(), 80);
        assert_eq!(cfg.ms_to_sample(795.0).unwrap(), 99);
        assert_eq!(cfg.ms_to_sample(5.0).unwrap(), 20);
    }

    #[test]
    fn ms_to_sample_rejects_outside_epoch() {
        let cfg = TimingConfig::default();
        assert!(matches!(cfg.ms_to_sample(800.0), Err(Error::OutOfRange { .. })));
        assert!(cfg.ms_to_sample(-200.1).is_err());
        assert!(cfg.ms_to_sample(f64::NAN).is_err());
    }

    #[test]
    fn rejects_inconsistent_flash_counts() {
        let cfg = TimingConfig {
            flashes_per_sequence: 10,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidTiming(_))));
        let cfg = TimingConfig {
            epoch_end: 805.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TimingConfig {
            epoch_start: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn aligned_times_round_trip(k in 0usize..100) {
            let cfg = TimingConfig::default();
            let t = -200.0 + 10.0 * k as f64;
            let idx = cfg.ms_to_sample(t).unwrap();
            prop_assert_eq!(idx, k);
            prop_assert_eq!(cfg.sample_to_ms(idx), t);
        }
    }
}
