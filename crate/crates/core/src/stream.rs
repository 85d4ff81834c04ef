use ndarray::Array2;
use std::io::Write;

use crate::montage::Montage;

/// Continuous multichannel recording (channels x samples, µV).
///
/// Column 0 is stream time 0. Trial time 0 (the first flash onset) sits at
/// stream time `lead_in_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub samples: Array2<f64>,
    pub sample_rate: f64,
    pub lead_in_ms: f64,
}

impl Stream {
    pub fn zeros(channels: usize, len: usize, sample_rate: f64, lead_in_ms: f64) -> Self {
        Self {
            samples: Array2::zeros((channels, len)),
            sample_rate,
            lead_in_ms,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn n_channels(&self) -> usize {
        self.samples.nrows()
    }

    /// Length in ms.
    pub fn duration_ms(&self) -> f64 {
        self.n_samples() as f64 * 1000.0 / self.sample_rate
    }

    /// Stream time (ms) of a trial-clock time.
    pub fn stream_time(&self, trial_ms: f64) -> f64 {
        trial_ms + self.lead_in_ms
    }

    /// CSV with a `time_ms` column on the trial clock followed by one column
    /// per channel.
    pub fn write_csv<W: Write>(&self, mut out: W, montage: &Montage) -> std::io::Result<()> {
        write!(out, "time_ms")?;
        for label in montage.labels().take(self.n_channels()) {
            write!(out, ",{label}")?;
        }
        writeln!(out)?;
        let period = 1000.0 / self.sample_rate;
        for (i, col) in self.samples.columns().into_iter().enumerate() {
            write!(out, "{}", i as f64 * period - self.lead_in_ms)?;
            for v in col {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
