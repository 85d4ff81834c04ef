//! Epoching and the 320-dimensional spatio-temporal feature vector.
//!
//! Features are the means of each channel over ten contiguous post-stimulus
//! windows (8 samples / 80 ms each at the default timing), ordered
//! channel-major: channel 0 windows 0..9, channel 1 windows 0..9, ...

use ndarray::{s, Array2};
use std::io::Write;

use crate::error::{Error, Result};
use crate::paradigm::StimulusTimeline;
use crate::stream::Stream;
use crate::timing::TimingConfig;
use crate::trial::{Condition, Epoch, EpochMeta, ObjectId};

/// Post-stimulus windows per channel.
pub const N_WINDOWS: usize = 10;

/// Window-mean features of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub meta: EpochMeta,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Feature (channel, window).
    pub fn get(&self, channel: usize, window: usize) -> f64 {
        self.values[channel * N_WINDOWS + window]
    }
}

/// Samples per feature window.
pub fn window_len(cfg: &TimingConfig) -> Result<usize> {
    let post = cfg.epoch_len() - cfg.baseline_len();
    if !post.is_multiple_of(N_WINDOWS) || post == 0 {
        return Err(Error::InvalidTiming(format!(
            "{post} post-stimulus samples do not split into {N_WINDOWS} windows"
        )));
    }
    Ok(post / N_WINDOWS)
}

/// Cuts `[onset + epoch_start, onset + epoch_end)` out of `stream`.
///
/// `onset_ms` is on the stream clock. Non-aligned onsets round down to the
/// preceding sample.
pub fn cut_epoch(stream: &Stream, onset_ms: f64, meta: EpochMeta, cfg: &TimingConfig) -> Result<Epoch> {
    let len = cfg.epoch_len();
    let start_ms = onset_ms + cfg.epoch_start;
    let max_start = stream.n_samples() as f64 - len as f64;
    let start = (start_ms * cfg.sample_rate / 1000.0 + 1e-9).floor();
    if start_ms < 0.0 || start > max_start {
        return Err(Error::OutOfRange {
            what: "epoch onset (ms)",
            value: onset_ms,
            min: -cfg.epoch_start,
            max: (max_start + 1.0) * cfg.sample_period() - cfg.epoch_start,
        });
    }
    let start = start as usize;
    Ok(Epoch {
        samples: stream.samples.slice(s![.., start..start + len]).to_owned(),
        meta,
    })
}

/// Subtracts each channel's pre-stimulus mean from the whole channel.
pub fn baseline_correct(epoch: &Epoch, cfg: &TimingConfig) -> Epoch {
    let mut out = epoch.clone();
    baseline_correct_in_place(&mut out, cfg);
    out
}

pub fn baseline_correct_in_place(epoch: &mut Epoch, cfg: &TimingConfig) {
    let base = cfg.baseline_len();
    if base == 0 {
        return;
    }
    for mut row in epoch.samples.rows_mut() {
        let row = row.as_slice_mut().expect("standard layout");
        let mean = row[..base].iter().sum::<f64>() / base as f64;
        row.iter_mut().for_each(|v| *v -= mean);
    }
}

/// Window means of a baseline-corrected epoch.
pub fn extract_features(epoch: &Epoch, cfg: &TimingConfig) -> Result<FeatureVector> {
    let width = window_len(cfg)?;
    let base = cfg.baseline_len();
    let mut values = Vec::with_capacity(epoch.samples.nrows() * N_WINDOWS);
    for row in epoch.samples.rows() {
        let post = &row.to_slice().expect("standard layout")[base..];
        for win in post.chunks_exact(width).take(N_WINDOWS) {
            values.push(win.iter().sum::<f64>() / width as f64);
        }
    }
    Ok(FeatureVector {
        values,
        meta: epoch.meta.clone(),
    })
}

/// Raw epochs for every flash of a trial, labelled against `true_target`.
pub fn trial_epochs(
    stream: &Stream,
    timeline: &StimulusTimeline,
    trial_id: u64,
    condition: Condition,
    true_target: ObjectId,
    cfg: &TimingConfig,
) -> Result<Vec<Epoch>> {
    timeline
        .events
        .iter()
        .map(|ev| {
            let onset = stream.stream_time(ev.onset_ms);
            let meta = EpochMeta {
                trial_id,
                condition,
                sequence_index: ev.sequence_index,
                flash_index: ev.flash_index % cfg.flashes_per_sequence,
                onset_ms: onset,
                object_flags: ev.group.clone(),
                is_target: ev.group.contains(&true_target),
            };
            cut_epoch(stream, onset, meta, cfg)
        })
        .collect()
}

/// Baseline-corrects and featurizes a batch of raw epochs.
pub fn featurize(epochs: &[Epoch], cfg: &TimingConfig) -> Result<Vec<FeatureVector>> {
    epochs
        .iter()
        .map(|e| extract_features(&baseline_correct(e, cfg), cfg))
        .collect()
}

/// Stacks feature vectors into an (epochs x features) matrix.
pub fn feature_matrix(features: &[&FeatureVector]) -> Array2<f64> {
    let d = features.first().map_or(0, |f| f.len());
    let mut m = Array2::zeros((features.len(), d));
    for (mut row, f) in m.rows_mut().into_iter().zip(features) {
        row.assign(&ndarray::ArrayView1::from(&f.values[..]));
    }
    m
}

/// CSV: `trial_id,sequence,flash,is_target,f0..f{d-1}` with a header row.
pub fn write_features_csv<W: Write>(mut out: W, features: &[FeatureVector]) -> std::io::Result<()> {
    let d = features.first().map_or(0, |f| f.len());
    write!(out, "trial_id,sequence,flash,is_target")?;
    for i in 0..d {
        write!(out, ",f{i}")?;
    }
    writeln!(out)?;
    for f in features {
        let m = &f.meta;
        write!(
            out,
            "{},{},{},{}",
            m.trial_id, m.sequence_index, m.flash_index, m.is_target as u8
        )?;
        for v in &f.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
