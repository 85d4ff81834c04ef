use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::Component;
use crate::timing::TimingConfig;
use crate::trial::Epoch;

/// Post-stimulus span (ms, inclusive) over which a component is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentWindow {
    pub component: Component,
    pub start_ms: f64,
    pub end_ms: f64,
}

impl ComponentWindow {
    pub const P300: ComponentWindow = ComponentWindow {
        component: Component::P300,
        start_ms: 200.0,
        end_ms: 400.0,
    };
    pub const N700: ComponentWindow = ComponentWindow {
        component: Component::N700,
        start_ms: 600.0,
        end_ms: 800.0,
    };

    pub fn for_component(c: Component) -> Self {
        match c {
            Component::P300 => Self::P300,
            Component::N700 => Self::N700,
        }
    }

    /// Epoch columns covered by the window, clipped to the epoch.
    ///
    /// At the default timing P300 maps to 21 columns (200..=400 ms) and N700
    /// to 20 (600..=790 ms), since the half-open epoch has no 800 ms sample.
    pub fn columns(&self, cfg: &TimingConfig) -> Result<std::ops::Range<usize>> {
        let first = cfg.ms_to_sample(self.start_ms)?;
        let last_ms = self.end_ms.min(cfg.epoch_end - cfg.sample_period());
        let last = cfg.ms_to_sample(last_ms)?;
        Ok(first..last + 1)
    }
}

/// Euclidean distance between target and non-target mean waveforms.
pub fn component_l2(target_mean: &[f64], nontarget_mean: &[f64]) -> Result<f64> {
    if target_mean.len() != nontarget_mean.len() {
        return Err(Error::DimensionMismatch {
            expected: target_mean.len(),
            actual: nontarget_mean.len(),
        });
    }
    Ok(target_mean
        .iter()
        .zip(nontarget_mean)
        .map(|(t, nt)| (t - nt) * (t - nt))
        .sum::<f64>()
        .sqrt())
}

/// Pointwise mean over `epochs` of one channel inside `window`.
pub fn window_mean_series<'a, I>(
    epochs: I,
    channel: usize,
    window: &ComponentWindow,
    cfg: &TimingConfig,
) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a Epoch>,
{
    let cols = window.columns(cfg)?;
    let mut acc = vec![0.0; cols.len()];
    let mut n = 0usize;
    for e in epochs {
        for (a, j) in acc.iter_mut().zip(cols.clone()) {
            *a += e.samples[[channel, j]];
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("epoch set"));
    }
    Ok(acc.into_iter().map(|a| a / n as f64).collect())
}

/// Running target / non-target sums of baseline-corrected epochs.
///
/// Gives the same means as [`window_mean_series`] without keeping epochs.
#[derive(Debug, Clone)]
pub struct ErpAverager {
    sums: [Array2<f64>; 2],
    counts: [usize; 2],
}

impl ErpAverager {
    pub fn new(channels: usize, epoch_len: usize) -> Self {
        Self {
            sums: [Array2::zeros((channels, epoch_len)), Array2::zeros((channels, epoch_len))],
            counts: [0, 0],
        }
    }

    pub fn add(&mut self, epoch: &Epoch) {
        let k = if epoch.meta.is_target { 0 } else { 1 };
        self.sums[k] += &epoch.samples;
        self.counts[k] += 1;
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.counts[0], self.counts[1])
    }

    /// Mean epoch of one class (`true` for targets).
    pub fn mean(&self, target: bool) -> Result<Array2<f64>> {
        let k = if target { 0 } else { 1 };
        if self.counts[k] == 0 {
            return Err(Error::Empty("epoch set"));
        }
        Ok(&self.sums[k] / self.counts[k] as f64)
    }

    /// L2 distance between class means of `channel` within `window`.
    pub fn component_l2(&self, channel: usize, window: &ComponentWindow, cfg: &TimingConfig) -> Result<f64> {
        let cols = window.columns(cfg)?;
        let t = self.mean(true)?;
        let nt = self.mean(false)?;
        let tv: Vec<f64> = cols.clone().map(|j| t[[channel, j]]).collect();
        let ntv: Vec<f64> = cols.map(|j| nt[[channel, j]]).collect();
        component_l2(&tv, &ntv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montage::N_CHANNELS;
    use crate::seed::rng_from;
    use crate::trial::{Condition, EpochMeta};
    use rand::Rng;

    fn epoch(samples: Array2<f64>, is_target: bool) -> Epoch {
        Epoch {
            samples,
            meta: EpochMeta {
                trial_id: 0,
                condition: Condition::ErpOnly,
                sequence_index: 0,
                flash_index: 0,
                onset_ms: 0.0,
                object_flags: vec![],
                is_target,
            },
        }
    }

    fn random(seed: u64, is_target: bool) -> Epoch {
        let mut rng = rng_from(seed);
        epoch(Array2::from_shape_fn((N_CHANNELS, 100), |_| rng.random_range(-10.0..10.0)), is_target)
    }

    #[test]
    fn window_columns() {
        let cfg = TimingConfig::default();
        assert_eq!(ComponentWindow::P300.columns(&cfg).unwrap(), 40..61);
        assert_eq!(ComponentWindow::N700.columns(&cfg).unwrap(), 80..100);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(component_l2(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(component_l2(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert!(matches!(component_l2(&[1.0], &[]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn series_of_one_epoch_is_itself() {
        let cfg = TimingConfig::default();
        let e = random(1, true);
        let s = window_mean_series([&e], 4, &ComponentWindow::P300, &cfg).unwrap();
        assert_eq!(s.len(), 21);
        for (k, v) in s.iter().enumerate() {
            assert_eq!(*v, e.samples[[4, 40 + k]]);
        }
    }

    #[test]
    fn opposite_epochs_cancel() {
        let cfg = TimingConfig::default();
        let e = random(2, true);
        let neg = epoch(-&e.samples, true);
        let s = window_mean_series([&e, &neg], 0, &ComponentWindow::N700, &cfg).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn empty_set_is_an_error() {
        let cfg = TimingConfig::default();
        let none: Vec<Epoch> = vec![];
        assert!(matches!(
            window_mean_series(&none, 0, &ComponentWindow::P300, &cfg),
            Err(Error::Empty(_))
        ));
        assert!(ErpAverager::new(32, 100).mean(true).is_err());
    }

    #[test]
    fn averager_matches_explicit_series() {
        let cfg = TimingConfig::default();
        let epochs: Vec<Epoch> = (0..40).map(|i| random(10 + i, i % 5 == 0)).collect();
        let mut avg = ErpAverager::new(N_CHANNELS, 100);
        epochs.iter().for_each(|e| avg.add(e));
        assert_eq!(avg.counts(), (8, 32));
        for w in [ComponentWindow::P300, ComponentWindow::N700] {
            for c in [0, 7, 31] {
                let t = window_mean_series(epochs.iter().filter(|e| e.meta.is_target), c, &w, &cfg).unwrap();
                let nt = window_mean_series(epochs.iter().filter(|e| !e.meta.is_target), c, &w, &cfg).unwrap();
                let direct = component_l2(&t, &nt).unwrap();
                assert!((avg.component_l2(c, &w, &cfg).unwrap() - direct).abs() < 1e-10);
            }
        }
    }
}
