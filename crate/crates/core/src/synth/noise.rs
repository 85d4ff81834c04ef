//! Background EEG stand-in: white plus 1/f ("pink") noise.
//!
//! Pink noise is white noise shaped by a fixed bank of first-order
//! sections (Kellet's refined filter). At 100 Hz the bank is flat in
//! log-log slope (about -1) from roughly 0.02 Hz to the Nyquist band
//! edge. Filter state is drawn from its stationary distribution, so every
//! stream is stationary from the first sample.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

const POLES: [f64; 6] = [0.99886, 0.99332, 0.96900, 0.86650, 0.55000, -0.7616];
const GAINS: [f64; 6] = [
    0.0555179, 0.0750759, 0.1538520, 0.3104856, 0.5329522, -0.0168980,
];
const DIRECT: f64 = 0.5362;
const DELAYED: f64 = 0.115926;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the white component (µV).
    pub white_sigma: f64,
    /// Standard deviation of the pink component (µV).
    pub pink_sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn silent() -> Self {
        Self {
            white_sigma: 0.0,
            pink_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn is_silent(&self) -> bool {
        self.white_sigma == 0.0 && self.pink_sigma == 0.0
    }
}

struct FilterStats {
    /// Output standard deviation for unit-variance input.
    unit_sd: f64,
    /// Cholesky factor of the stationary covariance of (b0..b5, w[n-1]).
    state_chol: DMatrix<f64>,
}

fn filter_stats() -> &'static FilterStats {
    static STATS: OnceLock<FilterStats> = OnceLock::new();
    STATS.get_or_init(|| {
        let n = POLES.len();
        let mut cov = DMatrix::zeros(n + 1, n + 1);
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                let c = GAINS[i] * GAINS[j] / (1.0 - POLES[i] * POLES[j]);
                cov[(i, j)] = c;
                v += c;
            }
            cov[(i, n)] = GAINS[i];
            cov[(n, i)] = GAINS[i];
        }
        cov[(n, n)] = 1.0;
        let h0: f64 = GAINS.iter().sum();
        let h1: f64 = GAINS.iter().zip(POLES).map(|(c, a)| c * a).sum();
        let var = v - h0 * h0 - h1 * h1 + (h0 + DIRECT).powi(2) + (h1 + DELAYED).powi(2);
        let state_chol = cov
            .cholesky()
            .expect("stationary covariance is positive definite")
            .l();
        FilterStats {
            unit_sd: var.sqrt(),
            state_chol,
        }
    })
}

/// Unit-variance pink noise generator.
pub struct PinkNoise {
    state: [f64; 6],
    last_white: f64,
    scale: f64,
}

impl PinkNoise {
    /// Starts from a stationary random state.
    pub fn new<R: Rng>(rng: &mut R) -> Self {
        let stats = filter_stats();
        let z = DVector::from_iterator(7, (0..7).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let x = &stats.state_chol * z;
        let mut state = [0.0; 6];
        state.copy_from_slice(&x.as_slice()[..6]);
        Self {
            state,
            last_white: x[6],
            scale: 1.0 / stats.unit_sd,
        }
    }

    pub fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        let w: f64 = rng.sample(StandardNormal);
        let mut out = DIRECT * w + DELAYED * self.last_white;
        for ((b, a), c) in self.state.iter_mut().zip(POLES).zip(GAINS) {
            *b = a * *b + c * w;
            out += *b;
        }
        self.last_white = w;
        out * self.scale
    }
}

/// Fills `out` with white + pink noise according to `model`.
pub fn fill_noise<R: Rng>(out: &mut [f64], model: &NoiseModel, rng: &mut R) {
    if model.pink_sigma > 0.0 {
        let mut pink = PinkNoise::new(rng);
        for v in out.iter_mut() {
            *v += model.pink_sigma * pink.next(rng);
        }
    }
    if model.white_sigma > 0.0 {
        for v in out.iter_mut() {
            *v += model.white_sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
}
