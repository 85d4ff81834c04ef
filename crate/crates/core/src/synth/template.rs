use serde::{Deserialize, Serialize};

use crate::montage::{Montage, N_CHANNELS};
use crate::trial::Condition;

/// The two modelled ERP components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    P300,
    N700,
}

impl Component {
    pub fn as_str(self) -> &'static str {
        match self {
            Component::P300 => "P300",
            Component::N700 => "N700",
        }
    }
}

/// A Gaussian-in-time ERP bump with a fixed scalp topography.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErpTemplate {
    pub component: Component,
    /// Latency of the peak after flash onset (ms).
    pub peak_ms: f64,
    /// Gaussian sigma (ms).
    pub width_ms: f64,
    /// Signed peak amplitude (µV) per condition, indexed by `Condition::index`.
    pub amplitude: [f64; 3],
    /// Per-channel gain in [0, 1], montage order.
    pub topography: Vec<f64>,
}

pub const P300_WIDTH_MS: f64 = 60.0;
pub const N700_WIDTH_MS: f64 = 70.0;

/// Bumps are truncated beyond this many sigmas.
pub(crate) const SUPPORT_SIGMAS: f64 = 6.0;

impl ErpTemplate {
    /// Positive centro-parietal component, identical in every condition.
    pub fn p300(amplitude: f64) -> Self {
        Self {
            component: Component::P300,
            peak_ms: 300.0,
            width_ms: P300_WIDTH_MS,
            amplitude: [amplitude.abs(); 3],
            topography: scalp_topography((0.0, -0.25), 0.5),
        }
    }

    /// Negative fronto-central component with per-condition magnitudes.
    pub fn n700(magnitudes: [f64; 3]) -> Self {
        Self {
            component: Component::N700,
            peak_ms: 700.0,
            width_ms: N700_WIDTH_MS,
            amplitude: magnitudes.map(|m| -m.abs()),
            topography: scalp_topography((0.0, 0.3), 0.45),
        }
    }

    pub fn amplitude_for(&self, condition: Condition) -> f64 {
        self.amplitude[condition.index()]
    }

    /// Unit-height time course at `dt` ms after onset.
    pub fn shape(&self, dt: f64) -> f64 {
        let z = (dt - self.peak_ms) / self.width_ms;
        if z.abs() > SUPPORT_SIGMAS {
            0.0
        } else {
            (-0.5 * z * z).exp()
        }
    }

    /// Index of the channel with the largest gain.
    pub fn peak_channel(&self) -> usize {
        self.topography
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &g)| if g > best.1 { (i, g) } else { best })
            .0
    }

    pub fn zeroed(mut self) -> Self {
        self.amplitude = [0.0; 3];
        self
    }
}

/// Isotropic Gaussian falloff from `center` over nominal scalp positions.
pub fn scalp_topography(center: (f64, f64), spread: f64) -> Vec<f64> {
    let m = Montage::standard();
    (0..N_CHANNELS)
        .map(|c| {
            let (x, y) = m.position(c);
            let d2 = (x - center.0).powi(2) + (y - center.1).powi(2);
            (-d2 / (2.0 * spread * spread)).exp()
        })
        .collect()
}
