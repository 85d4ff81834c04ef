//! The fixed 32-channel montage.
//!
//! Channels are ordered region by region (frontal, central, parietal,
//! occipital), eight per region. Every matrix in the crate uses this order.

use serde::{Deserialize, Serialize};
use std::fmt;

pub const N_CHANNELS: usize = 32;

/// Scalp region a channel is reported under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Frontal,
    Central,
    Parietal,
    Occipital,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Frontal,
        Region::Central,
        Region::Parietal,
        Region::Occipital,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Frontal => "frontal",
            Region::Central => "central",
            Region::Parietal => "parietal",
            Region::Occipital => "occipital",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// label, region, approximate azimuthal scalp position (x: right, y: anterior)
const LAYOUT: [(&str, Region, f64, f64); N_CHANNELS] = [
    ("Fp1", Region::Frontal, -0.31, 0.95),
    ("Fp2", Region::Frontal, 0.31, 0.95),
    ("F3", Region::Frontal, -0.42, 0.55),
    ("Fz", Region::Frontal, 0.0, 0.50),
    ("F4", Region::Frontal, 0.42, 0.55),
    ("FC1", Region::Frontal, -0.22, 0.25),
    ("FCz", Region::Frontal, 0.0, 0.25),
    ("FC2", Region::Frontal, 0.22, 0.25),
    ("C3", Region::Central, -0.50, 0.0),
    ("C1", Region::Central, -0.25, 0.0),
    ("Cz", Region::Central, 0.0, 0.0),
    ("C2", Region::Central, 0.25, 0.0),
    ("C4", Region::Central, 0.50, 0.0),
    ("CP1", Region::Central, -0.22, -0.25),
    ("CPz", Region::Central, 0.0, -0.25),
    ("CP2", Region::Central, 0.22, -0.25),
    ("FC5", Region::Parietal, -0.65, 0.27),
    ("FC6", Region::Parietal, 0.65, 0.27),
    ("T7", Region::Parietal, -1.0, 0.0),
    ("T8", Region::Parietal, 1.0, 0.0),
    ("CP5", Region::Parietal, -0.65, -0.27),
    ("CP6", Region::Parietal, 0.65, -0.27),
    ("P7", Region::Parietal, -0.81, -0.59),
    ("P8", Region::Parietal, 0.81, -0.59),
    ("P3", Region::Occipital, -0.42, -0.55),
    ("P1", Region::Occipital, -0.20, -0.50),
    ("Pz", Region::Occipital, 0.0, -0.50),
    ("P2", Region::Occipital, 0.20, -0.50),
    ("P4", Region::Occipital, 0.42, -0.55),
    ("O1", Region::Occipital, -0.31, -0.95),
    ("Oz", Region::Occipital, 0.0, -1.0),
    ("O2", Region::Occipital, 0.31, -0.95),
];

/// Channel labels, regions and nominal scalp positions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Montage;

impl Montage {
    pub fn standard() -> Self {
        Montage
    }

    pub fn len(&self) -> usize {
        N_CHANNELS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> impl ExactSizeIterator<Item = &'static str> {
        LAYOUT.iter().map(|c| c.0)
    }

    pub fn label(&self, channel: usize) -> &'static str {
        LAYOUT[channel].0
    }

    pub fn region(&self, channel: usize) -> Region {
        LAYOUT[channel].1
    }

    pub fn position(&self, channel: usize) -> (f64, f64) {
        (LAYOUT[channel].2, LAYOUT[channel].3)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        LAYOUT.iter().position(|c| c.0.eq_ignore_ascii_case(label))
    }

    /// Channel indices belonging to `region`, in montage order.
    pub fn channels_in(&self, region: Region) -> Vec<usize> {
        (0..N_CHANNELS).filter(|&c| LAYOUT[c].1 == region).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    const TABLE_LABELS: &str = "Fp1 Fp2 F3 Fz F4 FC1 FCz FC2 FC5 FC6 T7 T8 C3 C1 Cz C2 C4 \
        CP1 CPz CP2 CP5 CP6 P7 P8 P3 P1 Pz P2 P4 O1 Oz O2";

    #[test]
    fn label_set_matches_tables() {
        let m = Montage::standard();
        let ours: HashSet<_> = m.labels().collect();
        let expected: HashSet<_> = TABLE_LABELS.split_whitespace().collect();
        assert_eq!(ours.len(), 32);
        assert_eq!(ours, expected);
    }

    #[test]
    fn eight_channels_per_region() {
        let m = Montage::standard();
        for r in Region::ALL {
            assert_eq!(m.channels_in(r).len(), 8, "{r}");
        }
        assert_eq!(m.region(m.index_of("FC5").unwrap()), Region::Parietal);
        assert_eq!(m.region(m.index_of("Pz").unwrap()), Region::Occipital);
        assert_eq!(m.region(m.index_of("CPz").unwrap()), Region::Central);
    }

    #[test]
    fn lookup_is_case_insensitive() {
        let m = Montage::standard();
        assert_eq!(m.index_of("fcz"), Some(6));
        assert_eq!(m.index_of("Xx"), None);
    }
}
