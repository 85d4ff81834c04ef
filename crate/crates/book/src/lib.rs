//! Guide chapters compiled as doctests, so the listings stay runnable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scheduling.md")]
pub mod scheduling {}

#[doc = include_str!("../../../book/src/synthetic-eeg.md")]
pub mod synthetic_eeg {}

#[doc = include_str!("../../../book/src/features.md")]
pub mod features {}

#[doc = include_str!("../../../book/src/decoding.md")]
pub mod decoding {}

#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}

#[doc = include_str!("../../../book/src/smart-home.md")]
pub mod smart_home {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
