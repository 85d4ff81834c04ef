//! Target/non-target discrimination and target selection.

mod evidence;
mod rlda;

pub use evidence::ScoreBoard;
pub use rlda::{ledoit_wolf_lambda, train, RldaModel};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montage::Montage;
use crate::pipeline::{feature_matrix, window_len, FeatureVector, N_WINDOWS};
use crate::timing::TimingConfig;
use crate::trial::ObjectId;

/// Splits labelled features into (target, non-target) matrices.
pub fn split_by_label(features: &[FeatureVector]) -> (Array2<f64>, Array2<f64>) {
    let (t, nt): (Vec<&FeatureVector>, Vec<&FeatureVector>) =
        features.iter().partition(|f| f.meta.is_target);
    (feature_matrix(&t), feature_matrix(&nt))
}

/// Trains on labelled feature vectors.
pub fn train_on(features: &[FeatureVector], lambda: Option<f64>) -> Result<RldaModel> {
    let (t, nt) = split_by_label(features);
    train(&t, &nt, lambda)
}

/// Decision after each completed sequence of a trial's flashes, in order.
///
/// `features` must be the trial's epochs in presentation order.
pub fn selections_by_sequence(
    model: &RldaModel,
    features: &[FeatureVector],
    cfg: &TimingConfig,
) -> Result<Vec<ObjectId>> {
    let mut board = ScoreBoard::new(cfg.n_objects, cfg.flashes_per_sequence);
    let mut out = Vec::with_capacity(features.len() / cfg.flashes_per_sequence);
    for f in features {
        board.accumulate(model.score(&f.values)?, &f.meta.object_flags)?;
        if board.flashes_seen.is_multiple_of(cfg.flashes_per_sequence) {
            out.push(board.select()?);
        }
    }
    Ok(out)
}

/// Placement of the feature windows, recorded alongside a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start_ms: f64,
    pub window_ms: f64,
    pub count: usize,
}

impl WindowSpec {
    pub fn from_timing(cfg: &TimingConfig) -> Result<Self> {
        Ok(Self {
            start_ms: 0.0,
            window_ms: window_len(cfg)? as f64 * cfg.sample_period(),
            count: N_WINDOWS,
        })
    }
}

/// On-disk JSON form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub lambda: f64,
    pub nu: f64,
    pub bias: f64,
    pub weights: Vec<f64>,
    pub channel_order: Vec<String>,
    pub window_spec: WindowSpec,
}

impl ModelDocument {
    pub fn new(model: &RldaModel, cfg: &TimingConfig) -> Result<Self> {
        Ok(Self {
            lambda: model.lambda,
            nu: model.nu,
            bias: model.bias,
            weights: model.weights.clone(),
            channel_order: Montage::standard().labels().map(String::from).collect(),
            window_spec: WindowSpec::from_timing(cfg)?,
        })
    }

    /// Rebuilds a scoring model. Class means are not stored and come back empty.
    pub fn into_model(self, cfg: &TimingConfig) -> Result<RldaModel> {
        let montage = Montage::standard();
        let labels_match = self.channel_order.len() == montage.len()
            && self.channel_order.iter().zip(montage.labels()).all(|(a, b)| a == b);
        if !labels_match {
            return Err(Error::InvalidConfig(vec![
                "model channel_order does not match the standard montage".into(),
            ]));
        }
        if self.window_spec != WindowSpec::from_timing(cfg)? {
            return Err(Error::InvalidConfig(vec![
                "model window_spec does not match the timing config".into(),
            ]));
        }
        let expected = montage.len() * self.window_spec.count;
        if self.weights.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.weights.len(),
            });
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidShrinkage(self.lambda));
        }
        Ok(RldaModel {
            weights: self.weights,
            bias: self.bias,
            lambda: self.lambda,
            nu: self.nu,
            class_means: [Vec::new(), Vec::new()],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(d: usize) -> RldaModel {
        RldaModel {
            weights: (0..d).map(|i| i as f64 * 0.01).collect(),
            bias: -0.25,
            lambda: 0.4,
            nu: 3.0,
            class_means: [vec![0.0; d], vec![0.0; d]],
        }
    }

    #[test]
    fn document_round_trip() {
        let cfg = TimingConfig::default();
        let m = model(320);
        let doc = ModelDocument::new(&m, &cfg).unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["lambda", "nu", "bias", "weights", "channel_order", "window_spec"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["window_spec"]["window_ms"], 80.0);
        let back: ModelDocument = serde_json::from_str(&json).unwrap();
        let m2 = back.into_model(&cfg).unwrap();
        assert_eq!(m2.weights, m.weights);
        assert_eq!(m2.bias, m.bias);
    }

    #[test]
    fn document_rejects_wrong_shape() {
        let cfg = TimingConfig::default();
        let mut doc = ModelDocument::new(&model(320), &cfg).unwrap();
        doc.weights.pop();
        assert!(doc.clone().into_model(&cfg).is_err());
        let mut doc2 = ModelDocument::new(&model(320), &cfg).unwrap();
        doc2.channel_order.swap(0, 1);
        assert!(doc2.into_model(&cfg).is_err());
    }
}
