use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use posit_core::PositConfig;
use posit_quant::QuantSpec;

use crate::classes::{LayerClass, QuantMap, TensorClass};
use crate::TrainError;

/// One topology entry. Channel/feature counts on the input side are
/// inferred from the running shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        #[serde(default)]
        pad: usize,
    },
    Batchnorm,
    Relu,
    Flatten,
    Dense {
        out_features: usize,
    },
}

/// Learning-rate schedule: `initial`, divided by `1/factor` at each
/// listed epoch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LrSchedule {
    pub initial: f64,
    #[serde(default)]
    pub decay_epochs: Vec<u32>,
    #[serde(default = "default_decay_factor")]
    pub factor: f64,
}

fn default_decay_factor() -> f64 {
    0.1
}

impl LrSchedule {
    pub fn at(&self, epoch: u32) -> f64 {
        let decays = self.decay_epochs.iter().filter(|&&e| epoch >= e).count();
        self.initial * self.factor.powi(decays as i32)
    }
}

/// One (n, es) policy entry in the plan. Omitted entries mean
/// passthrough; `scaling` defaults to on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecEntry {
    pub n: u32,
    pub es: u32,
    #[serde(default = "default_true")]
    pub scaling: bool,
    #[serde(default)]
    pub passthrough: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ClassQuant {
    pub weight: Option<SpecEntry>,
    pub activation: Option<SpecEntry>,
    pub weight_grad: Option<SpecEntry>,
    pub error: Option<SpecEntry>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QuantPlan {
    #[serde(default)]
    pub conv: ClassQuant,
    #[serde(default)]
    pub bn: ClassQuant,
    #[serde(default)]
    pub dense: ClassQuant,
    #[serde(default)]
    pub other: ClassQuant,
}

/// Everything a training run needs, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainPlan {
    /// Input shape as [channels, height, width].
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
    pub dataset_dir: PathBuf,
    /// Standardize each channel to zero mean / unit variance after the
    /// 1/255 normalization.
    #[serde(default)]
    pub standardize: bool,
    pub total_epochs: u32,
    pub warmup_epochs: u32,
    pub batch_size: usize,
    pub lr: LrSchedule,
    pub momentum: f64,
    #[serde(default = "default_sigma")]
    pub sigma: i32,
    pub rng_seed: u64,
    /// Keep a wide master copy of the weights (ablation toggle); the
    /// default trains on quantized storage.
    #[serde(default)]
    pub master_weights: bool,
    #[serde(default)]
    pub quant: QuantPlan,
}

fn default_sigma() -> i32 {
    2
}

impl TrainPlan {
    pub fn from_json(text: &str) -> Result<TrainPlan, TrainError> {
        let plan: TrainPlan =
            serde_json::from_str(text).map_err(|e| TrainError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<TrainPlan, TrainError> {
        let text = std::fs::read_to_string(path).map_err(|e| TrainError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.warmup_epochs > self.total_epochs {
            return Err(TrainError::Plan(format!(
                "warmup_epochs {} exceeds total_epochs {}",
                self.warmup_epochs, self.total_epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Plan("batch_size must be positive".into()));
        }
        if self.layers.is_empty() {
            return Err(TrainError::Plan("topology has no layers".into()));
        }
        if self.sigma < 0 {
            return Err(TrainError::Plan("sigma must be nonnegative".into()));
        }
        self.quant_map()?;
        Ok(())
    }

    /// Materialize the quantization policy table.
    pub fn quant_map(&self) -> Result<QuantMap, TrainError> {
        let mut map = QuantMap::passthrough();
        let classes = [
            (LayerClass::Conv, &self.quant.conv),
            (LayerClass::Bn, &self.quant.bn),
            (LayerClass::Dense, &self.quant.dense),
            (LayerClass::Other, &self.quant.other),
        ];
        for (layer, entries) in classes {
            let sites = [
                (TensorClass::Weight, &entries.weight),
                (TensorClass::Activation, &entries.activation),
                (TensorClass::WeightGradient, &entries.weight_grad),
                (TensorClass::Error, &entries.error),
            ];
            for (tensor, entry) in sites {
                if let Some(e) = entry {
                    let config = PositConfig::new(e.n, e.es)
                        .map_err(|err| TrainError::Plan(err.to_string()))?;
                    let mut spec = QuantSpec::new(config, e.scaling).with_sigma(self.sigma);
                    spec.passthrough = e.passthrough;
                    map.set(layer, tensor, spec);
                }
            }
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_plan(extra: &str) -> String {
        format!(
            r#"{{
              "input": [1, 8, 8],
              "layers": [
                {{"type": "conv", "out_channels": 2, "kernel": 3, "stride": 2, "pad": 1}},
                {{"type": "relu"}},
                {{"type": "flatten"}},
                {{"type": "dense", "out_features": 3}}
              ],
              "dataset_dir": "data",
              "total_epochs": 2,
              "warmup_epochs": 1,
              "batch_size": 4,
              "lr": {{"initial": 0.1, "decay_epochs": [1]}},
              "momentum": 0.9,
              "rng_seed": 7{extra}
            }}"#
        )
    }

    #[test]
    fn parses_minimal_plan() {
        let plan = TrainPlan::from_json(&minimal_plan("")).unwrap();
        assert_eq!(plan.sigma, 2);
        assert!(!plan.master_weights);
        assert_eq!(plan.lr.at(0), 0.1);
        assert!((plan.lr.at(1) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn quant_entries_materialize() {
        let extra = r#",
          "quant": {"conv": {"weight": {"n": 8, "es": 1}, "error": {"n": 8, "es": 2, "scaling": false}}}"#;
        let plan = TrainPlan::from_json(&minimal_plan(extra)).unwrap();
        let map = plan.quant_map().unwrap();
        let w = map.get(LayerClass::Conv, TensorClass::Weight);
        assert_eq!((w.config.n(), w.config.es()), (8, 1));
        assert!(w.scaling_enabled && !w.passthrough);
        let e = map.get(LayerClass::Conv, TensorClass::Error);
        assert!(!e.scaling_enabled);
        assert!(map.get(LayerClass::Conv, TensorClass::Activation).passthrough);
        assert!(map.get(LayerClass::Bn, TensorClass::Weight).passthrough);
    }

    #[test]
    fn warmup_cannot_exceed_total() {
        let bad = minimal_plan("").replace("\"warmup_epochs\": 1", "\"warmup_epochs\": 3");
        assert!(matches!(TrainPlan::from_json(&bad), Err(TrainError::Plan(_))));
    }
}
