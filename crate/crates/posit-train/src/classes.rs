use posit_core::PositConfig;
use posit_quant::QuantSpec;

/// Which of the four Fig.-3 tensors a quantization site handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorClass {
    Weight,
    Activation,
    WeightGradient,
    Error,
}

impl TensorClass {
    pub const ALL: [TensorClass; 4] = [
        TensorClass::Weight,
        TensorClass::Activation,
        TensorClass::WeightGradient,
        TensorClass::Error,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            TensorClass::Weight => "weight",
            TensorClass::Activation => "activation",
            TensorClass::WeightGradient => "weight_grad",
            TensorClass::Error => "error",
        }
    }

    fn index(&self) -> usize {
        match self {
            TensorClass::Weight => 0,
            TensorClass::Activation => 1,
            TensorClass::WeightGradient => 2,
            TensorClass::Error => 3,
        }
    }
}

/// Layer family selecting the quantization policy; the precision split
/// in the training configurations distinguishes CONV from BN layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerClass {
    Conv,
    Bn,
    Dense,
    Other,
}

impl LayerClass {
    fn index(&self) -> usize {
        match self {
            LayerClass::Conv => 0,
            LayerClass::Bn => 1,
            LayerClass::Dense => 2,
            LayerClass::Other => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LayerClass::Conv => "conv",
            LayerClass::Bn => "bn",
            LayerClass::Dense => "dense",
            LayerClass::Other => "other",
        }
    }
}

/// The (layer class, tensor class) -> QuantSpec table.
#[derive(Debug, Clone)]
pub struct QuantMap {
    specs: [[QuantSpec; 4]; 4],
}

impl QuantMap {
    /// Everything passthrough: the FP32 baseline.
    pub fn passthrough() -> Self {
        QuantMap {
            specs: [[QuantSpec::passthrough(); 4]; 4],
        }
    }

    pub fn get(&self, layer: LayerClass, tensor: TensorClass) -> &QuantSpec {
        &self.specs[layer.index()][tensor.index()]
    }

    pub fn set(&mut self, layer: LayerClass, tensor: TensorClass, spec: QuantSpec) {
        self.specs[layer.index()][tensor.index()] = spec;
    }

    /// The default n-bit policy: es=1 for weights and activations,
    /// es=2 for weight gradients and errors, scaling on, applied to
    /// every compute layer class.
    pub fn uniform(n: u32) -> Self {
        let fwd = QuantSpec::new(PositConfig::new(n, 1).unwrap(), true);
        let bwd = QuantSpec::new(PositConfig::new(n, 2).unwrap(), true);
        let mut map = QuantMap::passthrough();
        for layer in [LayerClass::Conv, LayerClass::Bn, LayerClass::Dense] {
            map.set(layer, TensorClass::Weight, fwd);
            map.set(layer, TensorClass::Activation, fwd);
            map.set(layer, TensorClass::WeightGradient, bwd);
            map.set(layer, TensorClass::Error, bwd);
        }
        map
    }

    /// The mixed 8/16-bit policy: (8,1)/(8,2) for conv and dense
    /// layers, (16,1)/(16,2) for batch-norm layers.
    pub fn mixed_8_16() -> Self {
        let mut map = QuantMap::uniform(8);
        let bn_fwd = QuantSpec::new(PositConfig::new(16, 1).unwrap(), true);
        let bn_bwd = QuantSpec::new(PositConfig::new(16, 2).unwrap(), true);
        map.set(LayerClass::Bn, TensorClass::Weight, bn_fwd);
        map.set(LayerClass::Bn, TensorClass::Activation, bn_fwd);
        map.set(LayerClass::Bn, TensorClass::WeightGradient, bn_bwd);
        map.set(LayerClass::Bn, TensorClass::Error, bn_bwd);
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_map_follows_es_policy() {
        // es=1 for all weights and activations, es=2 for all gradients
        // and errors
        for map in [QuantMap::uniform(16), QuantMap::uniform(8), QuantMap::mixed_8_16()] {
            for layer in [LayerClass::Conv, LayerClass::Bn, LayerClass::Dense] {
                assert_eq!(map.get(layer, TensorClass::Weight).config.es(), 1);
                assert_eq!(map.get(layer, TensorClass::Activation).config.es(), 1);
                assert_eq!(map.get(layer, TensorClass::WeightGradient).config.es(), 2);
                assert_eq!(map.get(layer, TensorClass::Error).config.es(), 2);
            }
        }
    }

    #[test]
    fn mixed_map_splits_conv_and_bn_widths() {
        let map = QuantMap::mixed_8_16();
        assert_eq!(map.get(LayerClass::Conv, TensorClass::Weight).config.n(), 8);
        assert_eq!(map.get(LayerClass::Dense, TensorClass::Error).config.n(), 8);
        assert_eq!(map.get(LayerClass::Bn, TensorClass::Weight).config.n(), 16);
        assert_eq!(map.get(LayerClass::Bn, TensorClass::Error).config.n(), 16);
    }

    #[test]
    fn other_class_stays_passthrough() {
        let map = QuantMap::uniform(16);
        for tensor in TensorClass::ALL {
            assert!(map.get(LayerClass::Other, tensor).passthrough);
        }
    }
}
