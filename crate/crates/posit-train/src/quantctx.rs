use posit_quant::{quantize_tensor, scale_factor, ScaleFactor, TensorF};

use crate::classes::{LayerClass, QuantMap, TensorClass};

/// Per-layer scale factors refreshed at epoch boundaries; weight and
/// activation factors come from calibration, gradient/error factors
/// are computed per batch from the tensor at hand.
#[derive(Debug, Clone, Default)]
pub struct LayerScales {
    pub weight: Option<ScaleFactor>,
    pub activation: Option<ScaleFactor>,
}

/// Everything a quantization site needs: the policy table, whether
/// quantization is active yet (false during warm-up), and the
/// calibrated per-layer factors.
pub struct QuantCtx<'a> {
    pub map: &'a QuantMap,
    pub active: bool,
    pub scales: &'a [LayerScales],
}

impl<'a> QuantCtx<'a> {
    /// A context in which every site is the identity.
    pub fn passthrough(map: &'a QuantMap, scales: &'a [LayerScales]) -> Self {
        QuantCtx {
            map,
            active: false,
            scales,
        }
    }

    /// Quantize one tensor at the site (layer_idx, layer class, tensor
    /// class). During warm-up this is the identity.
    pub fn apply(
        &self,
        t: &TensorF,
        layer_idx: usize,
        layer: LayerClass,
        tensor: TensorClass,
    ) -> TensorF {
        if !self.active {
            return t.clone();
        }
        let spec = self.map.get(layer, tensor);
        if spec.passthrough {
            return t.clone();
        }
        if !spec.scaling_enabled {
            return quantize_tensor(t, spec, None).expect("unscaled quantization cannot fail");
        }
        let sf = match tensor {
            TensorClass::Weight => self.scales[layer_idx]
                .weight
                .expect("weight scale factor missing; calibration must precede quantization"),
            TensorClass::Activation => self.scales[layer_idx]
                .activation
                .expect("activation scale factor missing; calibration must precede quantization"),
            // gradients and errors do not exist at calibration time;
            // their factor comes from the tensor being quantized
            TensorClass::WeightGradient | TensorClass::Error => scale_factor(t, spec.sigma),
        };
        quantize_tensor(t, spec, Some(&sf)).expect("scaled quantization cannot fail")
    }
}
