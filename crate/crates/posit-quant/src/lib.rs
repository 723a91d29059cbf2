//! Tensor-level posit quantization.
//!
//! Converting a whole tensor means picking the power-of-two scaling
//! factor `S_f = 2^(center + sigma)` from the tensor's log2-domain
//! center, shifting the data by it, quantizing each element, and
//! shifting back: `px = P(x / S_f) * S_f`. The shift moves the bulk of
//! the distribution into the posit region around 1 where the fraction
//! field is widest.

mod histogram;
mod scale;
mod tensor;

pub use histogram::{log2_histogram, write_histogram_csv, Histogram};
pub use scale::{scale_factor, ScaleFactor};
pub use tensor::TensorF;

use posit_core::{quantize_real, PositConfig};

/// Per-tensor-class quantization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantSpec {
    pub config: PositConfig,
    pub scaling_enabled: bool,
    /// Shift added to the distribution center, nudging values toward
    /// magnitudes below 1 where large values keep more fraction bits.
    pub sigma: i32,
    /// When set the spec is the identity; used for warm-up and FP32
    /// baselines.
    pub passthrough: bool,
}

impl QuantSpec {
    pub fn new(config: PositConfig, scaling_enabled: bool) -> Self {
        QuantSpec {
            config,
            scaling_enabled,
            sigma: 2,
            passthrough: false,
        }
    }

    pub fn passthrough() -> Self {
        QuantSpec {
            // format is irrelevant for the identity
            config: PositConfig::new(16, 1).unwrap(),
            scaling_enabled: false,
            sigma: 2,
            passthrough: true,
        }
    }

    pub fn with_sigma(mut self, sigma: i32) -> Self {
        self.sigma = sigma;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantError {
    #[error("tensor data length {data} does not match dims product {expected}")]
    DimMismatch { data: usize, expected: usize },
    #[error("scale factor must be supplied iff spec.scaling_enabled (enabled={enabled})")]
    ScaleFactorMismatch { enabled: bool },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
}

/// Quantize every element of a tensor.
///
/// With scaling enabled, applies `px = P(x / S_f) * S_f` using the
/// supplied factor; with scaling disabled applies `P` directly; with
/// passthrough returns the input unchanged. Non-finite elements
/// propagate as NaN (NaR).
pub fn quantize_tensor(
    x: &TensorF,
    spec: &QuantSpec,
    sf: Option<&ScaleFactor>,
) -> Result<TensorF, QuantError> {
    if spec.passthrough {
        return Ok(x.clone());
    }
    if sf.is_some() != spec.scaling_enabled {
        return Err(QuantError::ScaleFactorMismatch {
            enabled: spec.scaling_enabled,
        });
    }
    let scale = match sf {
        Some(s) => {
            if s.value <= 0.0 || s.value.is_nan() {
                return Err(QuantError::NonPositiveScale(s.value));
            }
            s.value
        }
        None => 1.0,
    };
    let data = x
        .data()
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                f64::NAN
            } else {
                // scale is a power of two: both the division and the
                // multiplication are exact
                quantize_real(v / scale, spec.config).unwrap() * scale
            }
        })
        .collect();
    Ok(TensorF::from_parts(x.dims().to_vec(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, es: u32) -> PositConfig {
        PositConfig::new(n, es).unwrap()
    }

    fn t(data: &[f64]) -> TensorF {
        TensorF::new(vec![data.len()], data.to_vec()).unwrap()
    }

    #[test]
    fn identity_at_matching_scale() {
        let spec = QuantSpec::new(cfg(5, 1), true);
        let sf = ScaleFactor::from_center(4, 2); // 64
        assert_eq!(sf.value, 64.0);
        let out = quantize_tensor(&t(&[64.0]), &spec, Some(&sf)).unwrap();
        assert_eq!(out.data(), &[64.0]);
    }

    #[test]
    fn unscaled_matches_scalar_quantize() {
        let spec = QuantSpec::new(cfg(5, 1), false);
        let out = quantize_tensor(&t(&[0.4, 0.01]), &spec, None).unwrap();
        assert_eq!(out.data(), &[0.375, 0.0]);
    }

    #[test]
    fn passthrough_is_identity() {
        let spec = QuantSpec::passthrough();
        let input = t(&[0.4, 0.01, -3.33]);
        let out = quantize_tensor(&input, &spec, None).unwrap();
        assert_eq!(out.data(), input.data());
    }

    #[test]
    fn scale_factor_presence_is_enforced() {
        let spec = QuantSpec::new(cfg(8, 1), true);
        assert!(matches!(
            quantize_tensor(&t(&[1.0]), &spec, None),
            Err(QuantError::ScaleFactorMismatch { enabled: true })
        ));
        let spec = QuantSpec::new(cfg(8, 1), false);
        let sf = ScaleFactor::from_center(0, 2);
        assert!(matches!(
            quantize_tensor(&t(&[1.0]), &spec, Some(&sf)),
            Err(QuantError::ScaleFactorMismatch { enabled: false })
        ));
    }

    #[test]
    fn nar_propagates() {
        let spec = QuantSpec::new(cfg(8, 1), false);
        let out = quantize_tensor(&t(&[f64::NAN, 1.0]), &spec, None).unwrap();
        assert!(out.data()[0].is_nan());
        assert_eq!(out.data()[1], 1.0);
    }
}
