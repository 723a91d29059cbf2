use crate::TensorF;

/// A power-of-two tensor scaling factor, `value = 2^(center + sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactor {
    /// Rounded mean of log2|x| over the nonzero elements.
    pub center: i32,
    pub value: f64,
    /// Set when the tensor had no nonzero element and the center fell
    /// back to 0.
    pub degenerate: bool,
}

impl ScaleFactor {
    pub fn from_center(center: i32, sigma: i32) -> Self {
        ScaleFactor {
            center,
            value: pow2(center + sigma),
            degenerate: false,
        }
    }
}

fn pow2(e: i32) -> f64 {
    // clamp into the finite f64 range; tensors living at 2^±1000 are
    // outside any training regime this supports
    2f64.powi(e.clamp(-1022, 1023))
}

/// Deterministic pairwise summation, left to right at the leaves.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut acc = 0.0;
        for &x in v {
            acc += x;
        }
        acc
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Compute the scaling factor of a tensor:
/// `center = round(mean(log2|x|))` over nonzero elements (ties round
/// half away from zero), `value = 2^(center + sigma)`.
///
/// An all-zero tensor yields the degenerate factor with center 0.
pub fn scale_factor(x: &TensorF, sigma: i32) -> ScaleFactor {
    let logs: Vec<f64> = x
        .data()
        .iter()
        .filter(|v| **v != 0.0 && v.is_finite())
        .map(|v| v.abs().log2())
        .collect();
    if logs.is_empty() {
        return ScaleFactor {
            center: 0,
            value: pow2(sigma),
            degenerate: true,
        };
    }
    let mean = pairwise_sum(&logs) / logs.len() as f64;
    // f64::round is round-half-away-from-zero
    let center = mean.round() as i32;
    ScaleFactor::from_center(center, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(data: &[f64]) -> TensorF {
        TensorF::new(vec![data.len()], data.to_vec()).unwrap()
    }

    #[test]
    fn quarter_pair() {
        let sf = scale_factor(&t(&[0.25, 0.25]), 2);
        assert_eq!(sf.center, -2);
        assert_eq!(sf.value, 1.0);
        assert!(!sf.degenerate);
    }

    #[test]
    fn tie_rounds_away_from_zero() {
        // mean log2 of [1,2,4,8] is 1.5 -> center 2
        let sf = scale_factor(&t(&[1.0, 2.0, 4.0, 8.0]), 2);
        assert_eq!(sf.center, 2);
        assert_eq!(sf.value, 16.0);
        // negative tie: mean log2 of [1/2, 1/4] is -1.5 -> center -2
        let sf = scale_factor(&t(&[0.5, 0.25]), 2);
        assert_eq!(sf.center, -2);
        assert_eq!(sf.value, 1.0);
    }

    #[test]
    fn single_element() {
        let sf = scale_factor(&t(&[8.0]), 2);
        assert_eq!(sf.center, 3);
        assert_eq!(sf.value, 32.0);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let sf = scale_factor(&t(&[0.0, 0.0]), 2);
        assert_eq!(sf.center, 0);
        assert_eq!(sf.value, 4.0);
        assert!(sf.degenerate);
    }

    #[test]
    fn zeros_excluded_from_mean() {
        let with_zeros = scale_factor(&t(&[0.0, 8.0, 0.0]), 2);
        let without = scale_factor(&t(&[8.0]), 2);
        assert_eq!(with_zeros.center, without.center);
    }

    #[test]
    fn sign_ignored() {
        assert_eq!(scale_factor(&t(&[-8.0]), 2).center, 3);
    }
}
