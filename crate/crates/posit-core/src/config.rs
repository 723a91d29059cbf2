use crate::real::exp2i;
use crate::PositError;

/// An `(n, es)` posit format and its derived constants.
///
/// `useed = 2^(2^es)`; the largest finite value is `maxpos = useed^(n-2)`
/// and the smallest positive one is `minpos = 1/maxpos`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositConfig {
    n: u32,
    es: u32,
}

impl PositConfig {
    /// Validates and builds a format. `n` must be in 2..=32 and `es`
    /// in 0..=4. The n=2 format is degenerate (representable values are
    /// only 0 and ±1) but accepted so tables for it can be enumerated.
    pub fn new(n: u32, es: u32) -> Result<Self, PositError> {
        if !(2..=32).contains(&n) {
            return Err(PositError::InvalidWidth(n));
        }
        if es > 4 {
            return Err(PositError::InvalidEs(es));
        }
        Ok(PositConfig { n, es })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn es(&self) -> u32 {
        self.es
    }

    /// 2^(2^es), computed in integer arithmetic.
    pub fn useed(&self) -> u64 {
        1u64 << (1u32 << self.es)
    }

    /// log2(useed) = 2^es; the width of one regime step.
    pub fn regime_scale(&self) -> i32 {
        1i32 << self.es
    }

    /// Largest exponent of 2 a finite posit can carry: (n-2) * 2^es.
    pub fn max_exp(&self) -> i32 {
        (self.n as i32 - 2) * self.regime_scale()
    }

    /// useed^(n-2), exact in f64 for all supported formats.
    pub fn maxpos(&self) -> f64 {
        exp2i(self.max_exp())
    }

    /// useed^(2-n) = 1/maxpos.
    pub fn minpos(&self) -> f64 {
        exp2i(-self.max_exp())
    }

    /// The NaR bit pattern 10...0 for this width.
    pub fn nar_bits(&self) -> u64 {
        1u64 << (self.n - 1)
    }

    /// Mask of the n low bits.
    pub fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_i_format() {
        let c = PositConfig::new(5, 1).unwrap();
        assert_eq!(c.useed(), 4);
        assert_eq!(c.maxpos(), 64.0);
        assert_eq!(c.minpos(), 1.0 / 64.0);
    }

    #[test]
    fn derived_constants() {
        let c = PositConfig::new(8, 0).unwrap();
        assert_eq!(c.useed(), 2);
        assert_eq!(c.maxpos(), 64.0); // 2^6
        let c = PositConfig::new(16, 1).unwrap();
        assert_eq!(c.useed(), 4);
        assert_eq!(c.maxpos(), 4f64.powi(14));
        let c = PositConfig::new(32, 4).unwrap();
        assert_eq!(c.useed(), 65536);
        assert_eq!(c.max_exp(), 480);
        assert!(c.maxpos().is_finite());
        assert!(c.minpos() > 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(
            PositConfig::new(1, 0).unwrap_err(),
            PositError::InvalidWidth(1)
        );
        assert_eq!(
            PositConfig::new(33, 1).unwrap_err(),
            PositError::InvalidWidth(33)
        );
        assert_eq!(PositConfig::new(8, 5).unwrap_err(), PositError::InvalidEs(5));
    }

    #[test]
    fn minimal_format_accepted() {
        let c = PositConfig::new(2, 0).unwrap();
        assert_eq!(c.maxpos(), 1.0);
        assert_eq!(c.minpos(), 1.0);
    }
}
