use posit_core::PositConfig;

/// Floating-point form of a decoded posit: sign, effective exponent
/// `k*2^es + e`, and an (n-1)-bit mantissa with the hidden bit explicit
/// at the top. `zero`/`nar` flag the special patterns; when either is
/// set the numeric fields are zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpFields {
    pub sign: u32,
    pub eff_exp: i64,
    pub mantissa: u64,
    pub zero: bool,
    pub nar: bool,
}

impl FpFields {
    pub fn zero() -> Self {
        FpFields {
            sign: 0,
            eff_exp: 0,
            mantissa: 0,
            zero: true,
            nar: false,
        }
    }

    pub fn nar() -> Self {
        FpFields {
            sign: 0,
            eff_exp: 0,
            mantissa: 0,
            zero: false,
            nar: true,
        }
    }

    /// Mantissa is normalized when the hidden bit occupies the top of
    /// the (n-1)-bit field.
    pub fn is_normalized(&self, config: PositConfig) -> bool {
        self.zero || self.nar || self.mantissa >> (config.n() - 2) == 1
    }

    /// The represented value; exact in f64 for every direct decode.
    pub fn value(&self, config: PositConfig) -> f64 {
        if self.nar {
            return f64::NAN;
        }
        if self.zero {
            return 0.0;
        }
        let frac_scale = 2f64.powi(-(config.n() as i32 - 2));
        let v = self.mantissa as f64 * frac_scale * 2f64.powi(self.eff_exp as i32);
        if self.sign == 1 {
            -v
        } else {
            v
        }
    }
}
