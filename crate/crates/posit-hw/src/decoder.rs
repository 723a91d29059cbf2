use posit_core::{PositBits, PositConfig};

use crate::bitvec::{lod, lzd, BitVec};
use crate::fields::FpFields;

/// Shared front end: strip the sign (two's-complementing negatives)
/// and measure the regime run.
struct Front {
    sign: u32,
    field: BitVec, // the n-1 bits below the sign
    run: u32,
    regime_positive: bool,
}

fn front(p: PositBits) -> Result<Front, FpFields> {
    if p.is_zero() {
        return Err(FpFields::zero());
    }
    if p.is_nar() {
        return Err(FpFields::nar());
    }
    let config = p.config();
    let n = config.n();
    let sign = (p.bits() >> (n - 1)) as u32;
    let mag = if sign == 1 {
        p.bits().wrapping_neg() & config.mask()
    } else {
        p.bits()
    };
    let field = BitVec::new(n - 1, mag);
    let regime_positive = field.msb() == 1;
    let run = if regime_positive { lod(field) } else { lzd(field) };
    Ok(Front {
        sign,
        field,
        run,
        regime_positive,
    })
}

/// Package exponent and mantissa out of the regime-stripped field.
/// `shifted` holds [e | frac | 0...] left-aligned; bits truncated by
/// the word boundary read as zeros, which is the round-to-zero
/// convention of the scalar transform.
fn package(f: &Front, shifted: BitVec, config: PositConfig) -> FpFields {
    let n = config.n();
    let es = config.es();
    let w = n - 1;
    let k: i64 = if f.regime_positive {
        f.run as i64 - 1
    } else {
        -(f.run as i64)
    };
    let e = if w >= es {
        shifted.top(es)
    } else {
        shifted.value() << (es - w)
    };
    let frac = shifted.shl(es.min(w)).top(w.min(n - 2));
    // hidden bit on top of the (n-1)-bit mantissa
    let mantissa = (1u64 << (n - 2)) | (frac << (n - 2 - w.min(n - 2)));
    FpFields {
        sign: f.sign,
        eff_exp: k * (1i64 << es) + e as i64,
        mantissa,
        zero: false,
        nar: false,
    }
}

/// Original decoder: one left shifter whose amount `run + 1` comes out
/// of an adder after the LZD/LOD.
pub fn decoder_original(p: PositBits) -> FpFields {
    let f = match front(p) {
        Ok(f) => f,
        Err(special) => return special,
    };
    let shift_amount = f.run + 1; // the adder on the critical path
    let shifted = f.field.shl(shift_amount);
    package(&f, shifted, p.config())
}

/// Optimized decoder: the adder is gone; a duplicated shifter feeds a
/// fixed left-shift-one stage instead.
pub fn decoder_optimized(p: PositBits) -> FpFields {
    let f = match front(p) {
        Ok(f) => f,
        Err(special) => return special,
    };
    let shifter2 = f.field.shl(f.run);
    let shifted = shifter2.shl(1); // "<<1" stage replacing the adder
    package(&f, shifted, p.config())
}
