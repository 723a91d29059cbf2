use posit_core::{PositBits, PositConfig};

use crate::bitvec::BitVec;
use crate::fields::FpFields;

/// Build the 2n-bit REM: a two-bit regime seed on top ("10" for k >= 0,
/// "01" for k < 0), the es exponent LSBs, then the fraction. Right
/// shifting arithmetically replicates the seed's top bit into a regime
/// run of the right length, the seed's second bit becomes the
/// terminator, and any exponent/fraction bits pushed past the word
/// simply drop: round-to-zero and saturation both fall out of the
/// shift itself.
struct Rem {
    rem: BitVec,
    k: i64,
    sign: u32,
}

fn build_rem(f: &FpFields, config: PositConfig) -> Rem {
    let n = config.n();
    let es = config.es();
    let rs = 1i64 << es;
    let k = f.eff_exp.div_euclid(rs);
    let e = f.eff_exp.rem_euclid(rs) as u64;
    let frac = f.mantissa & ((1u64 << (n - 2)) - 1); // hidden bit off
    let width = 2 * n;
    let seed: u64 = if k >= 0 { 0b10 } else { 0b01 };
    let mut rem = seed << (width - 2);
    // In degenerate formats with es >= n the low exponent/fraction bits
    // fall off the REM; they can never survive into the output there.
    rem |= place(e, width as i64 - 2 - es as i64);
    rem |= place(frac, width as i64 - 2 - es as i64 - (n as i64 - 2));
    Rem {
        rem: BitVec::new(width, rem),
        k,
        sign: f.sign,
    }
}

fn place(value: u64, shift: i64) -> u64 {
    if shift >= 64 {
        0
    } else if shift >= 0 {
        value << shift
    } else if shift > -64 {
        value >> (-shift)
    } else {
        0
    }
}

fn finish(r: &Rem, shifted: BitVec, config: PositConfig) -> PositBits {
    let n = config.n();
    let field = shifted.top(n - 1);
    let bits = if r.sign == 1 {
        field.wrapping_neg() & config.mask()
    } else {
        field
    };
    PositBits::from_bits(bits, config)
}

fn special(f: &FpFields, config: PositConfig) -> Option<PositBits> {
    if f.nar {
        return Some(PositBits::from_bits(config.nar_bits(), config));
    }
    if f.zero {
        return Some(PositBits::from_bits(0, config));
    }
    None
}

fn clamp_shift(s: i64) -> u32 {
    // beyond 2n the shifter output is already saturated
    s.clamp(0, u32::MAX as i64) as u32
}

/// Original encoder: one right shifter whose amount needs the small
/// adder selecting between r and r-1.
pub fn encoder_original(f: &FpFields, config: PositConfig) -> PositBits {
    if let Some(p) = special(f, config) {
        return p;
    }
    let r = build_rem(f, config);
    let amount = if r.k >= 0 { r.k } else { -r.k - 1 }; // adder + mux
    let shifted = r.rem.asr(clamp_shift(amount));
    finish(&r, shifted, config)
}

/// Optimized encoder: always shift by |k|; the negative-regime case is
/// repaired by a fixed left-shift-one stage instead of the adder.
pub fn encoder_optimized(f: &FpFields, config: PositConfig) -> PositBits {
    if let Some(p) = special(f, config) {
        return p;
    }
    let r = build_rem(f, config);
    let shifter = r.rem.asr(clamp_shift(r.k.abs()));
    let shifted = if r.k < 0 { shifter.shl(1) } else { shifter };
    finish(&r, shifted, config)
}
