/// A fixed-width wire bundle. Shifts are logical (or arithmetic where
/// named so) within the width; shift amounts at or beyond the width
/// saturate the way a real barrel shifter chain does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitVec {
    width: u32,
    bits: u64,
}

impl BitVec {
    pub fn new(width: u32, bits: u64) -> Self {
        assert!((1..=64).contains(&width), "width {width} out of range");
        BitVec {
            width,
            bits: bits & Self::mask(width),
        }
    }

    fn mask(width: u32) -> u64 {
        if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: u32) -> u64 {
        (self.bits >> i) & 1
    }

    pub fn msb(&self) -> u64 {
        self.bit(self.width - 1)
    }

    /// Logical left shift within the width.
    pub fn shl(&self, amount: u32) -> BitVec {
        let bits = if amount >= self.width {
            0
        } else {
            self.bits << amount
        };
        BitVec::new(self.width, bits)
    }

    /// Logical right shift within the width.
    pub fn shr(&self, amount: u32) -> BitVec {
        let bits = if amount >= self.width {
            0
        } else {
            self.bits >> amount
        };
        BitVec::new(self.width, bits)
    }

    /// Arithmetic right shift: the MSB replicates into vacated bits.
    pub fn asr(&self, amount: u32) -> BitVec {
        if amount == 0 {
            return *self;
        }
        if self.msb() == 0 {
            return self.shr(amount);
        }
        if amount >= self.width {
            return BitVec::new(self.width, u64::MAX);
        }
        let fill = (Self::mask(amount)) << (self.width - amount);
        BitVec::new(self.width, (self.bits >> amount) | fill)
    }

    /// The top `count` bits, right-aligned.
    pub fn top(&self, count: u32) -> u64 {
        debug_assert!(count <= self.width);
        if count == 0 {
            0
        } else {
            (self.bits >> (self.width - count)) & Self::mask(count)
        }
    }
}

/// Leading-zero detector: length of the run of zeros from the MSB.
/// An all-zero vector saturates to the full width.
pub fn lzd(v: BitVec) -> u32 {
    let mut count = 0;
    while count < v.width() && v.bit(v.width() - 1 - count) == 0 {
        count += 1;
    }
    count
}

/// Leading-one detector: length of the run of ones from the MSB.
/// An all-one vector saturates to the full width.
pub fn lod(v: BitVec) -> u32 {
    let mut count = 0;
    while count < v.width() && v.bit(v.width() - 1 - count) == 1 {
        count += 1;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lzd_counts_leading_zeros() {
        assert_eq!(lzd(BitVec::new(7, 0b0001_101)), 3);
        assert_eq!(lzd(BitVec::new(4, 0b1010)), 0);
        assert_eq!(lzd(BitVec::new(4, 0b0000)), 4);
    }

    #[test]
    fn lod_counts_leading_ones() {
        assert_eq!(lod(BitVec::new(3, 0b110)), 2);
        assert_eq!(lod(BitVec::new(4, 0b1111)), 4);
        assert_eq!(lod(BitVec::new(4, 0b0111)), 0);
    }

    #[test]
    fn shifts_saturate_at_width() {
        let v = BitVec::new(8, 0b1011_0000);
        assert_eq!(v.shl(20).value(), 0);
        assert_eq!(v.shr(20).value(), 0);
        assert_eq!(v.asr(20).value(), 0xff);
        assert_eq!(v.asr(2).value(), 0b1110_1100);
        let pos = BitVec::new(8, 0b0011_0000);
        assert_eq!(pos.asr(2).value(), 0b0000_1100);
    }

    #[test]
    fn top_extracts_msbs() {
        let v = BitVec::new(10, 0b10_1111_0000);
        assert_eq!(v.top(4), 0b1011);
        assert_eq!(v.top(0), 0);
    }
}
