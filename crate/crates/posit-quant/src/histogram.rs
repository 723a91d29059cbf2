use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::TensorF;

/// Unit-width log2 histogram of a tensor's magnitudes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    /// bin b counts elements with floor(log2|x|) == b.
    pub bins: BTreeMap<i32, u64>,
    pub zeros: u64,
}

/// Count nonzero elements per unit bin of floor(log2|x|); zeros are
/// counted separately.
pub fn log2_histogram(x: &TensorF) -> Histogram {
    let mut h = Histogram::default();
    for &v in x.data() {
        if v == 0.0 {
            h.zeros += 1;
        } else if v.is_finite() {
            let bin = v.abs().log2().floor() as i32;
            *h.bins.entry(bin).or_insert(0) += 1;
        }
    }
    h
}

/// CSV export: header `bin,count`, one row per bin in ascending order,
/// final row `zeros,<count>`.
pub fn write_histogram_csv(h: &Histogram, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "bin,count")?;
    for (bin, count) in &h.bins {
        writeln!(out, "{bin},{count}")?;
    }
    writeln!(out, "zeros,{}", h.zeros)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(data: &[f64]) -> TensorF {
        TensorF::new(vec![data.len()], data.to_vec()).unwrap()
    }

    #[test]
    fn powers_of_two() {
        let h = log2_histogram(&t(&[1.0, 2.0, 4.0]));
        assert_eq!(h.zeros, 0);
        let bins: Vec<(i32, u64)> = h.bins.into_iter().collect();
        assert_eq!(bins, [(0, 1), (1, 1), (2, 1)]);
    }

    #[test]
    fn all_zeros() {
        let h = log2_histogram(&t(&[0.0, 0.0]));
        assert!(h.bins.is_empty());
        assert_eq!(h.zeros, 2);
    }

    #[test]
    fn interior_values_floor() {
        let h = log2_histogram(&t(&[0.3, 0.6]));
        let bins: Vec<(i32, u64)> = h.bins.into_iter().collect();
        assert_eq!(bins, [(-2, 1), (-1, 1)]);
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_histogram_csv(&log2_histogram(&t(&[1.0, 2.0, 0.0])), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bin,count\n0,1\n1,1\nzeros,1\n");
    }
}
