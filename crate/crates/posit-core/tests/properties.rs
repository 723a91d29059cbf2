//! Invariants of the scalar posit semantics, checked exhaustively at
//! small widths and by property tests on random reals.

use posit_core::{enumerate_table, quantize_real, PositBits, PositConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configs() -> Vec<PositConfig> {
    [(5, 1), (8, 0), (8, 1), (8, 2), (10, 1), (12, 2)]
        .iter()
        .map(|&(n, es)| PositConfig::new(n, es).unwrap())
        .collect()
}

#[test]
fn exhaustive_round_trip() {
    for cfg in configs() {
        for b in 0..(1u64 << cfg.n()) {
            let p = PositBits::from_bits(b, cfg);
            if p.is_nar() {
                continue;
            }
            let back = PositBits::from_real(p.to_real(), cfg).unwrap();
            assert_eq!(back.bits(), b, "({}, {}) pattern {b:b}", cfg.n(), cfg.es());
        }
    }
}

#[test]
fn bit_level_monotonicity() {
    // Patterns as n-bit two's-complement integers map strictly
    // increasingly to values, NaR excluded.
    for cfg in configs() {
        let mut pairs: Vec<(i64, f64)> = (0..(1u64 << cfg.n()))
            .map(|b| PositBits::from_bits(b, cfg))
            .filter(|p| !p.is_nar())
            .map(|p| (p.as_signed(), p.to_real()))
            .collect();
        pairs.sort_by_key(|&(s, _)| s);
        for w in pairs.windows(2) {
            assert!(
                w[0].1 < w[1].1,
                "({}, {}): {} -> {} not increasing",
                cfg.n(),
                cfg.es(),
                w[0].0,
                w[1].0
            );
        }
    }
}

#[test]
fn table_values_are_fixed_points() {
    for cfg in configs().into_iter().filter(|c| c.n() <= 12) {
        for row in enumerate_table(cfg).unwrap() {
            let v = row.value.to_f64();
            assert_eq!(quantize_real(v, cfg).unwrap(), v);
            assert_eq!(quantize_real(-v, cfg).unwrap(), -v);
        }
    }
}

#[test]
fn power_of_two_exactness() {
    for cfg in configs() {
        let es = cfg.es();
        for t in -cfg.max_exp()..=cfg.max_exp() {
            let k = t.div_euclid(1 << es);
            let rb = if k >= 0 { k + 2 } else { -k + 1 };
            // regime must fit and the exponent must survive unrounded
            if cfg.n() as i32 - 1 - rb < es as i32 {
                continue;
            }
            let x = 2f64.powi(t);
            assert_eq!(
                quantize_real(x, cfg).unwrap(),
                x,
                "({}, {}) at 2^{t}",
                cfg.n(),
                cfg.es()
            );
        }
    }
}

#[test]
fn seeded_random_suite() {
    // Idempotence, truncation toward zero, and monotonicity over a
    // seeded stream of magnitudes spanning the whole dynamic range.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for cfg in configs() {
        let span = cfg.max_exp() as f64 + 2.0;
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..20_000 {
            let mag = 2f64.powf(rng.random_range(-span..span));
            let x = if rng.random_bool(0.5) { -mag } else { mag };
            let q = quantize_real(x, cfg).unwrap();
            assert_eq!(quantize_real(q, cfg).unwrap(), q, "idempotence at {x}");
            assert!(q.abs() <= x.abs(), "|P(x)| <= |x| at {x}");
            assert!(q == 0.0 || q.signum() == x.signum());
            if let Some((px, pq)) = prev {
                if px <= x {
                    assert!(pq <= q, "monotonicity: {px} -> {pq}, {x} -> {q}");
                } else {
                    assert!(pq >= q, "monotonicity: {px} -> {pq}, {x} -> {q}");
                }
            }
            prev = Some((x, q));
        }
    }
}

proptest! {
    #[test]
    fn quantize_is_idempotent_and_shrinking(x in -1e6f64..1e6f64, n in 3u32..=16, es in 0u32..=2) {
        let cfg = PositConfig::new(n, es).unwrap();
        let q = quantize_real(x, cfg).unwrap();
        prop_assert_eq!(quantize_real(q, cfg).unwrap(), q);
        prop_assert!(q.abs() <= x.abs());
        prop_assert!(q == 0.0 || q.signum() == x.signum());
    }

    #[test]
    fn quantize_monotone_on_pairs(a in -1e4f64..1e4f64, b in -1e4f64..1e4f64) {
        let cfg = PositConfig::new(8, 1).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize_real(lo, cfg).unwrap() <= quantize_real(hi, cfg).unwrap());
    }

    #[test]
    fn encode_decode_agrees_with_quantize(x in -1e5f64..1e5f64) {
        let cfg = PositConfig::new(10, 1).unwrap();
        let bits = PositBits::from_real(x, cfg).unwrap();
        prop_assert_eq!(bits.to_real(), quantize_real(x, cfg).unwrap());
    }
}
