use posit_core::{quantize_real, PositBits, PositConfig};

use crate::decoder::{decoder_optimized, decoder_original};
use crate::encoder::{encoder_optimized, encoder_original};
use crate::fields::FpFields;
use crate::mac::{mac, FpAccumulator};

/// How to sweep the operand space.
#[derive(Debug, Clone, Copy)]
pub enum Mode {
    /// Every bit pattern; only sensible for n <= 16.
    Exhaustive,
    /// `count` seeded random patterns.
    Samples { count: u64, seed: u64 },
}

/// Outcome of one datapath verification run.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: PositConfig,
    pub lines: Vec<String>,
    pub passed: bool,
    pub first_counterexample: Option<String>,
}

impl Report {
    fn check(&mut self, name: &str, total: u64, failures: u64, first: Option<String>) {
        if failures == 0 {
            self.lines.push(format!("{name}: {total}/{total} PASS"));
        } else {
            self.lines
                .push(format!("{name}: {}/{total} FAIL", total - failures));
            self.passed = false;
            if self.first_counterexample.is_none() {
                self.first_counterexample = first;
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "posit({}, {}) datapath verification\n",
            self.config.n(),
            self.config.es()
        );
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        if let Some(cx) = &self.first_counterexample {
            out.push_str(&format!("first counterexample: {cx}\n"));
        }
        out.push_str(if self.passed { "RESULT: PASS\n" } else { "RESULT: FAIL\n" });
        out
    }
}

// splitmix64; fixed stream for reproducible sampled sweeps
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

fn patterns(config: PositConfig, mode: Mode) -> Vec<u64> {
    match mode {
        Mode::Exhaustive => (0..(1u64 << config.n())).collect(),
        Mode::Samples { count, seed } => {
            let mut rng = Rng(seed);
            (0..count).map(|_| rng.next() & config.mask()).collect()
        }
    }
}

/// Run the full equivalence suite for one format: decoder variants
/// against each other and against the scalar semantics, encoder
/// variants over decoded and randomized fields, datapath round trip,
/// and the MAC against the scalar quantizer.
pub fn verify_format(config: PositConfig, mode: Mode) -> Report {
    let mut report = Report {
        config,
        lines: Vec::new(),
        passed: true,
        first_counterexample: None,
    };
    let pats = patterns(config, mode);

    // decoder: optimized == original, and value agrees with decode
    let mut failures = 0;
    let mut first = None;
    for &b in &pats {
        let p = PositBits::from_bits(b, config);
        let orig = decoder_original(p);
        let opt = decoder_optimized(p);
        let ok = orig == opt && values_agree(&orig, p);
        if !ok && failures == 0 {
            first = Some(format!("decoder mismatch at pattern {b:#x}"));
        }
        failures += u64::from(!ok);
    }
    report.check("decoder", pats.len() as u64, failures, first);

    // encoder: optimized == original on decode-reachable fields, and
    // the decoder/encoder pair round-trips every non-special pattern
    let mut failures = 0;
    let mut first = None;
    for &b in &pats {
        let p = PositBits::from_bits(b, config);
        let f = decoder_optimized(p);
        let orig = encoder_original(&f, config);
        let opt = encoder_optimized(&f, config);
        let ok = orig == opt && opt.bits() == b;
        if !ok && failures == 0 {
            first = Some(format!("encoder mismatch at pattern {b:#x}"));
        }
        failures += u64::from(!ok);
    }
    report.check("encoder round-trip", pats.len() as u64, failures, first);

    // encoder sweep: randomized fields beyond the decode-reachable set;
    // the scalar quantizer is the oracle
    let sweep = 4096u64;
    let mut rng = Rng(0x00e5_ceed ^ ((config.n() as u64) << 8) ^ config.es() as u64);
    let mut failures = 0;
    let mut first = None;
    for _ in 0..sweep {
        let span = 2 * config.max_exp() as i64 + 8;
        let eff_exp = (rng.next() % (2 * span as u64 + 1)) as i64 - span;
        let hidden = 1u64 << (config.n() - 2);
        let mantissa = hidden | (rng.next() & (hidden - 1));
        let f = FpFields {
            sign: (rng.next() & 1) as u32,
            eff_exp,
            mantissa,
            zero: false,
            nar: false,
        };
        let orig = encoder_original(&f, config);
        let opt = encoder_optimized(&f, config);
        let expected = quantize_real(f.value(config), config).unwrap();
        let ok = orig == opt && opt.to_real() == expected;
        if !ok && failures == 0 {
            first = Some(format!(
                "encoder sweep mismatch at eff_exp={eff_exp} mantissa={mantissa:#x}"
            ));
        }
        failures += u64::from(!ok);
    }
    report.check("encoder sweep", sweep, failures, first);

    // MAC against the scalar oracle. Exhaustive pairs are only feasible
    // at n <= 8; sampled pairs elsewhere. Oracle comparisons require the
    // exact accumulator value to fit f64, which holds for every pair at
    // n <= 16 from these seeds.
    let (pairs, accs): (Vec<(u64, u64)>, Vec<FpAccumulator>) = match mode {
        Mode::Exhaustive if config.n() <= 8 => {
            let all: Vec<(u64, u64)> = (0..(1u64 << config.n()))
                .flat_map(|a| (0..(1u64 << config.n())).map(move |b| (a, b)))
                .collect();
            (all, acc_seeds(config))
        }
        _ => {
            let mut rng = Rng(0x0acc ^ (config.n() as u64));
            let count = match mode {
                Mode::Exhaustive => 65536,
                Mode::Samples { count, .. } => count,
            };
            let pairs = (0..count)
                .map(|_| (rng.next() & config.mask(), rng.next() & config.mask()))
                .collect();
            (pairs, acc_seeds(config))
        }
    };
    let mut failures = 0;
    let mut checked = 0u64;
    let mut first = None;
    for &(a, b) in &pairs {
        let pa = PositBits::from_bits(a, config);
        let pb = PositBits::from_bits(b, config);
        for acc in &accs {
            let (next, out) = mac(pa, pb, acc);
            checked += 1;
            let ok = if pa.is_nar() || pb.is_nar() {
                next.is_nar() && out.is_nar()
            } else if next.fits_f64() {
                out.to_real() == quantize_real(next.value(), config).unwrap()
            } else {
                // beyond f64: still require the two encoder variants to
                // agree on the exact accumulator fields
                encoder_original(&next.to_fields(config), config) == out
            };
            if !ok && failures == 0 {
                first = Some(format!("mac mismatch at a={a:#x} b={b:#x}"));
            }
            failures += u64::from(!ok);
        }
    }
    report.check("mac", checked, failures, first);

    report
}

fn acc_seeds(config: PositConfig) -> Vec<FpAccumulator> {
    // the accumulator is wide: maxpos/2 is held exactly even where the
    // posit format itself cannot represent it
    let half_max = config.maxpos() / 2.0;
    [0.0, half_max, -half_max]
        .iter()
        .map(|&v| FpAccumulator::from_real(v))
        .collect()
}

fn values_agree(f: &FpFields, p: PositBits) -> bool {
    let direct = p.to_real();
    if f.nar {
        return direct.is_nan();
    }
    f.value(p.config()) == direct
}
