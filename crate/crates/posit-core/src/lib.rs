//! Posit (type-III unum) number semantics.
//!
//! A posit format is parameterized by a total width `n` and an exponent
//! field size `es`. Every finite nonzero posit value is
//! `(-1)^s * useed^k * 2^e * (1+f)` with `useed = 2^(2^es)`, a run-length
//! encoded regime `k`, up to `es` exponent bits and a variable-width
//! fraction. Two patterns are special: all zeros is the value 0 and
//! `10...0` is NaR (not a real).
//!
//! This crate provides the exact scalar semantics: [`quantize_real`]
//! (conversion of a wide real to the nearest-toward-zero posit value),
//! bit-level encode/decode via [`PositBits`], and table enumeration for
//! small formats. All rounding is round-to-zero (truncation); there are
//! no guard or sticky bits anywhere.

mod config;
mod quantize;
mod bits;
mod real;
mod table;

pub use bits::{Decoded, PositBits, PositFields};
pub use config::PositConfig;
pub use quantize::quantize_real;
pub use table::{enumerate_table, Dyadic, TableRow};

/// Errors from configuration or domain violations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PositError {
    #[error("posit width n={0} out of range (2..=32)")]
    InvalidWidth(u32),
    #[error("posit exponent size es={0} out of range (0..=4)")]
    InvalidEs(u32),
    #[error("cannot quantize non-finite value {0}")]
    NonFinite(f64),
    #[error("table for n={0} too large; refusing above n=12")]
    TableTooLarge(u32),
}
