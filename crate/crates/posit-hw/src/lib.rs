//! Functional model of the posit MAC datapath: a decoder unpacking a
//! posit into FP-style fields, an exact FP accumulator core, and an
//! encoder packing fields back into a posit. The decoder and encoder
//! each come in two structurally different variants (the baseline with
//! an adder on the shift path, and the optimized form that replaces it
//! with a duplicated shifter plus a fixed shift-by-one stage); both
//! must agree bit for bit on every input.

mod bitvec;
mod decoder;
mod encoder;
mod fields;
mod mac;
mod verify;

pub use bitvec::{lod, lzd, BitVec};
pub use decoder::{decoder_optimized, decoder_original};
pub use encoder::{encoder_optimized, encoder_original};
pub use fields::FpFields;
pub use mac::{mac, FpAccumulator};
pub use verify::{verify_format, Mode, Report};
