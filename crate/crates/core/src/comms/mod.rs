//! Coded 16-QAM transmission chain.

mod conv;
mod interleave;
mod link;
mod qam;

pub use conv::{conv_encode, viterbi_decode, CodeSpec};
pub use interleave::Interleaver;
pub use link::{apply_awgn, draw_payloads, noise_variance, run_link, symbols_per_tone, UserPayload};
pub use qam::{constellation, constellation_point, demap_maxlog, map_16qam, BITS_PER_SYMBOL};
