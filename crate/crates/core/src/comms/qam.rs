//! Gray-labelled 16-QAM with max-log soft demapping.
//!
//! Bits `b0 b1` pick the in-phase level and `b2 b3` the quadrature level,
//! each through `00 → −3, 01 → −1, 11 → +1, 10 → +3`, scaled by `1/√10` for
//! unit average energy.

use crate::error::{Error, Result};
use crate::numerics::Complex64;

pub const BITS_PER_SYMBOL: usize = 4;

fn axis_level(b0: u8, b1: u8) -> f64 {
    match (b0 & 1, b1 & 1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

/// Unit-energy constellation point for a 4-bit label (`label >> 3` is `b0`).
pub fn constellation_point(label: u8) -> Complex64 {
    let bit = |i: u8| (label >> (3 - i)) & 1;
    Complex64::new(axis_level(bit(0), bit(1)), axis_level(bit(2), bit(3))) / 10f64.sqrt()
}

/// The 16 points indexed by label.
pub fn constellation() -> [Complex64; 16] {
    std::array::from_fn(|l| constellation_point(l as u8))
}

/// Maps groups of four bits to points scaled by `scale`.
pub fn map_16qam(bits: &[u8], scale: f64) -> Result<Vec<Complex64>> {
    if bits.len() % BITS_PER_SYMBOL != 0 {
        return Err(Error::dim(format!("{} bits are not a whole number of 16-QAM symbols", bits.len())));
    }
    Ok(bits
        .chunks_exact(BITS_PER_SYMBOL)
        .map(|b| {
            let label = b.iter().fold(0u8, |acc, &x| (acc << 1) | (x & 1));
            constellation_point(label) * scale
        })
        .collect())
}

/// Max-log LLRs of the four bits of `y = gain · s + n`, `n ~ CN(0, n0)`:
/// `(min_{s: b=1} |y − gs|² − min_{s: b=0} |y − gs|²) / n0`, so a positive
/// value favours a 0.
pub fn demap_maxlog(y: Complex64, gain: f64, n0: f64) -> [f64; BITS_PER_SYMBOL] {
    let points = constellation();
    let mut best = [[f64::INFINITY; 2]; BITS_PER_SYMBOL];
    for (label, p) in points.iter().enumerate() {
        let d = (y - p * gain).norm_sqr();
        for (i, slot) in best.iter_mut().enumerate() {
            let b = (label >> (3 - i)) & 1;
            slot[b] = slot[b].min(d);
        }
    }
    best.map(|[zero, one]| (one - zero) / n0)
}
