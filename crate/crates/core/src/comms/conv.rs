//! Rate-1/2 feed-forward convolutional code and its soft-input Viterbi
//! decoder. The trellis starts in the all-zero state and is not terminated.

use crate::error::{Error, Result};

/// Generator pair and constraint length of a rate-1/2 code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSpec {
    /// Generator taps, most significant bit on the current input.
    pub generators: [u32; 2],
    pub constraint_length: u32,
}

impl Default for CodeSpec {
    /// The industry-standard `(133, 171)` octal code with constraint length 7.
    fn default() -> Self {
        CodeSpec {
            generators: [0o133, 0o171],
            constraint_length: 7,
        }
    }
}

impl CodeSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.constraint_length;
        if !(2..=16).contains(&k) {
            return Err(Error::config("constraint_length", "must lie in 2..=16"));
        }
        for g in self.generators {
            if g >> (k - 1) != 1 {
                return Err(Error::config(
                    "generators",
                    format!("{g:o} must have degree exactly {}", k - 1),
                ));
            }
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        1 << (self.constraint_length - 1)
    }

    /// The two coded bits for shift-register contents `reg` (current input
    /// in the top bit).
    fn outputs(&self, reg: u32) -> [u8; 2] {
        self.generators.map(|g| ((reg & g).count_ones() & 1) as u8)
    }
}

/// Encodes `bits` (0/1) into `2 · bits.len()` coded bits, the two generator
/// outputs of each input bit adjacent.
pub fn conv_encode(bits: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    if bits.is_empty() {
        return Err(Error::dim("nothing to encode"));
    }
    let memory = spec.constraint_length - 1;
    let mut state = 0u32;
    let mut out = Vec::with_capacity(2 * bits.len());
    for &b in bits {
        let reg = (u32::from(b & 1) << memory) | state;
        out.extend(spec.outputs(reg));
        state = reg >> 1;
    }
    Ok(out)
}

/// Maximum-likelihood input sequence for the coded-bit LLRs (positive means
/// a 0 is more likely). Ties prefer the lower-numbered predecessor state and
/// the lower-numbered final state.
pub fn viterbi_decode(llrs: &[f64], spec: &CodeSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    if llrs.is_empty() || llrs.len() % 2 != 0 {
        return Err(Error::dim(format!("{} LLRs do not form whole trellis steps", llrs.len())));
    }
    let memory = spec.constraint_length - 1;
    let states = spec.states();
    let high = states as u32 >> 1;
    let steps = llrs.len() / 2;

    // branch outputs indexed by (predecessor, input)
    let branch: Vec<[u8; 2]> = (0..states as u32)
        .flat_map(|s| [0u32, 1].map(|u| spec.outputs((u << memory) | s)))
        .collect();

    let mut cost = vec![f64::INFINITY; states];
    cost[0] = 0.0;
    let mut next = vec![0.0; states];
    // survivor predecessor's low bit per step and state
    let mut choice = vec![0u8; steps * states];

    for (t, pair) in llrs.chunks_exact(2).enumerate() {
        let metric = |bits: [u8; 2]| f64::from(bits[0]) * pair[0] + f64::from(bits[1]) * pair[1];
        for s in 0..states as u32 {
            let u = s / high;
            let p0 = (s % high) << 1;
            let p1 = p0 | 1;
            let c0 = cost[p0 as usize] + metric(branch[(p0 as usize) * 2 + u as usize]);
            let c1 = cost[p1 as usize] + metric(branch[(p1 as usize) * 2 + u as usize]);
            let (c, pick) = if c1 < c0 { (c1, 1) } else { (c0, 0) };
            next[s as usize] = c;
            choice[t * states + s as usize] = pick;
        }
        std::mem::swap(&mut cost, &mut next);
    }

    let mut state = (0..states).fold(0, |best, s| if cost[s] < cost[best] { s } else { best }) as u32;
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        bits[t] = (state / high) as u8;
        state = ((state % high) << 1) | u32::from(choice[t * states + state as usize]);
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SimRng;

    fn hard(coded: &[u8]) -> Vec<f64> {
        coded.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
    }

    #[test]
    fn impulse_response_is_the_generators() {
        let spec = CodeSpec::default();
        let coded = conv_encode(&[1, 0, 0, 0, 0, 0, 0], &spec).unwrap();
        let first: Vec<u8> = coded.iter().step_by(2).copied().collect();
        let second: Vec<u8> = coded.iter().skip(1).step_by(2).copied().collect();
        assert_eq!(first, vec![1, 0, 1, 1, 0, 1, 1]);
        assert_eq!(second, vec![1, 1, 1, 1, 0, 0, 1]);
    }

    #[test]
    fn zero_input_and_lengths() {
        let spec = CodeSpec::default();
        assert_eq!(conv_encode(&[0; 12], &spec).unwrap(), vec![0; 24]);
        assert_eq!(conv_encode(&[1; 216], &spec).unwrap().len(), 432);
        assert!(conv_encode(&[], &spec).is_err());
    }

    #[test]
    fn linearity_over_gf2() {
        let spec = CodeSpec::default();
        let mut rng = SimRng::new(5);
        let a = rng.bits(50);
        let b = rng.bits(50);
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let (ca, cb, cs) = (
            conv_encode(&a, &spec).unwrap(),
            conv_encode(&b, &spec).unwrap(),
            conv_encode(&sum, &spec).unwrap(),
        );
        assert_eq!(cs, ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect::<Vec<_>>());
    }

    #[test]
    fn noiseless_round_trip() {
        let spec = CodeSpec::default();
        let mut rng = SimRng::new(1);
        for _ in 0..200 {
            let bits = rng.bits(216);
            let coded = conv_encode(&bits, &spec).unwrap();
            assert_eq!(viterbi_decode(&hard(&coded), &spec).unwrap(), bits);
        }
    }

    #[test]
    fn corrects_a_flipped_bit() {
        let spec = CodeSpec::default();
        let mut rng = SimRng::new(2);
        for pos in [0, 1, 100, 250, 400] {
            let bits = rng.bits(216);
            let mut llrs = hard(&conv_encode(&bits, &spec).unwrap());
            llrs[pos] = -llrs[pos];
            assert_eq!(viterbi_decode(&llrs, &spec).unwrap(), bits, "flip at {pos}");
        }
    }

    #[test]
    fn erasures_give_a_deterministic_sequence() {
        let spec = CodeSpec::default();
        let a = viterbi_decode(&[0.0; 432], &spec).unwrap();
        assert_eq!(a.len(), 216);
        assert_eq!(a, viterbi_decode(&[0.0; 432], &spec).unwrap());
        assert!(viterbi_decode(&[0.0; 3], &spec).is_err());
    }

    #[test]
    fn rejects_malformed_generators() {
        let spec = CodeSpec {
            generators: [0o33, 0o171],
            constraint_length: 7,
        };
        assert!(conv_encode(&[1], &spec).is_err());
    }
}
