use crate::error::{Error, Result};
use crate::numerics::SimRng;

/// Bit permutation: output position `i` carries input position `perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    /// Uniformly random permutation of `len` positions.
    pub fn random(rng: &mut SimRng, len: usize) -> Self {
        Interleaver { perm: rng.permutation(len) }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.perm.iter().map(|&p| input[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        let mut out = vec![T::default(); input.len()];
        for (&p, &v) in self.perm.iter().zip(input) {
            out[p] = v;
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::dim(format!("interleaver of length {} applied to {len} items", self.perm.len())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_over_many_seeds() {
        let data: Vec<u32> = (0..432).collect();
        for seed in 0..500 {
            let il = Interleaver::random(&mut SimRng::new(seed), 432);
            let mixed = il.interleave(&data).unwrap();
            assert_eq!(il.deinterleave(&mixed).unwrap(), data);
        }
        let il = Interleaver::random(&mut SimRng::new(0), 8);
        assert!(il.interleave(&[1, 2, 3]).is_err());
    }
}
