//! Discrete Fourier transform.
//!
//! Forward transform is unnormalized, `[F]_{k,l} = exp(-j 2π k l / W)`; the
//! inverse carries the `1/W` factor so that `idft(dft(a)) == a`. Lengths that
//! are powers of two go through an iterative radix-2 Cooley-Tukey kernel,
//! anything else falls back to the direct O(W²) sum.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Precomputed transform of a fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kernel: Kernel,
}

#[derive(Debug, Clone)]
enum Kernel {
    Radix2 {
        // per stage of half-width h, exp(∓j2πk/(2h)) for k < h, stages concatenated
        forward: Vec<Complex64>,
        backward: Vec<Complex64>,
        bitrev: Vec<usize>,
    },
    Direct {
        // exp(-j2πk/W) for k < W
        roots: Vec<Complex64>,
    },
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::dim("transform length must be at least 1"));
        }
        let root = |k: usize| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64);
        let kernel = if len.is_power_of_two() {
            let bits = len.trailing_zeros();
            let bitrev = (0..len)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect();
            let mut forward = Vec::with_capacity(len);
            let mut half = 1;
            while half < len {
                forward.extend((0..half).map(|k| root(k * (len / (2 * half)))));
                half *= 2;
            }
            let backward = forward.iter().map(|t| t.conj()).collect();
            Kernel::Radix2 {
                forward,
                backward,
                bitrev,
            }
        } else {
            Kernel::Direct {
                roots: (0..len).map(root).collect(),
            }
        };
        Ok(Fft { len, kernel })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, buf: &mut [Complex64]) -> Result<()> {
        self.transform(buf, false)
    }

    /// Inverse DFT in place *without* the `1/W` factor, i.e. multiplication
    /// by `F^H`.
    pub fn backward(&self, buf: &mut [Complex64]) -> Result<()> {
        self.transform(buf, true)
    }

    /// Inverse DFT in place including the `1/W` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) -> Result<()> {
        self.backward(buf)?;
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }

    fn transform(&self, buf: &mut [Complex64], conjugate: bool) -> Result<()> {
        if buf.len() != self.len {
            return Err(Error::dim(format!(
                "transform of length {} applied to buffer of length {}",
                self.len,
                buf.len()
            )));
        }
        match &self.kernel {
            Kernel::Radix2 {
                forward,
                backward,
                bitrev,
            } => {
                radix2(buf, if conjugate { backward } else { forward }, bitrev);
            }
            Kernel::Direct { roots } => {
                let n = self.len;
                let input = buf.to_vec();
                for (k, out) in buf.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, v) in input.iter().enumerate() {
                        let r = roots[(k * l) % n];
                        acc += v * if conjugate { r.conj() } else { r };
                    }
                    *out = acc;
                }
            }
        }
        Ok(())
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[usize]) {
    let n = buf.len();
    for i in 0..n {
        let j = bitrev[i];
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        // the stage-h twiddles start at offset h - 1
        let tw = &twiddles[half - 1..2 * half - 1];
        for block in buf.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for ((u, v), t) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                let p = *v * t;
                *v = *u - p;
                *u += p;
            }
        }
        half *= 2;
    }
}

/// Unnormalized forward DFT of `a`.
pub fn dft(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = a.to_vec();
    Fft::new(a.len())?.forward(&mut out)?;
    Ok(out)
}

/// Inverse DFT of `a` (carries the `1/W` factor).
pub fn idft(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = a.to_vec();
    Fft::new(a.len())?.inverse(&mut out)?;
    Ok(out)
}
