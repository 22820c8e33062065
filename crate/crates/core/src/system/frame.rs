//! Per-tone (user-oriented) and per-antenna (time-domain) views of one OFDM
//! symbol.
//!
//! Time and frequency are paired by the *unitary* DFT,
//! `a_n = F_W â_n / √W`, so `‖ā‖₂² = Σ_w ‖x_w‖₂²` is the transmit power.

use crate::error::{Error, Result};
use crate::numerics::{Complex64, Fft};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Frequency-domain frame `x_1 … x_W`, each of length `N`; tone-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqFrame {
    antennas: usize,
    tones: usize,
    data: Vec<Complex64>,
}

/// Stacked time-domain signal `ā = [â_1; …; â_N]`; antenna-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSignal {
    antennas: usize,
    tones: usize,
    data: Vec<Complex64>,
}

impl FreqFrame {
    pub fn zeros(antennas: usize, tones: usize) -> Self {
        FreqFrame {
            antennas,
            tones,
            data: vec![ZERO; antennas * tones],
        }
    }

    pub fn from_tones(tones: &[Vec<Complex64>]) -> Result<Self> {
        let antennas = tones.first().map(Vec::len).ok_or_else(|| Error::dim("frame without tones"))?;
        if antennas == 0 || tones.iter().any(|x| x.len() != antennas) {
            return Err(Error::dim("per-tone vectors must share a positive length"));
        }
        Ok(FreqFrame {
            antennas,
            tones: tones.len(),
            data: tones.concat(),
        })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn tones(&self) -> usize {
        self.tones
    }

    /// `x_w`.
    pub fn tone(&self, w: usize) -> &[Complex64] {
        &self.data[w * self.antennas..(w + 1) * self.antennas]
    }

    pub fn tone_mut(&mut self, w: usize) -> &mut [Complex64] {
        &mut self.data[w * self.antennas..(w + 1) * self.antennas]
    }

    /// `Σ_w ‖x_w‖²`.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn tone_power(&self, w: usize) -> f64 {
        self.tone(w).iter().map(|v| v.norm_sqr()).sum()
    }

    /// Re-orders to antennas and applies the unitary IDFT per antenna.
    pub fn to_time(&self, fft: &Fft) -> Result<StackedSignal> {
        check_fft(fft, self.tones)?;
        let mut data = transpose(&self.data, self.tones, self.antennas);
        let scale = 1.0 / (self.tones as f64).sqrt();
        for chunk in data.chunks_mut(self.tones) {
            fft.backward(chunk)?;
            chunk.iter_mut().for_each(|v| *v *= scale);
        }
        Ok(StackedSignal {
            antennas: self.antennas,
            tones: self.tones,
            data,
        })
    }

    pub fn scaled(&self, c: f64) -> FreqFrame {
        FreqFrame {
            antennas: self.antennas,
            tones: self.tones,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

impl StackedSignal {
    pub fn zeros(antennas: usize, tones: usize) -> Self {
        StackedSignal {
            antennas,
            tones,
            data: vec![ZERO; antennas * tones],
        }
    }

    /// Wraps a flat antenna-major vector of length `N·W`.
    pub fn from_flat(antennas: usize, tones: usize, data: Vec<Complex64>) -> Result<Self> {
        if antennas == 0 || tones == 0 || data.len() != antennas * tones {
            return Err(Error::dim(format!(
                "stacked signal of length {} is not {antennas}x{tones}",
                data.len()
            )));
        }
        Ok(StackedSignal { antennas, tones, data })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn tones(&self) -> usize {
        self.tones
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `â_n`.
    pub fn antenna(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.tones..(n + 1) * self.tones]
    }

    pub fn antenna_mut(&mut self, n: usize) -> &mut [Complex64] {
        &mut self.data[n * self.tones..(n + 1) * self.tones]
    }

    /// Unitary DFT per antenna followed by the re-ordering to tones.
    pub fn to_freq(&self, fft: &Fft) -> Result<FreqFrame> {
        check_fft(fft, self.tones)?;
        let mut spectra = self.data.clone();
        let scale = 1.0 / (self.tones as f64).sqrt();
        for chunk in spectra.chunks_mut(self.tones) {
            fft.forward(chunk)?;
            chunk.iter_mut().for_each(|v| *v *= scale);
        }
        Ok(FreqFrame {
            antennas: self.antennas,
            tones: self.tones,
            data: transpose(&spectra, self.antennas, self.tones),
        })
    }

    /// `max_n ‖â_n‖∞̃`, equal to the ℓ∞-norm of the real embedding.
    pub fn linf_tilde(&self) -> f64 {
        self.data.iter().map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max)
    }
}

fn check_fft(fft: &Fft, tones: usize) -> Result<()> {
    if fft.len() != tones {
        return Err(Error::dim(format!("transform of length {} for {} tones", fft.len(), tones)));
    }
    Ok(())
}

/// `rows×cols` row-major into `cols×rows` row-major.
pub(crate) fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; data.len()];
    transpose_into(data, rows, cols, &mut out);
    out
}

pub(crate) fn transpose_into(data: &[Complex64], rows: usize, cols: usize, out: &mut [Complex64]) {
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
}

/// `[x_1 ⋯ x_W] = [a_1 ⋯ a_N]^T`: `W` vectors of length `N` into `N` vectors
/// of length `W`.
pub fn users_to_antennas(x: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    regroup(x)
}

/// Inverse of [`users_to_antennas`].
pub fn antennas_to_users(a: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    regroup(a)
}

fn regroup(v: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let inner = v.first().map(Vec::len).ok_or_else(|| Error::dim("nothing to re-order"))?;
    if v.iter().any(|x| x.len() != inner) {
        return Err(Error::dim("vectors to re-order differ in length"));
    }
    Ok((0..inner).map(|i| v.iter().map(|x| x[i]).collect()).collect())
}

/// Scales the frame to unit transmit power; returns it with the
/// pre-normalization power `P`.
pub fn normalize_frame(frame: &FreqFrame) -> Result<(FreqFrame, f64)> {
    let p = frame.power();
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Degenerate(format!("cannot normalize a frame with power {p}")));
    }
    Ok((frame.scaled(1.0 / p.sqrt()), p))
}
