use crate::error::{Error, Result};
use crate::numerics::{CMat, Complex64, SimRng};
use std::f64::consts::PI;

/// Frequency-selective MU-MIMO channel: `T` time-domain taps `Ĥ_t` (each
/// `M×N`) and the per-tone responses
/// `H_w = Σ_t Ĥ_t exp(-j2π w t / W)` (zero-based `w`, `t`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    users: usize,
    antennas: usize,
    taps: Vec<CMat>,
    freq: Vec<CMat>,
}

impl ChannelRealization {
    /// Builds the realization from explicit taps; every tap must be `M×N`.
    pub fn from_taps(taps: Vec<CMat>, tones: usize) -> Result<Self> {
        let first = taps.first().ok_or_else(|| Error::dim("channel needs at least one tap"))?;
        let (m, n) = (first.rows(), first.cols());
        if taps.iter().any(|t| t.rows() != m || t.cols() != n) {
            return Err(Error::dim("channel taps differ in shape"));
        }
        if taps.len() > tones {
            return Err(Error::dim(format!("{} taps exceed {} tones", taps.len(), tones)));
        }
        let freq = (0..tones)
            .map(|w| {
                let mut hw = CMat::zeros(m, n)?;
                for (t, tap) in taps.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, -2.0 * PI * ((w * t) % tones) as f64 / tones as f64);
                    for r in 0..m {
                        for c in 0..n {
                            hw[(r, c)] += tap[(r, c)] * phase;
                        }
                    }
                }
                Ok(hw)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelRealization {
            users: m,
            antennas: n,
            taps,
            freq,
        })
    }

    /// Taps with i.i.d. `CN(0, 1)` entries.
    pub fn draw(rng: &mut SimRng, antennas: usize, users: usize, taps: usize, tones: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::dim("channel needs at least one tap"));
        }
        if taps > tones {
            return Err(Error::dim(format!("{taps} taps exceed {tones} tones")));
        }
        let taps = (0..taps)
            .map(|_| CMat::from_fn(users, antennas, |_, _| rng.complex_gaussian(1.0)))
            .collect::<Result<Vec<_>>>()?;
        ChannelRealization::from_taps(taps, tones)
    }

    /// Number of users `M`.
    pub fn users(&self) -> usize {
        self.users
    }

    /// Number of transmit antennas `N`.
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn tones(&self) -> usize {
        self.freq.len()
    }

    pub fn taps(&self) -> &[CMat] {
        &self.taps
    }

    /// `H_w` for zero-based bin `w`.
    pub fn tone(&self, w: usize) -> &CMat {
        &self.freq[w]
    }
}
