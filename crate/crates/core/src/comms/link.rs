//! Per-user payloads and the end-to-end downlink: channel, noise, soft
//! demapping, de-interleaving, decoding and block-error accounting.

use super::conv::{conv_encode, viterbi_decode, CodeSpec};
use super::interleave::Interleaver;
use super::qam::{demap_maxlog, map_16qam, BITS_PER_SYMBOL};
use crate::error::{Error, Result};
use crate::numerics::{Complex64, SimRng};
use crate::precoders::TxFrame;
use crate::system::{ChannelRealization, TonePlan};

/// Noise variance `N₀ = 10^(−snr/10)`; infinite SNR gives zero.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Adds i.i.d. `CN(0, n0)` noise; leaves the input untouched when `n0 == 0`.
pub fn apply_awgn(y: &mut [Complex64], n0: f64, rng: &mut SimRng) {
    if n0 > 0.0 {
        y.iter_mut().for_each(|v| *v += rng.complex_gaussian(n0));
    }
}

/// One user's data for one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPayload {
    pub info: Vec<u8>,
    pub coded: Vec<u8>,
    pub interleaver: Interleaver,
    /// One symbol per active tone, scaled to energy `1/M`.
    pub symbols: Vec<Complex64>,
}

impl UserPayload {
    /// Draws information bits for `tones` active tones (`2 · tones` bits at
    /// rate 1/2 with four coded bits per tone) and a fresh interleaver.
    pub fn random(rng: &mut SimRng, tones: usize, users: usize, spec: &CodeSpec) -> Result<Self> {
        let info = rng.bits(tones * BITS_PER_SYMBOL / 2);
        let coded = conv_encode(&info, spec)?;
        let interleaver = Interleaver::random(rng, coded.len());
        let symbols = map_16qam(&interleaver.interleave(&coded)?, 1.0 / (users as f64).sqrt())?;
        Ok(UserPayload {
            info,
            coded,
            interleaver,
            symbols,
        })
    }
}

/// Draws one payload per user.
pub fn draw_payloads(rng: &mut SimRng, tones: usize, users: usize, spec: &CodeSpec) -> Result<Vec<UserPayload>> {
    (0..users).map(|_| UserPayload::random(rng, tones, users, spec)).collect()
}

/// Regroups per-user symbol streams into per-tone vectors `s_w`.
pub fn symbols_per_tone(payloads: &[UserPayload]) -> Result<Vec<Vec<Complex64>>> {
    let tones = payloads.first().map(|p| p.symbols.len()).ok_or_else(|| Error::dim("no users"))?;
    if payloads.iter().any(|p| p.symbols.len() != tones) {
        return Err(Error::dim("users carry different numbers of symbols"));
    }
    Ok((0..tones).map(|i| payloads.iter().map(|p| p.symbols[i]).collect()).collect())
}

/// Sends `frame` (scaled to unit power) through `chan` at `snr_db` and
/// decodes every user; returns one block-error flag per user.
///
/// Receivers demap with the frame's genie gain times the `1/√M` symbol
/// scale. Without noise the LLRs are
/// scaled as if `N₀ = 1`.
pub fn run_link(
    frame: &TxFrame,
    plan: &TonePlan,
    chan: &ChannelRealization,
    payloads: &[UserPayload],
    snr_db: f64,
    spec: &CodeSpec,
    rng: &mut SimRng,
) -> Result<Vec<bool>> {
    let m = chan.users();
    if payloads.len() != m || frame.users() != m {
        return Err(Error::dim(format!("{} payloads for {m} users", payloads.len())));
    }
    if payloads.iter().any(|p| p.symbols.len() != plan.active().len()) {
        return Err(Error::dim("payload length differs from the number of active tones"));
    }
    let power = frame.power();
    if !(power > 0.0) {
        return Err(Error::Degenerate("frame carries no power".into()));
    }
    let scale = 1.0 / power.sqrt();
    let symbol_scale = 1.0 / (m as f64).sqrt();
    let n0 = noise_variance(snr_db);
    let llr_n0 = if n0 > 0.0 { n0 } else { 1.0 };

    let mut llrs = vec![Vec::with_capacity(plan.active().len() * BITS_PER_SYMBOL); m];
    for (i, &w) in plan.active().iter().enumerate() {
        let x: Vec<Complex64> = frame.freq().tone(w).iter().map(|v| v * scale).collect();
        let mut y = chan.tone(w).mul_vec(&x)?;
        apply_awgn(&mut y, n0, rng);
        for (user, yu) in y.iter().enumerate() {
            llrs[user].extend(demap_maxlog(*yu, frame.receiver_gain(i, user) * symbol_scale, llr_n0));
        }
    }
    payloads
        .iter()
        .zip(&llrs)
        .map(|(p, l)| {
            let decoded = viterbi_decode(&p.interleaver.deinterleave(l)?, spec)?;
            Ok(decoded != p.info)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Fft;
    use crate::precoders::{precode_ls, precode_mf};

    #[test]
    fn noise_statistics_and_switch() {
        assert_eq!(noise_variance(f64::INFINITY), 0.0);
        assert!((noise_variance(10.0) - 0.1).abs() < 1e-15);

        let mut y = vec![Complex64::new(1.0, -2.0); 5];
        apply_awgn(&mut y, 0.0, &mut SimRng::new(1));
        assert!(y.iter().all(|v| *v == Complex64::new(1.0, -2.0)));

        let mut z = vec![Complex64::new(0.0, 0.0); 1_000_000];
        apply_awgn(&mut z, 0.1, &mut SimRng::new(2));
        let var = z.iter().map(|v| v.norm_sqr()).sum::<f64>() / z.len() as f64;
        assert!((var - 0.1).abs() <= 0.001, "{var}");

        let mut a = vec![Complex64::new(0.0, 0.0); 8];
        let mut b = a.clone();
        apply_awgn(&mut a, 0.5, &mut SimRng::new(3));
        apply_awgn(&mut b, 0.5, &mut SimRng::new(3));
        assert_eq!(a, b);
    }

    #[test]
    fn payload_budget() {
        let p = UserPayload::random(&mut SimRng::new(1), 108, 10, &CodeSpec::default()).unwrap();
        assert_eq!(p.info.len(), 216);
        assert_eq!(p.coded.len(), 432);
        assert_eq!(p.symbols.len(), 108);
    }

    fn link_setup(seed: u64) -> (TonePlan, ChannelRealization, Vec<UserPayload>, Fft) {
        let plan = TonePlan::ieee80211n_40mhz();
        let mut rng = SimRng::new(seed);
        let chan = ChannelRealization::draw(&mut rng, 16, 4, 4, 128).unwrap();
        let payloads = draw_payloads(&mut rng, 108, 4, &CodeSpec::default()).unwrap();
        (plan, chan, payloads, Fft::new(128).unwrap())
    }

    #[test]
    fn noiseless_ls_link_is_error_free() {
        let spec = CodeSpec::default();
        for seed in 0..20 {
            let (plan, chan, payloads, fft) = link_setup(seed);
            let frame = precode_ls(&symbols_per_tone(&payloads).unwrap(), &plan, &chan, &fft).unwrap();
            let errors = run_link(&frame, &plan, &chan, &payloads, f64::INFINITY, &spec, &mut SimRng::new(0)).unwrap();
            assert_eq!(errors, vec![false; 4]);
        }
    }

    #[test]
    fn link_is_deterministic_and_noise_hurts() {
        let spec = CodeSpec::default();
        let (plan, chan, payloads, fft) = link_setup(7);
        let frame = precode_mf(&symbols_per_tone(&payloads).unwrap(), &plan, &chan, &fft).unwrap();
        let a = run_link(&frame, &plan, &chan, &payloads, 5.0, &spec, &mut SimRng::new(9)).unwrap();
        let b = run_link(&frame, &plan, &chan, &payloads, 5.0, &spec, &mut SimRng::new(9)).unwrap();
        assert_eq!(a, b);
        let bad = run_link(&frame, &plan, &chan, &payloads, -20.0, &spec, &mut SimRng::new(9)).unwrap();
        assert!(bad.iter().all(|&e| e));
    }
}
