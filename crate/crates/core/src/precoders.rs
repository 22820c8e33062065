//! Transmit-signal generators: least squares (zero forcing), matched filter,
//! least squares followed by per-antenna clipping, and the joint
//! precoding/PAR-reduction program solved with FITRA.

use crate::error::{Error, Result};
use crate::metrics::{db, par};
use crate::numerics::{pinv_rows, CMat, Complex64, Fft, PowerMethod};
use crate::solver::{fitra, LinfLsProblem, SolveOptions, SolverResult};
use crate::system::{build_pmp_problem, ChannelRealization, FreqFrame, StackedSignal, TargetPrecoder, TonePlan};
use serde::{Deserialize, Serialize};

/// One precoder and its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PrecoderConfig {
    #[serde(rename = "LS")]
    Ls {},
    #[serde(rename = "MF")]
    Mf {},
    #[serde(rename = "LS_CLIP")]
    LsClip { target_par_db: f64 },
    #[serde(rename = "PMP")]
    Pmp {
        lambda: f64,
        #[serde(rename = "K")]
        iterations: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_precoder: Option<TargetPrecoder>,
    },
}

impl PrecoderConfig {
    pub fn pmp(lambda: f64, iterations: usize) -> Self {
        PrecoderConfig::Pmp {
            lambda,
            iterations,
            target_precoder: None,
        }
    }

    /// Checks the settings against a frame of `tones` tones.
    pub fn validate(&self, tones: usize) -> Result<()> {
        match *self {
            PrecoderConfig::Ls {} | PrecoderConfig::Mf {} => Ok(()),
            PrecoderConfig::LsClip { target_par_db } => {
                let max = db(2.0 * tones as f64);
                if !(0.0..=max).contains(&target_par_db) {
                    return Err(Error::config("target_par_db", format!("must lie in [0, {max:.3}] dB")));
                }
                Ok(())
            }
            PrecoderConfig::Pmp { lambda, iterations, .. } => {
                if !(lambda >= 0.0) || !lambda.is_finite() {
                    return Err(Error::config("lambda", "must be finite and nonnegative"));
                }
                if iterations == 0 {
                    return Err(Error::config("K", "must be at least 1"));
                }
                Ok(())
            }
        }
    }

    /// Series label used in result files.
    pub fn label(&self) -> String {
        match self {
            PrecoderConfig::Ls {} => "LS".into(),
            PrecoderConfig::Mf {} => "MF".into(),
            PrecoderConfig::LsClip { target_par_db } => format!("LS+clip({target_par_db}dB)"),
            PrecoderConfig::Pmp {
                lambda,
                iterations,
                target_precoder,
            } => match target_precoder {
                None => format!("PMP(lambda={lambda},K={iterations})"),
                Some(t) => format!("PMP(lambda={lambda},K={iterations},target={})", target_label(*t)),
            },
        }
    }
}

fn target_label(t: TargetPrecoder) -> &'static str {
    match t {
        TargetPrecoder::PseudoInverse => "pinv",
        TargetPrecoder::MatchedFilter => "mf",
    }
}

/// A precoded OFDM symbol before power normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    time: StackedSignal,
    freq: FreqFrame,
    power: f64,
    users: usize,
    gains: Vec<f64>,
}

impl TxFrame {
    /// Builds the frame from per-tone vectors; the time view is derived.
    ///
    /// `gains[i * M + m]` is user `m`'s effective scalar gain on the `i`-th
    /// active tone before normalization.
    pub fn from_freq(freq: FreqFrame, fft: &Fft, users: usize, gains: Vec<f64>) -> Result<Self> {
        let time = freq.to_time(fft)?;
        Ok(TxFrame {
            power: freq.power(),
            time,
            freq,
            users,
            gains,
        })
    }

    /// Builds the frame from per-antenna signals; the tone view is derived.
    pub fn from_time(time: StackedSignal, fft: &Fft, users: usize, gains: Vec<f64>) -> Result<Self> {
        let freq = time.to_freq(fft)?;
        Ok(TxFrame {
            power: freq.power(),
            time,
            freq,
            users,
            gains,
        })
    }

    pub fn time(&self) -> &StackedSignal {
        &self.time
    }

    pub fn freq(&self) -> &FreqFrame {
        &self.freq
    }

    /// Transmit power `P` before normalization.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Effective gain seen by `user` on the `i`-th active tone after
    /// scaling the frame to unit power.
    pub fn receiver_gain(&self, active_index: usize, user: usize) -> f64 {
        self.gains[active_index * self.users + user] / self.power.sqrt()
    }

    /// PAR of every antenna, linear.
    pub fn antenna_pars(&self) -> Result<Vec<f64>> {
        (0..self.time.antennas()).map(|n| par(self.time.antenna(n))).collect()
    }
}

fn check_symbols(symbols: &[Vec<Complex64>], plan: &TonePlan, chan: &ChannelRealization) -> Result<()> {
    if plan.len() != chan.tones() {
        return Err(Error::dim(format!("plan has {} tones, channel {}", plan.len(), chan.tones())));
    }
    if symbols.len() != plan.active().len() || symbols.iter().any(|s| s.len() != chan.users()) {
        return Err(Error::dim(format!(
            "expected {} symbol vectors of length {}",
            plan.active().len(),
            chan.users()
        )));
    }
    Ok(())
}

fn linear_frame(
    symbols: &[Vec<Complex64>],
    plan: &TonePlan,
    chan: &ChannelRealization,
    fft: &Fft,
    precoder: impl Fn(usize, &CMat) -> Result<(CMat, Vec<f64>)>,
) -> Result<TxFrame> {
    check_symbols(symbols, plan, chan)?;
    let mut freq = FreqFrame::zeros(chan.antennas(), plan.len());
    let mut gains = Vec::with_capacity(symbols.len() * chan.users());
    for (s, &bin) in symbols.iter().zip(plan.active()) {
        let (g, tone_gains) = precoder(bin, chan.tone(bin))?;
        freq.tone_mut(bin).copy_from_slice(&g.mul_vec(s)?);
        gains.extend(tone_gains);
    }
    TxFrame::from_freq(freq, fft, chan.users(), gains)
}

fn pinv_at(bin: usize, h: &CMat) -> Result<CMat> {
    pinv_rows(h).map_err(|e| match e {
        Error::Singular { .. } => Error::Singular {
            context: Some(format!("tone {bin}")),
        },
        other => other,
    })
}

/// `‖h_m‖²` for every row of `h`.
fn row_energies(h: &CMat) -> Vec<f64> {
    (0..h.rows()).map(|r| h.row(r).iter().map(|v| v.norm_sqr()).sum()).collect()
}

/// `x_w = H_w^† s_w` on active tones, silence elsewhere.
pub fn precode_ls(symbols: &[Vec<Complex64>], plan: &TonePlan, chan: &ChannelRealization, fft: &Fft) -> Result<TxFrame> {
    linear_frame(symbols, plan, chan, fft, |bin, h| Ok((pinv_at(bin, h)?, vec![1.0; h.rows()])))
}

/// `x_w = H_w^H s_w` on active tones, silence elsewhere.
pub fn precode_mf(symbols: &[Vec<Complex64>], plan: &TonePlan, chan: &ChannelRealization, fft: &Fft) -> Result<TxFrame> {
    linear_frame(symbols, plan, chan, fft, |_, h| Ok((h.conj_transpose(), row_energies(h))))
}

/// Least squares followed by clipping the real and imaginary parts of each
/// antenna at the gentlest level whose PAR meets `target_par_db`.
pub fn precode_ls_clip(
    symbols: &[Vec<Complex64>],
    plan: &TonePlan,
    chan: &ChannelRealization,
    fft: &Fft,
    target_par_db: f64,
) -> Result<TxFrame> {
    let ls = precode_ls(symbols, plan, chan, fft)?;
    let target = 10f64.powf(target_par_db / 10.0);
    let mut time = ls.time.clone();
    for n in 0..time.antennas() {
        clip_to_par(time.antenna_mut(n), target);
    }
    TxFrame::from_time(time, fft, chan.users(), ls.gains)
}

/// Clips `samples` in place at the largest level `α` with
/// `PAR(trunc_α(samples)) ≤ target` (linear); returns `α`.
pub fn clip_to_par(samples: &mut [Complex64], target: f64) -> f64 {
    let peak = samples.iter().map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max);
    let clipped = |a: f64| -> Vec<Complex64> {
        samples
            .iter()
            .map(|v| Complex64::new(v.re.clamp(-a, a), v.im.clamp(-a, a)))
            .collect()
    };
    let meets = |a: f64| par(&clipped(a)).map_or(false, |p| p <= target);
    if peak == 0.0 || meets(peak) {
        return peak;
    }
    let (mut lo, mut hi) = (0.0, peak);
    let mut best = None;
    while hi - lo > 1e-13 * peak {
        let mid = 0.5 * (lo + hi);
        if meets(mid) {
            lo = mid;
            best = Some(mid);
        } else {
            hi = mid;
        }
    }
    let alpha = best.unwrap_or(lo);
    if alpha > 0.0 {
        samples.copy_from_slice(&clipped(alpha));
    }
    alpha
}

/// Settings for [`precode_pmp`].
#[derive(Debug, Clone)]
pub struct PmpSettings {
    pub lambda: f64,
    pub iterations: usize,
    pub target_precoder: Option<TargetPrecoder>,
    pub power_method: PowerMethod,
    /// Iterations at which intermediate frames are also returned.
    pub checkpoints: Vec<usize>,
    /// Keep the per-iteration objective and truncation level.
    pub record_trace: bool,
}

impl PmpSettings {
    pub fn new(lambda: f64, iterations: usize) -> Self {
        PmpSettings {
            lambda,
            iterations,
            target_precoder: None,
            power_method: PowerMethod::default(),
            checkpoints: Vec::new(),
            record_trace: false,
        }
    }
}

/// Final frame plus the frames at requested checkpoints.
#[derive(Debug, Clone)]
pub struct PmpOutcome {
    pub frame: TxFrame,
    pub checkpoints: Vec<(usize, TxFrame)>,
    /// Largest singular value estimate of the constraint operator.
    pub sigma: f64,
    /// Solver diagnostics; `x` holds the real embedding of the final frame.
    pub solver: SolverResult,
}

/// Solves the relaxed joint precoding program
/// `min λ‖ā‖∞̃ + ‖b̄ − C̄ā‖₂²` with FITRA on its real embedding.
pub fn precode_pmp(
    symbols: &[Vec<Complex64>],
    plan: &TonePlan,
    chan: &ChannelRealization,
    settings: &PmpSettings,
) -> Result<PmpOutcome> {
    check_symbols(symbols, plan, chan)?;
    let problem = build_pmp_problem(symbols, plan, chan, settings.target_precoder)?;
    let real = problem.to_real();
    let sigma = crate::numerics::sigma_max(&real.op, settings.power_method)?;
    let lip = crate::solver::lipschitz_from_sigma(sigma);
    let ls = LinfLsProblem::new(real.op, real.target, settings.lambda, lip)?;
    let mut opts = SolveOptions::iterations(settings.iterations).with_checkpoints(settings.checkpoints.iter().copied());
    opts.record_trace = settings.record_trace;
    let mut result = fitra(&ls, &opts)?;

    let gains: Vec<f64> = match settings.target_precoder {
        Some(TargetPrecoder::MatchedFilter) => plan.active().iter().flat_map(|&w| row_energies(chan.tone(w))).collect(),
        _ => vec![1.0; plan.active().len() * chan.users()],
    };
    let fft = problem.operator().fft();
    let to_frame = |x: &[f64]| TxFrame::from_time(problem.to_complex(x)?, fft, chan.users(), gains.clone());
    let checkpoints = result
        .checkpoints
        .iter()
        .map(|(k, x)| Ok((*k, to_frame(x)?)))
        .collect::<Result<Vec<_>>>()?;
    result.checkpoints.clear();
    Ok(PmpOutcome {
        frame: to_frame(&result.x)?,
        checkpoints,
        sigma,
        solver: result,
    })
}

/// Dispatches on the configured precoder kind.
pub fn precode(
    config: &PrecoderConfig,
    symbols: &[Vec<Complex64>],
    plan: &TonePlan,
    chan: &ChannelRealization,
    fft: &Fft,
) -> Result<TxFrame> {
    config.validate(plan.len())?;
    match *config {
        PrecoderConfig::Ls {} => precode_ls(symbols, plan, chan, fft),
        PrecoderConfig::Mf {} => precode_mf(symbols, plan, chan, fft),
        PrecoderConfig::LsClip { target_par_db } => precode_ls_clip(symbols, plan, chan, fft, target_par_db),
        PrecoderConfig::Pmp {
            lambda,
            iterations,
            target_precoder,
        } => {
            let settings = PmpSettings {
                target_precoder,
                ..PmpSettings::new(lambda, iterations)
            };
            Ok(precode_pmp(symbols, plan, chan, &settings)?.frame)
        }
    }
}
