use crate::comms::{draw_payloads, run_link, symbols_per_tone, CodeSpec};
use crate::error::Result;
use crate::metrics::{db, obr, par_star, quantile, SerPoint};
use crate::numerics::{Fft, SimRng};
use crate::precoders::{precode, precode_pmp, PmpSettings, PrecoderConfig, TxFrame};
use crate::system::{ChannelRealization, TonePlan};
use rayon::prelude::*;
use serde::Serialize;

/// Seed stream tags; sub-seeds are `derive(master, [stream, scenario, frame, ..])`.
pub const STREAM_CHANNEL: u64 = 0;
pub const STREAM_PAYLOAD: u64 = 1;
pub const STREAM_NOISE: u64 = 2;

/// Frames simulated concurrently between early-abort checks. Fixed so that
/// results do not depend on the worker count.
const BATCH: usize = 16;

/// System dimensions of one experiment cell.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub antennas: usize,
    pub users: usize,
    pub taps: usize,
    pub plan: TonePlan,
    /// Distinguishes the cells of a multi-cell sweep in the seed path.
    pub id: u64,
}

/// One precoder to run on every frame, with optional PMP checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub precoder: PrecoderConfig,
    pub checkpoints: Vec<usize>,
}

impl From<PrecoderConfig> for Job {
    fn from(precoder: PrecoderConfig) -> Self {
        Job {
            precoder,
            checkpoints: Vec::new(),
        }
    }
}

/// What to measure for every frame.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub frames: usize,
    pub snr_db: Vec<f64>,
    /// Adds an SER point without noise.
    pub noiseless: bool,
    pub max_block_errors: Option<u64>,
    /// Precode every frame even when all SER points have stopped.
    pub collect_par: bool,
    /// Keep per-frame solver diagnostics.
    pub trace: bool,
}

impl RunSpec {
    /// PAR and OBR only.
    pub fn par_only(frames: usize) -> Self {
        RunSpec {
            frames,
            snr_db: Vec::new(),
            noiseless: false,
            max_block_errors: None,
            collect_par: true,
            trace: false,
        }
    }
}

/// PAR and OBR samples of the frame produced after `iterations` FITRA steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckpointStats {
    pub iterations: usize,
    pub par: Vec<f64>,
    pub obr: Vec<f64>,
}

/// Solver diagnostics of one PMP frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameDiagnostics {
    pub frame: usize,
    pub sigma: f64,
    pub objective: f64,
}

/// Accumulated measurements of one precoder.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JobStats {
    /// Linear PAR, one sample per antenna per frame.
    pub par: Vec<f64>,
    /// Linear OBR, one sample per frame.
    pub obr: Vec<f64>,
    pub checkpoints: Vec<CheckpointStats>,
    /// Aligned with the SNR grid.
    pub ser: Vec<SerPoint>,
    pub noiseless: Option<SerPoint>,
    pub diagnostics: Vec<FrameDiagnostics>,
}

impl JobStats {
    pub fn par_star_db(&self) -> Result<f64> {
        par_star(&self.par)
    }

    pub fn median_obr(&self) -> Result<f64> {
        quantile(&self.obr, 0.5)
    }

    /// `None` when the median OBR is exactly zero.
    pub fn median_obr_db(&self) -> Result<Option<f64>> {
        let m = self.median_obr()?;
        Ok((m > 0.0).then(|| db(m)))
    }
}

/// A job's results for one frame; `None` marks SER points that were skipped.
struct FrameResult {
    par: Vec<f64>,
    obr: Option<f64>,
    checkpoints: Vec<(Vec<f64>, f64)>,
    errors: Vec<Option<u64>>,
    noiseless: Option<u64>,
    diagnostics: Option<(f64, f64)>,
}

/// Runs every job on `spec.frames` frames of `scenario`.
///
/// All jobs see the same channel, payload and noise realizations per frame.
/// An SER point stops collecting once it reaches `max_block_errors`; the
/// check happens between fixed-size batches of frames.
pub fn run_jobs(master: u64, scenario: &Scenario, jobs: &[Job], spec: &RunSpec) -> Result<Vec<JobStats>> {
    let code = CodeSpec::default();
    let snrs = spec.snr_db.len();
    let mut stats: Vec<JobStats> = jobs
        .iter()
        .map(|job| JobStats {
            checkpoints: job
                .checkpoints
                .iter()
                .map(|&k| CheckpointStats {
                    iterations: k,
                    ..Default::default()
                })
                .collect(),
            ser: spec.snr_db.iter().map(|&snr_db| SerPoint { snr_db, errors: 0, trials: 0 }).collect(),
            noiseless: spec.noiseless.then_some(SerPoint {
                snr_db: f64::INFINITY,
                errors: 0,
                trials: 0,
            }),
            ..Default::default()
        })
        .collect();

    let mut start = 0;
    while start < spec.frames {
        let end = (start + BATCH).min(spec.frames);
        let open = |p: &SerPoint| spec.max_block_errors.is_none_or(|cap| p.errors < cap);
        // (per SNR point, noiseless) still collecting
        let active: Vec<(Vec<bool>, bool)> = stats
            .iter()
            .map(|s| (s.ser.iter().map(open).collect(), s.noiseless.as_ref().is_some_and(open)))
            .collect();
        let needed: Vec<bool> = active
            .iter()
            .map(|(ser, clean)| spec.collect_par || *clean || ser.iter().any(|&a| a))
            .collect();
        if !needed.iter().any(|&n| n) {
            break;
        }
        let batch: Vec<Vec<Option<FrameResult>>> = (start..end)
            .into_par_iter()
            .map(|frame| simulate_frame(master, scenario, jobs, spec, &code, frame, &active, &needed))
            .collect::<Result<_>>()?;
        for (offset, results) in batch.into_iter().enumerate() {
            for (s, r) in stats.iter_mut().zip(results) {
                let Some(r) = r else { continue };
                s.par.extend(r.par);
                s.obr.extend(r.obr);
                for (c, (par, o)) in s.checkpoints.iter_mut().zip(r.checkpoints) {
                    c.par.extend(par);
                    c.obr.push(o);
                }
                for (point, e) in s.ser.iter_mut().zip(r.errors) {
                    if let Some(e) = e {
                        point.errors += e;
                        point.trials += scenario.users as u64;
                    }
                }
                if let (Some(point), Some(e)) = (s.noiseless.as_mut(), r.noiseless) {
                    point.errors += e;
                    point.trials += scenario.users as u64;
                }
                if let Some((sigma, objective)) = r.diagnostics {
                    s.diagnostics.push(FrameDiagnostics {
                        frame: start + offset,
                        sigma,
                        objective,
                    });
                }
            }
        }
        start = end;
    }
    debug_assert!(stats.iter().all(|s| s.ser.len() == snrs));
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn simulate_frame(
    master: u64,
    scenario: &Scenario,
    jobs: &[Job],
    spec: &RunSpec,
    code: &CodeSpec,
    frame: usize,
    active: &[(Vec<bool>, bool)],
    needed: &[bool],
) -> Result<Vec<Option<FrameResult>>> {
    let path = |stream: u64| [stream, scenario.id, frame as u64];
    let plan = &scenario.plan;
    let chan = ChannelRealization::draw(
        &mut SimRng::derive(master, &path(STREAM_CHANNEL)),
        scenario.antennas,
        scenario.users,
        scenario.taps,
        plan.len(),
    )?;
    let payloads = draw_payloads(
        &mut SimRng::derive(master, &path(STREAM_PAYLOAD)),
        plan.active().len(),
        scenario.users,
        code,
    )?;
    let symbols = symbols_per_tone(&payloads)?;
    let fft = Fft::new(plan.len())?;

    jobs.iter()
        .zip(active.iter().zip(needed))
        .map(|(job, ((ser_active, clean_active), &needed))| {
            if !needed {
                return Ok(None);
            }
            let (tx, checkpoints, diagnostics) = transmit(job, &symbols, plan, &chan, &fft, spec.trace)?;
            let errors = spec
                .snr_db
                .iter()
                .zip(ser_active)
                .enumerate()
                .map(|(i, (&snr, &on))| {
                    if !on {
                        return Ok(None);
                    }
                    let mut noise = SimRng::derive(master, &[STREAM_NOISE, scenario.id, frame as u64, i as u64]);
                    let flags = run_link(&tx, plan, &chan, &payloads, snr, code, &mut noise)?;
                    Ok(Some(flags.iter().filter(|&&e| e).count() as u64))
                })
                .collect::<Result<Vec<_>>>()?;
            let noiseless = if *clean_active {
                let flags = run_link(&tx, plan, &chan, &payloads, f64::INFINITY, code, &mut SimRng::new(0))?;
                Some(flags.iter().filter(|&&e| e).count() as u64)
            } else {
                None
            };
            let (par, obr_value) = if spec.collect_par {
                (tx.antenna_pars()?, Some(obr(tx.freq(), plan)?))
            } else {
                (Vec::new(), None)
            };
            let checkpoints = checkpoints
                .iter()
                .map(|f| Ok((f.antenna_pars()?, obr(f.freq(), plan)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(FrameResult {
                par,
                obr: obr_value,
                checkpoints,
                errors,
                noiseless,
                diagnostics,
            }))
        })
        .collect()
}

type Transmission = (TxFrame, Vec<TxFrame>, Option<(f64, f64)>);

fn transmit(
    job: &Job,
    symbols: &[Vec<crate::numerics::Complex64>],
    plan: &TonePlan,
    chan: &ChannelRealization,
    fft: &Fft,
    trace: bool,
) -> Result<Transmission> {
    match job.precoder {
        PrecoderConfig::Pmp {
            lambda,
            iterations,
            target_precoder,
        } if trace || !job.checkpoints.is_empty() => {
            let settings = PmpSettings {
                target_precoder,
                checkpoints: job.checkpoints.clone(),
                record_trace: trace,
                ..PmpSettings::new(lambda, iterations)
            };
            let out = precode_pmp(symbols, plan, chan, &settings)?;
            let diagnostics = trace.then(|| {
                let objective = out.solver.objective.as_ref().and_then(|o| o.last().copied()).unwrap_or(f64::NAN);
                (out.sigma, objective)
            });
            let mut frames = Vec::with_capacity(job.checkpoints.len());
            for &k in &job.checkpoints {
                let f = out
                    .checkpoints
                    .iter()
                    .find(|(at, _)| *at == k)
                    .map(|(_, f)| f.clone())
                    .unwrap_or_else(|| out.frame.clone());
                frames.push(f);
            }
            Ok((out.frame, frames, diagnostics))
        }
        ref other => {
            if !job.checkpoints.is_empty() {
                return Err(crate::error::Error::config("checkpoints", "only PMP jobs have checkpoints"));
            }
            Ok((precode(other, symbols, plan, chan, fft)?, Vec::new(), None))
        }
    }
}
