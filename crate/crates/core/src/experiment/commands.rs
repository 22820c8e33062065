use super::config::{Command, ExperimentConfig, TonePlanChoice};
use super::output::{to_csv, to_csv_with_header, CommandOutput, Row};
use super::runner::{run_jobs, FrameDiagnostics, Job, JobStats, RunSpec, Scenario, STREAM_CHANNEL, STREAM_PAYLOAD};
use crate::comms::{draw_payloads, symbols_per_tone, CodeSpec};
use crate::error::{Error, Result};
use crate::metrics::{ccdf, db, obr, operating_point};
use crate::numerics::{CMat, Complex64, SimRng};
use crate::precoders::{precode_pmp, PmpSettings, PrecoderConfig};
use crate::system::{build_pmp_problem, ChannelRealization, TargetPrecoder, TonePlan};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Block-error rate defining the SNR operating point.
pub const SER_TARGET: f64 = 0.01;

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(Error::config("threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(f),
    }
}

/// Results of one precoder.
#[derive(Debug, Clone)]
pub struct SeriesReport {
    pub label: String,
    pub precoder: PrecoderConfig,
    pub stats: JobStats,
}

impl SeriesReport {
    fn new(precoder: PrecoderConfig, stats: JobStats) -> Self {
        SeriesReport {
            label: precoder.label(),
            precoder,
            stats,
        }
    }

    /// `None` when the SER curve does not cross [`SER_TARGET`].
    pub fn operating_point_db(&self) -> Option<f64> {
        operating_point(&self.stats.ser, SER_TARGET).ok()
    }

    fn par_summary(&self) -> Result<Value> {
        Ok(json!({
            "label": self.label,
            "par_star_db": self.stats.par_star_db().ok(),
            "median_obr": self.stats.median_obr()?,
            "median_obr_db": self.stats.median_obr_db()?,
            "par_samples": self.stats.par.len(),
        }))
    }
}

fn scenario(cfg: &ExperimentConfig, plan: TonePlan, antennas: usize, taps: usize, id: u64) -> Scenario {
    Scenario {
        antennas,
        users: cfg.users,
        taps,
        plan,
        id,
    }
}

fn trace_csv(series: &[&SeriesReport], trace: bool) -> Result<Option<String>> {
    if !trace {
        return Ok(None);
    }
    #[derive(Serialize)]
    struct TraceRow<'a> {
        series_label: &'a str,
        frame: usize,
        sigma: f64,
        objective: f64,
    }
    let rows: Vec<TraceRow> = series
        .iter()
        .flat_map(|s| {
            s.stats.diagnostics.iter().map(|d: &FrameDiagnostics| TraceRow {
                series_label: &s.label,
                frame: d.frame,
                sigma: d.sigma,
                objective: d.objective,
            })
        })
        .collect();
    to_csv_with_header(&["series_label", "frame", "sigma", "objective"], &rows).map(Some)
}

/// PAR CCDF of every configured precoder.
#[derive(Debug, Clone)]
pub struct ParCcdfReport {
    pub seed: u64,
    pub frames: usize,
    pub grid_db: Vec<f64>,
    pub series: Vec<SeriesReport>,
    trace: bool,
}

pub fn par_ccdf(cfg: &ExperimentConfig, trace: bool) -> Result<ParCcdfReport> {
    let plan = cfg.validate(Command::ParCcdf)?;
    let frames = cfg.frames_for(Command::ParCcdf);
    let precoders = cfg.precoders_for(Command::ParCcdf);
    let jobs: Vec<Job> = precoders.iter().cloned().map(Job::from).collect();
    let spec = RunSpec {
        trace,
        ..RunSpec::par_only(frames)
    };
    let stats = run_jobs(cfg.seed, &scenario(cfg, plan, cfg.antennas, cfg.taps, 0), &jobs, &spec)?;
    Ok(ParCcdfReport {
        seed: cfg.seed,
        frames,
        grid_db: cfg.ccdf_grid_db.clone(),
        series: precoders.into_iter().zip(stats).map(|(p, s)| SeriesReport::new(p, s)).collect(),
        trace,
    })
}

impl ParCcdfReport {
    pub fn series(&self, label: &str) -> Option<&SeriesReport> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn output(&self) -> Result<CommandOutput> {
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for s in &self.series {
            let samples_db: Vec<f64> = s.stats.par.iter().map(|&p| db(p)).collect();
            for (x, y) in self.grid_db.iter().zip(ccdf(&samples_db, &self.grid_db)?) {
                rows.push(Row::new(*x, Some(y), s.label.clone()));
            }
            summary.push(s.par_summary()?);
        }
        Ok(CommandOutput {
            name: Command::ParCcdf.name(),
            rows,
            summary: json!({"command": "par_ccdf", "seed": self.seed, "frames": self.frames, "series": summary}),
            trace_csv: trace_csv(&self.series.iter().collect::<Vec<_>>(), self.trace)?,
        })
    }
}

/// SER curves of every configured precoder.
#[derive(Debug, Clone)]
pub struct SerSweepReport {
    pub seed: u64,
    pub frames: usize,
    pub series: Vec<SeriesReport>,
    trace: bool,
}

pub fn ser_sweep(cfg: &ExperimentConfig, trace: bool) -> Result<SerSweepReport> {
    let plan = cfg.validate(Command::SerSweep)?;
    let frames = cfg.frames_for(Command::SerSweep);
    let precoders = cfg.precoders_for(Command::SerSweep);
    let jobs: Vec<Job> = precoders.iter().cloned().map(Job::from).collect();
    let spec = RunSpec {
        frames,
        snr_db: cfg.snr_db.clone(),
        noiseless: true,
        max_block_errors: Some(cfg.max_block_errors),
        collect_par: false,
        trace,
    };
    let stats = run_jobs(cfg.seed, &scenario(cfg, plan, cfg.antennas, cfg.taps, 0), &jobs, &spec)?;
    Ok(SerSweepReport {
        seed: cfg.seed,
        frames,
        series: precoders.into_iter().zip(stats).map(|(p, s)| SeriesReport::new(p, s)).collect(),
        trace,
    })
}

impl SerSweepReport {
    pub fn series(&self, label: &str) -> Option<&SeriesReport> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn output(&self) -> Result<CommandOutput> {
        let rows = self
            .series
            .iter()
            .flat_map(|s| s.stats.ser.iter().map(|p| Row::new(p.snr_db, Some(p.rate()), s.label.clone())))
            .collect();
        let summary: Vec<Value> = self
            .series
            .iter()
            .map(|s| {
                json!({
                    "label": s.label,
                    "operating_point_db": s.operating_point_db(),
                    "noiseless_ser": s.stats.noiseless.map(|p| p.rate()),
                    "points": s.stats.ser,
                })
            })
            .collect();
        Ok(CommandOutput {
            name: Command::SerSweep.name(),
            rows,
            summary: json!({
                "command": "ser_sweep",
                "seed": self.seed,
                "frames": self.frames,
                "target_ser": SER_TARGET,
                "series": summary,
            }),
            trace_csv: trace_csv(&self.series.iter().collect::<Vec<_>>(), self.trace)?,
        })
    }
}

/// PMP over a λ grid and LS+clip over a target-PAR grid, against LS.
#[derive(Debug, Clone)]
pub struct TradeoffReport {
    pub seed: u64,
    pub frames: usize,
    pub ls: SeriesReport,
    /// `(λ, results)`.
    pub pmp: Vec<(f64, SeriesReport)>,
    /// `(target PAR in dB, results)`.
    pub clip: Vec<(f64, SeriesReport)>,
    trace: bool,
}

pub fn tradeoff(cfg: &ExperimentConfig, trace: bool) -> Result<TradeoffReport> {
    let plan = cfg.validate(Command::Tradeoff)?;
    let frames = cfg.frames_for(Command::Tradeoff);
    let lambdas = cfg.lambdas();
    let targets = cfg.clip_targets();
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let mut jobs: Vec<Job> = vec![PrecoderConfig::Ls {}.into()];
    jobs.extend(lambdas.iter().map(|&lambda| Job {
        precoder: PrecoderConfig::pmp(lambda, cfg.iterations),
        checkpoints: checkpoints.clone(),
    }));
    jobs.extend(targets.iter().map(|&t| Job::from(PrecoderConfig::LsClip { target_par_db: t })));
    let spec = RunSpec {
        frames,
        snr_db: cfg.snr_db.clone(),
        noiseless: false,
        max_block_errors: Some(cfg.max_block_errors),
        collect_par: true,
        trace,
    };
    let stats = run_jobs(cfg.seed, &scenario(cfg, plan, cfg.antennas, cfg.taps, 0), &jobs, &spec)?;
    let mut reports = jobs.into_iter().zip(stats).map(|(j, s)| SeriesReport::new(j.precoder, s));
    let ls = reports.next().expect("LS job is always present");
    let pmp = lambdas.iter().copied().zip(reports.by_ref().take(lambdas.len())).collect();
    let clip = targets.iter().copied().zip(reports).collect();
    Ok(TradeoffReport {
        seed: cfg.seed,
        frames,
        ls,
        pmp,
        clip,
        trace,
    })
}

impl TradeoffReport {
    pub fn output(&self) -> Result<CommandOutput> {
        let mut rows = Vec::new();
        let mut push_curves = |prefix: &str, points: &[(f64, SeriesReport)]| -> Result<()> {
            for (x, s) in points {
                rows.push(Row::new(*x, s.stats.par_star_db().ok(), format!("{prefix} PAR*")));
            }
            for (x, s) in points {
                rows.push(Row::new(*x, s.operating_point_db(), format!("{prefix} SNR@1%SER")));
            }
            for (x, s) in points {
                rows.push(Row::new(*x, s.stats.median_obr_db()?, format!("{prefix} OBR")));
            }
            let ks: Vec<usize> = points
                .first()
                .map(|(_, s)| s.stats.checkpoints.iter().map(|c| c.iterations).collect())
                .unwrap_or_default();
            for (i, k) in ks.iter().enumerate() {
                for (x, s) in points {
                    let c = &s.stats.checkpoints[i];
                    let m = crate::metrics::quantile(&c.obr, 0.5)?;
                    rows.push(Row::new(*x, (m > 0.0).then(|| db(m)), format!("{prefix} OBR K={k}")));
                }
            }
            Ok(())
        };
        push_curves("PMP", &self.pmp)?;
        push_curves("LS+clip", &self.clip)?;

        let entry = |key: &str, x: f64, s: &SeriesReport| -> Result<Value> {
            let by_k = s
                .stats
                .checkpoints
                .iter()
                .map(|c| {
                    let m = crate::metrics::quantile(&c.obr, 0.5)?;
                    Ok(json!({"K": c.iterations, "par_star_db": crate::metrics::par_star(&c.par).ok(), "median_obr_db": (m > 0.0).then(|| db(m))}))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut v = json!({
                key: x,
                "label": s.label,
                "par_star_db": s.stats.par_star_db().ok(),
                "operating_point_db": s.operating_point_db(),
                "median_obr_db": s.stats.median_obr_db()?,
            });
            if !by_k.is_empty() {
                v["checkpoints"] = Value::Array(by_k);
            }
            Ok(v)
        };
        let pmp = self.pmp.iter().map(|(l, s)| entry("lambda", *l, s)).collect::<Result<Vec<_>>>()?;
        let clip = self.clip.iter().map(|(t, s)| entry("target_par_db", *t, s)).collect::<Result<Vec<_>>>()?;
        let mut all: Vec<&SeriesReport> = vec![&self.ls];
        all.extend(self.pmp.iter().map(|(_, s)| s));
        Ok(CommandOutput {
            name: Command::Tradeoff.name(),
            rows,
            summary: json!({
                "command": "tradeoff",
                "seed": self.seed,
                "frames": self.frames,
                "ls": {
                    "par_star_db": self.ls.stats.par_star_db().ok(),
                    "operating_point_db": self.ls.operating_point_db(),
                },
                "pmp": pmp,
                "ls_clip": clip,
            }),
            trace_csv: trace_csv(&all, self.trace)?,
        })
    }
}

/// PAR* of each precoder for one `(N, T)` pair.
#[derive(Debug, Clone)]
pub struct AntennaCell {
    pub antennas: usize,
    pub taps: usize,
    pub series: Vec<SeriesReport>,
}

#[derive(Debug, Clone)]
pub struct AntennaSweepReport {
    pub seed: u64,
    pub frames: usize,
    pub cells: Vec<AntennaCell>,
    trace: bool,
}

pub fn antenna_sweep(cfg: &ExperimentConfig, trace: bool) -> Result<AntennaSweepReport> {
    let plan = cfg.validate(Command::AntennaSweep)?;
    let frames = cfg.frames_for(Command::AntennaSweep);
    let precoders = cfg.precoders_for(Command::AntennaSweep);
    let jobs: Vec<Job> = precoders.iter().cloned().map(Job::from).collect();
    let spec = RunSpec {
        trace,
        ..RunSpec::par_only(frames)
    };
    let mut cells = Vec::new();
    for (ti, &taps) in cfg.tap_list.iter().enumerate() {
        for (ni, &antennas) in cfg.antenna_list.iter().enumerate() {
            let id = (ti * cfg.antenna_list.len() + ni) as u64;
            let stats = run_jobs(cfg.seed, &scenario(cfg, plan.clone(), antennas, taps, id), &jobs, &spec)?;
            cells.push(AntennaCell {
                antennas,
                taps,
                series: precoders.iter().cloned().zip(stats).map(|(p, s)| SeriesReport::new(p, s)).collect(),
            });
        }
    }
    Ok(AntennaSweepReport {
        seed: cfg.seed,
        frames,
        cells,
        trace,
    })
}

impl AntennaSweepReport {
    pub fn cell(&self, antennas: usize, taps: usize) -> Option<&AntennaCell> {
        self.cells.iter().find(|c| c.antennas == antennas && c.taps == taps)
    }

    pub fn output(&self) -> Result<CommandOutput> {
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        let labels: Vec<String> = self.cells.first().map(|c| c.series.iter().map(|s| s.label.clone()).collect()).unwrap_or_default();
        let mut taps: Vec<usize> = self.cells.iter().map(|c| c.taps).collect();
        taps.dedup();
        for (i, label) in labels.iter().enumerate() {
            for &t in &taps {
                for cell in self.cells.iter().filter(|c| c.taps == t) {
                    rows.push(Row::new(cell.antennas as f64, cell.series[i].stats.par_star_db().ok(), format!("{label} T={t}")));
                }
            }
        }
        for cell in &self.cells {
            let series = cell.series.iter().map(SeriesReport::par_summary).collect::<Result<Vec<_>>>()?;
            summary.push(json!({"N": cell.antennas, "T": cell.taps, "series": series}));
        }
        let all: Vec<&SeriesReport> = self.cells.iter().flat_map(|c| c.series.iter()).collect();
        Ok(CommandOutput {
            name: Command::AntennaSweep.name(),
            rows,
            summary: json!({"command": "antenna_sweep", "seed": self.seed, "frames": self.frames, "cells": summary}),
            trace_csv: trace_csv(&all, self.trace)?,
        })
    }
}

/// A single PMP problem. Without `taps` the channel is drawn from `seed` as
/// in frame 0 of a sweep; without `symbols` so are the payload symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveInstance {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub antennas: Option<usize>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub taps_count: Option<usize>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub tones: Option<usize>,
    #[serde(default)]
    pub tone_plan: TonePlanChoice,
    /// `T × M × N` complex entries as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    /// One `M`-vector per active tone, as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(rename = "K", default = "default_iterations")]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_precoder: Option<TargetPrecoder>,
}

fn default_lambda() -> f64 {
    super::config::DEFAULT_LAMBDA
}

fn default_iterations() -> usize {
    super::config::DEFAULT_ITERATIONS
}

impl SolveInstance {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn channel(&self, plan: &TonePlan) -> Result<ChannelRealization> {
        let Some(taps) = &self.taps else {
            let (n, m, t) = (self.antennas.unwrap_or(100), self.users.unwrap_or(10), self.taps_count.unwrap_or(4));
            if m >= n {
                return Err(Error::config("M", format!("must be below N = {n}")));
            }
            return ChannelRealization::draw(&mut SimRng::derive(self.seed, &[STREAM_CHANNEL, 0, 0]), n, m, t, plan.len())
                .map_err(|e| Error::config("T", e.to_string()));
        };
        let m = taps.first().map(Vec::len).unwrap_or(0);
        let n = taps.first().and_then(|t| t.first()).map(Vec::len).unwrap_or(0);
        if m == 0 || n == 0 {
            return Err(Error::config("taps", "needs at least one non-empty tap"));
        }
        let expect = [(self.antennas, n, "N"), (self.users, m, "M"), (self.taps_count, taps.len(), "T")];
        for (given, actual, field) in expect {
            if given.is_some_and(|g| g != actual) {
                return Err(Error::config(field, format!("disagrees with the taps ({actual})")));
            }
        }
        let mats = taps
            .iter()
            .map(|tap| {
                if tap.len() != m || tap.iter().any(|row| row.len() != n) {
                    return Err(Error::config("taps", format!("every tap must be {m}x{n}")));
                }
                CMat::from_rows(m, n, tap.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelRealization::from_taps(mats, plan.len()).map_err(|e| Error::config("taps", e.to_string()))
    }

    fn symbols(&self, plan: &TonePlan, users: usize) -> Result<Vec<Vec<Complex64>>> {
        let Some(symbols) = &self.symbols else {
            let payloads = draw_payloads(
                &mut SimRng::derive(self.seed, &[STREAM_PAYLOAD, 0, 0]),
                plan.active().len(),
                users,
                &CodeSpec::default(),
            )?;
            return symbols_per_tone(&payloads);
        };
        if symbols.len() != plan.active().len() || symbols.iter().any(|s| s.len() != users) {
            return Err(Error::config(
                "symbols",
                format!("expected {} vectors of length {users}", plan.active().len()),
            ));
        }
        Ok(symbols.iter().map(|s| s.iter().map(|&[re, im]| Complex64::new(re, im)).collect()).collect())
    }
}

/// Outcome of a one-shot PMP solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub label: String,
    pub sigma: f64,
    pub lipschitz: f64,
    pub iterations: usize,
    pub objective: f64,
    pub residual_norm: f64,
    pub linf_tilde: f64,
    pub par_db: Vec<f64>,
    pub max_par_db: f64,
    pub obr_db: Option<f64>,
    /// Per-antenna time-domain samples as `[re, im]`.
    pub signal: Vec<Vec<[f64; 2]>>,
    #[serde(skip)]
    trace: Option<String>,
}

pub fn solve(instance: &SolveInstance, trace: bool) -> Result<SolveReport> {
    let plan = instance.tone_plan.resolve(instance.tones)?;
    let precoder = PrecoderConfig::Pmp {
        lambda: instance.lambda,
        iterations: instance.iterations,
        target_precoder: instance.target_precoder,
    };
    precoder.validate(plan.len())?;
    let chan = instance.channel(&plan)?;
    if chan.users() >= chan.antennas() {
        return Err(Error::config("M", format!("must be below N = {}", chan.antennas())));
    }
    let symbols = instance.symbols(&plan, chan.users())?;
    let settings = PmpSettings {
        target_precoder: instance.target_precoder,
        record_trace: trace,
        ..PmpSettings::new(instance.lambda, instance.iterations)
    };
    let out = precode_pmp(&symbols, &plan, &chan, &settings)?;
    let residual_norm = build_pmp_problem(&symbols, &plan, &chan, instance.target_precoder)?.residual_norm(out.frame.time())?;
    let linf_tilde = out.frame.time().linf_tilde();
    let par_db: Vec<f64> = out.frame.antenna_pars()?.into_iter().map(db).collect();
    let o = obr(out.frame.freq(), &plan)?;
    let time = out.frame.time();
    let signal = (0..time.antennas()).map(|n| time.antenna(n).iter().map(|v| [v.re, v.im]).collect()).collect();
    let trace = if trace {
        let mut buf = Vec::new();
        out.solver.write_trace_csv(&mut buf)?;
        Some(String::from_utf8(buf).expect("csv output is UTF-8"))
    } else {
        None
    };
    Ok(SolveReport {
        label: precoder.label(),
        sigma: out.sigma,
        lipschitz: crate::solver::lipschitz_from_sigma(out.sigma),
        iterations: out.solver.iterations,
        objective: instance.lambda * linf_tilde + residual_norm * residual_norm,
        residual_norm,
        linf_tilde,
        max_par_db: par_db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        par_db,
        obr_db: (o > 0.0).then(|| db(o)),
        signal,
        trace,
    })
}

impl SolveReport {
    /// Per-antenna PAR rows plus the full report as the summary.
    pub fn output(&self) -> Result<CommandOutput> {
        let rows: Vec<Row> = self.par_db.iter().enumerate().map(|(n, &p)| Row::new(n as f64, Some(p), "PAR")).collect();
        to_csv(&rows)?;
        Ok(CommandOutput {
            name: "solve",
            rows,
            summary: serde_json::to_value(self)?,
            trace_csv: self.trace.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"N": 8, "M": 2, "T": 2, "W": 16, "tone_plan": "all_active", "seed": 3, "frames": 13,
                "precoders": [{"kind": "LS"}, {"kind": "MF"}, {"kind": "LS_CLIP", "target_par_db": 4},
                              {"kind": "PMP", "lambda": 0.25, "K": 60}],
                "snr_db": [0, 5, 10, 15, 20, 25], "lambdas": [0.01, 1], "clip_targets_db": [4, 6],
                "K": 60, "checkpoints": [10], "N_list": [4, 8], "T_list": [1, 2],
                "ccdf_grid_db": [0, 2, 4, 6, 8]}"#,
        )
        .unwrap()
    }

    #[test]
    fn par_ccdf_output_is_reproducible() {
        let cfg = small();
        let a = par_ccdf(&cfg, false).unwrap().output().unwrap();
        let b = par_ccdf(&cfg, false).unwrap().output().unwrap();
        assert_eq!(a.csv().unwrap(), b.csv().unwrap());
        assert_eq!(a.rows.len(), 4 * 5);
        assert!(a.csv().unwrap().starts_with("x_value,y_value,series_label\n"));
        assert_eq!(a.summary["series"][0]["median_obr"], 0.0);
        assert!(a.trace_csv.is_none());
        let clip = a.rows.iter().filter(|r| r.series_label == "LS+clip(4dB)");
        assert!(clip.filter(|r| r.x_value >= 4.0).all(|r| r.y_value == Some(0.0)));
    }

    #[test]
    fn ser_sweep_reports_points_and_noiseless_rate() {
        let cfg = ExperimentConfig {
            precoders: Some(vec![PrecoderConfig::Ls {}]),
            ..small()
        };
        let report = ser_sweep(&cfg, false).unwrap();
        let ls = report.series("LS").unwrap();
        assert_eq!(ls.stats.ser.len(), 6);
        assert_eq!(ls.stats.noiseless.unwrap().errors, 0);
        let out = report.output().unwrap();
        assert_eq!(out.rows.len(), 6);
        assert_eq!(out.summary["series"][0]["noiseless_ser"], 0.0);
    }

    #[test]
    fn tradeoff_tables_and_missing_points() {
        let cfg = ExperimentConfig {
            snr_db: vec![-5.0, -4.0],
            frames: Some(8),
            ..small()
        };
        let report = tradeoff(&cfg, true).unwrap();
        assert_eq!(report.pmp.len(), 2);
        assert_eq!(report.clip.len(), 2);
        let out = report.output().unwrap();
        // PAR*, SNR and OBR rows for both families plus one checkpoint OBR row per λ
        assert_eq!(out.rows.len(), 2 * 3 + 2 + 2 * 3);
        assert!(out.rows.iter().filter(|r| r.series_label.contains("SNR")).all(|r| r.y_value.is_none()));
        assert!(out.csv().unwrap().contains("0.01,,PMP SNR@1%SER\n"));
        let trace = out.trace_csv.unwrap();
        assert!(trace.starts_with("series_label,frame,sigma,objective\n"));
        assert_eq!(trace.lines().count(), 1 + 2 * 8);
    }

    #[test]
    fn antenna_sweep_covers_the_grid() {
        let cfg = ExperimentConfig {
            precoders: Some(vec![PrecoderConfig::Ls {}]),
            frames: Some(20),
            ..small()
        };
        let report = antenna_sweep(&cfg, false).unwrap();
        assert_eq!(report.cells.len(), 4);
        assert!(report.cell(4, 1).is_some());
        let out = report.output().unwrap();
        assert_eq!(out.rows.len(), 4);
        assert_eq!(out.rows[0].series_label, "LS T=1");
        // 4 antennas x 20 frames is below the PAR* minimum; 8 x 20 is not
        assert_eq!((out.rows[0].x_value, out.rows[0].y_value), (4.0, None));
        assert!(out.rows[1].y_value.is_some());
    }

    #[test]
    fn solve_matches_sweep_frame_zero() {
        let inst = SolveInstance::from_json(
            r#"{"N": 8, "M": 2, "T": 2, "W": 16, "tone_plan": "all_active", "seed": 3, "lambda": 0.25, "K": 60}"#,
        )
        .unwrap();
        let report = solve(&inst, true).unwrap();
        let cfg = ExperimentConfig {
            precoders: Some(vec![PrecoderConfig::pmp(0.25, 60)]),
            frames: Some(1),
            ..small()
        };
        let sweep = par_ccdf(&cfg, false).unwrap();
        let pars: Vec<f64> = sweep.series[0].stats.par.iter().map(|&p| db(p)).collect();
        assert_eq!(report.par_db, pars);
        assert_eq!(report.signal.len(), 8);
        let out = report.output().unwrap();
        assert_eq!(out.trace_csv.unwrap().lines().count(), 61);

        let explicit = SolveInstance {
            taps: Some(vec![vec![vec![[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]]]),
            symbols: Some(vec![vec![[1.0, 0.0]]; 16]),
            antennas: None,
            users: None,
            taps_count: None,
            ..inst.clone()
        };
        let r = solve(&explicit, false).unwrap();
        assert_eq!(r.signal.len(), 3);
        assert!(r.trace.is_none());

        let wrong = SolveInstance {
            users: Some(2),
            ..explicit
        };
        assert!(matches!(solve(&wrong, false), Err(Error::Config { field, .. }) if field == "M"));
    }
}
