//! The matrix-free constraint operator `C̄` of the joint precoding problem.
//!
//! `C̄` maps the stacked time-domain antenna signals `ā` (length `N·W`) to
//! the stacked constraint outputs: `H_w x_w` for every active tone (ascending
//! `w`, `M` entries each) followed by `x_w` for every inactive tone
//! (ascending `w`, `N` entries each), where `x_w` comes from the unitary DFT
//! of each antenna signal and the antenna-to-tone re-ordering.

use super::channel::ChannelRealization;
use super::frame::{transpose_into, StackedSignal};
use super::tones::TonePlan;
use crate::error::{Error, Result};
use crate::numerics::{pinv_rows, Complex64, Fft, LinearOperator};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex linear map `C̄` and its adjoint `C̄^H`.
#[derive(Debug, Clone)]
pub struct PmpOperator<'a> {
    plan: &'a TonePlan,
    chan: &'a ChannelRealization,
    fft: Fft,
    scale: f64,
    scratch: RefCell<Scratch>,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    spectra: Vec<Complex64>,
    tones: Vec<Complex64>,
    input: Vec<Complex64>,
    output: Vec<Complex64>,
}

impl<'a> PmpOperator<'a> {
    pub fn new(plan: &'a TonePlan, chan: &'a ChannelRealization) -> Result<Self> {
        if plan.len() != chan.tones() {
            return Err(Error::dim(format!(
                "tone plan has {} tones but channel has {}",
                plan.len(),
                chan.tones()
            )));
        }
        Ok(PmpOperator {
            plan,
            chan,
            fft: Fft::new(plan.len())?,
            scale: 1.0 / (plan.len() as f64).sqrt(),
            scratch: RefCell::new(Scratch::default()),
        })
    }

    pub fn plan(&self) -> &TonePlan {
        self.plan
    }

    pub fn channel(&self) -> &ChannelRealization {
        self.chan
    }

    pub fn fft(&self) -> &Fft {
        &self.fft
    }

    /// Output length `M|𝒯| + N|𝒯ᶜ|`.
    pub fn rows(&self) -> usize {
        self.chan.users() * self.plan.active().len() + self.chan.antennas() * self.plan.inactive().len()
    }

    /// Input length `N·W`.
    pub fn cols(&self) -> usize {
        self.chan.antennas() * self.plan.len()
    }

    /// `b = C̄ ā`.
    pub fn apply(&self, a: &[Complex64], b: &mut [Complex64]) -> Result<()> {
        self.check(a.len(), b.len())?;
        let mut scratch = self.scratch.borrow_mut();
        let Scratch { spectra, tones, .. } = &mut *scratch;
        self.apply_unchecked(a, b, spectra, tones);
        Ok(())
    }

    /// `ā = C̄^H b`.
    pub fn adjoint(&self, b: &[Complex64], a: &mut [Complex64]) -> Result<()> {
        self.check(a.len(), b.len())?;
        let mut scratch = self.scratch.borrow_mut();
        self.adjoint_unchecked(b, a, &mut scratch.tones);
        Ok(())
    }

    fn apply_unchecked(&self, a: &[Complex64], b: &mut [Complex64], spectra: &mut Vec<Complex64>, x: &mut Vec<Complex64>) {
        let (n, m, w) = (self.chan.antennas(), self.chan.users(), self.plan.len());
        spectra.clear();
        spectra.extend_from_slice(a);
        for chunk in spectra.chunks_mut(w) {
            self.fft.forward(chunk).expect("chunk length equals the transform length");
        }
        x.resize(n * w, ZERO);
        transpose_into(spectra, n, w, x);

        let (data, shaping) = b.split_at_mut(m * self.plan.active().len());
        for (out, &bin) in data.chunks_mut(m).zip(self.plan.active()) {
            self.chan.tone(bin).mul_vec_into(&x[bin * n..(bin + 1) * n], out);
        }
        for (out, &bin) in shaping.chunks_mut(n).zip(self.plan.inactive()) {
            out.copy_from_slice(&x[bin * n..(bin + 1) * n]);
        }
        b.iter_mut().for_each(|v| *v *= self.scale);
    }

    fn adjoint_unchecked(&self, b: &[Complex64], a: &mut [Complex64], x: &mut Vec<Complex64>) {
        let (n, m, w) = (self.chan.antennas(), self.chan.users(), self.plan.len());
        x.clear();
        x.resize(n * w, ZERO);
        let (data, shaping) = b.split_at(m * self.plan.active().len());
        for (bi, &bin) in data.chunks(m).zip(self.plan.active()) {
            self.chan.tone(bin).adjoint_mul_vec_into(bi, &mut x[bin * n..(bin + 1) * n]);
        }
        for (bi, &bin) in shaping.chunks(n).zip(self.plan.inactive()) {
            x[bin * n..(bin + 1) * n].copy_from_slice(bi);
        }
        transpose_into(x, w, n, a);
        for chunk in a.chunks_mut(w) {
            self.fft.backward(chunk).expect("chunk length equals the transform length");
            chunk.iter_mut().for_each(|v| *v *= self.scale);
        }
    }

    /// `[Re b; Im b] = C̄ (x_re + j x_im)` for `x = [x_re; x_im]`.
    fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        let (n, r) = (self.cols(), self.rows());
        let mut scratch = self.scratch.borrow_mut();
        let Scratch {
            spectra,
            tones,
            input,
            output,
        } = &mut *scratch;
        input.clear();
        input.extend((0..n).map(|i| Complex64::new(x[i], x[n + i])));
        output.resize(r, ZERO);
        self.apply_unchecked(input, output, spectra, tones);
        let (re, im) = y.split_at_mut(r);
        for ((yr, yi), v) in re.iter_mut().zip(im).zip(output.iter()) {
            *yr = v.re;
            *yi = v.im;
        }
    }

    fn adjoint_real(&self, y: &[f64], x: &mut [f64]) {
        let (n, r) = (self.cols(), self.rows());
        let mut scratch = self.scratch.borrow_mut();
        let Scratch {
            tones, input, output, ..
        } = &mut *scratch;
        output.clear();
        output.extend((0..r).map(|i| Complex64::new(y[i], y[r + i])));
        input.resize(n, ZERO);
        self.adjoint_unchecked(output, input, tones);
        let (re, im) = x.split_at_mut(n);
        for ((xr, xi), v) in re.iter_mut().zip(im).zip(input.iter()) {
            *xr = v.re;
            *xi = v.im;
        }
    }

    fn check(&self, cols: usize, rows: usize) -> Result<()> {
        if cols != self.cols() || rows != self.rows() {
            return Err(Error::dim(format!(
                "operator is {}x{}, got input {} / output {}",
                self.rows(),
                self.cols(),
                cols,
                rows
            )));
        }
        Ok(())
    }
}

/// Linear precoder emulated through the data constraints
/// `H_w P_w s_w = H_w x_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPrecoder {
    /// `P_w = H_w^†`, identical to the plain constraints `s_w = H_w x_w`.
    PseudoInverse,
    /// `P_w = H_w^H`.
    MatchedFilter,
}

/// `minimize ‖ā‖∞̃ s.t. b̄ = C̄ ā`, held in operator form.
#[derive(Debug, Clone)]
pub struct PmpProblem<'a> {
    op: PmpOperator<'a>,
    target: Vec<Complex64>,
}

/// Stacks `b̄` from per-active-tone symbol vectors (`symbols[i]` belongs to
/// the `i`-th active bin and has length `M`).
pub fn build_pmp_problem<'a>(
    symbols: &[Vec<Complex64>],
    plan: &'a TonePlan,
    chan: &'a ChannelRealization,
    target_precoder: Option<TargetPrecoder>,
) -> Result<PmpProblem<'a>> {
    let op = PmpOperator::new(plan, chan)?;
    let m = chan.users();
    if symbols.len() != plan.active().len() || symbols.iter().any(|s| s.len() != m) {
        return Err(Error::dim(format!(
            "expected {} symbol vectors of length {m}",
            plan.active().len()
        )));
    }
    let mut target = Vec::with_capacity(op.rows());
    for (s, &bin) in symbols.iter().zip(plan.active()) {
        match target_precoder {
            None => target.extend_from_slice(s),
            Some(kind) => {
                let h = chan.tone(bin);
                let p = match kind {
                    TargetPrecoder::PseudoInverse => pinv_rows(h).map_err(|_| Error::Singular {
                        context: Some(format!("tone {bin}")),
                    })?,
                    TargetPrecoder::MatchedFilter => h.conj_transpose(),
                };
                target.extend(h.mul_vec(&p.mul_vec(s)?)?);
            }
        }
    }
    target.resize(op.rows(), ZERO);
    Ok(PmpProblem { op, target })
}

impl<'a> PmpProblem<'a> {
    pub fn operator(&self) -> &PmpOperator<'a> {
        &self.op
    }

    /// `b̄`.
    pub fn target(&self) -> &[Complex64] {
        &self.target
    }

    /// `‖b̄ − C̄ā‖₂`.
    pub fn residual_norm(&self, a: &StackedSignal) -> Result<f64> {
        let mut out = vec![ZERO; self.op.rows()];
        self.op.apply(a.as_slice(), &mut out)?;
        Ok(out
            .iter()
            .zip(&self.target)
            .map(|(o, t)| (t - o).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Equivalent real-valued problem over `[Re ā; Im ā]`.
    pub fn to_real(&self) -> RealPmpProblem<'_> {
        let target = self
            .target
            .iter()
            .map(|v| v.re)
            .chain(self.target.iter().map(|v| v.im))
            .collect();
        RealPmpProblem {
            op: RealPmpOperator { inner: &self.op },
            target,
        }
    }

    /// Maps a real unknown `[Re ā; Im ā]` back to the stacked signal.
    pub fn to_complex(&self, x: &[f64]) -> Result<StackedSignal> {
        to_complex(x, self.op.channel().antennas(), self.op.plan().len())
    }
}

/// `[Re ā; Im ā] ↦ ā` for an `N×W` stacked signal.
pub fn to_complex(x: &[f64], antennas: usize, tones: usize) -> Result<StackedSignal> {
    let half = antennas * tones;
    if x.len() != 2 * half {
        return Err(Error::dim(format!("real vector of length {} for {antennas}x{tones}", x.len())));
    }
    let data = x[..half]
        .iter()
        .zip(&x[half..])
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    StackedSignal::from_flat(antennas, tones, data)
}

/// `ā ↦ [Re ā; Im ā]`.
pub fn to_real(a: &StackedSignal) -> Vec<f64> {
    let s = a.as_slice();
    s.iter().map(|v| v.re).chain(s.iter().map(|v| v.im)).collect()
}

/// Real embedding of `C̄`: the block map `[[Re C̄, −Im C̄], [Im C̄, Re C̄]]`.
///
/// Because `C̄` is complex-linear this is a single complex application on
/// `Re + j Im`; the transpose is a single application of `C̄^H`.
#[derive(Debug, Clone, Copy)]
pub struct RealPmpOperator<'p> {
    inner: &'p PmpOperator<'p>,
}

impl LinearOperator for RealPmpOperator<'_> {
    fn rows(&self) -> usize {
        2 * self.inner.rows()
    }

    fn cols(&self) -> usize {
        2 * self.inner.cols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_real(x, y);
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.inner.adjoint_real(y, x);
    }
}

/// Real-valued form of a [`PmpProblem`].
#[derive(Debug, Clone)]
pub struct RealPmpProblem<'p> {
    pub op: RealPmpOperator<'p>,
    pub target: Vec<f64>,
}
