//! First-order solvers for `minimize λ‖x‖∞ + ‖s − Ax‖₂²` over real `x`.
//!
//! Both solvers take a gradient step on the quadratic term and then apply
//! the proximal map of `λ‖·‖∞`, which is an element-wise truncation
//! `trunc_α(w)_i = min(max(w_i, −α), α)` at the level `α` solving
//! `Σ_i (|w_i| − α)₊ = λ / L`.

use crate::error::{Error, Result};
use crate::numerics::{norm2, sigma_max, LinearOperator, PowerMethod};
use std::io::Write;
use std::time::{Duration, Instant};

/// Safety factor applied to the power-method estimate of `σ_max(A)`.
pub const SIGMA_MARGIN: f64 = 1.001;

/// Truncation level of the proximal map, computed exactly.
///
/// The level is at least `‖w‖∞ − λ/L`, so smaller magnitudes are dropped
/// up front. Pivoting on the running mean of the surviving magnitudes then
/// removes every entry that cannot lie above the level; the surviving set
/// only shrinks, so the loop ends after at most `n` passes and usually after
/// a handful.
pub fn prox_alpha(w: &[f64], lambda: f64, lipschitz: f64) -> f64 {
    let tau = lambda / lipschitz;
    let max = linf(w);
    if max == 0.0 {
        return 0.0;
    }
    let floor = max - tau;
    let mut live: Vec<f64> = w.iter().map(|v| v.abs()).filter(|&v| v >= floor && v > 0.0).collect();
    let mut sum: f64 = live.iter().sum();
    if floor <= 0.0 && tau >= sum {
        return 0.0;
    }
    loop {
        let alpha = (sum - tau) / live.len() as f64;
        let before = live.len();
        live.retain(|&v| v > alpha);
        if live.is_empty() || live.len() == before {
            return alpha.clamp(0.0, max);
        }
        sum = live.iter().sum();
    }
}

/// Truncation level by sorting the magnitudes (reference closed form).
pub fn prox_alpha_sorted(w: &[f64], lambda: f64, lipschitz: f64) -> f64 {
    let tau = lambda / lipschitz;
    let mut mags: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        prefix += m;
        let alpha = (prefix - tau) / (k + 1) as f64;
        let next = mags.get(k + 1).copied().unwrap_or(0.0);
        if alpha >= next {
            return alpha.clamp(0.0, mags[0]);
        }
    }
    0.0
}

/// Truncation level by bisection on `[0, ‖w‖∞]`; stops once the bracket is
/// narrower than `tol · max(1, ‖w‖∞)`.
pub fn prox_alpha_bisection(w: &[f64], lambda: f64, lipschitz: f64, tol: f64) -> f64 {
    let tau = lambda / lipschitz;
    let excess = |a: f64| w.iter().map(|v| (v.abs() - a).max(0.0)).sum::<f64>();
    let max = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if excess(0.0) <= tau {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, max);
    let width = tol * max.max(1.0);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Element-wise clipping of `w` to `[−α, α]`.
pub fn truncate(w: &[f64], alpha: f64) -> Vec<f64> {
    w.iter().map(|v| v.clamp(-alpha, alpha)).collect()
}

/// Proximal map of `(λ/L)‖·‖∞` at `w`.
pub fn prox_truncate(w: &[f64], lambda: f64, lipschitz: f64) -> Vec<f64> {
    truncate(w, prox_alpha(w, lambda, lipschitz))
}

fn truncate_in_place(w: &mut [f64], alpha: f64) {
    w.iter_mut().for_each(|v| *v = v.clamp(-alpha, alpha));
}

fn linf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `λ‖x‖∞ + ‖s − Ax‖₂²` with the Lipschitz constant of the quadratic term's
/// gradient.
#[derive(Debug, Clone)]
pub struct LinfLsProblem<A> {
    op: A,
    target: Vec<f64>,
    lambda: f64,
    lipschitz: f64,
}

impl<A: LinearOperator> LinfLsProblem<A> {
    pub fn new(op: A, target: Vec<f64>, lambda: f64, lipschitz: f64) -> Result<Self> {
        if target.len() != op.rows() {
            return Err(Error::dim(format!(
                "target of length {} for an operator with {} rows",
                target.len(),
                op.rows()
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::config("lambda", format!("must be finite and nonnegative, got {lambda}")));
        }
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(Error::config("lipschitz", format!("must be finite and positive, got {lipschitz}")));
        }
        Ok(LinfLsProblem {
            op,
            target,
            lambda,
            lipschitz,
        })
    }

    /// Uses `L = 2 (1.001 σ̂)²` with `σ̂` from the power method.
    pub fn with_estimated_lipschitz(op: A, target: Vec<f64>, lambda: f64, power: PowerMethod) -> Result<Self> {
        let sigma = sigma_max(&op, power)?;
        if sigma == 0.0 {
            return Err(Error::Degenerate("operator is zero".into()));
        }
        LinfLsProblem::new(op, target, lambda, lipschitz_from_sigma(sigma))
    }

    pub fn operator(&self) -> &A {
        &self.op
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn dim(&self) -> usize {
        self.op.cols()
    }

    /// `F(x) = λ‖x‖∞ + ‖s − Ax‖₂²`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut r = vec![0.0; self.op.rows()];
        self.objective_with(x, &mut r)
    }

    /// `‖s − Ax‖₂`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let mut r = vec![0.0; self.op.rows()];
        self.op.apply(x, &mut r);
        r.iter_mut().zip(&self.target).for_each(|(ri, si)| *ri -= si);
        norm2(&r)
    }

    fn objective_with(&self, x: &[f64], r: &mut [f64]) -> f64 {
        self.op.apply(x, r);
        let quad: f64 = r.iter().zip(&self.target).map(|(a, s)| (s - a) * (s - a)).sum();
        self.lambda * linf(x) + quad
    }

    /// `w = y − (2/L) Aᵀ(Ay − s)`, written into `w`.
    fn gradient_step(&self, y: &[f64], r: &mut [f64], g: &mut [f64], w: &mut [f64]) {
        self.op.apply(y, r);
        r.iter_mut().zip(&self.target).for_each(|(ri, si)| *ri -= si);
        self.op.adjoint(r, g);
        let step = 2.0 / self.lipschitz;
        for ((wi, yi), gi) in w.iter_mut().zip(y).zip(g.iter()) {
            *wi = yi - step * gi;
        }
    }
}

/// `2 (1.001 σ)²`.
pub fn lipschitz_from_sigma(sigma: f64) -> f64 {
    2.0 * (SIGMA_MARGIN * sigma).powi(2)
}

/// Run controls shared by [`fitra`] and [`ista`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Iteration count `K`.
    pub iterations: usize,
    /// Start point; zero when absent.
    pub x0: Option<Vec<f64>>,
    /// Record `F(x_k)` and `α_k` for every iteration.
    pub record_trace: bool,
    /// Iterations at which a copy of `x_k` is kept.
    pub checkpoints: Vec<usize>,
    /// Stop once `|F(x_k) − F(x_{k−1})| ≤ rel_tol · F(x_{k−1})`; `0` disables.
    pub rel_tol: f64,
}

impl SolveOptions {
    pub fn iterations(k: usize) -> Self {
        SolveOptions {
            iterations: k,
            x0: None,
            record_trace: false,
            checkpoints: Vec::new(),
            rel_tol: 0.0,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_start(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_checkpoints(mut self, at: impl IntoIterator<Item = usize>) -> Self {
        self.checkpoints = at.into_iter().collect();
        self
    }
}

/// Final iterate plus optional diagnostics.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `F(x_k)` for `k = 1..=iterations` when traced.
    pub objective: Option<Vec<f64>>,
    /// `α_k` for `k = 1..=iterations` when traced.
    pub alpha: Option<Vec<f64>>,
    /// `(k, x_k)` for every requested checkpoint reached.
    pub checkpoints: Vec<(usize, Vec<f64>)>,
    pub elapsed: Duration,
}

impl SolverResult {
    /// Writes `k,objective,alpha` rows; fails if no trace was recorded.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let (Some(f), Some(a)) = (&self.objective, &self.alpha) else {
            return Err(Error::config("trace", "solver ran without trace recording"));
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "objective", "alpha"])?;
        for (k, (fk, ak)) in f.iter().zip(a).enumerate() {
            w.write_record([(k + 1).to_string(), fk.to_string(), ak.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Iterate kept at checkpoint `k`.
    pub fn checkpoint(&self, k: usize) -> Option<&[f64]> {
        self.checkpoints.iter().find(|(i, _)| *i == k).map(|(_, x)| x.as_slice())
    }
}

/// Fast iterative truncation: accelerated proximal gradient with the
/// truncation prox and the standard momentum sequence
/// `t_{k+1} = (1 + √(1 + 4t_k²)) / 2`.
pub fn fitra<A: LinearOperator>(problem: &LinfLsProblem<A>, opts: &SolveOptions) -> Result<SolverResult> {
    run(problem, opts, true)
}

/// Plain iterative truncation (no momentum).
pub fn ista<A: LinearOperator>(problem: &LinfLsProblem<A>, opts: &SolveOptions) -> Result<SolverResult> {
    run(problem, opts, false)
}

fn run<A: LinearOperator>(problem: &LinfLsProblem<A>, opts: &SolveOptions, momentum: bool) -> Result<SolverResult> {
    let start = Instant::now();
    let n = problem.dim();
    if opts.iterations == 0 {
        return Err(Error::config("iterations", "must be at least 1"));
    }
    let x0 = match &opts.x0 {
        Some(x) if x.len() != n => return Err(Error::dim(format!("start point of length {} for {n} unknowns", x.len()))),
        Some(x) if x.iter().any(|v| !v.is_finite()) => {
            return Err(Error::config("x0", "start point must be finite"));
        }
        Some(x) => x.clone(),
        None => vec![0.0; n],
    };
    let tracking = opts.record_trace || opts.rel_tol > 0.0;
    let mut objective: Vec<f64> = Vec::new();
    let mut alphas = Vec::new();
    let mut checkpoints = Vec::new();

    let mut r = vec![0.0; problem.op.rows()];
    let mut g = vec![0.0; n];
    let mut x_prev = x0.clone();
    let mut y = x0;
    let mut x = vec![0.0; n];
    let mut t = 1.0_f64;
    let mut done = opts.iterations;

    for k in 1..=opts.iterations {
        problem.gradient_step(&y, &mut r, &mut g, &mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration: k });
        }
        let alpha = prox_alpha(&x, problem.lambda, problem.lipschitz);
        truncate_in_place(&mut x, alpha);

        if momentum {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for ((yi, xi), pi) in y.iter_mut().zip(&x).zip(&x_prev) {
                *yi = xi + beta * (xi - pi);
            }
            t = t_next;
        } else {
            y.copy_from_slice(&x);
        }

        if opts.checkpoints.contains(&k) {
            checkpoints.push((k, x.clone()));
        }
        let mut stop = false;
        if tracking {
            let f = problem.objective_with(&x, &mut r);
            if opts.rel_tol > 0.0 {
                if let Some(&prev) = objective.last() {
                    stop = (f - prev).abs() <= opts.rel_tol * prev;
                }
            }
            objective.push(f);
            alphas.push(alpha);
        }
        std::mem::swap(&mut x_prev, &mut x);
        if stop {
            done = k;
            break;
        }
    }
    Ok(SolverResult {
        x: x_prev,
        iterations: done,
        objective: opts.record_trace.then_some(objective),
        alpha: opts.record_trace.then_some(alphas),
        checkpoints,
        elapsed: start.elapsed(),
    })
}
