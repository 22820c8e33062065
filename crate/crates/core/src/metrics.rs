//! PAR, its CCDF and 99th-percentile statistic, out-of-band ratio, block
//! error rate and the SNR operating point.

use crate::error::{Error, Result};
use crate::numerics::Complex64;
use crate::system::{FreqFrame, TonePlan};
use serde::Serialize;

/// Minimum pool size for [`par_star`].
pub const MIN_PAR_SAMPLES: usize = 100;

pub fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(value_db: f64) -> f64 {
    10f64.powf(value_db / 10.0)
}

/// `2W ‖a‖∞̃² / ‖a‖₂²` for one antenna's time-domain samples.
pub fn par(samples: &[Complex64]) -> Result<f64> {
    let energy: f64 = samples.iter().map(|v| v.norm_sqr()).sum();
    if !(energy > 0.0) {
        return Err(Error::UndefinedPar);
    }
    let peak = samples.iter().map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max);
    Ok(2.0 * samples.len() as f64 * peak * peak / energy)
}

/// Fraction of `samples_db` strictly above each grid level.
pub fn ccdf(samples_db: &[f64], grid_db: &[f64]) -> Result<Vec<f64>> {
    if samples_db.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut sorted = samples_db.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid_db
        .iter()
        .map(|g| {
            let at_or_below = sorted.partition_point(|s| s <= g);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect())
}

/// Linear-interpolated (type-7) empirical quantile, `q ∈ [0, 1]`.
pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// PAR level (dB) exceeded by 1% of the pooled linear PAR samples.
pub fn par_star(par_linear: &[f64]) -> Result<f64> {
    if par_linear.len() < MIN_PAR_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_PAR_SAMPLES,
            got: par_linear.len(),
        });
    }
    Ok(db(quantile(par_linear, 0.99)?))
}

/// Out-of-band ratio: mean power per inactive tone over mean power per
/// active tone.
pub fn obr(frame: &FreqFrame, plan: &TonePlan) -> Result<f64> {
    if frame.tones() != plan.len() {
        return Err(Error::dim(format!("frame has {} tones, plan {}", frame.tones(), plan.len())));
    }
    let inband: f64 = plan.active().iter().map(|&w| frame.tone_power(w)).sum();
    if !(inband > 0.0) {
        return Err(Error::Degenerate("no in-band power".into()));
    }
    if plan.inactive().is_empty() {
        return Ok(0.0);
    }
    let outband: f64 = plan.inactive().iter().map(|&w| frame.tone_power(w)).sum();
    Ok(plan.active().len() as f64 * outband / (plan.inactive().len() as f64 * inband))
}

/// Mean of the block-error flags.
pub fn ser(block_errors: &[bool]) -> Result<f64> {
    if block_errors.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    Ok(block_errors.iter().filter(|&&e| e).count() as f64 / block_errors.len() as f64)
}

/// Block-error count at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub errors: u64,
    pub trials: u64,
}

impl SerPoint {
    pub fn rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    /// Rate with error-free points lifted to half an error, so the curve
    /// stays finite on a log scale.
    pub fn rate_floored(&self) -> f64 {
        if self.errors == 0 {
            0.5 / self.trials as f64
        } else {
            self.rate()
        }
    }
}

/// Lowest SNR reaching `target` on a curve sampled at increasing SNR, by
/// linear interpolation of `log10(rate)` between the bracketing points.
pub fn snr_operating_point(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    let cross = curve
        .windows(2)
        .find(|p| p[0].1 > target && p[1].1 <= target)
        .ok_or(Error::NotBracketed { target })?;
    let ((x0, y0), (x1, y1)) = (cross[0], cross[1]);
    if y1 <= 0.0 {
        return Err(Error::Degenerate("zero rate at the bracketing point; floor it first".into()));
    }
    let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
    if l0 == l1 {
        return Ok(x1);
    }
    Ok(x0 + (lt - l0) / (l1 - l0) * (x1 - x0))
}

/// Operating point of a measured curve, using floored rates.
pub fn operating_point(points: &[SerPoint], target: f64) -> Result<f64> {
    let curve: Vec<(f64, f64)> = points.iter().map(|p| (p.snr_db, p.rate_floored())).collect();
    snr_operating_point(&curve, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn par_examples() {
        assert_eq!(par(&vec![c(1.0, 1.0); 16]).unwrap(), 1.0);
        let mut spike = vec![c(0.0, 0.0); 8];
        spike[0] = c(1.0, 0.0);
        assert_eq!(par(&spike).unwrap(), 16.0);
        assert_eq!(par(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 4.0);
        assert!(matches!(par(&[c(0.0, 0.0); 4]), Err(Error::UndefinedPar)));
    }

    proptest! {
        #[test]
        fn par_bounds_and_scale_invariance(
            v in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..64),
            scale in 0.01..100.0f64,
        ) {
            let a: Vec<Complex64> = v.iter().map(|&(r, i)| c(r, i)).collect();
            prop_assume!(a.iter().any(|x| x.norm() > 1e-6));
            let p = par(&a).unwrap();
            prop_assert!(p >= 1.0 - 1e-12 && p <= 2.0 * a.len() as f64 + 1e-12);
            let scaled: Vec<Complex64> = a.iter().map(|x| x * scale).collect();
            prop_assert!((par(&scaled).unwrap() - p).abs() <= 1e-10 * p);
        }

        #[test]
        fn ccdf_is_monotone_probability(
            samples in prop::collection::vec(-10.0..20.0f64, 1..200),
            mut grid in prop::collection::vec(-15.0..25.0f64, 1..40),
        ) {
            grid.sort_by(f64::total_cmp);
            let curve = ccdf(&samples, &grid).unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            prop_assert!(curve.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn ccdf_and_par_star_of_constant_samples() {
        let samples = vec![3.0; 200];
        let curve = ccdf(&samples.iter().map(|&s| db(s)).collect::<Vec<_>>(), &[db(3.0) - 0.1, db(3.0), db(3.0) + 0.1]).unwrap();
        assert_eq!(curve, vec![1.0, 0.0, 0.0]);
        assert!((par_star(&samples).unwrap() - db(3.0)).abs() < 1e-12);
    }

    #[test]
    fn par_star_percentile_rule() {
        let samples: Vec<f64> = (1..=100).map(f64::from).collect();
        // h = 99 * 0.99 = 98.01 -> 99 + 0.01 * (100 - 99)
        assert!((par_star(&samples).unwrap() - db(99.01)).abs() < 1e-12);
        assert!(matches!(par_star(&samples[..99]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn obr_examples() {
        let plan = TonePlan::new(4, [1, 2]).unwrap();
        let flat = FreqFrame::from_tones(&vec![vec![c(1.0, 0.0), c(0.0, 1.0)]; 4]).unwrap();
        assert_eq!(obr(&flat, &plan).unwrap(), 1.0);
        let mut quiet = flat.clone();
        for w in [0, 3] {
            quiet.tone_mut(w).iter_mut().for_each(|v| *v = c(0.0, 0.0));
        }
        assert_eq!(obr(&quiet, &plan).unwrap(), 0.0);
        let mut leaky = quiet.clone();
        leaky.tone_mut(3)[0] = c(0.1, 0.0);
        // (2 * 0.01) / (2 * 4)
        assert!((obr(&leaky, &plan).unwrap() - 0.0025).abs() < 1e-15);
        assert!(obr(&FreqFrame::zeros(2, 4), &plan).is_err());
    }

    #[test]
    fn ser_examples() {
        assert_eq!(ser(&[false; 40]).unwrap(), 0.0);
        let mut flags = vec![false; 100];
        flags[17] = true;
        assert_eq!(ser(&flags).unwrap(), 0.01);
        assert!(ser(&[]).is_err());
    }

    #[test]
    fn operating_point_interpolation() {
        let curve = [(0.0, 0.5), (2.0, 0.1), (4.0, 0.001), (6.0, 0.0001)];
        // log10 falls from -1 to -3 between 2 and 4 dB; -2 is halfway
        assert!((snr_operating_point(&curve, 0.01).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(snr_operating_point(&curve[..2], 0.01), Err(Error::NotBracketed { .. })));
        assert!(snr_operating_point(&[(0.0, 0.001), (1.0, 0.0001)], 0.01).is_err());

        let pts = [
            SerPoint { snr_db: 10.0, errors: 50, trials: 1000 },
            SerPoint { snr_db: 11.0, errors: 0, trials: 1000 },
        ];
        assert_eq!(pts[1].rate_floored(), 0.0005);
        let op = operating_point(&pts, 0.01).unwrap();
        assert!(op > 10.0 && op < 11.0);
    }
}
