//! Cohort prevalence of a boolean indicator over time with percentile
//! bootstrap confidence intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Indicator samples at `t_rel_start + k * step`, relative to the trigger
/// point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoolSeries {
    pub t_rel_start: f64,
    pub step: f64,
    pub values: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceSeries {
    pub t_rel: Vec<f64>,
    pub fraction: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// Runs whose series had already ended at this step and contribute their
    /// last value.
    pub n_carried: Vec<usize>,
    pub n_runs: usize,
    pub resamples: usize,
    pub seed: u64,
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-step fraction and 95% percentile-bootstrap CI. Runs are resampled
/// with replacement as whole series; shorter series carry their last value.
pub fn aggregate_prevalence(series: &[BoolSeries], resamples: usize, seed: u64) -> Result<PrevalenceSeries> {
    let first = series.first().ok_or(Error::EmptyCohort)?;
    if resamples == 0 {
        return Err(invalid("bootstrap resample count must be >= 1"));
    }
    let tol = 1e-6 * first.step.abs().max(1.0);
    for (i, s) in series.iter().enumerate() {
        if s.values.is_empty() {
            return Err(invalid(format!("run {i} has an empty series")));
        }
        if (s.step - first.step).abs() > tol || (s.t_rel_start - first.t_rel_start).abs() > tol {
            return Err(invalid(format!("run {i} is not aligned to the cohort clock")));
        }
    }
    let len = series.iter().map(|s| s.values.len()).max().unwrap();
    let n = series.len();
    // column-major indicator matrix with terminal-value carry
    let mut ind = vec![0u8; len * n];
    let mut n_carried = vec![0usize; len];
    for (r, s) in series.iter().enumerate() {
        let last = *s.values.last().unwrap();
        for k in 0..len {
            let v = match s.values.get(k) {
                Some(v) => *v,
                None => {
                    n_carried[k] += 1;
                    last
                }
            };
            ind[k * n + r] = v as u8;
        }
    }
    let fraction: Vec<f64> = (0..len)
        .map(|k| ind[k * n..(k + 1) * n].iter().map(|v| *v as f64).sum::<f64>() / n as f64)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = vec![vec![0.0; resamples]; len];
    let mut counts = vec![0u32; len];
    let mut picks = vec![0usize; n];
    for b in 0..resamples {
        for p in picks.iter_mut() {
            *p = rng.gen_range(0..n);
        }
        counts.iter_mut().for_each(|c| *c = 0);
        for (k, c) in counts.iter_mut().enumerate() {
            let col = &ind[k * n..(k + 1) * n];
            *c = picks.iter().map(|&r| col[r] as u32).sum();
        }
        for k in 0..len {
            boot[k][b] = counts[k] as f64 / n as f64;
        }
    }
    let mut ci_lo = Vec::with_capacity(len);
    let mut ci_hi = Vec::with_capacity(len);
    for col in &mut boot {
        col.sort_by(f64::total_cmp);
        ci_lo.push(quantile_sorted(col, 0.025));
        ci_hi.push(quantile_sorted(col, 0.975));
    }
    Ok(PrevalenceSeries {
        t_rel: (0..len).map(|k| first.t_rel_start + k as f64 * first.step).collect(),
        fraction,
        ci_lo,
        ci_hi,
        n_carried,
        n_runs: n,
        resamples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(values: &[bool]) -> BoolSeries {
        BoolSeries { t_rel_start: 0.4, step: 0.1, values: values.to_vec() }
    }

    #[test]
    fn all_true_is_degenerate() {
        let p = aggregate_prevalence(&[s(&[true, true]), s(&[true, true]), s(&[true, true])], 500, 1).unwrap();
        assert_eq!(p.fraction, vec![1.0, 1.0]);
        assert_eq!(p.ci_lo, vec![1.0, 1.0]);
        assert_eq!(p.ci_hi, vec![1.0, 1.0]);
    }

    #[test]
    fn single_run_collapses() {
        let p = aggregate_prevalence(&[s(&[true, false])], 200, 3).unwrap();
        assert_eq!(p.fraction, vec![1.0, 0.0]);
        assert_eq!((p.ci_lo[1], p.ci_hi[1]), (0.0, 0.0));
        assert_eq!((p.ci_lo[0], p.ci_hi[0]), (1.0, 1.0));
    }

    #[test]
    fn two_of_four_matches_resampling_distribution() {
        // resampled mean ~ Binomial(4, 1/2)/4; P(0) = P(1) = 1/16 > 2.5%
        let c = [s(&[true]), s(&[true]), s(&[false]), s(&[false])];
        let p = aggregate_prevalence(&c, 4000, 7).unwrap();
        assert_eq!(p.fraction[0], 0.5);
        assert_eq!(p.ci_lo[0], 0.0);
        assert_eq!(p.ci_hi[0], 1.0);
    }

    #[test]
    fn shorter_runs_carry_and_are_flagged() {
        let p = aggregate_prevalence(&[s(&[true, true, false]), s(&[true])], 100, 0).unwrap();
        assert_eq!(p.t_rel.len(), 3);
        assert_eq!(p.n_carried, vec![0, 1, 1]);
        assert_eq!(p.fraction, vec![1.0, 1.0, 0.5]);
        assert!((p.t_rel[2] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let c: Vec<_> = (0..9).map(|i| s(&[i % 3 == 0, i % 2 == 0])).collect();
        assert_eq!(aggregate_prevalence(&c, 300, 11).unwrap(), aggregate_prevalence(&c, 300, 11).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(aggregate_prevalence(&[], 100, 0), Err(Error::EmptyCohort)));
        let mut b = s(&[true]);
        b.step = 0.2;
        assert!(aggregate_prevalence(&[s(&[true]), b], 100, 0).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        let d = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile_sorted(&d, 0.5), 1.5);
        assert_eq!(quantile_sorted(&d, 0.0), 0.0);
        assert_eq!(quantile_sorted(&d, 1.0), 3.0);
    }
}
