//! Test statistics used by the verification suites.
//!
//! Thresholds are fixed constants carried in [`TestReport`]; no p-values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one statistical or exact check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub sample_sizes: Vec<usize>,
    pub pass: bool,
}

impl TestReport {
    /// `pass` is `statistic < threshold`.
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, sample_sizes: Vec<usize>) -> Self {
        TestReport {
            name: name.into(),
            statistic,
            threshold,
            sample_sizes,
            pass: statistic < threshold,
        }
    }

    /// For a condition that holds or does not: statistic is the number of
    /// violations, threshold 1.
    pub fn exact(name: impl Into<String>, violations: usize, checked: usize) -> Self {
        Self::new(name, violations as f64, 1.0, vec![checked])
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample".to_string()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("sample contains NaN".to_string()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_one_sample<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        // step over ties so the ECDF jump is taken in one piece
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        let below = i as f64 / n;
        let above = (j + 1) as f64 / n;
        d = d.max(f - below).max(above - f);
        i = j + 1;
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Pearson statistic against equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(Error::InvalidArgument(
            "chi-square needs at least two categories".to_string(),
        ));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("chi-square on zero total".to_string()));
    }
    let expected = total as f64 / counts.len() as f64;
    Ok(counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum())
}

/// Upper 0.1% point of the chi-square law with 5 degrees of freedom.
pub const CHI2_5DF_999: f64 = 20.515;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicate::rng_from_seed;
    use rand::Rng;

    #[test]
    fn one_sample_matches_own_cdf() {
        let mut rng = rng_from_seed(1);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        // DKW: P(D > 0.01) <= 2 exp(-2 n 0.01^2) = 2e-9
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap() < 0.01);
    }

    #[test]
    fn one_sample_single_point_and_constant() {
        let step = |x: f64| if x >= 0.3 { 1.0 } else { 0.0 };
        assert_eq!(ks_one_sample(&[0.3], step).unwrap(), 1.0);
        let c = 0.3;
        let d = ks_one_sample(&vec![c; 50], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - f64::max(c, 1.0 - c)).abs() < 1e-15);
        assert!(ks_one_sample(&[], |x| x).is_err());
    }

    #[test]
    fn two_sample_basics() {
        let a = [0.1, 0.5, 0.9, 0.5];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.1], &[1.0, 2.0]).unwrap(), 1.0);
        assert!(ks_two_sample(&[], &a).is_err());
        // ties across samples are resolved together
        assert_eq!(ks_two_sample(&[1.0, 1.0], &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn two_sample_same_law() {
        let mut r1 = rng_from_seed(10);
        let mut r2 = rng_from_seed(11);
        let a: Vec<f64> = (0..10_000).map(|_| r1.random::<f64>()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| r2.random::<f64>()).collect();
        assert!(ks_two_sample(&a, &b).unwrap() < 0.03);
    }

    #[test]
    fn chi_square_examples() {
        assert_eq!(chi_square_uniform(&[10, 10, 10]).unwrap(), 0.0);
        let n = 600u64;
        let k = 6usize;
        let mut counts = vec![0u64; k];
        counts[2] = n;
        let expected = (n as f64) * (k as f64 - 1.0);
        assert!((chi_square_uniform(&counts).unwrap() - expected).abs() < 1e-9);
        assert!(chi_square_uniform(&[0, 0]).is_err());
        assert!(chi_square_uniform(&[5]).is_err());
    }

    #[test]
    fn chi_square_tail_rate() {
        // 200 runs of 6e4 fair draws: at most a handful may exceed the 0.1% point
        let exceed = crate::replicate::replicate_sequential(5, 200, |_, rng| {
            let mut counts = [0u64; 6];
            for _ in 0..60_000 {
                counts[rng.random_range(0..6)] += 1;
            }
            chi_square_uniform(&counts).unwrap() >= CHI2_5DF_999
        })
        .into_iter()
        .filter(|&e| e)
        .count();
        assert!(exceed <= 2, "{exceed} of 200 runs exceeded");
    }

    #[test]
    fn reports_are_threshold_driven() {
        assert!(TestReport::new("x", 0.01, 0.02, vec![1]).pass);
        assert!(!TestReport::new("x", 0.02, 0.02, vec![1]).pass);
        assert!(TestReport::exact("y", 0, 10).pass);
        assert!(!TestReport::exact("y", 1, 10).pass);
    }
}
