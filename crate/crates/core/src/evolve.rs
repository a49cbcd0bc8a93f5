//! The evolving Kingman comb: one transition by cutting and pasting.
//!
//! Given a comb `f` and `s > 0`, draw a fresh Kingman comb. Its `N_s`
//! teeth of height at least `s` are replaced, left to right, by `M_k + s`,
//! where `M_k` is the tallest tooth of `f` strictly between the order
//! statistics `V*_k < V*_{k+1}` of `N_s + 1` fresh uniforms.

use rand::Rng;
use serde::Serialize;

use crate::comb::{sample_kingman_comb, sample_kingman_teeth, Tooth, ToothComb};
use crate::error::{Error, Result};
use crate::replicate::replicate;
use crate::stats::ks_two_sample;
use crate::uniform_open;

/// Everything drawn during one transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveStepRecord {
    /// Fresh Kingman teeth in index order (decreasing height).
    pub fresh: Vec<Tooth>,
    /// Number of fresh teeth of height at least `s`.
    pub n_tall: usize,
    /// `V*_1 < ... < V*_{N_s + 1}`.
    pub order_statistics: Vec<f64>,
    /// `M_k`, the tallest tooth of the old comb in `(V*_k, V*_{k+1})`, 0 if none.
    pub maxima: Vec<f64>,
    /// The tall teeth after pasting, left to right.
    pub pasted: Vec<Tooth>,
}

/// One transition of the evolving Kingman comb over time `s`, with a fresh
/// comb truncated to `n_teeth` teeth.
pub fn evolving_kingman_step<R: Rng + ?Sized>(
    comb: &ToothComb,
    s: f64,
    n_teeth: usize,
    rng: &mut R,
) -> Result<(ToothComb, EvolveStepRecord)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("step length must be positive, got {s}")));
    }
    let fresh = sample_kingman_teeth(rng, n_teeth)?;
    // heights decrease along the index, so the tall teeth come first
    let n_tall = fresh.partition_point(|t| t.height >= s);
    let mut order_statistics: Vec<f64> = (0..=n_tall).map(|_| uniform_open(rng)).collect();
    order_statistics.sort_by(f64::total_cmp);
    let maxima: Vec<f64> = order_statistics
        .windows(2)
        .map(|w| comb.sup_open(w[0], w[1]))
        .collect();

    let mut tall: Vec<usize> = (0..n_tall).collect();
    tall.sort_by(|&a, &b| fresh[a].position.total_cmp(&fresh[b].position));
    let mut teeth = fresh.clone();
    for (k, &i) in tall.iter().enumerate() {
        teeth[i].height = maxima[k] + s;
    }
    let pasted = tall.iter().map(|&i| teeth[i]).collect();
    let record = EvolveStepRecord {
        fresh,
        n_tall,
        order_statistics,
        maxima,
        pasted,
    };
    Ok((ToothComb::new(teeth)?, record))
}

/// [`evolving_kingman_step`] without the record.
pub fn evolve_step<R: Rng + ?Sized>(comb: &ToothComb, s: f64, n_teeth: usize, rng: &mut R) -> Result<ToothComb> {
    Ok(evolving_kingman_step(comb, s, n_teeth, rng)?.0)
}

/// Two-sample KS distance between the tree heights of fresh Kingman combs
/// and of Kingman combs moved by one step of length `s`.
///
/// `replicates` evolved combs are compared with `reference` fresh ones.
pub fn stationarity_probe(n_teeth: usize, s: f64, replicates: usize, reference: usize, seed: u64) -> Result<f64> {
    if replicates < 2 || reference < 2 {
        return Err(Error::InvalidArgument("need at least two replicates".to_string()));
    }
    let evolved = replicate(seed, replicates, |_, rng| {
        let start = sample_kingman_comb(rng, n_teeth)?;
        Ok(evolve_step(&start, s, n_teeth, rng)?.max_height())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let fresh = replicate(seed ^ 0xF8E5_11A7, reference, |_, rng| {
        Ok(sample_kingman_comb(rng, n_teeth)?.max_height())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    ks_two_sample(&evolved, &fresh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::CombView;
    use crate::replicate::rng_from_seed;

    #[test]
    fn rejects_bad_step() {
        let mut rng = rng_from_seed(1);
        let f = ToothComb::new(vec![]).unwrap();
        assert!(evolving_kingman_step(&f, 0.0, 10, &mut rng).is_err());
        assert!(evolving_kingman_step(&f, -1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn nothing_tall_means_fresh_comb() {
        let mut rng = rng_from_seed(2);
        let f = ToothComb::new(vec![Tooth::new(0.5, 1.0)]).unwrap();
        let (out, rec) = evolving_kingman_step(&f, 1e9, 50, &mut rng).unwrap();
        assert_eq!(rec.n_tall, 0);
        assert_eq!(rec.order_statistics.len(), 1);
        assert!(rec.maxima.is_empty());
        assert_eq!(out, ToothComb::new(rec.fresh.clone()).unwrap());
    }

    #[test]
    fn audit_trail() {
        let mut rng = rng_from_seed(3);
        let f = sample_kingman_comb(&mut rng, 100).unwrap();
        for &s in &[0.05, 0.3, 1.0] {
            let (out, rec) = evolving_kingman_step(&f, s, 200, &mut rng).unwrap();
            assert_eq!(rec.n_tall, rec.fresh.iter().filter(|t| t.height >= s).count());
            assert_eq!(rec.order_statistics.len(), rec.n_tall + 1);
            let above: Vec<&Tooth> = out.teeth().iter().filter(|t| t.height >= s).collect();
            assert_eq!(above.len(), rec.n_tall);
            for (k, t) in rec.pasted.iter().enumerate() {
                assert_eq!(t.height, rec.maxima[k] + s);
                assert_eq!(out.comb_function(t.position).finite(), Some(t.height));
            }
            assert!(rec.pasted.windows(2).all(|w| w[0].position < w[1].position));
            // short teeth are the fresh ones, untouched
            let short_out: Vec<Tooth> = out.teeth().iter().filter(|t| t.height < s).copied().collect();
            let mut short_fresh: Vec<Tooth> = rec.fresh.iter().filter(|t| t.height < s).copied().collect();
            short_fresh.sort_by(|a, b| a.position.total_cmp(&b.position));
            assert_eq!(short_out, short_fresh);
        }
    }

    #[test]
    fn single_tooth_lands_in_one_gap() {
        let h = 3.0;
        let f = ToothComb::new(vec![Tooth::new(0.4, h)]).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..500 {
            let (_, rec) = evolving_kingman_step(&f, 0.2, 100, &mut rng).unwrap();
            assert!(rec.maxima.iter().all(|&m| m == 0.0 || m == h));
            let hits = rec.maxima.iter().filter(|&&m| m == h).count();
            let inside = rec.order_statistics.first().unwrap() < &0.4 && rec.order_statistics.last().unwrap() > &0.4;
            assert_eq!(hits, usize::from(inside));
        }
    }

    #[test]
    fn small_step_recovers_old_teeth() {
        let mut rng = rng_from_seed(5);
        let f = sample_kingman_comb(&mut rng, 50).unwrap();
        let s = 1e-6;
        let (_, rec) = evolving_kingman_step(&f, s, 2000, &mut rng).unwrap();
        // thousands of gaps: the tallest old tooth is found in one of them
        let best = rec.maxima.iter().copied().fold(0.0, f64::max);
        assert_eq!(best, f.max_height());
        for (t, m) in rec.pasted.iter().zip(&rec.maxima) {
            assert!((t.height - m).abs() <= s * (1.0 + 1e-9));
        }
    }

    #[test]
    fn stationary_below_step() {
        // pair merge times censored at s have the fresh law
        let s = 0.3;
        let n = 300;
        let cens = |d: f64| d.min(s);
        let evolved = replicate(6, 10_000, |_, rng| {
            let start = sample_kingman_comb(rng, n).unwrap();
            let out = evolve_step(&start, s, n, rng).unwrap();
            let (x, y) = (uniform_open(rng), uniform_open(rng));
            cens(out.distance(x, y).finite().unwrap())
        });
        let fresh = replicate(7, 10_000, |_, rng| {
            let c = sample_kingman_comb(rng, n).unwrap();
            let (x, y) = (uniform_open(rng), uniform_open(rng));
            cens(c.distance(x, y).finite().unwrap())
        });
        assert!(ks_two_sample(&evolved, &fresh).unwrap() < 0.03);
    }

    #[test]
    fn huge_step_is_trivially_stationary() {
        let d = stationarity_probe(100, 1e9, 2000, 2000, 8).unwrap();
        // both samples are fresh combs
        assert!(d < 0.05, "{d}");
    }
}
