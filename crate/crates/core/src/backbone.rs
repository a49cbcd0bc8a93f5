//! Finite ultrametric measure spaces and their backbone.
//!
//! Points of zero weight stand for subtrees that carry no mass. The height
//! `f(x)` is how far `x` sits from the mass; the star metric `d̃` pulls
//! every such point up to that height, and `d_S` is the distance between
//! the points' feet on the backbone.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::comb::CombView;
use crate::error::{Error, Result};
use crate::replicate::replicate;
use crate::stats::ks_two_sample;

/// Which metric to read off sampled points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Plain,
    Star,
}

/// Checks the strong triangle inequality on all triples, exactly.
///
/// Errors on non-square, asymmetric, negative or non-finite input, or a
/// nonzero diagonal.
pub fn validate_ultrametric(dist: &[Vec<f64>]) -> Result<bool> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidSpace(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidSpace(format!("diagonal entry {i} is {}", row[i])));
        }
        for (j, &d) in row.iter().enumerate() {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidSpace(format!("entry ({i}, {j}) is {d}")));
            }
            if d != dist[j][i] {
                return Err(Error::InvalidSpace(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
            }
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            let dxy = dist[x][y];
            if dist[x].iter().zip(dist).any(|(&dxz, row_z)| dxy > dxz.max(row_z[y])) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// An ultrametric on `n` points with a probability vector of weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UmsRepr")]
pub struct FiniteUms {
    dist: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct UmsRepr {
    dist: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<UmsRepr> for FiniteUms {
    type Error = Error;

    fn try_from(r: UmsRepr) -> Result<Self> {
        FiniteUms::new(r.dist, r.weights)
    }
}

impl FiniteUms {
    pub fn new(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if dist.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one point".to_string()));
        }
        if weights.len() != dist.len() {
            return Err(Error::InvalidSpace(format!(
                "{} weights for {} points",
                weights.len(),
                dist.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidSpace("weights must be nonnegative".to_string()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpace(format!("weights sum to {total}, not 1")));
        }
        if !validate_ultrametric(&dist)? {
            return Err(Error::InvalidSpace("distance is not ultrametric".to_string()));
        }
        Ok(FiniteUms { dist, weights })
    }

    /// Points at `positions` of a comb with the given weights.
    pub fn from_comb<C: CombView + ?Sized>(comb: &C, positions: &[f64], weights: Vec<f64>) -> Result<Self> {
        let matrix = crate::paintbox::distance_matrix(positions, comb)?;
        let dist = matrix
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|h| {
                        h.finite().ok_or_else(|| {
                            Error::InvalidSpace("points that never merge have no finite distance".to_string())
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteUms::new(dist, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dist(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `f(x) = inf { t : μ(B(x, t)) > 0 }`: 0 for points with weight, else
    /// the distance to the nearest point with weight.
    pub fn height_function(&self) -> Vec<f64> {
        let massive: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect();
        (0..self.len())
            .map(|x| {
                if self.weights[x] > 0.0 {
                    0.0
                } else {
                    massive
                        .iter()
                        .map(|&y| self.dist[x][y])
                        .fold(f64::INFINITY, f64::min)
                }
            })
            .collect()
    }

    /// `d̃(x, y) = max(d(x, y), f(x))` off the diagonal.
    pub fn star_metric(&self) -> Vec<Vec<f64>> {
        let f = self.height_function();
        (0..self.len())
            .map(|x| {
                (0..self.len())
                    .map(|y| if x == y { 0.0 } else { self.dist[x][y].max(f[x]) })
                    .collect()
            })
            .collect()
    }

    /// The same points and weights under the star metric.
    pub fn star_space(&self) -> Result<FiniteUms> {
        FiniteUms::new(self.star_metric(), self.weights.clone())
    }

    /// `d_S(x, y)`: tree distance between `(x, f(x))` and `(y, f(y))`.
    pub fn backbone_distance(&self, x: usize, y: usize) -> f64 {
        let f = self.height_function();
        tree_distance(self.dist[x][y], f[x], f[y])
    }

    /// All backbone distances.
    pub fn backbone_matrix(&self) -> Vec<Vec<f64>> {
        let f = self.height_function();
        (0..self.len())
            .map(|x| (0..self.len()).map(|y| tree_distance(self.dist[x][y], f[x], f[y])).collect())
            .collect()
    }

    /// `n` i.i.d. indices drawn by weight.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let law = WeightedIndex::new(&self.weights).expect("weights sum to 1");
        (0..n).map(|_| law.sample(rng)).collect()
    }

    /// Distances between the given points under `metric`.
    pub fn matrix_for(&self, indices: &[usize], metric: Metric) -> Vec<Vec<f64>> {
        let f = match metric {
            Metric::Plain => vec![0.0; self.len()],
            Metric::Star => self.height_function(),
        };
        indices
            .iter()
            .enumerate()
            .map(|(a, &x)| {
                indices
                    .iter()
                    .enumerate()
                    .map(|(b, &y)| if a == b { 0.0 } else { self.dist[x][y].max(f[x]) })
                    .collect()
            })
            .collect()
    }
}

/// Distance in the tree between a point at height `s` above `x` and one at
/// height `t` above `y`: `max(d(x,y) - (s+t)/2, |t-s|/2)`.
pub fn tree_distance(d: f64, s: f64, t: f64) -> f64 {
    (d - (s + t) / 2.0).max((t - s).abs() / 2.0)
}

/// Distance matrix of `n_samples` points drawn by weight.
pub fn sample_distance_matrix<R: Rng + ?Sized>(
    space: &FiniteUms,
    n_samples: usize,
    rng: &mut R,
    metric: Metric,
) -> Result<Vec<Vec<f64>>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".to_string()));
    }
    let idx = space.sample_indices(n_samples, rng);
    Ok(space.matrix_for(&idx, metric))
}

/// Two-sample statistics between the distance-matrix laws of two spaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GromovReport {
    /// KS distance between the laws of `d(X_1, X_2)`.
    pub pair_ks: f64,
    /// Energy coefficient between the laws of `(d_12, d_13, d_23)`, in [0, 1].
    pub triple_energy: f64,
    /// Draws per space, and the subsample used for the energy statistic.
    pub sample_sizes: Vec<usize>,
}

impl GromovReport {
    pub fn consistent(&self, ks_threshold: f64, energy_threshold: f64) -> bool {
        self.pair_ks < ks_threshold && self.triple_energy < energy_threshold
    }
}

/// Cap on the subsample for the quadratic energy statistic.
pub const ENERGY_SUBSAMPLE: usize = 2000;

/// Compares two spaces through `replicates` independent draws of three
/// points each.
pub fn gromov_weak_compare(a: &FiniteUms, b: &FiniteUms, replicates: usize, seed: u64) -> Result<GromovReport> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least two replicates".to_string()));
    }
    let draw = |space: &FiniteUms, seed: u64| {
        replicate(seed, replicates, |_, rng| {
            let m = space.matrix_for(&space.sample_indices(3, rng), Metric::Plain);
            [m[0][1], m[0][2], m[1][2]]
        })
    };
    let ta = draw(a, seed);
    let tb = draw(b, seed ^ 0x9E37_79B9);
    let pa: Vec<f64> = ta.iter().map(|t| t[0]).collect();
    let pb: Vec<f64> = tb.iter().map(|t| t[0]).collect();
    let pair_ks = ks_two_sample(&pa, &pb)?;
    let sub = replicates.min(ENERGY_SUBSAMPLE);
    let triple_energy = energy_coefficient(&ta[..sub], &tb[..sub]);
    Ok(GromovReport {
        pair_ks,
        triple_energy,
        sample_sizes: vec![replicates, sub],
    })
}

fn euclid(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `(2 E|X-Y| - E|X-X'| - E|Y-Y'|) / (2 E|X-Y|)`, with unbiased
/// within-sample means; 0 when both samples are constant and equal.
fn energy_coefficient(x: &[[f64; 3]], y: &[[f64; 3]]) -> f64 {
    let mean_cross = x.iter().flat_map(|a| y.iter().map(move |b| euclid(a, b))).sum::<f64>()
        / (x.len() * y.len()) as f64;
    let within = |s: &[[f64; 3]]| {
        let mut total = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                total += euclid(&s[i], &s[j]);
            }
        }
        2.0 * total / (s.len() * (s.len() - 1)) as f64
    };
    if mean_cross == 0.0 {
        return 0.0;
    }
    ((2.0 * mean_cross - within(x) - within(y)) / (2.0 * mean_cross)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{Tooth, ToothComb};
    use crate::replicate::rng_from_seed;

    /// z1, z2 are zero-weight twins at 0.1 from each other and 1/2 from mass.
    fn twins() -> FiniteUms {
        let dist = vec![
            vec![0.0, 0.25, 0.5, 0.5],
            vec![0.25, 0.0, 0.5, 0.5],
            vec![0.5, 0.5, 0.0, 0.1],
            vec![0.5, 0.5, 0.1, 0.0],
        ];
        FiniteUms::new(dist, vec![0.5, 0.5, 0.0, 0.0]).unwrap()
    }

    /// A random space with dyadic distances, some points weightless.
    fn dyadic_space<R: Rng>(rng: &mut R, n: usize) -> FiniteUms {
        let teeth: Vec<Tooth> = (0..12)
            .map(|i| Tooth::new((i as f64 + 0.5) / 12.0, rng.random_range(1..16) as f64 / 8.0))
            .collect();
        let comb = ToothComb::new(teeth).unwrap();
        let pos: Vec<f64> = (0..n).map(|_| rng.random_range(1..1000) as f64 / 1000.0 + 1e-4).collect();
        let mut raw: Vec<f64> = (0..n).map(|i| if i == 0 || rng.random_bool(0.6) { 1.0 } else { 0.0 }).collect();
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|w| *w /= total);
        FiniteUms::from_comb(&comb, &pos, raw).unwrap()
    }

    #[test]
    fn ultrametric_checks() {
        assert!(validate_ultrametric(&[vec![0.0]]).unwrap());
        let bad = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        assert!(!validate_ultrametric(&bad).unwrap());
        assert!(validate_ultrametric(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(validate_ultrametric(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(validate_ultrametric(&[vec![1.0]]).is_err());
        assert!(FiniteUms::new(bad, vec![1.0 / 3.0; 3]).is_err());
        assert!(FiniteUms::new(vec![vec![0.0]], vec![0.5]).is_err());
    }

    #[test]
    fn height_and_star_examples() {
        let u = twins();
        assert_eq!(u.height_function(), vec![0.0, 0.0, 0.5, 0.5]);
        let star = u.star_metric();
        assert_eq!(star[2][3], 0.5);
        assert_eq!(u.dist()[2][3], 0.1);
        assert_eq!(star[2][0], 0.5);
        assert_eq!(star[0][1], 0.25);
        assert_eq!(u.backbone_distance(2, 3), 0.0);
        assert_eq!(u.backbone_distance(0, 1), 0.25);

        let massive = FiniteUms::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(massive.height_function(), vec![0.0, 0.0]);
        assert_eq!(massive.star_metric(), massive.dist());
        assert_eq!(massive.backbone_matrix(), massive.dist());
    }

    #[test]
    fn tree_distance_examples() {
        assert_eq!(tree_distance(0.7, 0.0, 0.0), 0.7);
        assert_eq!(tree_distance(0.0, 0.25, 1.0), 0.375);
        assert_eq!(tree_distance(1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn randomized_space_properties() {
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let n = rng.random_range(1..12);
            let u = dyadic_space(&mut rng, n);
            let f = u.height_function();
            let d = u.dist();
            let star = u.star_metric();
            assert!(validate_ultrametric(&star).unwrap());
            for x in 0..n {
                for y in 0..n {
                    // f is constant on balls of radius below f
                    if d[x][y] < f[x] {
                        assert_eq!(f[y], f[x]);
                    }
                    assert_eq!(star[x][y], star[y][x]);
                    let ds = u.backbone_distance(x, y);
                    if ds > 0.0 {
                        assert_eq!(d[x][y], ds + (f[x] + f[y]) / 2.0);
                        assert_eq!(star[x][y], ds + (f[x] + f[y]) / 2.0);
                    } else if x != y {
                        assert_eq!(star[x][y], f[x]);
                        assert_eq!(f[x], f[y]);
                    }
                }
            }
            assert_eq!(u.star_space().unwrap().height_function(), f);
        }
    }

    #[test]
    fn plain_and_star_samples_agree() {
        let mut rng = rng_from_seed(2);
        let u = twins();
        for _ in 0..100 {
            let idx = u.sample_indices(10, &mut rng);
            assert!(idx.iter().all(|&i| i < 2));
            let plain = u.matrix_for(&idx, Metric::Plain);
            assert_eq!(plain, u.matrix_for(&idx, Metric::Star));
            assert!(validate_ultrametric(&plain).unwrap());
        }
        let single = FiniteUms::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let m = sample_distance_matrix(&single, 4, &mut rng, Metric::Plain).unwrap();
        assert_eq!(m, vec![vec![0.0; 4]; 4]);
        assert!(sample_distance_matrix(&single, 0, &mut rng, Metric::Plain).is_err());
    }

    #[test]
    fn comparisons() {
        let u = twins();
        let same = gromov_weak_compare(&u, &u, 10_000, 3).unwrap();
        assert!(same.consistent(0.02, 0.01), "{same:?}");
        let star = gromov_weak_compare(&u, &u.star_space().unwrap(), 10_000, 4).unwrap();
        assert!(star.consistent(0.02, 0.01), "{star:?}");
        let one = FiniteUms::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let two = FiniteUms::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let diff = gromov_weak_compare(&one, &two, 10_000, 5).unwrap();
        assert!(!diff.consistent(0.02, 0.01));
        assert!(diff.pair_ks > 0.4);
    }

    #[test]
    fn json_shape() {
        let u = FiniteUms::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(s, r#"{"dist":[[0.0,1.0],[1.0,0.0]],"weights":[0.5,0.5]}"#);
        assert_eq!(serde_json::from_str::<FiniteUms>(&s).unwrap(), u);
        assert!(serde_json::from_str::<FiniteUms>(r#"{"dist":[[0.0,1.0],[1.0,0.0]],"weights":[0.5,0.4]}"#).is_err());
    }
}
