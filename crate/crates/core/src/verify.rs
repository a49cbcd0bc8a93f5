//! Verification suites at pinned parameters.
//!
//! Each suite returns one [`TestReport`] per check. Sub-streams of the master
//! seed are fixed per suite, so a suite's reports depend only on the seed.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::backbone::{sample_distance_matrix, validate_ultrametric, FiniteUms, Metric};
use crate::bridge::{adjacent_merge_evolution, lambda_comb_step, random_rational_bridge};
use crate::comb::{sample_kingman_comb, CombView, Tooth, ToothComb};
use crate::error::{Error, Result};
use crate::evolve::stationarity_probe;
use crate::interval::IntervalPartition;
use crate::lambda::intertwining::{all_compositions, intertwining_check};
use crate::lambda::{simulate_composition_chain_with, simulate_partition_chain_with, LambdaMeasure, RateTable};
use crate::paintbox::{
    distance_matrix, empirical_interval_partition, ordered_paintbox, paintbox_sample, sample_positions,
    uniform_consistent_ordering,
};
use crate::partition::{CoalescentTrajectory, Partition};
use crate::replicate::{replicate, stream_seed};
use crate::stats::{chi_square_uniform, ks_one_sample, ks_two_sample, mean, TestReport, CHI2_5DF_999};
use crate::uniform_open;

/// The named suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Intertwining,
    Projection,
    KingmanPair,
    EmpiricalConvergence,
    Semigroup,
    UniformOrdering,
    EvolveStationarity,
    Figure2,
    StarMetric,
    Properties,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Intertwining,
        Suite::Projection,
        Suite::KingmanPair,
        Suite::EmpiricalConvergence,
        Suite::Semigroup,
        Suite::UniformOrdering,
        Suite::EvolveStationarity,
        Suite::Figure2,
        Suite::StarMetric,
        Suite::Properties,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Intertwining => "intertwining",
            Suite::Projection => "projection",
            Suite::KingmanPair => "kingman-pair",
            Suite::EmpiricalConvergence => "empirical-convergence",
            Suite::Semigroup => "semigroup",
            Suite::UniformOrdering => "uniform-ordering",
            Suite::EvolveStationarity => "evolve-stationarity",
            Suite::Figure2 => "figure2",
            Suite::StarMetric => "star-metric",
            Suite::Properties => "properties",
        }
    }

    pub fn run(self, seed: u64) -> Result<Vec<TestReport>> {
        let seed = stream_seed(seed, self as u64);
        match self {
            Suite::Intertwining => intertwining(seed),
            Suite::Projection => projection(seed),
            Suite::KingmanPair => kingman_pair(seed),
            Suite::EmpiricalConvergence => empirical_convergence(seed),
            Suite::Semigroup => semigroup(seed),
            Suite::UniformOrdering => uniform_ordering(seed),
            Suite::EvolveStationarity => evolve_stationarity(seed),
            Suite::Figure2 => figure2(seed),
            Suite::StarMetric => star_metric(seed),
            Suite::Properties => properties(seed),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

fn sub(seed: u64, i: u64) -> u64 {
    stream_seed(seed, 0x5EED_0000 + i)
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Generator and composition-chain generator agree after averaging over
/// orderings, checked exactly on every partition of `[n]`.
pub fn intertwining(seed: u64) -> Result<Vec<TestReport>> {
    const FUNCTIONS: usize = 20;
    let measures = [
        LambdaMeasure::kingman(),
        LambdaMeasure::uniform(),
        LambdaMeasure::beta(2.0, 2.0)?,
        LambdaMeasure::dirac(0.5)?,
    ];
    let mut rng = crate::replicate::rng_from_seed(seed);
    let mut reports = Vec::new();
    for lambda in &measures {
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        for n in 2..=5 {
            let comps = all_compositions(n);
            for _ in 0..FUNCTIONS {
                let values: HashMap<_, f64> = comps.iter().map(|c| (c.clone(), rng.random_range(-1.0..1.0))).collect();
                worst = worst.max(intertwining_check(lambda, n, &|c| values[c])?);
                checked += 1;
            }
        }
        reports.push(TestReport::new(format!("intertwining/{lambda}"), worst, 1e-9, vec![checked]));
    }
    Ok(reports)
}

/// Block counts of the composition chain against the partition chain.
pub fn projection(seed: u64) -> Result<Vec<TestReport>> {
    const N: usize = 20;
    const REPLICATES: usize = 10_000;
    let table = RateTable::new(LambdaMeasure::beta(2.0, 2.0)?, N)?;
    let ks = [10, 5, 1];
    let hits = |traj: &CoalescentTrajectory| -> Result<Vec<f64>> {
        ks.iter()
            .map(|&k| {
                traj.hitting_time(k)
                    .ok_or_else(|| Error::InvalidTrajectory(format!("never reached {k} blocks")))
            })
            .collect()
    };
    let partition = collect(replicate(sub(seed, 0), REPLICATES, |_, rng| {
        hits(&simulate_partition_chain_with(&table, N, rng)?)
    }))?;
    let composition = collect(replicate(sub(seed, 1), REPLICATES, |_, rng| {
        hits(&simulate_composition_chain_with(&table, N, rng)?.to_partitions())
    }))?;
    ks.iter()
        .enumerate()
        .map(|(i, k)| {
            let a: Vec<f64> = partition.iter().map(|h| h[i]).collect();
            let b: Vec<f64> = composition.iter().map(|h| h[i]).collect();
            Ok(TestReport::new(
                format!("projection/time-to-{k}-blocks"),
                ks_two_sample(&a, &b)?,
                0.03,
                vec![REPLICATES, REPLICATES],
            ))
        })
        .collect()
}

/// Two paintbox points on a Kingman comb merge after an Exp(1) time.
pub fn kingman_pair(seed: u64) -> Result<Vec<TestReport>> {
    const TEETH: usize = 500;
    const REPLICATES: usize = 100_000;
    let times = collect(replicate(seed, REPLICATES, |_, rng| {
        let comb = sample_kingman_comb(rng, TEETH)?;
        let (_, traj) = paintbox_sample(&comb, 2, rng)?;
        traj.merge_time(0, 1)
            .ok_or_else(|| Error::InvalidTrajectory("pair never merged".to_string()))
    }))?;
    let d = ks_one_sample(&times, |t| 1.0 - (-t).exp())?;
    Ok(vec![TestReport::new("kingman-pair/exp1", d, 0.015, vec![REPLICATES])])
}

/// The fixed comb of the convergence suite.
pub fn three_tooth_comb() -> ToothComb {
    ToothComb::new(vec![Tooth::new(0.2, 1.0), Tooth::new(0.5, 2.0), Tooth::new(0.7, 0.5)])
        .expect("valid teeth")
}

/// Mean over replicates of `max_t d_H(I^n_t, I_t)` for an ordered paintbox
/// of `n` points, the max taken over the event times of the comb.
pub fn empirical_hausdorff_mean<C: CombView + Sync + ?Sized>(
    comb: &C,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    let times = comb.event_times();
    let targets: Vec<IntervalPartition> = times.iter().map(|&t| comb.partition_at(t)).collect();
    let worst = collect(replicate(seed, replicates, |_, rng| {
        let (_, nested) = ordered_paintbox(comb, n, rng)?;
        Ok(times
            .iter()
            .zip(&targets)
            .map(|(&t, target)| empirical_interval_partition(nested.composition_at(t)).hausdorff(target))
            .fold(0.0, f64::max))
    }))?;
    Ok(mean(&worst))
}

pub fn empirical_convergence(seed: u64) -> Result<Vec<TestReport>> {
    const REPLICATES: usize = 100;
    let comb = three_tooth_comb();
    let sizes = [100, 1_000, 10_000];
    let means = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| empirical_hausdorff_mean(&comb, n, REPLICATES, sub(seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let increases = means.windows(2).filter(|w| !(w[1] < w[0])).count();
    Ok(vec![
        TestReport::new("empirical-convergence/mean-hausdorff", means[2], 0.05, vec![sizes[2], REPLICATES]),
        TestReport::new(
            "empirical-convergence/decreasing",
            increases as f64,
            1.0,
            vec![sizes[0], sizes[1], sizes[2]],
        ),
    ])
}

/// Largest mass after time `t` from adjacent merging and from one step of
/// the empirical Λ-comb.
pub fn semigroup(seed: u64) -> Result<Vec<TestReport>> {
    const COMPONENTS: usize = 10;
    const T: f64 = 0.5;
    const M: usize = 2000;
    const REPLICATES: usize = 10_000;
    let cuts: Vec<f64> = (1..COMPONENTS).map(|i| i as f64 / COMPONENTS as f64).collect();
    let start = IntervalPartition::from_cuts(&cuts)?;
    let table = RateTable::new(LambdaMeasure::kingman(), M)?;
    // masses are sums of tenths; the two routes round them differently, and
    // the KS statistic must not split an atom over neighbouring floats
    let snap = |x: f64| (x * 1e9).round() / 1e9;
    let direct = collect(replicate(sub(seed, 0), REPLICATES, |_, rng| {
        Ok(snap(adjacent_merge_evolution(&start, &table, T, rng)?.mass_partition().largest()))
    }))?;
    let via_comb = collect(replicate(sub(seed, 1), REPLICATES, |_, rng| {
        Ok(snap(lambda_comb_step(&start, &table, T, M, rng)?.mass_partition().largest()))
    }))?;
    Ok(vec![TestReport::new(
        "semigroup/largest-mass",
        ks_two_sample(&direct, &via_comb)?,
        0.03,
        vec![REPLICATES, REPLICATES],
    )])
}

fn ordering_index(order: &[usize]) -> usize {
    // lexicographic rank of a permutation of {0, 1, 2}
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.iter().position(|p| p == order).expect("a permutation of three")
}

/// Orderings of `[3]` drawn consistently with the star and the caterpillar.
pub fn uniform_ordering(seed: u64) -> Result<Vec<TestReport>> {
    const DRAWS: usize = 60_000;
    let star = CoalescentTrajectory::new(vec![
        (0.0, Partition::singletons(3)),
        (1.0, Partition::from_assignment(&[0, 0, 0])),
    ])?;
    let caterpillar = CoalescentTrajectory::new(vec![
        (0.0, Partition::singletons(3)),
        (1.0, Partition::from_assignment(&[0, 0, 1])),
        (2.0, Partition::from_assignment(&[0, 0, 0])),
    ])?;
    let count = |traj: &CoalescentTrajectory, seed: u64| -> Result<[u64; 6]> {
        let drawn = collect(replicate(seed, DRAWS, |_, rng| {
            let nested = uniform_consistent_ordering(traj, rng)?;
            let order: Vec<usize> = nested.events()[0].1.blocks().iter().flatten().copied().collect();
            Ok(ordering_index(&order))
        }))?;
        let mut counts = [0u64; 6];
        for i in drawn {
            counts[i] += 1;
        }
        Ok(counts)
    };
    let star_counts = count(&star, sub(seed, 0))?;
    let cat_counts = count(&caterpillar, sub(seed, 1))?;
    // 0 and 1 must be adjacent: 012, 102, 201, 210
    let legal = [true, false, true, false, true, true];
    let illegal_hits: u64 = (0..6).filter(|&i| !legal[i]).map(|i| cat_counts[i]).sum();
    let legal_missed = (0..6).filter(|&i| legal[i] && cat_counts[i] == 0).count();
    Ok(vec![
        TestReport::new("uniform-ordering/star-chi2", chi_square_uniform(&star_counts)?, CHI2_5DF_999, vec![DRAWS]),
        TestReport::exact(
            "uniform-ordering/caterpillar-support",
            illegal_hits as usize + legal_missed,
            DRAWS,
        ),
    ])
}

/// Tree height of fresh Kingman combs against combs moved by one step.
pub fn evolve_stationarity(seed: u64) -> Result<Vec<TestReport>> {
    const TEETH: usize = 500;
    const S: f64 = 0.3;
    const REPLICATES: usize = 10_000;
    const REFERENCE: usize = 100_000;
    let d = stationarity_probe(TEETH, S, REPLICATES, REFERENCE, seed)?;
    Ok(vec![TestReport::new(
        "evolve-stationarity/tree-height",
        d,
        0.02,
        vec![REPLICATES, REFERENCE],
    )])
}

/// Two combs with masses 1/3, 1/6, 1/6, 1/9, 1/9, 1/9 merging into 2/3 and
/// 1/3 at time 1 and into one block at time 2. On the left the 1/6 and 1/9
/// blocks merge together; on the right the 1/6 blocks join the 1/3 block.
///
/// The masses are multiples of `2^-20`, so every length is exact.
pub fn figure2_combs() -> (ToothComb, ToothComb) {
    let u = (-20f64).exp2();
    let d = 116_508.0 * u;
    let b = 174_764.0 * u;
    let a = 3.0 * d;
    let build = |masses: &[f64], tall: usize| {
        let mut acc = 0.0;
        let teeth = masses[..masses.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, m)| {
                acc += m;
                Tooth::new(acc, if i == tall { 2.0 } else { 1.0 })
            })
            .collect();
        ToothComb::new(teeth).expect("valid teeth")
    };
    (build(&[a, b, b, d, d, d], 0), build(&[d, d, d, a, b, b], 2))
}

/// Fraction of points in a smallest component at time 0 that sit in the
/// largest component at time 1, or `None` if no point hit a smallest one.
pub fn figure2_statistic(comb: &ToothComb, positions: &[f64]) -> Option<f64> {
    let first = comb.partition_at(0.0);
    let second = comb.partition_at(1.0);
    let smallest = first.components().iter().map(|c| c.len()).fold(f64::INFINITY, f64::min);
    let largest = second.mass_partition().largest();
    let mut hits = 0usize;
    let mut total = 0usize;
    for &x in positions {
        let Some(i) = first.locate(x) else { continue };
        if first.components()[i].len() != smallest {
            continue;
        }
        total += 1;
        if second.locate(x).is_some_and(|j| second.components()[j].len() == largest) {
            hits += 1;
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

pub fn figure2(seed: u64) -> Result<Vec<TestReport>> {
    const SAMPLES: usize = 10_000;
    let (left, right) = figure2_combs();
    let mut times = left.event_times();
    times.extend(right.event_times());
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mismatches = times
        .iter()
        .filter(|&&t| left.partition_at(t).mass_partition() != right.partition_at(t).mass_partition())
        .count();
    let mut rng = crate::replicate::rng_from_seed(seed);
    let positions = sample_positions(&mut rng, SAMPLES);
    let none = || Error::InvalidArgument("no sample fell in a smallest component".to_string());
    let l = figure2_statistic(&left, &positions).ok_or_else(none)?;
    let r = figure2_statistic(&right, &positions).ok_or_else(none)?;
    Ok(vec![
        TestReport::exact("figure2/same-mass-coalescent", mismatches, times.len()),
        // the left comb must send almost every such point to the large block
        TestReport::new("figure2/left-miss-rate", 1.0 - l, 0.05, vec![SAMPLES]),
        TestReport::new("figure2/right-hit-rate", r, 0.05, vec![SAMPLES]),
    ])
}

/// A space of `n` points of a Kingman comb, `n_zero` of them weightless.
pub fn random_comb_space<R: Rng + ?Sized>(rng: &mut R, n: usize, n_zero: usize) -> Result<FiniteUms> {
    if n_zero >= n {
        return Err(Error::InvalidArgument("at least one point needs weight".to_string()));
    }
    let comb = sample_kingman_comb(rng, n)?;
    let positions = sample_positions(rng, n);
    let zero = rand::seq::index::sample(rng, n, n_zero).into_vec();
    let mut weights: Vec<f64> = (0..n).map(|_| uniform_open(rng)).collect();
    for i in zero {
        weights[i] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    FiniteUms::from_comb(&comb, &positions, weights)
}

/// Sampled distance matrices under `d` and under the star metric, drawn
/// with identical random streams.
pub fn star_metric(seed: u64) -> Result<Vec<TestReport>> {
    const POINTS: usize = 50;
    const ZERO: usize = 20;
    const REPLICATES: usize = 100;
    let differ = collect(replicate(seed, REPLICATES, |_, rng| {
        let space = random_comb_space(rng, POINTS, ZERO)?;
        let mut a = rng.clone();
        let mut b = rng.clone();
        let plain = sample_distance_matrix(&space, POINTS, &mut a, Metric::Plain)?;
        let star = sample_distance_matrix(&space, POINTS, &mut b, Metric::Star)?;
        Ok(plain != star)
    }))?;
    let violations = differ.into_iter().filter(|&d| d).count();
    Ok(vec![TestReport::exact("star-metric/identical-matrices", violations, REPLICATES)])
}

fn random_interval_partition<R: Rng + ?Sized>(rng: &mut R) -> Result<IntervalPartition> {
    let k = rng.random_range(0..6);
    let mut ends: Vec<f64> = (0..2 * k).map(|_| uniform_open(rng)).collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    if rng.random_bool(0.5) || ends.len() % 2 == 1 {
        return IntervalPartition::from_cuts(&ends);
    }
    let pairs: Vec<(f64, f64)> = ends.chunks(2).map(|p| (p[0], p[1])).collect();
    IntervalPartition::from_pairs(&pairs)
}

/// Hausdorff pseudometric axioms, ultrametricity of sampled matrices and
/// associativity of rational bridge composition.
pub fn properties(seed: u64) -> Result<Vec<TestReport>> {
    const TRIPLES: usize = 10_000;
    const MATRICES: usize = 1_000;
    const BRIDGES: usize = 500;
    let hausdorff = collect(replicate(sub(seed, 0), TRIPLES, |_, rng| {
        let a = random_interval_partition(rng)?;
        let b = random_interval_partition(rng)?;
        let c = random_interval_partition(rng)?;
        let symmetric = a.hausdorff(&b) == b.hausdorff(&a);
        let triangle = a.hausdorff(&c) <= a.hausdorff(&b) + b.hausdorff(&c) + 1e-12;
        Ok(!(symmetric && triangle))
    }))?;
    let ultrametric = collect(replicate(sub(seed, 1), MATRICES, |i, rng| {
        let n = rng.random_range(2..20);
        let matrix = if i % 2 == 0 {
            let comb = sample_kingman_comb(rng, 100)?;
            let positions = sample_positions(rng, n);
            distance_matrix(&positions, &comb)?
                .into_iter()
                .map(|row| row.into_iter().map(|h| h.to_f64_lossy()).collect())
                .collect()
        } else {
            let space = random_comb_space(rng, 30, 10)?;
            sample_distance_matrix(&space, n, rng, Metric::Star)?
        };
        Ok(!validate_ultrametric(&matrix)?)
    }))?;
    let associativity = replicate(sub(seed, 2), BRIDGES, |_, rng| {
        let a = random_rational_bridge(rng);
        let b = random_rational_bridge(rng);
        let c = random_rational_bridge(rng);
        a.compose(&b).compose(&c) != a.compose(&b.compose(&c))
    });
    let count = |v: &[bool]| v.iter().filter(|&&x| x).count();
    Ok(vec![
        TestReport::exact("properties/hausdorff-pseudometric", count(&hausdorff), TRIPLES),
        TestReport::exact("properties/sampled-ultrametric", count(&ultrametric), MATRICES),
        TestReport::exact("properties/rational-compose-associative", count(&associativity), BRIDGES),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn figure2_masses() {
        let (left, right) = figure2_combs();
        for comb in [&left, &right] {
            let m = comb.partition_at(0.0).mass_partition();
            let third = m.masses()[0];
            let ninth = m.masses()[5];
            assert_eq!(third, 3.0 * ninth);
            assert!((third - 1.0 / 3.0).abs() < 1e-5);
            assert!((m.masses()[1] - 1.0 / 6.0).abs() < 1e-5);
            assert_eq!(comb.partition_at(1.0).mass_partition().masses(), &[1.0 - third, third]);
            assert_eq!(comb.partition_at(2.0), IntervalPartition::full());
        }
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        assert_eq!(figure2_statistic(&left, &grid), Some(1.0));
        assert_eq!(figure2_statistic(&right, &grid), Some(0.0));
    }

    #[test]
    fn convergence_shrinks_with_n() {
        let comb = three_tooth_comb();
        let small = empirical_hausdorff_mean(&comb, 50, 40, 1).unwrap();
        let large = empirical_hausdorff_mean(&comb, 5000, 40, 2).unwrap();
        assert!(large < small, "{large} {small}");
    }

    #[test]
    fn comb_space_shape() {
        let mut rng = crate::replicate::rng_from_seed(3);
        let s = random_comb_space(&mut rng, 10, 4).unwrap();
        assert_eq!(s.weights().iter().filter(|&&w| w == 0.0).count(), 4);
        assert!(random_comb_space(&mut rng, 3, 3).is_err());
    }
}
