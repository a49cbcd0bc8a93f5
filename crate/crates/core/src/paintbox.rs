//! Sampling coalescents and nested compositions from combs.
//!
//! Points `x < y < z` of a comb satisfy `d(x, z) = max(d(x, y), d(y, z))`,
//! because the comb distance is the supremum of the comb function over the
//! closed interval between two points. Single linkage on `n` sorted points
//! therefore only needs the `n - 1` distances between neighbours: at time
//! `t` the blocks are the runs of sorted points joined by gaps with distance
//! at most `t`.

use rand::Rng;

use crate::comb::{redraw_duplicates, CombView, Height};
use crate::error::{Error, Result};
use crate::interval::IntervalPartition;
use crate::partition::{CoalescentTrajectory, Composition, NestedCompositionTrajectory, Partition};
use crate::uniform_open;

/// `n` i.i.d. uniforms on (0, 1), pairwise distinct.
pub fn sample_positions<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut positions: Vec<f64> = (0..n).map(|_| uniform_open(rng)).collect();
    redraw_duplicates(rng, &mut positions);
    positions
}

/// Runs of sorted points at each change time, as index lists in left-to-right order.
fn linkage_runs<C: CombView + ?Sized>(comb: &C, positions: &[f64]) -> Result<Vec<(f64, Vec<Vec<usize>>)>> {
    if positions.is_empty() {
        return Err(Error::InvalidArgument("need at least one point".to_string()));
    }
    if let Some(&x) = positions.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::OutOfUnitInterval(x));
    }
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
    if order.windows(2).any(|w| positions[w[0]] == positions[w[1]]) {
        return Err(Error::InvalidArgument("positions must be distinct".to_string()));
    }
    let gaps: Vec<Height> = order
        .windows(2)
        .map(|w| comb.distance(positions[w[0]], positions[w[1]]))
        .collect();
    let mut times: Vec<f64> = gaps.iter().filter_map(|g| g.finite()).collect();
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let runs_at = |t: f64| {
        let mut runs = vec![vec![order[0]]];
        for (k, gap) in gaps.iter().enumerate() {
            if *gap <= Height::Finite(t) {
                runs.last_mut().unwrap().push(order[k + 1]);
            } else {
                runs.push(vec![order[k + 1]]);
            }
        }
        runs
    };
    Ok(times.into_iter().map(|t| (t, runs_at(t))).collect())
}

/// The coalescent induced by points at the given positions.
pub fn paintbox_from_positions<C: CombView + ?Sized>(comb: &C, positions: &[f64]) -> Result<CoalescentTrajectory> {
    let n = positions.len();
    let events = linkage_runs(comb, positions)?
        .into_iter()
        .map(|(t, runs)| {
            let mut assignment = vec![0; n];
            for (b, run) in runs.iter().enumerate() {
                for &i in run {
                    assignment[i] = b;
                }
            }
            (t, Partition::from_assignment(&assignment))
        })
        .collect();
    CoalescentTrajectory::new(events)
}

/// Paintbox: `n` uniform points, `i ~ j` at time `t` iff `d(V_i, V_j) <= t`.
pub fn paintbox_sample<C: CombView + ?Sized, R: Rng + ?Sized>(
    comb: &C,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, CoalescentTrajectory)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".to_string()));
    }
    let positions = sample_positions(rng, n);
    let traj = paintbox_from_positions(comb, &positions)?;
    Ok((positions, traj))
}

/// The nested composition induced by points at the given positions; blocks
/// are ordered left to right.
pub fn ordered_paintbox_from_positions<C: CombView + ?Sized>(
    comb: &C,
    positions: &[f64],
) -> Result<NestedCompositionTrajectory> {
    let n = positions.len();
    let events = linkage_runs(comb, positions)?
        .into_iter()
        .map(|(t, runs)| Ok((t, Composition::new(n, runs)?)))
        .collect::<Result<Vec<_>>>()?;
    NestedCompositionTrajectory::new(events)
}

/// Ordered paintbox with `n` uniform points.
pub fn ordered_paintbox<C: CombView + ?Sized, R: Rng + ?Sized>(
    comb: &C,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, NestedCompositionTrajectory)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".to_string()));
    }
    let positions = sample_positions(rng, n);
    let traj = ordered_paintbox_from_positions(comb, &positions)?;
    Ok((positions, traj))
}

/// Consecutive intervals with lengths `|block| / n` in composition order.
pub fn empirical_interval_partition(comp: &Composition) -> IntervalPartition {
    let n = comp.n();
    let mut cuts = Vec::with_capacity(comp.len());
    let mut seen = 0;
    for block in &comp.blocks()[..comp.len().saturating_sub(1)] {
        seen += block.len();
        cuts.push(seen as f64 / n as f64);
    }
    IntervalPartition::from_cuts(&cuts).expect("cuts lie in (0, 1)")
}

/// Pairwise comb distances; the diagonal is 0.
pub fn distance_matrix<C: CombView + ?Sized>(positions: &[f64], comb: &C) -> Result<Vec<Vec<Height>>> {
    if let Some(&x) = positions.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::OutOfUnitInterval(x));
    }
    let n = positions.len();
    let mut m = vec![vec![Height::ZERO; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = comb.distance(positions[i], positions[j]);
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    Ok(m)
}

/// Orders the blocks of a coalescent uniformly among the nested compositions
/// projecting onto it.
///
/// Index `k` is inserted into the current linear order of `0..k`. The order
/// must keep every block of every event contiguous.
///
/// * If `k` shares a block of the first event with some `j < k`, it goes next to `j`.
/// * Otherwise let `e` be the first event at which `k` meets some `j < k`
///   and `S` those `j`. `S` is a run of the order and a union of blocks of
///   event `e - 1`; `k` goes to either end of the run or between two of
///   those blocks.
/// * If `k` meets no `j < k`, it goes between two blocks of the last event
///   or at either end.
///
/// The number of choices at each step does not depend on earlier choices,
/// so a uniform choice at each step gives a uniform ordering.
pub fn uniform_consistent_ordering<R: Rng + ?Sized>(
    traj: &CoalescentTrajectory,
    rng: &mut R,
) -> Result<NestedCompositionTrajectory> {
    let events = traj.events();
    let n = traj.n();
    let last = &events[events.len() - 1].1;
    // least element of each block, per event
    let leasts: Vec<Vec<usize>> = events
        .iter()
        .map(|(_, p)| {
            let mut least = vec![usize::MAX; p.num_blocks()];
            for (i, &l) in p.labels().iter().enumerate() {
                least[l] = least[l].min(i);
            }
            least
        })
        .collect();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        if k == 0 {
            order.push(0);
            continue;
        }
        let least_of_block = |e: usize| leasts[e][events[e].1.label(k)];
        let first_meet = (0..events.len()).find(|&e| least_of_block(e) < k);
        let slot = match first_meet {
            Some(0) => {
                let mate = least_of_block(0);
                order.iter().position(|&j| j == mate).unwrap() + 1
            }
            Some(e) => {
                let meet = &events[e].1;
                let before = &events[e - 1].1;
                let run: Vec<usize> = order
                    .iter()
                    .enumerate()
                    .filter(|(_, &j)| meet.same_block(j, k))
                    .map(|(pos, _)| pos)
                    .collect();
                let (start, end) = (run[0], run[run.len() - 1] + 1);
                if end - start != run.len() {
                    return Err(Error::InvalidTrajectory(
                        "blocks cannot be ordered consistently".to_string(),
                    ));
                }
                let mut slots = vec![start];
                for pos in start + 1..end {
                    if !before.same_block(order[pos - 1], order[pos]) {
                        slots.push(pos);
                    }
                }
                slots.push(end);
                slots[rng.random_range(0..slots.len())]
            }
            None => {
                let mut slots = vec![0];
                for pos in 1..order.len() {
                    if !last.same_block(order[pos - 1], order[pos]) {
                        slots.push(pos);
                    }
                }
                slots.push(order.len());
                slots[rng.random_range(0..slots.len())]
            }
        };
        order.insert(slot, k);
    }
    let rank = {
        let mut r = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            r[i] = pos;
        }
        r
    };
    let composed = events
        .iter()
        .map(|(t, p)| {
            let mut blocks = p.blocks();
            blocks.sort_by_key(|b| b.iter().map(|&i| rank[i]).min().unwrap());
            Ok((*t, Composition::new(n, blocks)?))
        })
        .collect::<Result<Vec<_>>>()?;
    NestedCompositionTrajectory::new(composed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{sample_kingman_comb, Comb, Tooth};
    use crate::replicate::rng_from_seed;
    use std::collections::{BTreeSet, HashMap};

    fn two_teeth() -> Comb {
        Comb::from_teeth(vec![Tooth::new(1.0 / 3.0, 1.0), Tooth::new(2.0 / 3.0, 2.0)]).unwrap()
    }

    #[test]
    fn single_tooth_pair() {
        let h = 0.7;
        let comb = Comb::from_teeth(vec![Tooth::new(0.5, h)]).unwrap();
        let mut rng = rng_from_seed(1);
        let reps = 20_000;
        let mut merged_late = 0;
        for _ in 0..reps {
            let (_, traj) = paintbox_sample(&comb, 2, &mut rng).unwrap();
            match traj.merge_time(0, 1) {
                Some(t) if t == h => merged_late += 1,
                Some(t) => assert_eq!(t, 0.0),
                None => panic!("single-tooth comb ends at (0, 1)"),
            }
        }
        // P = 1/2, sd = 0.0035
        let p = merged_late as f64 / reps as f64;
        assert!((p - 0.5).abs() < 0.02, "{p}");
    }

    #[test]
    fn ends_in_one_block() {
        let mut rng = rng_from_seed(2);
        let comb = two_teeth();
        let (_, traj) = paintbox_sample(&comb, 50, &mut rng).unwrap();
        assert_eq!(traj.events().last().unwrap().1.num_blocks(), 1);
        assert!(paintbox_sample(&comb, 0, &mut rng).is_err());
    }

    #[test]
    fn matches_pairwise_distances() {
        let mut rng = rng_from_seed(3);
        let comb = sample_kingman_comb(&mut rng, 40).unwrap();
        let (pos, traj) = paintbox_sample(&comb, 30, &mut rng).unwrap();
        let m = distance_matrix(&pos, &comb).unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                let expect = if i == j { Some(0.0) } else { d.finite() };
                assert_eq!(traj.merge_time(i, j), expect);
            }
        }
    }

    #[test]
    fn ordered_example() {
        let comb = two_teeth();
        let traj = ordered_paintbox_from_positions(&comb, &[0.1, 0.5, 0.9]).unwrap();
        let at = |t: f64| traj.composition_at(t).blocks().to_vec();
        assert_eq!(at(0.0), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(at(1.0), vec![vec![0, 1], vec![2]]);
        assert_eq!(at(1.99), vec![vec![0, 1], vec![2]]);
        assert_eq!(at(2.0), vec![vec![0, 1, 2]]);
        let single = ordered_paintbox_from_positions(&comb, &[0.3]).unwrap();
        assert_eq!(single.events().len(), 1);
    }

    #[test]
    fn ordered_projects_to_unordered() {
        let mut rng = rng_from_seed(4);
        let comb = sample_kingman_comb(&mut rng, 100).unwrap();
        let pos = sample_positions(&mut rng, 60);
        let ordered = ordered_paintbox_from_positions(&comb, &pos).unwrap();
        assert_eq!(ordered.to_partitions(), paintbox_from_positions(&comb, &pos).unwrap());
    }

    #[test]
    fn empirical_examples() {
        let comp = Composition::new(5, vec![vec![1, 2], vec![4], vec![0, 3]]).unwrap();
        let expect = IntervalPartition::from_cuts(&[2.0 / 5.0, 3.0 / 5.0]).unwrap();
        assert_eq!(empirical_interval_partition(&comp), expect);
        let one = Composition::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(empirical_interval_partition(&one), IntervalPartition::full());
        let two = Composition::new(2, vec![vec![1], vec![0]]).unwrap();
        assert_eq!(
            empirical_interval_partition(&two),
            IntervalPartition::from_pairs(&[(0.0, 0.5), (0.5, 1.0)]).unwrap()
        );
    }

    #[test]
    fn matrix_example() {
        let h = 0.7;
        let comb = Comb::from_teeth(vec![Tooth::new(0.5, h)]).unwrap();
        let m = distance_matrix(&[0.2, 0.4, 0.7], &comb).unwrap();
        let z = Height::ZERO;
        let t = Height::Finite(h);
        assert_eq!(m, vec![vec![z, z, t], vec![z, z, t], vec![t, t, z]]);
        assert!(distance_matrix(&[0.0], &comb).is_err());
    }

    /// All nested compositions over `traj`, found by trying every order of
    /// the first event's blocks.
    fn consistent_orderings(traj: &CoalescentTrajectory) -> BTreeSet<Vec<Vec<usize>>> {
        let first = traj.events()[0].1.blocks();
        let mut out = BTreeSet::new();
        let mut idx: Vec<usize> = (0..first.len()).collect();
        permute(&mut idx, 0, &mut |perm| {
            let order: Vec<usize> = perm.iter().flat_map(|&b| first[b].clone()).collect();
            let contiguous = traj.events().iter().all(|(_, p)| {
                let mut seen = BTreeSet::new();
                let mut prev = None;
                order.iter().all(|&i| {
                    let l = p.label(i);
                    let ok = prev == Some(l) || seen.insert(l);
                    prev = Some(l);
                    ok
                })
            });
            if contiguous {
                out.insert(perm.iter().map(|&b| first[b].clone()).collect());
            }
        });
        out
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    fn ordering_counts(traj: &CoalescentTrajectory, draws: usize, seed: u64) -> HashMap<Vec<Vec<usize>>, usize> {
        let mut rng = rng_from_seed(seed);
        let mut counts = HashMap::new();
        for _ in 0..draws {
            let nested = uniform_consistent_ordering(traj, &mut rng).unwrap();
            assert_eq!(&nested.to_partitions(), traj);
            *counts
                .entry(nested.events()[0].1.blocks().to_vec())
                .or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn star_and_caterpillar() {
        let star = CoalescentTrajectory::new(vec![
            (0.0, Partition::singletons(3)),
            (1.0, Partition::from_assignment(&[0, 0, 0])),
        ])
        .unwrap();
        let counts = ordering_counts(&star, 6000, 5);
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&c| (c as f64 / 6000.0 - 1.0 / 6.0).abs() < 0.03));

        let caterpillar = CoalescentTrajectory::new(vec![
            (0.0, Partition::singletons(3)),
            (1.0, Partition::from_assignment(&[0, 0, 1])),
            (2.0, Partition::from_assignment(&[0, 0, 0])),
        ])
        .unwrap();
        let counts = ordering_counts(&caterpillar, 4000, 6);
        assert_eq!(counts.len(), 4);
        for order in counts.keys() {
            let pos = |i: usize| order.iter().position(|b| b == &vec![i]).unwrap();
            assert_eq!(pos(0).abs_diff(pos(1)), 1);
        }

        let trivial = CoalescentTrajectory::new(vec![(0.0, Partition::singletons(1))]).unwrap();
        assert_eq!(ordering_counts(&trivial, 3, 7).len(), 1);
    }

    #[test]
    fn support_matches_enumeration() {
        let mut rng = rng_from_seed(8);
        for trial in 0..20 {
            let comb = sample_kingman_comb(&mut rng, 8).unwrap();
            let n = 2 + trial % 4;
            let (_, traj) = paintbox_sample(&comb, n, &mut rng).unwrap();
            let legal = consistent_orderings(&traj);
            let counts = ordering_counts(&traj, 400 * legal.len(), 100 + trial as u64);
            let found: BTreeSet<_> = counts.keys().cloned().collect();
            assert_eq!(found, legal);
            let expect = 400.0;
            for &c in counts.values() {
                assert!((c as f64 - expect).abs() < 6.0 * expect.sqrt(), "{c}");
            }
        }
    }

    #[test]
    fn dusty_start_and_never_merging() {
        // blocks {0,2}, {1}, {3} at first, {0,1,2} later, 3 never joins
        let traj = CoalescentTrajectory::new(vec![
            (0.0, Partition::from_assignment(&[0, 1, 0, 2])),
            (1.0, Partition::from_assignment(&[0, 0, 0, 1])),
        ])
        .unwrap();
        let legal = consistent_orderings(&traj);
        assert_eq!(legal.len(), 4);
        let counts = ordering_counts(&traj, 2000, 9);
        assert_eq!(counts.keys().cloned().collect::<BTreeSet<_>>(), legal);
    }

    #[test]
    fn ordered_empirical_partitions_nest() {
        let mut rng = rng_from_seed(10);
        let comb = sample_kingman_comb(&mut rng, 30).unwrap();
        let (_, traj) = paintbox_sample(&comb, 25, &mut rng).unwrap();
        let nested = uniform_consistent_ordering(&traj, &mut rng).unwrap();
        let parts: Vec<IntervalPartition> = nested
            .events()
            .iter()
            .map(|(_, c)| empirical_interval_partition(c))
            .collect();
        assert!(parts.windows(2).all(|w| w[0].is_subset_of(&w[1])));
    }
}
