//! Bridges with drift and finitely many jumps, and the Λ-comb semigroup
//! built from them.
//!
//! A bridge is `B(x) = d·x + Σ_{V_i <= x} s_i` with `d + Σ s_i = 1`. It is
//! generic over the scalar so that composition can be checked exactly with
//! rationals; the simulation code uses `f64`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::comb::{redraw_duplicates, Comb, CombEvent};
use crate::error::{Error, Result};
use crate::interval::IntervalPartition;
use crate::lambda::{empirical_chain_partition, RateTable};
use crate::uniform_open;

/// Numbers a bridge can be built from.
pub trait Scalar: Clone + PartialOrd + Debug + Num + ToPrimitive {
    /// Allowed error in `drift + Σ sizes = 1`.
    fn tolerance() -> Self;
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-10
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }
}

/// A nondecreasing right-continuous map of `[0, 1]` onto itself with
/// `B(0) = 0` and `B(1) = 1`, linear between finitely many jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct Bridge<T: Scalar = f64> {
    drift: T,
    /// `(location, size)` sorted by location
    jumps: Vec<(T, T)>,
    /// `cumulative[i]` = sum of the sizes of jumps `0..=i`
    cumulative: Vec<T>,
}

impl<T: Scalar> Bridge<T> {
    /// Sorts the jumps. Locations must be distinct and in `(0, 1]`, sizes
    /// positive, the drift nonnegative, and the total 1.
    pub fn new(drift: T, mut jumps: Vec<(T, T)>) -> Result<Self> {
        let zero = T::zero();
        let one = T::one();
        if drift < zero {
            return Err(Error::InvalidBridge(format!("negative drift {drift:?}")));
        }
        for (v, s) in &jumps {
            if !(*v > zero && *v <= one) {
                return Err(Error::InvalidBridge(format!("jump location {v:?} outside (0, 1]")));
            }
            if !(*s > zero) {
                return Err(Error::InvalidBridge(format!("jump size {s:?} is not positive")));
            }
        }
        jumps.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("locations are comparable"));
        if jumps.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidBridge("repeated jump location".to_string()));
        }
        let mut acc = T::zero();
        let cumulative: Vec<T> = jumps
            .iter()
            .map(|(_, s)| {
                acc = acc.clone() + s.clone();
                acc.clone()
            })
            .collect();
        let total = drift.clone() + acc;
        let err = if total > one { total - one } else { one - total };
        if err > T::tolerance() {
            return Err(Error::InvalidBridge(format!(
                "drift plus jump sizes must be 1, off by {err:?}"
            )));
        }
        Ok(Bridge {
            drift,
            jumps,
            cumulative,
        })
    }

    /// `B(x) = x`.
    pub fn identity() -> Self {
        Bridge {
            drift: T::one(),
            jumps: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn drift(&self) -> &T {
        &self.drift
    }

    /// `(location, size)` pairs, sorted by location.
    pub fn jumps(&self) -> &[(T, T)] {
        &self.jumps
    }

    fn before(&self, i: usize) -> T {
        if i == 0 {
            T::zero()
        } else {
            self.cumulative[i - 1].clone()
        }
    }

    /// Value just after jump `i`.
    fn after_jump(&self, i: usize) -> T {
        self.drift.clone() * self.jumps[i].0.clone() + self.cumulative[i].clone()
    }

    /// `B(x)`.
    pub fn eval(&self, x: &T) -> T {
        let i = self.jumps.partition_point(|(v, _)| v <= x);
        self.drift.clone() * x.clone() + self.before(i)
    }

    /// `inf { x : B(x) satisfies pred }` for a monotone predicate on values,
    /// found by locating the first jump after which it holds.
    fn first_reaching(&self, y: &T, strict: bool) -> T {
        let holds = |value: &T| if strict { value > y } else { value >= y };
        // values after jumps increase, so bisect for the first one that qualifies
        let (mut lo, mut hi) = (0, self.jumps.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if holds(&self.after_jump(mid)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let j = lo;
        let zero = T::zero();
        match self.jumps.get(j) {
            Some((v, _)) => {
                let c = self.before(j);
                if self.drift > zero && holds(&(self.drift.clone() * v.clone() + c.clone())) {
                    (y.clone() - c) / self.drift.clone()
                } else {
                    v.clone()
                }
            }
            None if self.drift > zero => {
                let x = (y.clone() - self.before(self.jumps.len())) / self.drift.clone();
                if x > T::one() {
                    T::one()
                } else {
                    x
                }
            }
            None => T::one(),
        }
    }

    /// `inf { x : B(x) > y }`, with `inverse(1) = 1`.
    pub fn inverse(&self, y: &T) -> T {
        if *y >= T::one() {
            return T::one();
        }
        self.first_reaching(y, true)
    }

    /// `inf { x : B(x) >= u }` for `u` in `(0, 1]`.
    pub fn preimage(&self, u: &T) -> T {
        self.first_reaching(u, false)
    }

    /// `x ↦ self(other(x))`.
    ///
    /// Jumps of `other` keep their locations with sizes scaled by the drift
    /// of `self`; a jump of `self` at `u` moves to `inf { x : other(x) >= u }`.
    /// Jumps landing on the same location add up.
    pub fn compose(&self, other: &Bridge<T>) -> Bridge<T> {
        let zero = T::zero();
        let mut points: Vec<(T, T)> = Vec::with_capacity(self.jumps.len() + other.jumps.len());
        if self.drift > zero {
            for (v, s) in &other.jumps {
                points.push((v.clone(), self.drift.clone() * s.clone()));
            }
        }
        for (u, s) in &self.jumps {
            points.push((other.preimage(u), s.clone()));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("locations are comparable"));
        let mut jumps: Vec<(T, T)> = Vec::with_capacity(points.len());
        for (v, s) in points {
            match jumps.last_mut() {
                Some(last) if last.0 == v => last.1 = last.1.clone() + s,
                _ => jumps.push((v, s)),
            }
        }
        jumps.retain(|(_, s)| *s > zero);
        Bridge::new(self.drift.clone() * other.drift.clone(), jumps)
            .expect("composition of bridges is a bridge")
    }

    /// `I(B)`: the gaps `(B(V_i-), B(V_i))` left by the jumps.
    pub fn interval_partition(&self) -> IntervalPartition {
        let to_f64 = |x: T| x.to_f64().expect("bridge values convert to f64");
        let pairs: Vec<(f64, f64)> = (0..self.jumps.len())
            .map(|i| {
                // B(V-) from the same prefix sums keeps neighbouring gaps ordered
                let lo = self.drift.clone() * self.jumps[i].0.clone() + self.before(i);
                let hi = self.after_jump(i);
                (to_f64(lo).max(0.0), to_f64(hi).min(1.0))
            })
            .filter(|(lo, hi)| lo < hi)
            .collect();
        IntervalPartition::from_pairs(&pairs).expect("jump gaps are ordered and disjoint")
    }
}

#[derive(Serialize, Deserialize)]
struct BridgeRepr {
    drift: f64,
    jumps: Vec<[f64; 2]>,
}

impl Serialize for Bridge<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BridgeRepr {
            drift: self.drift,
            jumps: self.jumps.iter().map(|&(v, s)| [v, s]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bridge<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = BridgeRepr::deserialize(d)?;
        Bridge::new(repr.drift, repr.jumps.into_iter().map(|[v, s]| (v, s)).collect())
            .map_err(D::Error::custom)
    }
}

/// Dust below this is treated as none when building bridges.
const DUST_FLOOR: f64 = 1e-12;

/// A bridge `B` with `I(B) = I`: the component lengths, left to right, are
/// put at the order statistics of i.i.d. uniforms and the dust becomes drift.
///
/// The order of the components is kept, so the jump order is uniform only
/// when the order of `I` is.
pub fn bridge_from_interval_partition<R: Rng + ?Sized>(partition: &IntervalPartition, rng: &mut R) -> Bridge<f64> {
    let k = partition.len();
    let mut locations: Vec<f64> = (0..k).map(|_| uniform_open(rng)).collect();
    redraw_duplicates(rng, &mut locations);
    locations.sort_by(f64::total_cmp);
    let dust = partition.dust_mass();
    let drift = if dust < DUST_FLOOR { 0.0 } else { dust };
    let jumps = locations
        .into_iter()
        .zip(partition.components().iter().map(|c| c.len()))
        .collect();
    Bridge::new(drift, jumps).expect("lengths and dust of a partition sum to 1")
}

/// Runs `k` adjacent components together at rate `λ̃_{b,k}` per window up to time `t`.
pub fn adjacent_merge_evolution<R: Rng + ?Sized>(
    start: &IntervalPartition,
    table: &RateTable,
    t: f64,
    rng: &mut R,
) -> Result<IntervalPartition> {
    if start.dust_mass() >= DUST_FLOOR {
        return Err(Error::InvalidArgument(format!(
            "adjacent merging needs a partition without dust, found {}",
            start.dust_mass()
        )));
    }
    if start.len() > table.max_blocks() {
        return Err(Error::InvalidArgument(format!(
            "rate table covers {} blocks, partition has {}",
            table.max_blocks(),
            start.len()
        )));
    }
    let mut current = start.clone();
    let mut clock = 0.0;
    loop {
        let b = current.len();
        let total = table.total_rate(b);
        if !(total > 0.0) {
            return Ok(current);
        }
        let e: f64 = Exp1.sample(rng);
        clock += e / total;
        if clock > t {
            return Ok(current);
        }
        let k = table.sample_merger_size(b, rng);
        let start_idx = rng.random_range(0..=b - k);
        let mut runs = vec![1; start_idx];
        runs.push(k);
        runs.extend(std::iter::repeat_n(1, b - k - start_idx));
        current = current.merge_runs(&runs)?;
    }
}

/// `I(B ∘ B'_s)` with `B` built from `current` and `B'_s` from an `m`-block
/// empirical Λ-comb at time `s`.
///
/// This approximates the Λ-comb transition for finite `m`. Two components
/// whose jumps fall into the same `1/m` cell of `B'_s` merge even at `s = 0`.
pub fn lambda_comb_step<R: Rng + ?Sized>(
    current: &IntervalPartition,
    table: &RateTable,
    s: f64,
    m: usize,
    rng: &mut R,
) -> Result<IntervalPartition> {
    if m < current.len() {
        return Err(Error::InvalidArgument(format!(
            "resolution {m} is below the {} components",
            current.len()
        )));
    }
    let b = bridge_from_interval_partition(current, rng);
    let increment = empirical_chain_partition(table, m, s, rng)?;
    let b_prime = bridge_from_interval_partition(&increment, rng);
    Ok(b.compose(&b_prime).interval_partition())
}

/// The Λ-comb sampled on a grid of times by composing independent
/// increment bridges, starting from `m` equal components.
///
/// Each step merges runs of the previous components, so the values nest
/// exactly.
pub fn flow_comb<R: Rng + ?Sized>(table: &RateTable, times: &[f64], m: usize, rng: &mut R) -> Result<Comb> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("the time grid must start at 0".to_string()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("the time grid must increase".to_string()));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".to_string()));
    }
    let cuts: Vec<f64> = (1..m).map(|j| j as f64 / m as f64).collect();
    let mut partition = IntervalPartition::from_cuts(&cuts)?;
    // the running composition has no drift: one jump per current component
    let mut running = bridge_from_interval_partition(&partition, rng);
    let mut events = vec![CombEvent {
        time: 0.0,
        partition: partition.clone(),
    }];
    for w in times.windows(2) {
        let increment = empirical_chain_partition(table, m, w[1] - w[0], rng)?;
        let step = bridge_from_interval_partition(&increment, rng);
        let moved: Vec<(f64, f64)> = running
            .jumps()
            .iter()
            .map(|(u, s)| (step.preimage(u), *s))
            .collect();
        let mut runs: Vec<usize> = Vec::new();
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for (v, s) in moved {
            match jumps.last_mut() {
                Some(last) if last.0 == v => {
                    last.1 += s;
                    *runs.last_mut().unwrap() += 1;
                }
                _ => {
                    jumps.push((v, s));
                    runs.push(1);
                }
            }
        }
        partition = partition.merge_runs(&runs)?;
        running = Bridge::new(0.0, jumps)?;
        events.push(CombEvent {
            time: w[1],
            partition: partition.clone(),
        });
    }
    Comb::new(events)
}

/// A random bridge with rational drift and at most three jumps, located on
/// a grid of twelfths so that coincidences and flat hits are common.
pub fn random_rational_bridge<R: Rng + ?Sized>(rng: &mut R) -> Bridge<BigRational> {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let k = rng.random_range(0..4);
    if k == 0 {
        return Bridge::identity();
    }
    let locs = rand::seq::index::sample(rng, 12, k).into_vec();
    let parts: Vec<i64> = (0..=k).map(|_| rng.random_range(1..5)).collect();
    let drift_part = if rng.random_bool(0.4) { 0 } else { parts[0] };
    let total: i64 = drift_part + parts[1..].iter().sum::<i64>();
    let jumps = (0..k).map(|i| (q(locs[i] as i64 + 1, 12), q(parts[i + 1], total))).collect();
    Bridge::new(q(drift_part, total), jumps).expect("parts sum to the total")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::LambdaMeasure;
    use crate::replicate::rng_from_seed;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, prop_assume, proptest};

    fn half_half() -> Bridge<f64> {
        Bridge::new(0.5, vec![(0.5, 0.5)]).unwrap()
    }

    #[test]
    fn eval_and_inverse_examples() {
        let id = Bridge::<f64>::identity();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(id.eval(&x), x);
            assert_eq!(id.inverse(&x), x);
        }
        let step = Bridge::new(0.0, vec![(0.5, 1.0)]).unwrap();
        assert_eq!(step.eval(&0.49), 0.0);
        assert_eq!(step.eval(&0.5), 1.0);
        for y in [0.0, 0.3, 0.99] {
            assert_eq!(step.inverse(&y), 0.5);
        }
        assert_eq!(step.inverse(&1.0), 1.0);

        let b = half_half();
        assert_eq!(b.eval(&0.5), 0.75);
        assert_eq!(b.eval(&0.4), 0.2);
        // 0.3 lies in the gap (0.25, 0.75), so the first x with B(x) > 0.3 is the jump
        assert_eq!(b.inverse(&0.3), 0.5);
        assert!((b.inverse(&0.8) - 0.6).abs() < 1e-15);
        assert_eq!(b.inverse(&0.2), 0.4);
    }

    #[test]
    fn interval_partition_examples() {
        assert!(Bridge::<f64>::identity().interval_partition().is_empty());
        for v in [0.1, 0.5, 1.0] {
            let b = Bridge::new(0.0, vec![(v, 1.0)]).unwrap();
            assert_eq!(b.interval_partition(), IntervalPartition::full());
        }
        assert_eq!(
            half_half().interval_partition(),
            IntervalPartition::from_pairs(&[(0.25, 0.75)]).unwrap()
        );
    }

    #[test]
    fn rejects_bad_bridges() {
        assert!(Bridge::new(0.5, vec![(0.5, 0.4)]).is_err());
        assert!(Bridge::new(-0.1, vec![(0.5, 1.1)]).is_err());
        assert!(Bridge::new(0.0, vec![(0.0, 1.0)]).is_err());
        assert!(Bridge::new(0.0, vec![(0.5, 0.5), (0.5, 0.5)]).is_err());
        assert!(Bridge::new(0.0, vec![(0.5, 1.5), (0.7, -0.5)]).is_err());
    }

    #[test]
    fn compose_examples() {
        let b = half_half();
        let id = Bridge::identity();
        assert_eq!(b.compose(&id), b);
        assert_eq!(id.compose(&b), b);
        let b1 = Bridge::new(0.0, vec![(0.5, 1.0)]).unwrap();
        let b2 = Bridge::new(0.0, vec![(0.3, 1.0)]).unwrap();
        assert_eq!(b1.compose(&b2).interval_partition(), IntervalPartition::full());
    }

    #[test]
    fn compose_matches_pointwise() {
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let a = random_bridge(&mut rng);
            let b = random_bridge(&mut rng);
            let c = a.compose(&b);
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                assert!((c.eval(&x) - a.eval(&b.eval(&x))).abs() < 1e-12);
            }
            for &(v, _) in b.jumps() {
                assert!((c.eval(&v) - a.eval(&b.eval(&v))).abs() < 1e-12);
            }
        }
    }

    fn random_bridge<R: Rng>(rng: &mut R) -> Bridge<f64> {
        let k = rng.random_range(0..5);
        let drift = if rng.random_bool(0.5) { 0.0 } else { rng.random::<f64>() };
        let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
        let total: f64 = weights.iter().sum();
        if k == 0 {
            return Bridge::identity();
        }
        for w in &mut weights {
            *w *= (1.0 - drift) / total;
        }
        let mut locs: Vec<f64> = (0..k).map(|_| uniform_open(rng)).collect();
        redraw_duplicates(rng, &mut locs);
        Bridge::new(drift, locs.into_iter().zip(weights).collect()).unwrap()
    }

    #[test]
    fn rational_associativity() {
        let mut rng = rng_from_seed(2);
        for _ in 0..500 {
            let a = random_rational_bridge(&mut rng);
            let b = random_rational_bridge(&mut rng);
            let c = random_rational_bridge(&mut rng);
            assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
            let id = Bridge::identity();
            assert_eq!(a.compose(&id), a);
            assert_eq!(id.compose(&a), a);
        }
    }

    #[test]
    fn from_partition_examples() {
        let mut rng = rng_from_seed(3);
        let b = bridge_from_interval_partition(&IntervalPartition::full(), &mut rng);
        assert_eq!(b.drift(), &0.0);
        assert_eq!(b.jumps().len(), 1);
        assert_eq!(b.interval_partition(), IntervalPartition::full());
        let b = bridge_from_interval_partition(&IntervalPartition::empty(), &mut rng);
        assert_eq!(b, Bridge::identity());
    }

    #[test]
    fn jump_order_is_uniform_for_uniformly_ordered_input() {
        // components of masses 0.5 and 0.3 in a uniformly random order, dust 0.2
        let mut rng = rng_from_seed(4);
        let draws = 10_000;
        let mut big_first = 0;
        for _ in 0..draws {
            let pairs = if rng.random_bool(0.5) {
                [(0.0, 0.5), (0.6, 0.9)]
            } else {
                [(0.1, 0.4), (0.5, 1.0)]
            };
            let b = bridge_from_interval_partition(&IntervalPartition::from_pairs(&pairs).unwrap(), &mut rng);
            let masses = b.interval_partition().mass_partition();
            assert!((masses.masses()[0] - 0.5).abs() < 1e-12 && (masses.masses()[1] - 0.3).abs() < 1e-12);
            assert!((b.drift() - 0.2).abs() < 1e-12);
            if b.jumps()[0].1 > b.jumps()[1].1 {
                big_first += 1;
            }
        }
        assert!((big_first as f64 / draws as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn adjacent_merge_trivial_cases() {
        let mut rng = rng_from_seed(5);
        let table = RateTable::new(LambdaMeasure::kingman(), 10).unwrap();
        let four = IntervalPartition::from_cuts(&[0.25, 0.5, 0.75]).unwrap();
        assert_eq!(adjacent_merge_evolution(&four, &table, 0.0, &mut rng).unwrap(), four);
        let one = IntervalPartition::full();
        assert_eq!(adjacent_merge_evolution(&one, &table, 50.0, &mut rng).unwrap(), one);
        assert_eq!(adjacent_merge_evolution(&four, &table, 1e6, &mut rng).unwrap(), one);
        let dusty = IntervalPartition::from_pairs(&[(0.0, 0.5)]).unwrap();
        assert!(adjacent_merge_evolution(&dusty, &table, 1.0, &mut rng).is_err());
    }

    #[test]
    fn comb_step_at_time_zero() {
        let mut rng = rng_from_seed(6);
        let m = 2000;
        let table = RateTable::new(LambdaMeasure::kingman(), m).unwrap();
        let start = IntervalPartition::from_cuts(&[0.1, 0.35, 0.5, 0.8]).unwrap();
        let reps = 2000;
        let mut unchanged = 0;
        for _ in 0..reps {
            let out = lambda_comb_step(&start, &table, 0.0, m, &mut rng).unwrap();
            let (a, b) = (out.mass_partition(), start.mass_partition());
            if a.len() == b.len() {
                assert!(a.masses().iter().zip(b.masses()).all(|(x, y)| (x - y).abs() < 1e-12));
                unchanged += 1;
            }
        }
        // two of five jumps share a 1/m cell with probability about 10/m
        assert!(reps - unchanged < 40, "{}", reps - unchanged);
        assert!(lambda_comb_step(&start, &table, 0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn comb_step_absorbs() {
        let mut rng = rng_from_seed(7);
        let table = RateTable::new(LambdaMeasure::kingman(), 500).unwrap();
        let start = IntervalPartition::from_cuts(&[0.2, 0.4, 0.6, 0.8]).unwrap();
        let full = (0..200)
            .filter(|_| lambda_comb_step(&start, &table, 50.0, 500, &mut rng).unwrap() == IntervalPartition::full())
            .count();
        assert!(full >= 195, "{full}");
    }

    #[test]
    fn flow_comb_nests() {
        let mut rng = rng_from_seed(8);
        let table = RateTable::new(LambdaMeasure::beta(1.0, 3.0).unwrap(), 300).unwrap();
        let comb = flow_comb(&table, &[0.0], 300, &mut rng).unwrap();
        assert_eq!(comb.events().len(), 1);
        assert_eq!(comb.events()[0].partition.len(), 300);
        for _ in 0..20 {
            let grid: Vec<f64> = (0..15).map(|i| i as f64 * 0.1).collect();
            // Comb::new checks nesting exactly
            let comb = flow_comb(&table, &grid, 300, &mut rng).unwrap();
            assert_eq!(comb.events().len(), grid.len());
        }
        assert!(flow_comb(&table, &[0.5, 1.0], 300, &mut rng).is_err());
    }

    #[test]
    fn json_shape() {
        let b = half_half();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"drift":0.5,"jumps":[[0.5,0.5]]}"#);
        assert_eq!(serde_json::from_str::<Bridge>(&s).unwrap(), b);
        assert!(serde_json::from_str::<Bridge>(r#"{"drift":0.5,"jumps":[[0.5,0.4]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn composition_coarsens(seed in 0u64..10_000) {
            let mut rng = rng_from_seed(seed);
            let a = random_bridge(&mut rng);
            let b = random_bridge(&mut rng);
            let outer = a.interval_partition();
            let composed = a.compose(&b).interval_partition();
            // every gap of the outer bridge stays inside a gap of the composition
            for c in outer.components() {
                let m = c.midpoint();
                let i = composed.locate(m);
                prop_assert!(i.is_some());
                let d = composed.components()[i.unwrap()];
                prop_assert!(d.left <= c.left + 1e-12 && c.right <= d.right + 1e-12);
            }
        }

        #[test]
        fn inverse_undoes_eval_off_flats(seed in 0u64..10_000, x in 0.0f64..1.0) {
            let mut rng = rng_from_seed(seed);
            let b = random_bridge(&mut rng);
            // B is strictly increasing when it has drift
            prop_assume!(*b.drift() > 0.0);
            prop_assert!((b.inverse(&b.eval(&x)) - x).abs() < 1e-12);
        }

        #[test]
        fn round_trip_keeps_masses(cuts in prop::collection::vec(0.01f64..0.99, 0..6), keep in prop::collection::vec(any::<bool>(), 7), seed in 0u64..1000) {
            let full = IntervalPartition::from_cuts(&cuts).unwrap();
            let comps: Vec<_> = full.components().iter().zip(keep.iter().cycle()).filter(|(_, &k)| k).map(|(c, _)| *c).collect();
            let p = IntervalPartition::new(comps).unwrap();
            let mut rng = rng_from_seed(seed);
            let b = bridge_from_interval_partition(&p, &mut rng);
            let out = b.interval_partition();
            prop_assert!((out.dust_mass() - p.dust_mass()).abs() < 1e-12);
            let (a, c) = (out.mass_partition(), p.mass_partition());
            prop_assert_eq!(a.len(), c.len());
            for (x, y) in a.masses().iter().zip(c.masses()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn output_ignores_jump_locations_within_order(seed in 0u64..1000) {
            // moving the jumps of B' without changing their order leaves I(B ∘ B') alone
            // as long as no jump of B changes which gap of B' it falls in
            let mut rng = rng_from_seed(seed);
            let b = Bridge::new(0.0, vec![(0.2, 0.3), (0.45, 0.2), (0.9, 0.5)]).unwrap();
            let sizes = [0.1, 0.4, 0.5];
            let mut l1: Vec<f64> = (0..3).map(|_| uniform_open(&mut rng)).collect();
            let mut l2: Vec<f64> = (0..3).map(|_| uniform_open(&mut rng)).collect();
            l1.sort_by(f64::total_cmp);
            l2.sort_by(f64::total_cmp);
            let b1 = Bridge::new(0.0, l1.into_iter().zip(sizes).collect()).unwrap();
            let b2 = Bridge::new(0.0, l2.into_iter().zip(sizes).collect()).unwrap();
            prop_assert_eq!(b.compose(&b1).interval_partition(), b.compose(&b2).interval_partition());
        }
    }
}
