//! Λ-coalescent rates and the partition- and composition-valued chains.
//!
//! With `b` blocks, any `k` of them merge at rate
//! `λ_{b,k} = ∫ x^{k-2} (1-x)^{b-k} Λ(dx)`. In the composition chain only
//! runs of `k` adjacent blocks merge, each at rate
//! `λ̃_{b,k} = C(b,k) λ_{b,k} / (b-k+1)`, so both chains leave a state with
//! `b` blocks at the same total rate `Σ_k C(b,k) λ_{b,k}`.

pub mod intertwining;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use libm::lgamma;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::interval::IntervalPartition;
use crate::partition::{CoalescentTrajectory, Composition, NestedCompositionTrajectory, Partition};

/// A finite measure on `[0, 1]` from a small closed-form family.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaMeasure {
    /// `mass` times the point mass at `at`.
    Atom { at: f64, mass: f64 },
    /// `mass` times the Beta(a, b) law.
    Beta { a: f64, b: f64, mass: f64 },
    /// `mass` times Lebesgue measure on `[0, 1]`.
    Uniform { mass: f64 },
    Mixture(Vec<LambdaMeasure>),
}

fn ln_beta(p: f64, q: f64) -> f64 {
    lgamma(p) + lgamma(q) - lgamma(p + q)
}

/// `ln C(b, k)`.
pub fn ln_binomial(b: usize, k: usize) -> f64 {
    lgamma(b as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((b - k) as f64 + 1.0)
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn check_bk(b: usize, k: usize) -> Result<()> {
    if b < 2 || k < 2 || k > b {
        return Err(Error::InvalidArgument(format!(
            "rates need 2 <= k <= b, got b = {b}, k = {k}"
        )));
    }
    Ok(())
}

impl LambdaMeasure {
    /// `δ_0`: Kingman's coalescent.
    pub fn kingman() -> Self {
        LambdaMeasure::Atom { at: 0.0, mass: 1.0 }
    }

    /// Uniform on `[0, 1]`: the Bolthausen-Sznitman coalescent.
    pub fn uniform() -> Self {
        LambdaMeasure::Uniform { mass: 1.0 }
    }

    pub fn dirac(at: f64) -> Result<Self> {
        LambdaMeasure::Atom { at, mass: 1.0 }.validated()
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        LambdaMeasure::Beta { a, b, mass: 1.0 }.validated()
    }

    pub fn mixture(parts: Vec<LambdaMeasure>) -> Result<Self> {
        LambdaMeasure::Mixture(parts).validated()
    }

    /// Multiplies the total mass by `factor`.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        let scaled = match self {
            LambdaMeasure::Atom { at, mass } => LambdaMeasure::Atom { at, mass: mass * factor },
            LambdaMeasure::Beta { a, b, mass } => LambdaMeasure::Beta { a, b, mass: mass * factor },
            LambdaMeasure::Uniform { mass } => LambdaMeasure::Uniform { mass: mass * factor },
            LambdaMeasure::Mixture(parts) => LambdaMeasure::Mixture(
                parts
                    .into_iter()
                    .map(|p| p.scaled(factor))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        scaled.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |m: f64| m > 0.0 && m.is_finite();
        match self {
            LambdaMeasure::Atom { at, mass } => {
                if !(0.0..=1.0).contains(at) {
                    return Err(Error::InvalidMeasure(format!("atom at {at} outside [0, 1]")));
                }
                if !positive(*mass) {
                    return Err(Error::InvalidMeasure(format!("mass {mass} is not positive")));
                }
            }
            LambdaMeasure::Beta { a, b, mass } => {
                if !(positive(*a) && positive(*b)) {
                    return Err(Error::InvalidMeasure(format!(
                        "Beta parameters ({a}, {b}) must be positive"
                    )));
                }
                if !positive(*mass) {
                    return Err(Error::InvalidMeasure(format!("mass {mass} is not positive")));
                }
            }
            LambdaMeasure::Uniform { mass } => {
                if !positive(*mass) {
                    return Err(Error::InvalidMeasure(format!("mass {mass} is not positive")));
                }
            }
            LambdaMeasure::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidMeasure("empty mixture".to_string()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            LambdaMeasure::Atom { mass, .. }
            | LambdaMeasure::Beta { mass, .. }
            | LambdaMeasure::Uniform { mass } => *mass,
            LambdaMeasure::Mixture(parts) => parts.iter().map(|p| p.total_mass()).sum(),
        }
    }

    /// `ln λ_{b,k}`; `-inf` when the rate is 0. No range check.
    fn ln_rate_unchecked(&self, b: usize, k: usize) -> f64 {
        match self {
            LambdaMeasure::Atom { at, mass } => {
                // 0^0 = 1 at either end
                let x = *at;
                let left = if k == 2 { 0.0 } else { (k - 2) as f64 * x.ln() };
                let right = if k == b { 0.0 } else { (b - k) as f64 * (1.0 - x).ln() };
                mass.ln() + left + right
            }
            LambdaMeasure::Beta { a, b: beta, mass } => {
                mass.ln() + ln_beta(a + (k - 2) as f64, beta + (b - k) as f64) - ln_beta(*a, *beta)
            }
            LambdaMeasure::Uniform { mass } => mass.ln() + ln_beta((k - 1) as f64, (b - k + 1) as f64),
            LambdaMeasure::Mixture(parts) => {
                log_sum_exp(parts.iter().map(|p| p.ln_rate_unchecked(b, k)))
            }
        }
    }

    /// `ln λ_{b,k}`.
    pub fn ln_rate(&self, b: usize, k: usize) -> Result<f64> {
        check_bk(b, k)?;
        Ok(self.ln_rate_unchecked(b, k))
    }

    /// `λ_{b,k}`: the rate at which any given `k` of `b` blocks merge.
    pub fn rate(&self, b: usize, k: usize) -> Result<f64> {
        check_bk(b, k)?;
        Ok(match self {
            LambdaMeasure::Atom { at, mass } => {
                mass * at.powi((k - 2) as i32) * (1.0 - at).powi((b - k) as i32)
            }
            LambdaMeasure::Mixture(parts) => parts
                .iter()
                .map(|p| p.rate(b, k))
                .sum::<Result<f64>>()?,
            _ => self.ln_rate_unchecked(b, k).exp(),
        })
    }

    /// `λ̃_{b,k} = C(b,k) λ_{b,k} / (b-k+1)`: the rate of each run of `k`
    /// adjacent blocks among `b`.
    pub fn adjacent_rate(&self, b: usize, k: usize) -> Result<f64> {
        check_bk(b, k)?;
        if k == b {
            return self.rate(b, k);
        }
        Ok((ln_binomial(b, k) + self.ln_rate_unchecked(b, k)).exp() / (b - k + 1) as f64)
    }
}

impl fmt::Display for LambdaMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mass_suffix = |f: &mut fmt::Formatter<'_>, mass: f64| {
            if mass != 1.0 {
                write!(f, "*{mass}")
            } else {
                Ok(())
            }
        };
        match self {
            LambdaMeasure::Atom { at, mass } => {
                if *at == 0.0 {
                    write!(f, "kingman")?;
                } else {
                    write!(f, "dirac:{at}")?;
                }
                mass_suffix(f, *mass)
            }
            LambdaMeasure::Beta { a, b, mass } => {
                write!(f, "beta:{a},{b}")?;
                mass_suffix(f, *mass)
            }
            LambdaMeasure::Uniform { mass } => {
                write!(f, "uniform")?;
                mass_suffix(f, *mass)
            }
            LambdaMeasure::Mixture(parts) => {
                write!(f, "mix:[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl FromStr for LambdaMeasure {
    type Err = Error;

    /// `kingman`, `uniform`, `dirac:p`, `beta:a,b` or `mix:[spec*w,...]`,
    /// each optionally followed by `*mass`.
    fn from_str(spec: &str) -> Result<Self> {
        let fail = |reason: &str| Error::LambdaSyntax {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let s = spec.trim();
        let (base, mass) = split_mass(s).map_err(|r| fail(&r))?;
        let measure = if let Some(rest) = base.strip_prefix("mix:") {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| fail("a mixture is written mix:[...]"))?;
            let parts = split_items(inner)
                .into_iter()
                .map(|item| item.parse::<LambdaMeasure>())
                .collect::<Result<Vec<_>>>()?;
            LambdaMeasure::mixture(parts)
        } else if base == "kingman" {
            Ok(LambdaMeasure::kingman())
        } else if base == "uniform" {
            Ok(LambdaMeasure::uniform())
        } else if let Some(p) = base.strip_prefix("dirac:") {
            let p: f64 = p.trim().parse().map_err(|_| fail("dirac needs a number"))?;
            LambdaMeasure::dirac(p)
        } else if let Some(ab) = base.strip_prefix("beta:") {
            let (a, b) = ab
                .split_once(',')
                .ok_or_else(|| fail("beta needs two parameters a,b"))?;
            let a: f64 = a.trim().parse().map_err(|_| fail("bad Beta parameter"))?;
            let b: f64 = b.trim().parse().map_err(|_| fail("bad Beta parameter"))?;
            LambdaMeasure::beta(a, b)
        } else {
            return Err(fail("unknown measure"));
        };
        let measure = measure.map_err(|e| fail(&e.to_string()))?;
        match mass {
            Some(m) => measure.scaled(m).map_err(|e| fail(&e.to_string())),
            None => Ok(measure),
        }
    }
}

/// Splits a trailing `*mass` that sits outside brackets.
fn split_mass(s: &str) -> std::result::Result<(&str, Option<f64>), String> {
    let mut depth = 0i32;
    let mut star = None;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            '*' if depth == 0 => star = Some(i),
            _ => {}
        }
    }
    match star {
        None => Ok((s, None)),
        Some(i) => {
            let m: f64 = s[i + 1..]
                .trim()
                .parse()
                .map_err(|_| "mass after '*' must be a number".to_string())?;
            Ok((s[..i].trim(), Some(m)))
        }
    }
}

/// Splits mixture items on top-level commas. A piece starting with a digit
/// continues the previous item, as in `beta:2,2`.
fn split_items(inner: &str) -> Vec<String> {
    let mut raw = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                raw.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    raw.push(&inner[start..]);
    let mut items: Vec<String> = Vec::new();
    for piece in raw {
        let piece = piece.trim();
        let continues = piece.starts_with(|c: char| c.is_ascii_digit() || c == '.');
        match items.last_mut() {
            Some(last) if continues => {
                last.push(',');
                last.push_str(piece);
            }
            _ => items.push(piece.to_string()),
        }
    }
    items
}

/// Merger-size law with `b` blocks: weights `C(b,k) λ_{b,k}`, `k = 2..=b`.
#[derive(Debug, Clone)]
struct Row {
    total: f64,
    /// cumulative weights, index `k - 2`
    cumulative: Vec<f64>,
}

impl Row {
    fn sample_k<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1) + 2
    }
}

/// Lazily filled table of merger-size laws, shared between threads.
#[derive(Debug)]
pub struct RateTable {
    lambda: LambdaMeasure,
    rows: Vec<OnceLock<Row>>,
}

impl RateTable {
    /// Table for states of up to `max_blocks` blocks.
    pub fn new(lambda: LambdaMeasure, max_blocks: usize) -> Result<Self> {
        lambda.validate()?;
        Ok(RateTable {
            lambda,
            rows: (0..=max_blocks).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn lambda(&self) -> &LambdaMeasure {
        &self.lambda
    }

    pub fn max_blocks(&self) -> usize {
        self.rows.len() - 1
    }

    fn row(&self, b: usize) -> &Row {
        self.rows[b].get_or_init(|| {
            let logs: Vec<f64> = (2..=b)
                .map(|k| ln_binomial(b, k) + self.lambda.ln_rate_unchecked(b, k))
                .collect();
            let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut acc = 0.0;
            let cumulative: Vec<f64> = logs
                .iter()
                .map(|l| {
                    acc += (l - m).exp();
                    acc
                })
                .collect();
            let scale = if m == f64::NEG_INFINITY { 0.0 } else { m.exp() };
            Row {
                total: acc * scale,
                cumulative: cumulative.into_iter().map(|c| c * scale).collect(),
            }
        })
    }

    /// `Σ_k C(b,k) λ_{b,k}`: the total jump rate with `b` blocks.
    pub fn total_rate(&self, b: usize) -> f64 {
        if b < 2 {
            return 0.0;
        }
        self.row(b).total
    }

    /// Draws a merger size `k` with probability proportional to
    /// `C(b,k) λ_{b,k}`. Needs a positive total rate.
    pub fn sample_merger_size<R: Rng + ?Sized>(&self, b: usize, rng: &mut R) -> usize {
        self.row(b).sample_k(rng)
    }

    /// Next holding time and merger size, or `None` when nothing can happen.
    fn next_merger<R: Rng + ?Sized>(&self, b: usize, rng: &mut R) -> Option<(f64, usize)> {
        if b < 2 {
            return None;
        }
        let row = self.row(b);
        if !(row.total > 0.0) {
            return None;
        }
        let e: f64 = Exp1.sample(rng);
        Some((e / row.total, row.sample_k(rng)))
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".to_string()));
        }
        if n > self.max_blocks() {
            return Err(Error::InvalidArgument(format!(
                "rate table covers {} blocks, asked for {n}",
                self.max_blocks()
            )));
        }
        Ok(())
    }
}

/// Gillespie simulation of the Λ-coalescent on `[n]`.
pub fn simulate_partition_chain<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTrajectory> {
    simulate_partition_chain_with(&RateTable::new(lambda.clone(), n.max(1))?, n, rng)
}

/// As [`simulate_partition_chain`] with a shared rate table.
pub fn simulate_partition_chain_with<R: Rng + ?Sized>(
    table: &RateTable,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTrajectory> {
    table.check(n)?;
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut events = vec![(0.0, Partition::singletons(n))];
    let mut t = 0.0;
    while let Some((dt, k)) = table.next_merger(labels.len(), rng) {
        t += dt;
        let chosen = rand::seq::index::sample(rng, labels.len(), k).into_vec();
        let target = labels[chosen[0]];
        let merged: Vec<usize> = chosen[1..].iter().map(|&c| labels[c]).collect();
        for a in assignment.iter_mut() {
            if merged.contains(a) {
                *a = target;
            }
        }
        labels.retain(|l| !merged.contains(l));
        events.push((t, Partition::from_assignment(&assignment)));
    }
    CoalescentTrajectory::new(events)
}

/// Gillespie simulation of the composition chain on `[n]`, started from
/// uniformly ordered singletons.
pub fn simulate_composition_chain<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    n: usize,
    rng: &mut R,
) -> Result<NestedCompositionTrajectory> {
    simulate_composition_chain_with(&RateTable::new(lambda.clone(), n.max(1))?, n, rng)
}

/// As [`simulate_composition_chain`] with a shared rate table.
pub fn simulate_composition_chain_with<R: Rng + ?Sized>(
    table: &RateTable,
    n: usize,
    rng: &mut R,
) -> Result<NestedCompositionTrajectory> {
    table.check(n)?;
    let mut blocks: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    blocks.shuffle(rng);
    let mut events = vec![(0.0, Composition::new(n, blocks.clone())?)];
    let mut t = 0.0;
    while let Some((dt, k)) = table.next_merger(blocks.len(), rng) {
        t += dt;
        let start = rng.random_range(0..=blocks.len() - k);
        let merged: Vec<usize> = blocks.drain(start..start + k).flatten().collect();
        blocks.insert(start, merged);
        events.push((t, Composition::new(n, blocks.clone())?));
    }
    NestedCompositionTrajectory::new(events)
}

/// Fenwick tree over 0/1 flags with order-statistic lookup.
struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn all_ones(n: usize) -> Self {
        let mut tree = vec![0; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Fenwick { tree }
    }

    fn remove(&mut self, mut i: usize) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Index of the `rank`-th (0-based) set flag.
    fn select(&self, rank: usize) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut remaining = rank + 1;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] < remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// Empirical interval-partition at time `s` of the composition chain
/// started from `m` ordered singletons.
///
/// Only the surviving cut points `j / m` between blocks are tracked, so one
/// run costs `O(m log m)`. The law equals that of
/// `empirical_interval_partition` applied to
/// [`simulate_composition_chain`] at time `s`.
pub fn empirical_chain_partition<R: Rng + ?Sized>(
    table: &RateTable,
    m: usize,
    s: f64,
    rng: &mut R,
) -> Result<IntervalPartition> {
    table.check(m)?;
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative time {s}")));
    }
    // cut j (0-based) sits at (j + 1) / m
    let mut cuts = Fenwick::all_ones(m - 1);
    let mut alive = vec![true; m - 1];
    let mut b = m;
    let mut t = 0.0;
    while let Some((dt, k)) = table.next_merger(b, rng) {
        t += dt;
        if t > s {
            break;
        }
        // blocks start..start+k merge; cuts of rank start..start+k-1 between them go
        let start = rng.random_range(0..=b - k);
        for _ in 0..k - 1 {
            let j = cuts.select(start);
            cuts.remove(j);
            alive[j] = false;
        }
        b -= k - 1;
    }
    let points: Vec<f64> = alive
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(j, _)| (j + 1) as f64 / m as f64)
        .collect();
    IntervalPartition::from_cuts(&points)
}
