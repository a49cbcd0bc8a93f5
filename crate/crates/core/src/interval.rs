//! Interval-partitions of (0, 1) and their mass-partitions.
//!
//! An [`IntervalPartition`] is a finite, sorted list of disjoint open
//! intervals. Endpoints are never members: a point sitting exactly on an
//! endpoint belongs to no component.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An open interval `(left, right)` with `0 <= left < right <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::InvalidInterval {
                left,
                right,
                reason: "endpoints must be finite",
            });
        }
        if left < 0.0 || right > 1.0 {
            return Err(Error::InvalidInterval {
                left,
                right,
                reason: "endpoints must lie in [0, 1]",
            });
        }
        if left >= right {
            return Err(Error::InvalidInterval {
                left,
                right,
                reason: "left endpoint must be smaller than right endpoint",
            });
        }
        Ok(Interval { left, right })
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    /// Strict membership; endpoints are excluded.
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.left < x && x < self.right
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }

    /// True when `other` is a subset of `self`.
    #[inline]
    pub fn covers(&self, other: &Interval) -> bool {
        self.left <= other.left && other.right <= self.right
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.left, self.right)
    }
}

/// Ranked component lengths of an interval-partition.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MassPartition(Vec<f64>);

impl MassPartition {
    /// Sorts `masses` nonincreasingly. Masses must be positive and sum to at most 1.
    pub fn new(mut masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return Err(Error::InvalidArgument(
                "masses must lie in (0, 1]".to_string(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "masses sum to {total} > 1"
            )));
        }
        masses.sort_by(|a, b| b.total_cmp(a));
        Ok(MassPartition(masses))
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A finite open subset of (0, 1), stored as its sorted interval components.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct IntervalPartition {
    components: Vec<Interval>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    components: Vec<[f64; 2]>,
}

impl TryFrom<PartitionRepr> for IntervalPartition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        let components = repr
            .components
            .into_iter()
            .map(|[l, r]| Interval::new(l, r))
            .collect::<Result<Vec<_>>>()?;
        IntervalPartition::new(components)
    }
}

impl From<IntervalPartition> for PartitionRepr {
    fn from(p: IntervalPartition) -> Self {
        PartitionRepr {
            components: p.components.iter().map(|c| [c.left, c.right]).collect(),
        }
    }
}

impl IntervalPartition {
    /// Validates that the components are sorted and pairwise disjoint.
    /// Neighbours may share an endpoint.
    pub fn new(components: Vec<Interval>) -> Result<Self> {
        for c in &components {
            Interval::new(c.left, c.right)?;
        }
        for w in components.windows(2) {
            if w[0].right > w[1].left {
                return Err(Error::InvalidPartition(format!(
                    "components {} and {} overlap or are unsorted",
                    w[0], w[1]
                )));
            }
        }
        Ok(IntervalPartition { components })
    }

    /// Builds from `(left, right)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let components = pairs
            .iter()
            .map(|&(l, r)| Interval::new(l, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    /// The empty interval-partition (pure dust).
    pub fn empty() -> Self {
        IntervalPartition::default()
    }

    /// The full interval (0, 1).
    pub fn full() -> Self {
        IntervalPartition {
            components: vec![Interval {
                left: 0.0,
                right: 1.0,
            }],
        }
    }

    /// `(0,1)` minus the given cut points. Cuts at 0 or 1 and repeated cuts are ignored.
    pub fn from_cuts(cuts: &[f64]) -> Result<Self> {
        let mut points: Vec<f64> = Vec::with_capacity(cuts.len() + 2);
        for &c in cuts {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::OutOfUnitInterval(c));
            }
            if c > 0.0 && c < 1.0 {
                points.push(c);
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut components = Vec::with_capacity(points.len() + 1);
        let mut left = 0.0;
        for &p in points.iter().chain(std::iter::once(&1.0)) {
            components.push(Interval { left, right: p });
            left = p;
        }
        Ok(IntervalPartition { components })
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(Interval::len).sum()
    }

    /// Component lengths ranked nonincreasingly.
    pub fn mass_partition(&self) -> MassPartition {
        let mut masses: Vec<f64> = self.components.iter().map(Interval::len).collect();
        masses.sort_by(|a, b| b.total_cmp(a));
        MassPartition(masses)
    }

    /// `1 - total length`, clamped to `[0, 1]`.
    pub fn dust_mass(&self) -> f64 {
        (1.0 - self.total_length()).clamp(0.0, 1.0)
    }

    /// Locates the component strictly containing `x`.
    pub fn component_of(&self, x: f64) -> Result<Option<(usize, Interval)>> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfUnitInterval(x));
        }
        Ok(self.locate(x).map(|i| (i, self.components[i])))
    }

    /// Index of the component strictly containing `x`, for `x` already known
    /// to be in `[0, 1]`.
    #[inline]
    pub fn locate(&self, x: f64) -> Option<usize> {
        // first component whose right endpoint exceeds x
        let i = self.components.partition_point(|c| c.right <= x);
        match self.components.get(i) {
            Some(c) if c.left < x => Some(i),
            _ => None,
        }
    }

    /// True when `self` is a subset of `other`.
    pub fn is_subset_of(&self, other: &IntervalPartition) -> bool {
        self.components.iter().all(|c| {
            let i = other.components.partition_point(|d| d.right < c.right);
            other.components.get(i).is_some_and(|d| d.covers(c))
        })
    }

    /// Merges consecutive runs of components. `run_lengths` must sum to
    /// `self.len()`; each run is replaced by its convex hull, reusing the
    /// existing endpoints exactly.
    pub fn merge_runs(&self, run_lengths: &[usize]) -> Result<Self> {
        if run_lengths.iter().sum::<usize>() != self.components.len() || run_lengths.contains(&0)
        {
            return Err(Error::InvalidArgument(format!(
                "run lengths {:?} do not cover {} components",
                run_lengths,
                self.components.len()
            )));
        }
        let mut out = Vec::with_capacity(run_lengths.len());
        let mut start = 0;
        for &len in run_lengths {
            out.push(Interval {
                left: self.components[start].left,
                right: self.components[start + len - 1].right,
            });
            start += len;
        }
        Ok(IntervalPartition { components: out })
    }

    /// Hausdorff distance between the complements `[0,1] \ self` and `[0,1] \ other`.
    pub fn hausdorff(&self, other: &IntervalPartition) -> f64 {
        one_sided_hausdorff(self, other).max(one_sided_hausdorff(other, self))
    }
}

/// `sup { d(x, [0,1] \ b) : x in [0,1] \ a }`.
///
/// The distance to the complement of `b` is a tent over each component of
/// `b`. Its supremum over the closed set `[0,1] \ a` restricted to a component
/// `(l, r)` of `b` is attained at the point of `[0,1] \ a` nearest to the
/// midpoint on either side.
fn one_sided_hausdorff(a: &IntervalPartition, b: &IntervalPartition) -> f64 {
    let mut best: f64 = 0.0;
    for c in &b.components {
        let tent = |x: f64| (x - c.left).min(c.right - x).max(0.0);
        let m = c.midpoint();
        let value = match a.locate(m) {
            None => tent(m),
            Some(i) => {
                let hole = a.components[i];
                tent(hole.left).max(tent(hole.right))
            }
        };
        best = best.max(value);
    }
    best
}

impl fmt::Display for IntervalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "∅");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
