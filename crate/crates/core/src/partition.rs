//! Partitions and compositions of `[n]`, and trajectories of them.
//!
//! Indices are 0-based in memory. JSON uses 1-based labels:
//! `{"events":[{"t":0.0,"blocks":[[1,2],[3]]},...]}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A partition of `{0, ..., n-1}` stored as canonical block labels: blocks
/// are numbered in order of their least elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Relabels an arbitrary block assignment canonically.
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<usize> = assignment
            .iter()
            .map(|a| {
                let next = map.len();
                *map.entry(*a).or_insert(next)
            })
            .collect();
        Partition {
            count: map.len(),
            labels,
        }
    }

    /// Blocks must be disjoint and cover `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let assignment = assignment_of(n, blocks)?;
        Ok(Self::from_assignment(&assignment))
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
            count: n,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.count
    }

    /// Canonical block label of each index.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    /// Blocks in canonical order, each sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l].push(i);
        }
        blocks
    }

    /// Block sizes in canonical order.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn is_refinement_of(&self, coarser: &Partition) -> bool {
        if self.n() != coarser.n() {
            return false;
        }
        let mut image = vec![usize::MAX; self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            let c = coarser.labels[i];
            if image[l] == usize::MAX {
                image[l] = c;
            } else if image[l] != c {
                return false;
            }
        }
        true
    }
}

fn assignment_of(n: usize, blocks: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut assignment = vec![usize::MAX; n];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".to_string()));
        }
        for &i in block {
            if i >= n {
                return Err(Error::InvalidPartition(format!("index {i} outside [0, {n})")));
            }
            if assignment[i] != usize::MAX {
                return Err(Error::InvalidPartition(format!("index {i} in two blocks")));
            }
            assignment[i] = b;
        }
    }
    if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
        return Err(Error::InvalidPartition(format!("index {i} is in no block")));
    }
    Ok(assignment)
}

/// A partition of `{0, ..., n-1}` with a total order on its blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    blocks: Vec<Vec<usize>>,
}

impl Composition {
    /// Blocks in composition order; each block is sorted on construction.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        assignment_of(n, &blocks)?;
        for b in &mut blocks {
            b.sort_unstable();
        }
        Ok(Composition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Forgets the order.
    pub fn to_partition(&self) -> Partition {
        let mut assignment = vec![0; self.n()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                assignment[i] = b;
            }
        }
        Partition::from_assignment(&assignment)
    }

    /// True when each block of `later` is the union of a run of consecutive
    /// blocks of `self`, with runs in the same order.
    pub fn coarsens_adjacently_to(&self, later: &Composition) -> bool {
        let n = self.n();
        if later.n() != n {
            return false;
        }
        let mut later_block = vec![0; n];
        for (b, block) in later.blocks.iter().enumerate() {
            for &i in block {
                later_block[i] = b;
            }
        }
        let mut expected = 0;
        let mut current = None;
        for block in &self.blocks {
            let target = later_block[block[0]];
            if block.iter().any(|&i| later_block[i] != target) {
                return false;
            }
            if current != Some(target) {
                if target != expected {
                    return false;
                }
                current = Some(target);
                expected += 1;
            }
        }
        expected == later.blocks.len()
    }
}

/// A step function of partitions; the value at `t` is the last event at or before `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescentTrajectory {
    events: Vec<(f64, Partition)>,
}

impl CoalescentTrajectory {
    /// Times strictly increase and each partition refines the next.
    pub fn new(events: Vec<(f64, Partition)>) -> Result<Self> {
        check_times(events.iter().map(|e| e.0))?;
        for w in events.windows(2) {
            if !w[0].1.is_refinement_of(&w[1].1) {
                return Err(Error::InvalidTrajectory(format!(
                    "partition at t = {} does not coarsen the one at t = {}",
                    w[1].0, w[0].0
                )));
            }
        }
        Ok(CoalescentTrajectory { events })
    }

    pub fn events(&self) -> &[(f64, Partition)] {
        &self.events
    }

    pub fn n(&self) -> usize {
        self.events[0].1.n()
    }

    /// Value at time `t`; the first event for earlier times.
    pub fn partition_at(&self, t: f64) -> &Partition {
        let k = self.events.partition_point(|e| e.0 <= t).saturating_sub(1);
        &self.events[k].1
    }

    /// Index of the first event at which `i` and `j` share a block.
    pub fn merge_event(&self, i: usize, j: usize) -> Option<usize> {
        let k = self.events.partition_point(|e| !e.1.same_block(i, j));
        (k < self.events.len()).then_some(k)
    }

    /// First time at which `i` and `j` share a block.
    pub fn merge_time(&self, i: usize, j: usize) -> Option<f64> {
        self.merge_event(i, j).map(|k| self.events[k].0)
    }

    /// First time with at most `k` blocks.
    pub fn hitting_time(&self, k: usize) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.1.num_blocks() <= k)
            .map(|e| e.0)
    }
}

/// A step function of compositions in which only adjacent blocks merge.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedCompositionTrajectory {
    events: Vec<(f64, Composition)>,
}

impl NestedCompositionTrajectory {
    pub fn new(events: Vec<(f64, Composition)>) -> Result<Self> {
        check_times(events.iter().map(|e| e.0))?;
        for w in events.windows(2) {
            if !w[0].1.coarsens_adjacently_to(&w[1].1) {
                return Err(Error::InvalidTrajectory(format!(
                    "composition at t = {} is not an adjacent coarsening of the one at t = {}",
                    w[1].0, w[0].0
                )));
            }
        }
        Ok(NestedCompositionTrajectory { events })
    }

    pub fn events(&self) -> &[(f64, Composition)] {
        &self.events
    }

    pub fn n(&self) -> usize {
        self.events[0].1.n()
    }

    pub fn composition_at(&self, t: f64) -> &Composition {
        let k = self.events.partition_point(|e| e.0 <= t).saturating_sub(1);
        &self.events[k].1
    }

    /// Forgets the block order at every time.
    pub fn to_partitions(&self) -> CoalescentTrajectory {
        CoalescentTrajectory {
            events: self
                .events
                .iter()
                .map(|(t, c)| (*t, c.to_partition()))
                .collect(),
        }
    }
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    let mut any = false;
    for t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTrajectory(format!("bad event time {t}")));
        }
        if prev.is_some_and(|p| t <= p) {
            return Err(Error::InvalidTrajectory(
                "event times must strictly increase".to_string(),
            ));
        }
        prev = Some(t);
        any = true;
    }
    if !any {
        return Err(Error::InvalidTrajectory("no events".to_string()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct EventRepr {
    t: f64,
    blocks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRepr {
    events: Vec<EventRepr>,
}

fn one_based(blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    blocks
        .iter()
        .map(|b| b.iter().map(|i| i + 1).collect())
        .collect()
}

fn zero_based(blocks: Vec<Vec<usize>>) -> Result<(usize, Vec<Vec<usize>>)> {
    let mut n = 0;
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let mut block = Vec::with_capacity(b.len());
        for i in b {
            if i == 0 {
                return Err(Error::InvalidTrajectory("labels start at 1".to_string()));
            }
            block.push(i - 1);
        }
        n += block.len();
        out.push(block);
    }
    Ok((n, out))
}

impl Serialize for CoalescentTrajectory {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrajectoryRepr {
            events: self
                .events
                .iter()
                .map(|(t, p)| EventRepr {
                    t: *t,
                    blocks: one_based(&p.blocks()),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoalescentTrajectory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = TrajectoryRepr::deserialize(d)?;
        let events = repr
            .events
            .into_iter()
            .map(|e| {
                let (n, blocks) = zero_based(e.blocks)?;
                Ok((e.t, Partition::from_blocks(n, &blocks)?))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        CoalescentTrajectory::new(events).map_err(D::Error::custom)
    }
}

impl Serialize for NestedCompositionTrajectory {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrajectoryRepr {
            events: self
                .events
                .iter()
                .map(|(t, c)| EventRepr {
                    t: *t,
                    blocks: one_based(c.blocks()),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NestedCompositionTrajectory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = TrajectoryRepr::deserialize(d)?;
        let events = repr
            .events
            .into_iter()
            .map(|e| {
                let (n, blocks) = zero_based(e.blocks)?;
                Ok((e.t, Composition::new(n, blocks)?))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        NestedCompositionTrajectory::new(events).map_err(D::Error::custom)
    }
}
