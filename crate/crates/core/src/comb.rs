//! Combs: nondecreasing right-continuous families of interval-partitions.
//!
//! Two representations share the [`CombView`] interface:
//!
//! * [`Comb`] stores the event list `(t_k, I_{t_k})` explicitly and can encode
//!   any finite nested interval-partition, including ones with dust.
//! * [`ToothComb`] stores a finite comb function as its teeth. Its value at
//!   time `t` is `(0,1)` minus the positions of teeth taller than `t`.
//!
//! A point never covered by any value of a comb has comb function
//! [`Height::Never`]; so does the distance between two points that never
//! share a component.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::IntervalPartition;
use crate::uniform_open;

/// A time in `[0, ∞)` or the sentinel for "never".
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Height {
    Finite(f64),
    Never,
}

impl Height {
    pub const ZERO: Height = Height::Finite(0.0);

    pub fn finite(self) -> Option<f64> {
        match self {
            Height::Finite(t) => Some(t),
            Height::Never => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Height::Finite(_))
    }

    pub fn max(self, other: Height) -> Height {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `Never` maps to `f64::INFINITY`; only for plotting and statistics.
    pub fn to_f64_lossy(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(t) => write!(f, "{t}"),
            Height::Never => write!(f, "never"),
        }
    }
}

impl Serialize for Height {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Height {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map_or(Height::Never, Height::Finite))
    }
}

/// A tooth of height `height` at `position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tooth {
    pub position: f64,
    pub height: f64,
}

impl Tooth {
    pub fn new(position: f64, height: f64) -> Self {
        Tooth { position, height }
    }
}

impl Serialize for Tooth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.position, self.height].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tooth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [position, height] = <[f64; 2]>::deserialize(d)?;
        Ok(Tooth { position, height })
    }
}

/// Read access shared by both comb representations.
pub trait CombView {
    /// Times at which the value may change, increasing, starting at 0.
    fn event_times(&self) -> Vec<f64>;

    /// The value at time `t >= 0` (right-continuous).
    fn partition_at(&self, t: f64) -> IntervalPartition;

    /// `inf { t : x in I_t }`.
    fn comb_function(&self, x: f64) -> Height;

    /// `inf { t : x and y lie in the same component of I_t }`, 0 when `x == y`.
    fn distance(&self, x: f64, y: f64) -> Height;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombEvent {
    #[serde(rename = "t")]
    pub time: f64,
    pub partition: IntervalPartition,
}

/// A finite nested interval-partition given by its events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CombRepr")]
pub struct Comb {
    events: Vec<CombEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    teeth: Option<Vec<Tooth>>,
}

#[derive(Deserialize)]
struct CombRepr {
    events: Vec<CombEvent>,
    #[serde(default)]
    teeth: Option<Vec<Tooth>>,
}

impl TryFrom<CombRepr> for Comb {
    type Error = Error;

    fn try_from(repr: CombRepr) -> Result<Self> {
        let comb = Comb::new(repr.events)?;
        match repr.teeth {
            None => Ok(comb),
            Some(teeth) => {
                let from_teeth = ToothComb::new(teeth)?;
                if from_teeth.to_comb().events != comb.events {
                    return Err(Error::InvalidComb(
                        "teeth do not match the event list".to_string(),
                    ));
                }
                Ok(Comb {
                    teeth: Some(from_teeth.teeth),
                    ..comb
                })
            }
        }
    }
}

impl Comb {
    /// Checks that times start at 0, strictly increase, and values are nested.
    pub fn new(events: Vec<CombEvent>) -> Result<Self> {
        let first = events
            .first()
            .ok_or_else(|| Error::InvalidComb("a comb needs at least one event".to_string()))?;
        if first.time != 0.0 {
            return Err(Error::InvalidComb(format!(
                "first event at t = {} instead of 0",
                first.time
            )));
        }
        for w in events.windows(2) {
            if !(w[1].time > w[0].time) || !w[1].time.is_finite() {
                return Err(Error::InvalidComb(format!(
                    "event times {} and {} are not strictly increasing",
                    w[0].time, w[1].time
                )));
            }
            if !w[0].partition.is_subset_of(&w[1].partition) {
                return Err(Error::InvalidComb(format!(
                    "value at t = {} is not contained in value at t = {}",
                    w[0].time, w[1].time
                )));
            }
        }
        Ok(Comb { events, teeth: None })
    }

    /// The comb `I_t = {f <= t}`, `I_0 = interior {f = 0}`, of a finite comb function.
    pub fn from_teeth(teeth: Vec<Tooth>) -> Result<Self> {
        Ok(ToothComb::new(teeth)?.to_comb())
    }

    pub fn events(&self) -> &[CombEvent] {
        &self.events
    }

    pub fn teeth(&self) -> Option<&[Tooth]> {
        self.teeth.as_deref()
    }

    pub fn last_time(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    fn index_at(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t).saturating_sub(1)
    }

    /// Value at time `t` (the last event at or before `t`).
    pub fn eval(&self, t: f64) -> Result<&IntervalPartition> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        Ok(&self.events[self.index_at(t)].partition)
    }

    /// Right and left faces with their persistence windows.
    pub fn face_sets(&self) -> FaceSets {
        // bit patterns of nonnegative floats sort like the floats
        let mut right: BTreeMap<u64, Window> = BTreeMap::new();
        let mut left: BTreeMap<u64, Window> = BTreeMap::new();
        for event in &self.events {
            let comps = event.partition.components();
            let rights: Vec<f64> = comps.iter().map(|c| c.right).filter(|&r| r < 1.0).collect();
            let lefts: Vec<f64> = comps.iter().map(|c| c.left).filter(|&l| l > 0.0).collect();
            update_windows(&mut right, &rights, event.time);
            update_windows(&mut left, &lefts, event.time);
        }
        let collect = |m: BTreeMap<u64, Window>| {
            m.into_iter()
                .map(|(bits, w)| Face {
                    position: f64::from_bits(bits),
                    window: w,
                })
                .collect()
        };
        FaceSets {
            right: collect(right),
            left: collect(left),
        }
    }

    /// Piecewise-constant description of the comb function over `[0, 1]`.
    pub fn profile(&self) -> CombProfile {
        let mut points: Vec<f64> = vec![0.0, 1.0];
        for e in &self.events {
            for c in e.partition.components() {
                points.push(c.left);
                points.push(c.right);
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let at_point = points.iter().map(|&p| self.comb_function(p)).collect();
        let on_piece = points
            .windows(2)
            .map(|w| self.comb_function(0.5 * (w[0] + w[1])))
            .collect();
        CombProfile {
            points,
            at_point,
            on_piece,
        }
    }

    /// Distance on the completion with right and left faces added.
    pub fn extended_distance(&self, p: FacePoint, q: FacePoint) -> Result<Height> {
        let faces = self.face_sets();
        for point in [p, q] {
            let ok = match point {
                FacePoint::Plain(x) => x > 0.0 && x < 1.0,
                FacePoint::Right(x) => faces.right.iter().any(|f| f.position == x),
                FacePoint::Left(x) => faces.left.iter().any(|f| f.position == x),
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "{point:?} is not a point of the completed comb"
                )));
            }
        }
        Ok(extended_distance_with(&self.profile(), p, q))
    }
}

fn update_windows(open: &mut BTreeMap<u64, Window>, current: &[f64], time: f64) {
    let present: std::collections::BTreeSet<u64> = current.iter().map(|x| x.to_bits()).collect();
    for (bits, w) in open.iter_mut() {
        if w.end == Height::Never && !present.contains(bits) {
            w.end = Height::Finite(time);
        }
    }
    for bits in present {
        open.entry(bits).or_insert(Window {
            start: time,
            end: Height::Never,
        });
    }
}

impl CombView for Comb {
    fn event_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }

    fn partition_at(&self, t: f64) -> IntervalPartition {
        self.events[self.index_at(t.max(0.0))].partition.clone()
    }

    fn comb_function(&self, x: f64) -> Height {
        // membership is monotone in time, so the first covering event is found by bisection
        let k = self
            .events
            .partition_point(|e| e.partition.locate(x).is_none());
        self.events
            .get(k)
            .map_or(Height::Never, |e| Height::Finite(e.time))
    }

    fn distance(&self, x: f64, y: f64) -> Height {
        if x == y {
            return Height::ZERO;
        }
        let together = |e: &CombEvent| match (e.partition.locate(x), e.partition.locate(y)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        let k = self.events.partition_point(|e| !together(e));
        self.events
            .get(k)
            .map_or(Height::Never, |e| Height::Finite(e.time))
    }
}

/// The comb function as constant pieces between breakpoints.
///
/// `points` are all component endpoints together with 0 and 1; `on_piece[i]`
/// is the value on the open interval `(points[i], points[i+1])`.
#[derive(Debug, Clone)]
pub struct CombProfile {
    points: Vec<f64>,
    at_point: Vec<Height>,
    on_piece: Vec<Height>,
}

impl CombProfile {
    /// Supremum of the comb function over the interval from `lo` to `hi`
    /// (`lo <= hi`), each end included or not. Empty sets give 0.
    pub fn sup(&self, lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Height {
        let mut best = Height::ZERO;
        if lo == hi {
            return if lo_closed && hi_closed {
                self.value_at(lo)
            } else {
                best
            };
        }
        if lo_closed {
            best = best.max(self.value_at(lo));
        }
        if hi_closed {
            best = best.max(self.value_at(hi));
        }
        // breakpoints strictly inside
        let first = self.points.partition_point(|&p| p <= lo);
        let last = self.points.partition_point(|&p| p < hi);
        for i in first..last {
            best = best.max(self.at_point[i]);
        }
        // pieces meeting (lo, hi)
        let piece_first = self.points.partition_point(|&p| p <= lo).saturating_sub(1);
        for i in piece_first..self.on_piece.len() {
            if self.points[i] >= hi {
                break;
            }
            best = best.max(self.on_piece[i]);
        }
        best
    }

    fn value_at(&self, x: f64) -> Height {
        match self.points.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => self.at_point[i],
            Err(i) => self.on_piece[i.saturating_sub(1).min(self.on_piece.len() - 1)],
        }
    }
}

/// `[start, end)`: the event-time window during which a face exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub start: f64,
    pub end: Height,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Face {
    pub position: f64,
    pub window: Window,
}

/// Right faces (`right`) and left faces (`left`) of a comb.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FaceSets {
    pub right: Vec<Face>,
    pub left: Vec<Face>,
}

/// A point of `[0,1]` or one of the added faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FacePoint {
    Plain(f64),
    Right(f64),
    Left(f64),
}

impl FacePoint {
    pub fn position(self) -> f64 {
        match self {
            FacePoint::Plain(x) | FacePoint::Right(x) | FacePoint::Left(x) => x,
        }
    }
}

fn extended_distance_with(profile: &CombProfile, p: FacePoint, q: FacePoint) -> Height {
    use FacePoint::*;
    if p == q {
        return Height::ZERO;
    }
    let (a, b) = if p.position() <= q.position() { (p, q) } else { (q, p) };
    if a.position() == b.position() {
        // distinct faces of the same position sit at distance f(x)
        return profile.value_at(a.position());
    }
    // the lower point's right face and the upper point's left face include their ends
    let lo_closed = !matches!(a, Left(_));
    let hi_closed = !matches!(b, Right(_));
    profile.sup(a.position(), lo_closed, b.position(), hi_closed)
}

/// A comb given by finitely many teeth, sorted by position.
#[derive(Debug, Clone, PartialEq)]
pub struct ToothComb {
    teeth: Vec<Tooth>,
}

impl ToothComb {
    /// Positions must be distinct and in (0,1); heights finite and positive.
    pub fn new(mut teeth: Vec<Tooth>) -> Result<Self> {
        for t in &teeth {
            if !(t.position > 0.0 && t.position < 1.0) {
                return Err(Error::InvalidComb(format!(
                    "tooth position {} outside (0, 1)",
                    t.position
                )));
            }
            if !(t.height > 0.0 && t.height.is_finite()) {
                return Err(Error::InvalidComb(format!(
                    "tooth height {} is not positive",
                    t.height
                )));
            }
        }
        teeth.sort_by(|a, b| a.position.total_cmp(&b.position));
        if let Some(w) = teeth.windows(2).find(|w| w[0].position == w[1].position) {
            return Err(Error::InvalidComb(format!(
                "duplicate tooth position {}",
                w[0].position
            )));
        }
        Ok(ToothComb { teeth })
    }

    /// Teeth sorted by position.
    pub fn teeth(&self) -> &[Tooth] {
        &self.teeth
    }

    pub fn len(&self) -> usize {
        self.teeth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teeth.is_empty()
    }

    /// Height of the tallest tooth, 0 without teeth.
    pub fn max_height(&self) -> f64 {
        self.teeth.iter().map(|t| t.height).fold(0.0, f64::max)
    }

    /// Tallest tooth strictly inside `(lo, hi)`, 0 if none.
    pub fn sup_open(&self, lo: f64, hi: f64) -> f64 {
        let start = self.teeth.partition_point(|t| t.position <= lo);
        self.teeth[start..]
            .iter()
            .take_while(|t| t.position < hi)
            .map(|t| t.height)
            .fold(0.0, f64::max)
    }

    /// Materializes the event list: one event at 0 and one per distinct height.
    pub fn to_comb(&self) -> Comb {
        let events = self
            .event_times()
            .into_iter()
            .map(|t| CombEvent {
                time: t,
                partition: self.partition_at(t),
            })
            .collect();
        Comb {
            events,
            teeth: Some(self.teeth.clone()),
        }
    }
}

impl CombView for ToothComb {
    fn event_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self.teeth.iter().map(|t| t.height).collect();
        times.push(0.0);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    fn partition_at(&self, t: f64) -> IntervalPartition {
        let cuts: Vec<f64> = self
            .teeth
            .iter()
            .filter(|tooth| tooth.height > t)
            .map(|tooth| tooth.position)
            .collect();
        IntervalPartition::from_cuts(&cuts).expect("tooth positions lie in (0, 1)")
    }

    fn comb_function(&self, x: f64) -> Height {
        match self.teeth.binary_search_by(|t| t.position.total_cmp(&x)) {
            Ok(i) => Height::Finite(self.teeth[i].height),
            Err(_) if x > 0.0 && x < 1.0 => Height::ZERO,
            Err(_) => Height::Never,
        }
    }

    fn distance(&self, x: f64, y: f64) -> Height {
        if x == y {
            return Height::ZERO;
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        if lo <= 0.0 || hi >= 1.0 {
            return Height::Never;
        }
        let start = self.teeth.partition_point(|t| t.position < lo);
        Height::Finite(
            self.teeth[start..]
                .iter()
                .take_while(|t| t.position <= hi)
                .map(|t| t.height)
                .fold(0.0, f64::max),
        )
    }
}

/// Teeth of a Kingman comb truncated to `n_teeth` teeth, in index order.
///
/// Tooth `i` (for `i = 2, ..., n_teeth + 1`) has height
/// `T_i = sum_{j = i}^{n_teeth + 1} 2 e_j / (j (j - 1))` with i.i.d.
/// standard exponentials `e_j`, and a uniform position. Heights strictly
/// decrease along the returned vector. Mergers below `T_{n_teeth + 1}` are
/// missing; the expected unresolved height is about `2 / n_teeth`.
pub fn sample_kingman_teeth<R: Rng + ?Sized>(rng: &mut R, n_teeth: usize) -> Result<Vec<Tooth>> {
    if n_teeth == 0 {
        return Err(Error::InvalidArgument(
            "a Kingman comb needs at least one tooth".to_string(),
        ));
    }
    let mut weighted = Vec::with_capacity(n_teeth);
    let mut positions = Vec::with_capacity(n_teeth);
    for j in 2..=n_teeth + 1 {
        let e: f64 = Exp1.sample(rng);
        let jf = j as f64;
        weighted.push(2.0 * e / (jf * (jf - 1.0)));
        positions.push(uniform_open(rng));
    }
    redraw_duplicates(rng, &mut positions);
    let mut heights = vec![0.0; n_teeth];
    let mut acc = 0.0;
    for i in (0..n_teeth).rev() {
        acc += weighted[i];
        heights[i] = acc;
    }
    Ok(positions
        .into_iter()
        .zip(heights)
        .map(|(position, height)| Tooth { position, height })
        .collect())
}

/// A truncated Kingman comb.
pub fn sample_kingman_comb<R: Rng + ?Sized>(rng: &mut R, n_teeth: usize) -> Result<ToothComb> {
    ToothComb::new(sample_kingman_teeth(rng, n_teeth)?)
}

/// Replaces repeated values by fresh uniforms until all are distinct.
pub(crate) fn redraw_duplicates<R: Rng + ?Sized>(rng: &mut R, values: &mut [f64]) {
    loop {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let clash = order
            .windows(2)
            .find(|w| values[w[0]] == values[w[1]])
            .map(|w| w[1]);
        match clash {
            Some(i) => values[i] = uniform_open(rng),
            None => return,
        }
    }
}
