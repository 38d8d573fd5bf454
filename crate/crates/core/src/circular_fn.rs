//! Piecewise-constant integer functions on the unit circle.
//!
//! Every LitS is stored as a [`StepFnS1`]: a sorted list of breakpoints in
//! `[0, 2π)` together with the value that holds from each breakpoint up to the
//! next one (cyclically). Breakpoints closer than [`EPS_ANGLE`] are fused, and
//! adjacent arcs never carry the same value, so structurally equal functions
//! compare equal.
//!
//! Evaluation is half-open: at a breakpoint the value of the arc that starts
//! there is returned. Zero-length pieces (singletons and the missing point of
//! a full-minus-point arc) are invisible to the step representation; callers
//! that need exact-point semantics use [`uncovered_arcs`] / [`covers_circle`].

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{LitsError, Result};

/// Breakpoints closer than this (radians) are fused.
pub const EPS_ANGLE: f64 = 1e-9;

/// An element of S¹, normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Self {
        let mut v = radians.rem_euclid(TAU);
        // rem_euclid of a tiny negative number rounds up to exactly 2π
        if v >= TAU {
            v = 0.0;
        }
        Angle(v)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Counterclockwise distance from `self` to `to`, in `[0, 2π)`.
    pub fn ccw_to(self, to: Angle) -> f64 {
        Angle::new(to.0 - self.0).0
    }

    /// Geodesic distance on S¹, in `[0, π]`.
    pub fn distance(self, other: Angle) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(TAU - d)
    }

    /// Signed smallest rotation taking `self` onto `other`, in `(-π, π]`.
    pub fn signed_to(self, other: Angle) -> f64 {
        let d = self.ccw_to(other);
        if d > PI {
            d - TAU
        } else {
            d
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::new(v)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> Self {
        a.0
    }
}

impl Add<f64> for Angle {
    type Output = Angle;
    fn add(self, rhs: f64) -> Angle {
        Angle::new(self.0 + rhs)
    }
}

impl Sub<f64> for Angle {
    type Output = Angle;
    fn sub(self, rhs: f64) -> Angle {
        Angle::new(self.0 - rhs)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A subset of S¹ of one of the shapes a lit arc can take.
///
/// `Proper` arcs are open and swept counterclockwise from `start` over
/// `length ∈ (0, 2π)` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularInterval {
    Empty,
    Proper { start: Angle, length: f64 },
    Full,
    FullMinusPoint { at: Angle },
    Singleton { at: Angle },
}

impl AngularInterval {
    /// Open arc swept counterclockwise from `start` to `end`. Coincident
    /// endpoints give the empty arc, as `(θ, θ) = ∅`.
    pub fn open(start: f64, end: f64) -> Self {
        let start = Angle::new(start);
        let length = start.ccw_to(Angle::new(end));
        if length == 0.0 {
            AngularInterval::Empty
        } else {
            AngularInterval::Proper { start, length }
        }
    }

    /// Open arc `(center − half_width, center + half_width)`.
    ///
    /// A non-positive half width degenerates to the singleton `{center}`; a
    /// half width that sweeps (within [`EPS_ANGLE`]) the whole circle leaves
    /// out only the antipode of `center`.
    pub fn centered(center: f64, half_width: f64) -> Self {
        let c = Angle::new(center);
        if half_width <= 0.0 {
            AngularInterval::Singleton { at: c }
        } else if 2.0 * half_width >= TAU - EPS_ANGLE {
            AngularInterval::FullMinusPoint { at: c + PI }
        } else {
            AngularInterval::Proper {
                start: c - half_width,
                length: 2.0 * half_width,
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            AngularInterval::Empty | AngularInterval::Singleton { .. } => 0.0,
            AngularInterval::Proper { length, .. } => length,
            AngularInterval::Full | AngularInterval::FullMinusPoint { .. } => TAU,
        }
    }

    /// Exact-point membership.
    pub fn contains(&self, t: Angle) -> bool {
        match *self {
            AngularInterval::Empty => false,
            AngularInterval::Full => true,
            AngularInterval::FullMinusPoint { at } => t != at,
            AngularInterval::Singleton { at } => t == at,
            AngularInterval::Proper { start, length } => {
                let d = start.ccw_to(t);
                d > 0.0 && d < length
            }
        }
    }

    /// Midpoint of the arc; `None` for the empty arc and the full circle.
    pub fn center(&self) -> Option<Angle> {
        match *self {
            AngularInterval::Empty | AngularInterval::Full => None,
            AngularInterval::Proper { start, length } => Some(start + length / 2.0),
            AngularInterval::Singleton { at } => Some(at),
            AngularInterval::FullMinusPoint { at } => Some(at + PI),
        }
    }

    pub fn start(&self) -> Option<Angle> {
        match *self {
            AngularInterval::Proper { start, .. } => Some(start),
            AngularInterval::Singleton { at } | AngularInterval::FullMinusPoint { at } => Some(at),
            _ => None,
        }
    }

    pub fn end(&self) -> Option<Angle> {
        match *self {
            AngularInterval::Proper { start, length } => Some(start + length),
            AngularInterval::Singleton { at } | AngularInterval::FullMinusPoint { at } => Some(at),
            _ => None,
        }
    }

    pub fn shifted(&self, beta: f64) -> Self {
        match *self {
            AngularInterval::Proper { start, length } => AngularInterval::Proper {
                start: start + beta,
                length,
            },
            AngularInterval::Singleton { at } => AngularInterval::Singleton { at: at + beta },
            AngularInterval::FullMinusPoint { at } => {
                AngularInterval::FullMinusPoint { at: at + beta }
            }
            other => other,
        }
    }
}

/// Canonical piecewise-constant function `S¹ → ℕ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFn")]
pub struct StepFnS1 {
    breakpoints: Vec<Angle>,
    values: Vec<u32>,
}

#[derive(Deserialize)]
struct RawStepFn {
    breakpoints: Vec<f64>,
    values: Vec<u32>,
}

impl TryFrom<RawStepFn> for StepFnS1 {
    type Error = LitsError;

    fn try_from(raw: RawStepFn) -> Result<Self> {
        if raw.breakpoints.is_empty() {
            return match raw.values.as_slice() {
                [v] => Ok(StepFnS1::constant(*v)),
                _ => Err(LitsError::Parse(
                    "constant step function needs exactly one value".into(),
                )),
            };
        }
        if raw.breakpoints.len() != raw.values.len() {
            return Err(LitsError::Parse(
                "breakpoints and values differ in length".into(),
            ));
        }
        let ok = raw.breakpoints.iter().all(|b| (0.0..TAU).contains(b))
            && raw.breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(LitsError::Parse(
                "breakpoints must be strictly increasing in [0, 2π)".into(),
            ));
        }
        let pieces = raw
            .breakpoints
            .into_iter()
            .zip(raw.values.into_iter().map(i64::from))
            .collect();
        Ok(StepFnS1::from_pieces(pieces, 0))
    }
}

impl StepFnS1 {
    pub fn constant(value: u32) -> Self {
        StepFnS1 {
            breakpoints: Vec::new(),
            values: vec![value],
        }
    }

    pub fn zero() -> Self {
        StepFnS1::constant(0)
    }

    pub fn breakpoints(&self) -> &[Angle] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn min_value(&self) -> u32 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    pub fn max_value(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// Iterates `(start, length, value)` over the arcs of the function. A
    /// constant function yields one arc of length 2π starting at 0.
    pub fn segments(&self) -> impl Iterator<Item = (Angle, f64, u32)> + '_ {
        let n = self.breakpoints.len();
        let constant = (n == 0).then(|| (Angle::ZERO, TAU, self.values[0]));
        let pieces = (0..n).map(move |i| {
            let start = self.breakpoints[i];
            let next = self.breakpoints[(i + 1) % n];
            let length = if n == 1 { TAU } else { start.ccw_to(next) };
            (start, length, self.values[i])
        });
        constant.into_iter().chain(pieces)
    }

    /// Same values with breakpoints pairwise within `tol` (cyclic distance).
    pub fn approx_eq(&self, other: &StepFnS1, tol: f64) -> bool {
        self.values == other.values
            && self
                .breakpoints
                .iter()
                .zip(&other.breakpoints)
                .all(|(a, b)| a.distance(*b) <= tol)
    }

    /// Largest breakpoint displacement against `other`, or `None` when the
    /// two functions differ structurally.
    pub fn max_breakpoint_gap(&self, other: &StepFnS1) -> Option<f64> {
        (self.values == other.values).then(|| {
            self.breakpoints
                .iter()
                .zip(&other.breakpoints)
                .map(|(a, b)| a.distance(*b))
                .fold(0.0, f64::max)
        })
    }

    /// Value at `t`; at a breakpoint, the value of the arc starting there.
    pub fn evaluate(&self, t: Angle) -> u32 {
        if self.breakpoints.is_empty() {
            return self.values[0];
        }
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        if idx == 0 {
            *self.values.last().expect("non-empty")
        } else {
            self.values[idx - 1]
        }
    }

    // Builds a canonical function from `(start, value)` pieces sorted by
    // start; `fallback` is the value when no pieces are given.
    fn from_pieces(pieces: Vec<(f64, i64)>, fallback: i64) -> Self {
        let mut fused: Vec<(f64, i64)> = Vec::with_capacity(pieces.len());
        for (a, v) in pieces {
            match fused.last_mut() {
                Some(top) if a - top.0 < EPS_ANGLE => top.1 = v,
                _ => fused.push((a, v)),
            }
        }
        while fused.len() > 1 {
            let (first, last) = (fused[0], fused[fused.len() - 1]);
            if first.0 + TAU - last.0 >= EPS_ANGLE {
                break;
            }
            fused.remove(0);
            fused.last_mut().expect("len > 1").1 = first.1;
        }
        let to_u32 = |v: i64| {
            debug_assert!(v >= 0, "negative step value {v}");
            v.max(0) as u32
        };
        if fused.is_empty() {
            return StepFnS1::constant(to_u32(fallback));
        }
        let n = fused.len();
        let mut breakpoints = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let prev = fused[(i + n - 1) % n].1;
            if fused[i].1 != prev {
                breakpoints.push(Angle::new(fused[i].0));
                values.push(to_u32(fused[i].1));
            }
        }
        if breakpoints.is_empty() {
            return StepFnS1::constant(to_u32(fused[0].1));
        }
        StepFnS1 {
            breakpoints,
            values,
        }
    }

    fn from_events(base: i64, mut events: Vec<(f64, i64)>) -> Self {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut pieces: Vec<(f64, i64)> = Vec::with_capacity(events.len());
        let mut current = base;
        for (a, d) in events {
            current += d;
            match pieces.last_mut() {
                Some(top) if top.0 == a => top.1 = current,
                _ => pieces.push((a, current)),
            }
        }
        StepFnS1::from_pieces(pieces, base)
    }

    /// Applies `f` to every value and re-canonicalizes.
    pub fn map_values(&self, f: impl Fn(u32) -> u32) -> Self {
        if self.is_constant() {
            return StepFnS1::constant(f(self.values[0]));
        }
        let pieces = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .map(|(b, v)| (b.radians(), i64::from(f(*v))))
            .collect();
        StepFnS1::from_pieces(pieces, 0)
    }

    /// Re-runs canonicalization; a no-op on any value built by this module.
    pub fn canonicalized(&self) -> Self {
        self.map_values(|v| v)
    }

    /// Total length of the arcs on which `pred(value)` holds.
    pub fn measure_where(&self, pred: impl Fn(u32) -> bool) -> f64 {
        self.segments()
            .filter(|(_, _, v)| pred(*v))
            .map(|(_, len, _)| len)
            .fold(0.0, |a, b| a + b)
    }

    /// Length of the zero set.
    pub fn zero_set_length(&self) -> f64 {
        self.measure_where(|v| v == 0)
    }

    /// Maximal arcs where the value is below `threshold`, sorted by start.
    pub fn sublevel_intervals(&self, threshold: u32) -> Vec<AngularInterval> {
        self.level_intervals(|v| v < threshold)
    }

    /// Maximal arcs where the value is at least `threshold`, sorted by start.
    pub fn superlevel_intervals(&self, threshold: u32) -> Vec<AngularInterval> {
        self.level_intervals(|v| v >= threshold)
    }

    fn level_intervals(&self, pred: impl Fn(u32) -> bool) -> Vec<AngularInterval> {
        let n = self.breakpoints.len();
        if n == 0 {
            return if pred(self.values[0]) {
                vec![AngularInterval::Full]
            } else {
                Vec::new()
            };
        }
        let Some(anchor) = (0..n).find(|&i| !pred(self.values[i])) else {
            return vec![AngularInterval::Full];
        };
        let mut out = Vec::new();
        let mut run_start: Option<usize> = None;
        for step in 1..=n {
            let i = (anchor + step) % n;
            let inside = step < n && pred(self.values[i]);
            match (inside, run_start) {
                (true, None) => run_start = Some(i),
                (false, Some(s)) => {
                    let start = self.breakpoints[s];
                    out.push(AngularInterval::Proper {
                        start,
                        length: start.ccw_to(self.breakpoints[i]),
                    });
                    run_start = None;
                }
                _ => {}
            }
        }
        out.sort_by(|a, b| {
            let sa = a.start().map_or(0.0, Angle::radians);
            let sb = b.start().map_or(0.0, Angle::radians);
            sa.total_cmp(&sb)
        });
        out
    }

    /// Sum of absolute jumps over all breakpoints.
    pub fn total_variation(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| (i64::from(self.values[i]) - i64::from(self.values[(i + n - 1) % n])).abs())
            .sum::<i64>() as f64
    }

    /// `shift(f, β)(t) = f(t − β)`.
    pub fn shift(&self, beta: f64) -> Self {
        if self.is_constant() {
            return self.clone();
        }
        let mut pieces: Vec<(f64, i64)> = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .map(|(b, v)| ((*b + beta).radians(), i64::from(*v)))
            .collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        StepFnS1::from_pieces(pieces, 0)
    }

    /// Samples at `2πk/n` and applies a centred circular moving average.
    pub fn sample_and_smooth(&self, n_samples: usize, window: usize) -> Result<Vec<f64>> {
        if n_samples == 0 {
            return Err(LitsError::param("n_samples", "must be positive"));
        }
        if window == 0 || window % 2 == 0 {
            return Err(LitsError::param("window", "must be an odd positive integer"));
        }
        if window > n_samples {
            return Err(LitsError::param("window", "must not exceed n_samples"));
        }
        let samples: Vec<f64> = (0..n_samples)
            .map(|k| f64::from(self.evaluate(Angle::new(TAU * k as f64 / n_samples as f64))))
            .collect();
        let half = (window / 2) as isize;
        let n = n_samples as isize;
        Ok((0..n)
            .map(|k| {
                let sum: f64 = (-half..=half)
                    .map(|j| samples[(k + j).rem_euclid(n) as usize])
                    .sum();
                sum / window as f64
            })
            .collect())
    }
}

/// Counts, at every angle, how many of `intervals` contain it.
///
/// Full and full-minus-point arcs add one everywhere; empty arcs and
/// singletons add nothing.
pub fn sum_of_indicators(intervals: &[AngularInterval]) -> StepFnS1 {
    let mut base = 0i64;
    let mut events = Vec::with_capacity(2 * intervals.len());
    for interval in intervals {
        match *interval {
            AngularInterval::Empty | AngularInterval::Singleton { .. } => {}
            AngularInterval::Full | AngularInterval::FullMinusPoint { .. } => base += 1,
            AngularInterval::Proper { start, length } => {
                let s = start.radians();
                let e = s + length;
                events.push((s, 1));
                if e < TAU {
                    events.push((e, -1));
                } else {
                    base += 1;
                    events.push((e - TAU, -1));
                }
            }
        }
    }
    StepFnS1::from_events(base, events)
}

/// Indicator function of the union of `intervals`.
pub fn indicator_of_union(intervals: &[AngularInterval]) -> StepFnS1 {
    sum_of_indicators(intervals).map_values(|v| v.min(1))
}

/// A closed arc of S¹ left uncovered by a family of open arcs. A zero
/// `length` denotes a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncoveredArc {
    pub start: Angle,
    pub length: f64,
}

impl UncoveredArc {
    pub fn center(&self) -> Angle {
        self.start + self.length / 2.0
    }
}

/// Exact complement of the union of `intervals`, without any breakpoint
/// fusion. Singletons are only removed when they cover an isolated
/// uncovered point (matched to 1e-12).
pub fn uncovered_arcs(intervals: &[AngularInterval]) -> Vec<UncoveredArc> {
    if intervals.iter().any(|i| matches!(i, AngularInterval::Full)) {
        return Vec::new();
    }
    let mut open: Vec<(f64, f64)> = Vec::with_capacity(2 * intervals.len());
    let mut singletons = Vec::new();
    for interval in intervals {
        let (s, len) = match *interval {
            AngularInterval::Proper { start, length } => (start.radians(), length),
            AngularInterval::FullMinusPoint { at } => (at.radians(), TAU),
            AngularInterval::Singleton { at } => {
                singletons.push(at);
                continue;
            }
            _ => continue,
        };
        open.push((s - TAU, s + len - TAU));
        open.push((s, s + len));
    }
    open.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(open.len());
    for (a, b) in open {
        match merged.last_mut() {
            Some(last) if a < last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }

    let mut gaps: Vec<(f64, f64)> = Vec::new();
    let mut pos = 0.0;
    for (a, b) in merged {
        if pos >= TAU {
            break;
        }
        if b <= pos {
            continue;
        }
        if a >= pos {
            gaps.push((pos, a.min(TAU)));
        }
        pos = b;
    }
    if pos < TAU {
        gaps.push((pos, TAU));
    }

    let mut arcs: Vec<UncoveredArc> = Vec::with_capacity(gaps.len());
    let wraps = gaps.len() > 1 && gaps[0].0 == 0.0 && gaps[gaps.len() - 1].1 >= TAU;
    if wraps {
        let head = gaps.remove(0);
        let tail = gaps.last_mut().expect("len > 1");
        tail.1 = TAU + head.1;
    }
    for (a, b) in gaps {
        arcs.push(UncoveredArc {
            start: Angle::new(a),
            length: (b - a).min(TAU),
        });
    }
    arcs.retain(|arc| {
        !(arc.length == 0.0 && singletons.iter().any(|s| s.distance(arc.start) <= 1e-12))
    });
    arcs.sort_by(|a, b| a.start.radians().total_cmp(&b.start.radians()));
    arcs
}

/// Whether the union of `intervals` is all of S¹ (exact-point semantics).
pub fn covers_circle(intervals: &[AngularInterval]) -> bool {
    uncovered_arcs(intervals).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn arc(a: f64, b: f64) -> AngularInterval {
        AngularInterval::open(a, b)
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(Angle::new(TAU).radians(), 0.0);
        assert_eq!(Angle::new(-1e-20).radians(), 0.0);
        assert!((Angle::new(-FRAC_PI_2).radians() - 3.0 * FRAC_PI_2).abs() < 1e-15);
        let a = Angle::new(7.5);
        assert_eq!(Angle::new(a.radians()), a);
    }

    #[test]
    fn empty_union_is_zero() {
        assert_eq!(indicator_of_union(&[]), StepFnS1::zero());
        assert_eq!(sum_of_indicators(&[]), StepFnS1::zero());
    }

    #[test]
    fn single_arc_indicator() {
        let f = indicator_of_union(&[arc(-PI / 3.0, PI / 3.0)]);
        assert_eq!(f.values(), &[0, 1]);
        assert!((f.breakpoints()[0].radians() - PI / 3.0).abs() < 1e-15);
        assert!((f.breakpoints()[1].radians() - 5.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(f.evaluate(Angle::ZERO), 1);
        assert_eq!(f.evaluate(Angle::new(PI)), 0);
    }

    #[test]
    fn overlapping_union_matches_grid_oracle() {
        let intervals = [arc(0.0, PI), arc(FRAC_PI_2, 3.0 * FRAC_PI_2)];
        let f = indicator_of_union(&intervals);
        let n = 10_000;
        for k in 0..n {
            let t = Angle::new(TAU * (k as f64 + 0.5) / n as f64);
            let expected = u32::from(intervals.iter().any(|i| i.contains(t)));
            assert_eq!(f.evaluate(t), expected, "t = {t}");
        }
        assert_eq!(f.values().len(), 2);
        assert!((f.zero_set_length() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn doubled_arc() {
        let f = sum_of_indicators(&[arc(0.0, PI), arc(0.0, PI)]);
        assert_eq!(f.values(), &[2, 0]);
        assert_eq!(f.breakpoints()[0].radians(), 0.0);
    }

    #[test]
    fn staggered_sum_matches_count_oracle() {
        let intervals = [arc(0.0, PI), arc(FRAC_PI_2, 3.0 * FRAC_PI_2)];
        let f = sum_of_indicators(&intervals);
        let n = 10_000;
        for k in 0..n {
            let t = Angle::new(TAU * (k as f64 + 0.5) / n as f64);
            let count = intervals.iter().filter(|i| i.contains(t)).count() as u32;
            assert_eq!(f.evaluate(t), count);
        }
        assert_eq!(f.values(), &[1, 2, 1, 0]);
        // jumps 0→1→2→1→0
        assert_eq!(f.total_variation(), 4.0);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(StepFnS1::constant(3).evaluate(Angle::new(1.234)), 3);
        let f = indicator_of_union(&[arc(0.0, PI)]);
        assert_eq!(f.evaluate(Angle::new(FRAC_PI_2)), 1);
        assert_eq!(f.evaluate(Angle::new(3.0 * FRAC_PI_2)), 0);
        // half-open at breakpoints
        assert_eq!(f.evaluate(Angle::ZERO), 1);
        assert_eq!(f.evaluate(Angle::new(PI)), 0);
    }

    #[test]
    fn sublevel_examples() {
        let f = indicator_of_union(&[arc(0.0, PI)]);
        let zs = f.sublevel_intervals(1);
        assert_eq!(zs.len(), 1);
        assert!((zs[0].start().unwrap().radians() - PI).abs() < 1e-15);
        assert!((zs[0].length() - PI).abs() < 1e-15);
        assert_eq!(
            StepFnS1::zero().sublevel_intervals(1),
            vec![AngularInterval::Full]
        );
        assert!(StepFnS1::constant(2).sublevel_intervals(1).is_empty());
    }

    #[test]
    fn sublevel_run_crossing_zero() {
        let f = sum_of_indicators(&[arc(1.0, 2.0), arc(3.0, 4.0)]);
        let zs = f.sublevel_intervals(1);
        assert_eq!(zs.len(), 2);
        // sorted by start: (2,3) then (4, 1+2π)
        assert!((zs[0].start().unwrap().radians() - 2.0).abs() < 1e-15);
        assert!((zs[1].start().unwrap().radians() - 4.0).abs() < 1e-15);
        assert!((zs[1].length() - (TAU - 3.0)).abs() < 1e-12);
        let sup = f.superlevel_intervals(1);
        let total: f64 = zs.iter().chain(&sup).map(AngularInterval::length).sum();
        assert!((total - TAU).abs() < 1e-12);
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(StepFnS1::constant(5).total_variation(), 0.0);
        assert_eq!(indicator_of_union(&[arc(0.0, PI)]).total_variation(), 2.0);
    }

    #[test]
    fn shift_examples() {
        let f = indicator_of_union(&[arc(0.0, PI)]);
        assert_eq!(f.shift(0.0), f);
        let g = f.shift(FRAC_PI_2);
        let expected = indicator_of_union(&[arc(FRAC_PI_2, 3.0 * FRAC_PI_2)]);
        assert_eq!(g.values(), expected.values());
        for (a, b) in g.breakpoints().iter().zip(expected.breakpoints()) {
            assert!((a.radians() - b.radians()).abs() < 1e-15);
        }
        let back = g.shift(TAU - FRAC_PI_2);
        assert_eq!(back.values(), f.values());
        for (a, b) in back.breakpoints().iter().zip(f.breakpoints()) {
            assert!(a.distance(*b) < 1e-12);
        }
    }

    #[test]
    fn smoothing_examples() {
        let c = StepFnS1::constant(3).sample_and_smooth(360, 9).unwrap();
        assert_eq!(c.len(), 360);
        assert!(c.iter().all(|v| *v == 3.0));
        let f = indicator_of_union(&[arc(0.0, PI)]);
        assert_eq!(f.sample_and_smooth(4, 1).unwrap(), vec![1.0, 1.0, 0.0, 0.0]);
        assert!(f.sample_and_smooth(10, 4).is_err());
        assert!(f.sample_and_smooth(3, 5).is_err());
        let samples = f.sample_and_smooth(100, 1).unwrap();
        let smooth = f.sample_and_smooth(100, 11).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean(&samples) - mean(&smooth)).abs() < 1e-12);
    }

    #[test]
    fn nearby_endpoints_fuse() {
        let f = sum_of_indicators(&[arc(1.0, 2.0), arc(1.0 + 1e-11, 2.0 - 1e-11)]);
        assert_eq!(f.values(), &[2, 0]);
        // endpoints straddling zero fuse across the wrap
        let g = sum_of_indicators(&[arc(1.0, TAU - 1e-11), arc(1e-11, 0.5)]);
        assert_eq!(g.values(), &[0, 1]);
        assert_eq!(g.evaluate(Angle::ZERO), 1);
        assert_eq!(g.evaluate(Angle::new(0.7)), 0);
        assert_eq!(g.canonicalized(), g);
    }

    #[test]
    fn singleton_and_full_minus_point() {
        let s = AngularInterval::Singleton { at: Angle::new(1.0) };
        let fmp = AngularInterval::FullMinusPoint { at: Angle::new(1.0) };
        assert_eq!(sum_of_indicators(&[s]), StepFnS1::zero());
        assert_eq!(sum_of_indicators(&[fmp]), StepFnS1::constant(1));
        assert!(!covers_circle(&[fmp]));
        assert!(covers_circle(&[fmp, s]));
        assert!(covers_circle(&[
            fmp,
            AngularInterval::FullMinusPoint { at: Angle::new(2.0) }
        ]));
    }

    #[test]
    fn centered_degenerate_cases() {
        assert!(matches!(
            AngularInterval::centered(0.3, 0.0),
            AngularInterval::Singleton { .. }
        ));
        match AngularInterval::centered(0.3, PI) {
            AngularInterval::FullMinusPoint { at } => assert!((at.radians() - (0.3 + PI)).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(AngularInterval::open(1.0, 1.0), AngularInterval::Empty);
    }

    #[test]
    fn exact_uncovered_set() {
        // two arcs meeting exactly at π leave that single point uncovered
        let touching = [arc(-0.1, PI), arc(PI, TAU)];
        let gaps = uncovered_arcs(&touching);
        assert_eq!(gaps.len(), 1);
        assert_eq!(gaps[0].length, 0.0);
        assert!((gaps[0].start.radians() - PI).abs() < 1e-15);

        let overlapping = [arc(-0.1, PI + 0.01), arc(PI, TAU - 0.05)];
        assert!(covers_circle(&overlapping));

        let gapped = [arc(0.5, 1.0), arc(2.0, 6.0)];
        let gaps = uncovered_arcs(&gapped);
        assert_eq!(gaps.len(), 2);
        assert!((gaps[0].start.radians() - 1.0).abs() < 1e-15);
        assert!((gaps[0].length - 1.0).abs() < 1e-15);
        assert!((gaps[1].start.radians() - 6.0).abs() < 1e-15);
        assert!((gaps[1].length - (TAU - 5.5)).abs() < 1e-12);

        let whole = uncovered_arcs(&[]);
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].length, TAU);
    }

    #[test]
    fn json_shape() {
        let f = indicator_of_union(&[arc(0.0, PI)]);
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json["values"], serde_json::json!([1, 0]));
        assert_eq!(json["breakpoints"].as_array().unwrap().len(), 2);
        let back: StepFnS1 = serde_json::from_value(json).unwrap();
        assert_eq!(back, f);
        let bad = serde_json::json!({"breakpoints": [1.0, 0.5], "values": [1, 0]});
        assert!(serde_json::from_value::<StepFnS1>(bad).is_err());
    }
}
