//! Exact shadow geometry: projection of a building onto the trajectory
//! through the BS, sweep-merge of shadows into an alternating LOS/NLOS
//! partition of `[0, d]`, and a brute-force point-sampling oracle.
//!
//! Coordinates: the BS sits at the origin, the trajectory is the segment
//! `x in [0, d]` at perpendicular distance `r`. A building at depth `cv`
//! casts a shadow magnified by `r / cv >= 1`.

use thiserror::Error;

use crate::model::{Building, SightLine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("building depth cv={cv} outside the open strip (0, {r})")]
    DepthOutOfStrip { cv: f64, r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum IntervalKind {
    Los,
    Nlos,
}

/// A maximal LOS or NLOS sub-segment of the trajectory. `censored` marks
/// intervals truncated by the trajectory endpoints, whose true length is
/// unobserved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub kind: IntervalKind,
    pub censored: bool,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Disjoint sorted intervals of alternating kind covering `[0, d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pub d: f64,
    pub intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.intervals.iter()
    }

    pub fn total_length(&self, kind: IntervalKind) -> f64 {
        self.intervals
            .iter()
            .filter(|i| i.kind == kind)
            .map(Interval::length)
            .sum()
    }

    /// Panics if the partition invariants are violated. Used by tests and
    /// per-trial debug assertions.
    pub fn check_invariants(&self) {
        assert!(!self.intervals.is_empty());
        assert_eq!(self.intervals[0].start, 0.0);
        assert_eq!(self.intervals.last().unwrap().end, self.d);
        for w in self.intervals.windows(2) {
            assert_eq!(w[0].end, w[1].start, "gap or overlap in partition");
            assert_ne!(w[0].kind, w[1].kind, "adjacent kinds must alternate");
        }
        for i in &self.intervals {
            assert!(i.start < i.end, "zero-length interval {i:?}");
            assert_eq!(i.censored, i.start == 0.0 || i.end == self.d);
        }
    }
}

/// Shadow of one building on the trajectory, or `None` when the building
/// sits below the BS-user sight line at its depth. The shadow is the
/// similar-triangles projection of the building endpoints from the BS,
/// `((cu - l/2) r / cv, (cu + l/2) r / cv)`, not yet clipped to `[0, d]`.
///
/// A building whose height exactly equals the sight-line height counts as
/// blocking (closed comparison).
pub fn shadow_of_building(b: &Building, sight: &SightLine) -> Result<Option<(f64, f64)>, GeometryError> {
    shadow_of_edges(
        b.cu - b.length / 2.0,
        b.cu + b.length / 2.0,
        b.cv,
        b.height,
        sight,
    )
}

/// Same projection, taking the building endpoints directly. The layout
/// evaluator calls this with file coordinates so that a scene exported to
/// a layout file reprojects bit-identically.
pub fn shadow_of_edges(
    u_lo: f64,
    u_hi: f64,
    cv: f64,
    height: f64,
    sight: &SightLine,
) -> Result<Option<(f64, f64)>, GeometryError> {
    if cv <= 0.0 || cv >= sight.r {
        return Err(GeometryError::DepthOutOfStrip { cv, r: sight.r });
    }
    if height < sight.height_at(cv) {
        return Ok(None);
    }
    let m = sight.r / cv;
    Ok(Some((u_lo * m, u_hi * m)))
}

/// Per-point blocking test: does `b` block the sight line from the BS to
/// the user at trajectory position `x`? Independent route used by the
/// brute-force oracle; must agree with membership in [`shadow_of_building`].
pub fn blocks_point(b: &Building, sight: &SightLine, x: f64) -> bool {
    b.height >= sight.height_at(b.cv) && (b.cu - x * b.cv / sight.r).abs() <= b.length / 2.0
}

/// Clips shadows to `[0, d]`, unions them by sort-and-sweep, and labels the
/// complement LOS. Two shadows merge iff they overlap or share an endpoint;
/// an endpoint touch leaves no LOS gap of positive length. Intervals
/// touching 0 or `d` are flagged censored.
pub fn merge_shadows(shadows: &[(f64, f64)], d: f64) -> IntervalSet {
    let mut clipped: Vec<(f64, f64)> = shadows
        .iter()
        .map(|&(lo, hi)| (lo.max(0.0), hi.min(d)))
        .filter(|&(lo, hi)| lo < hi)
        .collect();
    clipped.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in clipped {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }

    let mut intervals = Vec::with_capacity(2 * merged.len() + 1);
    let mut cursor = 0.0;
    for (lo, hi) in merged {
        if lo > cursor {
            intervals.push(Interval {
                start: cursor,
                end: lo,
                kind: IntervalKind::Los,
                censored: cursor == 0.0,
            });
        }
        intervals.push(Interval {
            start: lo,
            end: hi,
            kind: IntervalKind::Nlos,
            censored: lo == 0.0 || hi == d,
        });
        cursor = hi;
    }
    if cursor < d {
        intervals.push(Interval {
            start: cursor,
            end: d,
            kind: IntervalKind::Los,
            censored: true,
        });
    }
    if intervals.is_empty() {
        // d = 0 cannot happen for validated params; still return a covering set
        intervals.push(Interval {
            start: 0.0,
            end: d,
            kind: IntervalKind::Los,
            censored: true,
        });
    }
    IntervalSet { d, intervals }
}

/// Independent oracle: classifies the sample points `0, step, 2*step, ..`
/// with the per-point test and converts runs of equal classification to
/// intervals. Boundaries land on sample points, so they are within one
/// `step` of the exact ones.
pub fn brute_force_intervals(
    buildings: &[Building],
    sight: &SightLine,
    d: f64,
    step: f64,
) -> IntervalSet {
    assert!(step > 0.0);
    let n = (d / step).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(d)).collect();
    let nlos: Vec<bool> = xs
        .iter()
        .map(|&x| buildings.iter().any(|b| blocks_point(b, sight, x)))
        .collect();

    let mut shadows = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, &blocked) in nlos.iter().enumerate() {
        match (blocked, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                shadows.push((xs[s], xs[i - 1].max(xs[s] + step / 2.0).min(d)));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        shadows.push((xs[s].min(d - step / 2.0).max(0.0), d));
    }
    // a single blocked sample becomes a half-step sliver so it is not dropped
    merge_shadows(&shadows, d)
}
