//! Deterministic evaluation of real building layouts: ingest footprints
//! (axis-aligned rectangles or pre-converted lines), project them through
//! the shadow geometry for a given BS position and trajectory, and report
//! interval statistics.
//!
//! The layout file is JSON, coordinates in meters, already planar (no
//! geographic projections):
//! `{ "name": str, "units": "m", "buildings": [{"u_lo","u_hi","v_lo","v_hi","h"}...],
//!    "lines": [{"u_lo","u_hi","v","h"}...] }`.
//! Only edges parallel to the trajectory act as blockers, matching the
//! parallel-lines scenario model; perpendicular sides are ignored, a
//! documented model limitation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{merge_shadows, shadow_of_edges, IntervalKind, IntervalSet};
use crate::model::SightLine;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("layout schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("layout units must be \"m\", got \"{0}\"")]
    Units(String),
    #[error("building {index}: {reason}")]
    BadBuilding { index: usize, reason: String },
    #[error("line {index}: {reason}")]
    BadLine { index: usize, reason: String },
    #[error("layout has no buildings or lines")]
    Empty,
    #[error("query: {0}")]
    Query(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned building footprint with a roof height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u_lo: f64,
    pub u_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub h: f64,
}

/// A blocking line parallel to the u axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSeg {
    pub u_lo: f64,
    pub u_hi: f64,
    pub v: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub name: String,
    pub units: String,
    #[serde(default)]
    pub buildings: Vec<Rect>,
    #[serde(default)]
    pub lines: Vec<LineSeg>,
}

/// Bounding box over all footprints and lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub u_lo: f64,
    pub u_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        (self.u_hi - self.u_lo) * (self.v_hi - self.v_lo)
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        self.u_lo <= u && u <= self.u_hi && self.v_lo <= v && v <= self.v_hi
    }
}

impl Layout {
    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        let layout: Layout = serde_json::from_str(text)?;
        layout.validate()
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, LayoutError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(self) -> Result<Self, LayoutError> {
        if self.units != "m" {
            return Err(LayoutError::Units(self.units));
        }
        if self.buildings.is_empty() && self.lines.is_empty() {
            return Err(LayoutError::Empty);
        }
        for (index, b) in self.buildings.iter().enumerate() {
            let vals = [b.u_lo, b.u_hi, b.v_lo, b.v_hi, b.h];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(LayoutError::BadBuilding {
                    index,
                    reason: "non-finite coordinate".into(),
                });
            }
            if b.u_lo >= b.u_hi {
                return Err(LayoutError::BadBuilding {
                    index,
                    reason: format!("u_lo {} must be < u_hi {}", b.u_lo, b.u_hi),
                });
            }
            if b.v_lo > b.v_hi {
                return Err(LayoutError::BadBuilding {
                    index,
                    reason: format!("v_lo {} must be <= v_hi {}", b.v_lo, b.v_hi),
                });
            }
            if b.h < 0.0 {
                return Err(LayoutError::BadBuilding {
                    index,
                    reason: format!("negative height {}", b.h),
                });
            }
        }
        for (index, l) in self.lines.iter().enumerate() {
            if [l.u_lo, l.u_hi, l.v, l.h].iter().any(|v| !v.is_finite()) {
                return Err(LayoutError::BadLine {
                    index,
                    reason: "non-finite coordinate".into(),
                });
            }
            if l.u_lo >= l.u_hi {
                return Err(LayoutError::BadLine {
                    index,
                    reason: format!("u_lo {} must be < u_hi {}", l.u_lo, l.u_hi),
                });
            }
            if l.h < 0.0 {
                return Err(LayoutError::BadLine {
                    index,
                    reason: format!("negative height {}", l.h),
                });
            }
        }
        Ok(self)
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let mut bb = BoundingBox {
            u_lo: f64::INFINITY,
            u_hi: f64::NEG_INFINITY,
            v_lo: f64::INFINITY,
            v_hi: f64::NEG_INFINITY,
        };
        for b in &self.buildings {
            bb.u_lo = bb.u_lo.min(b.u_lo);
            bb.u_hi = bb.u_hi.max(b.u_hi);
            bb.v_lo = bb.v_lo.min(b.v_lo);
            bb.v_hi = bb.v_hi.max(b.v_hi);
        }
        for l in &self.lines {
            bb.u_lo = bb.u_lo.min(l.u_lo);
            bb.u_hi = bb.u_hi.max(l.u_hi);
            bb.v_lo = bb.v_lo.min(l.v);
            bb.v_hi = bb.v_hi.max(l.v);
        }
        bb
    }
}

/// BS placement and trajectory for one deterministic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutQuery {
    pub bs_u: f64,
    pub bs_v: f64,
    pub bs_h: f64,
    /// Perpendicular BS-to-trajectory distance; the trajectory is the
    /// segment `u in [u_lo, u_hi]` at `v = bs_v + r`.
    pub r: f64,
    pub u_lo: f64,
    pub u_hi: f64,
    pub user_h: f64,
    /// Building subsampling probability in (0, 1].
    #[serde(default = "default_thinning")]
    pub thinning: f64,
    #[serde(default)]
    pub thinning_seed: u64,
}

fn default_thinning() -> f64 {
    1.0
}

impl LayoutQuery {
    fn validate(&self) -> Result<(), LayoutError> {
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(LayoutError::Query(format!("r must be > 0, got {}", self.r)));
        }
        if self.u_lo >= self.u_hi {
            return Err(LayoutError::Query(format!(
                "degenerate trajectory u range [{}, {}]",
                self.u_lo, self.u_hi
            )));
        }
        // NaN in either height must be rejected too, hence the negation
        if self.user_h.partial_cmp(&self.bs_h) != Some(std::cmp::Ordering::Less) {
            return Err(LayoutError::Query(format!(
                "user height {} must be strictly below BS height {}",
                self.user_h, self.bs_h
            )));
        }
        if !(self.thinning > 0.0 && self.thinning <= 1.0) {
            return Err(LayoutError::Query(format!(
                "thinning factor must be in (0, 1], got {}",
                self.thinning
            )));
        }
        Ok(())
    }
}

/// The two rectangle sides parallel to the trajectory, with the
/// rectangle's height. A degenerate rectangle (v_lo == v_hi) yields one
/// line.
pub fn rect_to_lines(rect: &Rect) -> Vec<LineSeg> {
    let near = LineSeg {
        u_lo: rect.u_lo,
        u_hi: rect.u_hi,
        v: rect.v_lo,
        h: rect.h,
    };
    if rect.v_lo == rect.v_hi {
        vec![near]
    } else {
        vec![
            near,
            LineSeg {
                v: rect.v_hi,
                ..near
            },
        ]
    }
}

/// Effective blocking-lines-per-building factor as a function of the BS
/// distance: close trajectories see both parallel sides of a building as
/// separate shadows, far trajectories see them merged into one.
/// Piecewise-linear through (50, 2.0), (150, 1.3), (300, 1.0), clamped.
pub fn effective_line_factor(r: f64) -> f64 {
    assert!(r > 0.0);
    const ANCHORS: [(f64, f64); 3] = [(50.0, 2.0), (150.0, 1.3), (300.0, 1.0)];
    if r <= ANCHORS[0].0 {
        return ANCHORS[0].1;
    }
    if r >= ANCHORS[2].0 {
        return ANCHORS[2].1;
    }
    for w in ANCHORS.windows(2) {
        let ((r0, f0), (r1, f1)) = (w[0], w[1]);
        if r <= r1 {
            return f0 + (f1 - f0) * (r - r0) / (r1 - r0);
        }
    }
    unreachable!()
}

/// Footprint count divided by bounding-box area. Layouts given as bare
/// lines count each line as one element.
pub fn estimate_density(layout: &Layout) -> f64 {
    let count = if layout.buildings.is_empty() {
        layout.lines.len()
    } else {
        layout.buildings.len()
    };
    count as f64 / layout.bounding_box().area()
}

/// Exports a simulated scene as a line layout. The BS sits at the origin
/// and the trajectory spans `u in [0, d]` at `v = r`, so evaluating the
/// result with the matching query reproduces the simulated intervals
/// bit-exactly. Two zero-height marker lines outside the blocking strip
/// stretch the bounding box over the BS and the trajectory.
pub fn layout_from_scene(
    name: &str,
    scene: &[crate::model::Building],
    r: f64,
    d: f64,
) -> Layout {
    let mut lines: Vec<LineSeg> = scene
        .iter()
        .map(|b| LineSeg {
            u_lo: b.cu - b.length / 2.0,
            u_hi: b.cu + b.length / 2.0,
            v: b.cv,
            h: b.height,
        })
        .collect();
    let u_lo = lines.iter().map(|l| l.u_lo).fold(0.0, f64::min) - 1.0;
    let u_hi = lines.iter().map(|l| l.u_hi).fold(d, f64::max) + 1.0;
    lines.push(LineSeg { u_lo, u_hi, v: -1.0, h: 0.0 });
    lines.push(LineSeg { u_lo, u_hi, v: r + 1.0, h: 0.0 });
    Layout {
        name: name.to_string(),
        units: "m".into(),
        buildings: vec![],
        lines,
    }
}

/// The query matching [`layout_from_scene`]'s coordinate convention.
pub fn scene_query(params: &crate::model::ScenarioParams) -> LayoutQuery {
    LayoutQuery {
        bs_u: 0.0,
        bs_v: 0.0,
        bs_h: params.h_bs,
        r: params.r,
        u_lo: 0.0,
        u_hi: params.d,
        user_h: params.h_user,
        thinning: 1.0,
        thinning_seed: 0,
    }
}

/// Summary statistics of one layout evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutEvaluation {
    pub intervals: IntervalSet,
    pub los_lengths: Vec<f64>,
    pub point_los_frequency: f64,
    /// Lines considered after thinning and the `0 < cv < r` strip filter.
    pub lines_used: usize,
}

/// Projects every blocking line of the layout through the BS onto the
/// trajectory and merges the shadows. Lines outside the open strip between
/// the BS baseline and the trajectory are skipped; rectangle footprints
/// contribute both parallel sides. Fully deterministic.
pub fn evaluate_layout(layout: &Layout, query: &LayoutQuery) -> Result<LayoutEvaluation, LayoutError> {
    query.validate()?;
    let bb = layout.bounding_box();
    let v_traj = query.bs_v + query.r;
    if !bb.contains(query.bs_u, query.bs_v) {
        return Err(LayoutError::Query(format!(
            "BS ({}, {}) outside layout bounding box",
            query.bs_u, query.bs_v
        )));
    }
    if !(bb.contains(query.u_lo, v_traj) && bb.contains(query.u_hi, v_traj)) {
        return Err(LayoutError::Query(
            "trajectory outside layout bounding box".into(),
        ));
    }

    let mut lines: Vec<LineSeg> = layout.lines.clone();
    let mut buildings: Vec<&Rect> = layout.buildings.iter().collect();
    if query.thinning < 1.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(query.thinning_seed);
        buildings.retain(|_| rng.gen::<f64>() < query.thinning);
        if layout.buildings.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(query.thinning_seed);
            lines.retain(|_| rng.gen::<f64>() < query.thinning);
        }
    }
    for rect in buildings {
        lines.extend(rect_to_lines(rect));
    }

    let sight = SightLine {
        r: query.r,
        h_bs: query.bs_h,
        h_user: query.user_h,
    };
    let d = query.u_hi - query.u_lo;
    let mut shadows = Vec::new();
    let mut lines_used = 0;
    for line in &lines {
        let cv = line.v - query.bs_v;
        if cv <= 0.0 || cv >= query.r {
            continue;
        }
        lines_used += 1;
        let shadow = shadow_of_edges(
            line.u_lo - query.bs_u,
            line.u_hi - query.bs_u,
            cv,
            line.h,
            &sight,
        )
        .expect("cv filtered to (0, r)");
        if let Some((lo, hi)) = shadow {
            // shadow in BS-centered coords; shift into trajectory coords
            shadows.push((lo + (query.bs_u - query.u_lo), hi + (query.bs_u - query.u_lo)));
        }
    }

    let intervals = merge_shadows(&shadows, d);
    let los_lengths: Vec<f64> = intervals
        .iter()
        .filter(|i| i.kind == IntervalKind::Los && !i.censored)
        .map(|i| i.length())
        .collect();
    let point_los_frequency = intervals.total_length(IntervalKind::Los) / d;
    Ok(LayoutEvaluation {
        intervals,
        los_lengths,
        point_los_frequency,
        lines_used,
    })
}
