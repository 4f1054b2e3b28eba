//! Scenario parameters and domain types shared by every other module.
//!
//! The scene is a fixed base station (BS) at height `h_bs`, a straight user
//! trajectory of length `d` at perpendicular distance `r` from the BS, and
//! buildings modeled as zero-thickness line segments parallel to the
//! trajectory. Building lengths and heights are uniform on `[l_min, l_max]`
//! and `[h_min, h_max]`. All quantities are SI (meters, buildings/m²).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("lambda must be finite and > 0, got {0}")]
    Lambda(f64),
    #[error("r must be finite and > 0, got {0}")]
    Radius(f64),
    #[error("d must be finite and > 0, got {0}")]
    TrajectoryLength(f64),
    #[error("building length support requires 0 < l_min <= l_max, got [{0}, {1}]")]
    LengthSupport(f64, f64),
    #[error("building height support requires 0 <= h_min <= h_max, got [{0}, {1}]")]
    HeightSupport(f64, f64),
    #[error("user height {h_user} must not exceed h_min {h_min}")]
    UserAboveBuildings { h_user: f64, h_min: f64 },
    #[error("user height {h_user} must be strictly below BS height {h_bs}")]
    UserNotBelowBs { h_user: f64, h_bs: f64 },
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
}

/// Position of the BS height relative to the building-height support.
/// Selects the branch of the piecewise closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeightRegime {
    /// `h_bs < h_min`: every building overtops the BS.
    BsBelowAll,
    /// `h_min <= h_bs <= h_max`.
    BsWithin,
    /// `h_bs > h_max`: the BS overtops every building.
    BsAboveAll,
}

/// All scalar parameters of the scenario. Immutable after [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Building density, buildings per square meter.
    pub lambda: f64,
    /// Perpendicular BS-to-trajectory distance, meters.
    pub r: f64,
    /// Trajectory length, meters.
    pub d: f64,
    /// BS height, meters.
    pub h_bs: f64,
    /// User height, meters.
    pub h_user: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub h_min: f64,
    pub h_max: f64,
}

/// The part of the scenario the shadow geometry needs: BS/user heights and
/// the BS-to-trajectory distance. Lets the layout evaluator reuse the
/// geometry without inventing dummy density parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SightLine {
    pub r: f64,
    pub h_bs: f64,
    pub h_user: f64,
}

impl SightLine {
    /// Height of the BS-user sight line at perpendicular depth `cv` from the
    /// BS. Linear in `cv` because the trajectory is parallel to the
    /// buildings, so the fraction of the ray traversed at depth `cv` is
    /// `cv / r` for every user position.
    pub fn height_at(&self, cv: f64) -> f64 {
        self.h_bs - (self.h_bs - self.h_user) * cv / self.r
    }
}

impl ScenarioParams {
    /// Checks every invariant and returns the params unchanged.
    pub fn validate(self) -> Result<Self, ValidationError> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("r", self.r),
            ("d", self.d),
            ("h_bs", self.h_bs),
            ("h_user", self.h_user),
            ("l_min", self.l_min),
            ("l_max", self.l_max),
            ("h_min", self.h_min),
            ("h_max", self.h_max),
        ] {
            if !v.is_finite() {
                return Err(ValidationError::NonFinite(name));
            }
        }
        if self.lambda <= 0.0 {
            return Err(ValidationError::Lambda(self.lambda));
        }
        if self.r <= 0.0 {
            return Err(ValidationError::Radius(self.r));
        }
        if self.d <= 0.0 {
            return Err(ValidationError::TrajectoryLength(self.d));
        }
        if !(0.0 < self.l_min && self.l_min <= self.l_max) {
            return Err(ValidationError::LengthSupport(self.l_min, self.l_max));
        }
        if !(0.0 <= self.h_min && self.h_min <= self.h_max) {
            return Err(ValidationError::HeightSupport(self.h_min, self.h_max));
        }
        if self.h_user > self.h_min {
            return Err(ValidationError::UserAboveBuildings {
                h_user: self.h_user,
                h_min: self.h_min,
            });
        }
        // The blocking areas divide by h_bs - h_user; equality is rejected.
        if self.h_user >= self.h_bs {
            return Err(ValidationError::UserNotBelowBs {
                h_user: self.h_user,
                h_bs: self.h_bs,
            });
        }
        Ok(self)
    }

    /// Mean building length E[L] = (l_min + l_max) / 2.
    pub fn mean_length(&self) -> f64 {
        0.5 * (self.l_min + self.l_max)
    }

    /// Exhaustive and mutually exclusive over all valid heights.
    pub fn regime(&self) -> HeightRegime {
        if self.h_bs < self.h_min {
            HeightRegime::BsBelowAll
        } else if self.h_bs <= self.h_max {
            HeightRegime::BsWithin
        } else {
            HeightRegime::BsAboveAll
        }
    }

    pub fn sight(&self) -> SightLine {
        SightLine {
            r: self.r,
            h_bs: self.h_bs,
            h_user: self.h_user,
        }
    }

    /// With a different BS-to-trajectory distance; used by distance sweeps.
    pub fn with_r(&self, r: f64) -> Self {
        Self { r, ..*self }
    }
}

/// One blocking element: a line segment of length `length` at height
/// `height`, centered at `cu` along the street axis, at perpendicular
/// distance `cv` from the BS baseline. Orientation is implicitly parallel to
/// the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub cu: f64,
    pub cv: f64,
    pub length: f64,
    pub height: f64,
}

impl Building {
    pub fn new(cu: f64, cv: f64, length: f64, height: f64) -> Self {
        debug_assert!(length > 0.0 && height >= 0.0);
        Self {
            cu,
            cv,
            length,
            height,
        }
    }
}

/// Baseline parameters of the reference urban scenario (Eixample-like
/// density, 25 m BS, pedestrian user).
pub fn baseline_params() -> ScenarioParams {
    ScenarioParams {
        lambda: 3.22e-4,
        r: 100.0,
        d: 1000.0,
        h_bs: 25.0,
        h_user: 1.5,
        l_min: 10.0,
        l_max: 30.0,
        h_min: 10.0,
        h_max: 30.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_validates_as_bs_within() {
        let p = baseline_params().validate().unwrap();
        assert_eq!(p.regime(), HeightRegime::BsWithin);
    }

    #[test]
    fn equal_user_and_bs_height_rejected() {
        let p = ScenarioParams {
            h_bs: 10.0,
            h_user: 10.0,
            ..baseline_params()
        };
        assert!(matches!(
            p.validate(),
            Err(ValidationError::UserNotBelowBs { .. })
        ));
    }

    #[test]
    fn inverted_length_support_rejected() {
        let p = ScenarioParams {
            l_min: 30.0,
            l_max: 10.0,
            ..baseline_params()
        };
        assert!(matches!(p.validate(), Err(ValidationError::LengthSupport(..))));
    }

    #[test]
    fn mean_length_of_uniform_support() {
        let mut p = baseline_params();
        assert_eq!(p.mean_length(), 20.0);
        p.l_min = 5.0;
        p.l_max = 5.0;
        assert_eq!(p.validate().unwrap().mean_length(), 5.0);
        p.l_min = 0.1;
        p.l_max = 0.3;
        assert!((p.mean_length() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn validate_is_idempotent() {
        let p = baseline_params();
        let once = p.validate().unwrap();
        let twice = once.validate().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn regime_classification_is_exhaustive_and_exclusive() {
        let base = baseline_params();
        for h_bs in [5.0, 9.999, 10.0, 15.0, 30.0, 30.001, 200.0] {
            let p = ScenarioParams { h_bs, ..base }.validate().unwrap();
            let r = p.regime();
            let below = h_bs < p.h_min;
            let within = p.h_min <= h_bs && h_bs <= p.h_max;
            let above = h_bs > p.h_max;
            assert_eq!(r == HeightRegime::BsBelowAll, below);
            assert_eq!(r == HeightRegime::BsWithin, within);
            assert_eq!(r == HeightRegime::BsAboveAll, above);
            assert_eq!(
                [below, within, above].iter().filter(|b| **b).count(),
                1,
                "exactly one regime at h_bs={h_bs}"
            );
        }
    }

    #[test]
    fn sight_line_endpoints() {
        let s = baseline_params().sight();
        assert_eq!(s.height_at(0.0), 25.0);
        assert!((s.height_at(100.0) - 1.5).abs() < 1e-12);
    }
}
