//! Statistics of line-of-sight (LOS) and blocked (NLOS) intervals along a
//! straight trajectory near a base station, with buildings modeled as
//! random parallel line segments scattered by a Poisson point process.
//!
//! Three cross-validating routes to the same quantities:
//! - [`analytic`]: closed forms for the LOS probability, an exponential
//!   bound/approximation of the LOS-length law, mean interval lengths,
//!   interval densities, and the critical BS distances, with quadrature
//!   oracles for the height integrals.
//! - [`montecarlo`]: seeded, reproducible PPP simulation using the exact
//!   shadow geometry in [`geometry`].
//! - [`layout`]: deterministic evaluation of real building layouts through
//!   the same geometry.
//!
//! The [`cli`] module exposes all of it as the `blockage-geom` binary.

pub mod analytic;
pub mod cli;
pub mod geometry;
pub mod layout;
pub mod model;
pub mod montecarlo;

pub use analytic::{AnalyticSummary, EtaPair};
pub use geometry::{Interval, IntervalKind, IntervalSet};
pub use model::{Building, HeightRegime, ScenarioParams, SightLine};
pub use montecarlo::{RunStats, TrialConfig};
