//! Monte Carlo reproduction of the interval statistics: PPP scene
//! generation, trial execution, and aggregation.
//!
//! Determinism contract: every trial draws from its own RNG stream seeded
//! by `splitmix64(master_seed ^ (trial_index + 1) * 0x9E3779B97F4A7C15)`
//! (see [`trial_seed`]); this scheme is part of the output format and must
//! stay stable across releases. Trials are therefore independent of
//! execution order and thread count, and Poisson sampling avoids library
//! samplers whose draw sequences could change between environments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{merge_shadows, shadow_of_building, IntervalKind, IntervalSet};
use crate::model::{Building, ScenarioParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empirical CDF of an empty sample")]
    EmptySample,
}

/// One simulation campaign: parameters, trial count, master seed, and the
/// censoring policy for length statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub params: ScenarioParams,
    pub n_trials: u64,
    pub seed: u64,
    /// When false (default), intervals truncated by the trajectory
    /// endpoints are excluded from the length multisets; their truncation
    /// biases the length law.
    pub include_censored: bool,
}

/// Aggregated simulation output. Merging is associative and order-fixed by
/// trial index, so parallel and serial runs aggregate identically.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunStats {
    pub los_lengths: Vec<f64>,
    pub nlos_lengths: Vec<f64>,
    pub n_los_uncensored: u64,
    pub n_nlos_uncensored: u64,
    pub n_los_total: u64,
    pub n_nlos_total: u64,
    /// Sum of LOS lengths including censored ones, for the point-LOS rate.
    pub los_length_all: f64,
    pub total_trajectory_length: f64,
}

impl RunStats {
    pub fn point_los_frequency(&self) -> f64 {
        self.los_length_all / self.total_trajectory_length
    }

    pub fn n_los_censored(&self) -> u64 {
        self.n_los_total - self.n_los_uncensored
    }

    pub fn n_nlos_censored(&self) -> u64 {
        self.n_nlos_total - self.n_nlos_uncensored
    }

    pub fn merge(&mut self, other: &RunStats) {
        self.los_lengths.extend_from_slice(&other.los_lengths);
        self.nlos_lengths.extend_from_slice(&other.nlos_lengths);
        self.n_los_uncensored += other.n_los_uncensored;
        self.n_nlos_uncensored += other.n_nlos_uncensored;
        self.n_los_total += other.n_los_total;
        self.n_nlos_total += other.n_nlos_total;
        self.los_length_all += other.los_length_all;
        self.total_trajectory_length += other.total_trajectory_length;
    }

    fn accumulate(&mut self, set: &IntervalSet, include_censored: bool) {
        for iv in set.iter() {
            match iv.kind {
                IntervalKind::Los => {
                    self.n_los_total += 1;
                    self.los_length_all += iv.length();
                    if !iv.censored {
                        self.n_los_uncensored += 1;
                    }
                    if include_censored || !iv.censored {
                        self.los_lengths.push(iv.length());
                    }
                }
                IntervalKind::Nlos => {
                    self.n_nlos_total += 1;
                    if !iv.censored {
                        self.n_nlos_uncensored += 1;
                    }
                    if include_censored || !iv.censored {
                        self.nlos_lengths.push(iv.length());
                    }
                }
            }
        }
        self.total_trajectory_length += set.d;
    }
}

/// Finalizer of splitmix64; bijective 64-bit mix.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stream seed for one trial. Documented scheme, stable across releases.
pub fn trial_seed(master: u64, trial_index: u64) -> u64 {
    splitmix64(master ^ (trial_index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15))
}

/// Poisson sample via sequential inversion; only valid for small means.
fn poisson_inversion<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    let limit = (-mean).exp();
    let mut prod = rng.gen::<f64>();
    let mut k = 0u64;
    while prod > limit {
        prod *= rng.gen::<f64>();
        k += 1;
    }
    k
}

/// ln(k!) by table below 32 and Stirling's series above.
fn ln_factorial(k: u64) -> f64 {
    if k < 32 {
        let mut acc = 0.0;
        for i in 2..=k {
            acc += (i as f64).ln();
        }
        return acc;
    }
    let x = (k + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Poisson sample via the PTRS transformed-rejection method (Hoermann,
/// 1993), used for means where inversion is too slow. Deterministic given
/// the RNG stream.
fn poisson_ptrs<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mean = mean.ln();
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v = rng.gen::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= k * ln_mean - mean - ln_factorial(k as u64)
        {
            return k as u64;
        }
    }
}

/// Poisson sample: inversion below mean 30, PTRS rejection above.
pub fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite());
    if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

/// Uniform in the open-below interval `(lo, hi]` mapped from `[0, 1)`.
fn open_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (1.0 - rng.gen::<f64>()) * (hi - lo)
}

/// Draws one PPP scene over the rectangle
/// `cu in [-l_max/2, d + l_max/2] x cv in (0, r)`. Buildings centered
/// outside this rectangle cannot shadow any point of `[0, d]`, so the
/// region is free of edge effects without over-padding.
pub fn sample_scene<R: Rng>(params: &ScenarioParams, rng: &mut R) -> Vec<Building> {
    let area = (params.d + params.l_max) * params.r;
    let n = poisson(rng, params.lambda * area);
    (0..n)
        .map(|_| {
            let cu = -params.l_max / 2.0 + rng.gen::<f64>() * (params.d + params.l_max);
            let cv = open_uniform(rng, 0.0, params.r) * (1.0 - f64::EPSILON);
            let length = params.l_min + rng.gen::<f64>() * (params.l_max - params.l_min);
            let height = params.h_min + rng.gen::<f64>() * (params.h_max - params.h_min);
            Building::new(cu, cv.max(f64::MIN_POSITIVE), length, height)
        })
        .collect()
}

/// Interval partition of one trial's trajectory.
pub fn run_single_trial(params: &ScenarioParams, trial_rng: &mut impl Rng) -> IntervalSet {
    let sight = params.sight();
    let scene = sample_scene(params, trial_rng);
    let shadows: Vec<(f64, f64)> = scene
        .iter()
        .filter_map(|b| shadow_of_building(b, &sight).expect("sampled cv inside (0, r)"))
        .collect();
    let set = merge_shadows(&shadows, params.d);
    debug_assert!({
        set.check_invariants();
        true
    });
    set
}

/// Runs all trials (in parallel, reduced in trial order) and aggregates.
/// Bit-identical output for any thread count.
pub fn run_trials(config: &TrialConfig) -> RunStats {
    let per_trial: Vec<RunStats> = (0..config.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, i));
            let set = run_single_trial(&config.params, &mut rng);
            let mut s = RunStats::default();
            s.accumulate(&set, config.include_censored);
            s
        })
        .collect();
    let mut total = RunStats::default();
    for s in &per_trial {
        total.merge(s);
    }
    total
}

/// Right-continuous empirical CDF evaluated on a grid:
/// `F(x) = #{samples <= x} / n`.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<Vec<(f64, f64)>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&x| {
            let count = sorted.partition_point(|&s| s <= x);
            (x, count as f64 / n)
        })
        .collect())
}

/// One row of a BS-distance sweep. Densities count censored intervals as
/// half an interval each to reduce edge bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub los_density: f64,
    pub nlos_density: f64,
    pub mean_z: f64,
    pub mean_s: f64,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Re-runs the campaign at each BS distance. Each distance gets its own
/// derived seed so rows are independent.
pub fn density_sweep(
    params: &ScenarioParams,
    r_values: &[f64],
    n_trials: u64,
    seed: u64,
) -> Vec<SweepRow> {
    r_values
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let config = TrialConfig {
                params: params.with_r(r),
                n_trials,
                seed: splitmix64(seed ^ (i as u64).wrapping_mul(0xD1B54A32D192ED03)),
                include_censored: false,
            };
            let stats = run_trials(&config);
            let len = stats.total_trajectory_length;
            SweepRow {
                r,
                los_density: (stats.n_los_uncensored as f64
                    + 0.5 * stats.n_los_censored() as f64)
                    / len,
                nlos_density: (stats.n_nlos_uncensored as f64
                    + 0.5 * stats.n_nlos_censored() as f64)
                    / len,
                mean_z: mean(&stats.los_lengths),
                mean_s: mean(&stats.nlos_lengths),
            }
        })
        .collect()
}

/// Fits `density(r) = C * r * exp(-b r)` to a sweep by least squares on
/// `ln(density) - ln(r)`, which is linear in `r`, and returns the peak
/// location `1/b` and peak value `C/(b e)`. The density curve is extremely
/// flat near its peak, so a raw argmax over the grid is noise-dominated;
/// the two-parameter fit uses every row instead.
pub fn fit_density_peak(rows: &[SweepRow]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.los_density > 0.0)
        .map(|row| (row.r, row.los_density.ln() - row.r.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let b = -slope;
    let c = intercept.exp();
    (1.0 / b, c / (b * std::f64::consts::E))
}

/// Linear interpolation of the distance where the mean NLOS length
/// overtakes the mean LOS length, with the common length at the crossing.
/// `None` when the sweep does not bracket a crossing.
pub fn find_length_crossing(rows: &[SweepRow]) -> Option<(f64, f64)> {
    for w in rows.windows(2) {
        let d0 = w[0].mean_s - w[0].mean_z;
        let d1 = w[1].mean_s - w[1].mean_z;
        if d0 <= 0.0 && d1 > 0.0 {
            let t = -d0 / (d1 - d0);
            let r = w[0].r + t * (w[1].r - w[0].r);
            let z = w[0].mean_z + t * (w[1].mean_z - w[0].mean_z);
            return Some((r, z));
        }
    }
    None
}
