//! Closed-form interval statistics: height-correction factors, blocking
//! areas, LOS probabilities, the exponential bound/approximation of the
//! LOS-length law, expected lengths, interval densities, and the two
//! critical BS distances. Quadrature versions of the height integrals act
//! as independent oracles for the closed forms.
//!
//! Conventions: the number of blockers covering a point is Poisson with
//! mean `lambda * eta_x * E[L] * r`; the number covering a segment of
//! length `z` (conditioned on one LOS point) adds `lambda * eta_tilde *
//! (r/2) * z`. Both correction factors equal 1 when every building
//! overtops the BS and shrink as the BS rises above the rooftops.

use serde::Serialize;

use crate::model::{HeightRegime, ScenarioParams};

/// The pair of height-correction factors with the regime that selected
/// their branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaPair {
    pub eta_x: f64,
    pub eta_tilde: f64,
    pub regime: HeightRegime,
}

impl EtaPair {
    pub fn from_params(p: &ScenarioParams) -> Self {
        Self {
            eta_x: eta_x(p),
            eta_tilde: eta_tilde(p),
            regime: p.regime(),
        }
    }
}

/// Point-blocking height-correction factor.
///
/// Average over the building-height law of the fraction
/// `clamp((h - h_user) / (h_bs - h_user), 0, 1)`, evaluated in closed form
/// for uniform heights.
pub fn eta_x(p: &ScenarioParams) -> f64 {
    let (hb, hu, h0, h1) = (p.h_bs, p.h_user, p.h_min, p.h_max);
    match p.regime() {
        HeightRegime::BsBelowAll => 1.0,
        HeightRegime::BsWithin => {
            if h0 == h1 {
                // point-mass heights at h0 = h_bs
                return (h0 - hu) / (hb - hu);
            }
            (2.0 * hb * h1 - hb * hb - h0 * h0 - 2.0 * hu * (h1 - h0))
                / (2.0 * (hb - hu) * (h1 - h0))
        }
        HeightRegime::BsAboveAll => (h1 + h0 - 2.0 * hu) / (2.0 * (hb - hu)),
    }
}

/// Segment-blocking height-correction factor.
///
/// Average over the height law of `clamp(1 - ((h_bs - h)/(h_bs - h_user))^2, 0, 1)`.
pub fn eta_tilde(p: &ScenarioParams) -> f64 {
    let (hb, hu, h0, h1) = (p.h_bs, p.h_user, p.h_min, p.h_max);
    let denom2 = (hb - hu) * (hb - hu);
    match p.regime() {
        HeightRegime::BsBelowAll => 1.0,
        HeightRegime::BsWithin => {
            if h0 == h1 {
                let t = (hb - h0) / (hb - hu);
                return 1.0 - t * t;
            }
            let span = h1 - h0;
            (h1 - hb) / span
                + (hu * hu - 2.0 * hb * hu) * (hb - h0) / (span * denom2)
                + (2.0 / 3.0 * hb.powi(3) - hb * h0 * h0 + h0.powi(3) / 3.0) / (span * denom2)
        }
        HeightRegime::BsAboveAll => {
            (hu * hu - 2.0 * hb * hu) / denom2
                - (h1 * h1 + h1 * h0 + h0 * h0) / (3.0 * denom2)
                + hb * (h1 + h0) / denom2
        }
    }
}

/// Integrand of the point-blocking height average.
fn eta_x_integrand(p: &ScenarioParams, h: f64) -> f64 {
    ((h - p.h_user) / (p.h_bs - p.h_user)).clamp(0.0, 1.0)
}

/// Integrand of the segment-blocking height average.
fn eta_tilde_integrand(p: &ScenarioParams, h: f64) -> f64 {
    if h >= p.h_bs {
        return 1.0;
    }
    let t = (p.h_bs - h) / (p.h_bs - p.h_user);
    (1.0 - t * t).max(0.0)
}

/// Composite Simpson average of `f(h)` over the uniform height law,
/// splitting the range at the integrand kinks `h = h_user` and `h = h_bs`.
/// A point-mass height law evaluates the integrand directly.
fn height_average<F: Fn(&ScenarioParams, f64) -> f64>(
    p: &ScenarioParams,
    n_points: usize,
    f: F,
) -> f64 {
    assert!(n_points >= 64, "quadrature needs at least 64 points");
    let (a, b) = (p.h_min, p.h_max);
    if a == b {
        return f(p, a);
    }
    let mut cuts = vec![a];
    for kink in [p.h_user, p.h_bs] {
        if kink > a && kink < b {
            cuts.push(kink);
        }
    }
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // points proportional to the sub-range, at least 32 panels, even
        let n = (((n_points as f64) * (hi - lo) / (b - a)).ceil() as usize).max(32);
        let n = n + n % 2;
        let h = (hi - lo) / n as f64;
        let mut s = f(p, lo) + f(p, hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            s += f(p, x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    total / (b - a)
}

/// Quadrature oracle for [`eta_x`].
pub fn eta_x_quadrature(p: &ScenarioParams, n_points: usize) -> f64 {
    height_average(p, n_points, eta_x_integrand)
}

/// Quadrature oracle for [`eta_tilde`].
pub fn eta_tilde_quadrature(p: &ScenarioParams, n_points: usize) -> f64 {
    height_average(p, n_points, eta_tilde_integrand)
}

/// Area of the parallelogram of building centers of a `(l, h)` building
/// that blocks one trajectory point.
pub fn blocking_area_point(p: &ScenarioParams, l: f64, h: f64) -> f64 {
    debug_assert!(l > 0.0);
    if h < p.h_user {
        0.0
    } else if h <= p.h_bs {
        p.r * l * (h - p.h_user) / (p.h_bs - p.h_user)
    } else {
        p.r * l
    }
}

/// Area of the union of the per-point blocking regions over a segment of
/// length `z`. Reduces to [`blocking_area_point`] at `z = 0`.
pub fn blocking_area_segment(p: &ScenarioParams, l: f64, h: f64, z: f64) -> f64 {
    debug_assert!(l > 0.0 && z >= 0.0);
    if h < p.h_user {
        0.0
    } else if h <= p.h_bs {
        let frac = (h - p.h_user) / (p.h_bs - p.h_user);
        let t = (p.h_bs - h) / (p.h_bs - p.h_user);
        p.r / 2.0 * (z * (1.0 - t * t) + 2.0 * frac * l)
    } else {
        p.r / 2.0 * (z + 2.0 * l)
    }
}

/// Probability that a single trajectory point is in LOS:
/// `exp(-lambda * eta_x * E[L] * r)`.
pub fn p_los_point(p: &ScenarioParams) -> f64 {
    (-p.lambda * eta_x(p) * p.mean_length() * p.r).exp()
}

/// Probability that an entire segment of length `z` is in LOS:
/// `exp(-lambda * (r/2) * (eta_tilde * z + 2 * eta_x * E[L]))`.
pub fn p_segment_los(p: &ScenarioParams, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    (-p.lambda * p.r / 2.0 * (eta_tilde(p) * z + 2.0 * eta_x(p) * p.mean_length())).exp()
}

/// Rate of the exponential LOS-length bound, `lambda * eta_tilde * r / 2`.
fn los_rate(p: &ScenarioParams) -> f64 {
    p.lambda * eta_tilde(p) * p.r / 2.0
}

/// Upper bound on the CDF of the LOS-interval length:
/// `1 - exp(-lambda * eta_tilde * (r/2) * z)`.
pub fn cdf_los_bound(p: &ScenarioParams, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    1.0 - (-los_rate(p) * z).exp()
}

/// Exponential approximation of the LOS-length PDF, the derivative of
/// [`cdf_los_bound`] under the assumption that the bound is tight.
pub fn pdf_los_approx(p: &ScenarioParams, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    let rate = los_rate(p);
    rate * (-rate * z).exp()
}

/// Approximate mean LOS-interval length, `2 / (lambda * eta_tilde * r)`.
pub fn mean_los_length(p: &ScenarioParams) -> f64 {
    1.0 / los_rate(p)
}

/// Approximate mean NLOS-interval length,
/// `2 * (exp(lambda * eta_x * E[L] * r) - 1) / (lambda * eta_tilde * r)`.
pub fn mean_nlos_length(p: &ScenarioParams) -> f64 {
    // exp_m1 keeps the small-r limit 2 (eta_x / eta_tilde) E[L] accurate
    (p.lambda * eta_x(p) * p.mean_length() * p.r).exp_m1() / los_rate(p)
}

/// Expected number of LOS (equivalently NLOS) intervals per meter of
/// trajectory: `lambda * eta_tilde * r * exp(-lambda * eta_x * E[L] * r) / 2`.
pub fn interval_density(p: &ScenarioParams) -> f64 {
    los_rate(p) * p_los_point(p)
}

/// The two critical BS distances: where the interval density peaks,
/// `1 / (lambda * eta_x * E[L])`, and where the mean LOS and NLOS lengths
/// are equal, `ln 2 / (lambda * eta_x * E[L])`.
pub fn critical_radii(p: &ScenarioParams) -> (f64, f64) {
    let scale = 1.0 / (p.lambda * eta_x(p) * p.mean_length());
    (scale, std::f64::consts::LN_2 * scale)
}

/// The value of [`interval_density`] at its peak over `r`:
/// `eta_tilde / eta_x / (2 * E[L] * e)`. Independent of `lambda`.
pub fn max_density_value(p: &ScenarioParams) -> f64 {
    eta_tilde(p) / eta_x(p) / (2.0 * p.mean_length() * std::f64::consts::E)
}

/// The common mean interval length at the equal-length distance:
/// `(eta_x / eta_tilde) * E[L] * 2 / ln 2`. Independent of `lambda`.
pub fn equal_length_value(p: &ScenarioParams) -> f64 {
    eta_x(p) / eta_tilde(p) * p.mean_length() * 2.0 / std::f64::consts::LN_2
}

/// All the closed-form quantities for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticSummary {
    pub eta_x: f64,
    pub eta_tilde: f64,
    pub p_los: f64,
    pub p_nlos: f64,
    #[serde(rename = "mean_Z")]
    pub mean_z: f64,
    #[serde(rename = "mean_S")]
    pub mean_s: f64,
    pub density: f64,
    pub r_max_density: f64,
    pub r_equal: f64,
    pub max_density_value: f64,
    pub equal_length_value: f64,
}

pub fn summarize(p: &ScenarioParams) -> AnalyticSummary {
    let p_los = p_los_point(p);
    let (r_max_density, r_equal) = critical_radii(p);
    AnalyticSummary {
        eta_x: eta_x(p),
        eta_tilde: eta_tilde(p),
        p_los,
        p_nlos: 1.0 - p_los,
        mean_z: mean_los_length(p),
        mean_s: mean_nlos_length(p),
        density: interval_density(p),
        r_max_density,
        r_equal,
        max_density_value: max_density_value(p),
        equal_length_value: equal_length_value(p),
    }
}
