//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see
//! them). Tolerances are pinned here, not configurable.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockage_geom::analytic;
use blockage_geom::geometry::{brute_force_intervals, merge_shadows, shadow_of_building, IntervalKind};
use blockage_geom::layout::{evaluate_layout, layout_from_scene, scene_query};
use blockage_geom::model::{baseline_params, Building, ScenarioParams};
use blockage_geom::montecarlo::{
    density_sweep, empirical_cdf, fit_density_peak, find_length_crossing, run_trials, sample_scene,
    trial_seed, SweepRow, TrialConfig,
};

/// Baseline scenario with a trajectory long enough that 100 trials cover
/// at least 10^6 m.
fn campaign_params() -> ScenarioParams {
    ScenarioParams {
        d: 10_000.0,
        ..baseline_params()
    }
    .validate()
    .unwrap()
}

/// Random valid parameter set in the requested height regime (0: BS below
/// every building, 1: within the support, 2: above every building).
fn random_params(rng: &mut impl Rng, regime: u8) -> ScenarioParams {
    let h_user = rng.gen_range(0.0..5.0);
    let h_min = h_user + rng.gen_range(0.5..30.0);
    let h_max = h_min + rng.gen_range(0.0..40.0);
    let h_bs = match regime {
        0 => rng.gen_range(h_user + 1e-3..h_min),
        1 => rng.gen_range(h_min..=h_max),
        _ => h_max + rng.gen_range(1e-3..50.0),
    };
    ScenarioParams {
        lambda: rng.gen_range(1e-5..1e-3),
        r: rng.gen_range(10.0..500.0),
        d: 1000.0,
        h_bs,
        h_user,
        l_min: rng.gen_range(1.0..20.0),
        l_max: rng.gen_range(20.0..50.0),
        h_min,
        h_max,
    }
    .validate()
    .unwrap()
}

#[test]
fn criterion_1_eta_closed_forms_vs_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7A);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let p = random_params(&mut rng, (i % 3) as u8);
        let dx = (analytic::eta_x(&p) - analytic::eta_x_quadrature(&p, 100_000)).abs();
        let dt = (analytic::eta_tilde(&p) - analytic::eta_tilde_quadrature(&p, 100_000)).abs();
        assert!(dx <= 1e-8, "eta_x mismatch {dx} for {p:?}");
        assert!(dt <= 1e-8, "eta_tilde mismatch {dt} for {p:?}");
        worst = worst.max(dx).max(dt);
    }
    // branch continuity at h_bs = h_min and h_bs = h_max
    let mut worst_jump: f64 = 0.0;
    for _ in 0..50 {
        let p = random_params(&mut rng, 1);
        for boundary in [p.h_min, p.h_max] {
            if boundary <= p.h_user + 1e-6 {
                continue;
            }
            let lo = ScenarioParams { h_bs: boundary - 1e-9, ..p }.validate().unwrap();
            let hi = ScenarioParams { h_bs: boundary + 1e-9, ..p }.validate().unwrap();
            let jx = (analytic::eta_x(&lo) - analytic::eta_x(&hi)).abs();
            let jt = (analytic::eta_tilde(&lo) - analytic::eta_tilde(&hi)).abs();
            assert!(jx <= 1e-9, "eta_x jump {jx} at h_bs={boundary} for {p:?}");
            assert!(jt <= 1e-9, "eta_tilde jump {jt} at h_bs={boundary} for {p:?}");
            worst_jump = worst_jump.max(jx).max(jt);
        }
    }
    println!("criterion 1 PASS: eta closed vs quadrature, 200 sets, max |diff| = {worst:.2e}, max branch jump = {worst_jump:.2e}");
}

#[test]
fn criterion_2_interval_extraction_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let sight = baseline_params().sight();
    let step = 0.01;
    for scene_idx in 0..100 {
        let d = rng.gen_range(100.0..500.0);
        let n = rng.gen_range(0..=50);
        let buildings: Vec<Building> = (0..n)
            .map(|_| {
                Building::new(
                    rng.gen_range(-60.0..d + 60.0),
                    rng.gen_range(0.5..99.5),
                    rng.gen_range(2.0..40.0),
                    rng.gen_range(0.0..40.0),
                )
            })
            .collect();
        let shadows: Vec<(f64, f64)> = buildings
            .iter()
            .filter_map(|b| shadow_of_building(b, &sight).unwrap())
            .collect();
        let swept = merge_shadows(&shadows, d);
        let brute = brute_force_intervals(&buildings, &sight, d, step);
        let sweep_nlos: Vec<(f64, f64)> = swept
            .iter()
            .filter(|i| i.kind == IntervalKind::Nlos)
            .map(|i| (i.start, i.end))
            .collect();
        let brute_nlos: Vec<(f64, f64)> = brute
            .iter()
            .filter(|i| i.kind == IntervalKind::Nlos)
            .map(|i| (i.start, i.end))
            .collect();
        assert_eq!(
            sweep_nlos.len(),
            brute_nlos.len(),
            "scene {scene_idx}: NLOS interval count differs"
        );
        for (a, b) in sweep_nlos.iter().zip(&brute_nlos) {
            assert!(
                (a.0 - b.0).abs() <= step && (a.1 - b.1).abs() <= step,
                "scene {scene_idx}: boundary mismatch {a:?} vs {b:?}"
            );
        }
    }
    println!("criterion 2 PASS: sweep-merge matches brute force (step {step} m) on 100 scenes");
}

fn campaign_stats() -> &'static blockage_geom::RunStats {
    static STATS: OnceLock<blockage_geom::RunStats> = OnceLock::new();
    STATS.get_or_init(|| {
        run_trials(&TrialConfig {
            params: campaign_params(),
            n_trials: 120,
            seed: 2024,
            include_censored: false,
        })
    })
}

#[test]
fn criterion_3_point_los_probability() {
    let stats = campaign_stats();
    assert!(stats.total_trajectory_length >= 1e6);
    let freq = stats.point_los_frequency();
    assert!(
        (freq - 0.6127).abs() <= 0.01,
        "point LOS frequency {freq} not within 0.6127 +- 0.01"
    );
    println!("criterion 3 PASS: point LOS frequency {freq:.4} vs 0.6127 +- 0.01");
}

#[test]
fn criterion_4_mean_interval_lengths() {
    for r in [100.0, 200.0, 300.0] {
        let params = campaign_params().with_r(r);
        let stats = run_trials(&TrialConfig {
            params,
            n_trials: 100,
            seed: 555,
            include_censored: false,
        });
        let mean_z = stats.los_lengths.iter().sum::<f64>() / stats.los_lengths.len() as f64;
        let mean_s = stats.nlos_lengths.iter().sum::<f64>() / stats.nlos_lengths.len() as f64;
        let expect_z = analytic::mean_los_length(&params);
        let expect_s = analytic::mean_nlos_length(&params);
        assert!(
            (mean_z - expect_z).abs() / expect_z <= 0.05,
            "r={r}: mean LOS {mean_z} vs {expect_z}"
        );
        assert!(
            (mean_s - expect_s).abs() / expect_s <= 0.05,
            "r={r}: mean NLOS {mean_s} vs {expect_s}"
        );
        println!(
            "criterion 4 PASS: r={r}: mean LOS {mean_z:.2} vs {expect_z:.2}, mean NLOS {mean_s:.2} vs {expect_s:.2} (5%)"
        );
    }
}

#[test]
fn criterion_5_cdf_bound() {
    let params = campaign_params();
    let stats = campaign_stats();
    let n = stats.los_lengths.len();
    assert!(n >= 10_000, "need at least 1e4 LOS samples, got {n}");
    let hi = 6.0 * analytic::mean_los_length(&params);
    let grid: Vec<f64> = (1..=300).map(|i| i as f64 * hi / 300.0).collect();
    let mut sup_gap: f64 = 0.0;
    for (z, f_hat) in empirical_cdf(&stats.los_lengths, &grid).unwrap() {
        let bound = analytic::cdf_los_bound(&params, z);
        let slack = 3.0 * (bound * (1.0 - bound) / n as f64).sqrt();
        assert!(
            f_hat <= bound + slack,
            "empirical CDF {f_hat} above bound {bound} + {slack} at z={z}"
        );
        sup_gap = sup_gap.max((bound - f_hat).abs());
    }
    assert!(sup_gap <= 0.05, "sup gap {sup_gap} above 0.05");
    println!("criterion 5 PASS: CDF below bound everywhere ({n} samples), sup gap {sup_gap:.4} <= 0.05");
}

fn sweep_grid(scale: f64) -> Vec<f64> {
    (1..=20).map(|i| scale * (20.0 + i as f64 * 20.0)).collect()
}

fn baseline_sweep() -> &'static Vec<SweepRow> {
    static ROWS: OnceLock<Vec<SweepRow>> = OnceLock::new();
    ROWS.get_or_init(|| density_sweep(&campaign_params(), &sweep_grid(1.0), 100, 31))
}

#[test]
fn criterion_6_density_curve_peak() {
    let params = campaign_params();
    let (r_star, _) = analytic::critical_radii(&params);
    let peak_theory = analytic::max_density_value(&params);
    let (r_peak, peak) = fit_density_peak(baseline_sweep());
    assert!(
        (r_peak - r_star).abs() / r_star <= 0.10,
        "peak location {r_peak} vs {r_star}"
    );
    assert!(
        (peak - peak_theory).abs() / peak_theory <= 0.10,
        "peak value {peak} vs {peak_theory}"
    );

    // doubling the density halves the peak location, value unchanged
    let dense = ScenarioParams {
        lambda: 2.0 * params.lambda,
        ..params
    }
    .validate()
    .unwrap();
    let rows2 = density_sweep(&dense, &sweep_grid(0.5), 100, 32);
    let (r_peak2, peak2) = fit_density_peak(&rows2);
    assert!(
        (r_peak2 - r_star / 2.0).abs() / (r_star / 2.0) <= 0.10,
        "2-lambda peak location {r_peak2} vs {}",
        r_star / 2.0
    );
    assert!(
        (peak2 - peak_theory).abs() / peak_theory <= 0.10,
        "2-lambda peak value {peak2} vs {peak_theory}"
    );
    println!(
        "criterion 6 PASS: density peak at {r_peak:.1} m (theory {r_star:.1}), value {peak:.5} (theory {peak_theory:.5}); 2-lambda peak at {r_peak2:.1} m, value {peak2:.5}"
    );
}

#[test]
fn criterion_7_equal_length_crossing() {
    let params = campaign_params();
    let (_, r_eq) = analytic::critical_radii(&params);
    let value_theory = analytic::equal_length_value(&params);
    let (r_cross, length) =
        find_length_crossing(baseline_sweep()).expect("sweep must bracket the crossing");
    assert!(
        (r_cross - r_eq).abs() / r_eq <= 0.10,
        "crossing at {r_cross} vs {r_eq}"
    );
    assert!(
        (length - value_theory).abs() / value_theory <= 0.10,
        "crossing length {length} vs {value_theory}"
    );
    println!(
        "criterion 7 PASS: mean-length crossing at {r_cross:.1} m (theory {r_eq:.1}), length {length:.1} m (theory {value_theory:.1})"
    );
}

#[test]
fn criterion_8_layout_round_trip() {
    let params = baseline_params();
    let seed = 99;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 0));
    let scene = sample_scene(&params, &mut rng);

    // simulation route
    let stats = run_trials(&TrialConfig {
        params,
        n_trials: 1,
        seed,
        include_censored: false,
    });

    // layout route through a JSON file
    let layout = layout_from_scene("round-trip", &scene, params.r, params.d);
    let json = serde_json::to_string(&layout).unwrap();
    let reloaded = blockage_geom::layout::Layout::from_json(&json).unwrap();
    let eval = evaluate_layout(&reloaded, &scene_query(&params)).unwrap();

    let mut sim_los = stats.los_lengths.clone();
    let mut lay_los = eval.los_lengths.clone();
    sim_los.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lay_los.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(
        sim_los, lay_los,
        "LOS length multisets differ between simulate and layout routes"
    );
    let sim_nlos: Vec<f64> = stats.nlos_lengths.clone();
    let lay_nlos: Vec<f64> = eval
        .intervals
        .iter()
        .filter(|i| i.kind == IntervalKind::Nlos && !i.censored)
        .map(|i| i.length())
        .collect();
    assert_eq!(sim_nlos, lay_nlos);
    println!(
        "criterion 8 PASS: scene of {} buildings round-trips bit-exactly through the layout file ({} LOS intervals)",
        scene.len(),
        sim_los.len()
    );
}

#[test]
fn criterion_9_determinism_across_parallelism() {
    let config = TrialConfig {
        params: campaign_params(),
        n_trials: 40,
        seed: 7,
        include_censored: false,
    };
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let serial = pool1.install(|| run_trials(&config));
    let parallel = pool8.install(|| run_trials(&config));
    let again = run_trials(&config);
    assert_eq!(serial, parallel, "thread count changed the output");
    assert_eq!(serial, again, "re-run changed the output");
    println!("criterion 9 PASS: identical RunStats for 1 thread, 8 threads, and a re-run");
}
