mod common;

use proptest::prelude::*;
use rdmlab_core::dynamics::{PotentialSpec, Propagator};
use rdmlab_core::optics::{beam_split, screen_state, GaussianEnvelope};
use rdmlab_core::rdm::{
    run_detector_scenario, sample_hydrogen_ground_state, sample_positions, simulate_trajectory, DetectorLayout,
    Locking,
};
use rdmlab_core::stats::{binomial_standard_error, empirical_mode, ks_statistic, mean, quantile_sorted, variance};
use rdmlab_core::{Grid1D, UnitSystem, WaveFunction};
use statrs::distribution::{ContinuousCDF, Normal};

fn units() -> UnitSystem {
    UnitSystem::default()
}

fn two_packets(alpha_sq: f64) -> WaveFunction {
    let grid = Grid1D::symmetric(32.0, 4096).unwrap();
    let psi1 = WaveFunction::gaussian(grid, -8.0, 1.0, 0.0, &units()).unwrap();
    beam_split(&psi1, alpha_sq.sqrt()).unwrap().physical_state().unwrap()
}

#[test]
fn uniform_density_mean() {
    let grid = Grid1D::new(-1.0, 3.0, 1024).unwrap();
    let psi = WaveFunction::uniform(grid, 0.0, 1.0).unwrap();
    let xs = sample_positions(&psi, 1_000_000, 1).unwrap();
    assert!((mean(&xs) - 0.5).abs() < 2e-3);
    let ks = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
    assert!(ks < 0.01, "ks {ks}");
}

#[test]
fn packet_fractions_follow_weights() {
    let xs = sample_positions(&two_packets(0.64), 1_000_000, 2).unwrap();
    let left = xs.iter().filter(|&&x| x < 0.0).count() as f64 / xs.len() as f64;
    assert!((left - 0.64).abs() < 2e-3, "{left}");
    assert!((left - 0.64).abs() < 4.0 * binomial_standard_error(0.64, xs.len()));
}

#[test]
fn gaussian_samples_pass_ks() {
    let grid = Grid1D::symmetric(20.0, 4096).unwrap();
    let psi = WaveFunction::gaussian(grid, 0.7, 1.3, 2.0, &units()).unwrap();
    let xs = sample_positions(&psi, 1_000_000, 4).unwrap();
    let normal = Normal::new(0.7, 1.3).unwrap();
    let ks = ks_statistic(&xs, |x| normal.cdf(x)).unwrap();
    assert!(ks < 0.01, "ks {ks}");
}

#[test]
fn screen_samples_pass_ks() {
    let u = units();
    let env = GaussianEnvelope::new(0.0, 10.0).unwrap();
    let grid = Grid1D::symmetric(128.0, 32768).unwrap();
    let psi = screen_state(grid, 0.3f64.sqrt(), 5.0, env, &u).unwrap().psi;
    let xs = sample_positions(&psi, 1_000_000, 5).unwrap();
    let cdf = common::TabulatedCdf::new(|x| common::two_beam_density(x, 0.3, 5.0, 10.0), -128.0, 128.0, 400_000);
    let ks = ks_statistic(&xs, |x| cdf.eval(x)).unwrap();
    assert!(ks < 0.01, "ks {ks}");
}

#[test]
fn stationary_trajectory_reproduces_density() {
    let grid = Grid1D::symmetric(20.0, 2048).unwrap();
    let psi = WaveFunction::gaussian(grid, -1.0, 2.0, 0.0, &units()).unwrap();
    let traj = simulate_trajectory(&[(0.0, psi)], 1.0, 1_000_000.0, 6).unwrap();
    assert!(traj.jumps.windows(2).all(|w| w[1].t > w[0].t));
    let normal = Normal::new(-1.0, 2.0).unwrap();
    let ks = ks_statistic(&traj.positions(), |x| normal.cdf(x)).unwrap();
    assert!(ks < 0.01, "ks {ks}");
}

#[test]
fn windowed_variance_follows_spreading() {
    let u = units();
    let grid = Grid1D::symmetric(40.0, 1024).unwrap();
    let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0, &u).unwrap();
    let times: Vec<f64> = (0..8).map(|k| 0.5 * k as f64).collect();
    let states = Propagator::new(u, 1e-3).unwrap().snapshots(&psi, &PotentialSpec::free(), &times).unwrap();
    let traj = simulate_trajectory(&states, 4.0, 100_000.0, 7).unwrap();
    for &t in &times {
        let window = traj.positions_between(t, t + 0.5);
        let want = common::free_width(1.0, t).powi(2);
        let got = variance(&window);
        assert!((got / want - 1.0).abs() < 0.05, "t {t}: {got} vs {want}");
    }
}

#[test]
fn sojourn_fractions_follow_weights() {
    let psi = two_packets(0.36);
    let traj = simulate_trajectory(&[(0.0, psi)], 10.0, 20_000.0, 8).unwrap();
    let f = traj.sojourn_fractions(&[(f64::NEG_INFINITY, 0.0), (0.0, f64::INFINITY)]);
    let se = binomial_standard_error(0.36, traj.jumps.len());
    assert!((f[0] - 0.36).abs() < 3.0 * se, "{} vs 0.36 (se {se})", f[0]);
    assert!((f[1] - 0.64).abs() < 3.0 * se);
}

fn layout() -> DetectorLayout {
    DetectorLayout::standard(3.0, 1.0, 2.0).unwrap()
}

#[test]
fn locking_on_born_weights() {
    let out = run_detector_scenario(0.64, &layout(), Locking::On, 100_000, 9).unwrap();
    assert!((out.click_frequency("D2") - 0.36).abs() < 5e-3);
    assert_eq!(out.d3_after_silent_d2, 0);
    assert_eq!(out.no_click, 0);
}

#[test]
fn locking_off_product_rate() {
    let out = run_detector_scenario(0.64, &layout(), Locking::Off, 100_000, 10).unwrap();
    let rate = out.d3_after_silent_d2 as f64 / out.trials as f64;
    assert!((rate - 0.2304).abs() < 5e-3, "{rate}");
}

#[test]
fn full_transmission_only_fires_d1() {
    for mode in [Locking::On, Locking::Off] {
        let out = run_detector_scenario(1.0, &layout(), mode, 10_000, 11).unwrap();
        assert_eq!(out.clicks["D1"], 10_000);
        assert_eq!(out.clicks["D2"] + out.clicks["D3"], 0);
    }
}

#[test]
fn click_frequency_matches_landing_frequency() {
    let alpha_sq = 0.3;
    let out = run_detector_scenario(alpha_sq, &layout(), Locking::On, 200_000, 12).unwrap();
    let xs = sample_positions(&two_packets(alpha_sq), 200_000, 13).unwrap();
    let landing = xs.iter().filter(|&&x| x < 0.0).count() as f64 / xs.len() as f64;
    let se = binomial_standard_error(alpha_sq, 200_000) * 2f64.sqrt();
    assert!((out.click_frequency("D1") - landing).abs() < 4.0 * se);
}

/// Mode and mean of `r^2 exp(-2 r)` by direct numerical treatment.
fn radial_reference() -> (f64, f64) {
    let f = |r: f64| r * r * (-2.0 * r).exp();
    let (mut a, mut b) = (0.1, 5.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let norm = common::simpson(f, 0.0, 60.0, 60_000);
    let first = common::simpson(|r| r * f(r), 0.0, 60.0, 60_000);
    (0.5 * (a + b), first / norm)
}

#[test]
fn hydrogen_radii_mode_and_mean() {
    let (mode_ref, mean_ref) = radial_reference();
    assert!((mode_ref - 1.0).abs() < 1e-6);
    assert!((mean_ref - 1.5).abs() < 1e-9);
    let rs = sample_hydrogen_ground_state(1_000_000, 1.0, 14).unwrap();
    assert!((empirical_mode(&rs).unwrap() - mode_ref).abs() < 0.02);
    assert!((mean(&rs) - mean_ref).abs() < 0.01);
}

#[test]
fn hydrogen_quantiles_scale_with_radius() {
    let mut a = sample_hydrogen_ground_state(200_000, 1.0, 15).unwrap();
    let mut b = sample_hydrogen_ground_state(200_000, 2.0, 15).unwrap();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    for q in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let ratio = quantile_sorted(&b, q) / quantile_sorted(&a, q);
        assert!((ratio - 2.0).abs() < 0.04, "q {q}: {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn locking_never_lets_d3_follow_silent_d2(alpha_sq in 0.0f64..=1.0, seed in any::<u64>()) {
        let out = run_detector_scenario(alpha_sq, &layout(), Locking::On, 2_000, seed).unwrap();
        prop_assert_eq!(out.d3_after_silent_d2, 0);
        prop_assert_eq!(out.clicks.values().sum::<u64>(), out.trials);
    }

    #[test]
    fn scenario_is_reproducible(alpha_sq in 0.0f64..=1.0, seed in any::<u64>()) {
        let a = run_detector_scenario(alpha_sq, &layout(), Locking::Off, 1_000, seed).unwrap();
        let b = run_detector_scenario(alpha_sq, &layout(), Locking::Off, 1_000, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sojourn_within_four_standard_errors(weights in prop::collection::vec(0.05f64..1.0, 2..5), seed in any::<u64>()) {
        let total: f64 = weights.iter().sum();
        let grid = Grid1D::symmetric(64.0, 2048).unwrap();
        let centres: Vec<f64> = (0..weights.len()).map(|k| -48.0 + 24.0 * k as f64).collect();
        let psi = WaveFunction::from_fn(grid, |x| {
            let amp: f64 = weights.iter().zip(&centres)
                .map(|(w, c)| (w / total).sqrt() * (-(x - c).powi(2) / 4.0).exp() / (2.0 * std::f64::consts::PI).powf(0.25))
                .sum();
            num_complex::Complex64::new(amp, 0.0)
        }).unwrap();
        let n = 50_000;
        let xs = sample_positions(&psi, n, seed).unwrap();
        for (w, c) in weights.iter().zip(&centres) {
            let p = w / total;
            let f = xs.iter().filter(|&&x| (x - c).abs() < 12.0).count() as f64 / n as f64;
            prop_assert!((f - p).abs() < 4.0 * binomial_standard_error(p, n) + 1e-9, "{} vs {}", f, p);
        }
    }
}
