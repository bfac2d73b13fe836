mod common;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rdmlab_core::optics::{intensity_analytic, screen_state, GaussianEnvelope};
use rdmlab_core::{Grid1D, UnitSystem, WaveFunction};

use common::simpson;

fn units() -> UnitSystem {
    UnitSystem::default()
}

fn gauss(x: f64, x0: f64, s: f64) -> f64 {
    (-(x - x0).powi(2) / (4.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s).powf(0.25)
}

#[test]
fn weighted_packets_mean_position() {
    let grid = Grid1D::symmetric(40.0, 2048).unwrap();
    let (wa, wb) = (0.7f64, 0.3f64);
    let psi = WaveFunction::from_fn(grid, |x| {
        Complex64::new(wa.sqrt() * gauss(x, 5.0, 1.0) + wb.sqrt() * gauss(x, -5.0, 1.0), 0.0)
    })
    .unwrap();
    let density = |x: f64| (wa.sqrt() * gauss(x, 5.0, 1.0) + wb.sqrt() * gauss(x, -5.0, 1.0)).powi(2);
    let oracle = simpson(|x| x * density(x), -40.0, 40.0, 20_000) / simpson(density, -40.0, 40.0, 20_000);
    assert_abs_diff_eq!(oracle, 2.0, epsilon = 1e-3);
    assert_abs_diff_eq!(psi.expectation_position(), oracle, epsilon = 1e-3);
}

#[test]
fn symmetric_packets_have_zero_mean() {
    let grid = Grid1D::symmetric(40.0, 1024).unwrap();
    let psi = WaveFunction::from_fn(grid, |x| Complex64::new(gauss(x, 6.0, 1.0) + gauss(x, -6.0, 1.0), 0.0)).unwrap();
    assert_abs_diff_eq!(psi.expectation_position(), 0.0, epsilon = 1e-6);
}

#[test]
fn counter_propagating_packets_mean_momentum() {
    // alpha G(x - a) e^{iPx} + i beta G(x + a) e^{-iPx}
    let (a, p, wa) = (10.0, 5.0, 0.7f64);
    let (al, be) = (wa.sqrt(), (1.0 - wa).sqrt());
    let grid = Grid1D::symmetric(40.0, 4096).unwrap();
    let psi = WaveFunction::from_fn(grid, |x| {
        Complex64::from_polar(al * gauss(x, a, 1.0), p * x)
            + Complex64::i() * Complex64::from_polar(be * gauss(x, -a, 1.0), -p * x)
    })
    .unwrap();
    // <p> = hbar Im int conj(psi) psi' dx, with the derivative taken analytically
    let field = |x: f64| {
        let g1 = gauss(x, a, 1.0);
        let g2 = gauss(x, -a, 1.0);
        let d1 = -(x - a) / 2.0 * g1;
        let d2 = -(x + a) / 2.0 * g2;
        let e1 = Complex64::from_polar(1.0, p * x);
        let e2 = Complex64::from_polar(1.0, -p * x);
        let psi = al * g1 * e1 + Complex64::i() * be * g2 * e2;
        let dpsi = al * (d1 + Complex64::i() * p * g1) * e1 + Complex64::i() * be * (d2 - Complex64::i() * p * g2) * e2;
        (psi, dpsi)
    };
    let num = simpson(|x| { let (f, d) = field(x); (f.conj() * d).im }, -40.0, 40.0, 40_000);
    let den = simpson(|x| field(x).0.norm_sqr(), -40.0, 40.0, 40_000);
    let oracle = num / den;
    assert_abs_diff_eq!(oracle, 2.0, epsilon = 1e-3);
    assert_abs_diff_eq!(psi.expectation_momentum(&units()), oracle, epsilon = 1e-3);
}

#[test]
fn real_gaussian_has_no_momentum() {
    let grid = Grid1D::symmetric(30.0, 1024).unwrap();
    let psi = WaveFunction::gaussian(grid, 1.3, 1.7, 0.0, &units()).unwrap();
    assert_abs_diff_eq!(psi.expectation_momentum(&units()), 0.0, epsilon = 1e-9);
}

#[test]
fn density_sums_to_one_and_peaks_at_centre() {
    let grid = Grid1D::symmetric(20.0, 512).unwrap();
    let psi = WaveFunction::gaussian(grid, grid.x(256), 1.0, 3.0, &units()).unwrap();
    let rho = psi.probability_density();
    assert_abs_diff_eq!(rho.iter().sum::<f64>() * grid.dx(), 1.0, epsilon = 1e-9);
    let peak = rho.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(peak, 256);
}

#[test]
fn screen_density_matches_closed_form_pointwise() {
    let u = units();
    let grid = Grid1D::symmetric(128.0, 32768).unwrap();
    let env = GaussianEnvelope::new(0.0, 20.0).unwrap();
    let state = screen_state(grid, 0.6f64.sqrt(), 5.0, env, &u).unwrap();
    let rho = state.psi.probability_density();
    let mut worst: f64 = 0.0;
    for i in (0..grid.n_points()).step_by(7) {
        let x = grid.x(i);
        let want = common::two_beam_density(x, 0.6, 5.0, 20.0);
        worst = worst.max((rho[i] - want).abs());
        assert_abs_diff_eq!(intensity_analytic(x, 0.6f64.sqrt(), 5.0, env, &u), want, epsilon = 1e-14);
    }
    assert!(worst < 1e-9, "max pointwise gap {worst}");
}

fn arbitrary_state() -> impl Strategy<Value = WaveFunction> {
    (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64), -3.0f64..3.0).prop_map(|(amps, shift)| {
        let grid = Grid1D::new(-5.0 + shift, 5.0 + shift, 64).unwrap();
        let amps = amps.into_iter().map(|(re, im)| Complex64::new(re, im + 1e-3)).collect();
        WaveFunction::from_amplitudes(grid, amps).unwrap()
    })
}

proptest! {
    #[test]
    fn parseval_holds(psi in arbitrary_state()) {
        prop_assert!((psi.norm_sq() - 1.0).abs() < 1e-9);
        prop_assert!((psi.spectral_norm_sq() - psi.norm_sq()).abs() < 1e-9);
    }

    #[test]
    fn conjugation_reverses_momentum(psi in arbitrary_state(), hbar in 0.1f64..3.0) {
        let u = UnitSystem { hbar, ..UnitSystem::default() };
        let p = psi.expectation_momentum(&u);
        let q = psi.conjugate().expectation_momentum(&u);
        prop_assert!((p + q).abs() < 1e-9 * (1.0 + p.abs()));
    }

    #[test]
    fn normalize_is_scale_free(psi in arbitrary_state(), scale in 0.01f64..100.0) {
        let scaled: Vec<Complex64> = psi.amplitudes().iter().map(|a| a * scale).collect();
        let back = WaveFunction::from_amplitudes(*psi.grid(), scaled).unwrap();
        prop_assert!((back.norm_sq() - 1.0).abs() < 1e-12);
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
