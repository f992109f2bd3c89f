mod common;

use std::f64::consts::PI;

use common::quadrature::gabor_point;
use gabor_stab::gabor::{gabor_transform, spectrogram};
use gabor_stab::grid::{make_analytic, make_hermite, AnalyticSignalSpec, Bump, GridGeometry, SignalGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn signal_geometry() -> GridGeometry {
    GridGeometry::cube(1, 512, -8.0, 8.0).unwrap()
}

fn bump_value(a: f64, b: f64, t: f64) -> Complex64 {
    Complex64::from_polar((-PI * (t - a) * (t - a)).exp(), 2.0 * PI * b * t)
}

#[test]
fn quadrature_oracle_reproduces_gaussian_closed_form() {
    let f = |t: f64| Complex64::new((-PI * t * t).exp(), 0.0);
    for &(x, y) in &[(0.0, 0.0), (1.0, -0.5), (-2.5, 1.75), (0.3, 3.2)] {
        let got = gabor_point(&f, x, y, 1e-16);
        let want = Complex64::from_polar(0.5f64.sqrt() * (-PI * (x * x + y * y) / 2.0).exp(), -PI * x * y);
        assert!((got - want).norm() < 1e-15, "({x}, {y}): {got} vs {want}");
    }
    assert!((gabor_point(&f, 0.0, 0.0, 1e-16).re - 0.7071068).abs() < 1e-7);
}

#[test]
fn fft_path_matches_quadrature_on_gaussian_family() {
    let phase = GridGeometry::centered(2, 32, 0.125).unwrap();
    for &(a, b) in &[(0.0, 0.0), (1.5, 0.0), (-0.75, 1.25), (0.4, -2.0)] {
        let bump = Bump::new(vec![a], vec![b]);
        let f = make_analytic(&AnalyticSignalSpec::ShiftedGaussian { bump }, &signal_geometry()).unwrap();
        let gf = gabor_transform(&f, &phase).unwrap();
        let peak = gf.max_abs();
        let mut p = [0.0; 2];
        // every 3rd sample keeps the oracle cost down
        for flat in (0..phase.len()).step_by(3) {
            phase.point(flat, &mut p);
            let want = gabor_point(&|t| bump_value(a, b, t), p[0], p[1], 1e-17);
            let got = gf.values()[flat];
            let err = (got - want).norm();
            assert!(err <= 1e-8 * peak, "({a},{b}) at {p:?}: {err:e}");
            if want.norm() > 1e-6 * peak {
                assert!(err <= 1e-8 * want.norm(), "({a},{b}) at {p:?}: relative {:e}", err / want.norm());
            }
        }
    }
}

#[test]
fn time_shift_moves_spectrogram_along_x() {
    let sg = signal_geometry();
    let phase = GridGeometry::centered(2, 24, 0.125).unwrap();
    let base = make_hermite(&[2], &sg).unwrap();
    let a = 0.5;
    let c = 2f64.powf(0.25) / 8f64.sqrt();
    let shifted = SignalGrid::from_fn(sg.clone(), |t| {
        let s = (2.0 * PI).sqrt() * (t[0] - a);
        Complex64::new(c * (4.0 * s * s - 2.0) * (-PI * (t[0] - a).powi(2)).exp(), 0.0)
    })
    .unwrap();
    let s0 = spectrogram(&gabor_transform(&base, &phase).unwrap());
    let s1 = spectrogram(&gabor_transform(&shifted, &phase).unwrap());
    let steps = 4;
    let (nx, ny) = (phase.extents()[0], phase.extents()[1]);
    for i in steps..nx {
        for j in 0..ny {
            let moved = s1.values()[phase.ravel(&[i, j])];
            let orig = s0.values()[phase.ravel(&[i - steps, j])];
            assert!((moved - orig).abs() < 1e-8 * s0.max_value(), "at ({i},{j})");
        }
    }
}

#[test]
fn modulation_moves_spectrogram_along_y() {
    let sg = signal_geometry();
    let phase = GridGeometry::centered(2, 24, 0.125).unwrap();
    let base = make_hermite(&[3], &sg).unwrap();
    let b = -0.75;
    let modulated = SignalGrid::from_fn(sg.clone(), |t| {
        base.values()[sg.nearest_index(t)] * Complex64::from_polar(1.0, 2.0 * PI * b * t[0])
    })
    .unwrap();
    let s0 = spectrogram(&gabor_transform(&base, &phase).unwrap());
    let s1 = spectrogram(&gabor_transform(&modulated, &phase).unwrap());
    let steps = 6;
    let (nx, ny) = (phase.extents()[0], phase.extents()[1]);
    for i in 0..nx {
        for j in 0..ny - steps {
            let moved = s1.values()[phase.ravel(&[i, j])];
            let orig = s0.values()[phase.ravel(&[i, j + steps])];
            assert!((moved - orig).abs() < 1e-8 * s0.max_value(), "at ({i},{j})");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shifted_gaussian_modulus_is_displaced_gaussian(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let phase = GridGeometry::centered(2, 12, 0.25).unwrap();
        let bump = Bump::new(vec![a], vec![b]);
        let f = make_analytic(&AnalyticSignalSpec::ShiftedGaussian { bump }, &signal_geometry()).unwrap();
        let s = spectrogram(&gabor_transform(&f, &phase).unwrap());
        let mut p = [0.0; 2];
        for (flat, v) in s.values().iter().enumerate() {
            phase.point(flat, &mut p);
            let want = 0.5f64.sqrt() * (-PI * ((p[0] - a).powi(2) + (p[1] - b).powi(2)) / 2.0).exp();
            prop_assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_is_linear(c_re in -3.0f64..3.0, c_im in -3.0f64..3.0) {
        let phase = GridGeometry::centered(2, 6, 0.5).unwrap();
        let f = make_hermite(&[1], &signal_geometry()).unwrap();
        let c = Complex64::new(c_re, c_im);
        let gf = gabor_transform(&f, &phase).unwrap();
        let gcf = gabor_transform(&f.scaled(c), &phase).unwrap();
        for (u, v) in gf.values().iter().zip(gcf.values()) {
            prop_assert!((u * c - v).norm() <= 1e-14 * (1.0 + c.norm()));
        }
    }
}
