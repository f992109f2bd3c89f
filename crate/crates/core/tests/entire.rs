use std::f64::consts::PI;

use gabor_stab::entire::{
    argument_principle_count, growth_class_check, jensen_check_1d, log_derivative_field, logderiv_ball_norms,
    polynomial_roots, BallNormOptions, EntireFunction, GrowthClassSpec, CIRCLE_POINTS, DEFAULT_EXCLUSION,
};
use gabor_stab::gabor::{entire_lift, gabor_transform};
use gabor_stab::grid::{make_analytic, AnalyticSignalSpec, Bump, GridGeometry};
use num_complex::Complex64;
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..6).prop_map(|v| {
        let mut c: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        // keep G(0) away from zero
        c[0] += Complex64::new(3.0, 0.0);
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn log_derivative_ignores_constant_factors(c in coeffs(), k_re in -4.0f64..4.0, k_im in 0.1f64..4.0) {
        let g = EntireFunction::Polynomial(c);
        let k = Complex64::new(k_re, k_im);
        let geom = GridGeometry::centered(2, 10, 0.3).unwrap();
        let a = log_derivative_field(&g, &geom, DEFAULT_EXCLUSION).unwrap();
        let b = log_derivative_field(&g.scaled(k).unwrap(), &geom, DEFAULT_EXCLUSION).unwrap();
        for (u, v) in a.components[0].iter().zip(&b.components[0]) {
            prop_assert!((u - v).norm() <= 1e-12 * (1.0 + u.norm()));
        }
    }

    #[test]
    fn argument_principle_matches_root_enumeration(c in coeffs(), r in 0.5f64..4.0) {
        let roots = polynomial_roots(&c).unwrap();
        prop_assume!(roots.iter().all(|z| (z.norm() - r).abs() > 0.05));
        let g = EntireFunction::Polynomial(c);
        let raw = argument_principle_count(&g, r, CIRCLE_POINTS).unwrap();
        let count = roots.iter().filter(|z| z.norm() < r).count();
        prop_assert!((raw - count as f64).abs() < 1e-6, "{raw} vs {count}");
    }

    #[test]
    fn larger_alpha_never_loses_membership(alpha in 0.1f64..3.0, extra in 0.0f64..2.0, c in coeffs()) {
        let g = EntireFunction::Polynomial(c);
        let radii: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let lo = growth_class_check(&g, &GrowthClassSpec::new(alpha, 1.0).unwrap(), &radii).unwrap();
        let hi = growth_class_check(&g, &GrowthClassSpec::new(alpha + extra, 1.0).unwrap(), &radii).unwrap();
        prop_assert!(hi.worst_margin >= lo.worst_margin);
        prop_assert!(!lo.member || hi.member);
    }

    #[test]
    fn jensen_holds_at_interior_points(c in coeffs(), zr in 0.0f64..0.9, zt in 0.0f64..6.28, r in 0.5f64..3.0) {
        let roots = polynomial_roots(&c).unwrap();
        prop_assume!(roots.iter().all(|z| (z.norm() - r).abs() > 0.1 * r));
        let z = Complex64::from_polar(zr * r, zt);
        prop_assume!(roots.iter().all(|w| (w - z).norm() > 1e-3));
        let j = jensen_check_1d(&EntireFunction::Polynomial(c), z, r, CIRCLE_POINTS).unwrap();
        prop_assert!(j.residual < 1e-9, "{j:?}");
    }
}

#[test]
fn jensen_residual_shrinks_under_refinement() {
    // a zero just outside the circle makes the trapezoid rule converge slowly
    let g = EntireFunction::polynomial_real(&[-1.25, 1.0]);
    let z = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        let res = jensen_check_1d(&g, z, 1.0, n).unwrap().residual;
        assert!(res <= 0.5 * prev, "n = {n}: {res} vs {prev}");
        prev = res;
    }
}

#[test]
fn ball_norms_nondecreasing_for_polynomial() {
    let g = EntireFunction::polynomial_real(&[1.0, 0.0, -1.0]);
    let radii: Vec<f64> = (1..=12).map(|k| k as f64 * 0.25).collect();
    let t = logderiv_ball_norms(&g, 1.5, &radii, None, &BallNormOptions { samples_per_axis: 401, ..Default::default() })
        .unwrap();
    assert!(t.norms.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn theorem_b_exponent_for_polynomials() {
    // 1 - z is in O_1^1, so the slope over one decade must stay below 2d + β - 1 = 2
    let g = EntireFunction::polynomial_real(&[1.0, -1.0]);
    let class = GrowthClassSpec::new(1.0, 1.0).unwrap();
    let radii: Vec<f64> = (0..=10).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
    assert!(growth_class_check(&g, &class, &radii).unwrap().member);
    let t = logderiv_ball_norms(&g, 1.0, &radii, Some(&class), &BallNormOptions::default()).unwrap();
    assert!(t.fitted_slope <= class.ball_norm_exponent(1) + 0.1, "slope {}", t.fitted_slope);
}

#[test]
fn theorem_b_exponent_for_a_lifted_transform() {
    // the lift of a shifted Gaussian is C e^{π(a+ib)z}: class O_{π|c|}^1, constant log-derivative
    let (a, b) = (0.4, -0.3);
    let signal = GridGeometry::cube(1, 512, -8.0, 8.0).unwrap();
    let f = make_analytic(&AnalyticSignalSpec::ShiftedGaussian { bump: Bump::new(vec![a], vec![b]) }, &signal).unwrap();
    let phase = GridGeometry::centered(2, 112, 1.0 / 32.0).unwrap();
    let lift = entire_lift(&gabor_transform(&f, &phase).unwrap()).unwrap();
    let g = EntireFunction::LiftedGabor(lift);
    let class = GrowthClassSpec::new(PI * 0.5 * 1.001, 1.0).unwrap();
    let radii: Vec<f64> = (0..=8).map(|k| 0.3 * 10f64.powf(k as f64 / 8.0)).collect();
    assert!(growth_class_check(&g, &class, &radii).unwrap().member);
    let t = logderiv_ball_norms(&g, 1.0, &radii, Some(&class), &BallNormOptions::default()).unwrap();
    assert!(t.fitted_slope <= class.ball_norm_exponent(1) + 0.1, "slope {}", t.fitted_slope);
    assert!((t.fitted_slope - 2.0).abs() < 0.1);
    let exact = PI * PI * (a * a + b * b).sqrt() * 9.0;
    let last = *t.norms.last().unwrap();
    assert!((last - exact).abs() < 0.02 * exact, "{last} vs {exact}");
}
