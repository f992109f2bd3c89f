use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::GaborError;
use crate::grid::{central_difference, PhaseSpaceGrid};

/// A Gabor transform together with its entire lift
/// `G(z) = Gf(z̄)·η(z)`, `η(z) = e^{π|z|²/2 - πi x·y}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntireLift {
    pub base: PhaseSpaceGrid,
    pub lifted: PhaseSpaceGrid,
}

impl EntireLift {
    /// Number of complex variables.
    pub fn dimension(&self) -> usize {
        self.base.geometry().rank() / 2
    }
}

/// Lift `field` to the entire function `G`. Every `y` axis must be symmetric
/// about zero so that the conjugate point `(x, -y)` is itself a sample.
pub fn entire_lift(field: &PhaseSpaceGrid) -> Result<EntireLift, GaborError> {
    let g = field.geometry();
    let d = g.phase_dimension()?;
    if let Some(k) = (0..d).map(|k| 2 * k + 1).find(|&a| !g.is_symmetric_axis(a)) {
        return Err(GaborError::AsymmetricAxis(k));
    }
    let mut idx = vec![0; 2 * d];
    let mut p = vec![0.0; 2 * d];
    let values = (0..g.len())
        .map(|flat| {
            g.unravel(flat, &mut idx);
            g.point(flat, &mut p);
            for k in 0..d {
                idx[2 * k + 1] = g.extents()[2 * k + 1] - 1 - idx[2 * k + 1];
            }
            let conj = field.values()[g.ravel(&idx)];
            let mut r2 = 0.0;
            let mut xy = 0.0;
            for k in 0..d {
                r2 += p[2 * k] * p[2 * k] + p[2 * k + 1] * p[2 * k + 1];
                xy += p[2 * k] * p[2 * k + 1];
            }
            conj * Complex64::from_polar((PI * r2 / 2.0).exp(), -PI * xy)
        })
        .collect();
    Ok(EntireLift { base: field.clone(), lifted: PhaseSpaceGrid::new(g.clone(), values)? })
}

/// Finite-difference check that `|∇|G|| = 2^{-1/2}|∇G| = |G'|` and that
/// `∂G/∂z̄` vanishes on the lifted field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientIdentityReport {
    /// Samples that entered the comparison.
    pub samples: usize,
    /// `max | |∇|G|| - |G'| | / |G'|`.
    pub modulus_gradient_error: f64,
    /// `max | 2^{-1/2}|∇G| - |G'| | / |G'|`.
    pub half_gradient_error: f64,
    /// `max |∂G/∂z̄| / |G|`.
    pub wirtinger_residual: f64,
}

/// Compare the three gradient magnitudes at interior samples where
/// `|G| > floor·max|G|` and `G' ≠ 0`. Derivatives are central differences
/// with the grid spacing; `G'` is the Wirtinger derivative `½(∂_x - i∂_y)`.
pub fn gradient_identity_check(lift: &EntireLift, floor: f64) -> GradientIdentityReport {
    let field = &lift.lifted;
    let g = field.geometry();
    let d = g.rank() / 2;
    let values = field.values();
    let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let max = moduli.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut report = GradientIdentityReport {
        samples: 0,
        modulus_gradient_error: 0.0,
        half_gradient_error: 0.0,
        wirtinger_residual: 0.0,
    };
    'cells: for flat in 0..g.len() {
        if moduli[flat] <= floor * max {
            continue;
        }
        let mut grad_mod2 = 0.0;
        let mut grad_full2 = 0.0;
        let mut dz2 = 0.0;
        let mut dzbar2 = 0.0;
        for k in 0..d {
            let (Some(fx), Some(fy), Some(mx), Some(my)) = (
                central_difference(values, g, 2 * k, flat),
                central_difference(values, g, 2 * k + 1, flat),
                central_difference(&moduli, g, 2 * k, flat),
                central_difference(&moduli, g, 2 * k + 1, flat),
            ) else {
                continue 'cells;
            };
            let i = Complex64::i();
            dz2 += ((fx - i * fy) * 0.5).norm_sqr();
            dzbar2 += ((fx + i * fy) * 0.5).norm_sqr();
            grad_full2 += fx.norm_sqr() + fy.norm_sqr();
            grad_mod2 += mx * mx + my * my;
        }
        let deriv = dz2.sqrt();
        if deriv == 0.0 {
            continue;
        }
        report.samples += 1;
        let e1 = (grad_mod2.sqrt() - deriv).abs() / deriv;
        let e2 = ((grad_full2 / 2.0).sqrt() - deriv).abs() / deriv;
        let e3 = dzbar2.sqrt() / moduli[flat];
        report.modulus_gradient_error = report.modulus_gradient_error.max(e1);
        report.half_gradient_error = report.half_gradient_error.max(e2);
        report.wirtinger_residual = report.wirtinger_residual.max(e3);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::gabor_transform;
    use crate::grid::{make_analytic, make_gaussian, AnalyticSignalSpec, Bump, GridGeometry};

    fn signal() -> GridGeometry {
        GridGeometry::cube(1, 512, -8.0, 8.0).unwrap()
    }

    #[test]
    fn gaussian_lift_is_constant() {
        let f = make_gaussian(1, &signal()).unwrap();
        let phase = GridGeometry::centered(2, 24, 0.125).unwrap();
        let lift = entire_lift(&gabor_transform(&f, &phase).unwrap()).unwrap();
        let c = 0.5f64.sqrt();
        let mut p = [0.0; 2];
        for (flat, v) in lift.lifted.values().iter().enumerate() {
            phase.point(flat, &mut p);
            if p[0] * p[0] + p[1] * p[1] <= 4.0 {
                assert!((v - c).norm() < 1e-11);
            }
        }
        let origin = phase.nearest_index(&[0.0, 0.0]);
        assert_eq!(lift.lifted.values()[origin], lift.base.values()[origin]);
    }

    #[test]
    fn lift_modulus_identity() {
        let bump = Bump::new(vec![0.5], vec![0.25]);
        let f = make_analytic(&AnalyticSignalSpec::ShiftedGaussian { bump }, &signal()).unwrap();
        let phase = GridGeometry::centered(2, 20, 0.2).unwrap();
        let lift = entire_lift(&gabor_transform(&f, &phase).unwrap()).unwrap();
        let g = lift.lifted.geometry();
        let mut p = [0.0; 2];
        for flat in 0..g.len() {
            g.point(flat, &mut p);
            let conj = lift.base.values()[g.nearest_index(&[p[0], -p[1]])];
            let want = conj.norm() * (PI * (p[0] * p[0] + p[1] * p[1]) / 2.0).exp();
            let got = lift.lifted.values()[flat].norm();
            assert!((got - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn shifted_gaussian_lift_is_exponential() {
        // lift of the (a, b) bump is C·e^{π(a+ib)z}
        let (a, b) = (0.3, -0.2);
        let bump = Bump::new(vec![a], vec![b]);
        let f = make_analytic(&AnalyticSignalSpec::ShiftedGaussian { bump }, &signal()).unwrap();
        let phase = GridGeometry::centered(2, 16, 0.125).unwrap();
        let lift = entire_lift(&gabor_transform(&f, &phase).unwrap()).unwrap();
        let c = Complex64::new(a, b);
        let scale = Complex64::from_polar(0.5f64.sqrt() * (-PI * (a * a + b * b) / 2.0).exp(), PI * a * b);
        let mut p = [0.0; 2];
        for (flat, v) in lift.lifted.values().iter().enumerate() {
            phase.point(flat, &mut p);
            let want = scale * (c * Complex64::new(p[0], p[1]) * PI).exp();
            assert!((v - want).norm() < 1e-9 * want.norm());
        }
        // second-order stencils at h = 1/8: relative error ≈ (π|c|h)²/6
        let report = gradient_identity_check(&lift, 1e-6);
        assert!(report.samples > 900);
        assert!(report.modulus_gradient_error < 5e-3, "{report:?}");
        assert!(report.half_gradient_error < 5e-3, "{report:?}");
        assert!(report.wirtinger_residual < 5e-3, "{report:?}");
    }

    #[test]
    fn asymmetric_grid_rejected() {
        let phase = GridGeometry::new(vec![5, 5], vec![0.5, 0.5], vec![-1.0, -0.5]).unwrap();
        let field = PhaseSpaceGrid::zeros(phase);
        assert!(matches!(entire_lift(&field), Err(GaborError::AsymmetricAxis(1))));
    }
}
