use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{growth_class_check, EntireError, EntireFunction, GrowthClassSpec};
use crate::numeric::NeumaierSum;

/// Equispaced trapezoid points on circles.
pub const CIRCLE_POINTS: usize = 4096;

/// Both sides of the Poisson–Jensen formula at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JensenResidual {
    /// `log|G(z)|`.
    pub lhs: f64,
    /// `(1/2π) ∫ P_r(z, θ) log|G(re^{iθ})| dθ`.
    pub circle_term: f64,
    /// `Σ_{|z_k|<r} log|(r² - z̄_k z) / (r(z - z_k))|`.
    pub zero_correction: f64,
    pub residual: f64,
}

fn analytic_zeros(g: &EntireFunction) -> Result<Vec<Complex64>, EntireError> {
    match g {
        EntireFunction::Polynomial(c) => polynomial_roots(c),
        EntireFunction::GaussianExponential(_) => Ok(Vec::new()),
        EntireFunction::LiftedGabor(_) => Err(EntireError::NotOneVariable),
    }
}

/// Residual of the Poisson–Jensen formula for `G` at `z` on the disc of
/// radius `r`, with an `n`-point trapezoid rule on the circle.
pub fn jensen_check_1d(g: &EntireFunction, z: Complex64, r: f64, n: usize) -> Result<JensenResidual, EntireError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(EntireError::InvalidRadius(r));
    }
    if z.norm() >= r {
        return Err(EntireError::OutsideBall(r));
    }
    let zeros = analytic_zeros(g)?;
    if zeros.iter().any(|zk| (zk.norm() - r).abs() <= 1e-12 * r) {
        return Err(EntireError::ZeroOnContour(r));
    }
    let lhs = g.log_modulus(z).expect("analytic kind");
    if !lhs.is_finite() {
        return Err(EntireError::VanishesAtPoint);
    }
    let mut circle = NeumaierSum::new();
    let r2z = r * r - z.norm_sqr();
    for k in 0..n {
        let xi = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
        let kernel = r2z / (xi - z).norm_sqr();
        circle.add(kernel * g.log_modulus(xi).expect("analytic kind"));
    }
    let circle_term = circle.total() / n as f64;
    let mut correction = NeumaierSum::new();
    for zk in zeros.iter().filter(|zk| zk.norm() < r) {
        correction.add(((r * r - zk.conj() * z) / (r * (z - zk))).norm().ln());
    }
    let zero_correction = correction.total();
    let residual = (lhs - (circle_term - zero_correction)).abs();
    Ok(JensenResidual { lhs, circle_term, zero_correction, residual })
}

/// All roots of `Σ a_k z^k` (ascending coefficients, repeated by
/// multiplicity) by the Aberth–Ehrlich iteration.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, EntireError> {
    let zero = Complex64::new(0.0, 0.0);
    let top = match coeffs.iter().rposition(|&c| c != zero) {
        Some(t) => t,
        None => return Ok(Vec::new()),
    };
    // roots at the origin are exact
    let low = coeffs.iter().position(|&c| c != zero).unwrap();
    let mut roots = vec![zero; low];
    let c: Vec<Complex64> = coeffs[low..=top].iter().map(|a| a / coeffs[top]).collect();
    let n = c.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    let bound = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    const MAX_ITER: usize = 500;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let p = super::horner(&c, z[i]);
            if p == zero {
                continue;
            }
            let ratio = p / super::horner_derivative(&c, z[i]);
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // multiple roots converge linearly; accept if the residuals are tiny
        let scale = |w: Complex64| c.iter().rev().fold(0.0, |acc, a| acc * w.norm() + a.norm());
        if z.iter().any(|&w| super::horner(&c, w).norm() > 1e-10 * scale(w)) {
            return Err(EntireError::RootsDidNotConverge(MAX_ITER));
        }
    }
    roots.extend(z);
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    Ok(roots)
}

/// `(1/2πi)∮_{|ξ|=r} G'/G dξ` by the `n`-point trapezoid rule; the raw
/// (unrounded) value.
pub fn argument_principle_count(g: &EntireFunction, r: f64, n: usize) -> Result<f64, EntireError> {
    if matches!(g, EntireFunction::LiftedGabor(_)) {
        return Err(EntireError::NotOneVariable);
    }
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for k in 0..n {
        let xi = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
        let v = g.eval(xi).unwrap();
        if v.norm() == 0.0 {
            return Err(EntireError::ZeroOnContour(r));
        }
        // dξ = iξ dθ, so the integrand becomes ξ G'(ξ)/G(ξ) dθ / 2π
        let w = xi * g.log_derivative(xi).unwrap();
        re.add(w.re);
        im.add(w.im);
    }
    let total = Complex64::new(re.total(), im.total()) / n as f64;
    Ok(total.re)
}

/// Zero count in `B_r` against the bound `(2^β α / log 2) r^β`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCount {
    pub r: f64,
    /// Roots of modulus `< r`, with multiplicity.
    pub count: usize,
    /// Argument-principle value on `|ξ| = r`.
    pub contour_count: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Count zeros of a polynomial in `B_r`. The growth class is first checked
/// on 64 radii spread over `(0, 2r]`.
pub fn zero_count_bound_1d(g: &EntireFunction, spec: &GrowthClassSpec, r: f64) -> Result<ZeroCount, EntireError> {
    let EntireFunction::Polynomial(coeffs) = g else {
        return Err(EntireError::NotOneVariable);
    };
    if !(r.is_finite() && r > 0.0) {
        return Err(EntireError::InvalidRadius(r));
    }
    let radii: Vec<f64> = (1..=64).map(|k| 2.0 * r * k as f64 / 64.0).collect();
    let report = growth_class_check(g, spec, &radii)?;
    if !report.member {
        let (i, _) = report
            .margins
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        return Err(EntireError::ClassCheckFailed { radius: radii[i], margin: report.margins[i] });
    }
    let roots = polynomial_roots(coeffs)?;
    if roots.iter().any(|z| (z.norm() - r).abs() <= 1e-12 * r) {
        return Err(EntireError::ZeroOnContour(r));
    }
    let count = roots.iter().filter(|z| z.norm() < r).count();
    let contour_count = argument_principle_count(g, r, CIRCLE_POINTS)?;
    let bound = 2f64.powf(spec.beta) * spec.alpha / 2f64.ln() * r.powf(spec.beta);
    Ok(ZeroCount { r, count, contour_count, bound, holds: count as f64 <= bound })
}
