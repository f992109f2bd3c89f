//! Entire functions of growth class `O_α^β`, log-derivative fields and their
//! ball norms, and the one-variable Poisson–Jensen and zero-count checks.

mod jensen;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gabor::EntireLift;
use crate::grid::{central_difference, GridError, GridGeometry};
use crate::numeric::{abs_pow, fit_line, NeumaierSum};

pub use jensen::{
    argument_principle_count, jensen_check_1d, polynomial_roots, zero_count_bound_1d, JensenResidual,
    ZeroCount, CIRCLE_POINTS,
};

#[derive(Debug, Error, PartialEq)]
pub enum EntireError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("growth class needs finite positive alpha and beta, got ({alpha}, {beta})")]
    InvalidGrowthClass { alpha: f64, beta: f64 },
    #[error("function vanishes at the origin")]
    VanishesAtOrigin,
    #[error("radius {0} must be finite and positive")]
    InvalidRadius(f64),
    #[error("radii must be strictly increasing")]
    UnsortedRadii,
    #[error("exponent p = {p} outside [1, {limit}) for d = {d}")]
    InadmissibleExponent { p: f64, d: usize, limit: f64 },
    #[error("every cell was excluded as a near-zero of G")]
    AllExcluded,
    #[error("operation needs a one-variable function with analytic evaluation")]
    NotOneVariable,
    #[error("G has a zero on the contour |ξ| = {0}")]
    ZeroOnContour(f64),
    #[error("evaluation point lies outside the open ball of radius {0}")]
    OutsideBall(f64),
    #[error("G vanishes at the evaluation point")]
    VanishesAtPoint,
    #[error("growth class check fails at r = {radius} (margin {margin:e})")]
    ClassCheckFailed { radius: f64, margin: f64 },
    #[error("root finder did not converge in {0} iterations")]
    RootsDidNotConverge(usize),
    #[error("ball of radius {radius} exceeds grid coverage {coverage}")]
    BeyondCoverage { radius: f64, coverage: f64 },
}

/// Growth class `O_α^β`: `M_G(r) ≤ |G(0)| e^{α r^β}` for all `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthClassSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl GrowthClassSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, EntireError> {
        let spec = Self { alpha, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EntireError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.alpha) && ok(self.beta)) {
            return Err(EntireError::InvalidGrowthClass { alpha: self.alpha, beta: self.beta });
        }
        Ok(())
    }

    /// Shape of the ball-norm bound without its unknown absolute constant:
    /// `α 2^{2d+2β} r^{2d+β-1}`.
    pub fn ball_norm_shape(&self, d: usize, r: f64) -> f64 {
        let d = d as f64;
        self.alpha * 2f64.powf(2.0 * d + 2.0 * self.beta) * r.powf(2.0 * d + self.beta - 1.0)
    }

    /// Exponent `2d + β - 1` of the ball-norm growth.
    pub fn ball_norm_exponent(&self, d: usize) -> f64 {
        2.0 * d as f64 + self.beta - 1.0
    }
}

/// An entire function together with a way to evaluate it and its derivative.
#[derive(Clone, Debug, PartialEq)]
pub enum EntireFunction {
    /// `Σ a_k z^k`, coefficients in ascending order.
    Polynomial(Vec<Complex64>),
    /// `e^{c z²}`.
    GaussianExponential(Complex64),
    /// Samples of a lifted Gabor transform; derivatives by central differences.
    LiftedGabor(EntireLift),
}

impl EntireFunction {
    pub fn polynomial_real(coeffs: &[f64]) -> Self {
        Self::Polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Number of complex variables.
    pub fn dimension(&self) -> usize {
        match self {
            Self::LiftedGabor(lift) => lift.dimension(),
            _ => 1,
        }
    }

    /// `G(0)`; for sampled functions the sample nearest the origin.
    pub fn value_at_origin(&self) -> Complex64 {
        match self {
            Self::Polynomial(c) => c.first().copied().unwrap_or_default(),
            Self::GaussianExponential(_) => Complex64::new(1.0, 0.0),
            Self::LiftedGabor(lift) => {
                let g = lift.lifted.geometry();
                lift.lifted.values()[g.nearest_index(&vec![0.0; g.rank()])]
            }
        }
    }

    pub fn validate(&self) -> Result<(), EntireError> {
        if self.value_at_origin() == Complex64::new(0.0, 0.0) {
            return Err(EntireError::VanishesAtOrigin);
        }
        Ok(())
    }

    /// `G(z)` for the analytic one-variable kinds.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        match self {
            Self::Polynomial(c) => Some(horner(c, z)),
            Self::GaussianExponential(c) => Some((c * z * z).exp()),
            Self::LiftedGabor(_) => None,
        }
    }

    /// `G'(z)` for the analytic one-variable kinds.
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        match self {
            Self::Polynomial(c) => Some(horner_derivative(c, z)),
            Self::GaussianExponential(c) => Some(2.0 * c * z * (c * z * z).exp()),
            Self::LiftedGabor(_) => None,
        }
    }

    /// `log|G(z)|`, computed without overflow for the exponential kind.
    pub fn log_modulus(&self, z: Complex64) -> Option<f64> {
        match self {
            Self::GaussianExponential(c) => Some((c * z * z).re),
            _ => self.eval(z).map(|v| v.norm().ln()),
        }
    }

    /// `G'(z)/G(z)` for the analytic kinds.
    pub fn log_derivative(&self, z: Complex64) -> Option<Complex64> {
        match self {
            Self::GaussianExponential(c) => Some(2.0 * c * z),
            Self::Polynomial(c) => Some(horner_derivative(c, z) / horner(c, z)),
            Self::LiftedGabor(_) => None,
        }
    }

    /// Multiply by the constant `k`.
    pub fn scaled(&self, k: Complex64) -> Option<Self> {
        match self {
            Self::Polynomial(c) => Some(Self::Polynomial(c.iter().map(|a| a * k).collect())),
            Self::GaussianExponential(_) => None,
            Self::LiftedGabor(lift) => Some(Self::LiftedGabor(EntireLift {
                base: lift.base.scaled(k),
                lifted: lift.lifted.scaled(k),
            })),
        }
    }

    /// Scale against which `|G(z)|` is judged to be a near-zero.
    fn exclusion_scale(&self, z: Complex64) -> f64 {
        match self {
            Self::Polynomial(c) => {
                let r = z.norm();
                c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
            }
            _ => 0.0,
        }
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn horner_derivative(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &a)| acc * z + a * k as f64)
}

/// Result of [`growth_class_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub member: bool,
    /// Smallest `α r^β - log(M_G(r)/|G(0)|)` over the radii.
    pub worst_margin: f64,
    pub radii: Vec<f64>,
    pub margins: Vec<f64>,
}

/// Angles used to sample `|z| = r` when estimating `M_G(r)`.
pub const GROWTH_ANGLES: usize = 4096;

/// Check `M_G(r) ≤ |G(0)| e^{α r^β}` on each radius, in logarithmic form.
///
/// Analytic kinds sample the circle `|z| = r` (maximum modulus principle);
/// lifted transforms take the maximum over grid samples in the closed ball.
pub fn growth_class_check(
    g: &EntireFunction,
    spec: &GrowthClassSpec,
    radii: &[f64],
) -> Result<GrowthReport, EntireError> {
    spec.validate()?;
    g.validate()?;
    validate_radii(radii, false)?;
    let log_g0 = g.value_at_origin().norm().ln();
    let margins: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let log_max = match g {
                EntireFunction::LiftedGabor(lift) => {
                    let geom = lift.lifted.geometry();
                    let mut p = vec![0.0; geom.rank()];
                    let mut best = f64::NEG_INFINITY;
                    for (i, v) in lift.lifted.values().iter().enumerate() {
                        geom.point(i, &mut p);
                        if p.iter().map(|x| x * x).sum::<f64>() <= r * r {
                            best = best.max(v.norm().ln());
                        }
                    }
                    best
                }
                _ => (0..GROWTH_ANGLES)
                    .map(|k| {
                        let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / GROWTH_ANGLES as f64);
                        g.log_modulus(z).expect("analytic kind")
                    })
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            spec.alpha * r.powf(spec.beta) - (log_max - log_g0)
        })
        .collect();
    let worst_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    // rounding in log|G| is relative to the exponent size
    let member = radii
        .iter()
        .zip(&margins)
        .all(|(&r, &m)| m >= -1e-12 * (1.0 + spec.alpha * r.powf(spec.beta)));
    Ok(GrowthReport { member, worst_margin, radii: radii.to_vec(), margins })
}

fn validate_radii(radii: &[f64], strictly_increasing: bool) -> Result<(), EntireError> {
    if let Some(&r) = radii.iter().find(|&&r| !(r.is_finite() && r > 0.0)) {
        return Err(EntireError::InvalidRadius(r));
    }
    if strictly_increasing && radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EntireError::UnsortedRadii);
    }
    Ok(())
}

/// Samples of `(log G)' = G'/G` with the cells treated as near-zeros of `G`.
///
/// For `d > 1` the field has one component `∂_{z_k} log G` per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct LogDerivativeField {
    pub geometry: GridGeometry,
    pub components: Vec<Vec<Complex64>>,
    pub excluded: Vec<bool>,
}

impl LogDerivativeField {
    /// `|(log G)'|` per sample (Euclidean norm over components).
    pub fn modulus(&self) -> Vec<f64> {
        (0..self.geometry.len())
            .map(|i| self.components.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|&&e| e).count()
    }
}

/// Default relative threshold below which `|G|` counts as a near-zero.
pub const DEFAULT_EXCLUSION: f64 = 1e-12;

/// Sample `(log G)'` on `geometry`.
///
/// A cell is excluded when `|G| < exclusion·scale`. The scale is
/// `Σ|a_k||z|^k` for polynomials (a cancellation test that does not depend
/// on the size of the grid), the maximum of `|G|` over the grid for lifted
/// transforms, and zero for the exponential kind, which never vanishes.
/// Lifted transforms also exclude cells without a central-difference stencil.
pub fn log_derivative_field(
    g: &EntireFunction,
    geometry: &GridGeometry,
    exclusion: f64,
) -> Result<LogDerivativeField, EntireError> {
    g.validate()?;
    let field = match g {
        EntireFunction::LiftedGabor(lift) => {
            geometry.same_as(lift.lifted.geometry())?;
            lifted_log_derivative(lift, exclusion)
        }
        _ => {
            geometry.require_rank(2)?;
            let mut p = [0.0; 2];
            let mut values = Vec::with_capacity(geometry.len());
            let mut excluded = Vec::with_capacity(geometry.len());
            for i in 0..geometry.len() {
                geometry.point(i, &mut p);
                let z = Complex64::new(p[0], p[1]);
                let v = g.eval(z).expect("analytic kind");
                let small = v == Complex64::new(0.0, 0.0) || v.norm() < exclusion * g.exclusion_scale(z);
                excluded.push(small);
                values.push(if small { Complex64::new(0.0, 0.0) } else { g.log_derivative(z).unwrap() });
            }
            LogDerivativeField { geometry: geometry.clone(), components: vec![values], excluded }
        }
    };
    if field.excluded.iter().all(|&e| e) {
        return Err(EntireError::AllExcluded);
    }
    Ok(field)
}

fn lifted_log_derivative(lift: &EntireLift, exclusion: f64) -> LogDerivativeField {
    let values = lift.lifted.values();
    let geom = lift.lifted.geometry();
    let d = geom.rank() / 2;
    let max = lift.lifted.max_abs();
    let zero = Complex64::new(0.0, 0.0);
    let mut components = vec![vec![zero; geom.len()]; d];
    let mut excluded = vec![false; geom.len()];
    for i in 0..geom.len() {
        let v = values[i];
        let mut skip = v.norm() < exclusion * max || v == zero;
        let mut partials = Vec::with_capacity(d);
        for k in 0..d {
            match (
                central_difference(values, geom, 2 * k, i),
                central_difference(values, geom, 2 * k + 1, i),
            ) {
                (Some(fx), Some(fy)) => partials.push((fx - Complex64::i() * fy) * 0.5),
                _ => skip = true,
            }
        }
        excluded[i] = skip;
        if !skip {
            for (k, dz) in partials.into_iter().enumerate() {
                components[k][i] = dz / v;
            }
        }
    }
    LogDerivativeField { geometry: geom.clone(), components, excluded }
}

/// Upper end of the admissible exponent range `[1, 1 + 1/(2d-1))`.
pub fn ball_norm_exponent_limit(d: usize) -> f64 {
    1.0 + 1.0 / (2.0 * d as f64 - 1.0)
}

pub fn check_ball_norm_exponent(p: f64, d: usize) -> Result<(), EntireError> {
    let limit = ball_norm_exponent_limit(d);
    if !(p >= 1.0 && p < limit) {
        return Err(EntireError::InadmissibleExponent { p, d, limit });
    }
    Ok(())
}

/// `‖(log G)'‖_{L^p(B_r)}` over a sequence of radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallNormTable {
    pub p: f64,
    pub d: usize,
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
    /// `α 2^{2d+2β} r^{2d+β-1}` when a growth class was supplied.
    pub bounds: Option<Vec<f64>>,
    /// Least-squares slope of `log norm` against `log r` over the first `i+1` radii.
    pub slopes_so_far: Vec<Option<f64>>,
    pub fitted_slope: f64,
    /// Intercept of the same fit; `e^{fitted_constant}` estimates the
    /// multiplicative constant in front of `r^{fitted_slope}`.
    pub fitted_constant: f64,
    /// Cells omitted as near-zeros inside the largest ball.
    pub excluded_cells: usize,
}

impl BallNormTable {
    /// CSV with header `r,norm,bound,slope_so_far`; missing entries are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,norm,bound,slope_so_far\n");
        for i in 0..self.radii.len() {
            let bound = self.bounds.as_ref().map(|b| format!("{:e}", b[i])).unwrap_or_default();
            let slope = self.slopes_so_far[i].map(|s| format!("{s:e}")).unwrap_or_default();
            let _ = writeln!(out, "{:e},{:e},{},{}", self.radii[i], self.norms[i], bound, slope);
        }
        out
    }
}

/// Options for [`logderiv_ball_norms`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallNormOptions {
    /// Samples per axis of the quadrature grid for the analytic kinds.
    pub samples_per_axis: usize,
    /// Sub-samples per axis used to measure how much of a boundary cell lies in the ball.
    pub coverage_subsamples: usize,
    pub exclusion: f64,
}

impl Default for BallNormOptions {
    fn default() -> Self {
        Self { samples_per_axis: 1025, coverage_subsamples: 8, exclusion: DEFAULT_EXCLUSION }
    }
}

/// Ball norms of `(log G)'` for every radius.
///
/// Analytic kinds use one grid covering the largest ball, with each cell
/// weighted by the fraction of it inside `B_r`; the weights grow with `r`, so
/// the norms are nondecreasing by construction. Lifted transforms use their
/// own samples, with cells counted when their centre lies in the ball.
pub fn logderiv_ball_norms(
    g: &EntireFunction,
    p: f64,
    radii: &[f64],
    class: Option<&GrowthClassSpec>,
    options: &BallNormOptions,
) -> Result<BallNormTable, EntireError> {
    let d = g.dimension();
    check_ball_norm_exponent(p, d)?;
    validate_radii(radii, true)?;
    if radii.is_empty() {
        return Err(EntireError::UnsortedRadii);
    }
    if let Some(c) = class {
        c.validate()?;
    }
    let r_max = *radii.last().unwrap();
    let (field, coverage) = match g {
        EntireFunction::LiftedGabor(lift) => {
            let geom = lift.lifted.geometry();
            let coverage = (0..geom.rank())
                .map(|a| geom.coordinate(a, 0).abs().min(geom.coordinate(a, geom.extents()[a] - 1).abs()))
                .fold(f64::INFINITY, f64::min);
            (log_derivative_field(g, geom, options.exclusion)?, coverage)
        }
        _ => {
            let n = options.samples_per_axis.max(3) | 1;
            let h = 2.0 * r_max / (n - 1) as f64;
            // one extra ring of cells so boundary cells of the largest ball exist
            let geom = GridGeometry::centered(2, n / 2 + 1, h)?;
            (log_derivative_field(g, &geom, options.exclusion)?, f64::INFINITY)
        }
    };
    if r_max > coverage * (1.0 + 1e-12) {
        return Err(EntireError::BeyondCoverage { radius: r_max, coverage });
    }
    let geom = &field.geometry;
    let modulus = field.modulus();
    let vol = geom.cell_volume();
    let analytic = !matches!(g, EntireFunction::LiftedGabor(_));
    let half_diag = 0.5 * geom.spacing().iter().map(|h| h * h).sum::<f64>().sqrt();
    let mut point = vec![0.0; geom.rank()];
    let mut norms = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut acc = NeumaierSum::new();
        for i in 0..geom.len() {
            if field.excluded[i] {
                continue;
            }
            geom.point(i, &mut point);
            let rho = point.iter().map(|x| x * x).sum::<f64>().sqrt();
            let weight = if !analytic {
                if rho <= r { 1.0 } else { 0.0 }
            } else if rho + half_diag <= r {
                1.0
            } else if rho - half_diag > r {
                0.0
            } else {
                coverage_fraction(&point, geom.spacing(), r, options.coverage_subsamples)
            };
            if weight > 0.0 {
                acc.add(weight * abs_pow(modulus[i], p));
            }
        }
        norms.push((acc.total() * vol).powf(1.0 / p));
    }
    let excluded_cells = {
        let mut count = 0;
        for i in 0..geom.len() {
            geom.point(i, &mut point);
            if field.excluded[i] && point.iter().map(|x| x * x).sum::<f64>() <= r_max * r_max {
                count += 1;
            }
        }
        count
    };
    let logs: Vec<(f64, f64)> = radii
        .iter()
        .zip(&norms)
        .filter(|(_, &n)| n > 0.0)
        .map(|(&r, &n)| (r.ln(), n.ln()))
        .collect();
    let slopes_so_far = (0..radii.len())
        .map(|i| {
            let upto: Vec<&(f64, f64)> = logs.iter().filter(|(lr, _)| *lr <= radii[i].ln()).collect();
            let xs: Vec<f64> = upto.iter().map(|t| t.0).collect();
            let ys: Vec<f64> = upto.iter().map(|t| t.1).collect();
            fit_line(&xs, &ys).map(|(s, _)| s)
        })
        .collect();
    let xs: Vec<f64> = logs.iter().map(|t| t.0).collect();
    let ys: Vec<f64> = logs.iter().map(|t| t.1).collect();
    let (fitted_slope, fitted_constant) = fit_line(&xs, &ys).unwrap_or((0.0, f64::NEG_INFINITY));
    let bounds = class.map(|c| radii.iter().map(|&r| c.ball_norm_shape(d, r)).collect());
    Ok(BallNormTable {
        p,
        d,
        radii: radii.to_vec(),
        norms,
        bounds,
        slopes_so_far,
        fitted_slope,
        fitted_constant,
        excluded_cells,
    })
}

/// Fraction of the cell centred at `centre` that lies in the closed ball of radius `r`.
fn coverage_fraction(centre: &[f64], spacing: &[f64], r: f64, subsamples: usize) -> f64 {
    let s = subsamples.max(1);
    let (hx, hy) = (spacing[0], spacing[1]);
    let mut inside = 0usize;
    for a in 0..s {
        let x = centre[0] + hx * ((a as f64 + 0.5) / s as f64 - 0.5);
        for b in 0..s {
            let y = centre[1] + hy * ((b as f64 + 0.5) / s as f64 - 0.5);
            if x * x + y * y <= r * r {
                inside += 1;
            }
        }
    }
    inside as f64 / (s * s) as f64
}
