//! Optimal global phase between two phase-space fields.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::StabilityError;
use crate::grid::{DomainPartition, PhaseSpaceGrid};
use crate::numeric::{abs_pow, NeumaierSum};

/// Coarse scan resolution of the angle search.
pub const SCAN_POINTS: usize = 64;
/// Final bracket width of the golden-section refinement.
pub const ANGLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentMethod {
    ClosedForm,
    Search,
}

/// `θ*` minimising `‖F_2 − e^{iθ} F_1‖_{L^p}` and the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseAlignment {
    pub theta_star: f64,
    pub residual: f64,
    pub method: AlignmentMethod,
}

fn check_inputs(f1: &PhaseSpaceGrid, f2: &PhaseSpaceGrid, p: f64, mask: Option<&[bool]>) -> Result<(), StabilityError> {
    f1.geometry().same_as(f2.geometry())?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(StabilityError::InvalidExponent(p));
    }
    if let Some(m) = mask {
        if m.len() != f1.len() {
            return Err(crate::grid::GridError::LengthMismatch { expected: f1.len(), found: m.len() }.into());
        }
    }
    Ok(())
}

/// `‖F_2 − e^{iθ} F_1‖_{L^p}` over the cells selected by `mask`.
pub fn aligned_residual(f1: &PhaseSpaceGrid, f2: &PhaseSpaceGrid, theta: f64, p: f64, mask: Option<&[bool]>) -> f64 {
    let a = Complex64::from_polar(1.0, theta);
    let mut acc = NeumaierSum::new();
    for (i, (u, v)) in f1.values().iter().zip(f2.values()).enumerate() {
        if mask.map_or(true, |m| m[i]) {
            acc.add(abs_pow((v - a * u).norm(), p));
        }
    }
    let total = acc.total() * f1.geometry().cell_volume();
    if p == 1.0 {
        total
    } else {
        total.powf(1.0 / p)
    }
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if TAU - t < 1e-9 {
        0.0
    } else {
        t
    }
}

/// Closed form for `p = 2`, angle search otherwise.
pub fn align_phase_global(
    f1: &PhaseSpaceGrid,
    f2: &PhaseSpaceGrid,
    p: f64,
    mask: Option<&[bool]>,
) -> Result<PhaseAlignment, StabilityError> {
    check_inputs(f1, f2, p, mask)?;
    if p != 2.0 {
        return align_phase_search(f1, f2, p, mask);
    }
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (i, (u, v)) in f1.values().iter().zip(f2.values()).enumerate() {
        if mask.map_or(true, |m| m[i]) {
            let c = v * u.conj();
            re.add(c.re);
            im.add(c.im);
        }
    }
    let inner = Complex64::new(re.total(), im.total());
    let theta = if inner.norm() == 0.0 { 0.0 } else { wrap(inner.arg()) };
    Ok(PhaseAlignment { theta_star: theta, residual: aligned_residual(f1, f2, theta, p, mask), method: AlignmentMethod::ClosedForm })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > ANGLE_TOLERANCE {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Coarse scan over [`SCAN_POINTS`] angles, then golden-section refinement
/// of every local minimum of the scan; the best refined angle wins.
pub fn align_phase_search(
    f1: &PhaseSpaceGrid,
    f2: &PhaseSpaceGrid,
    p: f64,
    mask: Option<&[bool]>,
) -> Result<PhaseAlignment, StabilityError> {
    check_inputs(f1, f2, p, mask)?;
    let objective = |t: f64| aligned_residual(f1, f2, t, p, mask);
    let step = TAU / SCAN_POINTS as f64;
    let scan: Vec<f64> = (0..SCAN_POINTS).map(|k| objective(k as f64 * step)).collect();
    let mut best = (0.0, scan[0]);
    for (k, &r) in scan.iter().enumerate() {
        if r < best.1 {
            best = (k as f64 * step, r);
        }
    }
    let (lo, hi) = scan.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo > 1e-15 * hi {
        for k in 0..SCAN_POINTS {
            let prev = scan[(k + SCAN_POINTS - 1) % SCAN_POINTS];
            let next = scan[(k + 1) % SCAN_POINTS];
            if scan[k] <= prev && scan[k] <= next {
                let centre = k as f64 * step;
                let (t, r) = golden_section(objective, centre - step, centre + step);
                if r < best.1 {
                    best = (t, r);
                }
            }
        }
    }
    let theta = wrap(best.0);
    Ok(PhaseAlignment { theta_star: theta, residual: objective(theta), method: AlignmentMethod::Search })
}

/// Independent alignments on each component of a partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiAlignment {
    pub components: Vec<PhaseAlignment>,
    /// `Σ_i residual_i`.
    pub total_residual: f64,
}

pub fn align_phase_multicomponent(
    f1: &PhaseSpaceGrid,
    f2: &PhaseSpaceGrid,
    p: f64,
    partition: &DomainPartition,
) -> Result<MultiAlignment, StabilityError> {
    partition.geometry().same_as(f1.geometry())?;
    let components = (0..partition.component_count())
        .map(|k| align_phase_global(f1, f2, p, Some(&partition.component_mask(k))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = NeumaierSum::new();
    total.extend(components.iter().map(|c| c.residual));
    Ok(MultiAlignment { components, total_residual: total.total() })
}
