//! Norms of spectrogram differences on a phase-space domain.

use serde::Serialize;

use super::StabilityError;
use crate::gabor::Spectrogram;
use crate::grid::{masked_gradient, GridError, GridGeometry};
use crate::numeric::{abs_pow, lp_norm, NeumaierSum};

/// Cells where `S_1 ≤ LOGDERIV_FLOOR · max S_1` are left out of the
/// log-derivative term.
pub const LOGDERIV_FLOOR: f64 = 1e-12;

/// Largest admissible `p` (exclusive): `1 + 1/(2d − 1)`.
pub fn p_limit(d: usize) -> f64 {
    1.0 + 1.0 / (2.0 * d as f64 - 1.0)
}

/// Lower bound (exclusive) on `q`: `p / (1 − p(2d − 1)/(2d))`.
pub fn q_lower_bound(p: f64, d: usize) -> f64 {
    let d = d as f64;
    let denom = 1.0 - p * (2.0 * d - 1.0) / (2.0 * d);
    if denom > 0.0 {
        p / denom
    } else {
        f64::INFINITY
    }
}

/// `1 ≤ p < 1 + 1/(2d − 1)` and `p/(1 − p(2d − 1)/(2d)) < q < ∞`.
pub fn check_admissible(p: f64, q: f64, d: usize) -> Result<(), StabilityError> {
    if !(1..=2).contains(&d) {
        return Err(StabilityError::UnsupportedDimension(d));
    }
    let limit = p_limit(d);
    if !(p >= 1.0 && p < limit) {
        return Err(StabilityError::InadmissibleP { p, d, limit });
    }
    let bound = q_lower_bound(p, d);
    if !(q.is_finite() && q > bound) {
        return Err(StabilityError::InadmissibleQ { p, q, d, bound });
    }
    Ok(())
}

pub(crate) fn check_exponent(p: f64) -> Result<(), StabilityError> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(StabilityError::InvalidExponent(p))
    }
}

pub(crate) fn check_mask(geometry: &GridGeometry, mask: Option<&[bool]>) -> Result<(), StabilityError> {
    match mask {
        Some(m) if m.len() != geometry.len() => {
            Err(GridError::LengthMismatch { expected: geometry.len(), found: m.len() }.into())
        }
        _ => Ok(()),
    }
}

fn difference(s1: &Spectrogram, s2: &Spectrogram) -> Result<Vec<f64>, StabilityError> {
    s1.geometry().same_as(s2.geometry())?;
    Ok(s1.values().iter().zip(s2.values()).map(|(a, b)| a - b).collect())
}

/// `‖F‖_{L^p}` and `‖∇F‖_{L^p}` of a real field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SobolevParts {
    pub value: f64,
    pub gradient: f64,
}

impl SobolevParts {
    pub fn total(&self) -> f64 {
        self.value + self.gradient
    }
}

/// Sobolev parts of a real field; gradients by central differences,
/// one-sided next to the edge of `mask`.
pub fn field_sobolev(values: &[f64], geometry: &GridGeometry, p: f64, mask: Option<&[bool]>) -> Result<SobolevParts, StabilityError> {
    check_exponent(p)?;
    check_mask(geometry, mask)?;
    let vol = geometry.cell_volume();
    let grad = masked_gradient(values, geometry, mask);
    let magnitude: Vec<f64> = (0..values.len()).map(|i| grad.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt()).collect();
    Ok(SobolevParts { value: lp_norm(values, p, vol, mask), gradient: lp_norm(&magnitude, p, vol, mask) })
}

/// `‖(1 + |z − z_0|^{2d+2}) F‖_{L^q}` of a real field on a rank-`2d` grid.
pub fn field_weighted_lq(values: &[f64], geometry: &GridGeometry, q: f64, z0: &[f64], mask: Option<&[bool]>) -> Result<f64, StabilityError> {
    check_exponent(q)?;
    check_mask(geometry, mask)?;
    let d = geometry.phase_dimension()?;
    if z0.len() != geometry.rank() {
        return Err(GridError::RankMismatch { expected: geometry.rank(), found: z0.len() }.into());
    }
    let power = (2 * d + 2) as i32;
    let mut z = vec![0.0; geometry.rank()];
    let mut acc = NeumaierSum::new();
    for (i, &v) in values.iter().enumerate() {
        if mask.map_or(true, |m| m[i]) {
            geometry.point(i, &mut z);
            let r2: f64 = z.iter().zip(z0).map(|(a, b)| (a - b) * (a - b)).sum();
            let weight = 1.0 + r2.sqrt().powi(power);
            acc.add(abs_pow(weight * v, q));
        }
    }
    Ok((acc.total() * geometry.cell_volume()).powf(1.0 / q))
}

pub fn sobolev_parts(s1: &Spectrogram, s2: &Spectrogram, p: f64, mask: Option<&[bool]>) -> Result<SobolevParts, StabilityError> {
    field_sobolev(&difference(s1, s2)?, s1.geometry(), p, mask)
}

/// `‖S_1 − S_2‖_{W^{1,p}} = ‖ΔS‖_{L^p} + ‖∇ΔS‖_{L^p}`.
pub fn sobolev_diff_norm(s1: &Spectrogram, s2: &Spectrogram, p: f64, mask: Option<&[bool]>) -> Result<f64, StabilityError> {
    Ok(sobolev_parts(s1, s2, p, mask)?.total())
}

/// `‖(1 + |z − z_0|^{2d+2})(S_1 − S_2)‖_{L^q}` after checking that `(p, q)`
/// is admissible in dimension `d`.
pub fn weighted_lq_diff_norm(
    s1: &Spectrogram,
    s2: &Spectrogram,
    p: f64,
    q: f64,
    z0: &[f64],
    mask: Option<&[bool]>,
) -> Result<f64, StabilityError> {
    check_admissible(p, q, s1.geometry().phase_dimension()?)?;
    field_weighted_lq(&difference(s1, s2)?, s1.geometry(), q, z0, mask)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogDerivTerm {
    pub value: f64,
    /// Active cells skipped because `S_1` is too small there.
    pub excluded_cells: usize,
}

/// `‖(∇S_1/S_1)(S_1 − S_2)‖_{L^p}` over the cells of `mask` where
/// `S_1 > LOGDERIV_FLOOR · max S_1`.
pub fn logderiv_term(s1: &Spectrogram, s2: &Spectrogram, p: f64, mask: Option<&[bool]>) -> Result<LogDerivTerm, StabilityError> {
    check_exponent(p)?;
    check_mask(s1.geometry(), mask)?;
    let diff = difference(s1, s2)?;
    let values = s1.values();
    let floor = LOGDERIV_FLOOR * s1.max_value();
    let grad = masked_gradient(values, s1.geometry(), mask);
    let mut excluded = 0;
    let mut acc = NeumaierSum::new();
    for i in 0..values.len() {
        if !mask.map_or(true, |m| m[i]) {
            continue;
        }
        if values[i] <= floor {
            excluded += 1;
            continue;
        }
        let g = grad.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt();
        acc.add(abs_pow(g / values[i] * diff[i], p));
    }
    let value = (acc.total() * s1.geometry().cell_volume()).powf(1.0 / p);
    Ok(LogDerivTerm { value, excluded_cells: excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_boundaries() {
        assert!(check_admissible(1.0, 3.0, 1).is_ok());
        assert!(check_admissible(1.0, 2.0, 1).is_err());
        assert!(check_admissible(2.0, 100.0, 1).is_err());
        assert_eq!(q_lower_bound(1.0, 1), 2.0);
        assert!((p_limit(2) - 4.0 / 3.0).abs() < 1e-15);
        assert!(check_admissible(1.0, f64::INFINITY, 1).is_err());
        assert!(matches!(check_admissible(1.0, 3.0, 3), Err(StabilityError::UnsupportedDimension(3))));
    }
}
