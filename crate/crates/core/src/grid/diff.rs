use std::ops::{Mul, Sub};

use super::GridGeometry;

/// Central difference along `axis` at `flat`; `None` on the faces of the box.
pub fn central_difference<T>(values: &[T], geometry: &GridGeometry, axis: usize, flat: usize) -> Option<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
{
    let stride = geometry.strides()[axis];
    let n = geometry.extents()[axis];
    let i = (flat / stride) % n;
    if i == 0 || i + 1 == n {
        return None;
    }
    let inv = 0.5 / geometry.spacing()[axis];
    Some((values[flat + stride] - values[flat - stride]) * inv)
}

/// Per-axis partial derivatives of a real field restricted to `mask`.
///
/// Central differences where both neighbours are active, one-sided where only
/// one is, zero for isolated cells. Inactive cells get zero.
pub fn masked_gradient(values: &[f64], geometry: &GridGeometry, mask: Option<&[bool]>) -> Vec<Vec<f64>> {
    let active = |i: usize| mask.map_or(true, |m| m[i]);
    let strides = geometry.strides();
    (0..geometry.rank())
        .map(|axis| {
            let stride = strides[axis];
            let n = geometry.extents()[axis];
            let h = geometry.spacing()[axis];
            (0..values.len())
                .map(|flat| {
                    if !active(flat) {
                        return 0.0;
                    }
                    let i = (flat / stride) % n;
                    let lo = (i > 0 && active(flat - stride)).then(|| flat - stride);
                    let hi = (i + 1 < n && active(flat + stride)).then(|| flat + stride);
                    match (lo, hi) {
                        (Some(l), Some(u)) => (values[u] - values[l]) / (2.0 * h),
                        (None, Some(u)) => (values[u] - values[flat]) / h,
                        (Some(l), None) => (values[flat] - values[l]) / h,
                        (None, None) => 0.0,
                    }
                })
                .collect()
        })
        .collect()
}
