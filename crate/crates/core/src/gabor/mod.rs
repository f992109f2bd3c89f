//! Gabor transform with the Gaussian window `e^{-π|t|²}`, spectrograms and
//! modulation-space norms.
//!
//! The transform is the Riemann sum of
//! `Gf(x, y) = ∫ f(t) e^{-π|t-x|²} e^{-2πi t·y} dt`
//! over the signal grid. For every `x` the windowed signal is sent through a
//! chirp-z transform along each signal axis, which evaluates the sum exactly
//! on an arbitrary uniform `y` grid. The factor `e^{-2πi t_0·y}` carrying the
//! signal origin `t_0` is applied to the output; it is the only place where
//! the absolute phase is fixed.

mod lift;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::grid::{DomainPartition, GridError, GridGeometry, PhaseSpaceGrid, RealGrid, SignalGrid};
use crate::numeric::lp_norm;

pub use lift::{entire_lift, gradient_identity_check, EntireLift, GradientIdentityReport};

#[derive(Debug, Error)]
pub enum GaborError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("phase-space axis {0} is not symmetric about zero")]
    AsymmetricAxis(usize),
    #[error("exponent p = {0} must be finite and at least 1")]
    InvalidExponent(f64),
    #[error("negative magnitude at sample {0}")]
    NegativeMagnitude(usize),
}

/// Relative boundary magnitude above which a signal is reported as truncated.
pub const SIGNAL_DECAY_TOLERANCE: f64 = 1e-12;
/// Relative boundary magnitude above which a phase-space field is reported as
/// not covering its essential support.
pub const PHASE_DECAY_TOLERANCE: f64 = 1e-9;

/// Chirp-z evaluation of `Δt Σ_n a_n e^{-2πi t_n y_m}` for uniform `t_n`, `y_m`.
struct AxisChirp {
    n: usize,
    m: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

#[inline]
fn chirp(alpha: f64, k: f64, sign: f64) -> Complex64 {
    // reduce α k² mod 2 before scaling by π to keep the phase accurate
    let phase = (alpha * k * k).rem_euclid(2.0);
    Complex64::from_polar(1.0, sign * PI * phase)
}

impl AxisChirp {
    fn new(planner: &mut FftPlanner<f64>, t0: f64, dt: f64, n: usize, y0: f64, dy: f64, m: usize) -> Self {
        let alpha = dt * dy;
        let len = (n + m - 1).next_power_of_two();
        let pre = (0..n)
            .map(|j| {
                let shift = (dt * y0 * j as f64).rem_euclid(1.0);
                Complex64::from_polar(1.0, -2.0 * PI * shift) * chirp(alpha, j as f64, -1.0)
            })
            .collect();
        let post = (0..m)
            .map(|k| {
                let y = y0 + dy * k as f64;
                let origin = (t0 * y).rem_euclid(1.0);
                Complex64::from_polar(dt / len as f64, -2.0 * PI * origin) * chirp(alpha, k as f64, -1.0)
            })
            .collect();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..m {
            kernel[k] = chirp(alpha, k as f64, 1.0);
        }
        for k in 1..n {
            kernel[len - k] = chirp(alpha, k as f64, 1.0);
        }
        forward.process(&mut kernel);
        Self { n, m, pre, post, kernel, forward, inverse }
    }

    fn len(&self) -> usize {
        self.kernel.len()
    }

    fn apply(&self, input: &[Complex64], output: &mut [Complex64], buf: &mut [Complex64]) {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = if j < self.n { input[j] * self.pre[j] } else { Complex64::new(0.0, 0.0) };
        }
        self.forward.process(buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inverse.process(buf);
        for (k, o) in output.iter_mut().enumerate().take(self.m) {
            *o = buf[k] * self.post[k];
        }
    }
}

/// Apply `plan` along `axis` of a row-major tensor, replacing that extent.
fn transform_axis(data: &[Complex64], shape: &mut [usize], axis: usize, plan: &AxisChirp) -> Vec<Complex64> {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let (n, m) = (plan.n, plan.m);
    let mut out = vec![Complex64::new(0.0, 0.0); outer * m * inner];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut res = vec![Complex64::new(0.0, 0.0); m];
    let mut buf = vec![Complex64::new(0.0, 0.0); plan.len()];
    for o in 0..outer {
        for i in 0..inner {
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[(o * n + j) * inner + i];
            }
            plan.apply(&line, &mut res, &mut buf);
            for (k, r) in res.iter().enumerate() {
                out[(o * m + k) * inner + i] = *r;
            }
        }
    }
    shape[axis] = m;
    out
}

/// Gabor transform of `f` sampled on `phase_geometry`, axes `(x_1, y_1, ..., x_d, y_d)`.
pub fn gabor_transform(f: &SignalGrid, phase_geometry: &GridGeometry) -> Result<PhaseSpaceGrid, GaborError> {
    let sg = f.geometry();
    let d = sg.rank();
    phase_geometry.require_rank(2 * d)?;
    let max = f.max_abs();
    let edge = f.boundary_max_abs();
    if edge > SIGNAL_DECAY_TOLERANCE * max {
        log::warn!("signal is {:.3e} of its maximum on the box boundary; Gabor transform is truncated", edge / max);
    }

    let mut planner = FftPlanner::new();
    let plans: Vec<AxisChirp> = (0..d)
        .map(|k| {
            AxisChirp::new(
                &mut planner,
                sg.origin()[k],
                sg.spacing()[k],
                sg.extents()[k],
                phase_geometry.origin()[2 * k + 1],
                phase_geometry.spacing()[2 * k + 1],
                phase_geometry.extents()[2 * k + 1],
            )
        })
        .collect();

    // windows[k][i][n] = e^{-π (t_n - x_i)²} along signal axis k
    let windows: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|k| {
            let ts = sg.axis_coordinates(k);
            phase_geometry
                .axis_coordinates(2 * k)
                .iter()
                .map(|&x| ts.iter().map(|&t| (-PI * (t - x) * (t - x)).exp()).collect())
                .collect()
        })
        .collect();

    let x_extents: Vec<usize> = (0..d).map(|k| phase_geometry.extents()[2 * k]).collect();
    let y_extents: Vec<usize> = (0..d).map(|k| phase_geometry.extents()[2 * k + 1]).collect();
    let x_count: usize = x_extents.iter().product();
    let samples = f.values();

    let slices: Vec<Vec<Complex64>> = (0..x_count)
        .into_par_iter()
        .map(|xi| {
            let mut xidx = vec![0; d];
            unravel(xi, &x_extents, &mut xidx);
            let mut tidx = vec![0; d];
            let mut data: Vec<Complex64> = samples
                .iter()
                .enumerate()
                .map(|(flat, &v)| {
                    unravel(flat, sg.extents(), &mut tidx);
                    let w: f64 = (0..d).map(|k| windows[k][xidx[k]][tidx[k]]).product();
                    v * w
                })
                .collect();
            let mut shape = sg.extents().to_vec();
            for (k, plan) in plans.iter().enumerate() {
                data = transform_axis(&data, &mut shape, k, plan);
            }
            data
        })
        .collect();

    let mut values = vec![Complex64::new(0.0, 0.0); phase_geometry.len()];
    let mut xidx = vec![0; d];
    let mut yidx = vec![0; d];
    let mut full = vec![0; 2 * d];
    for (xi, slice) in slices.iter().enumerate() {
        unravel(xi, &x_extents, &mut xidx);
        for (yi, v) in slice.iter().enumerate() {
            unravel(yi, &y_extents, &mut yidx);
            for k in 0..d {
                full[2 * k] = xidx[k];
                full[2 * k + 1] = yidx[k];
            }
            values[phase_geometry.ravel(&full)] = *v;
        }
    }
    Ok(PhaseSpaceGrid::new(phase_geometry.clone(), values)?)
}

fn unravel(mut flat: usize, extents: &[usize], out: &mut [usize]) {
    for a in (0..extents.len()).rev() {
        out[a] = flat % extents[a];
        flat /= extents[a];
    }
}

/// `|Gf|` on a phase-space grid together with its maximiser `z_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    grid: RealGrid,
    argmax_index: usize,
    argmax_location: Vec<f64>,
}

impl Spectrogram {
    /// Wrap a nonnegative real field.
    pub fn from_grid(grid: RealGrid) -> Result<Self, GaborError> {
        if let Some(i) = grid.values().iter().position(|&v| v < 0.0) {
            return Err(GaborError::NegativeMagnitude(i));
        }
        // first strict maximum wins, so ties go to the smallest row-major index
        let mut argmax_index = 0;
        for (i, &v) in grid.values().iter().enumerate() {
            if v > grid.values()[argmax_index] {
                argmax_index = i;
            }
        }
        let mut argmax_location = vec![0.0; grid.geometry().rank()];
        grid.geometry().point(argmax_index, &mut argmax_location);
        Ok(Self { grid, argmax_index, argmax_location })
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.grid.geometry()
    }

    pub fn values(&self) -> &[f64] {
        self.grid.values()
    }

    pub fn grid(&self) -> &RealGrid {
        &self.grid
    }

    pub fn argmax_index(&self) -> usize {
        self.argmax_index
    }

    pub fn argmax_location(&self) -> &[f64] {
        &self.argmax_location
    }

    pub fn max_value(&self) -> f64 {
        self.grid.values()[self.argmax_index]
    }

    /// Multiply by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, GaborError> {
        Self::from_grid(self.grid.map(|v| v * c))
    }
}

pub fn spectrogram(field: &PhaseSpaceGrid) -> Spectrogram {
    Spectrogram::from_grid(field.map(|v| v.norm())).expect("moduli are nonnegative")
}

/// `(Σ |F_i|^p · cell volume)^{1/p}` over the active cells of `mask`.
pub fn modulation_norm(field: &PhaseSpaceGrid, p: f64, mask: Option<&DomainPartition>) -> Result<f64, GaborError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(GaborError::InvalidExponent(p));
    }
    let active = match mask {
        Some(m) => {
            m.geometry().same_as(field.geometry())?;
            Some(m.active_mask())
        }
        None => None,
    };
    let max = field.max_abs();
    let edge = field.boundary_max_abs();
    if edge > PHASE_DECAY_TOLERANCE * max {
        log::warn!("phase-space field is {:.3e} of its maximum on the box boundary", edge / max);
    }
    let moduli: Vec<f64> = field.values().iter().map(|v| v.norm()).collect();
    Ok(lp_norm(&moduli, p, field.geometry().cell_volume(), active.as_deref()))
}
