//! Analytic test signals with closed-form Gabor transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridError, GridGeometry, SignalGrid};

/// One time-frequency shifted Gaussian `e^{2πi b·t} e^{-π|t-a|²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub frequency: Vec<f64>,
}

impl Bump {
    pub fn new(center: Vec<f64>, frequency: Vec<f64>) -> Self {
        Self { center, frequency }
    }

    /// Time shift only.
    pub fn at(center: Vec<f64>) -> Self {
        let d = center.len();
        Self { center, frequency: vec![0.0; d] }
    }

    fn validate(&self) -> Result<(), GridError> {
        if self.center.is_empty() || self.center.len() != self.frequency.len() {
            return Err(GridError::InvalidSignal(
                "center and frequency must be non-empty and of equal length".into(),
            ));
        }
        if self.center.iter().chain(&self.frequency).any(|v| !v.is_finite()) {
            return Err(GridError::InvalidSignal("non-finite bump parameter".into()));
        }
        Ok(())
    }

    fn eval(&self, t: &[f64]) -> Complex64 {
        let mut dist2 = 0.0;
        let mut phase = 0.0;
        for ((&ti, &a), &b) in t.iter().zip(&self.center).zip(&self.frequency) {
            dist2 += (ti - a) * (ti - a);
            phase += b * ti;
        }
        Complex64::from_polar((-PI * dist2).exp(), 2.0 * PI * phase)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalyticSignalSpec {
    /// `e^{-π|t|²}` on `R^dim`.
    Gaussian { dim: usize },
    ShiftedGaussian { bump: Bump },
    /// `f_1 + sign·f_2` with `sign ∈ {+1, -1}`.
    TwoBump { first: Bump, second: Bump, sign: f64 },
}

impl AnalyticSignalSpec {
    pub fn dimension(&self) -> usize {
        match self {
            AnalyticSignalSpec::Gaussian { dim } => *dim,
            AnalyticSignalSpec::ShiftedGaussian { bump } => bump.center.len(),
            AnalyticSignalSpec::TwoBump { first, .. } => first.center.len(),
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        match self {
            AnalyticSignalSpec::Gaussian { dim } => {
                if *dim == 0 {
                    return Err(GridError::InvalidSignal("dimension must be positive".into()));
                }
            }
            AnalyticSignalSpec::ShiftedGaussian { bump } => bump.validate()?,
            AnalyticSignalSpec::TwoBump { first, second, sign } => {
                first.validate()?;
                second.validate()?;
                if first.center.len() != second.center.len() {
                    return Err(GridError::InvalidSignal("bumps differ in dimension".into()));
                }
                if *sign != 1.0 && *sign != -1.0 {
                    return Err(GridError::InvalidSignal(format!("sign {sign} is not ±1")));
                }
                // f_1 - f_1 vanishes identically; f_1 + f_1 is allowed (it is 2 f_1)
                if *sign == -1.0 && first == second {
                    return Err(GridError::InvalidSignal(
                        "coincident two-bump centers with sign -1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Pointwise value of the signal at `t`.
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        match self {
            AnalyticSignalSpec::Gaussian { .. } => {
                let r2: f64 = t.iter().map(|x| x * x).sum();
                Complex64::new((-PI * r2).exp(), 0.0)
            }
            AnalyticSignalSpec::ShiftedGaussian { bump } => bump.eval(t),
            AnalyticSignalSpec::TwoBump { first, second, sign } => {
                first.eval(t) + second.eval(t) * *sign
            }
        }
    }
}

/// Samples of `e^{-π|t|²}`.
pub fn make_gaussian(d: usize, geometry: &GridGeometry) -> Result<SignalGrid, GridError> {
    make_analytic(&AnalyticSignalSpec::Gaussian { dim: d }, geometry)
}

pub fn make_analytic(spec: &AnalyticSignalSpec, geometry: &GridGeometry) -> Result<SignalGrid, GridError> {
    spec.validate()?;
    geometry.require_rank(spec.dimension())?;
    SignalGrid::from_fn(geometry.clone(), |t| spec.eval(t))
}

/// Tensor-product Hermite function `∏_k h_{n_k}(t_k)` adapted to the window
/// `e^{-πt²}`, normalised in `L²`:
/// `h_n(t) = 2^{1/4} (2^n n!)^{-1/2} H_n(√(2π) t) e^{-πt²}`.
pub fn make_hermite(orders: &[usize], geometry: &GridGeometry) -> Result<SignalGrid, GridError> {
    if orders.is_empty() {
        return Err(GridError::InvalidSignal("need at least one order".into()));
    }
    geometry.require_rank(orders.len())?;
    SignalGrid::from_fn(geometry.clone(), |t| {
        let v: f64 = t.iter().zip(orders).map(|(&x, &n)| hermite_function(n, x)).product();
        Complex64::new(v, 0.0)
    })
}

fn hermite_function(n: usize, t: f64) -> f64 {
    let s = (2.0 * PI).sqrt() * t;
    // normalised recurrence keeps magnitudes O(1) for moderate n
    // ψ_k = H_k(s) / sqrt(2^k k!)
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = (2.0 * s * cur - (2.0 * k as f64).sqrt() * prev) / (2.0 * (k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    2f64.powf(0.25) * cur * (-PI * t * t).exp()
}
