//! Both sides of the phase retrieval stability estimates on concrete pairs.
//!
//! The left side is the phase-aligned distance `inf_{|a|=1} ‖Gg − a·Gf‖_{L^p(Ω)}`.
//! The right sides combine the Cheeger constant of `|Gf|^p` on `Ω` with
//! Sobolev, weighted `L^q` and log-derivative norms of `|Gf| − |Gg|`.

mod align;
mod norms;

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheeger::{exhaustive_cheeger_oracle, sweep_cut_cheeger, CheegerError, CheegerOptions, WeightGrid};
use crate::gabor::{gabor_transform, spectrogram, GaborError, Spectrogram, SIGNAL_DECAY_TOLERANCE};
use crate::grid::{make_analytic, AnalyticSignalSpec, Bump, DomainPartition, GridError, GridGeometry, PhaseSpaceGrid, SignalGrid};

pub use align::{
    align_phase_global, align_phase_multicomponent, align_phase_search, aligned_residual, AlignmentMethod, MultiAlignment,
    PhaseAlignment, ANGLE_TOLERANCE, SCAN_POINTS,
};
pub use norms::{
    check_admissible, field_sobolev, field_weighted_lq, logderiv_term, p_limit, q_lower_bound, sobolev_diff_norm,
    sobolev_parts, weighted_lq_diff_norm, LogDerivTerm, SobolevParts, LOGDERIV_FLOOR,
};

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Gabor(#[from] GaborError),
    #[error(transparent)]
    Cheeger(#[from] CheegerError),
    #[error("exponent must be finite and at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("p = {p} is not in [1, {limit}) for d = {d}")]
    InadmissibleP { p: f64, d: usize, limit: f64 },
    #[error("q = {q} must be finite and exceed {bound} for p = {p}, d = {d}")]
    InadmissibleQ { p: f64, q: f64, d: usize, bound: f64 },
    #[error("this bound needs 1 <= p <= 2, got {0}")]
    PoincareRange(f64),
    #[error("only d = 1 and d = 2 are supported, got {0}")]
    UnsupportedDimension(usize),
    #[error("separation must be positive and finite, got {0}")]
    InvalidSeparation(f64),
    #[error("signal reaches {0:.3e} of its maximum on the grid boundary")]
    SignalNotContained(f64),
    #[error("spectrogram of f vanishes on the domain")]
    DegenerateSignal,
}

/// `f_± = φ(· + (T/2)e_1) ± φ(· − (T/2)e_1)` with `φ` the standard Gaussian.
///
/// Fails when either signal is not small on the boundary of `geometry`.
pub fn make_instability_pair(d: usize, t: f64, geometry: &GridGeometry) -> Result<(SignalGrid, SignalGrid), StabilityError> {
    if !(1..=2).contains(&d) {
        return Err(StabilityError::UnsupportedDimension(d));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(StabilityError::InvalidSeparation(t));
    }
    geometry.require_rank(d)?;
    let mut left = vec![0.0; d];
    let mut right = vec![0.0; d];
    left[0] = -t / 2.0;
    right[0] = t / 2.0;
    let pair = |sign: f64| -> Result<SignalGrid, StabilityError> {
        let spec = AnalyticSignalSpec::TwoBump { first: Bump::at(left.clone()), second: Bump::at(right.clone()), sign };
        Ok(make_analytic(&spec, geometry)?)
    };
    let plus = pair(1.0)?;
    let edge = plus.boundary_max_abs() / plus.max_abs();
    if edge > SIGNAL_DECAY_TOLERANCE {
        return Err(StabilityError::SignalNotContained(edge));
    }
    Ok((plus, pair(-1.0)?))
}

/// Generator of a real perturbation field `γ` on phase space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseSpec {
    /// `amplitude · e^{−|z − centre|²/(2·width²)}`.
    Bump { amplitude: f64, width: f64, center: Vec<f64> },
    /// `amplitude/√modes · Σ_k cos(2π ω_k·z + φ_k)`, with `ω_k` uniform in
    /// `[−max_frequency, max_frequency]^{2d}` and `φ_k` uniform, drawn from `seed`.
    BandLimited { amplitude: f64, modes: usize, max_frequency: f64, seed: u64 },
}

impl NoiseSpec {
    pub fn field(&self, geometry: &GridGeometry) -> Result<Vec<f64>, StabilityError> {
        let rank = geometry.rank();
        let mut z = vec![0.0; rank];
        match self {
            NoiseSpec::Bump { amplitude, width, center } => {
                if center.len() != rank {
                    return Err(GridError::RankMismatch { expected: rank, found: center.len() }.into());
                }
                Ok((0..geometry.len())
                    .map(|i| {
                        geometry.point(i, &mut z);
                        let r2: f64 = z.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                        amplitude * (-r2 / (2.0 * width * width)).exp()
                    })
                    .collect())
            }
            NoiseSpec::BandLimited { amplitude, modes, max_frequency, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let waves: Vec<(Vec<f64>, f64)> = (0..*modes)
                    .map(|_| {
                        let k = (0..rank).map(|_| rng.gen_range(-max_frequency..=*max_frequency)).collect();
                        (k, rng.gen_range(0.0..2.0 * PI))
                    })
                    .collect();
                let scale = amplitude / (*modes as f64).sqrt().max(1.0);
                Ok((0..geometry.len())
                    .map(|i| {
                        geometry.point(i, &mut z);
                        let s: f64 = waves
                            .iter()
                            .map(|(k, phi)| (2.0 * PI * k.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + phi).cos())
                            .sum();
                        scale * s
                    })
                    .collect())
            }
        }
    }
}

/// `‖F‖_D = ‖F‖_{W^{1,p}(Ω)} + ‖(1 + |· − z_0|^{2d+2}) F‖_{L^q(Ω)}`.
pub fn dnorm(
    field: &[f64],
    geometry: &GridGeometry,
    p: f64,
    q: f64,
    z0: &[f64],
    mask: Option<&[bool]>,
) -> Result<f64, StabilityError> {
    check_admissible(p, q, geometry.phase_dimension()?)?;
    if field.len() != geometry.len() {
        return Err(GridError::LengthMismatch { expected: geometry.len(), found: field.len() }.into());
    }
    Ok(field_sobolev(field, geometry, p, mask)?.total() + field_weighted_lq(field, geometry, q, z0, mask)?)
}

/// `2^{3/2} · 8 = 2^{9/2}`: the factor in front of `h^{-1}` once `C_P ≤ 8/h`.
pub const COROLLARY_FACTOR: f64 = 22.627416997969522;

/// `‖ΔS‖_p + 2^{9/2} h^{-1} (‖∇ΔS‖_p + log-derivative term)`; `+∞` when `h = 0`.
pub fn corollary_bound(value: f64, gradient: f64, logderiv: f64, h: f64) -> f64 {
    if h > 0.0 {
        value + COROLLARY_FACTOR / h * (gradient + logderiv)
    } else {
        f64::INFINITY
    }
}

/// Settings shared by the report builders.
#[derive(Clone, Debug)]
pub struct StabilityOptions {
    /// `Ω = {|Gf| > mask_threshold · max |Gf|}` unless a partition is given.
    pub mask_threshold: f64,
    pub cheeger: CheegerOptions,
    /// When set, `h` comes from the exhaustive oracle on the weight
    /// averaged over this many blocks per axis.
    pub oracle_blocks: Option<Vec<usize>>,
    /// Domain split; its active cells replace the default `Ω`.
    pub partition: Option<DomainPartition>,
    pub noise: Option<NoiseSpec>,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { mask_threshold: 1e-9, cheeger: CheegerOptions::default(), oracle_blocks: None, partition: None, noise: None }
    }
}

/// Cells where the spectrogram exceeds `threshold` times its maximum.
pub fn default_domain(s: &Spectrogram, threshold: f64) -> Vec<bool> {
    let floor = threshold * s.max_value();
    s.values().iter().map(|&v| v > floor).collect()
}

/// Cheeger data of `|Gf|^p` on a domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheegerTerms {
    pub h_upper: f64,
    pub h_oracle: Option<f64>,
    /// `h_oracle` when present, else `h_upper`.
    pub h: f64,
}

fn cheeger_terms(s: &Spectrogram, p: f64, mask: &[bool], options: &StabilityOptions) -> Result<CheegerTerms, StabilityError> {
    let w = WeightGrid::from_spectrogram(s, p, Some(mask.to_vec()))?;
    let est = sweep_cut_cheeger(&w, &options.cheeger)?;
    let h_oracle = match &options.oracle_blocks {
        Some(blocks) => Some(exhaustive_cheeger_oracle(&w.coarsen(blocks)?)?),
        None => est.h_oracle,
    };
    Ok(CheegerTerms { h_upper: est.h_upper, h_oracle, h: h_oracle.unwrap_or(est.h_upper) })
}

struct Prepared {
    sf: Spectrogram,
    sg: Spectrogram,
    mask: Vec<bool>,
    z0: Vec<f64>,
    d: usize,
}

fn prepare(gf: &PhaseSpaceGrid, gg: &PhaseSpaceGrid, options: &StabilityOptions) -> Result<Prepared, StabilityError> {
    gf.geometry().same_as(gg.geometry())?;
    let d = gf.geometry().phase_dimension()?;
    let sf = spectrogram(gf);
    if sf.max_value() == 0.0 {
        return Err(StabilityError::DegenerateSignal);
    }
    let mask = match &options.partition {
        Some(part) => {
            part.geometry().same_as(gf.geometry())?;
            part.active_mask()
        }
        None => default_domain(&sf, options.mask_threshold),
    };
    if !mask.iter().zip(sf.values()).any(|(&m, &v)| m && v > 0.0) {
        return Err(StabilityError::DegenerateSignal);
    }
    let z0 = sf.argmax_location().to_vec();
    Ok(Prepared { sg: spectrogram(gg), sf, mask, z0, d })
}

/// Terms of the first stability estimate, valid for `1 ≤ p ≤ 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub p: f64,
    pub d: usize,
    pub lhs: f64,
    #[serde(flatten)]
    pub cheeger: CheegerTerms,
    pub value_term: f64,
    pub gradient_term: f64,
    pub logderiv_term: f64,
    pub logderiv_excluded: usize,
    pub rhs_thm23: f64,
    /// `lhs / rhs_thm23`.
    pub slack: f64,
    pub active_cells: usize,
}

pub fn corollary_report(
    gf: &PhaseSpaceGrid,
    gg: &PhaseSpaceGrid,
    p: f64,
    options: &StabilityOptions,
) -> Result<CorollaryReport, StabilityError> {
    if !(1.0..=2.0).contains(&p) {
        return Err(StabilityError::PoincareRange(p));
    }
    let prep = prepare(gf, gg, options)?;
    let mask = Some(prep.mask.as_slice());
    let lhs = align_phase_global(gf, gg, p, mask)?.residual;
    let parts = sobolev_parts(&prep.sf, &prep.sg, p, mask)?;
    let ld = logderiv_term(&prep.sf, &prep.sg, p, mask)?;
    let cheeger = cheeger_terms(&prep.sf, p, &prep.mask, options)?;
    let rhs = corollary_bound(parts.value, parts.gradient, ld.value, cheeger.h);
    Ok(CorollaryReport {
        p,
        d: prep.d,
        lhs,
        cheeger,
        value_term: parts.value,
        gradient_term: parts.gradient,
        logderiv_term: ld.value,
        logderiv_excluded: ld.excluded_cells,
        rhs_thm23: rhs,
        slack: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        active_cells: prep.mask.iter().filter(|&&m| m).count(),
    })
}

/// Componentwise alignment and the matching right side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MulticomponentTerms {
    pub lhs: f64,
    pub alignments: Vec<PhaseAlignment>,
    pub h_components: Vec<f64>,
    /// `(1 + max_i h_i^{-1}) · (sobolev_term + weighted_term)`.
    pub rhs_shape: f64,
}

/// Noise terms: `ε = ‖|Gf| + γ − |Gg|‖_D`, `‖γ‖_D` and `(1 + h^{-1})(ε + ‖γ‖_D)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseTerms {
    pub epsilon: f64,
    pub gamma_dnorm: f64,
    pub bound_shape: f64,
}

/// All scalar terms of the main stability estimate for one pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub p: f64,
    pub q: f64,
    pub d: usize,
    pub lhs: f64,
    #[serde(flatten)]
    pub cheeger: CheegerTerms,
    pub value_term: f64,
    pub gradient_term: f64,
    pub sobolev_term: f64,
    pub weighted_term: f64,
    pub logderiv_term: f64,
    pub logderiv_excluded: usize,
    pub rhs_thm23: f64,
    /// `(1 + h^{-1}) · (sobolev_term + weighted_term)`.
    pub rhs_thm44_shape: f64,
    /// `lhs / rhs_thm44_shape`.
    pub ratio: f64,
    /// `lhs / (sobolev_term + weighted_term)`.
    pub empirical_ratio: f64,
    pub z0: Vec<f64>,
    pub active_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multicomponent: Option<MulticomponentTerms>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseTerms>,
}

fn quotient(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn inverse_or_inf(h: f64) -> f64 {
    if h > 0.0 {
        1.0 / h
    } else {
        f64::INFINITY
    }
}

/// Report built from transforms already on a common phase-space grid.
pub fn stability_report_from_transforms(
    gf: &PhaseSpaceGrid,
    gg: &PhaseSpaceGrid,
    p: f64,
    q: f64,
    options: &StabilityOptions,
) -> Result<StabilityReport, StabilityError> {
    check_admissible(p, q, gf.geometry().phase_dimension()?)?;
    let prep = prepare(gf, gg, options)?;
    let geometry = prep.sf.geometry().clone();
    let mask = Some(prep.mask.as_slice());
    let lhs = align_phase_global(gf, gg, p, mask)?.residual;
    let parts = sobolev_parts(&prep.sf, &prep.sg, p, mask)?;
    let weighted = weighted_lq_diff_norm(&prep.sf, &prep.sg, p, q, &prep.z0, mask)?;
    let ld = logderiv_term(&prep.sf, &prep.sg, p, mask)?;
    let cheeger = cheeger_terms(&prep.sf, p, &prep.mask, options)?;
    let shape = parts.total() + weighted;
    let rhs44 = (1.0 + inverse_or_inf(cheeger.h)) * shape;

    let multicomponent = match &options.partition {
        Some(part) if part.component_count() > 1 => {
            let aligned = align_phase_multicomponent(gf, gg, p, part)?;
            let h_components = (0..part.component_count())
                .map(|k| cheeger_terms(&prep.sf, p, &part.component_mask(k), options).map(|c| c.h))
                .collect::<Result<Vec<_>, _>>()?;
            let worst = h_components.iter().map(|&h| inverse_or_inf(h)).fold(0.0, f64::max);
            Some(MulticomponentTerms {
                lhs: aligned.total_residual,
                alignments: aligned.components,
                h_components,
                rhs_shape: (1.0 + worst) * shape,
            })
        }
        _ => None,
    };

    let noise = match &options.noise {
        Some(spec) => {
            let gamma = spec.field(&geometry)?;
            let measured: Vec<f64> =
                prep.sf.values().iter().zip(&gamma).zip(prep.sg.values()).map(|((f, g), s)| f + g - s).collect();
            let epsilon = dnorm(&measured, &geometry, p, q, &prep.z0, mask)?;
            let gamma_dnorm = dnorm(&gamma, &geometry, p, q, &prep.z0, mask)?;
            Some(NoiseTerms { epsilon, gamma_dnorm, bound_shape: (1.0 + inverse_or_inf(cheeger.h)) * (epsilon + gamma_dnorm) })
        }
        None => None,
    };

    Ok(StabilityReport {
        p,
        q,
        d: prep.d,
        lhs,
        cheeger,
        value_term: parts.value,
        gradient_term: parts.gradient,
        sobolev_term: parts.total(),
        weighted_term: weighted,
        logderiv_term: ld.value,
        logderiv_excluded: ld.excluded_cells,
        rhs_thm23: corollary_bound(parts.value, parts.gradient, ld.value, cheeger.h),
        rhs_thm44_shape: rhs44,
        ratio: quotient(lhs, rhs44),
        empirical_ratio: quotient(lhs, shape),
        z0: prep.z0,
        active_cells: prep.mask.iter().filter(|&&m| m).count(),
        multicomponent,
        noise,
    })
}

/// Transform `f` and `g` onto `phase` and report every term.
pub fn stability_report(
    f: &SignalGrid,
    g: &SignalGrid,
    phase: &GridGeometry,
    p: f64,
    q: f64,
    options: &StabilityOptions,
) -> Result<StabilityReport, StabilityError> {
    check_admissible(p, q, phase.phase_dimension()?)?;
    let gf = gabor_transform(f, phase)?;
    let gg = gabor_transform(g, phase)?;
    stability_report_from_transforms(&gf, &gg, p, q, options)
}

/// One row of an instability sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub report: StabilityReport,
}

/// Reports for the instability pair `(f_+, f_−)` at every separation in `ts`.
pub fn instability_sweep(
    d: usize,
    ts: &[f64],
    signal: &GridGeometry,
    phase: &GridGeometry,
    p: f64,
    q: f64,
    options: &StabilityOptions,
) -> Result<Vec<SweepRow>, StabilityError> {
    check_admissible(p, q, d)?;
    ts.iter()
        .map(|&t| {
            let (plus, minus) = make_instability_pair(d, t, signal)?;
            Ok(SweepRow { t, report: stability_report(&plus, &minus, phase, p, q, options)? })
        })
        .collect()
}

/// Header of [`sweep_csv`].
pub const SWEEP_CSV_HEADER: &str = "T,h,lhs,sobolev,weighted,ratio";

/// One line per row; `ratio` is `lhs / (sobolev + weighted)`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for row in rows {
        let r = &row.report;
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            row.t, r.cheeger.h, r.lhs, r.sobolev_term, r.weighted_term, r.empirical_ratio
        );
    }
    out
}
