use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gabor_stab::cheeger::{poincare_bound, sweep_cut_cheeger, CheegerError, WeightGrid};
use gabor_stab::entire::{growth_class_check, logderiv_ball_norms, EntireError, EntireFunction};
use gabor_stab::gabor::{entire_lift, gabor_transform, modulation_norm, spectrogram};
use gabor_stab::grid::{
    encode_grid, make_analytic, make_hermite, read_grid, DomainPartition, Grid, GridGeometry, GridValue, RealGrid,
    SignalGrid,
};
use gabor_stab::stability::{
    check_admissible, instability_sweep, stability_report, sweep_csv, StabilityError, StabilityOptions,
};
use gabor_stab::stability::NoiseSpec;
use gabor_stab::Error;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error as ThisError;

use crate::config::{
    CheegerConfig, EntireConfig, ExperimentConfig, FunctionConfig, GaborConfig, GenConfig, GeometryConfig, SignalConfig,
    StabilityConfig, WeightConfig,
};

/// Failure of a run, one variant per exit code.
#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("inadmissible parameters: {0}")]
    Admissibility(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Admissibility(_) => 3,
            Self::NonConvergence(_) => 4,
            Self::Io(_) => 5,
        }
    }
}

fn cheeger_kind(e: &CheegerError) -> fn(String) -> CliError {
    if matches!(e, CheegerError::NotConverged { .. }) {
        CliError::NonConvergence
    } else {
        CliError::Config
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        let kind: fn(String) -> CliError = match &e {
            Error::Format(_) => CliError::Io,
            Error::Cheeger(c) => cheeger_kind(c),
            Error::Entire(EntireError::RootsDidNotConverge(_)) => CliError::NonConvergence,
            Error::Entire(EntireError::InadmissibleExponent { .. }) => CliError::Admissibility,
            Error::Stability(s) => match s {
                StabilityError::InadmissibleP { .. }
                | StabilityError::InadmissibleQ { .. }
                | StabilityError::PoincareRange(_)
                | StabilityError::UnsupportedDimension(_) => CliError::Admissibility,
                StabilityError::Cheeger(c) => cheeger_kind(c),
                _ => CliError::Config,
            },
            _ => CliError::Config,
        };
        kind(msg)
    }
}

macro_rules! lib_err {
    ($e:expr) => {
        $e.map_err(|e| CliError::from(Error::from(e)))
    };
}

/// Where and how a configuration runs.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    /// Replaces every seed in the configuration when set.
    pub seed: Option<u64>,
}

/// Write `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_grid_file<T: GridValue>(path: &Path, grid: &Grid<T>) -> Result<(), CliError> {
    write_atomic(path, &encode_grid(grid))
}

fn geometry(g: &GeometryConfig) -> Result<GridGeometry, CliError> {
    lib_err!(GridGeometry::new(g.extents.clone(), g.spacing.clone(), g.origin.clone()))
}

fn load_signal(signal: &SignalConfig, geom: Option<&GeometryConfig>) -> Result<SignalGrid, CliError> {
    if let SignalConfig::File { path } = signal {
        let grid = read_grid(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return lib_err!(grid.into_complex());
    }
    let g = geometry(geom.ok_or_else(|| CliError::Config("signal_geometry is required for analytic signals".into()))?)?;
    match (signal, signal.analytic()) {
        (_, Some(spec)) => lib_err!(make_analytic(&spec, &g)),
        (SignalConfig::Hermite { orders }, None) => lib_err!(make_hermite(orders, &g)),
        _ => unreachable!("file signals return early"),
    }
}

#[derive(Serialize)]
struct GaborSummary {
    max_modulus: f64,
    argmax: Vec<f64>,
    p: f64,
    modulation_norm: f64,
}

#[derive(Serialize)]
struct CheegerRunSummary {
    #[serde(flatten)]
    estimate: gabor_stab::cheeger::CheegerSummary,
    active_cells: usize,
    disconnected: bool,
    poincare_bound: f64,
}

#[derive(Serialize)]
struct EntireSummary {
    p: f64,
    d: usize,
    fitted_slope: f64,
    fitted_constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class_member: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_margin: Option<f64>,
    excluded_cells: usize,
}

/// Run one configuration; returns the one-line summaries to print.
pub fn run_config(config: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<String>, CliError> {
    match config {
        ExperimentConfig::Gen(c) => run_gen(c, ctx),
        ExperimentConfig::Gabor(c) => run_gabor(c, ctx),
        ExperimentConfig::Cheeger(c) => run_cheeger(c, ctx),
        ExperimentConfig::Entire(c) => run_entire(c, ctx),
        ExperimentConfig::Stability(c) => run_stability(c, ctx),
    }
}

fn run_gen(c: &GenConfig, ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let f = load_signal(&c.signal, Some(&c.geometry))?;
    let path = ctx.out_dir.join(&c.output);
    write_grid_file(&path, &f)?;
    Ok(vec![format!("gen: {} samples -> {}", f.len(), path.display())])
}

fn run_gabor(c: &GaborConfig, ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let f = load_signal(&c.signal, c.signal_geometry.as_ref())?;
    let phase = geometry(&c.phase)?;
    let gf = lib_err!(gabor_transform(&f, &phase))?;
    let s = spectrogram(&gf);
    let norm = lib_err!(modulation_norm(&gf, c.p, None))?;
    let path = ctx.out_dir.join(&c.output);
    write_grid_file(&path, &gf)?;
    if let Some(name) = &c.spectrogram_output {
        write_grid_file(&ctx.out_dir.join(name), s.grid())?;
    }
    let summary = GaborSummary { max_modulus: s.max_value(), argmax: s.argmax_location().to_vec(), p: c.p, modulation_norm: norm };
    write_json(&ctx.out_dir.join(&c.summary), &summary)?;
    Ok(vec![format!("gabor: max |Gf| = {:.6e}, M^{} norm = {:.6e} -> {}", summary.max_modulus, c.p, norm, path.display())])
}

fn gaussian_weight(g: &GridGeometry) -> Result<RealGrid, CliError> {
    lib_err!(RealGrid::from_fn(g.clone(), |z| (-std::f64::consts::PI * z.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()))
}

fn run_cheeger(c: &CheegerConfig, ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let grid = match &c.weight {
        WeightConfig::Spectrogram { signal, signal_geometry, phase } => {
            let f = load_signal(signal, signal_geometry.as_ref())?;
            let gf = lib_err!(gabor_transform(&f, &geometry(phase)?))?;
            let s = spectrogram(&gf);
            if c.p == 1.0 { s.grid().clone() } else { s.grid().map(|v| v.powf(c.p)) }
        }
        WeightConfig::Gaussian { geometry: g } => gaussian_weight(&geometry(g)?)?,
        WeightConfig::File { path } => {
            let any = read_grid(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            lib_err!(any.into_real())?
        }
    };
    let mask = c.mask_threshold.map(|t| {
        let max = grid.values().iter().fold(0.0f64, |m, &v| m.max(v));
        grid.values().iter().map(|&v| v > t * max).collect()
    });
    let mut w = lib_err!(WeightGrid::new(grid, mask))?;
    if let Some(blocks) = &c.coarsen {
        w = lib_err!(w.coarsen(blocks))?;
    }
    let mut options = c.options;
    if let Some(seed) = ctx.seed {
        options.seed = seed;
    }
    let est = lib_err!(sweep_cut_cheeger(&w, &options))?;
    let summary = CheegerRunSummary {
        estimate: est.summary(),
        active_cells: w.active_count(),
        disconnected: est.disconnected,
        poincare_bound: poincare_bound(&est),
    };
    let path = ctx.out_dir.join(&c.output);
    write_json(&path, &summary)?;
    let oracle = est.h_oracle.map(|h| format!(", h_oracle = {h:.6}")).unwrap_or_default();
    Ok(vec![format!("cheeger: h_upper = {:.6}{oracle}, fiedler = {:.6e} -> {}", est.h_upper, est.fiedler_value, path.display())])
}

fn run_entire(c: &EntireConfig, ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let g = match &c.function {
        FunctionConfig::Polynomial { coefficients } => {
            EntireFunction::Polynomial(coefficients.iter().map(|[a, b]| Complex64::new(*a, *b)).collect())
        }
        FunctionConfig::GaussianExponential { c } => EntireFunction::GaussianExponential(Complex64::new(c[0], c[1])),
        FunctionConfig::Lifted { signal, signal_geometry, phase } => {
            let f = load_signal(signal, signal_geometry.as_ref())?;
            let gf = lib_err!(gabor_transform(&f, &geometry(phase)?))?;
            EntireFunction::LiftedGabor(lib_err!(entire_lift(&gf))?)
        }
    };
    let radii = c.radii.values();
    let class = match c.class {
        Some(spec) => Some(lib_err!(spec.validate().map(|_| spec))?),
        None => None,
    };
    let table = lib_err!(logderiv_ball_norms(&g, c.p, &radii, class.as_ref(), &c.options))?;
    let growth = match &class {
        Some(spec) => Some(lib_err!(growth_class_check(&g, spec, &radii))?),
        None => None,
    };
    let csv_path = ctx.out_dir.join(&c.output);
    write_atomic(&csv_path, table.to_csv().as_bytes())?;
    let summary = EntireSummary {
        p: c.p,
        d: table.d,
        fitted_slope: table.fitted_slope,
        fitted_constant: table.fitted_constant,
        bound_exponent: class.map(|s| s.ball_norm_exponent(table.d)),
        class_member: growth.as_ref().map(|r| r.member),
        worst_margin: growth.as_ref().map(|r| r.worst_margin),
        excluded_cells: table.excluded_cells,
    };
    write_json(&ctx.out_dir.join(&c.summary), &summary)?;
    Ok(vec![format!("entire: fitted slope = {:.4} over {} radii -> {}", table.fitted_slope, radii.len(), csv_path.display())])
}

fn run_stability(c: &StabilityConfig, ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let phase = geometry(&c.phase)?;
    let d = lib_err!(phase.phase_dimension())?;
    lib_err!(check_admissible(c.p, c.q, d))?;
    let signal = geometry(&c.signal_geometry)?;
    let mut options = StabilityOptions {
        mask_threshold: c.mask_threshold,
        cheeger: c.cheeger,
        oracle_blocks: c.oracle_blocks.clone(),
        partition: None,
        noise: c.noise.clone(),
    };
    if let Some(seed) = ctx.seed {
        options.cheeger.seed = seed;
        if let Some(NoiseSpec::BandLimited { seed: s, .. }) = &mut options.noise {
            *s = seed;
        }
    }
    if let Some(h) = &c.partition {
        options.partition = Some(lib_err!(DomainPartition::halves(phase.clone(), h.axis, h.cut, None))?);
    }
    match (&c.pair, &c.sweep) {
        (Some(pair), None) => {
            let f = load_signal(&pair.f, Some(&c.signal_geometry))?;
            let g = load_signal(&pair.g, Some(&c.signal_geometry))?;
            let report = lib_err!(stability_report(&f, &g, &phase, c.p, c.q, &options))?;
            let path = ctx.out_dir.join(&c.output);
            write_json(&path, &report)?;
            Ok(vec![format!(
                "stability: lhs = {:.6e}, h = {:.6}, ratio = {:.6e} -> {}",
                report.lhs, report.cheeger.h, report.ratio, path.display()
            )])
        }
        (None, Some(sweep)) => {
            if sweep.d != d {
                return Err(CliError::Config(format!("sweep d = {} but the phase grid has d = {d}", sweep.d)));
            }
            let rows = lib_err!(instability_sweep(sweep.d, &sweep.t, &signal, &phase, c.p, c.q, &options))?;
            let json = ctx.out_dir.join(&c.output);
            let csv = ctx.out_dir.join(&c.csv);
            write_json(&json, &rows)?;
            write_atomic(&csv, sweep_csv(&rows).as_bytes())?;
            Ok(rows
                .iter()
                .map(|r| {
                    format!(
                        "stability: T = {}, h = {:.6e}, lhs = {:.6e}, ratio = {:.6e}",
                        r.t, r.report.cheeger.h, r.report.lhs, r.report.empirical_ratio
                    )
                })
                .chain(std::iter::once(format!("stability: sweep -> {}", csv.display())))
                .collect())
        }
        _ => Err(CliError::Config("exactly one of `pair` and `sweep` must be given".into())),
    }
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
