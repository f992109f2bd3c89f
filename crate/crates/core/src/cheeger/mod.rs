//! Cheeger constants of weights on grid domains.
//!
//! A [`WeightGrid`] becomes a graph whose vertices are the active cells,
//! with vertex mass `w_i·vol` and an edge of weight `((w_i + w_j)/2)·vol/h_a`
//! across every shared face. The ratio of a cut is its edge weight over the
//! smaller of the two side masses. [`sweep_cut_cheeger`] bounds the minimum
//! ratio from above by thresholding low eigenvectors of the mass-normalised
//! Laplacian; [`exhaustive_cheeger_oracle`] enumerates every cut of tiny grids.

mod lanczos;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gabor::Spectrogram;
use crate::grid::{GridError, GridGeometry, RealGrid};
use crate::numeric::NeumaierSum;

pub use lanczos::{lowest_eigenpair, EigenPair, LanczosOptions, NotConverged, SymmetricOperator};

#[derive(Debug, Error, PartialEq)]
pub enum CheegerError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("negative weight at cell {0}")]
    NegativeWeight(usize),
    #[error("need at least 2 active cells, found {0}")]
    TooFewActiveCells(usize),
    #[error("total active mass is zero")]
    ZeroMass,
    #[error("graph has {0} connected components")]
    Disconnected(usize),
    #[error("eigensolver stopped after {matvecs} products with residual {residual:e}")]
    NotConverged { residual: f64, matvecs: usize },
    #[error("{cells} active cells exceed the exhaustive limit {limit}")]
    TooManyCells { cells: usize, limit: usize },
    #[error("invalid coarsening: {0}")]
    InvalidBlocks(String),
}

/// Nonnegative weight on a grid together with the active domain.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightGrid {
    grid: RealGrid,
    mask: Vec<bool>,
}

impl WeightGrid {
    /// `mask` defaults to the cells with positive weight.
    pub fn new(grid: RealGrid, mask: Option<Vec<bool>>) -> Result<Self, CheegerError> {
        if let Some(i) = grid.values().iter().position(|&v| v < 0.0) {
            return Err(CheegerError::NegativeWeight(i));
        }
        let mask = match mask {
            Some(m) if m.len() != grid.len() => {
                return Err(GridError::LengthMismatch { expected: grid.len(), found: m.len() }.into())
            }
            Some(m) => m,
            None => grid.values().iter().map(|&v| v > 0.0).collect(),
        };
        let active = mask.iter().filter(|&&m| m).count();
        if active < 2 {
            return Err(CheegerError::TooFewActiveCells(active));
        }
        let w = Self { grid, mask };
        if w.total_mass() <= 0.0 {
            return Err(CheegerError::ZeroMass);
        }
        Ok(w)
    }

    pub fn from_values(geometry: GridGeometry, values: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self, CheegerError> {
        Self::new(RealGrid::new(geometry, values)?, mask)
    }

    /// `w = |Gf|^p` restricted to `mask`.
    pub fn from_spectrogram(s: &Spectrogram, p: f64, mask: Option<Vec<bool>>) -> Result<Self, CheegerError> {
        let grid = s.grid().map(|&v| if p == 1.0 { v } else { v.powf(p) });
        Self::new(grid, mask)
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.grid.geometry()
    }

    pub fn values(&self) -> &[f64] {
        self.grid.values()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// `Σ_active w_i · vol`.
    pub fn total_mass(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for (v, _) in self.grid.values().iter().zip(&self.mask).filter(|(_, &m)| m) {
            acc.add(*v);
        }
        acc.total() * self.geometry().cell_volume()
    }

    pub fn scaled(&self, c: f64) -> Result<Self, CheegerError> {
        Self::new(self.grid.map(|v| v * c), Some(self.mask.clone()))
    }

    /// Average the weight over `blocks[a]` equal blocks per axis covering
    /// the bounding box of the active cells. Inactive cells count as zero
    /// weight; a coarse cell is active when its average is positive.
    pub fn coarsen(&self, blocks: &[usize]) -> Result<Self, CheegerError> {
        let g = self.geometry();
        if blocks.len() != g.rank() {
            return Err(GridError::RankMismatch { expected: g.rank(), found: blocks.len() }.into());
        }
        let rank = g.rank();
        let mut lo = vec![usize::MAX; rank];
        let mut hi = vec![0; rank];
        let mut idx = vec![0; rank];
        for (i, _) in self.mask.iter().enumerate().filter(|(_, &m)| m) {
            g.unravel(i, &mut idx);
            for a in 0..rank {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a]);
            }
        }
        let mut size = vec![0; rank];
        for a in 0..rank {
            let len = hi[a] - lo[a] + 1;
            if blocks[a] < 2 || blocks[a] > len {
                return Err(CheegerError::InvalidBlocks(format!(
                    "axis {a}: {} blocks over {len} active cells",
                    blocks[a]
                )));
            }
            size[a] = len.div_ceil(blocks[a]);
        }
        let spacing: Vec<f64> = (0..rank).map(|a| g.spacing()[a] * size[a] as f64).collect();
        let origin: Vec<f64> = (0..rank)
            .map(|a| g.origin()[a] + (lo[a] as f64 + (size[a] as f64 - 1.0) / 2.0) * g.spacing()[a])
            .collect();
        let coarse = GridGeometry::new(blocks.to_vec(), spacing, origin)?;
        let per_block: usize = size.iter().product();
        let mut sums = vec![NeumaierSum::new(); coarse.len()];
        let mut cidx = vec![0; rank];
        for (i, (&v, _)) in self.values().iter().zip(&self.mask).enumerate().filter(|(_, (_, &m))| m) {
            g.unravel(i, &mut idx);
            let mut inside = true;
            for a in 0..rank {
                let k = (idx[a] - lo[a]) / size[a];
                inside &= k < blocks[a];
                cidx[a] = k;
            }
            if inside {
                sums[coarse.ravel(&cidx)].add(v);
            }
        }
        let values: Vec<f64> = sums.iter().map(|s| s.total() / per_block as f64).collect();
        Self::new(RealGrid::new(coarse, values)?, None)
    }
}

/// Weighted graph of the active cells.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightGraph {
    /// Flat grid index of every vertex.
    pub cells: Vec<usize>,
    pub mass: Vec<f64>,
    /// `(i, j, weight)` with `i < j`, in generation order.
    pub edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    neighbours: Vec<(usize, f64)>,
}

impl WeightGraph {
    /// Graph not tied to a grid; vertex `k` is reported as cell `k`.
    pub fn from_edges(mass: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Self {
        let edges = edges.into_iter().map(|(i, j, w)| (i.min(j), i.max(j), w)).collect();
        Self::from_parts((0..mass.len()).collect(), mass, edges)
    }

    fn from_parts(cells: Vec<usize>, mass: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Self {
        let n = mass.len();
        let mut degree = vec![0; n];
        for &(i, j, _) in &edges {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = vec![0; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut neighbours = vec![(0, 0.0); offsets[n]];
        for &(i, j, w) in &edges {
            neighbours[fill[i]] = (j, w);
            fill[i] += 1;
            neighbours[fill[j]] = (i, w);
            fill[j] += 1;
        }
        Self { cells, mass, edges, offsets, neighbours }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn neighbours(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbours[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        acc.extend(self.mass.iter().copied());
        acc.total()
    }

    /// Connected components over edges of positive weight; labels follow
    /// the order in which components are first reached.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(u, w) in self.neighbours(v) {
                    if w > 0.0 && label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Induced subgraph on `vertices` (ascending).
    fn restrict(&self, vertices: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.len()];
        for (k, &v) in vertices.iter().enumerate() {
            map[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(i, j, _)| map[*i] != usize::MAX && map[*j] != usize::MAX)
            .map(|&(i, j, w)| (map[i], map[j], w))
            .collect();
        Self::from_parts(
            vertices.iter().map(|&v| self.cells[v]).collect(),
            vertices.iter().map(|&v| self.mass[v]).collect(),
            edges,
        )
    }
}

pub fn build_weight_graph(w: &WeightGrid) -> Result<WeightGraph, CheegerError> {
    let g = w.geometry();
    let vol = g.cell_volume();
    let strides = g.strides();
    let mut vertex = vec![usize::MAX; g.len()];
    let mut cells = Vec::new();
    for (i, _) in w.mask.iter().enumerate().filter(|(_, &m)| m) {
        vertex[i] = cells.len();
        cells.push(i);
    }
    if cells.len() < 2 {
        return Err(CheegerError::TooFewActiveCells(cells.len()));
    }
    let values = w.values();
    let mass = cells.iter().map(|&c| values[c] * vol).collect();
    let mut edges = Vec::new();
    for (vi, &c) in cells.iter().enumerate() {
        for a in 0..g.rank() {
            let pos = (c / strides[a]) % g.extents()[a];
            if pos + 1 == g.extents()[a] {
                continue;
            }
            let nb = c + strides[a];
            if vertex[nb] != usize::MAX {
                let face = vol / g.spacing()[a];
                edges.push((vi, vertex[nb], 0.5 * (values[c] + values[nb]) * face));
            }
        }
    }
    Ok(WeightGraph::from_parts(cells, mass, edges))
}

/// One cut of the active cells into `C` (true) and its complement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutResult {
    pub side_assignment: Vec<bool>,
    pub cut_weight: f64,
    /// `(mass of C, mass of the complement)`.
    pub masses: (f64, f64),
    /// `cut_weight / min(masses)`, `+∞` when a side carries no mass.
    pub ratio: f64,
}

fn cut_parts(graph: &WeightGraph, side: &[bool]) -> (f64, f64, f64) {
    let mut cut = NeumaierSum::new();
    for &(i, j, w) in &graph.edges {
        if side[i] != side[j] {
            cut.add(w);
        }
    }
    let mut left = NeumaierSum::new();
    let mut right = NeumaierSum::new();
    for (m, &s) in graph.mass.iter().zip(side) {
        if s {
            left.add(*m);
        } else {
            right.add(*m);
        }
    }
    (cut.total(), left.total(), right.total())
}

fn ratio_of(cut: f64, left: f64, right: f64) -> f64 {
    let denom = left.min(right);
    if denom > 0.0 {
        cut / denom
    } else {
        f64::INFINITY
    }
}

pub fn evaluate_cut(graph: &WeightGraph, side: &[bool]) -> CutResult {
    let (cut, left, right) = cut_parts(graph, side);
    CutResult { side_assignment: side.to_vec(), cut_weight: cut, masses: (left, right), ratio: ratio_of(cut, left, right) }
}

/// `M^{-1/2} L M^{-1/2}` of a weight graph.
struct NormalisedLaplacian<'a> {
    graph: &'a WeightGraph,
    inv_sqrt_mass: Vec<f64>,
    degree: Vec<f64>,
}

impl<'a> NormalisedLaplacian<'a> {
    fn new(graph: &'a WeightGraph) -> Self {
        // zero-mass vertices get the smallest positive mass so M stays invertible
        let floor = graph.mass.iter().copied().filter(|&m| m > 0.0).fold(f64::INFINITY, f64::min);
        let inv_sqrt_mass = graph.mass.iter().map(|&m| 1.0 / m.max(floor).sqrt()).collect();
        let degree = (0..graph.len()).map(|i| graph.neighbours(i).iter().map(|n| n.1).sum()).collect();
        Self { graph, inv_sqrt_mass, degree }
    }

    fn sqrt_mass_unit(&self) -> Vec<f64> {
        let v: Vec<f64> = self.inv_sqrt_mass.iter().map(|s| 1.0 / s).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }
}

impl SymmetricOperator for NormalisedLaplacian<'_> {
    fn dim(&self) -> usize {
        self.graph.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let s = &self.inv_sqrt_mass;
        for i in 0..x.len() {
            let mut acc = self.degree[i] * s[i] * x[i];
            for &(j, w) in self.graph.neighbours(i) {
                acc -= w * s[j] * x[j];
            }
            y[i] = s[i] * acc;
        }
    }
}

/// Tunables of the spectral estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheegerOptions {
    /// Attach the exhaustive oracle when the active cell count is at most this.
    pub oracle_limit: usize,
    /// Extra sweeps along `cos φ·v_2 + sin φ·v_3` for `φ = kπ/rotations`.
    pub rotations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub max_basis: usize,
    pub keep: usize,
    /// Components carrying more than this share of the mass count as separate.
    pub component_mass_share: f64,
}

impl Default for CheegerOptions {
    fn default() -> Self {
        Self {
            oracle_limit: 20,
            rotations: 64,
            tolerance: 1e-8,
            seed: 0x5eed_cafe,
            max_basis: 64,
            keep: 24,
            component_mass_share: 1e-9,
        }
    }
}

/// Eigenvector of `L v = λ M v` for the second-smallest `λ`.
#[derive(Clone, Debug)]
pub struct FiedlerResult {
    pub value: f64,
    /// Generalised eigenvector `M^{-1/2} u`.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn lanczos_options(options: &CheegerOptions, n: usize, seed_offset: u64) -> LanczosOptions {
    LanczosOptions {
        tolerance: options.tolerance,
        max_matvecs: 10 * n,
        max_basis: options.max_basis,
        keep: options.keep,
        seed: options.seed.wrapping_add(seed_offset),
    }
}

/// The lowest `count` nontrivial eigenpairs, found one at a time with the
/// previous ones locked into the deflation set.
fn spectral_pairs(graph: &WeightGraph, count: usize, options: &CheegerOptions) -> Result<Vec<FiedlerResult>, CheegerError> {
    let (_, components) = graph.components();
    if components > 1 {
        return Err(CheegerError::Disconnected(components));
    }
    let op = NormalisedLaplacian::new(graph);
    let mut deflate = vec![op.sqrt_mass_unit()];
    let mut out = Vec::new();
    for k in 0..count.min(graph.len() - 1) {
        let pair = lowest_eigenpair(&op, &deflate, &lanczos_options(options, graph.len(), k as u64))
            .map_err(|e| CheegerError::NotConverged { residual: e.residual, matvecs: e.matvecs })?;
        let vector = pair.vector.iter().zip(&op.inv_sqrt_mass).map(|(u, s)| u * s).collect();
        out.push(FiedlerResult { value: pair.value, vector, residual: pair.residual, matvecs: pair.matvecs });
        deflate.push(pair.vector);
    }
    Ok(out)
}

pub fn fiedler_vector(graph: &WeightGraph, options: &CheegerOptions) -> Result<FiedlerResult, CheegerError> {
    Ok(spectral_pairs(graph, 1, options)?.remove(0))
}

/// Best prefix of the vertices sorted by `key`; returns the side of that prefix.
fn sweep(graph: &WeightGraph, key: &[f64]) -> Vec<bool> {
    let n = graph.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + graph.mass[order[k]];
    }
    let mut in_prefix = vec![false; n];
    let mut cut = 0.0;
    let mut left = 0.0;
    let mut best = (f64::INFINITY, 1);
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        for &(u, w) in graph.neighbours(v) {
            cut += if in_prefix[u] { -w } else { w };
        }
        in_prefix[v] = true;
        left += graph.mass[v];
        let r = ratio_of(cut.max(0.0), left, suffix[k + 1]);
        if r < best.0 {
            best = (r, k + 1);
        }
    }
    let mut side = vec![false; n];
    for &v in &order[..best.1] {
        side[v] = true;
    }
    side
}

/// Result of [`sweep_cut_cheeger`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheegerEstimate {
    pub h_upper: f64,
    pub h_oracle: Option<f64>,
    pub fiedler_value: f64,
    pub best_cut: CutResult,
    /// Components carrying a non-negligible share of the mass.
    pub significant_components: usize,
    pub disconnected: bool,
    pub eigen_residual: f64,
    pub matvecs: usize,
}

/// JSON view of a [`CheegerEstimate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheegerSummary {
    pub h_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_oracle: Option<f64>,
    pub fiedler_value: f64,
    pub cut_mass_left: f64,
    pub cut_mass_right: f64,
    pub cut_weight: f64,
}

impl CheegerEstimate {
    pub fn summary(&self) -> CheegerSummary {
        CheegerSummary {
            h_upper: self.h_upper,
            h_oracle: self.h_oracle,
            fiedler_value: self.fiedler_value,
            cut_mass_left: self.best_cut.masses.0,
            cut_mass_right: self.best_cut.masses.1,
            cut_weight: self.best_cut.cut_weight,
        }
    }

    /// `h_oracle` when present, else `h_upper`.
    pub fn best_h(&self) -> f64 {
        self.h_oracle.unwrap_or(self.h_upper)
    }
}

/// Spectral sweep-cut upper bound on the Cheeger constant of `w`.
///
/// When more than one connected component carries more than
/// `component_mass_share` of the mass, the constant is 0 and the cut
/// separates the first such component from the rest. Otherwise the
/// negligible components are set aside and the sweep runs on the rest,
/// over the Fiedler vector and over rotations within the span of the two
/// lowest nontrivial eigenvectors.
pub fn sweep_cut_cheeger(w: &WeightGrid, options: &CheegerOptions) -> Result<CheegerEstimate, CheegerError> {
    let graph = build_weight_graph(w)?;
    let n = graph.len();
    let (labels, count) = graph.components();
    let total = graph.total_mass();
    let mut comp_mass = vec![NeumaierSum::new(); count];
    for (v, &l) in labels.iter().enumerate() {
        comp_mass[l].add(graph.mass[v]);
    }
    let significant: Vec<usize> =
        (0..count).filter(|&c| comp_mass[c].total() > options.component_mass_share * total).collect();
    let h_oracle = if w.active_count() <= options.oracle_limit {
        Some(exhaustive_oracle_on_graph(&graph, options.oracle_limit)?)
    } else {
        None
    };

    if significant.len() > 1 {
        log::info!("weight splits into {} components of positive mass", significant.len());
        let side: Vec<bool> = labels.iter().map(|&l| l == significant[0]).collect();
        let best_cut = evaluate_cut(&graph, &side);
        return Ok(CheegerEstimate {
            h_upper: best_cut.ratio,
            h_oracle,
            fiedler_value: 0.0,
            best_cut,
            significant_components: significant.len(),
            disconnected: true,
            eigen_residual: 0.0,
            matvecs: 0,
        });
    }

    let main = significant[0];
    let vertices: Vec<usize> = (0..n).filter(|&v| labels[v] == main).collect();
    if vertices.len() < 2 {
        return Err(CheegerError::TooFewActiveCells(vertices.len()));
    }
    let sub = graph.restrict(&vertices);
    let pairs = spectral_pairs(&sub, if options.rotations > 0 { 2 } else { 1 }, options)?;
    let fiedler = &pairs[0];

    let mut keys = vec![fiedler.vector.clone()];
    if let Some(third) = pairs.get(1) {
        for k in 1..options.rotations {
            let phi = std::f64::consts::PI * k as f64 / options.rotations as f64;
            let (s, c) = phi.sin_cos();
            keys.push(fiedler.vector.iter().zip(&third.vector).map(|(a, b)| c * a + s * b).collect());
        }
    }
    let candidates: Vec<CutResult> = keys
        .par_iter()
        .map(|key| {
            let local = sweep(&sub, key);
            let mut side = vec![false; n];
            for (k, &v) in vertices.iter().enumerate() {
                side[v] = local[k];
            }
            evaluate_cut(&graph, &side)
        })
        .collect();
    let best_cut = candidates
        .into_iter()
        .reduce(|a, b| if b.ratio < a.ratio { b } else { a })
        .expect("at least one sweep");
    Ok(CheegerEstimate {
        h_upper: best_cut.ratio,
        h_oracle,
        fiedler_value: fiedler.value,
        best_cut,
        significant_components: 1,
        disconnected: false,
        eigen_residual: pairs.iter().map(|p| p.residual).fold(0.0, f64::max),
        matvecs: pairs.iter().map(|p| p.matvecs).sum(),
    })
}

/// Largest active cell count accepted by the exhaustive oracle.
pub const ORACLE_MAX_CELLS: usize = 20;

/// Minimum cut ratio over every nonempty proper subset of the active cells.
pub fn exhaustive_cheeger_oracle(w: &WeightGrid) -> Result<f64, CheegerError> {
    exhaustive_oracle_on_graph(&build_weight_graph(w)?, ORACLE_MAX_CELLS)
}

fn exhaustive_oracle_on_graph(graph: &WeightGraph, limit: usize) -> Result<f64, CheegerError> {
    let n = graph.len();
    let limit = limit.min(ORACLE_MAX_CELLS);
    if n > limit {
        return Err(CheegerError::TooManyCells { cells: n, limit });
    }
    // the last vertex stays on the complement side; complements give the same ratio
    let subsets: u64 = 1 << (n - 1);
    let best = (1..subsets)
        .into_par_iter()
        .map_init(
            || vec![false; n],
            |side, bits| {
                for (k, s) in side.iter_mut().enumerate().take(n - 1) {
                    *s = bits >> k & 1 == 1;
                }
                side[n - 1] = false;
                let (cut, left, right) = cut_parts(graph, side);
                ratio_of(cut, left, right)
            },
        )
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Poincaré constant bound `8/h`; `+∞` when `h = 0`.
pub fn poincare_bound(estimate: &CheegerEstimate) -> f64 {
    let h = estimate.best_h();
    if h > 0.0 {
        8.0 / h
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> WeightGrid {
        let g = GridGeometry::new(vec![values.len()], vec![1.0], vec![0.0]).unwrap();
        WeightGrid::from_values(g, values.to_vec(), None).unwrap()
    }

    fn plane(nx: usize, ny: usize, values: Vec<f64>) -> WeightGrid {
        let g = GridGeometry::new(vec![nx, ny], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        WeightGrid::from_values(g, values, None).unwrap()
    }

    #[test]
    fn graph_examples() {
        let g = build_weight_graph(&plane(2, 2, vec![1.0; 4])).unwrap();
        assert_eq!(g.edges.len(), 4);
        let two = GridGeometry::new(vec![2, 2], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let w = WeightGrid::from_values(two, vec![1.0, 0.0, 1.0, 0.0], Some(vec![true, false, true, false])).unwrap();
        let g = build_weight_graph(&w).unwrap();
        assert_eq!(g.edges, vec![(0, 1, 1.0)]);
        let g = build_weight_graph(&plane(3, 3, vec![1.0; 9])).unwrap();
        assert_eq!(g.edges.len(), 12);
    }

    #[test]
    fn half_weight_edge_and_zero_mass_guard() {
        let w = WeightGrid::from_values(
            GridGeometry::new(vec![2], vec![1.0], vec![0.0]).unwrap(),
            vec![1.0, 0.0],
            Some(vec![true, true]),
        )
        .unwrap();
        let g = build_weight_graph(&w).unwrap();
        assert_eq!(g.edges, vec![(0, 1, 0.5)]);
        let cut = evaluate_cut(&g, &[true, false]);
        assert_eq!(cut.cut_weight, 0.5);
        assert_eq!(cut.ratio, f64::INFINITY);
    }

    #[test]
    fn cut_is_side_symmetric() {
        let g = build_weight_graph(&plane(3, 3, (1..=9).map(|v| v as f64 * 0.3).collect())).unwrap();
        let side = [true, false, true, true, false, false, true, false, false];
        let flipped: Vec<bool> = side.iter().map(|s| !s).collect();
        let a = evaluate_cut(&g, &side);
        let b = evaluate_cut(&g, &flipped);
        assert_eq!(a.ratio, b.ratio);
        assert_eq!(a.masses, (b.masses.1, b.masses.0));
    }

    #[test]
    fn two_by_two_oracle() {
        assert_eq!(exhaustive_cheeger_oracle(&plane(2, 2, vec![1.0; 4])).unwrap(), 1.0);
    }

    #[test]
    fn path_fiedler_sign_pattern() {
        let g = build_weight_graph(&line(&[1.0, 1.0, 1.0])).unwrap();
        let f = fiedler_vector(&g, &CheegerOptions::default()).unwrap();
        let v = &f.vector;
        assert!(v[1].abs() < 1e-10 * v[0].abs());
        assert!(v[0].signum() == -v[2].signum());
    }

    #[test]
    fn disconnected_graph_is_rejected_by_fiedler() {
        let two = GridGeometry::new(vec![3], vec![1.0], vec![0.0]).unwrap();
        let w = WeightGrid::from_values(two, vec![1.0, 0.0, 1.0], None).unwrap();
        let g = build_weight_graph(&w).unwrap();
        assert_eq!(fiedler_vector(&g, &CheegerOptions::default()).unwrap_err(), CheegerError::Disconnected(2));
    }

    #[test]
    fn point_masses_separated_by_zero_cell() {
        let w = line(&[1.0, 0.0, 1.0]);
        let est = sweep_cut_cheeger(&w, &CheegerOptions::default()).unwrap();
        assert_eq!(est.h_upper, 0.0);
        assert!(est.disconnected);
        assert_eq!(est.h_oracle, Some(0.0));
        assert_eq!(poincare_bound(&est), f64::INFINITY);
    }

    #[test]
    fn coarsening_preserves_mass() {
        let g = GridGeometry::new(vec![8, 10], vec![0.5, 0.25], vec![-2.0, -1.0]).unwrap();
        let values: Vec<f64> = (0..80).map(|i| ((i * 7) % 13) as f64 + 0.5).collect();
        let w = WeightGrid::from_values(g, values, None).unwrap();
        let c = w.coarsen(&[4, 5]).unwrap();
        assert_eq!(c.active_count(), 20);
        assert!((c.total_mass() - w.total_mass()).abs() < 1e-12 * w.total_mass());
        assert_eq!(c.geometry().spacing(), &[1.0, 0.5]);
        assert!(w.coarsen(&[1, 5]).is_err());
    }

    #[test]
    fn poincare_of_given_h() {
        let w = plane(2, 2, vec![1.0; 4]);
        let mut est = sweep_cut_cheeger(&w, &CheegerOptions::default()).unwrap();
        est.h_oracle = Some(2.0);
        assert_eq!(poincare_bound(&est), 4.0);
        est.h_oracle = Some(2f64.sqrt());
        assert!((poincare_bound(&est) - 5.657).abs() < 1e-3);
    }
}
