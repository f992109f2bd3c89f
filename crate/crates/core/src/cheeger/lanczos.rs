//! Thick-restart Lanczos for the lowest eigenpair of a symmetric operator on
//! the orthogonal complement of a set of deflation vectors.
//!
//! The projected matrix is formed from explicit inner products `V^T A V`
//! rather than the three-term recurrence, and every new direction is
//! orthogonalised twice against the basis and the deflation set.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A symmetric linear map on `R^n`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the estimated operator norm.
    pub tolerance: f64,
    /// Cap on operator applications.
    pub max_matvecs: usize,
    /// Largest basis before a restart.
    pub max_basis: usize,
    /// Ritz vectors kept across a restart.
    pub keep: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    /// Unit vector orthogonal to the deflation set.
    pub vector: Vec<f64>,
    /// `‖A v - λ v‖`.
    pub residual: f64,
    pub matvecs: usize,
    pub norm_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct NotConverged {
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Remove components along `basis` and `deflate` (classical Gram–Schmidt, twice).
fn orthogonalise(w: &mut [f64], basis: &[Vec<f64>], deflate: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in deflate.iter().chain(basis) {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Lowest eigenpair of `op` restricted to the complement of `deflate`
/// (whose vectors must be orthonormal).
pub fn lowest_eigenpair<A: SymmetricOperator>(
    op: &A,
    deflate: &[Vec<f64>],
    options: &LanczosOptions,
) -> Result<EigenPair, NotConverged> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..3 {
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let before = norm(&w);
            orthogonalise(&mut w, basis, deflate);
            let after = norm(&w);
            if after > 1e-8 * before {
                w.iter_mut().for_each(|x| *x /= after);
                return Some(w);
            }
        }
        None
    };

    let free_dim = n.saturating_sub(deflate.len());
    if free_dim == 0 {
        return Err(NotConverged { residual: f64::INFINITY, matvecs: 0 });
    }
    let max_basis = options.max_basis.min(free_dim).max(1);
    let keep = options.keep.min(max_basis.saturating_sub(1)).max(1);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut next = random_unit(&basis);
    let mut matvecs = 0;
    let mut norm_estimate: f64 = 0.0;

    loop {
        while basis.len() < max_basis {
            let Some(q) = next.take() else { break };
            let mut aq = vec![0.0; n];
            op.apply(&q, &mut aq);
            matvecs += 1;
            let mut w = aq.clone();
            basis.push(q);
            images.push(aq);
            orthogonalise(&mut w, &basis, deflate);
            let wn = norm(&w);
            let scale = norm(images.last().unwrap()).max(f64::MIN_POSITIVE);
            next = if wn > 1e-10 * scale {
                w.iter_mut().for_each(|x| *x /= wn);
                Some(w)
            } else if basis.len() < free_dim {
                // invariant subspace found early; continue with a fresh direction
                random_unit(&basis)
            } else {
                None
            };
        }

        let m = basis.len();
        let h = DMatrix::from_fn(m, m, |i, j| {
            let a = dot(&basis[i], &images[j]);
            let b = dot(&basis[j], &images[i]);
            0.5 * (a + b)
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        norm_estimate = norm_estimate.max(eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));

        let combine = |vs: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (k, v) in vs.iter().enumerate() {
                axpy(eig.eigenvectors[(k, col)], v, &mut out);
            }
            out
        };
        let theta = eig.eigenvalues[order[0]];
        let y = combine(&basis, order[0]);
        let ay = combine(&images, order[0]);
        let residual = norm(&ay.iter().zip(&y).map(|(a, b)| a - theta * b).collect::<Vec<_>>());
        let exhausted = next.is_none();
        if residual <= options.tolerance * norm_estimate.max(f64::MIN_POSITIVE) || (exhausted && m == free_dim) {
            let yn = norm(&y);
            let vector = y.iter().map(|v| v / yn).collect();
            return Ok(EigenPair { value: theta, vector, residual, matvecs, norm_estimate });
        }
        if matvecs >= options.max_matvecs {
            return Err(NotConverged { residual, matvecs });
        }

        // thick restart: keep the lowest Ritz vectors and continue from the
        // last Lanczos direction, which is orthogonal to all of them
        let kept: Vec<usize> = order.iter().copied().take(keep).collect();
        let new_basis: Vec<Vec<f64>> = kept.iter().map(|&c| combine(&basis, c)).collect();
        let new_images: Vec<Vec<f64>> = kept.iter().map(|&c| combine(&images, c)).collect();
        basis = new_basis;
        images = new_images;
        next = match next.take() {
            Some(mut w) => {
                orthogonalise(&mut w, &basis, deflate);
                let wn = norm(&w);
                if wn > 1e-8 {
                    w.iter_mut().for_each(|x| *x /= wn);
                    Some(w)
                } else {
                    random_unit(&basis)
                }
            }
            None => random_unit(&basis),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense(DMatrix<f64>);

    impl SymmetricOperator for Dense {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..self.dim() {
                y[i] = (0..self.dim()).map(|j| self.0[(i, j)] * x[j]).sum();
            }
        }
    }

    fn options() -> LanczosOptions {
        LanczosOptions { tolerance: 1e-10, max_matvecs: 10_000, max_basis: 12, keep: 4, seed: 7 }
    }

    #[test]
    fn finds_lowest_of_diagonal_with_restarts() {
        let n = 60;
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + i as f64 * 0.5 } else { 0.0 });
        let pair = lowest_eigenpair(&Dense(a), &[], &options()).unwrap();
        assert!((pair.value - 1.0).abs() < 1e-9);
        assert!(pair.vector[0].abs() > 1.0 - 1e-9);
    }

    #[test]
    fn deflation_skips_known_vectors() {
        let n = 30;
        // path-graph Laplacian: constant vector is the null space
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i == 0 || i == n - 1 { 1.0 } else { 2.0 }
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let pair = lowest_eigenpair(&Dense(a.clone()), &[ones], &options()).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert!((pair.value - exact).abs() < 1e-9, "{} vs {exact}", pair.value);
        let dense = SymmetricEigen::new(a);
        let mut vals: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[1] - pair.value).abs() < 1e-9);
    }

    #[test]
    fn tiny_space_is_solved_exactly() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let pair = lowest_eigenpair(&Dense(a), &[], &options()).unwrap();
        assert!((pair.value - 1.0).abs() < 1e-12);
    }
}
