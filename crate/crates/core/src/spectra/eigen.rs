//! Lowest eigenpairs of sparse symmetric positive semidefinite matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric matrix in compressed rows, diagonal stored apart.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCsr {
    pub(crate) diag: Vec<f64>,
    pub(crate) row_ptr: Vec<usize>,
    pub(crate) col: Vec<u32>,
    pub(crate) val: Vec<f64>,
}

impl SymCsr {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            *yi = acc;
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                self.diag[i].abs()
                    + self.val[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[k] as usize)] = self.val[k];
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Required `‖Hy − θy‖ / ‖H‖`.
    pub tolerance: f64,
    /// Dimensions up to this use the dense solver directly.
    pub dense_limit: usize,
    /// Dimensions up to this fall back to the dense solver when Lanczos
    /// fails to converge.
    pub dense_fallback_limit: usize,
    /// Lanczos basis size before an explicit restart.
    pub max_basis: usize,
    /// Total Lanczos iterations allowed, as a multiple of the dimension.
    pub iteration_factor: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            dense_limit: 512,
            dense_fallback_limit: 4096,
            max_basis: 240,
            iteration_factor: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Relative residual `‖Hy − θy‖ / ‖H‖`.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub method: Method,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn relative_residual(h: &SymCsr, value: f64, vector: &[f64], scale: f64) -> f64 {
    let mut hy = vec![0.0; vector.len()];
    h.apply(vector, &mut hy);
    axpy(-value, vector, &mut hy);
    norm(&hy) / scale
}

/// All eigenvalues, ascending.
pub fn dense_eigenvalues(h: &SymCsr) -> Vec<f64> {
    if h.dim() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenpair of `h` on the orthogonal complement of the unit vector
/// `deflate`, which must be an eigenvector of `h`.
pub fn lowest(h: &SymCsr, deflate: Option<&[f64]>, opts: &SolverOptions) -> EigenPair {
    let n = h.dim();
    if n <= opts.dense_limit {
        return lowest_dense(h, deflate, opts);
    }
    let pair = lowest_lanczos(h, deflate, opts);
    if !pair.converged && n <= opts.dense_fallback_limit {
        let mut dense = lowest_dense(h, deflate, opts);
        dense.iterations += pair.iterations;
        return dense;
    }
    pair
}

pub fn lowest_dense(h: &SymCsr, deflate: Option<&[f64]>, opts: &SolverOptions) -> EigenPair {
    let n = h.dim();
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let mut m = h.to_dense();
    if let Some(v) = deflate {
        // push the deflated direction above the rest of the spectrum
        let shift = 2.0 * scale + 1.0;
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += shift * v[i] * v[j];
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    let vector: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let residual = relative_residual(h, value, &vector, scale);
    EigenPair {
        value,
        vector,
        residual,
        converged: residual <= opts.tolerance,
        iterations: 0,
        method: Method::Dense,
    }
}

/// Lanczos with full reorthogonalization and explicit restarts from the
/// current Ritz vector.
pub fn lowest_lanczos(h: &SymCsr, deflate: Option<&[f64]>, opts: &SolverOptions) -> EigenPair {
    let n = h.dim();
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let max_iter = opts.iteration_factor.saturating_mul(n).max(1);
    let basis_cap = opts.max_basis.min(n).max(2);

    let project = |w: &mut Vec<f64>| {
        if let Some(v) = deflate {
            let c = dot(w, v);
            axpy(-c, v, w);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut iterations = 0;
    let mut best = EigenPair {
        value: f64::NAN,
        vector: Vec::new(),
        residual: f64::INFINITY,
        converged: false,
        iterations: 0,
        method: Method::Lanczos,
    };

    while iterations < max_iter {
        project(&mut start);
        let s_norm = norm(&start);
        if s_norm == 0.0 {
            break;
        }
        start.iter_mut().for_each(|x| *x /= s_norm);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        loop {
            let j = basis.len() - 1;
            h.apply(&basis[j], &mut w);
            iterations += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                project(&mut w);
                for b in &basis {
                    let c = dot(&w, b);
                    axpy(-c, b, &mut w);
                }
            }
            let b_next = norm(&w);
            let m = alpha.len();
            let exhausted = b_next <= 1e-14 * scale;
            let full = m >= basis_cap || iterations >= max_iter;
            if exhausted || full || m.is_multiple_of(10) {
                let (theta, s) = tridiagonal_lowest(&alpha, &beta);
                let estimate = if exhausted { 0.0 } else { b_next * s[m - 1].abs() / scale };
                if estimate <= opts.tolerance || full {
                    let mut y = vec![0.0; n];
                    for (k, b) in basis.iter().enumerate() {
                        axpy(s[k], b, &mut y);
                    }
                    project(&mut y);
                    let yn = norm(&y);
                    y.iter_mut().for_each(|x| *x /= yn);
                    let residual = relative_residual(h, theta, &y, scale);
                    let converged = residual <= opts.tolerance;
                    if residual < best.residual {
                        best = EigenPair {
                            value: theta,
                            vector: y.clone(),
                            residual,
                            converged,
                            iterations,
                            method: Method::Lanczos,
                        };
                    }
                    if converged {
                        best.iterations = iterations;
                        return best;
                    }
                    start = y;
                    break;
                }
            }
            if exhausted {
                // invariant subspace without a converged pair: restart fresh
                start = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
                break;
            }
            beta.push(b_next);
            w.iter_mut().for_each(|x| *x /= b_next);
            basis.push(std::mem::replace(&mut w, vec![0.0; n]));
        }
    }
    best.iterations = iterations;
    best
}

/// Smallest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (k, &theta) =
        eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    (theta, eig.eigenvectors.column(k).iter().copied().collect())
}
