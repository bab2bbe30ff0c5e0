//! Small real symmetric positive-definite solves for Newton systems.

use nalgebra::{DMatrix, DVector};

/// Row-major `n × n` real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    n: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    /// `self += s · g gᵀ`.
    pub fn add_outer(&mut self, g: &[f64], s: f64) {
        for i in 0..self.n {
            let gi = g[i] * s;
            if gi == 0.0 {
                continue;
            }
            for j in 0..self.n {
                self.data[i * self.n + j] += gi * g[j];
            }
        }
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }

    /// Solves `A x = b` by Cholesky, adding diagonal regularization when the
    /// factorization breaks down. Returns `None` if even a heavily
    /// regularized system cannot be factored.
    pub fn solve_spd(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let scale = self.max_diag().max(f64::MIN_POSITIVE);
        let rhs = DVector::from_column_slice(b);
        let mut shift = 0.0;
        for _ in 0..12 {
            let a = DMatrix::from_fn(n, n, |i, j| self.get(i, j) + if i == j { shift } else { 0.0 });
            if let Some(chol) = a.cholesky() {
                let x = chol.solve(&rhs);
                if x.iter().all(|v| v.is_finite()) {
                    return Some(x.as_slice().to_vec());
                }
            }
            shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
        }
        None
    }
}
