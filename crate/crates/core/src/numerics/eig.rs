//! Hermitian eigendecomposition, backed by nalgebra's symmetric solver.

use nalgebra::DMatrix;

use super::matrix::{ComplexMat, HermitianMat, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]`.
    pub eigenvectors: ComplexMat,
}

impl EigenPair {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// `U Λ U^H`.
    pub fn reconstruct(&self) -> ComplexMat {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= self.eigenvalues[j];
            }
        }
        &scaled * &self.eigenvectors.adjoint()
    }
}

pub fn eig_hermitian(a: &HermitianMat) -> Result<EigenPair> {
    let n = a.dim();
    let m = a.as_mat();
    let scale = m.max_abs();
    if !(scale.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let defect = m.hermitian_defect();
    if defect > HermitianMat::TOLERANCE * (1.0 + scale) {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let dense = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = dense.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = ComplexMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let nrm = col.norm();
        for i in 0..n {
            eigenvectors[(i, dst)] = col[i] / nrm;
        }
    }
    Ok(EigenPair {
        eigenvalues,
        eigenvectors,
    })
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn principal_component(a: &HermitianMat) -> Result<(f64, Vec<C64>)> {
    let eig = eig_hermitian(a)?;
    let last = eig.eigenvalues.len() - 1;
    Ok((eig.eigenvalues[last], eig.vector(last)))
}
