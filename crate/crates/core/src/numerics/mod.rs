//! Dense complex linear algebra, Hermitian eigendecomposition and Lambert W.

mod dense;
mod eig;
mod lambert;
mod matrix;

pub use dense::SymMat;
pub use eig::{eig_hermitian, principal_component, EigenPair};
pub use lambert::{branch_point, lambert_w, Branch};
pub use matrix::{inner, norm, norm_sqr, ComplexMat, HermitianMat, C64, ONE, ZERO};
