//! Dense complex linear algebra for small Hermitian problems.

pub mod eigen;
pub mod expm;
pub mod matrix;

pub use eigen::{default_group_tol, hermitian_eig, hermitian_eig_default, EigenSystem};
pub use expm::{ordered_exp, spectral_exp, spectral_exp_from};
pub use matrix::{
    c, columns_to_matrix, commutator, cr, max_abs, max_abs_diff, max_abs_vec, orthonormalize,
    projector, unitarity_defect, CMat, CVec, ComplexMatrix, HermitianOperator, StateVector,
    UnitaryOperator,
};
