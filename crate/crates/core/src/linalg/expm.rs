//! Matrix exponentials: spectral `e^{−iHs}` and time-ordered exponentials
//! of time-dependent generators.

use num_complex::Complex64;

use super::eigen::{hermitian_eig_default, EigenSystem};
use super::matrix::{
    max_abs, max_abs_diff, CMat, ComplexMatrix, HermitianOperator, UnitaryOperator,
};
use crate::error::{PhaseError, Result};

/// Refinement ceiling for step halving.
pub const MAX_REFINEMENTS: usize = 20;

/// Step-count ceiling for [`ordered_exp`].
pub const MAX_STEPS: usize = 1 << 22;

/// `e^{−iHs}` through the eigendecomposition of `H`.
pub fn spectral_exp(h: &HermitianOperator, s: f64) -> Result<UnitaryOperator> {
    if !s.is_finite() {
        return Err(PhaseError::InvalidArgument(format!("non-finite time {s}")));
    }
    let eig = hermitian_eig_default(h)?;
    spectral_exp_from(&eig, s)
}

/// `e^{−iHs}` from a precomputed eigensystem of `H`.
pub fn spectral_exp_from(eig: &EigenSystem, s: f64) -> Result<UnitaryOperator> {
    if s == 0.0 {
        return Ok(UnitaryOperator::identity(eig.dim()));
    }
    UnitaryOperator::from_matrix(eig.apply_function(|lam| Complex64::from_polar(1.0, -lam * s)))
}

/// Time-ordered exponential `𝒯 exp(∫_{t0}^{t1} G(t) dt)`, i.e. the solution
/// at `t1` of `Y' = G(t) Y`, `Y(t0) = I`.
///
/// Classical RK4 on a uniform grid; the step count doubles until two
/// successive results differ by less than `tol` in max-norm, and the finer
/// result is returned.
pub fn ordered_exp<G>(generator: G, t0: f64, t1: f64, tol: f64) -> Result<ComplexMatrix>
where
    G: Fn(f64) -> CMat,
{
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(PhaseError::InvalidArgument(format!(
            "ordered_exp needs finite t0 <= t1, got [{t0}, {t1}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(PhaseError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let g0 = generator(t0);
    let dim = g0.nrows();
    if g0.ncols() != dim {
        return Err(PhaseError::NotSquare {
            rows: dim,
            cols: g0.ncols(),
        });
    }
    if t1 == t0 {
        return Ok(ComplexMatrix::identity(dim));
    }

    let span = t1 - t0;
    let rate = max_abs(&g0) * dim as f64;
    let mut steps = ((span * rate * 2.0).ceil() as usize).clamp(4, 1 << 16);

    let mut coarse = rk4_matrix(&generator, t0, t1, steps, dim);
    let mut residuals = (f64::INFINITY, f64::INFINITY);
    let mut refinements = 0;
    while refinements < MAX_REFINEMENTS && steps < MAX_STEPS {
        refinements += 1;
        steps *= 2;
        let fine = rk4_matrix(&generator, t0, t1, steps, dim);
        let residual = max_abs_diff(&fine, &coarse);
        if residual < tol {
            return ComplexMatrix::new(fine);
        }
        residuals = (residuals.1, residual);
        coarse = fine;
    }
    Err(PhaseError::StepNoConvergence {
        refinements,
        previous: residuals.0,
        last: residuals.1,
        tol,
    })
}

fn rk4_matrix<G>(generator: &G, t0: f64, t1: f64, steps: usize, dim: usize) -> CMat
where
    G: Fn(f64) -> CMat,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = CMat::identity(dim, dim);
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let g_a = generator(t);
        let g_m = generator(t + 0.5 * h);
        let g_b = generator(t + h);
        let k1 = &g_a * &y;
        let k2 = &g_m * (&y + &k1 * Complex64::new(0.5 * h, 0.0));
        let k3 = &g_m * (&y + &k2 * Complex64::new(0.5 * h, 0.0));
        let k4 = &g_b * (&y + &k3 * Complex64::new(h, 0.0));
        y += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(h / 6.0, 0.0);
    }
    y
}
