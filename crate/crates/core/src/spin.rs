//! Multi-qubit spin operators, the three-qubit LMG Hamiltonian and the
//! rotating-frame model families built from it.
//!
//! Storage is the lexicographic computational basis with site 1 as the most
//! significant bit and `|0⟩` = spin up (σ_z = +1). The ordering used for the
//! block matrices is available as an explicit permutation.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PhaseError, Result};
use crate::linalg::{
    c, cr, hermitian_eig_default, max_abs_diff, spectral_exp_from, CMat, EigenSystem,
    HermitianOperator, UnitaryOperator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Axis {
    type Err = PhaseError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(PhaseError::InvalidArgument(format!(
                "unknown axis '{other}'"
            ))),
        }
    }
}

/// Pauli matrix on one site, identity elsewhere. Sites are 1-based.
pub fn pauli_string(n_qubits: usize, axis: Axis, site: usize) -> Result<HermitianOperator> {
    if n_qubits == 0 || n_qubits > 16 {
        return Err(PhaseError::UnsupportedSize(n_qubits));
    }
    if site == 0 || site > n_qubits {
        return Err(PhaseError::SiteOutOfRange { site, n_qubits });
    }
    let dim = 1usize << n_qubits;
    let bit = 1usize << (n_qubits - site);
    let mut m = CMat::zeros(dim, dim);
    for col in 0..dim {
        let down = col & bit != 0;
        match axis {
            Axis::X => m[(col ^ bit, col)] = cr(1.0),
            // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
            Axis::Y => m[(col ^ bit, col)] = if down { c(0.0, -1.0) } else { c(0.0, 1.0) },
            Axis::Z => m[(col, col)] = if down { cr(-1.0) } else { cr(1.0) },
        }
    }
    HermitianOperator::from_matrix(m)
}

/// Collective spin `S_α = ½ Σ_k σ_α^k`.
pub fn collective_spin(n_qubits: usize, axis: Axis) -> Result<HermitianOperator> {
    let dim = 1usize << n_qubits.min(16);
    let mut acc = CMat::zeros(dim, dim);
    for site in 1..=n_qubits {
        acc += pauli_string(n_qubits, axis, site)?.as_matrix();
    }
    HermitianOperator::from_matrix(acc * cr(0.5))
}

/// `−⅓(S_x² + γS_y²) − hS_z` on `n_qubits` spins with its constant part
/// `−(n/12)(1+γ)` removed.
pub fn lmg_hamiltonian_n(n_qubits: usize, gamma: f64, h: f64) -> Result<HermitianOperator> {
    let sx = collective_spin(n_qubits, Axis::X)?;
    let sy = collective_spin(n_qubits, Axis::Y)?;
    let sz = collective_spin(n_qubits, Axis::Z)?;
    let dim = sx.dim();
    let quad = sx.as_matrix() * sx.as_matrix() + sy.as_matrix() * sy.as_matrix() * cr(gamma);
    let shift = n_qubits as f64 * (1.0 + gamma) / 12.0;
    let m = quad * cr(-1.0 / 3.0) - sz.as_matrix() * cr(h) + CMat::identity(dim, dim) * cr(shift);
    HermitianOperator::from_matrix(m)
}

/// Three-qubit LMG Hamiltonian `H̃` (constant `−¼(1+γ)` dropped).
pub fn lmg_hamiltonian(gamma: f64, h: f64) -> Result<HermitianOperator> {
    lmg_hamiltonian_n(3, gamma, h)
}

/// Same operator assembled from pairwise couplings:
/// `−⅙ Σ_{j<k}(σ_x^jσ_x^k + γσ_y^jσ_y^k) − (h/2) Σ_k σ_z^k`.
pub fn lmg_hamiltonian_pairwise(n_qubits: usize, gamma: f64, h: f64) -> Result<HermitianOperator> {
    let dim = 1usize << n_qubits.min(16);
    let mut acc = CMat::zeros(dim, dim);
    for j in 1..=n_qubits {
        for k in (j + 1)..=n_qubits {
            let xx = pauli_string(n_qubits, Axis::X, j)?.as_matrix()
                * pauli_string(n_qubits, Axis::X, k)?.as_matrix();
            let yy = pauli_string(n_qubits, Axis::Y, j)?.as_matrix()
                * pauli_string(n_qubits, Axis::Y, k)?.as_matrix();
            acc += (xx + yy * cr(gamma)) * cr(-1.0 / 6.0);
        }
        acc -= pauli_string(n_qubits, Axis::Z, j)?.as_matrix() * cr(h / 2.0);
    }
    HermitianOperator::from_matrix(acc)
}

/// Maps the block basis order `{|000⟩,|011⟩,|101⟩,|110⟩,|111⟩,|100⟩,|010⟩,|001⟩}`
/// to lexicographic indices: entry `k` is the lexicographic index of the
/// `k`-th block basis state.
pub fn block_basis_permutation(n_qubits: usize) -> Result<[usize; 8]> {
    if n_qubits != 3 {
        return Err(PhaseError::UnsupportedSize(n_qubits));
    }
    Ok([0b000, 0b011, 0b101, 0b110, 0b111, 0b100, 0b010, 0b001])
}

/// Re-expresses a lexicographic-basis operator in the block basis order.
pub fn to_block_basis(op: &HermitianOperator) -> Result<HermitianOperator> {
    let perm = block_basis_permutation(3)?;
    if op.dim() != 8 {
        return Err(PhaseError::DimensionMismatch {
            expected: 8,
            actual: op.dim(),
        });
    }
    op.permuted(&perm)
}

/// Embeds a vector given in block order into the lexicographic basis.
pub fn from_block_order(v: &[Complex64]) -> Result<crate::linalg::CVec> {
    let perm = block_basis_permutation(3)?;
    if v.len() != 8 {
        return Err(PhaseError::DimensionMismatch {
            expected: 8,
            actual: v.len(),
        });
    }
    let mut out = crate::linalg::CVec::zeros(8);
    for (k, &lex) in perm.iter().enumerate() {
        out[lex] = v[k];
    }
    Ok(out)
}

/// Parameters of a rotating LMG model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub h: f64,
    pub omega: f64,
    pub axis: Axis,
    pub n_qubits: usize,
}

impl ModelParams {
    pub fn new(gamma: f64, h: f64, omega: f64, axis: Axis) -> Result<Self> {
        Self::with_qubits(gamma, h, omega, axis, 3)
    }

    pub fn with_qubits(
        gamma: f64,
        h: f64,
        omega: f64,
        axis: Axis,
        n_qubits: usize,
    ) -> Result<Self> {
        if !(gamma.is_finite() && h.is_finite()) {
            return Err(PhaseError::InvalidArgument(
                "gamma and h must be finite".into(),
            ));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(PhaseError::InvalidArgument(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if n_qubits == 0 || n_qubits > 10 {
            return Err(PhaseError::UnsupportedSize(n_qubits));
        }
        Ok(Self {
            gamma,
            h,
            omega,
            axis,
            n_qubits,
        })
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }
}

/// `H(t) = e^{−iAt} H̃ e^{iAt}` with `A = ω S_axis` and period `T = 2π/ω`.
#[derive(Debug, Clone)]
pub struct RotatingModel {
    pub tilde_h: HermitianOperator,
    pub drive: HermitianOperator,
    pub params: ModelParams,
    pub period: f64,
    drive_eigen: EigenSystem,
}

impl RotatingModel {
    /// `e^{−iAt}`.
    pub fn drive_propagator(&self, t: f64) -> Result<UnitaryOperator> {
        spectral_exp_from(&self.drive_eigen, t)
    }

    pub fn drive_eigen(&self) -> &EigenSystem {
        &self.drive_eigen
    }

    pub fn dim(&self) -> usize {
        self.tilde_h.dim()
    }
}

/// Builds the rotating model for `params`.
pub fn rotating_model(params: ModelParams) -> Result<RotatingModel> {
    if params.axis == Axis::Y {
        return Err(PhaseError::UnsupportedAxis('y'));
    }
    let tilde_h = lmg_hamiltonian_n(params.n_qubits, params.gamma, params.h)?;
    let drive = collective_spin(params.n_qubits, params.axis)?.scaled(params.omega);
    let drive_eigen = hermitian_eig_default(&drive)?;
    Ok(RotatingModel {
        tilde_h,
        drive,
        params,
        period: params.period(),
        drive_eigen,
    })
}

/// `H(t) = e^{−iAt} H̃ e^{iAt}`; `H(0)` is `H̃` bit for bit.
pub fn hamiltonian_at(model: &RotatingModel, t: f64) -> Result<HermitianOperator> {
    if t == 0.0 {
        return Ok(model.tilde_h.clone());
    }
    let w = model.drive_propagator(t)?;
    HermitianOperator::from_matrix(w.as_matrix() * model.tilde_h.as_matrix() * w.adjoint())
}

/// Entrywise check that `drive = ω · S_axis`.
pub fn drive_residual(model: &RotatingModel) -> Result<f64> {
    let s = collective_spin(model.params.n_qubits, model.params.axis)?;
    Ok(max_abs_diff(
        model.drive.as_matrix(),
        &(s.as_matrix() * cr(model.params.omega)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig_default, max_abs, CVec};

    fn basis(idx: usize) -> CVec {
        let mut v = CVec::zeros(8);
        v[idx] = cr(1.0);
        v
    }

    #[test]
    fn single_qubit_sigma_z() {
        let z = pauli_string(1, Axis::Z, 1).unwrap();
        assert_eq!(z[(0, 0)], cr(1.0));
        assert_eq!(z[(1, 1)], cr(-1.0));
        assert_eq!(z[(0, 1)], cr(0.0));
    }

    #[test]
    fn middle_qubit_down() {
        let z2 = pauli_string(3, Axis::Z, 2).unwrap();
        let v = basis(0b010);
        assert_eq!(z2.as_matrix() * &v, -v);
    }

    #[test]
    fn bit_flip_on_first_site() {
        let x1 = pauli_string(2, Axis::X, 1).unwrap();
        let mut v = CVec::zeros(4);
        v[0b00] = cr(1.0);
        let out = x1.as_matrix() * v;
        assert_eq!(out[0b10], cr(1.0));
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn site_out_of_range() {
        assert!(matches!(
            pauli_string(3, Axis::X, 4),
            Err(PhaseError::SiteOutOfRange {
                site: 4,
                n_qubits: 3
            })
        ));
        assert!(pauli_string(3, Axis::X, 0).is_err());
    }

    #[test]
    fn collective_sz_values() {
        let sz = collective_spin(3, Axis::Z).unwrap();
        assert_eq!(sz.as_matrix() * basis(0), basis(0) * cr(1.5));
        assert!((sz.expectation(&basis(0b011)) + 0.5).abs() < 1e-15);
        let sx1 = collective_spin(1, Axis::X).unwrap();
        let half_x = pauli_string(1, Axis::X, 1).unwrap().scaled(0.5);
        assert_eq!(sx1, half_x);
    }

    #[test]
    fn spin_algebra() {
        for n in 1..=3 {
            let sx = collective_spin(n, Axis::X).unwrap();
            let sy = collective_spin(n, Axis::Y).unwrap();
            let sz = collective_spin(n, Axis::Z).unwrap();
            let i = c(0.0, 1.0);
            let pairs = [(&sx, &sy, &sz), (&sy, &sz, &sx), (&sz, &sx, &sy)];
            for (a, b, cc) in pairs {
                let comm = crate::linalg::commutator(a.as_matrix(), b.as_matrix());
                assert!(max_abs_diff(&comm, &(cc.as_matrix() * i)) < 1e-12);
            }
        }
    }

    #[test]
    fn lmg_block_entries() {
        let (g, h) = (0.37, 0.81);
        let ht = lmg_hamiltonian(g, h).unwrap();
        assert!((ht[(0b000, 0b000)] - cr(-1.5 * h)).norm() < 1e-15);
        assert!((ht[(0b000, 0b011)] - cr((g - 1.0) / 6.0)).norm() < 1e-15);
        assert!((ht[(0b011, 0b101)] - cr(-(g + 1.0) / 6.0)).norm() < 1e-15);
    }

    #[test]
    fn lmg_two_construction_paths_agree() {
        for &(g, h) in &[(0.0, 0.0), (0.5, 0.3), (2.0, -1.0), (1.0, 1.0)] {
            let a = lmg_hamiltonian(g, h).unwrap();
            let b = lmg_hamiltonian_pairwise(3, g, h).unwrap();
            assert!(max_abs_diff(a.as_matrix(), b.as_matrix()) < 1e-12);
        }
    }

    #[test]
    fn permutation_positions() {
        let p = block_basis_permutation(3).unwrap();
        assert_eq!(p[0], 0);
        assert_eq!(p[1], 3);
        assert!(block_basis_permutation(2).is_err());
    }

    #[test]
    fn z_frame_generator_is_block_diagonal_in_block_basis() {
        let m = rotating_model(ModelParams::new(0.5, 0.3, 0.2, Axis::Z).unwrap()).unwrap();
        let b = m.tilde_h.sub(&m.drive).unwrap();
        let bp = to_block_basis(&b).unwrap();
        for i in 0..4 {
            for j in 4..8 {
                assert!(bp[(i, j)].norm() <= 1e-14);
                assert!(bp[(j, i)].norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn drive_in_block_basis() {
        let omega = 0.9;
        let mz = rotating_model(ModelParams::new(0.5, 0.3, omega, Axis::Z).unwrap()).unwrap();
        let az = to_block_basis(&mz.drive).unwrap();
        let expect = [3.0, -1.0, -1.0, -1.0];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 0.5 * omega * expect[i] } else { 0.0 };
                assert!((az[(i, j)] - cr(e)).norm() < 1e-15);
            }
        }
        let mx = rotating_model(ModelParams::new(0.5, 0.3, omega, Axis::X).unwrap()).unwrap();
        let ax = to_block_basis(&mx.drive).unwrap();
        for j in 5..8 {
            assert!((ax[(0, j)] - cr(0.5 * omega)).norm() < 1e-15);
        }
        assert!(ax[(0, 4)].norm() < 1e-15);
        assert!(drive_residual(&mx).unwrap() <= 1e-14);
    }

    #[test]
    fn period_and_axis_validation() {
        let m = rotating_model(ModelParams::new(0.0, 0.0, 0.5, Axis::Z).unwrap()).unwrap();
        assert!((m.period - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((m.period * m.params.omega - TAU).abs() < 1e-12);
        assert!(matches!(
            rotating_model(ModelParams::new(0.0, 0.0, 0.5, Axis::Y).unwrap()),
            Err(PhaseError::UnsupportedAxis('y'))
        ));
        assert!(ModelParams::new(0.0, 0.0, 0.0, Axis::Z).is_err());
        assert!(ModelParams::new(0.0, 0.0, -1.0, Axis::Z).is_err());
    }

    #[test]
    fn hamiltonian_at_zero_and_period() {
        let m = rotating_model(ModelParams::new(0.5, 0.3, 0.7, Axis::X).unwrap()).unwrap();
        assert_eq!(hamiltonian_at(&m, 0.0).unwrap(), m.tilde_h);
        let ht = hamiltonian_at(&m, m.period).unwrap();
        assert!(max_abs_diff(ht.as_matrix(), m.tilde_h.as_matrix()) < 1e-12);
    }

    #[test]
    fn isospectral_and_periodic() {
        let m = rotating_model(ModelParams::new(2.0, 1.0, 0.3, Axis::Z).unwrap()).unwrap();
        let ref_vals = hermitian_eig_default(&m.tilde_h).unwrap().values;
        for &t in &[0.3, 1.7, 11.0] {
            let ht = hamiltonian_at(&m, t).unwrap();
            let vals = hermitian_eig_default(&ht).unwrap().values;
            for (a, b) in vals.iter().zip(&ref_vals) {
                assert!((a - b).abs() < 1e-10);
            }
            let shifted = hamiltonian_at(&m, t + m.period).unwrap();
            assert!(max_abs_diff(shifted.as_matrix(), ht.as_matrix()) < 1e-12);
            assert!(max_abs(ht.as_matrix()) > 0.0);
        }
    }
}
