//! Closed-form spectra, eigenvectors and phases of the three-qubit LMG
//! model, evaluated directly from their formulas.
//!
//! Vectors are given in the ordered basis
//! `{|000⟩,|011⟩,|101⟩,|110⟩,|111⟩,|100⟩,|010⟩,|001⟩}`: the first four
//! states form the even block (an even number of down spins), the last four
//! the odd block. [`lift`] maps such a vector into the lexicographic basis
//! used everywhere else.
//!
//! Normalizations are exact squared norms of the unnormalized vectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::phase;
use crate::error::{PhaseError, Result};
use crate::linalg::{cr, CMat, CVec, HermitianOperator, StateVector};
use crate::spin::from_block_order;

/// Negative discriminants down to this size are rounding and get clamped.
const DISCRIMINANT_SLACK: f64 = 1e-12;
/// Relative size below which a squared norm counts as vanished.
const NORM_FLOOR: f64 = 1e-20;

/// Parity block of the reordered basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Even,
    Odd,
}

impl Block {
    /// Sign applied to `(h, ω)` to reuse the even-block formulas, which is
    /// also the sign of the drive on the block.
    pub fn sign(self) -> f64 {
        match self {
            Block::Even => 1.0,
            Block::Odd => -1.0,
        }
    }

    fn offset(self) -> usize {
        match self {
            Block::Even => 0,
            Block::Odd => 4,
        }
    }
}

/// Which of the two non-degenerate branches: `One` carries `−√r`, `Two`
/// carries `+√r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Branch::One),
            2 => Ok(Branch::Two),
            _ => Err(PhaseError::InvalidArgument(format!(
                "branch index must be 1 or 2, got {index}"
            ))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Branch::One => 1,
            Branch::Two => 2,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Branch::One => -1.0,
            Branch::Two => 1.0,
        }
    }
}

fn checked_sqrt(value: f64) -> Result<f64> {
    if value < -DISCRIMINANT_SLACK {
        return Err(PhaseError::NegativeDiscriminant { value });
    }
    Ok(value.max(0.0).sqrt())
}

/// `r(γ, s)` with `s = h + ω`.
fn discriminant(gamma: f64, s: f64) -> f64 {
    9.0 * s * s + gamma * gamma - 3.0 * s * gamma - 3.0 * s - gamma + 1.0
}

/// Eigenvalues of the 4×4 block `P(γ,h,ω)` of the z-model frame generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZModelSpectrum {
    pub r: f64,
    pub p1: f64,
    pub p2: f64,
    pub p34: f64,
}

pub fn z_spectrum_closed(gamma: f64, h: f64, omega: f64) -> Result<ZModelSpectrum> {
    let r = 9.0 * h * h + 9.0 * omega * omega + gamma * gamma + 18.0 * h * omega
        - 3.0 * h * gamma
        - 3.0 * gamma * omega
        - 3.0 * omega
        - 3.0 * h
        - gamma
        + 1.0;
    let root = checked_sqrt(r)?;
    let base = -0.5 * (omega + h) - (1.0 + gamma) / 6.0;
    Ok(ZModelSpectrum {
        r,
        p1: base - root / 3.0,
        p2: base + root / 3.0,
        p34: 0.5 * (h + omega) + (1.0 + gamma) / 6.0,
    })
}

/// Unnormalized `(γ+1−6s∓2√r, γ−1, γ−1, γ−1)` for field `s`.
fn branch_vector(gamma: f64, s: f64, branch: Branch) -> Result<[f64; 4]> {
    let root = checked_sqrt(discriminant(gamma, s))?;
    let a = gamma + 1.0 - 6.0 * s + branch.sign() * 2.0 * root;
    let c = gamma - 1.0;
    Ok([a, c, c, c])
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn check_norm(v: &[f64; 4], gamma: f64, s: f64) -> Result<f64> {
    let n = squared_norm(v);
    let scale = 1.0 + gamma.abs() + 6.0 * s.abs();
    if n <= NORM_FLOOR * scale * scale {
        return Err(PhaseError::DegenerateNormalization { norm: n });
    }
    Ok(n)
}

/// `3π(a² − c²)/n − π` for a block vector `(a, c, c, c)`, with the drive
/// sign of the block folded in.
fn block_phase(v: &[f64; 4], n: f64, drive_sign: f64) -> f64 {
    phase(drive_sign * 3.0 * PI * (v[0] * v[0] - v[1] * v[1]) / n - PI)
}

/// Unnormalized non-degenerate cyclic vector of the z-model on one block,
/// as four block components.
pub fn z_eigenvector_closed(
    gamma: f64,
    h: f64,
    omega: f64,
    branch: Branch,
    block: Block,
) -> Result<[f64; 4]> {
    let s = block.sign() * (h + omega);
    let v = branch_vector(gamma, s, branch)?;
    check_norm(&v, gamma, s)?;
    Ok(v)
}

/// A-A phase of a non-degenerate z-model cyclic state on the even block.
pub fn aa_phase_closed(gamma: f64, h: f64, omega: f64, index: usize) -> Result<f64> {
    aa_phase_closed_block(gamma, h, omega, Branch::from_index(index)?, Block::Even)
}

/// A-A phase on either block. The odd block is `P(γ,−h,−ω)` with the drive
/// reversed.
pub fn aa_phase_closed_block(
    gamma: f64,
    h: f64,
    omega: f64,
    branch: Branch,
    block: Block,
) -> Result<f64> {
    let s = block.sign() * (h + omega);
    let v = branch_vector(gamma, s, branch)?;
    let n = check_norm(&v, gamma, s)?;
    Ok(block_phase(&v, n, block.sign()))
}

/// Spans of the degenerate `p₃ = p₄` eigenspace on a block.
pub fn z_degenerate_span(block: Block) -> [[f64; 8]; 2] {
    let mut a = [0.0; 8];
    let mut b = [0.0; 8];
    let o = block.offset();
    a[o + 1] = 1.0;
    a[o + 2] = -1.0;
    b[o + 1] = 1.0;
    b[o + 2] = 1.0;
    b[o + 3] = -2.0;
    [a, b]
}

/// The two degenerate eigenvalues `(B₁, B₂)` of the x-model frame generator.
pub fn x_spectrum_closed(gamma: f64, h: f64, omega: f64) -> (f64, f64) {
    let rho = h.hypot(omega);
    (
        (1.0 + gamma - 3.0 * rho) / 6.0,
        (1.0 + gamma + 3.0 * rho) / 6.0,
    )
}

fn x_ratio(h: f64, omega: f64) -> Result<(f64, f64)> {
    let rho = h.hypot(omega);
    if rho == 0.0 {
        return Err(PhaseError::UndefinedDirection);
    }
    Ok((rho, omega / rho))
}

/// Scalar connection on x-model group 1 or 2.
pub fn x_connection_closed(h: f64, omega: f64, group: usize) -> Result<f64> {
    let (_, ratio) = x_ratio(h, omega)?;
    match Branch::from_index(group)? {
        Branch::One => Ok(0.5 * omega * (ratio - 1.0)),
        Branch::Two => Ok(-0.5 * omega * (ratio + 1.0)),
    }
}

/// Holonomy angle φ of x-model group 1 or 2; the factor is `e^{iφ} I₂`.
pub fn x_holonomy_closed(h: f64, omega: f64, group: usize) -> Result<f64> {
    let (_, ratio) = x_ratio(h, omega)?;
    match Branch::from_index(group)? {
        Branch::One => Ok(phase(PI * (ratio - 1.0))),
        Branch::Two => Ok(phase(-PI * (ratio + 1.0))),
    }
}

/// Unnormalized eigenvectors spanning x-model group 1 or 2, in block order.
pub fn x_eigenvectors_closed(h: f64, omega: f64, group: usize) -> Result<[[f64; 8]; 2]> {
    if omega == 0.0 {
        return Err(PhaseError::InvalidArgument(
            "x-model eigenvectors need omega != 0".into(),
        ));
    }
    let (rho, _) = x_ratio(h, omega)?;
    Ok(match Branch::from_index(group)? {
        Branch::One => {
            let u = (rho - h) / omega;
            [
                [0.0, u, 0.0, -u, 0.0, -1.0, 0.0, 1.0],
                [0.0, u / 2.0, -u, u / 2.0, 0.0, -0.5, 1.0, -0.5],
            ]
        }
        Branch::Two => {
            let v = (h + rho) / omega;
            [
                [0.0, -v, 0.0, v, 0.0, -1.0, 0.0, 1.0],
                [0.0, -v / 2.0, v, -v / 2.0, 0.0, -0.5, 1.0, -0.5],
            ]
        }
    })
}

/// Eigenvalues of the non-degenerate part of the even block of `H̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerrySpectrum {
    pub q: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn berry_spectrum_closed(gamma: f64, h: f64) -> Result<BerrySpectrum> {
    let q = 9.0 * h * h + gamma * gamma - 3.0 * h * gamma - 3.0 * h - gamma + 1.0;
    let root = checked_sqrt(q)?;
    Ok(BerrySpectrum {
        q,
        lambda1: -(1.0 + gamma + 3.0 * h + 2.0 * root) / 6.0,
        lambda2: -(1.0 + gamma + 3.0 * h - 2.0 * root) / 6.0,
    })
}

/// Unnormalized `(1+γ−6h∓2√q, γ−1, γ−1, γ−1)` on a block.
pub fn berry_eigenvector_closed(
    gamma: f64,
    h: f64,
    branch: Branch,
    block: Block,
) -> Result<[f64; 4]> {
    z_eigenvector_closed(gamma, h, 0.0, branch, block)
}

/// Berry phase `⟨n′|A|n′⟩T − π` of an even-block eigenvector of `H̃`.
pub fn berry_phase_closed(gamma: f64, h: f64, index: usize) -> Result<f64> {
    berry_phase_closed_block(gamma, h, Branch::from_index(index)?, Block::Even)
}

pub fn berry_phase_closed_block(gamma: f64, h: f64, branch: Branch, block: Block) -> Result<f64> {
    let s = block.sign() * h;
    let v = branch_vector(gamma, s, branch)?;
    let n = check_norm(&v, gamma, s)?;
    Ok(block_phase(&v, n, block.sign()))
}

/// Places four block components into an 8-vector in block order.
pub fn embed_block(v: &[f64; 4], block: Block) -> [f64; 8] {
    let mut out = [0.0; 8];
    out[block.offset()..block.offset() + 4].copy_from_slice(v);
    out
}

/// Maps a real vector in block order to the lexicographic basis.
pub fn lift(v: &[f64; 8]) -> CVec {
    let cv: Vec<Complex64> = v.iter().map(|&x| cr(x)).collect();
    from_block_order(&cv).expect("eight components")
}

/// Normalized state from a vector in block order.
pub fn lift_state(v: &[f64; 8]) -> Result<StateVector> {
    StateVector::normalized(lift(v))
}

fn real_operator(rows: &[&[f64]]) -> HermitianOperator {
    let n = rows.len();
    HermitianOperator::from_matrix(CMat::from_fn(n, n, |i, j| cr(rows[i][j])))
        .expect("block matrices are symmetric")
}

/// `P(γ,h,ω)` entry by entry.
pub fn block_p(gamma: f64, h: f64, omega: f64) -> HermitianOperator {
    let d = -1.5 * (h + omega);
    let e = 0.5 * (h + omega);
    let x = -(1.0 - gamma) / 6.0;
    let y = -(1.0 + gamma) / 6.0;
    real_operator(&[&[d, x, x, x], &[x, e, y, y], &[x, y, e, y], &[x, y, y, e]])
}

/// Even block of `H̃`, which is `P(γ,h,0)`.
pub fn static_block(gamma: f64, h: f64) -> HermitianOperator {
    block_p(gamma, h, 0.0)
}

/// Even block of the z drive, `(ω/2)·diag(3,−1,−1,−1)`.
pub fn block_drive_z(omega: f64) -> HermitianOperator {
    let w = 0.5 * omega;
    let d = [3.0 * w, -w, -w, -w];
    HermitianOperator::from_matrix(CMat::from_fn(
        4,
        4,
        |i, j| if i == j { cr(d[i]) } else { cr(0.0) },
    ))
    .expect("diagonal")
}

/// x drive `ω S_x` in block order.
pub fn block_drive_x(omega: f64) -> HermitianOperator {
    let w = 0.5 * omega;
    HermitianOperator::from_matrix(CMat::from_fn(8, 8, |i, j| {
        let crosses = (i < 4) != (j < 4);
        if crosses && i % 4 != j % 4 {
            cr(w)
        } else {
            cr(0.0)
        }
    }))
    .expect("symmetric")
}

/// x-model frame generator `H̃ − ωS_x` in block order.
pub fn block_x_frame_generator(gamma: f64, h: f64, omega: f64) -> HermitianOperator {
    let upper = block_p(gamma, h, 0.0);
    let lower = block_p(gamma, -h, 0.0);
    let drive = block_drive_x(omega);
    let m = CMat::from_fn(8, 8, |i, j| {
        let block = match (i < 4, j < 4) {
            (true, true) => upper[(i, j)],
            (false, false) => lower[(i - 4, j - 4)],
            _ => cr(0.0),
        };
        block - drive[(i, j)]
    });
    HermitianOperator::from_matrix(m).expect("symmetric")
}

/// z-model frame generator `P(γ,h,ω) ⊕ P(γ,−h,−ω)` in block order.
pub fn block_z_frame_generator(gamma: f64, h: f64, omega: f64) -> HermitianOperator {
    let upper = block_p(gamma, h, omega);
    let lower = block_p(gamma, -h, -omega);
    let m = CMat::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, true) => upper[(i, j)],
        (false, false) => lower[(i - 4, j - 4)],
        _ => cr(0.0),
    });
    HermitianOperator::from_matrix(m).expect("symmetric")
}
